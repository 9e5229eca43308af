import os

import pytest

from rips.patterns import PatternFileError, load_pattern_file, parse_pattern_text

from conftest import DATA_DIR

SHELLCODE = bytes.fromhex("31c050682f2f7368682f62696e89e3505389e1b00bcd80")


def test_shellcode_fixture_parses_and_matches():
    pf = load_pattern_file(os.path.join(DATA_DIR, "yaraexp3.yar"))
    assert len(pf.rules) == 1
    rule = pf.rules[0]
    assert rule.name == "experiment3"
    assert rule.strings["payload"] == SHELLCODE
    assert pf.match(b"prefix" + SHELLCODE + b"suffix")
    assert pf.match(SHELLCODE)  # the payload equal to the pattern exactly
    mutated = bytearray(SHELLCODE)
    mutated[10] ^= 0x01
    assert not pf.match(bytes(mutated))


def test_empty_payload_never_matches_nonempty_pattern():
    pf = parse_pattern_text('rule r { strings: $a = "xy" condition: $a }')
    assert not pf.match(b"")


def test_escape_decoding():
    pf = parse_pattern_text(r'rule r { strings: $a = "a\n\t\\\"\x00z" condition: $a }')
    assert pf.rules[0].strings["a"] == b'a\n\t\\"\x00z'


def test_condition_boolean_combinations():
    source = """
    rule combo {
        strings:
            $a = "AA"
            $b = "BB"
            $c = "CC"
        condition:
            ($a and $b) or (not $c)
    }
    """
    pf = parse_pattern_text(source)
    assert pf.match(b"xxAAyyBBzzCC")   # a and b
    assert pf.match(b"nothing here")   # not c
    assert not pf.match(b"xxAAyyCC")   # only a, and c present
    assert pf.match(b"xxBByyAA")       # order independent


def test_multiple_rules_any_match():
    source = """
    rule first { strings: $a = "one" condition: $a }
    rule second { strings: $b = "two" condition: $b }
    """
    pf = parse_pattern_text(source)
    assert pf.match(b"has one")
    assert pf.match(b"has two")
    assert not pf.match(b"has zilch")


def test_comment_styles():
    source = (
        "// leading\n"
        "rule r : tagged {\n"
        "   # hash comment\n"
        "   strings:\n"
        '      $a = "zz" /* inline */\n'
        "   condition:\n"
        "      $a\n"
        "}\n"
    )
    pf = parse_pattern_text(source)
    assert pf.match(b"fuzzz")


def test_undefined_pattern_in_condition():
    with pytest.raises(PatternFileError, match="undefined pattern"):
        parse_pattern_text("rule r { strings: $a = \"x\" condition: $b }")


def test_unterminated_string():
    with pytest.raises(PatternFileError, match="unterminated string"):
        parse_pattern_text('rule r { strings: $a = "x condition: $a }')


def test_empty_file_rejected():
    with pytest.raises(PatternFileError, match="no rules"):
        parse_pattern_text("// nothing\n")


def test_duplicate_pattern_name_rejected():
    with pytest.raises(PatternFileError, match="duplicate pattern"):
        parse_pattern_text('rule r { strings: $a = "x" $a = "y" condition: $a }')


def test_condition_without_strings_section():
    with pytest.raises(PatternFileError, match="undefined pattern"):
        parse_pattern_text("rule r { condition: $a }")


def test_substring_matcher_agrees_with_naive_scan_small():
    import random

    rng = random.Random(99)
    for _ in range(200):
        payload = bytes(rng.randrange(4) for _ in range(rng.randint(0, 200)))
        needle = bytes(rng.randrange(4) for _ in range(rng.randint(1, 6)))
        escaped = "".join(f"\\x{b:02x}" for b in needle)
        pf = parse_pattern_text(f'rule r {{ strings: $p = "{escaped}" condition: $p }}')
        naive = any(payload[i : i + len(needle)] == needle for i in range(len(payload) - len(needle) + 1))
        assert pf.match(payload) == naive
