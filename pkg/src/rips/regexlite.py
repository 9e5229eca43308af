"""Small regular-expression engine with linear-time matching.

Supports literals, ``.``, character classes (ranges, negation), grouping,
alternation and the ``* + ?`` quantifiers, plus ``\\d \\w \\s`` and literal
escapes. No backreferences, no lookaround, no counted repeats: patterns
compile to a Thompson NFA and matching simulates it with state sets, so the
worst case stays O(len(pattern) * len(input)).

Matching is whole-string: a leading ``^`` or trailing ``$`` is accepted and
ignored, anchors anywhere else are rejected.
"""

from __future__ import annotations


class PatternError(ValueError):
    """Invalid or unsupported pattern syntax."""


_DIGITS = (("0", "9"),)
_WORD = (("0", "9"), ("A", "Z"), ("a", "z"), ("_", "_"))
_SPACE = ((" ", " "), ("\t", "\t"), ("\n", "\n"), ("\r", "\r"), ("\f", "\f"), ("\v", "\v"))

_CLASS_ESCAPES = {"d": _DIGITS, "w": _WORD, "s": _SPACE}
_CHAR_ESCAPES = {"n": "\n", "t": "\t", "r": "\r", "f": "\f", "v": "\v", "0": "\0"}


class _Matcher:
    """A single-character test: explicit ranges, possibly negated; None means any."""

    __slots__ = ("ranges", "negated")

    def __init__(self, ranges, negated=False):
        self.ranges = ranges  # tuple of (lo, hi) char pairs, or None for '.'
        self.negated = negated

    def matches(self, c: str) -> bool:
        if self.ranges is None:
            return True
        hit = any(lo <= c <= hi for lo, hi in self.ranges)
        return hit != self.negated


class _Parser:
    def __init__(self, pattern: str):
        self.pat = pattern
        self.pos = 0

    def error(self, msg: str):
        raise PatternError(f"{msg} (at offset {self.pos} in {self.pat!r})")

    def peek(self) -> str | None:
        return self.pat[self.pos] if self.pos < len(self.pat) else None

    def take(self) -> str:
        c = self.pat[self.pos]
        self.pos += 1
        return c

    def parse(self):
        node = self.alternation()
        if self.pos != len(self.pat):
            self.error(f"unexpected {self.pat[self.pos]!r}")
        return node

    def alternation(self):
        branches = [self.concat()]
        while self.peek() == "|":
            self.take()
            branches.append(self.concat())
        return ("alt", branches) if len(branches) > 1 else branches[0]

    def concat(self):
        items = []
        while True:
            c = self.peek()
            if c is None or c in "|)":
                break
            items.append(self.repeat())
        if not items:
            return ("empty",)
        return ("cat", items) if len(items) > 1 else items[0]

    def repeat(self):
        node = self.atom()
        while self.peek() in ("*", "+", "?"):
            op = self.take()
            node = ({"*": "star", "+": "plus", "?": "opt"}[op], node)
        return node

    def atom(self):
        c = self.take()
        if c == "(":
            node = self.alternation()
            if self.peek() != ")":
                self.error("unbalanced '('")
            self.take()
            return node
        if c == "[":
            return ("match", self.char_class())
        if c == ".":
            return ("match", _Matcher(None))
        if c == "\\":
            return ("match", self.escape())
        if c == "{":
            self.error("counted repeats are not supported")
        if c in "*+?":
            self.error(f"quantifier {c!r} with nothing to repeat")
        if c in "^$":
            self.error("anchors are only allowed at the pattern edges")
        return ("match", _Matcher(((c, c),)))

    def escape(self) -> _Matcher:
        if self.peek() is None:
            self.error("trailing backslash")
        c = self.take()
        if c in _CLASS_ESCAPES:
            return _Matcher(_CLASS_ESCAPES[c])
        if c in _CHAR_ESCAPES:
            ch = _CHAR_ESCAPES[c]
            return _Matcher(((ch, ch),))
        if c == "x":
            hexpart = self.pat[self.pos : self.pos + 2]
            if len(hexpart) < 2 or not all(h in "0123456789abcdefABCDEF" for h in hexpart):
                self.error("\\x needs two hex digits")
            self.pos += 2
            ch = chr(int(hexpart, 16))
            return _Matcher(((ch, ch),))
        if c.isalnum():
            self.error(f"unsupported escape \\{c}")
        return _Matcher(((c, c),))

    def char_class(self) -> _Matcher:
        negated = False
        if self.peek() == "^":
            self.take()
            negated = True
        ranges: list[tuple[str, str]] = []
        first = True
        while True:
            c = self.peek()
            if c is None:
                self.error("unterminated character class")
            if c == "]" and not first:
                self.take()
                break
            first = False
            lo = self.class_char()
            if self.peek() == "-" and self.pos + 1 < len(self.pat) and self.pat[self.pos + 1] != "]":
                self.take()
                hi = self.class_char()
                if isinstance(lo, tuple) or isinstance(hi, tuple):
                    self.error("class escapes cannot form a range")
                if hi < lo:
                    self.error("reversed range in character class")
                ranges.append((lo, hi))
            elif isinstance(lo, tuple):
                ranges.extend(lo)
            else:
                ranges.append((lo, lo))
        if not ranges:
            self.error("empty character class")
        return _Matcher(tuple(ranges), negated)

    def class_char(self):
        c = self.take()
        if c == "\\":
            if self.peek() is None:
                self.error("trailing backslash")
            e = self.take()
            if e in _CLASS_ESCAPES:
                return _CLASS_ESCAPES[e]  # expands to ranges; no '-' allowed after
            if e in _CHAR_ESCAPES:
                return _CHAR_ESCAPES[e]
            if e == "x":
                hexpart = self.pat[self.pos : self.pos + 2]
                if len(hexpart) < 2 or not all(h in "0123456789abcdefABCDEF" for h in hexpart):
                    self.error("\\x needs two hex digits")
                self.pos += 2
                return chr(int(hexpart, 16))
            if e.isalnum():
                self.error(f"unsupported escape \\{e}")
            return e
        return c


class CompiledPattern:
    """Thompson NFA compiled from a pattern; matches whole strings."""

    def __init__(self, pattern: str):
        self.pattern = pattern
        body = pattern
        if body.startswith("^"):
            body = body[1:]
        if body.endswith("$") and not body.endswith("\\$"):
            body = body[:-1]
        tree = _Parser(body).parse()
        # States: epsilon edges and at most one consuming edge each.
        self.eps: list[list[int]] = []
        self.edge: list[tuple[_Matcher, int] | None] = []
        start, accept = self._build(tree)
        self.start = start
        self.accept = accept

    def _new_state(self) -> int:
        self.eps.append([])
        self.edge.append(None)
        return len(self.eps) - 1

    def _build(self, node) -> tuple[int, int]:
        kind = node[0]
        if kind == "empty":
            s = self._new_state()
            return s, s
        if kind == "match":
            s = self._new_state()
            t = self._new_state()
            self.edge[s] = (node[1], t)
            return s, t
        if kind == "cat":
            first_s, prev_t = self._build(node[1][0])
            for item in node[1][1:]:
                s, t = self._build(item)
                self.eps[prev_t].append(s)
                prev_t = t
            return first_s, prev_t
        if kind == "alt":
            s = self._new_state()
            t = self._new_state()
            for branch in node[1]:
                bs, bt = self._build(branch)
                self.eps[s].append(bs)
                self.eps[bt].append(t)
            return s, t
        if kind == "star":
            s = self._new_state()
            t = self._new_state()
            bs, bt = self._build(node[1])
            self.eps[s] += [bs, t]
            self.eps[bt] += [bs, t]
            return s, t
        if kind == "plus":
            bs, bt = self._build(node[1])
            t = self._new_state()
            self.eps[bt] += [bs, t]
            return bs, t
        if kind == "opt":
            s = self._new_state()
            t = self._new_state()
            bs, bt = self._build(node[1])
            self.eps[s] += [bs, t]
            self.eps[bt].append(t)
            return s, t
        raise AssertionError(kind)

    def _closure(self, states: set[int]) -> set[int]:
        stack = list(states)
        seen = set(states)
        while stack:
            s = stack.pop()
            for t in self.eps[s]:
                if t not in seen:
                    seen.add(t)
                    stack.append(t)
        return seen

    def full_match(self, text: str) -> bool:
        current = self._closure({self.start})
        for c in text:
            nxt = set()
            for s in current:
                e = self.edge[s]
                if e is not None and e[0].matches(c):
                    nxt.add(e[1])
            if not nxt:
                return False
            current = self._closure(nxt)
        return self.accept in current


def compile_pattern(pattern: str) -> CompiledPattern:
    return CompiledPattern(pattern)
