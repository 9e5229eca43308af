"""Source-to-source translation of a checked program into a standalone
Python program.

Each rule becomes one function with its trigger expression inlined and the
action chain lowered to connector-conditional calls; everything with
observable behavior goes through the same support layer the interpreter
uses, so the generated program is equivalent by construction. Generated
output is deterministic except for the generated-at manifest line.
"""

from __future__ import annotations

import datetime

from . import __version__
from .checker import CheckedProgram
from .syntax import Binary, Call, Literal, Name, Rule, Unary
from .typesys import ValueType

_INT_BINOPS = {"+": "iadd", "-": "isub", "*": "imul", "/": "idiv"}


class _Gen:
    def __init__(self, checked: CheckedProgram):
        self.checked = checked

    # --- expressions ---

    def expr(self, e) -> str:
        if isinstance(e, Literal):
            return repr(e.value)
        if isinstance(e, Name):
            sym = e.binding
            if sym.kind == "var":
                return f"env.variables[{sym.name!r}]"
            if sym.kind == "predefined":
                if sym.name == "CurrLevel":
                    return "E.machine.current"
                if sym.name == "Time":
                    return "env.time_ns"
                return "(env.time_ns - env.start_ns)"
            # const / level / rule-local const: folded value inlined
            return repr(sym.value)
        if isinstance(e, Unary):
            inner = self.expr(e.operand)
            if e.op == "!":
                return f"(not {inner})"
            if e.op == "-":
                if e.ty.value_type is ValueType.INT:
                    return f"_rt.ineg({inner})"
                return f"(-{inner})"
            if e.op == "~":
                return f"(~{inner})"
            return f"({inner})"
        if isinstance(e, Binary):
            a = self.expr(e.left)
            b = self.expr(e.right)
            op = e.op
            if op == "&&":
                return f"({a} and {b})"
            if op == "||":
                return f"({a} or {b})"
            vt = e.ty.value_type
            if op == "+" and vt is ValueType.STRING:
                return f"_rt.concat({a}, {b})"
            if op == "%":
                return f"_rt.imod({a}, {b})"
            if op == "/" and vt is ValueType.FLOAT:
                return f"_rt.fdiv({a}, {b})"
            if vt is ValueType.INT and op in _INT_BINOPS:
                return f"_rt.{_INT_BINOPS[op]}({a}, {b})"
            return f"({a} {op} {b})"
        if isinstance(e, Call):
            return self.call(e)
        raise AssertionError(f"unexpected node {e!r}")

    def call(self, call: Call) -> str:
        name = call.name
        if name == "topicmatches":
            return f"REGEXES[{call.resource[1]}].full_match(ctx.topic)"
        if name == "payload":
            return f"PATTERNS[{call.resource[1]}].match(ctx.payload)"
        if name == "plugin":
            return f"E.run_plugin(PLUGINS[{call.resource[1]}], ctx.payload)"
        if name == "signal":
            return f"E.counters.consume({call.resource[1]!r})"
        if name == "idsalert":
            return f"E.ids.search({self.expr(call.args[0])})"
        if name == "levelname":
            return f"E.levelname({self.expr(call.args[0])})"
        if name == "string":
            return f"_rt.to_string({self.expr(call.args[0])})"
        args = ", ".join(self.expr(a) for a in call.args)
        return f"_rt.{name}(ctx{', ' if args else ''}{args})"

    # --- actions and chains ---

    def action(self, call: Call) -> str:
        name = call.name
        if name == "set":
            return f"r = E.act_set({call.args[0].name!r}, {self.expr(call.args[1])})"
        if name == "alert":
            return f"r = E.act_alert({self.expr(call.args[0])})"
        if name == "trigger":
            return f"r = E.act_trigger({self.expr(call.args[0])})"
        if name == "crash":
            return f"r = E.act_crash({self.expr(call.args[0])})"
        if name == "exec":
            path = self.expr(call.args[0])
            rest = "".join(f"{self.expr(a)}, " for a in call.args[1:])
            return f"r = E.act_exec({path}, ({rest}))"
        vals = "".join(f"{self.expr(a)}, " for a in call.args)
        method = "act_true" if name == "True" else "act_false"
        return f"r = E.{method}(({vals}))"

    def rule_fn(self, fn_name: str, rule: Rule) -> list[str]:
        lines = [f"def {fn_name}(E, env, ctx):"]
        lines.append(f"    if not ({self.expr(rule.trigger)}):")
        lines.append("        return")
        indent = "    "
        for idx, item in enumerate(rule.chain):
            if idx:
                conn = rule.chain[idx - 1].connector
                if conn == "=>":
                    lines.append(f"{indent}if r:")
                    indent += "    "
                elif conn == "!>":
                    lines.append(f"{indent}if not r:")
                    indent += "    "
            lines.append(indent + self.action(item.action))
        lines.append("")
        lines.append("")
        return lines


def transpile(checked: CheckedProgram, timestamp: str | None = None) -> str:
    """Emit a standalone Python program equivalent to interpreting
    ``checked``."""
    gen = _Gen(checked)
    if timestamp is None:
        timestamp = datetime.datetime.now(datetime.timezone.utc).isoformat()

    out: list[str] = []
    w = out.append
    w("#!/usr/bin/env python3")
    w(f"# Generated rule program; do not edit.")
    w(f"# source: {checked.source_name}")
    w(f"# engine-version: {__version__}")
    w(f"# generated-at: {timestamp}")
    w("")
    w("import sys")
    w("")
    w("from rips import support as _rt")
    w("")
    levels = [(d.name, d.soft) for d in checked.levels]
    w(f"LEVELS = {levels!r}")
    w(f"SCRIPTS_DIR = {checked.scripts_dir!r}")
    res = checked.resources
    if res.regex_sources:
        w("REGEXES = [")
        for src in res.regex_sources:
            w(f"    _rt.compile_regex({src!r}),")
        w("]")
    else:
        w("REGEXES = []")
    if res.pattern_paths:
        w("PATTERNS = [")
        for path in res.pattern_paths:
            w(f"    _rt.load_pattern_file({path!r}),")
        w("]")
    else:
        w("PATTERNS = []")
    w(f"PLUGINS = {res.plugins!r}")
    w(f"VAR_INIT = {checked.var_initial!r}")
    w("")
    w("")

    tables: dict[str, list[tuple[str, str]]] = {}
    for prefix, attr in (("_g", "graph_rules"), ("_m", "msg_rules"), ("_x", "external_rules")):
        entries: list[tuple[str, str]] = []
        for i, rule in enumerate(getattr(checked, attr)):
            fn_name = f"{prefix}{i}"
            out.extend(gen.rule_fn(fn_name, rule))
            entries.append((rule.rule_id, fn_name))
        tables[attr] = entries

    for label, attr in (("GRAPH_RULES", "graph_rules"), ("MSG_RULES", "msg_rules"), ("EXTERNAL_RULES", "external_rules")):
        entries = tables[attr]
        if not entries:
            w(f"{label} = []")
            continue
        w(f"{label} = [")
        for rule_id, fn_name in entries:
            w(f"    ({rule_id!r}, {fn_name}),")
        w("]")
    w("")
    w("")
    w("def build_engine(clock=None, runner=None, counters=None, sink=None, config=None):")
    w("    return _rt.CompiledEngine(")
    w("        levels=LEVELS,")
    w("        scripts_dir=SCRIPTS_DIR,")
    w("        var_init=dict(VAR_INIT),")
    w("        graph_rules=GRAPH_RULES,")
    w("        msg_rules=MSG_RULES,")
    w("        external_rules=EXTERNAL_RULES,")
    w("        regexes=REGEXES,")
    w("        patterns=PATTERNS,")
    w("        plugins=PLUGINS,")
    w("        clock=clock,")
    w("        runner=runner,")
    w("        counters=counters,")
    w("        sink=sink,")
    w("        config=config,")
    w("    )")
    w("")
    w("")
    w("def main(argv=None):")
    w("    return _rt.compiled_main(build_engine, argv, levels=LEVELS,")
    w("                             scripts_dir=SCRIPTS_DIR, plugins=PLUGINS)")
    w("")
    w("")
    w('if __name__ == "__main__":')
    w("    sys.exit(main())")
    w("")
    return "\n".join(out)


def load_generated(source: str, module_name: str = "generated_rules"):
    """Compile and execute generated source in-process; returns the module
    namespace (exposing build_engine and main)."""
    import types

    module = types.ModuleType(module_name)
    code = compile(source, f"<{module_name}>", "exec")
    exec(code, module.__dict__)
    return module
