"""Static checking: symbol resolution, the two-part type discipline,
constant folding, usage analysis, resource validation and transition-script
checks.

The checker is strict: anything that can be caught statically is an error,
and all diagnostics found in one pass are reported together, in source
order.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

from . import regexlite
from .errors import Diagnostic, EvalFault, StaticError
from .patterns import PatternFile, PatternFileError, load_pattern_file
from .parser import parse_source
from .signatures import ACTIONS, EXPRESSION_BUILTINS, KNOWN_SIGNALS, BuiltinSig
from .syntax import Binary, Call, Literal, Name, Program, Rule, SectionKind, Unary
from .typesys import (
    ExprType,
    SECTION_EXPR_TYPE,
    TypeTuple,
    ValueType,
    VALUE_TYPE_BY_NAME,
    meet_expr,
)
from . import values

_RESERVED = ("CurrLevel", "Time", "Uptime", "CurrRule")


@dataclass
class Symbol:
    name: str
    kind: str  # level | const | var | predefined | rule_const
    type: TypeTuple
    value: object = None  # folded constant / level ordinal / var initial value
    mutable: bool = False
    pos: tuple[int, int] = (0, 0)
    level_init: bool = False  # var initialized with a level name
    read: bool = False
    written: bool = False


@dataclass
class Resources:
    """Constant arguments validated and prepared at compile time."""

    regex_sources: list[str] = field(default_factory=list)
    regexes: list[regexlite.CompiledPattern] = field(default_factory=list)
    pattern_paths: list[str] = field(default_factory=list)
    patterns: list[PatternFile] = field(default_factory=list)
    plugins: list[str] = field(default_factory=list)


@dataclass
class CheckedProgram:
    program: Program
    symbols: dict[str, Symbol]
    var_initial: dict[str, object]
    resources: Resources
    scripts_dir: str | None
    scripts: dict[str, tuple[str, str]] | None  # level -> (to, from) paths
    graph_rules: list[Rule]
    msg_rules: list[Rule]
    external_rules: list[Rule]

    @property
    def levels(self):
        return self.program.levels

    @property
    def source_name(self) -> str:
        return self.program.source_name

    def rules_for(self, kind: SectionKind) -> list[Rule]:
        return {
            SectionKind.GRAPH: self.graph_rules,
            SectionKind.MSG: self.msg_rules,
            SectionKind.EXTERNAL: self.external_rules,
        }[kind]


class _UnitAbort(Exception):
    """Stop checking the current declaration/rule after a diagnostic."""


class _NotConstant(Exception):
    def __init__(self, node):
        self.node = node


_BOOL = TypeTuple(ValueType.BOOL, ExprType.UNIVERSAL)

_NUMERIC = (ValueType.INT, ValueType.FLOAT)
_ORDERED = (ValueType.INT, ValueType.FLOAT, ValueType.STRING)
_EQUAL = (ValueType.INT, ValueType.FLOAT, ValueType.STRING, ValueType.BOOL)


class _Checker:
    def __init__(self, program: Program, scripts_dir: str | None, base_dir: str):
        self.program = program
        self.scripts_dir = scripts_dir
        self.base_dir = base_dir
        self.diags: list[Diagnostic] = []
        self.table: dict[str, Symbol] = {
            "CurrLevel": Symbol("CurrLevel", "predefined", TypeTuple(ValueType.INT, ExprType.UNIVERSAL)),
            "Time": Symbol("Time", "predefined", TypeTuple(ValueType.INT, ExprType.UNIVERSAL)),
            "Uptime": Symbol("Uptime", "predefined", TypeTuple(ValueType.INT, ExprType.UNIVERSAL)),
        }
        self.resources = Resources()
        self.var_initial: dict[str, object] = {}
        self.trigger_calls: list[Call] = []
        self.curr_rule: Symbol | None = None

    # --- diagnostics ---

    def fail(self, message: str, node) -> None:
        self.diags.append(Diagnostic(message, node.line, node.column))
        raise _UnitAbort()

    def note(self, message: str, node) -> None:
        self.diags.append(Diagnostic(message, node.line, node.column))

    # --- declarations ---

    def run(self) -> CheckedProgram:
        decls = sorted(
            [("level", d) for d in self.program.levels]
            + [("const", d) for d in self.program.consts]
            + [("var", d) for d in self.program.vars],
            key=lambda item: (item[1].line, item[1].column),
        )
        for kind, decl in decls:
            try:
                if kind == "level":
                    self.declare_level(decl)
                else:
                    self.declare_typed(kind, decl)
            except _UnitAbort:
                # Register a placeholder so one bad declaration does not
                # cascade into unknown-identifier noise downstream.
                if kind != "level" and decl.name not in self.table and decl.name not in _RESERVED:
                    vt = VALUE_TYPE_BY_NAME[decl.type_name]
                    default = {"int": 0, "float": 0.0, "bool": False, "string": ""}[decl.type_name]
                    self.table[decl.name] = Symbol(
                        decl.name,
                        kind,
                        TypeTuple(vt, ExprType.UNIVERSAL),
                        value=default,
                        mutable=(kind == "var"),
                        pos=(decl.line, decl.column),
                        read=True,
                        written=True,
                    )
                    if kind == "var":
                        self.var_initial[decl.name] = default

        for section in self.program.rule_sections:
            for rule in section.rules:
                try:
                    self.check_rule(rule, section.kind)
                except _UnitAbort:
                    pass

        self.check_usage()

        if self.trigger_calls and not self.program.levels:
            self.diags.append(
                Diagnostic(
                    "trigger is used but the program declares no levels",
                    self.trigger_calls[0].line,
                    self.trigger_calls[0].column,
                )
            )

        scripts = None
        if self.scripts_dir is not None:
            scripts, script_diags = check_scripts(self.program.levels, self.scripts_dir)
            self.diags.extend(script_diags)

        if self.diags:
            raise StaticError(self.diags)

        graph_rules: list[Rule] = []
        msg_rules: list[Rule] = []
        external_rules: list[Rule] = []
        for section in self.program.rule_sections:
            {
                SectionKind.GRAPH: graph_rules,
                SectionKind.MSG: msg_rules,
                SectionKind.EXTERNAL: external_rules,
            }[section.kind].extend(section.rules)

        return CheckedProgram(
            program=self.program,
            symbols=self.table,
            var_initial=self.var_initial,
            resources=self.resources,
            scripts_dir=self.scripts_dir,
            scripts=scripts,
            graph_rules=graph_rules,
            msg_rules=msg_rules,
            external_rules=external_rules,
        )

    def declare_name_free(self, name: str, node) -> None:
        if name in _RESERVED:
            self.fail(f"{name!r} is a predefined name and cannot be declared", node)
        if name in self.table:
            self.fail(f"{name!r} is already declared", node)

    def declare_level(self, decl) -> None:
        self.declare_name_free(decl.name, decl)
        self.table[decl.name] = Symbol(
            decl.name,
            "level",
            TypeTuple(ValueType.INT, ExprType.UNIVERSAL),
            value=decl.ordinal,
            pos=(decl.line, decl.column),
        )

    def declare_typed(self, kind: str, decl) -> None:
        self.declare_name_free(decl.name, decl)
        declared_vt = VALUE_TYPE_BY_NAME[decl.type_name]
        ty = self.check_expr(decl.init, None)
        if ty.value_type is not declared_vt:
            self.fail(
                f"{decl.name!r} is declared {decl.type_name} but its initializer"
                f" has type {ty.value_type.value} (no implicit casting)",
                decl.init,
            )
        try:
            value = self.fold(decl.init)
        except _NotConstant as exc:
            self.fail(
                f"initializer of {decl.name!r} is not a constant expression",
                exc.node,
            )
        except EvalFault as exc:
            self.fail(f"in constant expression: {exc}", decl.init)
        level_init = (
            kind == "var"
            and isinstance(decl.init, Name)
            and decl.init.binding is not None
            and decl.init.binding.kind == "level"
        )
        self.table[decl.name] = Symbol(
            decl.name,
            kind,
            TypeTuple(declared_vt, ExprType.UNIVERSAL),
            value=value,
            mutable=(kind == "var"),
            pos=(decl.line, decl.column),
            level_init=level_init,
        )
        if kind == "var":
            self.var_initial[decl.name] = value

    # --- rules ---

    def check_rule(self, rule: Rule, kind: SectionKind) -> None:
        section = SECTION_EXPR_TYPE[kind.value]
        self.curr_rule = Symbol(
            "CurrRule",
            "rule_const",
            TypeTuple(ValueType.STRING, ExprType.UNIVERSAL),
            value=rule.rule_id,
        )
        try:
            ty = self.check_expr(rule.trigger, section)
            if ty.value_type is not ValueType.BOOL:
                self.fail(
                    f"rule trigger must be bool, got {ty.value_type.value}",
                    rule.trigger,
                )
            for item in rule.chain:
                self.check_action(item.action, section)
        finally:
            self.curr_rule = None

    def check_action(self, call: Call, section: ExprType) -> None:
        sig = ACTIONS.get(call.name)
        if sig is None:
            if call.name in EXPRESSION_BUILTINS:
                self.fail(f"{call.name!r} is an expression builtin, not an action", call)
            self.fail(f"unknown action {call.name!r}", call)
        call.sig = sig
        if not sig.arity_ok(len(call.args)):
            self.fail(
                f"{call.name} expects {self._arity_text(sig)}, got {len(call.args)}",
                call,
            )
        if call.name == "set":
            self.check_set(call, section)
            return
        if call.name == "trigger":
            self.trigger_calls.append(call)
        for i, arg in enumerate(call.args):
            ty = self.check_expr(arg, section)
            want = sig.param_at(i)
            if want is not ValueType.UNIVERSAL and ty.value_type is not want:
                self.fail(
                    f"argument {i + 1} of {call.name} must be {want.value},"
                    f" got {ty.value_type.value}",
                    arg,
                )
        for i in sig.level_args:
            self.check_level_form(call.args[i], call.name)

    def check_set(self, call: Call, section: ExprType) -> None:
        target = call.args[0]
        if not isinstance(target, Name):
            self.fail("the first argument of set must be a variable name", target)
        sym = self.lookup(target)
        target.binding = sym
        target.ty = sym.type
        if sym.kind == "predefined":
            self.fail(f"predefined variable {sym.name!r} cannot be set", target)
        if sym.kind != "var":
            self.fail(f"{sym.name!r} is a {sym.kind}, not a variable", target)
        sym.written = True
        value_ty = self.check_expr(call.args[1], section)
        if value_ty.value_type is not sym.type.value_type:
            self.fail(
                f"cannot set {sym.name!r} ({sym.type.value_type.value}) to a"
                f" {value_ty.value_type.value} value (no implicit casting)",
                call.args[1],
            )

    def check_level_form(self, arg, builtin: str) -> None:
        ok = False
        if isinstance(arg, Name):
            sym = arg.binding
            if sym is not None and (
                sym.kind == "level"
                or sym.name == "CurrLevel"
                or (sym.kind == "var" and sym.level_init)
            ):
                ok = True
        if not ok:
            self.fail(
                f"{builtin} needs a level name, CurrLevel, or an int variable"
                " initialized with a level",
                arg,
            )

    @staticmethod
    def _arity_text(sig: BuiltinSig) -> str:
        n = len(sig.params)
        if sig.vararg is not None:
            return f"at least {n} argument{'s' if n != 1 else ''}"
        return f"{n} argument{'s' if n != 1 else ''}"

    # --- expressions ---

    def lookup(self, node: Name) -> Symbol:
        if node.name == "CurrRule":
            if self.curr_rule is None:
                self.fail("CurrRule is only defined inside a rule", node)
            return self.curr_rule
        sym = self.table.get(node.name)
        if sym is None or (sym.pos != (0, 0) and sym.pos > (node.line, node.column)):
            self.fail(f"unknown identifier {node.name!r}", node)
        return sym

    def check_expr(self, e, section: ExprType | None) -> TypeTuple:
        """Type a node, annotate it, and return its type tuple.

        ``section`` is the rule section's expression type, or None when
        checking an initializer (where only universal expressions make
        sense).
        """
        if isinstance(e, Literal):
            if e.kind == "string":
                e.value = values.clamp_str(e.value)
            e.ty = TypeTuple(VALUE_TYPE_BY_NAME[e.kind], ExprType.UNIVERSAL)
            return e.ty

        if isinstance(e, Name):
            sym = self.lookup(e)
            e.binding = sym
            sym.read = True
            e.ty = sym.type
            return e.ty

        if isinstance(e, Unary):
            ty = self.check_expr(e.operand, section)
            vt = ty.value_type
            if e.op == "!":
                if vt is not ValueType.BOOL:
                    self.fail(f"operator '!' needs bool, got {vt.value}", e)
            elif e.op == "~":
                if vt is not ValueType.INT:
                    self.fail(f"operator '~' needs int, got {vt.value}", e)
            else:  # unary + -
                if vt not in _NUMERIC:
                    self.fail(f"unary '{e.op}' needs int or float, got {vt.value}", e)
            e.ty = ty
            return e.ty

        if isinstance(e, Binary):
            lt = self.check_expr(e.left, section)
            rt = self.check_expr(e.right, section)
            et = meet_expr(lt.expr_type, rt.expr_type)
            lv, rv = lt.value_type, rt.value_type
            op = e.op
            if lv is not rv:
                self.fail(
                    f"operator '{op}' needs matching operand types,"
                    f" got {lv.value} and {rv.value} (no implicit casting)",
                    e,
                )
            if op in ("&&", "||"):
                if lv is not ValueType.BOOL:
                    self.fail(f"operator '{op}' needs bool operands, got {lv.value}", e)
                result = ValueType.BOOL
            elif op in ("==", "!="):
                if lv not in _EQUAL:
                    self.fail(f"operator '{op}' cannot compare {lv.value} values", e)
                result = ValueType.BOOL
            elif op in ("<", "<=", ">", ">="):
                if lv not in _ORDERED:
                    self.fail(f"operator '{op}' cannot order {lv.value} values", e)
                result = ValueType.BOOL
            elif op == "+":
                if lv not in (ValueType.INT, ValueType.FLOAT, ValueType.STRING):
                    self.fail(f"operator '+' needs numbers or strings, got {lv.value}", e)
                result = lv
            elif op in ("-", "*", "/"):
                if lv not in _NUMERIC:
                    self.fail(f"operator '{op}' needs int or float operands, got {lv.value}", e)
                result = lv
            elif op == "%":
                if lv is not ValueType.INT:
                    self.fail(f"operator '%' needs int operands, got {lv.value}", e)
                result = ValueType.INT
            else:  # & ^ |
                if lv is not ValueType.INT:
                    self.fail(f"operator '{op}' needs int operands, got {lv.value}", e)
                result = ValueType.INT
            e.ty = TypeTuple(result, et)
            return e.ty

        if isinstance(e, Call):
            return self.check_call(e, section)

        raise AssertionError(f"unexpected node {e!r}")

    def check_call(self, call: Call, section: ExprType | None) -> TypeTuple:
        sig = EXPRESSION_BUILTINS.get(call.name)
        if sig is None:
            if call.name in ACTIONS:
                self.fail(f"{call.name!r} is an action and cannot be used in an expression", call)
            self.fail(f"unknown builtin {call.name!r}", call)
        call.sig = sig
        if sig.expr_type is not ExprType.UNIVERSAL:
            if section is None:
                self.fail(f"{call.name} cannot be used outside rules", call)
            if sig.expr_type is not section:
                self.fail(
                    f"{call.name} has expression type {sig.expr_type.value} and cannot"
                    f" be used in a {section.value} rule",
                    call,
                )
        if not sig.arity_ok(len(call.args)):
            self.fail(
                f"{call.name} expects {self._arity_text(sig)}, got {len(call.args)}",
                call,
            )
        for i, arg in enumerate(call.args):
            ty = self.check_expr(arg, section)
            want = sig.param_at(i)
            if want is not ValueType.UNIVERSAL and ty.value_type is not want:
                self.fail(
                    f"argument {i + 1} of {call.name} must be {want.value},"
                    f" got {ty.value_type.value}",
                    arg,
                )
        for i in sig.const_args:
            self.prepare_constant_arg(call, i)
        for i in sig.level_args:
            self.check_level_form(call.args[i], call.name)
        call.ty = TypeTuple(sig.result, sig.expr_type)
        return call.ty

    def prepare_constant_arg(self, call: Call, index: int) -> None:
        arg = call.args[index]
        try:
            value = self.fold(arg)
        except _NotConstant:
            self.fail(f"argument {index + 1} of {call.name} must be a constant", arg)
        except EvalFault as exc:
            self.fail(f"in constant expression: {exc}", arg)
        if call.name == "topicmatches":
            try:
                compiled = regexlite.compile_pattern(value)
            except regexlite.PatternError as exc:
                self.fail(f"invalid regular expression: {exc}", arg)
            call.resource = ("regex", len(self.resources.regexes))
            self.resources.regex_sources.append(value)
            self.resources.regexes.append(compiled)
        elif call.name == "payload":
            path = value if os.path.isabs(value) else os.path.join(self.base_dir, value)
            try:
                pattern_file = load_pattern_file(path)
            except OSError as exc:
                self.fail(f"cannot read pattern file {value!r}: {exc}", arg)
            except PatternFileError as exc:
                self.fail(f"bad pattern file {value!r}: {exc}", arg)
            call.resource = ("pattern", len(self.resources.patterns))
            self.resources.pattern_paths.append(path)
            self.resources.patterns.append(pattern_file)
        elif call.name == "plugin":
            path = value if os.path.isabs(value) else os.path.join(self.base_dir, value)
            if not (os.path.isfile(path) and os.access(path, os.X_OK)):
                self.fail(f"plugin {value!r} is missing or not executable", arg)
            call.resource = ("plugin", len(self.resources.plugins))
            self.resources.plugins.append(path)
        elif call.name == "signal":
            if value not in KNOWN_SIGNALS:
                self.fail(
                    f"unknown signal name {value!r} (expected one of {', '.join(KNOWN_SIGNALS)})",
                    arg,
                )
            call.resource = ("signal", value)

    # --- constant folding ---

    def fold(self, e):
        if isinstance(e, Literal):
            if e.kind == "string":
                return values.clamp_str(e.value)
            return e.value
        if isinstance(e, Name):
            sym = e.binding
            if sym is not None and sym.kind in ("level", "const", "rule_const"):
                return sym.value
            raise _NotConstant(e)
        if isinstance(e, Unary):
            v = self.fold(e.operand)
            if e.op == "!":
                return not v
            if e.op == "~":
                return ~v
            if e.op == "-":
                return values.ineg(v) if isinstance(v, int) and not isinstance(v, bool) else -v
            return v
        if isinstance(e, Binary):
            if e.op == "&&":
                return self.fold(e.left) and self.fold(e.right)
            if e.op == "||":
                return self.fold(e.left) or self.fold(e.right)
            a = self.fold(e.left)
            b = self.fold(e.right)
            return values.apply_binary(e.op, a, b, e.ty.value_type if e.ty else None)
        raise _NotConstant(e)

    # --- usage analysis ---

    def check_usage(self) -> None:
        for sym in self.table.values():
            if sym.kind != "var":
                continue
            line, column = sym.pos
            if not sym.read and not sym.written:
                self.diags.append(Diagnostic(f"variable {sym.name!r} is never accessed", line, column))
            elif not sym.read:
                self.diags.append(Diagnostic(f"variable {sym.name!r} is unused (never read)", line, column))
            elif not sym.written:
                self.diags.append(Diagnostic(f"variable {sym.name!r} is never set", line, column))


def check_program(
    program: Program,
    scripts_dir: str | None = None,
    base_dir: str = ".",
) -> CheckedProgram:
    """Validate a parsed program; raises StaticError with all diagnostics."""
    return _Checker(program, scripts_dir, base_dir).run()


def check_source(
    source: str,
    source_name: str = "rules",
    scripts_dir: str | None = None,
    base_dir: str = ".",
) -> CheckedProgram:
    return check_program(parse_source(source, source_name), scripts_dir, base_dir)


def check_scripts(levels, scripts_dir: str) -> tuple[dict[str, tuple[str, str]], list[Diagnostic]]:
    """Verify every level has executable ``<name>.to`` and ``<name>.from``
    scripts in scripts_dir; returns resolved paths and any diagnostics."""
    scripts: dict[str, tuple[str, str]] = {}
    diags: list[Diagnostic] = []
    for level in levels:
        to_path = os.path.join(scripts_dir, f"{level.name}.to")
        from_path = os.path.join(scripts_dir, f"{level.name}.from")
        for path, label in ((to_path, f"{level.name}.to"), (from_path, f"{level.name}.from")):
            if not os.path.isfile(path):
                diags.append(Diagnostic(f"missing transition script {label}", level.line, level.column))
            elif not os.access(path, os.X_OK):
                diags.append(Diagnostic(f"transition script {label} is not executable", level.line, level.column))
        scripts[level.name] = (to_path, from_path)
    return scripts, diags


def check_file(path: str, scripts_dir: str | None = None) -> CheckedProgram:
    with open(path, "r", encoding="utf-8") as fh:
        source = fh.read()
    return check_source(
        source,
        source_name=os.path.basename(path),
        scripts_dir=scripts_dir,
        base_dir=os.path.dirname(os.path.abspath(path)),
    )
