"""Random well-typed program and event-corpus generation.

Used by the differential harness: programs are correct by construction
(every variable is read and set at least once, predicate arguments respect
the signature table, trigger/levelname arguments use level forms), so any
static error or interpreter/transpiler divergence they provoke is a real
bug. Division and modulo keep a small chance of a zero denominator on
purpose: fault handling must match across engines too.
"""

from __future__ import annotations

import base64
import random

from .wire import encode_event

TOPIC_POOL = ["/t0", "/t1", "/t2", "/cam/raw", "/cmd/vel", "/diag"]
NODE_POOL = ["alpha", "beta", "gamma", "delta", "rips", "watch"]
TYPE_POOL = ["std_msgs/msg/String", "geometry_msgs/msg/Twist", "sensor_msgs/msg/Imu"]
SERVICE_POOL = ["/alpha/get_parameters", "/beta/set_parameters", "/gamma/list_parameters"]


class _ProgramGen:
    def __init__(self, rng: random.Random):
        self.rng = rng
        self.levels: list[str] = []
        self.int_vars: list[str] = []
        self.float_vars: list[str] = []
        self.bool_vars: list[str] = []
        self.string_vars: list[str] = []
        self.level_vars: list[str] = []  # int vars initialized with a level
        self.int_consts: list[str] = []

    # --- expressions; depth bounds the tree ---

    def int_expr(self, depth: int) -> str:
        r = self.rng
        if depth <= 0:
            choices = [str(r.randint(0, 20))]
            if self.int_vars:
                choices.append(r.choice(self.int_vars))
            if self.int_consts:
                choices.append(r.choice(self.int_consts))
            choices.append("CurrLevel")
            return r.choice(choices)
        roll = r.random()
        if roll < 0.55:
            op = r.choice(["+", "-", "*"])
            return f"({self.int_expr(depth - 1)} {op} {self.int_expr(depth - 1)})"
        if roll < 0.70:
            # Mostly safe denominators; zero stays possible deliberately.
            den = r.choice(["2", "3", "5", "7", str(r.randint(0, 3))])
            op = r.choice(["/", "%"])
            return f"({self.int_expr(depth - 1)} {op} {den})"
        if roll < 0.80:
            return f"(-{self.int_expr(depth - 1)})"
        return self.int_expr(0)

    def float_expr(self, depth: int) -> str:
        r = self.rng
        if depth <= 0 or not self.float_vars or r.random() < 0.4:
            base = round(r.uniform(-5.0, 5.0), 3)
            lit = repr(float(base))
            if lit.startswith("-"):
                lit = f"(0.0 - {lit[1:]})"
            if self.float_vars and r.random() < 0.5:
                return r.choice(self.float_vars)
            return lit
        op = r.choice(["+", "-", "*"])
        return f"({self.float_expr(depth - 1)} {op} {self.float_expr(depth - 1)})"

    def string_expr(self, depth: int) -> str:
        r = self.rng
        options = [f'"{r.choice(["on", "off", "x", "warn", "zz"])}"']
        if self.string_vars:
            options.append(r.choice(self.string_vars))
        options.append(f"string({self.int_expr(max(0, depth - 1))})")
        if self.levels:
            options.append(f"levelname({self.level_form()})")
        if depth > 0 and r.random() < 0.4:
            return f"({self.string_expr(depth - 1)} + {self.string_expr(depth - 1)})"
        return r.choice(options)

    def level_form(self) -> str:
        r = self.rng
        options = list(self.levels) + ["CurrLevel"]
        if self.level_vars:
            options += self.level_vars
        return r.choice(options)

    def bool_expr(self, depth: int, section: str) -> str:
        r = self.rng
        if depth <= 0:
            leaves = ["true", "false"]
            if self.bool_vars:
                leaves.append(r.choice(self.bool_vars))
            leaves.append(f"({self.int_expr(0)} {r.choice(['<', '<=', '>', '>=', '==', '!='])} {self.int_expr(0)})")
            return r.choice(leaves)
        roll = r.random()
        if roll < 0.30:
            op = r.choice(["&&", "||"])
            return f"({self.bool_expr(depth - 1, section)} {op} {self.bool_expr(depth - 1, section)})"
        if roll < 0.40:
            return f"(!{self.bool_expr(depth - 1, section)})"
        if roll < 0.55:
            cmp_op = r.choice(["<", "<=", ">", ">=", "==", "!="])
            kind = r.random()
            if kind < 0.6:
                return f"({self.int_expr(depth - 1)} {cmp_op} {self.int_expr(depth - 1)})"
            if kind < 0.8:
                return f"({self.float_expr(depth - 1)} {cmp_op} {self.float_expr(depth - 1)})"
            return f"({self.string_expr(depth - 1)} {cmp_op} {self.string_expr(depth - 1)})"
        if roll < 0.85:
            return self.predicate(section)
        return self.bool_expr(0, section)

    def predicate(self, section: str) -> str:
        r = self.rng
        if section == "Graph":
            topic = r.choice(TOPIC_POOL)
            node = r.choice(NODE_POOL)
            lo, hi = sorted((r.randint(0, 3), r.randint(0, 6)))
            names = ", ".join(f'"{n}"' for n in r.sample(NODE_POOL, r.randint(1, 3)))
            topic_names = ", ".join(f'"{t}"' for t in r.sample(TOPIC_POOL, r.randint(1, 3)))
            return r.choice(
                [
                    f"nodecount({lo}, {hi})",
                    f"topiccount({lo}, {hi})",
                    f'topicsubscribercount("{topic}", {lo}, {hi})',
                    f'topicpublishercount("{topic}", {lo}, {hi})',
                    f"nodesinclude({names})",
                    f"topicsinclude({topic_names})",
                    f'topicsubscribersinclude("{topic}", "{node}")',
                    f'topicpublishers("{topic}", {names})',
                    f'service("{node}", "{r.choice(SERVICE_POOL)}")',
                    f'servicecount("{node}", {lo}, {hi})',
                ]
            )
        if section == "Msg":
            topics = ", ".join(f'"{t}"' for t in self.rng.sample(TOPIC_POOL, r.randint(1, 3)))
            types = ", ".join(f'"{t}"' for t in self.rng.sample(TYPE_POOL, r.randint(1, 2)))
            lo, hi = sorted((r.randint(0, 3), r.randint(0, 6)))
            names = ", ".join(f'"{n}"' for n in r.sample(NODE_POOL, r.randint(1, 2)))
            return r.choice(
                [
                    f"topicin({topics})",
                    f'topicmatches("{r.choice(["/t.*", "/cam/.*", "/c.*", "/diag"])}")',
                    f"msgtypein({types})",
                    f'msgsubtype("std_msgs", "String")',
                    f"publishercount({lo}, {hi})",
                    f"subscribercount({lo}, {hi})",
                    f"publishersinclude({names})",
                    f"subscribers({names})",
                ]
            )
        return f'signal("{r.choice(["SIGUSR1", "SIGUSR2"])}")'

    # --- actions ---

    def action(self, section: str) -> str:
        r = self.rng
        options = []
        if self.int_vars:
            v = r.choice(self.int_vars)
            options.append(f"set({v}, {self.int_expr(1)})")
        if self.bool_vars:
            v = r.choice(self.bool_vars)
            options.append(f"set({v}, {self.bool_expr(1, section)})")
        if self.string_vars:
            v = r.choice(self.string_vars)
            options.append(f"set({v}, {self.string_expr(1)})")
        if self.float_vars:
            v = r.choice(self.float_vars)
            options.append(f"set({v}, {self.float_expr(1)})")
        options.append(f"alert({self.string_expr(1)})")
        options.append(f"True({self.int_expr(0)}, {self.string_expr(0)})")
        options.append("False()")
        if self.levels:
            options.append(f"trigger({self.level_form()})")
        if r.random() < 0.12:
            options.append(f'exec("/bin/probe", {self.string_expr(0)})')
        return r.choice(options)

    def rule(self, section: str) -> str:
        r = self.rng
        trigger = self.bool_expr(r.randint(1, 3), section)
        n_actions = r.randint(1, 4)
        parts = [self.action(section)]
        for _ in range(n_actions - 1):
            parts.append(r.choice([", ", " => ", " !> "]))
            parts.append(self.action(section))
        return f"    {trigger} ?\n        {''.join(parts)};"

    def generate(self) -> str:
        r = self.rng
        lines: list[str] = []

        n_levels = r.randint(1, 4)
        self.levels = [f"LV{i}" for i in range(n_levels)]
        lines.append("levels:")
        for name in self.levels:
            lines.append(f"    {name} soft;" if r.random() < 0.35 else f"    {name};")
        lines.append("")

        n_consts = r.randint(0, 2)
        if n_consts:
            lines.append("consts:")
            for i in range(n_consts):
                name = f"K{i}"
                lines.append(f"    {name} int = {r.randint(1, 9)} * {r.randint(1, 9)} + {r.randint(0, 5)};")
                self.int_consts.append(name)
            lines.append("")

        lines.append("vars:")
        for i in range(r.randint(1, 3)):
            name = f"vi{i}"
            if self.levels and r.random() < 0.5:
                lines.append(f"    {name} int = {r.choice(self.levels)};")
                self.level_vars.append(name)
            else:
                lines.append(f"    {name} int = {r.randint(0, 9)};")
            self.int_vars.append(name)
        if r.random() < 0.7:
            lines.append(f"    vb0 bool = {r.choice(['true', 'false'])};")
            self.bool_vars.append("vb0")
        if r.random() < 0.7:
            lines.append('    vs0 string = "seed";')
            self.string_vars.append("vs0")
        if r.random() < 0.5:
            lines.append("    vf0 float = 1.5;")
            self.float_vars.append("vf0")
        lines.append("")

        sections = []
        sections.append(("Graph", r.randint(1, 3)))
        if r.random() < 0.8:
            sections.append(("Msg", r.randint(1, 3)))
        if r.random() < 0.5:
            sections.append(("External", r.randint(1, 2)))
        for kind, count in sections:
            lines.append(f"rules {kind}:")
            for _ in range(count):
                lines.append(self.rule(kind))
                lines.append("")

        # Guarantee the usage discipline: one final rule reads and writes
        # every declared variable.
        all_vars = self.int_vars + self.bool_vars + self.string_vars + self.float_vars
        keep = ", ".join(f"set({v}, {v})" for v in all_vars)
        lines.append("rules Graph:")
        lines.append(f"    false ? {keep};")
        lines.append("")
        return "\n".join(lines)


def random_program(seed: int) -> str:
    """Generate a deterministic, well-typed random rules program."""
    return _ProgramGen(random.Random(seed)).generate()


def random_corpus(seed: int, n_events: int = 200) -> list[str]:
    """Generate framed graph/message event documents for replay."""
    rng = random.Random(seed)
    docs: list[str] = []
    for _ in range(n_events):
        n_topics = rng.randint(0, len(TOPIC_POOL))
        topics = []
        for topic in rng.sample(TOPIC_POOL, n_topics):
            topics.append(
                {
                    "topic": topic,
                    "parameters": [rng.choice(TYPE_POOL)],
                    "publishers": rng.sample(NODE_POOL, rng.randint(0, 3)) or [None],
                    "subscribers": rng.sample(NODE_POOL, rng.randint(0, 4)) or [None],
                }
            )
        nodes = []
        for name in rng.sample(NODE_POOL, rng.randint(1, len(NODE_POOL))):
            services = [
                {"service": srv, "params": ["rcl_interfaces/srv/GetParameters"]}
                for srv in rng.sample(SERVICE_POOL, rng.randint(0, 2))
            ]
            nodes.append({"node": name, "gids": [f"{rng.randrange(256):02x}.00"], "services": services})
        doc = {
            "currentlevel": "LV0",
            "currentgrav": 0.0,
            "lastalert": "",
        }
        if rng.random() < 0.55:
            doc.update({"event": "graph", "context": {"nodes": nodes, "topics": topics}})
        else:
            payload = bytes(rng.randrange(256) for _ in range(rng.randint(0, 48)))
            doc.update(
                {
                    "event": "message",
                    "context": {"nodes": nodes, "topics": topics},
                    "topic": rng.choice(TOPIC_POOL),
                    "msgtype": rng.choice(TYPE_POOL),
                    "payload": base64.b64encode(payload).decode("ascii"),
                }
            )
        docs.append(encode_event(doc))
    return docs
