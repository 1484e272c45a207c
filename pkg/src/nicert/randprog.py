"""Seeded generator of small random programs for property tests.

Programs have up to three static int variables with random policy labels,
one High input ``h`` and optionally a Low input ``l``, and at most two
conditionals or loops. Loops may contain ``break`` or ``continue``. Nothing
is printed, so a Low observer sees only the variables.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .concrete import execute
from .machine import RuntimeFault, StepLimitExceeded
from .oracle import InputDomain
from .syntax import NIPolicy, ast, extract_policy, parse

MAX_VARS = 3
MAX_CONTROL = 2


@dataclass
class RandomProgram:
    seed: int
    source: str
    program: ast.Program
    policy: NIPolicy


class _Gen:
    def __init__(self, rng: random.Random):
        self.rng = rng
        self.control_left = rng.randint(0, MAX_CONTROL)
        self.in_loop = 0
        n = rng.randint(1, MAX_VARS)
        self.vars = [f"v{i}" for i in range(n)]
        self.high_vars = [v for v in self.vars if rng.random() < 0.35]
        self.inputs = ["h"] + (["l"] if rng.random() < 0.5 else [])

    def atom(self) -> str:
        r = self.rng.random()
        if r < 0.3:
            return str(self.rng.randint(-2, 3))
        return self.rng.choice(self.vars + self.inputs)

    def expr(self, depth: int = 0) -> str:
        if depth >= 2 or self.rng.random() < 0.5:
            return self.atom()
        op = self.rng.choice(["+", "-", "*", "+", "-"])
        return f"({self.expr(depth + 1)} {op} {self.expr(depth + 1)})"

    def cond(self) -> str:
        op = self.rng.choice([">", "<", "==", "!=", ">=", "<="])
        c = f"{self.expr(1)} {op} {self.expr(1)}"
        if self.rng.random() < 0.15:
            c2 = f"{self.atom()} {self.rng.choice(['>', '=='])} {self.atom()}"
            c = f"({c}) {self.rng.choice(['&&', '||'])} ({c2})"
        return c

    def block(self, n: int, indent: str) -> list[str]:
        return [line for _ in range(n) for line in self.stmt(indent)]

    def stmt(self, indent: str) -> list[str]:
        r = self.rng.random()
        if self.control_left > 0 and r < 0.35:
            self.control_left -= 1
            if self.rng.random() < 0.55:
                lines = [f"{indent}if ({self.cond()}) {{"]
                lines += self.block(self.rng.randint(1, 2), indent + "  ")
                if self.rng.random() < 0.6:
                    lines += [f"{indent}}} else {{"] + self.block(self.rng.randint(1, 2), indent + "  ")
                return lines + [f"{indent}}}"]
            self.in_loop += 1
            var = self.rng.choice(self.vars)
            lines = [f"{indent}while ({var} > {self.rng.randint(-2, 1)}) {{"]
            lines += self.block(self.rng.randint(0, 2), indent + "  ")
            lines.append(f"{indent}  {var} = {var} - 1;")
            self.in_loop -= 1
            return lines + [f"{indent}}}"]
        if self.in_loop and r < 0.45:
            kw = self.rng.choice(["break", "continue"])
            # guard abrupt statements so loops keep making progress
            return [f"{indent}if ({self.cond()}) {kw};"] if kw == "break" else \
                   [f"{indent}if ({self.cond()}) {{ {self.rng.choice(self.vars)} = "
                    f"{self.rng.choice(self.vars)} - 1; continue; }}"]
        return [f"{indent}{self.rng.choice(self.vars)} = {self.expr()};"]

    def source(self) -> str:
        decls = []
        for v in self.vars:
            init = f" = {self.rng.randint(-2, 3)}" if self.rng.random() < 0.5 else ""
            note = f" //@ setLabel({v}, High);" if v in self.high_vars else ""
            decls.append(f"  static int {v}{init};{note}")
        params = ", ".join(f"int {n}" for n in self.inputs)
        body = self.block(self.rng.randint(1, 4), "    ")
        return "\n".join([
            "class R {",
            *decls,
            f"  public static void main({params}) {{ //@ setLabel(h, High);",
            *body,
            "  }",
            "}",
        ]) + "\n"


def generate(seed: int) -> tuple[str, ast.Program, NIPolicy]:
    rng = random.Random(seed)
    src = _Gen(rng).source()
    program = parse(src)
    return src, program, extract_policy(program)


def terminates_on_domain(program: ast.Program, domain: InputDomain, step_limit: int) -> bool:
    import itertools

    names = list(domain.values)
    for combo in itertools.product(*domain.values.values()):
        try:
            execute(program, dict(zip(names, combo)), step_limit)
        except (StepLimitExceeded, RuntimeFault):
            return False
    return True


def random_corpus(count: int, seed: int = 0, step_limit: int = 5000) -> list[RandomProgram]:
    """``count`` programs that terminate without faults on the default domain."""
    out = []
    s = seed
    while len(out) < count:
        src, program, policy = generate(s)
        if terminates_on_domain(program, InputDomain.default(program), step_limit):
            out.append(RandomProgram(s, src, program, policy))
        s += 1
    return out
