"""Exhaustive non-interference check over finite input domains.

Every combination of input values is run once on the concrete machine. For
each assignment of the Low inputs, all assignments of the High inputs are
compared pairwise by what a Low observer sees at the end of the run.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Any, Mapping, Sequence

from .concrete import execute, low_fingerprint
from .machine import ObservedState
from .syntax import ast
from .syntax.policy import NIPolicy

DEFAULT_INT_RANGE = range(-2, 4)
DEFAULT_CAP = 10**5


class DomainCapExceeded(ValueError):
    pass


@dataclass(frozen=True)
class InputDomain:
    """Finite value set per declared input, in enumeration order."""

    values: dict[str, tuple]

    def __post_init__(self):
        for name, vs in self.values.items():
            if not vs:
                raise ValueError(f"empty domain for input {name!r}")

    @classmethod
    def default(cls, program: ast.Program, ints: Sequence[int] = DEFAULT_INT_RANGE,
                overrides: Mapping[str, Sequence] | None = None) -> "InputDomain":
        vals = {}
        for name, t in program.inputs:
            vals[name] = tuple(ints) if t == "int" else (False, True)
        for name, vs in (overrides or {}).items():
            if name not in vals:
                raise ValueError(f"no input named {name!r}")
            vals[name] = tuple(vs)
        return cls(vals)

    def size(self) -> int:
        n = 1
        for vs in self.values.values():
            n *= len(vs)
        return n


@dataclass(frozen=True)
class OracleResult:
    interferent: bool
    witness: tuple[dict, dict] | None = None
    finals: tuple[ObservedState, ObservedState] | None = None
    runs: int = 0
    steps: int = 0

    def __str__(self) -> str:
        if not self.interferent:
            return "NonInterferent"
        a, b = self.witness
        return f"Interferent({_fmt(a)} vs {_fmt(b)})"


def _fmt(inputs: Mapping[str, Any]) -> str:
    return ", ".join(f"{k}={str(v).lower() if isinstance(v, bool) else v}"
                     for k, v in inputs.items())


def brute_force_ni(program: ast.Program, policy: NIPolicy, domain: InputDomain | None = None,
                   cap: int = DEFAULT_CAP, step_limit: int | None = None) -> OracleResult:
    """Search the domain for two Low-equal inputs with distinguishable results.

    The witness is the first violating pair in enumeration order: Low
    assignments in product order, then High assignments ``i < j``.
    """
    domain = domain or InputDomain.default(program)
    names = [n for n, _ in program.inputs]
    if set(domain.values) != set(names):
        raise ValueError("domain must cover exactly the declared inputs")
    if domain.size() > cap:
        raise DomainCapExceeded(f"{domain.size()} runs exceed the cap of {cap}")
    low = [n for n in names if policy.is_low(n)]
    high = [n for n in names if not policy.is_low(n)]
    runs = steps = 0
    for low_vals in itertools.product(*(domain.values[n] for n in low)):
        base = dict(zip(low, low_vals))
        first = None
        for high_vals in itertools.product(*(domain.values[n] for n in high)):
            inputs = {**base, **dict(zip(high, high_vals))}
            ordered = {n: inputs[n] for n in names}
            run = execute(program, ordered, step_limit)
            runs += 1
            steps += run.steps
            fp = low_fingerprint(run.final, policy)
            if first is None:
                first = (ordered, run.final, fp)
            elif fp != first[2]:
                # Low-equality is an equivalence, so the earliest violating
                # pair always involves the first High assignment
                return OracleResult(True, (first[0], ordered), (first[1], run.final), runs, steps)
    return OracleResult(False, runs=runs, steps=steps)
