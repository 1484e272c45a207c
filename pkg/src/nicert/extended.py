"""Runs under the label-tracking semantics and the per-run verdict.

A run passes when every Low variable reachable from a static root ends with
stored label exactly ``Low``. Printing a High value is reported as a warning
but does not by itself fail the verdict, which speaks only about variables.
"""

from __future__ import annotations

from typing import Any, Mapping, NamedTuple

from .concrete import ConcreteConfig, step_limit_from_env
from .labelled import ExtConfig, LabelledMachine, Verdict, labelled_view, verdict_of
from .labels import HIGH, Label
from .machine import RESTORE, Frame, LoopEntry, ObservedState, StepLimitExceeded
from .syntax import ast
from .syntax.policy import NIPolicy


class ExtFinalState(NamedTuple):
    observed: ObservedState       # values, policy keys and stored labels by path
    config: ExtConfig
    steps: int
    warnings: tuple[str, ...]


def initial_extended(program: ast.Program, policy: NIPolicy,
                     inputs: Mapping[str, Any]) -> ExtConfig:
    return LabelledMachine(program, policy).initial(inputs)


def step_extended(program: ast.Program, policy: NIPolicy, cfg: ExtConfig) -> ExtConfig:
    """The unique successor of a non-final configuration."""
    return LabelledMachine(program, policy).step(cfg)[1]


def observe_extended(program: ast.Program, cfg: ExtConfig) -> ObservedState:
    values, keys, labels = labelled_view(program, cfg)
    return ObservedState(values, keys, tuple(v for v, _ in cfg.out), labels)


def run_extended(program: ast.Program, policy: NIPolicy, inputs: Mapping[str, Any],
                 step_limit: int | None = None,
                 trace: list | None = None) -> tuple[ExtFinalState, Verdict]:
    """Run to completion and decide the per-run verdict.

    When ``trace`` is a list, one ``(rule, CL after the step)`` pair is
    appended per step.
    """
    limit = step_limit_from_env() if step_limit is None else step_limit
    m = LabelledMachine(program, policy)
    cfg = m.initial(inputs)
    steps = 0
    while cfg.k:
        if steps >= limit:
            raise StepLimitExceeded(f"step limit of {limit} exceeded")
        rule, cfg = m.step(cfg)
        steps += 1
        if trace is not None:
            trace.append((rule, cfg.cl))
    warnings = tuple(f"println #{i + 1} outputs a High value" for i, (_, l) in enumerate(cfg.out)
                     if l is HIGH)
    final = ExtFinalState(observe_extended(program, cfg), cfg, steps, warnings)
    return final, verdict_of(program, policy, cfg)


def format_trace(trace: list[tuple[str, Label]]) -> str:
    """One line per step: ``<step#> <rule-name> CL=<label>``."""
    return "".join(f"{i} {rule} CL={cl}\n" for i, (rule, cl) in enumerate(trace, 1))


# -- erasure -----------------------------------------------------------------


def _erase_k(k: tuple) -> tuple:
    return tuple(item for item in k if item[0] != RESTORE)


def _erase_lstack(k: tuple, lstack: tuple) -> tuple:
    # the loop's own restore item sits just above its exit, so the head of
    # the erased entry is two items above the erased exit; counting from k
    # would miss that item once the loop has exited and popped it
    def shift(n: int) -> int:
        return n - sum(1 for item in k[:n] if item[0] == RESTORE)

    return tuple(LoopEntry(e.nid, shift(e.exit), shift(e.exit) + 2) for e in lstack)


def _value(v):
    return v[0]


def erase(cfg: ExtConfig) -> ConcreteConfig:
    """Drop every label and every context-restore item."""
    frames = tuple(
        Frame(_erase_k(f.k), tuple(map(_value, f.vals)), f.env, _erase_lstack(f.k, f.lstack),
              None, f.result)
        for f in cfg.frames)
    heap = tuple((cls, tuple(map(_value, cells))) for cls, cells in cfg.heap)
    return ConcreteConfig(
        _erase_k(cfg.k), tuple(map(_value, cfg.vals)), cfg.env, tuple(map(_value, cfg.store)),
        heap, _erase_lstack(cfg.k, cfg.lstack), frames, tuple(map(_value, cfg.out)))
