"""Label-only abstract semantics and breadth-first reachability.

Abstract states are label-tracking configurations whose scalar values are
erased. Object references survive so field accesses stay precise. Each state
is put in canonical form: unreachable locations and objects are dropped and
the rest are renumbered in a fixed traversal order, so equal states compare
and serialize equally.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable

from .labelled import ExtConfig, LabelledMachine, Verdict, low_violations
from .labels import Label, StoredLabel
from .machine import (
    BRANCH_RULES, RESTORE, TAGS_PLAIN, TAGS_WITH_NID, UNINIT, VOID, Frame, LoopEntry, NULL, Ref,
)
from .syntax import ast, program_sha256
from .syntax.policy import NIPolicy

AbstractState = ExtConfig

DEFAULT_STATE_BUDGET = 10**6


class StateBudgetExceeded(RuntimeError):
    pass


# -- canonical form ----------------------------------------------------------


def canonicalize(s: AbstractState, n_statics: int) -> AbstractState:
    """Garbage-collect and renumber locations and objects.

    Locations: statics keep their indices, then the current environment and
    each saved frame's environment (innermost first) in name order. Objects:
    depth-first from statics, environments, stack values and constructor
    results in the same order.
    """
    loc_map: dict[int, int] = {i: i for i in range(n_statics)}
    envs = [s.env] + [f.env for f in reversed(s.frames)]
    for env in envs:
        for _, loc in env:
            if loc not in loc_map:
                loc_map[loc] = len(loc_map)

    obj_map: dict[int, int] = {}
    heap = s.heap

    def mark(v) -> None:
        if isinstance(v, Ref) and v.oid >= 0 and v.oid not in obj_map:
            obj_map[v.oid] = len(obj_map)
            for cv, _ in heap[v.oid][1]:
                mark(cv)

    locs_in_order = sorted(loc_map, key=loc_map.__getitem__)
    for loc in locs_in_order:
        mark(s.store[loc][0])
    for v, _ in s.vals:
        mark(v)
    for f in reversed(s.frames):
        for v, _ in f.vals:
            mark(v)
        mark(f.result)

    def ref(v):
        if isinstance(v, Ref) and v.oid >= 0:
            return Ref(obj_map[v.oid])
        return v

    def cell(c):
        return (ref(c[0]), c[1])

    def env(e):
        return tuple((n, loc_map[l]) for n, l in e)

    store = tuple(cell(s.store[loc]) for loc in locs_in_order)
    new_heap = [None] * len(obj_map)
    for old, new in obj_map.items():
        cls, cells = heap[old]
        new_heap[new] = (cls, tuple(map(cell, cells)))
    frames = tuple(
        Frame(f.k, tuple(map(cell, f.vals)), env(f.env), f.lstack, f.cl, ref(f.result))
        for f in s.frames)
    return ExtConfig(s.k, tuple(map(cell, s.vals)), env(s.env), store, tuple(new_heap),
                     s.lstack, frames, s.cl, ())


# -- serialization -----------------------------------------------------------


def _item(it) -> str:
    tag = it[0]
    if tag == RESTORE:
        return f"{tag}:{it[1].token}"
    if len(it) == 1:
        return tag
    return f"{tag}:{it[1]}"


def _val(v) -> str:
    if v is None:
        return ""
    if v is VOID:
        return "void"
    if v is UNINIT:
        return "uninit"
    if isinstance(v, Ref):
        return "null" if v.oid < 0 else f"@{v.oid}"
    raise ValueError(f"concrete value {v!r} in an abstract state")


def _pair(p) -> str:
    v = _val(p[0])
    return f"{v}:{p[1].token}" if v else p[1].token


def _k(k) -> list:
    return [_item(it) for it in k]


def _ls(ls) -> list:
    return [[e.nid, e.exit, e.head] for e in ls]


def _frame_json(f: Frame) -> list:
    result = None if f.result is None else _val(f.result)
    return [_k(f.k), [_pair(p) for p in f.vals], [[n, l] for n, l in f.env], _ls(f.lstack),
            f.cl.token, result]


def state_json(s: AbstractState) -> list:
    return [
        _k(s.k),
        [_pair(p) for p in s.vals],
        [[n, l] for n, l in s.env],
        [_pair(c) for c in s.store],
        [[cls, [_pair(c) for c in cells]] for cls, cells in s.heap],
        _ls(s.lstack),
        [_frame_json(f) for f in s.frames],
        s.cl.token,
    ]


def serialize_state(s: AbstractState) -> str:
    """Canonical one-line text of a state (compact JSON, no spaces)."""
    return json.dumps(state_json(s), separators=(",", ":"), ensure_ascii=True)


class StateFormatError(ValueError):
    pass


_LABELS = {"L": Label.LOW, "H": Label.HIGH}
_ITEM_TAGS = set(TAGS_WITH_NID) | set(TAGS_PLAIN) | {RESTORE}


def _p_int(x) -> int:
    if type(x) is not int or x < 0:
        raise StateFormatError(f"expected a non-negative integer, got {x!r}")
    return x


def _p_label(x) -> Label:
    try:
        return _LABELS[x]
    except (KeyError, TypeError):
        raise StateFormatError(f"bad label {x!r}") from None


def _p_item(x):
    if not isinstance(x, str):
        raise StateFormatError(f"bad item {x!r}")
    tag, sep, arg = x.partition(":")
    if tag not in _ITEM_TAGS:
        raise StateFormatError(f"bad item {x!r}")
    if tag == RESTORE:
        return (tag, _p_label(arg))
    if tag in TAGS_PLAIN:
        if sep:
            raise StateFormatError(f"bad item {x!r}")
        return (tag,)
    if not arg.isdigit() or str(int(arg)) != arg:
        raise StateFormatError(f"bad item {x!r}")
    return (tag, int(arg))


def _p_val(x: str):
    if x == "":
        return None
    if x == "void":
        return VOID
    if x == "uninit":
        return UNINIT
    if x == "null":
        return NULL
    if x.startswith("@") and x[1:].isdigit() and str(int(x[1:])) == x[1:]:
        return Ref(int(x[1:]))
    raise StateFormatError(f"bad value {x!r}")


def _p_pair(x, stored: bool):
    if not isinstance(x, str):
        raise StateFormatError(f"bad cell {x!r}")
    v, _, l = x.rpartition(":")
    if stored:
        try:
            label = StoredLabel.from_token(l)
        except ValueError:
            raise StateFormatError(f"bad cell {x!r}") from None
    else:
        label = _p_label(l)
    return (_p_val(v), label)


def _p_list(x, n: int | None = None) -> list:
    if not isinstance(x, list) or (n is not None and len(x) != n):
        raise StateFormatError(f"bad list {x!r}")
    return x


def _p_env(x) -> tuple:
    out = []
    for e in _p_list(x):
        name, loc = _p_list(e, 2)
        if not isinstance(name, str):
            raise StateFormatError(f"bad binding {e!r}")
        out.append((name, _p_int(loc)))
    return tuple(out)


def _p_ls(x) -> tuple:
    return tuple(LoopEntry(*(_p_int(v) for v in _p_list(e, 3))) for e in _p_list(x))


def parse_state(text: str) -> AbstractState:
    """Inverse of `serialize_state`. Raises `StateFormatError` on bad input."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise StateFormatError(str(exc)) from None
    k, vals, env, store, heap, ls, frames, cl = _p_list(data, 8)
    heap_out = []
    for obj in _p_list(heap):
        cls, cells = _p_list(obj, 2)
        if not isinstance(cls, str):
            raise StateFormatError(f"bad object {obj!r}")
        heap_out.append((cls, tuple(_p_pair(c, True) for c in _p_list(cells))))
    frames_out = []
    for f in _p_list(frames):
        fk, fv, fe, fl, fcl, fr = _p_list(f, 6)
        result = None if fr is None else _p_val(fr)
        frames_out.append(Frame(tuple(map(_p_item, _p_list(fk))),
                                tuple(_p_pair(p, False) for p in _p_list(fv)), _p_env(fe),
                                _p_ls(fl), _p_label(fcl), result))
    s = ExtConfig(tuple(map(_p_item, _p_list(k))), tuple(_p_pair(p, False) for p in _p_list(vals)),
                  _p_env(env), tuple(_p_pair(c, True) for c in _p_list(store)), tuple(heap_out),
                  _p_ls(ls), tuple(frames_out), _p_label(cl), ())
    if serialize_state(s) != text:
        raise StateFormatError("state text is not in canonical form")
    return s


# -- the abstract machine ----------------------------------------------------


class AbstractMachine:
    """Successor relation on canonical abstract states."""

    def __init__(self, program: ast.Program, policy: NIPolicy, shield_ifs: bool = False):
        self.program = program
        self.policy = policy
        self.engine = LabelledMachine(program, policy, abstract=True, shield_ifs=shield_ifs)
        self.n_statics = len(program.statics)

    def canonical(self, s: AbstractState) -> AbstractState:
        return canonicalize(s, self.n_statics)

    def initial(self) -> AbstractState:
        return self.canonical(self.engine.initial())

    def successors(self, s: AbstractState) -> list[tuple[str, AbstractState]]:
        """Canonical successors with rule names, ordered by serialization."""
        if not s.k:
            return []
        out = [(rule, self.canonical(t)) for rule, t in self.engine.successors(s)]
        if len(out) > 1:
            out.sort(key=lambda rs: serialize_state(rs[1]))
        return out

    def is_final(self, s: AbstractState) -> bool:
        return not s.k and not s.frames

    def violations(self, s: AbstractState) -> tuple:
        return low_violations(self.program, self.policy, s)

    def prints_high(self, s: AbstractState) -> bool:
        """Whether the next step prints a High-labelled value."""
        return bool(s.k) and s.k[-1][0] == "print" and s.vals[-1][1] is Label.HIGH


def lift(program: ast.Program, policy: NIPolicy) -> AbstractState:
    """Initial abstract state: policy labels everywhere, no values, CL Low."""
    return AbstractMachine(program, policy).initial()


def abstract_successors(program: ast.Program, policy: NIPolicy,
                        s: AbstractState) -> list[tuple[str, AbstractState]]:
    return AbstractMachine(program, policy).successors(s)


# -- exploration -------------------------------------------------------------


@dataclass
class ReachGraph:
    """Canonical abstract states in breadth-first discovery order."""

    nodes: list[AbstractState] = field(default_factory=list)
    edges: list[tuple[int, str, int]] = field(default_factory=list)
    initial: int = 0
    finals: list[int] = field(default_factory=list)
    stuck: list[int] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    program_sha256: str = ""
    policy_sha256: str = ""

    def out_edges(self) -> dict[int, list[tuple[str, int]]]:
        out: dict[int, list[tuple[str, int]]] = {}
        for s, r, d in self.edges:
            out.setdefault(s, []).append((r, d))
        return out

    def texts(self) -> list[str]:
        return [serialize_state(s) for s in self.nodes]


def explore(program: ast.Program, policy: NIPolicy, budget: int = DEFAULT_STATE_BUDGET,
            shield_ifs: bool = False) -> tuple[ReachGraph, Verdict]:
    """Breadth-first search over canonical abstract states.

    Passes iff every reachable final state labels every Low variable Low.
    The witness lists each offending ``(path, label)`` found in any final.
    ``shield_ifs`` selects the narrower abrupt-branch test (unsound; for
    demonstrations only).
    """
    m = AbstractMachine(program, policy, shield_ifs)
    g = ReachGraph(program_sha256=program_sha256(program), policy_sha256=policy.sha256())
    init = m.initial()
    index = {init: 0}
    g.nodes.append(init)
    queue = deque([0])
    warned: set[int] = set()
    while queue:
        i = queue.popleft()
        s = g.nodes[i]
        if m.is_final(s):
            g.finals.append(i)
            continue
        if m.prints_high(s) and s.k[-1][1] not in warned:
            warned.add(s.k[-1][1])
            node = program.nodes[s.k[-1][1]]
            g.warnings.append(f"{node.line}:{node.col}: println may output a High value")
        succ = m.successors(s)
        if not succ:
            g.stuck.append(i)
        for rule, t in succ:
            j = index.get(t)
            if j is None:
                if len(g.nodes) >= budget:
                    raise StateBudgetExceeded(f"state budget of {budget} exceeded")
                j = len(g.nodes)
                index[t] = j
                g.nodes.append(t)
                queue.append(j)
            g.edges.append((i, rule, j))
    return g, graph_verdict(m, g)


def graph_verdict(m: AbstractMachine, g: ReachGraph) -> Verdict:
    bad: set = set()
    for i in g.finals:
        bad.update(m.violations(g.nodes[i]))
    return Verdict(not bad, tuple(sorted(bad, key=lambda pl: (pl[0], pl[1].value))))


def final_label_stores(program: ast.Program, g: ReachGraph) -> set[tuple]:
    """Path-to-label maps of every final node, as hashable tuples."""
    from .labelled import labelled_view

    out = set()
    for i in g.finals:
        _, _, labels = labelled_view(program, g.nodes[i])
        out.add(tuple(sorted((p, l.value) for p, l in labels.items())))
    return out


def is_branch_rule(rule: str) -> bool:
    return rule in BRANCH_RULES


def iter_rules(g: ReachGraph) -> Iterable[str]:
    return (r for _, r, _ in g.edges)
