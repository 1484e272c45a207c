"""Standard continuation-based small-step interpreter.

This machine carries no labels. It is the ground truth against which the
instrumented and abstract machines are compared.
"""

from __future__ import annotations

import os
from typing import Any, Mapping, NamedTuple

from .machine import (
    ASSIGN, BIN, CALL, DECL, EVAL, EXEC, FASSIGN, FIELD, IF, LOOP, MAIN, NEW, NULL, POP, POPL,
    PRINT, RET, UN, UNINIT, VOID, VRET, WHILE, Frame, LoopEntry, ObservedState, Ref,
    RuntimeFault, StepLimitExceeded, apply_binary, apply_unary, default_for, env_get, env_set,
    project,
)
from .syntax import ast
from .syntax.policy import NIPolicy

DEFAULT_STEP_LIMIT = 10**6


def step_limit_from_env(default: int = DEFAULT_STEP_LIMIT) -> int:
    raw = os.environ.get("NICERT_STEP_LIMIT")
    return int(raw) if raw else default


class ConcreteConfig(NamedTuple):
    k: tuple
    vals: tuple
    env: tuple
    store: tuple
    heap: tuple
    lstack: tuple
    frames: tuple
    out: tuple

    @property
    def final(self) -> bool:
        return not self.k


def check_inputs(program: ast.Program, inputs: Mapping[str, Any]) -> None:
    declared = dict(program.inputs)
    missing = [n for n in declared if n not in inputs]
    extra = [n for n in inputs if n not in declared]
    if missing or extra:
        raise ValueError(f"inputs do not match declaration: missing {missing}, unexpected {extra}")
    for name, t in declared.items():
        v = inputs[name]
        ok = isinstance(v, bool) if t == "boolean" else (isinstance(v, int) and not isinstance(v, bool))
        if not ok:
            raise ValueError(f"input {name!r} expects {t}, got {v!r}")


def initial_items(program: ast.Program) -> tuple:
    return ((POP,), (MAIN,)) + tuple((EXEC, s.nid) for s in reversed(program.clinit))


def initial_concrete(program: ast.Program, inputs: Mapping[str, Any]) -> ConcreteConfig:
    check_inputs(program, inputs)
    store = [default_for(f.type) for _, f, _ in program.statics]
    env = ()
    for name, _ in program.inputs:
        env = env_set(env, name, len(store))
        store.append(inputs[name])
    return ConcreteConfig(initial_items(program), (), env, tuple(store), (), (), (), ())


class ConcreteMachine:
    def __init__(self, program: ast.Program):
        self.program = program
        self.nodes = program.nodes

    def step(self, c: ConcreteConfig) -> tuple[str, ConcreteConfig]:
        """One transition; returns the rule name and the successor."""
        k = c.k
        item = k[-1]
        rest = k[:-1]
        tag = item[0]
        if tag == EXEC:
            return self._exec(self.nodes[item[1]], rest, c)
        if tag == EVAL:
            return self._eval(self.nodes[item[1]], rest, c)
        vals = c.vals
        if tag == BIN:
            node = self.nodes[item[1]]
            v = apply_binary(node.op, vals[-2], vals[-1])
            return "binop-apply", c._replace(k=rest, vals=vals[:-2] + (v,))
        if tag == UN:
            node = self.nodes[item[1]]
            return "unop-apply", c._replace(k=rest, vals=vals[:-1] + (apply_unary(node.op, vals[-1]),))
        if tag == FIELD:
            node = self.nodes[item[1]]
            ref = _deref(vals[-1], node)
            return "field-read", c._replace(k=rest, vals=vals[:-1] + (c.heap[ref.oid][1][node.index],))
        if tag == ASSIGN:
            target = self.nodes[item[1]].target
            loc = self._loc(target, c.env)
            store = c.store[:loc] + (vals[-1],) + c.store[loc + 1:]
            return "store", c._replace(k=rest, vals=vals[:-1], store=store)
        if tag == FASSIGN:
            target = self.nodes[item[1]].target
            ref = _deref(vals[-2], target)
            cls, cells = c.heap[ref.oid]
            i = target.index
            obj = (cls, cells[:i] + (vals[-1],) + cells[i + 1:])
            heap = c.heap[:ref.oid] + (obj,) + c.heap[ref.oid + 1:]
            return "field-store", c._replace(k=rest, vals=vals[:-2], heap=heap)
        if tag == DECL:
            node = self.nodes[item[1]]
            env = env_set(c.env, node.name, len(c.store))
            return "bind", c._replace(k=rest, vals=vals[:-1], env=env, store=c.store + (vals[-1],))
        if tag == IF:
            node = self.nodes[item[1]]
            if vals[-1]:
                return "if-then", c._replace(k=rest + ((EXEC, node.then.nid),), vals=vals[:-1])
            if node.orelse is not None:
                return "if-else", c._replace(k=rest + ((EXEC, node.orelse.nid),), vals=vals[:-1])
            return "if-else", c._replace(k=rest, vals=vals[:-1])
        if tag == WHILE:
            node = self.nodes[item[1]]
            return "loop-unfold", c._replace(k=rest + ((LOOP, item[1]), (EVAL, node.cond.nid)))
        if tag == LOOP:
            node = self.nodes[item[1]]
            if vals[-1]:
                k2 = rest + ((WHILE, item[1]), (EXEC, node.body.nid))
                return "loop-enter", c._replace(k=k2, vals=vals[:-1])
            return "loop-exit", c._replace(k=rest, vals=vals[:-1])
        if tag == POPL:
            return "loop-pop", c._replace(k=rest, lstack=c.lstack[:-1])
        if tag == CALL:
            return self._invoke(self.nodes[item[1]], rest, c)
        if tag == NEW:
            return self._construct(self.nodes[item[1]], rest, c)
        if tag == RET:
            return "return-apply", self._return(c, vals[-1])
        if tag == VRET:
            return "implicit-return", self._return(c, VOID)
        if tag == PRINT:
            return "println-apply", c._replace(k=rest, vals=vals[:-1], out=c.out + (vals[-1],))
        if tag == POP:
            return "discard", c._replace(k=rest, vals=vals[:-1])
        if tag == MAIN:
            frame = Frame(rest, c.vals, (), c.lstack, None, None)
            body = self.program.main.body
            k2 = ((VRET,), (EXEC, body.nid))
            return "main", c._replace(k=k2, vals=(), lstack=(), frames=c.frames + (frame,))
        raise ValueError(f"unknown continuation item {item!r}")

    # -- statements ------------------------------------------------------

    def _exec(self, s, rest, c):
        if isinstance(s, ast.Block):
            return "block", c._replace(k=rest + tuple((EXEC, x.nid) for x in reversed(s.stmts)))
        if isinstance(s, ast.LocalDecl):
            if s.init is None:
                env = env_set(c.env, s.name, len(c.store))
                return "decl-uninit", c._replace(k=rest, env=env, store=c.store + (UNINIT,))
            return "decl", c._replace(k=rest + ((DECL, s.nid), (EVAL, s.init.nid)))
        if isinstance(s, ast.Assign):
            if isinstance(s.target, ast.FieldAccess):
                k2 = rest + ((FASSIGN, s.nid), (EVAL, s.value.nid), (EVAL, s.target.obj.nid))
                return "field-assign", c._replace(k=k2)
            return "assign", c._replace(k=rest + ((ASSIGN, s.nid), (EVAL, s.value.nid)))
        if isinstance(s, ast.If):
            return "if", c._replace(k=rest + ((IF, s.nid), (EVAL, s.cond.nid)))
        if isinstance(s, ast.While):
            n = len(rest)
            entry = LoopEntry(s.nid, n, n + 2)
            return "while", c._replace(k=rest + ((POPL,), (WHILE, s.nid)), lstack=c.lstack + (entry,))
        if isinstance(s, ast.Break):
            top = c.lstack[-1]
            return "break", c._replace(k=c.k[:top.exit], lstack=c.lstack[:-1])
        if isinstance(s, ast.Continue):
            return "continue", c._replace(k=c.k[:c.lstack[-1].head])
        if isinstance(s, ast.Return):
            if s.value is None:
                return "return-void", self._return(c, VOID)
            return "return", c._replace(k=rest + ((RET, s.nid), (EVAL, s.value.nid)))
        if isinstance(s, ast.ExprStmt):
            return "expr-stmt", c._replace(k=rest + ((POP,), (EVAL, s.expr.nid)))
        if isinstance(s, ast.Print):
            return "println", c._replace(k=rest + ((PRINT, s.nid), (EVAL, s.expr.nid)))
        raise TypeError(type(s).__name__)

    # -- expressions -----------------------------------------------------

    def _eval(self, e, rest, c):
        if isinstance(e, (ast.IntLit, ast.BoolLit)):
            return "const", c._replace(k=rest, vals=c.vals + (e.value,))
        if isinstance(e, ast.NullLit):
            return "const", c._replace(k=rest, vals=c.vals + (NULL,))
        if isinstance(e, ast.This):
            return "this", c._replace(k=rest, vals=c.vals + (c.store[env_get(c.env, "this")],))
        if isinstance(e, (ast.Local, ast.Static)):
            v = c.store[self._loc(e, c.env)]
            if v is UNINIT:
                raise RuntimeFault(f"{e.line}:{e.col}: read of uninitialized variable {e.name!r}")
            return "read", c._replace(k=rest, vals=c.vals + (v,))
        if isinstance(e, ast.FieldAccess):
            return "field", c._replace(k=rest + ((FIELD, e.nid), (EVAL, e.obj.nid)))
        if isinstance(e, ast.Binary):
            return "binop", c._replace(k=rest + ((BIN, e.nid), (EVAL, e.right.nid), (EVAL, e.left.nid)))
        if isinstance(e, ast.Unary):
            return "unop", c._replace(k=rest + ((UN, e.nid), (EVAL, e.operand.nid)))
        if isinstance(e, ast.Call):
            items = [(CALL, e.nid)] + [(EVAL, a.nid) for a in reversed(e.args)]
            if e.receiver is not None:
                items.append((EVAL, e.receiver.nid))
            return "call", c._replace(k=rest + tuple(items))
        if isinstance(e, ast.New):
            items = [(NEW, e.nid)] + [(EVAL, a.nid) for a in reversed(e.args)]
            return "new", c._replace(k=rest + tuple(items))
        raise TypeError(type(e).__name__)

    def _loc(self, e, env) -> int:
        if isinstance(e, ast.Static):
            return self.program.static_index(e.name)
        return env_get(env, e.name)

    # -- calls -----------------------------------------------------------

    def _enter(self, c, rest, vals, method: ast.MethodDecl, this, args, result):
        frame = Frame(rest, vals, c.env, c.lstack, None, result)
        store = c.store
        env = ()
        if this is not None:
            env = env_set(env, "this", len(store))
            store = store + (this,)
        for (_, name), v in zip(method.params, args):
            env = env_set(env, name, len(store))
            store = store + (v,)
        k = ((VRET,), (EXEC, method.body.nid))
        return c._replace(k=k, vals=(), env=env, store=store, lstack=(), frames=c.frames + (frame,))

    def _invoke(self, e: ast.Call, rest, c):
        n = len(e.args)
        vals = c.vals
        args = vals[len(vals) - n:]
        vals = vals[:len(vals) - n]
        this = None
        if e.receiver is not None:
            this = _deref(vals[-1], e)
            vals = vals[:-1]
        return "invoke", self._enter(c, rest, vals, e.method, this, args, None)

    def _construct(self, e: ast.New, rest, c):
        cls = self.program.klass(e.klass)
        n = len(e.args)
        vals = c.vals
        args = vals[len(vals) - n:]
        vals = vals[:len(vals) - n]
        ref = Ref(len(c.heap))
        obj = (cls.name, tuple(default_for(f.type) for f in cls.instance_fields))
        c = c._replace(heap=c.heap + (obj,))
        return "construct", self._enter(c, rest, vals, cls.init, ref, args, ref)

    def _return(self, c, value):
        frame = c.frames[-1]
        if frame.result is not None:
            value = frame.result
        # void calls push a placeholder so the caller's discard stays aligned
        vals = frame.vals + (value,)
        return c._replace(k=frame.k, vals=vals, env=frame.env, lstack=frame.lstack,
                          frames=c.frames[:-1])


def _deref(v, node) -> Ref:
    if not isinstance(v, Ref) or v.oid < 0:
        raise RuntimeFault(f"{node.line}:{node.col}: null dereference")
    return v


def step_concrete(program: ast.Program, cfg: ConcreteConfig) -> ConcreteConfig:
    """The unique successor of a non-final configuration."""
    return ConcreteMachine(program).step(cfg)[1]


def observe_concrete(program: ast.Program, cfg: ConcreteConfig) -> ObservedState:
    values, keys, _ = project(program, lambda v: v, lambda v: None, cfg.store, cfg.heap)
    return ObservedState(values, keys, cfg.out)


def initial_observed(program: ast.Program, inputs: Mapping[str, Any]) -> ObservedState:
    return ObservedState(dict(inputs), {n: n for n in inputs}, ())


class Run(NamedTuple):
    final: ObservedState
    steps: int
    config: ConcreteConfig


def execute(program: ast.Program, inputs: Mapping[str, Any], step_limit: int | None = None,
            trace: list | None = None) -> Run:
    limit = step_limit_from_env() if step_limit is None else step_limit
    m = ConcreteMachine(program)
    cfg = initial_concrete(program, inputs)
    steps = 0
    while cfg.k:
        if steps >= limit:
            raise StepLimitExceeded(f"step limit of {limit} exceeded")
        rule, cfg = m.step(cfg)
        if trace is not None:
            trace.append(rule)
        steps += 1
    return Run(observe_concrete(program, cfg), steps, cfg)


def run_concrete(program: ast.Program, inputs: Mapping[str, Any],
                 step_limit: int | None = None) -> ObservedState:
    """Run to completion and project the final store and output."""
    return execute(program, inputs, step_limit).final


def visible_low(state: ObservedState, policy: NIPolicy) -> dict[str, Any]:
    """Values a Low observer can read: Low paths reached only through Low
    references."""
    out = {}
    for path, key in state.keys.items():
        if not policy.is_low(key):
            continue
        head, *rest = path.split(".")
        prefix, ok = head, policy.is_low(state.keys.get(head, head))
        for part in rest[:-1]:
            prefix = f"{prefix}.{part}"
            if not policy.is_low(state.keys[prefix]):
                ok = False
                break
        if ok:
            out[path] = state.values[path]
    return out


def low_fingerprint(state: ObservedState, policy: NIPolicy) -> tuple:
    return tuple(sorted(visible_low(state, policy).items())), tuple(state.output)


def low_equal(s1: ObservedState, s2: ObservedState, policy: NIPolicy) -> bool:
    """Indistinguishability for a Low observer, including printed output."""
    return low_fingerprint(s1, policy) == low_fingerprint(s2, policy)
