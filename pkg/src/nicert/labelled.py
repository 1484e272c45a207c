"""Label-tracking continuation machine.

One engine serves two modes. In the extended mode every value travels with
its label and the machine is deterministic. In the abstract mode scalar
values are dropped (kept as ``None``), references are still tracked, and
every conditional or loop test offers both outcomes.

Values on the stack are ``(value, Label)`` pairs; store and heap cells are
``(value, StoredLabel)`` pairs.
"""

from __future__ import annotations

from typing import Any, Mapping, NamedTuple

from .concrete import check_inputs, initial_items
from .labels import HIGH, LOW, Label, StoredLabel, as_stored, join, update
from .machine import (
    ASSIGN, BIN, CALL, DECL, EVAL, EXEC, FASSIGN, FIELD, IF, LOOP, MAIN, NEW, NULL, POP, POPL,
    PRINT, RESTORE, RET, UN, UNINIT, VOID, VRET, WHILE, Frame, LoopEntry, Ref, RuntimeFault,
    apply_binary, apply_unary, default_for, env_get, env_set, project,
)
from .syntax import ast, contains_abrupt
from .syntax.policy import NIPolicy


class ExtConfig(NamedTuple):
    k: tuple
    vals: tuple
    env: tuple
    store: tuple
    heap: tuple
    lstack: tuple
    frames: tuple
    cl: Label
    out: tuple

    @property
    def final(self) -> bool:
        return not self.k


class Stuck(Exception):
    """An abstract path that cannot continue (null dereference, uninitialized read)."""


class LabelledMachine:
    def __init__(self, program: ast.Program, policy: NIPolicy, abstract: bool = False,
                 shield_ifs: bool = False):
        self.program = program
        self.shield_ifs = shield_ifs
        self.policy = policy
        self.abstract = abstract
        self.nodes = program.nodes
        self.static_index = {name: i for i, (name, _, _) in enumerate(program.statics)}
        self.field_labels = {
            c.name: tuple(as_stored(policy.label(f"{c.name}.{f.name}")) for f in c.instance_fields)
            for c in program.classes
        }
        self._abrupt: dict[int, bool] = {}

    # -- initial states --------------------------------------------------

    def _scalar(self, v):
        return None if self.abstract and not isinstance(v, Ref) else v

    def initial(self, inputs: Mapping[str, Any] | None = None) -> ExtConfig:
        """Initial configuration: statics at their defaults, inputs bound, CL Low.

        In abstract mode ``inputs`` is ignored.
        """
        if not self.abstract:
            check_inputs(self.program, inputs or {})
        store = []
        for name, f, _ in self.program.statics:
            store.append((self._scalar(default_for(f.type)), as_stored(self.policy.label(name))))
        env = ()
        for name, _ in self.program.inputs:
            env = env_set(env, name, len(store))
            v = None if self.abstract else inputs[name]
            store.append((v, as_stored(self.policy.label(name))))
        return ExtConfig(initial_items(self.program), (), env, tuple(store), (), (), (), LOW, ())

    # -- transitions -----------------------------------------------------

    def successors(self, c: ExtConfig) -> list[tuple[str, ExtConfig]]:
        """All one-step successors with their rule names.

        Extended mode always yields exactly one. Abstract mode yields two at a
        conditional or loop test and none on a stuck path.
        """
        try:
            return self._step(c)
        except Stuck as exc:
            if self.abstract:
                return []
            raise RuntimeFault(str(exc)) from None

    def step(self, c: ExtConfig) -> tuple[str, ExtConfig]:
        (result,) = self.successors(c)
        return result

    def _step(self, c: ExtConfig):
        k = c.k
        item = k[-1]
        rest = k[:-1]
        tag = item[0]
        if tag == EXEC:
            return [self._exec(self.nodes[item[1]], rest, c)]
        if tag == EVAL:
            return [self._eval(self.nodes[item[1]], rest, c)]
        vals = c.vals
        if tag == BIN:
            node = self.nodes[item[1]]
            (a, la), (b, lb) = vals[-2], vals[-1]
            v = None if self.abstract else apply_binary(node.op, a, b)
            return [("binop-apply", c._replace(k=rest, vals=vals[:-2] + ((v, join(la, lb)),)))]
        if tag == UN:
            node = self.nodes[item[1]]
            a, la = vals[-1]
            v = None if self.abstract else apply_unary(node.op, a)
            return [("unop-apply", c._replace(k=rest, vals=vals[:-1] + ((v, la),)))]
        if tag == FIELD:
            node = self.nodes[item[1]]
            ref, lr = vals[-1]
            _deref(ref, node)
            fv, fl = c.heap[ref.oid][1][node.index]
            out = (fv, join(join(lr, fl), c.cl))
            return [("field-read", c._replace(k=rest, vals=vals[:-1] + (out,)))]
        if tag == ASSIGN:
            target = self.nodes[item[1]].target
            loc = self._loc(target, c.env)
            v, l = vals[-1]
            cell = (v, update(c.store[loc][1], l))
            store = c.store[:loc] + (cell,) + c.store[loc + 1:]
            return [("store", c._replace(k=rest, vals=vals[:-1], store=store))]
        if tag == FASSIGN:
            target = self.nodes[item[1]].target
            ref, lr = vals[-2]
            _deref(ref, target)
            v, l = vals[-1]
            cls, cells = c.heap[ref.oid]
            i = target.index
            cell = (v, update(cells[i][1], join(l, lr)))
            obj = (cls, cells[:i] + (cell,) + cells[i + 1:])
            heap = c.heap[:ref.oid] + (obj,) + c.heap[ref.oid + 1:]
            return [("field-store", c._replace(k=rest, vals=vals[:-2], heap=heap))]
        if tag == DECL:
            node = self.nodes[item[1]]
            v, l = vals[-1]
            env = env_set(c.env, node.name, len(c.store))
            store = c.store + ((v, as_stored(l)),)
            return [("bind", c._replace(k=rest, vals=vals[:-1], env=env, store=store))]
        if tag == IF:
            node = self.nodes[item[1]]
            v, l = vals[-1]
            base = c._replace(vals=vals[:-1], cl=join(c.cl, l))
            then = ("if-then", base._replace(k=rest + ((EXEC, node.then.nid),)))
            orelse_k = rest if node.orelse is None else rest + ((EXEC, node.orelse.nid),)
            orelse = ("if-else", base._replace(k=orelse_k))
            if self.abstract:
                return [then, orelse]
            return [then if v else orelse]
        if tag == WHILE:
            node = self.nodes[item[1]]
            return [("loop-unfold", c._replace(k=rest + ((LOOP, item[1]), (EVAL, node.cond.nid))))]
        if tag == LOOP:
            node = self.nodes[item[1]]
            v, l = vals[-1]
            base = c._replace(vals=vals[:-1], cl=join(c.cl, l))
            enter = ("loop-enter", base._replace(k=rest + ((WHILE, item[1]), (EXEC, node.body.nid))))
            leave = ("loop-exit", base._replace(k=rest))
            if self.abstract:
                return [enter, leave]
            return [enter if v else leave]
        if tag == RESTORE:
            return [("restore", c._replace(k=rest, cl=item[1]))]
        if tag == POPL:
            return [("loop-pop", c._replace(k=rest, lstack=c.lstack[:-1]))]
        if tag == CALL:
            return [self._invoke(self.nodes[item[1]], rest, c)]
        if tag == NEW:
            return [self._construct(self.nodes[item[1]], rest, c)]
        if tag == RET:
            return [("return-apply", self._return(c, vals[-1]))]
        if tag == VRET:
            return [("implicit-return", self._return(c, (VOID, c.cl)))]
        if tag == PRINT:
            out = c.out if self.abstract else c.out + (vals[-1],)
            return [("println-apply", c._replace(k=rest, vals=vals[:-1], out=out))]
        if tag == POP:
            return [("discard", c._replace(k=rest, vals=vals[:-1]))]
        if tag == MAIN:
            frame = Frame(rest, c.vals, (), c.lstack, c.cl, None)
            k2 = ((VRET,), (EXEC, self.program.main.body.nid))
            return [("main", c._replace(k=k2, vals=(), lstack=(), frames=c.frames + (frame,)))]
        raise ValueError(f"unknown continuation item {item!r}")

    def abrupt(self, s: ast.If) -> bool:
        r = self._abrupt.get(s.nid)
        if r is None:
            r = contains_abrupt(s.then, self.shield_ifs) or (
                s.orelse is not None and contains_abrupt(s.orelse, self.shield_ifs))
            self._abrupt[s.nid] = r
        return r

    # -- statements ------------------------------------------------------

    def _exec(self, s, rest, c):
        if isinstance(s, ast.Block):
            return "block", c._replace(k=rest + tuple((EXEC, x.nid) for x in reversed(s.stmts)))
        if isinstance(s, ast.LocalDecl):
            if s.init is None:
                env = env_set(c.env, s.name, len(c.store))
                store = c.store + ((UNINIT, as_stored(c.cl)),)
                return "decl-uninit", c._replace(k=rest, env=env, store=store)
            return "decl", c._replace(k=rest + ((DECL, s.nid), (EVAL, s.init.nid)))
        if isinstance(s, ast.Assign):
            if isinstance(s.target, ast.FieldAccess):
                k2 = rest + ((FASSIGN, s.nid), (EVAL, s.value.nid), (EVAL, s.target.obj.nid))
                return "field-assign", c._replace(k=k2)
            return "assign", c._replace(k=rest + ((ASSIGN, s.nid), (EVAL, s.value.nid)))
        if isinstance(s, ast.If):
            if self.abrupt(s):
                return "if-abrupt", c._replace(k=rest + ((IF, s.nid), (EVAL, s.cond.nid)))
            return "if", c._replace(k=rest + ((RESTORE, c.cl), (IF, s.nid), (EVAL, s.cond.nid)))
        if isinstance(s, ast.While):
            n = len(rest)
            entry = LoopEntry(s.nid, n, n + 3)
            k2 = rest + ((POPL,), (RESTORE, c.cl), (WHILE, s.nid))
            return "while", c._replace(k=k2, lstack=c.lstack + (entry,))
        if isinstance(s, ast.Break):
            top = c.lstack[-1]
            return "break", c._replace(k=c.k[:top.exit], lstack=c.lstack[:-1])
        if isinstance(s, ast.Continue):
            return "continue", c._replace(k=c.k[:c.lstack[-1].head])
        if isinstance(s, ast.Return):
            if s.value is None:
                return "return-void", self._return(c, (VOID, c.cl))
            return "return", c._replace(k=rest + ((RET, s.nid), (EVAL, s.value.nid)))
        if isinstance(s, ast.ExprStmt):
            return "expr-stmt", c._replace(k=rest + ((POP,), (EVAL, s.expr.nid)))
        if isinstance(s, ast.Print):
            return "println", c._replace(k=rest + ((PRINT, s.nid), (EVAL, s.expr.nid)))
        raise TypeError(type(s).__name__)

    # -- expressions -----------------------------------------------------

    def _eval(self, e, rest, c):
        cl = c.cl
        if isinstance(e, (ast.IntLit, ast.BoolLit)):
            v = None if self.abstract else e.value
            return "const", c._replace(k=rest, vals=c.vals + ((v, cl),))
        if isinstance(e, ast.NullLit):
            return "const", c._replace(k=rest, vals=c.vals + ((NULL, cl),))
        if isinstance(e, ast.This):
            v, l = c.store[env_get(c.env, "this")]
            return "this", c._replace(k=rest, vals=c.vals + ((v, join(l, cl)),))
        if isinstance(e, (ast.Local, ast.Static)):
            v, l = c.store[self._loc(e, c.env)]
            if v is UNINIT:
                raise Stuck(f"{e.line}:{e.col}: read of uninitialized variable {e.name!r}")
            return "read", c._replace(k=rest, vals=c.vals + ((v, join(l, cl)),))
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
            return self.static_index[e.name]
        return env_get(env, e.name)

    # -- calls -----------------------------------------------------------

    def _enter(self, c, rest, vals, method: ast.MethodDecl, this, args, result):
        frame = Frame(rest, vals, c.env, c.lstack, c.cl, result)
        store = c.store
        env = ()
        if this is not None:
            env = env_set(env, "this", len(store))
            store = store + ((this[0], as_stored(this[1])),)
        for (_, name), (v, l) in zip(method.params, args):
            env = env_set(env, name, len(store))
            store = store + ((v, as_stored(l)),)
        k = ((VRET,), (EXEC, method.body.nid))
        return c._replace(k=k, vals=(), env=env, store=store, lstack=(), frames=c.frames + (frame,))

    def _invoke(self, e: ast.Call, rest, c):
        n = len(e.args)
        vals = c.vals
        args = vals[len(vals) - n:]
        vals = vals[:len(vals) - n]
        this = None
        if e.receiver is not None:
            this = vals[-1]
            _deref(this[0], e)
            vals = vals[:-1]
        return "invoke", self._enter(c, rest, vals, e.method, this, args, None)

    def _construct(self, e: ast.New, rest, c):
        cls = self.program.klass(e.klass)
        n = len(e.args)
        vals = c.vals
        args = vals[len(vals) - n:]
        vals = vals[:len(vals) - n]
        ref = Ref(len(c.heap))
        cells = []
        for f, pl in zip(cls.instance_fields, self.field_labels[cls.name]):
            label = pl if c.cl is LOW else update(pl, HIGH)
            cells.append((self._scalar(default_for(f.type)), label))
        c = c._replace(heap=c.heap + ((cls.name, tuple(cells)),))
        return "construct", self._enter(c, rest, vals, cls.init, (ref, c.cl), args, ref)

    def _return(self, c, value):
        frame = c.frames[-1]
        if frame.result is not None:
            value = (frame.result, frame.cl)
        return c._replace(k=frame.k, vals=frame.vals + (value,), env=frame.env,
                          lstack=frame.lstack, frames=c.frames[:-1], cl=frame.cl)


def _deref(v, node) -> None:
    if not isinstance(v, Ref) or v.oid < 0:
        raise Stuck(f"{node.line}:{node.col}: null dereference")


# -- verdicts ----------------------------------------------------------------


class Verdict(NamedTuple):
    """``Pass`` or ``Fail`` with the Low variables whose final label is not Low."""

    passed: bool
    witness: tuple = ()

    def __str__(self) -> str:
        if self.passed:
            return "Pass"
        return "Fail(" + ", ".join(f"{p} = {l}" for p, l in self.witness) + ")"


def labelled_view(program: ast.Program, c: ExtConfig):
    """``(values, keys, labels)`` of every path rooted at a static field."""
    return project(program, lambda cell: cell[0], lambda cell: cell[1], c.store, c.heap)


def low_violations(program: ast.Program, policy: NIPolicy, c: ExtConfig) -> tuple:
    _, keys, labels = labelled_view(program, c)
    return tuple(sorted((path, labels[path]) for path, key in keys.items()
                        if policy.is_low(key) and labels[path] is not StoredLabel.LOW))


def verdict_of(program: ast.Program, policy: NIPolicy, c: ExtConfig) -> Verdict:
    bad = low_violations(program, policy, c)
    return Verdict(not bad, bad)


def policy_labelled_cells(program: ast.Program, policy: NIPolicy, c: ExtConfig):
    """Policy label and current stored label of every policy-governed cell.

    Covers statics, the declared inputs while main's environment is live, and
    every field of every allocated object.
    """
    out = []
    for i, (name, _, _) in enumerate(program.statics):
        out.append((name, policy.label(name), c.store[i][1]))
    envs = [c.env] + [f.env for f in c.frames]
    main_env = envs[-1] if c.frames else c.env
    for name, _ in program.inputs:
        for n, loc in main_env:
            if n == name:
                out.append((name, policy.label(name), c.store[loc][1]))
    for cls, cells in c.heap:
        klass = program.klass(cls)
        for f, (_, l) in zip(klass.instance_fields, cells):
            key = f"{cls}.{f.name}"
            out.append((key, policy.label(key), l))
    return out


def reachability_ok(program: ast.Program, policy: NIPolicy, c: ExtConfig) -> bool:
    """Low-policy cells hold Low or Low >> High; High-policy cells High or High >> Low."""
    allowed = {
        LOW: (StoredLabel.LOW, StoredLabel.LOW_TO_HIGH),
        HIGH: (StoredLabel.HIGH, StoredLabel.HIGH_TO_LOW),
    }
    return all(stored in allowed[pl] for _, pl, stored in policy_labelled_cells(program, policy, c))


__all__ = [
    "ExtConfig", "LabelledMachine", "Stuck", "Verdict", "labelled_view",
    "low_violations", "policy_labelled_cells", "reachability_ok", "verdict_of",
]
