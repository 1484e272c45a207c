"""Name resolution, light type checking and program-point numbering."""

from __future__ import annotations

from dataclasses import dataclass, field

from . import ast
from .lexer import ParseError

_ARITH = {"+", "-", "*", "/", "%"}
_ORDER = {"<", ">", "<=", ">="}
_EQUALITY = {"==", "!="}
_LOGIC = {"&&", "||"}


def children(node: ast.Node) -> list[ast.Node]:
    """Sub-nodes in evaluation order."""
    if isinstance(node, ast.FieldAccess):
        return [node.obj]
    if isinstance(node, ast.Binary):
        return [node.left, node.right]
    if isinstance(node, ast.Unary):
        return [node.operand]
    if isinstance(node, ast.Call):
        return ([node.receiver] if node.receiver is not None else []) + list(node.args)
    if isinstance(node, ast.New):
        return list(node.args)
    if isinstance(node, ast.LocalDecl):
        return [node.init] if node.init is not None else []
    if isinstance(node, ast.Assign):
        return [node.target, node.value]
    if isinstance(node, ast.If):
        return [node.cond, node.then] + ([node.orelse] if node.orelse is not None else [])
    if isinstance(node, ast.While):
        return [node.cond, node.body]
    if isinstance(node, ast.Return):
        return [node.value] if node.value is not None else []
    if isinstance(node, (ast.ExprStmt, ast.Print)):
        return [node.expr]
    if isinstance(node, ast.Block):
        return list(node.stmts)
    return []


def walk(node: ast.Node):
    yield node
    for child in children(node):
        yield from walk(child)


@dataclass
class _Ctx:
    klass: ast.ClassDecl
    method: ast.MethodDecl | None
    static: bool
    scopes: list[dict[str, str]] = field(default_factory=list)
    in_init: bool = False

    def lookup(self, name: str) -> str | None:
        for scope in reversed(self.scopes):
            if name in scope:
                return scope[name]
        return None


class Checker:
    def __init__(self, program: ast.Program):
        self.p = program
        self.classes: dict[str, ast.ClassDecl] = {}
        self.statics: dict[str, tuple[ast.FieldDecl, str]] = {}
        self.calls: dict[str, set[str]] = {}
        self._caller = ""

    def run(self) -> ast.Program:
        p = self.p
        for c in p.classes:
            if c.name in self.classes:
                raise ParseError(f"duplicate class {c.name!r}", c.line, c.col)
            self.classes[c.name] = c
        self._find_main()
        for c in p.classes:
            for f in c.fields:
                self._check_type(f.type, f.line, f.col)
                if f.static:
                    if f.name in self.statics:
                        raise ParseError(f"static field {f.name!r} declared twice", f.line, f.col)
                    self.statics[f.name] = (f, c.name)
                    p.statics.append((f.name, f, c.name))
        for t, n in p.main.params:
            if n in self.statics:
                raise ParseError(f"input {n!r} clashes with a static field",
                                 p.main.line, p.main.col)

        for c in p.classes:
            for f in c.static_fields:
                if f.init is None:
                    continue
                self._caller = "<clinit>"
                ctx = _Ctx(c, None, True, [{}])
                init, t = self.expr(f.init, ctx)
                self._compatible(f.type, t, f.line, f.col)
                f.init = init
                p.clinit.append(ast.Assign(ast.Static(f.name, line=f.line, col=f.col), init,
                                           line=f.line, col=f.col))
        for c in p.classes:
            self._synthesize_init(c)
            for m in c.methods.values():
                self._method(c, m)
        self._check_recursion()
        self._number()
        return p

    # -- structure -------------------------------------------------------

    def _find_main(self) -> None:
        mains = [m for c in self.p.classes for m in c.methods.values() if m.name == "main"]
        if not mains:
            raise ParseError("no entry point: missing static void main")
        if len(mains) > 1:
            raise ParseError("duplicate main method", mains[1].line, mains[1].col)
        m = mains[0]
        if not m.static or m.ret != "void":
            raise ParseError("main must be static void", m.line, m.col)
        for t, n in m.params:
            if t not in ast.SCALAR_TYPES:
                raise ParseError(f"input {n!r} must have type int or boolean", m.line, m.col)
        self.p.main = m

    def _check_type(self, t: str, line: int, col: int) -> None:
        if t not in ast.SCALAR_TYPES and t not in self.classes:
            raise ParseError(f"unknown type {t!r}", line, col)

    def _synthesize_init(self, c: ast.ClassDecl) -> None:
        self._caller = f"{c.name}.<init>"
        stmts: list[ast.Stmt] = []
        for f in c.instance_fields:
            if f.init is None:
                continue
            ctx = _Ctx(c, None, False, [{}], in_init=True)
            init, t = self.expr(f.init, ctx)
            self._compatible(f.type, t, f.line, f.col)
            f.init = init
            target = ast.FieldAccess(ast.This(line=f.line, col=f.col), f.name,
                                     klass=c.name, index=c.field_index(f.name),
                                     line=f.line, col=f.col)
            stmts.append(ast.Assign(target, init, line=f.line, col=f.col))
        params = c.ctor.params if c.ctor else []
        line, col = (c.ctor.line, c.ctor.col) if c.ctor else (c.line, c.col)
        init_method = ast.MethodDecl("<init>", c.name, params, "void", False,
                                     ast.Block(stmts, line=line, col=col),
                                     is_ctor=True, line=line, col=col)
        if c.ctor is not None:
            ctx = _Ctx(c, init_method, False, [self._param_scope(c.ctor)])
            body = self.stmt(c.ctor.body, ctx, loop_depth=0)
            init_method.body.stmts.extend(body.stmts)
        c.init = init_method

    def _param_scope(self, m: ast.MethodDecl) -> dict[str, str]:
        scope = {}
        for t, n in m.params:
            self._check_type(t, m.line, m.col)
            scope[n] = t
        return scope

    def _method(self, c: ast.ClassDecl, m: ast.MethodDecl) -> None:
        if m.ret != "void":
            self._check_type(m.ret, m.line, m.col)
        self._caller = m.qualname
        ctx = _Ctx(c, m, m.static, [self._param_scope(m)])
        m.body = self.stmt(m.body, ctx, loop_depth=0)
        if m.ret != "void" and not _always_returns(m.body):
            raise ParseError(f"missing return statement in {m.qualname}", m.line, m.col)

    def _check_recursion(self) -> None:
        state: dict[str, int] = {}

        def visit(name: str, path: list[str]) -> None:
            state[name] = 1
            for callee in sorted(self.calls.get(name, ())):
                if state.get(callee) == 1:
                    cycle = path[path.index(callee):] + [callee] if callee in path else [callee]
                    raise ParseError("recursion is not supported: " + " -> ".join(cycle))
                if callee not in state:
                    visit(callee, path + [callee])
            state[name] = 2

        for name in sorted(self.calls):
            if name not in state:
                visit(name, [name])

    def _number(self) -> None:
        nodes: list[ast.Node] = []

        def number(node: ast.Node) -> None:
            for n in walk(node):
                n.nid = len(nodes)
                nodes.append(n)

        for s in self.p.clinit:
            number(s)
        for c in self.p.classes:
            number(c.init.body)
            for m in c.methods.values():
                number(m.body)
        self.p.nodes = nodes

    # -- statements ------------------------------------------------------

    def stmt(self, s: ast.Stmt, ctx: _Ctx, loop_depth: int) -> ast.Stmt:
        if isinstance(s, ast.Block):
            ctx.scopes.append({})
            s.stmts = [self.stmt(x, ctx, loop_depth) for x in s.stmts]
            ctx.scopes.pop()
            return s
        if isinstance(s, ast.LocalDecl):
            self._check_type(s.type, s.line, s.col)
            if ctx.lookup(s.name) is not None:
                raise ParseError(f"variable {s.name!r} is already defined", s.line, s.col)
            if s.init is not None:
                s.init, t = self.expr(s.init, ctx)
                self._compatible(s.type, t, s.line, s.col)
            ctx.scopes[-1][s.name] = s.type
            return s
        if isinstance(s, ast.Assign):
            s.value, vt = self.expr(s.value, ctx)
            s.target, tt = self.expr(s.target, ctx)
            if not isinstance(s.target, (ast.Local, ast.Static, ast.FieldAccess)):
                raise ParseError("invalid assignment target", s.line, s.col)
            self._compatible(tt, vt, s.line, s.col)
            return s
        if isinstance(s, ast.If):
            s.cond, t = self.expr(s.cond, ctx)
            self._expect(t, "boolean", s.cond)
            s.then = self._branch(s.then, ctx, loop_depth)
            if s.orelse is not None:
                s.orelse = self._branch(s.orelse, ctx, loop_depth)
            return s
        if isinstance(s, ast.While):
            s.cond, t = self.expr(s.cond, ctx)
            self._expect(t, "boolean", s.cond)
            s.body = self._branch(s.body, ctx, loop_depth + 1)
            return s
        if isinstance(s, (ast.Break, ast.Continue)):
            if loop_depth == 0:
                kind = "break" if isinstance(s, ast.Break) else "continue"
                raise ParseError(f"{kind} outside loop", s.line, s.col)
            return s
        if isinstance(s, ast.Return):
            ret = ctx.method.ret if ctx.method else "void"
            if s.value is None:
                if ret != "void":
                    raise ParseError("missing return value", s.line, s.col)
            else:
                if ret == "void":
                    raise ParseError("cannot return a value from a void method", s.line, s.col)
                s.value, t = self.expr(s.value, ctx)
                self._compatible(ret, t, s.line, s.col)
            return s
        if isinstance(s, ast.ExprStmt):
            s.expr, _ = self.expr(s.expr, ctx)
            return s
        if isinstance(s, ast.Print):
            s.expr, t = self.expr(s.expr, ctx)
            if t not in ast.SCALAR_TYPES:
                raise ParseError("println takes an int or boolean", s.line, s.col)
            return s
        raise ParseError(f"unsupported statement {type(s).__name__}", s.line, s.col)

    def _branch(self, s: ast.Stmt, ctx: _Ctx, loop_depth: int) -> ast.Stmt:
        ctx.scopes.append({})
        out = self.stmt(s, ctx, loop_depth)
        ctx.scopes.pop()
        return out

    # -- expressions -----------------------------------------------------

    def expr(self, e: ast.Expr, ctx: _Ctx) -> tuple[ast.Expr, str]:
        if isinstance(e, ast.IntLit):
            return e, "int"
        if isinstance(e, ast.BoolLit):
            return e, "boolean"
        if isinstance(e, ast.NullLit):
            return e, "null"
        if isinstance(e, ast.This):
            if ctx.static:
                raise ParseError("'this' used in a static context", e.line, e.col)
            return e, ctx.klass.name
        if isinstance(e, (ast.Local, ast.Static)):
            return e, self._var_type(e, ctx)
        if isinstance(e, ast.Name):
            return self._name(e, ctx)
        if isinstance(e, ast.FieldAccess):
            return self._field(e, ctx)
        if isinstance(e, ast.Binary):
            e.left, lt = self.expr(e.left, ctx)
            e.right, rt = self.expr(e.right, ctx)
            if e.op in _ARITH:
                self._expect(lt, "int", e.left)
                self._expect(rt, "int", e.right)
                return e, "int"
            if e.op in _ORDER:
                self._expect(lt, "int", e.left)
                self._expect(rt, "int", e.right)
                return e, "boolean"
            if e.op in _LOGIC:
                self._expect(lt, "boolean", e.left)
                self._expect(rt, "boolean", e.right)
                return e, "boolean"
            if lt in ast.SCALAR_TYPES or rt in ast.SCALAR_TYPES:
                if lt != rt:
                    raise ParseError(f"cannot compare {lt} with {rt}", e.line, e.col)
            return e, "boolean"
        if isinstance(e, ast.Unary):
            e.operand, t = self.expr(e.operand, ctx)
            self._expect(t, "int" if e.op == "-" else "boolean", e.operand)
            return e, "int" if e.op == "-" else "boolean"
        if isinstance(e, ast.Call):
            return self._call(e, ctx)
        if isinstance(e, ast.New):
            if e.klass not in self.classes:
                raise ParseError(f"unknown class {e.klass!r}", e.line, e.col)
            c = self.classes[e.klass]
            params = c.ctor.params if c.ctor else []
            self._args(e, params, ctx)
            self.calls.setdefault(self._caller, set()).add(f"{c.name}.<init>")
            return e, c.name
        raise ParseError(f"unsupported expression {type(e).__name__}", e.line, e.col)

    def _var_type(self, e, ctx: _Ctx) -> str:
        if isinstance(e, ast.Local):
            return ctx.lookup(e.name)
        return self.statics[e.name][0].type

    def _name(self, e: ast.Name, ctx: _Ctx) -> tuple[ast.Expr, str]:
        t = ctx.lookup(e.name)
        if t is not None:
            return ast.Local(e.name, line=e.line, col=e.col), t
        for f in ctx.klass.fields:
            if f.name == e.name:
                if f.static:
                    return ast.Static(e.name, line=e.line, col=e.col), f.type
                if ctx.static:
                    raise ParseError(f"instance field {e.name!r} used in a static context",
                                     e.line, e.col)
                fa = ast.FieldAccess(ast.This(line=e.line, col=e.col), e.name,
                                     klass=ctx.klass.name,
                                     index=ctx.klass.field_index(e.name),
                                     line=e.line, col=e.col)
                return fa, f.type
        if e.name in self.statics:
            return ast.Static(e.name, line=e.line, col=e.col), self.statics[e.name][0].type
        raise ParseError(f"cannot resolve name {e.name!r}", e.line, e.col)

    def _is_class_ref(self, e: ast.Expr, ctx: _Ctx) -> bool:
        return (isinstance(e, ast.Name) and e.name in self.classes
                and ctx.lookup(e.name) is None
                and not any(f.name == e.name for f in ctx.klass.fields)
                and e.name not in self.statics)

    def _field(self, e: ast.FieldAccess, ctx: _Ctx) -> tuple[ast.Expr, str]:
        if e.klass is not None:  # synthesized, already resolved
            return e, self.classes[e.klass].instance_fields[e.index].type
        if self._is_class_ref(e.obj, ctx):
            c = self.classes[e.obj.name]
            for f in c.static_fields:
                if f.name == e.name:
                    return ast.Static(e.name, line=e.line, col=e.col), f.type
            raise ParseError(f"class {c.name} has no static field {e.name!r}", e.line, e.col)
        e.obj, t = self.expr(e.obj, ctx)
        if t not in self.classes:
            raise ParseError(f"field access on non-object of type {t}", e.line, e.col)
        c = self.classes[t]
        idx = c.field_index(e.name)
        if idx < 0:
            if any(f.name == e.name for f in c.static_fields):
                return ast.Static(e.name, line=e.line, col=e.col), self.statics[e.name][0].type
            raise ParseError(f"class {c.name} has no field {e.name!r}", e.line, e.col)
        e.klass, e.index = c.name, idx
        return e, c.instance_fields[idx].type

    def _call(self, e: ast.Call, ctx: _Ctx) -> tuple[ast.Expr, str]:
        if e.receiver is None:
            m = ctx.klass.methods.get(e.name)
            if m is None:
                raise ParseError(f"cannot resolve method {e.name!r}", e.line, e.col)
            if not m.static:
                if ctx.static:
                    raise ParseError(f"instance method {e.name!r} called from a static context",
                                     e.line, e.col)
                e.receiver = ast.This(line=e.line, col=e.col)
        elif self._is_class_ref(e.receiver, ctx):
            c = self.classes[e.receiver.name]
            m = c.methods.get(e.name)
            if m is None or not m.static:
                raise ParseError(f"class {c.name} has no static method {e.name!r}", e.line, e.col)
            e.qualifier = c.name
            e.receiver = None
        else:
            e.receiver, t = self.expr(e.receiver, ctx)
            if t not in self.classes:
                raise ParseError(f"method call on non-object of type {t}", e.line, e.col)
            m = self.classes[t].methods.get(e.name)
            if m is None:
                raise ParseError(f"class {t} has no method {e.name!r}", e.line, e.col)
            if m.static:
                raise ParseError(f"static method {e.name!r} called through an instance",
                                 e.line, e.col)
        if m.name == "main" and m is self.p.main:
            raise ParseError("main cannot be called", e.line, e.col)
        self._args(e, m.params, ctx)
        e.method = m
        self.calls.setdefault(self._caller, set()).add(m.qualname)
        return e, m.ret

    def _args(self, e, params, ctx: _Ctx) -> None:
        if len(e.args) != len(params):
            raise ParseError(f"expected {len(params)} argument(s), got {len(e.args)}",
                             e.line, e.col)
        new_args = []
        for a, (pt, _) in zip(e.args, params):
            a, t = self.expr(a, ctx)
            self._compatible(pt, t, a.line, a.col)
            new_args.append(a)
        e.args = new_args

    # -- types -----------------------------------------------------------

    def _expect(self, got: str, want: str, e: ast.Node) -> None:
        if got != want:
            raise ParseError(f"expected {want}, found {got}", e.line, e.col)

    def _compatible(self, want: str, got: str, line: int, col: int) -> None:
        if want == got or (got == "null" and want in self.classes):
            return
        raise ParseError(f"type mismatch: expected {want}, found {got}", line, col)


def _always_returns(s: ast.Stmt) -> bool:
    if isinstance(s, ast.Return):
        return True
    if isinstance(s, ast.Block):
        return any(_always_returns(x) for x in s.stmts)
    if isinstance(s, ast.If):
        return s.orelse is not None and _always_returns(s.then) and _always_returns(s.orelse)
    if isinstance(s, ast.While):
        return (isinstance(s.cond, ast.BoolLit) and s.cond.value
                and not _breaks_out(s.body))
    return False


def _breaks_out(s: ast.Stmt) -> bool:
    if isinstance(s, ast.Break):
        return True
    if isinstance(s, ast.While):
        return False
    return any(_breaks_out(c) for c in children(s) if not _is_expr(c))


def _is_expr(n: ast.Node) -> bool:
    return not isinstance(n, (ast.LocalDecl, ast.Assign, ast.If, ast.While, ast.Break,
                              ast.Continue, ast.Return, ast.ExprStmt, ast.Print, ast.Block))


def check(program: ast.Program) -> ast.Program:
    return Checker(program).run()
