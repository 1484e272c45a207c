"""Big-step recursive evaluator used as an independent reference.

It walks the checked AST directly with Python recursion and exceptions for
abrupt completion, sharing nothing with the continuation machines beyond
the AST itself.
"""

from __future__ import annotations

from nicert.syntax import ast


class Fault(Exception):
    pass


class _Break(Exception):
    pass


class _Continue(Exception):
    pass


class _Return(Exception):
    def __init__(self, value):
        self.value = value


class Obj:
    def __init__(self, klass: str, fields: dict):
        self.klass = klass
        self.fields = fields


_UNSET = object()


def _trunc_div(a: int, b: int) -> int:
    if b == 0:
        raise Fault("division by zero")
    q = abs(a) // abs(b)
    return -q if (a < 0) != (b < 0) else q


def _default(t: str):
    return {"int": 0, "boolean": False}.get(t)


class DirectEvaluator:
    def __init__(self, program: ast.Program, fuel: int = 10**6):
        self.p = program
        self.statics = {name: _default(f.type) for name, f, _ in program.statics}
        self.out: list = []
        self.fuel = fuel

    def tick(self) -> None:
        self.fuel -= 1
        if self.fuel < 0:
            raise Fault("out of fuel")

    def run(self, inputs: dict):
        for s in self.p.clinit:
            self.stmt(s, {})
        env = dict(inputs)
        try:
            self.stmt(self.p.main.body, env)
        except _Return:
            pass
        return self.observe(), list(self.out)

    def observe(self) -> dict:
        values: dict = {}

        def visit(path, v, on_path):
            if isinstance(v, Obj):
                values[path] = f"<{v.klass}>"
                if id(v) in on_path:
                    return
                for name, fv in v.fields.items():
                    visit(f"{path}.{name}", fv, on_path | {id(v)})
            elif v is None:
                values[path] = "null"
            else:
                values[path] = v

        for name, _, _ in self.p.statics:
            visit(name, self.statics[name], frozenset())
        return values

    # statements

    def stmt(self, s, env: dict) -> None:
        self.tick()
        if isinstance(s, ast.Block):
            for x in s.stmts:
                self.stmt(x, env)
        elif isinstance(s, ast.LocalDecl):
            env[s.name] = _UNSET if s.init is None else self.expr(s.init, env)
        elif isinstance(s, ast.Assign):
            t = s.target
            if isinstance(t, ast.FieldAccess):
                obj = self.expr(t.obj, env)
                v = self.expr(s.value, env)
                if obj is None:
                    raise Fault("null dereference")
                obj.fields[t.name] = v
            else:
                v = self.expr(s.value, env)
                if isinstance(t, ast.Static):
                    self.statics[t.name] = v
                else:
                    env[t.name] = v
        elif isinstance(s, ast.If):
            if self.expr(s.cond, env):
                self.stmt(s.then, env)
            elif s.orelse is not None:
                self.stmt(s.orelse, env)
        elif isinstance(s, ast.While):
            while self.expr(s.cond, env):
                try:
                    self.stmt(s.body, env)
                except _Break:
                    break
                except _Continue:
                    continue
        elif isinstance(s, ast.Break):
            raise _Break()
        elif isinstance(s, ast.Continue):
            raise _Continue()
        elif isinstance(s, ast.Return):
            raise _Return(None if s.value is None else self.expr(s.value, env))
        elif isinstance(s, ast.ExprStmt):
            self.expr(s.expr, env)
        elif isinstance(s, ast.Print):
            self.out.append(self.expr(s.expr, env))
        else:
            raise TypeError(type(s))

    # expressions

    def expr(self, e, env: dict):
        self.tick()
        if isinstance(e, (ast.IntLit, ast.BoolLit)):
            return e.value
        if isinstance(e, ast.NullLit):
            return None
        if isinstance(e, ast.This):
            return env["this"]
        if isinstance(e, ast.Local):
            v = env[e.name]
            if v is _UNSET:
                raise Fault("uninitialized")
            return v
        if isinstance(e, ast.Static):
            return self.statics[e.name]
        if isinstance(e, ast.FieldAccess):
            obj = self.expr(e.obj, env)
            if obj is None:
                raise Fault("null dereference")
            return obj.fields[e.name]
        if isinstance(e, ast.Unary):
            v = self.expr(e.operand, env)
            return -v if e.op == "-" else not v
        if isinstance(e, ast.Binary):
            a = self.expr(e.left, env)
            b = self.expr(e.right, env)
            op = e.op
            if op == "/":
                return _trunc_div(a, b)
            if op == "%":
                return a - _trunc_div(a, b) * b
            if op == "&&":
                return a and b
            if op == "||":
                return a or b
            return {
                "+": lambda: a + b, "-": lambda: a - b, "*": lambda: a * b,
                "<": lambda: a < b, ">": lambda: a > b, "<=": lambda: a <= b,
                ">=": lambda: a >= b, "==": lambda: a == b, "!=": lambda: a != b,
            }[op]()
        if isinstance(e, ast.Call):
            this = None
            if e.receiver is not None:
                this = self.expr(e.receiver, env)
            args = [self.expr(a, env) for a in e.args]
            if e.receiver is not None and this is None:
                raise Fault("null dereference")
            return self.invoke(e.method, this, args)
        if isinstance(e, ast.New):
            args = [self.expr(a, env) for a in e.args]
            klass = self.p.klass(e.klass)
            obj = Obj(klass.name, {f.name: _default(f.type) for f in klass.instance_fields})
            self.invoke(klass.init, obj, args)
            return obj
        raise TypeError(type(e))

    def invoke(self, m: ast.MethodDecl, this, args):
        env = {name: v for (_, name), v in zip(m.params, args)}
        if this is not None:
            env["this"] = this
        try:
            self.stmt(m.body, env)
        except _Return as r:
            return r.value
        return None


def direct_run(program: ast.Program, inputs: dict, fuel: int = 10**6):
    """``(values by path, output list)`` of a complete run."""
    return DirectEvaluator(program, fuel).run(inputs)
