"""Source rendering of checked programs and a structural dump for comparisons."""

from __future__ import annotations

from . import ast


def pretty(program: ast.Program) -> str:
    out: list[str] = []
    for a in program.annotations:
        if a.klass is None:
            out.append(f"//@ setLabel({a.path}, {a.label});")
    for c in program.classes:
        out.extend(_class(program, c))
    return "\n".join(out) + "\n"


def _annots(program: ast.Program, klass: str, method: str | None) -> list[str]:
    return [f"//@ setLabel({a.path}, {a.label});" for a in program.annotations
            if a.klass == klass and a.method == method]


def _class(program: ast.Program, c: ast.ClassDecl) -> list[str]:
    lines = [f"class {c.name} {{"]
    for f in c.fields:
        init = f" = {expr(f.init, c.name)}" if f.init is not None else ""
        lines.append(f"  {'static ' if f.static else ''}{f.type} {f.name}{init};")
    for a in _annots(program, c.name, None):
        lines.append("  " + a)
    if c.ctor is not None:
        params = ", ".join(f"{t} {n}" for t, n in c.ctor.params)
        lines.append(f"  {c.name}({params}) {{")
        lines.extend(_annot_lines(program, c.name, "<init>", 2))
        for s in c.ctor.body.stmts:
            lines.extend(stmt(s, 2, c.name))
        lines.append("  }")
    for m in c.methods.values():
        params = ", ".join(f"{t} {n}" for t, n in m.params)
        lines.append(f"  {'static ' if m.static else ''}{m.ret} {m.name}({params}) {{")
        lines.extend(_annot_lines(program, c.name, m.name, 2))
        for s in m.body.stmts:
            lines.extend(stmt(s, 2, c.name))
        lines.append("  }")
    lines.append("}")
    return lines


def _annot_lines(program, klass, method, depth):
    return ["  " * depth + a for a in _annots(program, klass, method)]


def stmt(s: ast.Stmt, depth: int, klass: str = "") -> list[str]:
    pad = "  " * depth
    if isinstance(s, ast.Block):
        return [pad + "{"] + [l for x in s.stmts for l in stmt(x, depth + 1, klass)] + [pad + "}"]
    if isinstance(s, ast.LocalDecl):
        init = f" = {expr(s.init, klass)}" if s.init is not None else ""
        return [f"{pad}{s.type} {s.name}{init};"]
    if isinstance(s, ast.Assign):
        return [f"{pad}{expr(s.target, klass)} = {expr(s.value, klass)};"]
    if isinstance(s, ast.If):
        lines = [f"{pad}if ({expr(s.cond, klass)})"] + stmt(s.then, depth + 1, klass)
        if s.orelse is not None:
            lines += [pad + "else"] + stmt(s.orelse, depth + 1, klass)
        return lines
    if isinstance(s, ast.While):
        return [f"{pad}while ({expr(s.cond, klass)})"] + stmt(s.body, depth + 1, klass)
    if isinstance(s, ast.Break):
        return [pad + "break;"]
    if isinstance(s, ast.Continue):
        return [pad + "continue;"]
    if isinstance(s, ast.Return):
        if s.value is None:
            return [pad + "return;"]
        return [f"{pad}return {expr(s.value, klass)};"]
    if isinstance(s, ast.ExprStmt):
        return [f"{pad}{expr(s.expr, klass)};"]
    if isinstance(s, ast.Print):
        return [f"{pad}System.out.println({expr(s.expr, klass)});"]
    raise TypeError(type(s).__name__)


def expr(e: ast.Expr, klass: str = "") -> str:
    if isinstance(e, ast.IntLit):
        return str(e.value)
    if isinstance(e, ast.BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, ast.NullLit):
        return "null"
    if isinstance(e, ast.This):
        return "this"
    if isinstance(e, (ast.Name, ast.Local, ast.Static)):
        return e.name
    if isinstance(e, ast.FieldAccess):
        return f"{_operand(e.obj, klass)}.{e.name}"
    if isinstance(e, ast.Binary):
        return f"{_operand(e.left, klass)} {e.op} {_operand(e.right, klass)}"
    if isinstance(e, ast.Unary):
        return f"{e.op}{_operand(e.operand, klass)}"
    if isinstance(e, ast.Call):
        args = ", ".join(expr(a, klass) for a in e.args)
        if e.receiver is not None:
            return f"{_operand(e.receiver, klass)}.{e.name}({args})"
        if e.qualifier is not None:
            return f"{e.qualifier}.{e.name}({args})"
        return f"{e.name}({args})"
    if isinstance(e, ast.New):
        args = ", ".join(expr(a, klass) for a in e.args)
        return f"new {e.klass}({args})"
    raise TypeError(type(e).__name__)


def _operand(e: ast.Expr, klass: str) -> str:
    text = expr(e, klass)
    if isinstance(e, (ast.Binary, ast.Unary)) or (isinstance(e, ast.IntLit) and e.value < 0):
        return f"({text})"
    return text


def dump(node) -> tuple:
    """Structural tuple of a node, ignoring positions and ids."""
    if isinstance(node, list):
        return tuple(dump(x) for x in node)
    if not isinstance(node, ast.Node):
        return node
    items = [type(node).__name__]
    for name, value in vars(node).items():
        if name in ("line", "col", "nid", "method", "ctor"):
            continue
        items.append((name, dump(value)))
    if isinstance(node, ast.Call) and node.method is not None:
        items.append(("method", node.method.qualname))
    return tuple(items)


def dump_program(program: ast.Program) -> tuple:
    classes = []
    for c in program.classes:
        fields = tuple((f.name, f.type, f.static, dump(f.init)) for f in c.fields)
        methods = tuple((m.name, tuple(m.params), m.ret, m.static, dump(m.body))
                        for m in c.methods.values())
        ctor = None if c.ctor is None else (tuple(c.ctor.params), dump(c.ctor.body))
        classes.append((c.name, fields, ctor, methods))
    annots = tuple(sorted((a.path, a.label, a.klass or "", a.method or "")
                          for a in program.annotations))
    return tuple(classes), annots
