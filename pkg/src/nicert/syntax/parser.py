"""Recursive-descent parser producing an unchecked :class:`Program`."""

from __future__ import annotations

import re

from . import ast
from .lexer import ParseError, Token, tokenize

_MODIFIERS = {"public", "private", "protected", "static", "final"}
_KEYWORDS = {
    "class", "if", "else", "while", "break", "continue", "return", "new",
    "true", "false", "null", "this", "void", "int", "boolean",
} | _MODIFIERS

_SET_LABEL = re.compile(r"setLabel\s*\(\s*([A-Za-z_][\w.]*)\s*,\s*([A-Za-z_]\w*)\s*\)")

_COMPOUND = {"+=": "+", "-=": "-", "*=": "*", "/=": "/", "%=": "%"}

# binary operator precedence levels, loosest first
_LEVELS = [("||",), ("&&",), ("==", "!="), ("<", ">", "<=", ">="), ("+", "-"), ("*", "/", "%")]


class Parser:
    def __init__(self, source: str):
        self.tokens = tokenize(source)
        self.pos = 0
        self.annotations: list[ast.Annotation] = []
        self.ctx_class: str | None = None
        self.ctx_method: str | None = None
        self.loop_depth = 0

    # -- token plumbing --------------------------------------------------

    def peek(self, offset: int = 0) -> Token:
        self._skip_annotations()
        i = self.pos
        seen = 0
        while True:
            tok = self.tokens[i]
            if tok.kind == "annot":
                i += 1
                continue
            if seen == offset or tok.kind == "eof":
                return tok
            seen += 1
            i += 1

    def _skip_annotations(self) -> None:
        while self.tokens[self.pos].kind == "annot":
            self._record(self.tokens[self.pos])
            self.pos += 1

    def _record(self, tok: Token) -> None:
        text = tok.text
        for m in _SET_LABEL.finditer(text):
            self.annotations.append(
                ast.Annotation(m.group(1), m.group(2), self.ctx_class, self.ctx_method,
                               tok.line, tok.col)
            )
        if text.count("setLabel") != len(_SET_LABEL.findall(text)):
            raise ParseError("malformed setLabel annotation", tok.line, tok.col)

    def advance(self) -> Token:
        self._skip_annotations()
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def at(self, text: str, offset: int = 0) -> bool:
        tok = self.peek(offset)
        return tok.kind in ("op", "id") and tok.text == text

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.advance()
            return True
        return False

    def expect(self, text: str) -> Token:
        tok = self.peek()
        if not (tok.kind in ("op", "id") and tok.text == text):
            raise ParseError(f"expected {text!r}, found {tok.text or 'end of input'!r}",
                             tok.line, tok.col)
        return self.advance()

    def ident(self) -> Token:
        tok = self.peek()
        if tok.kind != "id" or tok.text in _KEYWORDS:
            raise ParseError(f"expected identifier, found {tok.text or 'end of input'!r}",
                             tok.line, tok.col)
        return self.advance()

    def error(self, message: str, tok: Token | None = None) -> ParseError:
        tok = tok or self.peek()
        return ParseError(message, tok.line, tok.col)

    # -- declarations ----------------------------------------------------

    def program(self) -> ast.Program:
        classes = []
        while self.peek().kind != "eof":
            classes.append(self.class_decl())
        return ast.Program(classes, self.annotations)

    def modifiers(self) -> set[str]:
        mods = set()
        while self.peek().kind == "id" and self.peek().text in _MODIFIERS:
            mods.add(self.advance().text)
        return mods

    def class_decl(self) -> ast.ClassDecl:
        self.modifiers()
        start = self.expect("class")
        name = self.ident().text
        self.ctx_class = name
        decl = ast.ClassDecl(name, [], {}, line=start.line, col=start.col)
        self.expect("{")
        while not self.at("}"):
            if self.peek().kind == "eof":
                raise self.error("unterminated class body")
            self.member(decl)
        self.expect("}")
        self.ctx_class = None
        return decl

    def type_name(self) -> str:
        tok = self.peek()
        if tok.kind == "id" and tok.text in ("int", "boolean"):
            return self.advance().text
        return self.ident().text

    def member(self, decl: ast.ClassDecl) -> None:
        mods = self.modifiers()
        static = "static" in mods
        tok = self.peek()
        if tok.kind == "id" and tok.text == decl.name and self.at("(", 1):
            self.advance()
            if decl.ctor is not None:
                raise self.error("duplicate constructor", tok)
            self.ctx_method = "<init>"
            params = self.params()
            body = self.block()
            self.ctx_method = None
            decl.ctor = ast.MethodDecl("<init>", decl.name, params, "void", False, body,
                                       is_ctor=True, line=tok.line, col=tok.col)
            return
        if self.at("void"):
            self.advance()
            ret = "void"
        else:
            ret = self.type_name()
        name_tok = self.ident()
        if self.at("("):
            if name_tok.text in decl.methods:
                raise self.error(f"duplicate method {name_tok.text!r}", name_tok)
            self.ctx_method = name_tok.text
            params = self.params()
            body = self.block()
            self.ctx_method = None
            decl.methods[name_tok.text] = ast.MethodDecl(
                name_tok.text, decl.name, params, ret, static, body,
                line=name_tok.line, col=name_tok.col)
            return
        if ret == "void":
            raise self.error("field cannot have type void", name_tok)
        while True:
            init = self.expr() if self.accept("=") else None
            if any(f.name == name_tok.text for f in decl.fields):
                raise self.error(f"duplicate field {name_tok.text!r}", name_tok)
            decl.fields.append(ast.FieldDecl(name_tok.text, ret, static, init,
                                             name_tok.line, name_tok.col))
            if not self.accept(","):
                break
            name_tok = self.ident()
        self.expect(";")

    def params(self) -> list[tuple[str, str]]:
        self.expect("(")
        params: list[tuple[str, str]] = []
        if not self.at(")"):
            while True:
                t = self.type_name()
                n = self.ident()
                if any(p == n.text for _, p in params):
                    raise self.error(f"duplicate parameter {n.text!r}", n)
                params.append((t, n.text))
                if not self.accept(","):
                    break
        self.expect(")")
        return params

    # -- statements ------------------------------------------------------

    def block(self) -> ast.Block:
        start = self.expect("{")
        stmts: list[ast.Stmt] = []
        while not self.at("}"):
            if self.peek().kind == "eof":
                raise self.error("unterminated block")
            stmts.extend(self.stmt_list())
        self.expect("}")
        return ast.Block(stmts, line=start.line, col=start.col)

    def _is_decl_start(self) -> bool:
        tok = self.peek()
        if tok.kind != "id":
            return False
        if tok.text in ("int", "boolean"):
            return True
        nxt = self.peek(1)
        return tok.text not in _KEYWORDS and nxt.kind == "id" and nxt.text not in _KEYWORDS

    def stmt_list(self) -> list[ast.Stmt]:
        """One source statement; declarations with several declarators expand."""
        if self._is_decl_start():
            tok = self.peek()
            t = self.type_name()
            out = []
            while True:
                n = self.ident()
                init = self.expr() if self.accept("=") else None
                out.append(ast.LocalDecl(t, n.text, init, line=n.line, col=n.col))
                if not self.accept(","):
                    break
            self.expect(";")
            return out
        return [self.stmt()]

    def stmt(self) -> ast.Stmt:
        tok = self.peek()
        pos = dict(line=tok.line, col=tok.col)
        if self.at("{"):
            return self.block()
        if self.accept(";"):
            return ast.Block([], **pos)
        if self._is_decl_start():
            raise self.error("declaration not allowed here")
        if self.accept("if"):
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            then = self.stmt()
            orelse = self.stmt() if self.accept("else") else None
            return ast.If(cond, then, orelse, **pos)
        if self.accept("while"):
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            self.loop_depth += 1
            body = self.stmt()
            self.loop_depth -= 1
            return ast.While(cond, body, **pos)
        if self.accept("break"):
            if not self.loop_depth:
                raise ParseError("break outside loop", tok.line, tok.col)
            self.expect(";")
            return ast.Break(**pos)
        if self.accept("continue"):
            if not self.loop_depth:
                raise ParseError("continue outside loop", tok.line, tok.col)
            self.expect(";")
            return ast.Continue(**pos)
        if self.accept("return"):
            value = None if self.at(";") else self.expr()
            self.expect(";")
            return ast.Return(value, **pos)
        if (self.at("System") and self.at(".", 1) and self.at("out", 2) and self.at(".", 3)
                and self.at("println", 4)):
            for _ in range(5):
                self.advance()
            self.expect("(")
            e = self.expr()
            self.expect(")")
            self.expect(";")
            return ast.Print(e, **pos)
        s = self.simple()
        self.expect(";")
        return s

    def simple(self) -> ast.Stmt:
        tok = self.peek()
        pos = dict(line=tok.line, col=tok.col)
        if self.at("++") or self.at("--"):
            op = self.advance().text
            target = self.lvalue(self.postfix())
            return self._bump(target, op, pos)
        e = self.expr()
        if self.at("=") or self.peek().text in _COMPOUND:
            op = self.advance().text
            target = self.lvalue(e)
            value = self.expr()
            if op != "=":
                value = ast.Binary(_COMPOUND[op], _copy_lvalue(target), value, **pos)
            return ast.Assign(target, value, **pos)
        if self.at("++") or self.at("--"):
            op = self.advance().text
            return self._bump(self.lvalue(e), op, pos)
        if not isinstance(e, (ast.Call, ast.New)):
            raise ParseError("not a statement", tok.line, tok.col)
        return ast.ExprStmt(e, **pos)

    def _bump(self, target: ast.Expr, op: str, pos: dict) -> ast.Assign:
        delta = ast.IntLit(1, **pos)
        value = ast.Binary("+" if op == "++" else "-", _copy_lvalue(target), delta, **pos)
        return ast.Assign(target, value, **pos)

    def lvalue(self, e: ast.Expr) -> ast.Expr:
        if not isinstance(e, (ast.Name, ast.FieldAccess)):
            raise ParseError("invalid assignment target", e.line, e.col)
        return e

    # -- expressions -----------------------------------------------------

    def expr(self, level: int = 0) -> ast.Expr:
        if level == len(_LEVELS):
            return self.unary()
        left = self.expr(level + 1)
        while self.peek().kind == "op" and self.peek().text in _LEVELS[level]:
            tok = self.advance()
            right = self.expr(level + 1)
            left = ast.Binary(tok.text, left, right, line=tok.line, col=tok.col)
        return left

    def unary(self) -> ast.Expr:
        tok = self.peek()
        if tok.kind == "op" and tok.text in ("-", "!"):
            self.advance()
            operand = self.unary()
            if tok.text == "-" and isinstance(operand, ast.IntLit) and operand.value >= 0:
                return ast.IntLit(-operand.value, line=tok.line, col=tok.col)
            return ast.Unary(tok.text, operand, line=tok.line, col=tok.col)
        return self.postfix()

    def postfix(self) -> ast.Expr:
        e = self.primary()
        while self.at("."):
            self.advance()
            name = self.ident()
            if self.at("("):
                args = self.args()
                # a Name receiver may turn out to be a class (static call); resolved later
                e = ast.Call(e, None, name.text, args, line=name.line, col=name.col)
            else:
                e = ast.FieldAccess(e, name.text, line=name.line, col=name.col)
        return e

    def args(self) -> list[ast.Expr]:
        self.expect("(")
        args: list[ast.Expr] = []
        if not self.at(")"):
            while True:
                args.append(self.expr())
                if not self.accept(","):
                    break
        self.expect(")")
        return args

    def primary(self) -> ast.Expr:
        tok = self.peek()
        pos = dict(line=tok.line, col=tok.col)
        if tok.kind == "int":
            self.advance()
            return ast.IntLit(int(tok.text), **pos)
        if self.accept("true"):
            return ast.BoolLit(True, **pos)
        if self.accept("false"):
            return ast.BoolLit(False, **pos)
        if self.accept("null"):
            return ast.NullLit(**pos)
        if self.accept("this"):
            return ast.This(**pos)
        if self.accept("new"):
            cls = self.ident().text
            return ast.New(cls, self.args(), **pos)
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return e
        if tok.kind == "id" and tok.text not in _KEYWORDS:
            self.advance()
            if self.at("("):
                return ast.Call(None, None, tok.text, self.args(), **pos)
            return ast.Name(tok.text, **pos)
        raise ParseError(f"unexpected {tok.text or 'end of input'!r}", tok.line, tok.col)


def _copy_lvalue(e: ast.Expr) -> ast.Expr:
    """Fresh node for the read half of a compound assignment."""
    if isinstance(e, ast.Name):
        return ast.Name(e.name, line=e.line, col=e.col)
    if isinstance(e, ast.FieldAccess):
        return ast.FieldAccess(_copy_lvalue(e.obj), e.name, line=e.line, col=e.col)
    if isinstance(e, ast.This):
        return ast.This(line=e.line, col=e.col)
    raise ParseError("compound assignment target must be a variable or field", e.line, e.col)


def parse_unchecked(source: str) -> ast.Program:
    return Parser(source).program()
