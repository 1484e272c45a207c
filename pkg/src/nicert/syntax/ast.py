"""AST for the mini Java-like language.

Nodes compare by identity. Every expression and statement receives a
program-point id (``nid``) once the program has been checked; the machines
refer to nodes only through these ids.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union


@dataclass(eq=False)
class Node:
    line: int = field(default=0, kw_only=True)
    col: int = field(default=0, kw_only=True)
    nid: int = field(default=-1, kw_only=True)


# -- expressions -------------------------------------------------------------


@dataclass(eq=False)
class IntLit(Node):
    value: int


@dataclass(eq=False)
class BoolLit(Node):
    value: bool


@dataclass(eq=False)
class NullLit(Node):
    pass


@dataclass(eq=False)
class This(Node):
    pass


@dataclass(eq=False)
class Name(Node):
    """Unresolved identifier; replaced during checking."""

    name: str


@dataclass(eq=False)
class Local(Node):
    name: str


@dataclass(eq=False)
class Static(Node):
    name: str


@dataclass(eq=False)
class FieldAccess(Node):
    obj: "Expr"
    name: str
    # filled in by the checker
    klass: Optional[str] = None
    index: int = -1


@dataclass(eq=False)
class Binary(Node):
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(eq=False)
class Unary(Node):
    op: str
    operand: "Expr"


@dataclass(eq=False)
class Call(Node):
    receiver: Optional["Expr"]
    qualifier: Optional[str]
    name: str
    args: list["Expr"]
    method: Optional["MethodDecl"] = None


@dataclass(eq=False)
class New(Node):
    klass: str
    args: list["Expr"]
    ctor: Optional["MethodDecl"] = None


Expr = Union[IntLit, BoolLit, NullLit, This, Name, Local, Static, FieldAccess,
             Binary, Unary, Call, New]


# -- statements --------------------------------------------------------------


@dataclass(eq=False)
class LocalDecl(Node):
    type: str
    name: str
    init: Optional[Expr]


@dataclass(eq=False)
class Assign(Node):
    target: Expr
    value: Expr


@dataclass(eq=False)
class If(Node):
    cond: Expr
    then: "Stmt"
    orelse: Optional["Stmt"]


@dataclass(eq=False)
class While(Node):
    cond: Expr
    body: "Stmt"


@dataclass(eq=False)
class Break(Node):
    pass


@dataclass(eq=False)
class Continue(Node):
    pass


@dataclass(eq=False)
class Return(Node):
    value: Optional[Expr]


@dataclass(eq=False)
class ExprStmt(Node):
    expr: Expr


@dataclass(eq=False)
class Print(Node):
    expr: Expr


@dataclass(eq=False)
class Block(Node):
    stmts: list["Stmt"]


Stmt = Union[LocalDecl, Assign, If, While, Break, Continue, Return, ExprStmt,
             Print, Block]


# -- declarations ------------------------------------------------------------


@dataclass(eq=False)
class FieldDecl:
    name: str
    type: str
    static: bool
    init: Optional[Expr]
    line: int = 0
    col: int = 0


@dataclass(eq=False)
class MethodDecl:
    name: str
    klass: str
    params: list[tuple[str, str]]
    ret: str
    static: bool
    body: Block
    is_ctor: bool = False
    line: int = 0
    col: int = 0

    @property
    def qualname(self) -> str:
        return f"{self.klass}.{self.name}"


@dataclass(eq=False)
class ClassDecl:
    name: str
    fields: list[FieldDecl]
    methods: dict[str, MethodDecl]
    ctor: Optional[MethodDecl] = None
    line: int = 0
    col: int = 0
    # synthesized by the checker: field initializers followed by the ctor body
    init: Optional[MethodDecl] = None

    @property
    def instance_fields(self) -> list[FieldDecl]:
        return [f for f in self.fields if not f.static]

    @property
    def static_fields(self) -> list[FieldDecl]:
        return [f for f in self.fields if f.static]

    def field_index(self, name: str) -> int:
        for i, f in enumerate(self.instance_fields):
            if f.name == name:
                return i
        return -1


@dataclass(frozen=True)
class Annotation:
    """A ``setLabel(path, Label)`` clause as written in the source."""

    path: str
    label: str
    klass: Optional[str]
    method: Optional[str]
    line: int
    col: int


@dataclass(eq=False)
class Program:
    classes: list[ClassDecl]
    annotations: list[Annotation] = field(default_factory=list)
    # filled in by the checker
    main: Optional[MethodDecl] = None
    statics: list[tuple[str, FieldDecl, str]] = field(default_factory=list)
    clinit: list[Stmt] = field(default_factory=list)
    nodes: list[Node] = field(default_factory=list)

    @property
    def inputs(self) -> list[tuple[str, str]]:
        """Declared inputs as ``(name, type)``: the parameters of ``main``."""
        return [(n, t) for t, n in self.main.params] if self.main else []

    def klass(self, name: str) -> ClassDecl:
        for c in self.classes:
            if c.name == name:
                return c
        raise KeyError(name)

    def has_class(self, name: str) -> bool:
        return any(c.name == name for c in self.classes)

    def static_index(self, name: str) -> int:
        for i, (n, _, _) in enumerate(self.statics):
            if n == name:
                return i
        raise KeyError(name)

    def node(self, nid: int) -> Node:
        return self.nodes[nid]


SCALAR_TYPES = ("int", "boolean")


def default_value(type_name: str):
    if type_name == "int":
        return 0
    if type_name == "boolean":
        return False
    return None  # callers map this to the null reference
