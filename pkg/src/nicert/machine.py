"""Vocabulary shared by the continuation machines.

A continuation ``k`` is a tuple of items with the top at the end. Items are
small tuples: a tag followed by a program-point id (or a label for
``RESTORE``). Stores and heaps are tuples indexed by location and object id,
so configurations are immutable and hashable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, NamedTuple

from .syntax import ast

# items that carry a program point
EXEC = "x"        # execute statement
EVAL = "e"        # evaluate expression
BIN = "bin"       # apply binary operator to the two top values
UN = "un"         # apply unary operator
FIELD = "fld"     # read field of the reference on top
ASSIGN = "asg"    # store top value into a local/static
FASSIGN = "fasg"  # store top value into a field of the reference below it
DECL = "decl"     # bind a new local to the top value
IF = "if"         # choose a branch on the top value
WHILE = "while"   # loop head: re-evaluate the guard
LOOP = "loop"     # choose loop body or exit on the top value
CALL = "call"     # invoke a method on the popped arguments
NEW = "new"       # allocate an object and run its initializer
RET = "ret"       # return the top value
PRINT = "print"   # output the top value
# items without a program point
POPL = "popl"     # pop the loop stack
POP = "pop"       # discard the top value
VRET = "vret"     # return without a value
MAIN = "main"     # enter main with the inputs bound
RESTORE = "rst"   # restore the context label (instrumented machine only)

TAGS_WITH_NID = (EXEC, EVAL, BIN, UN, FIELD, ASSIGN, FASSIGN, DECL, IF, WHILE, LOOP, CALL,
                 NEW, RET, PRINT)
TAGS_PLAIN = (POPL, POP, VRET, MAIN)

BRANCH_RULES = ("if-then", "if-else", "loop-enter", "loop-exit")

RULES = (
    # statements
    "block", "decl", "decl-uninit", "assign", "field-assign", "if", "if-abrupt", "while",
    "break", "continue", "return", "return-void", "expr-stmt", "println",
    # expressions
    "const", "read", "this", "field", "binop", "unop", "call", "new",
    # continuations
    "binop-apply", "unop-apply", "field-read", "store", "field-store", "bind",
    "if-then", "if-else", "loop-unfold", "loop-enter", "loop-exit", "loop-pop", "restore",
    "invoke", "construct", "return-apply", "implicit-return", "println-apply", "discard",
    "main",
)


class RuntimeFault(Exception):
    """Division by zero, null dereference or read of an uninitialized local."""


class StepLimitExceeded(RuntimeError):
    pass


class Ref(NamedTuple):
    oid: int

    def __repr__(self) -> str:
        return "null" if self.oid < 0 else f"@{self.oid}"


NULL = Ref(-1)


class _Marker:
    __slots__ = ("name",)

    def __init__(self, name: str):
        self.name = name

    def __repr__(self) -> str:
        return self.name

    def __reduce__(self):
        return self.name


UNINIT = _Marker("UNINIT")
VOID = _Marker("VOID")


class Frame(NamedTuple):
    k: tuple
    vals: tuple
    env: tuple
    lstack: tuple
    cl: Any          # caller's context label; None in the concrete machine
    result: Any      # value delivered on return instead of the callee's (constructors)


class LoopEntry(NamedTuple):
    nid: int
    exit: int        # continuation length after the loop
    head: int        # continuation length with the loop head on top


def env_get(env: tuple, name: str) -> int:
    for n, loc in env:
        if n == name:
            return loc
    raise KeyError(name)


def env_set(env: tuple, name: str, loc: int) -> tuple:
    items = [(n, l) for n, l in env if n != name]
    items.append((name, loc))
    items.sort()
    return tuple(items)


def default_for(type_name: str):
    v = ast.default_value(type_name)
    return NULL if v is None else v


def java_div(a: int, b: int) -> int:
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


def java_mod(a: int, b: int) -> int:
    return a - java_div(a, b) * b


def apply_binary(op: str, a, b):
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        if b == 0:
            raise RuntimeFault("division by zero")
        return java_div(a, b)
    if op == "%":
        if b == 0:
            raise RuntimeFault("division by zero")
        return java_mod(a, b)
    if op == "<":
        return a < b
    if op == ">":
        return a > b
    if op == "<=":
        return a <= b
    if op == ">=":
        return a >= b
    if op == "==":
        return a == b
    if op == "!=":
        return a != b
    if op == "&&":
        return a and b
    if op == "||":
        return a or b
    raise ValueError(op)


def apply_unary(op: str, a):
    return -a if op == "-" else (not a)


# -- observable states -------------------------------------------------------


@dataclass(frozen=True)
class ObservedState:
    """Variables visible to an observer, keyed by path.

    ``keys`` maps each path to its policy key so a policy can label it;
    ``output`` is the printed sequence (empty for initial states).
    """

    values: dict[str, Any]
    keys: dict[str, str]
    output: tuple = ()
    labels: dict[str, Any] = field(default_factory=dict)


def project(program: ast.Program, cell_value, cell_label, store: tuple, heap: tuple):
    """Walk static roots and reachable instance fields.

    Returns ``(values, keys, labels)`` keyed by path. An object is not
    re-entered along the path that reached it, so cyclic structures yield
    finite paths while aliased objects appear under every root.
    """
    values: dict[str, Any] = {}
    keys: dict[str, str] = {}
    labels: dict[str, Any] = {}

    def visit(path: str, key: str, cell, on_path: frozenset) -> None:
        v = cell_value(cell)
        values[path] = v
        keys[path] = key
        labels[path] = cell_label(cell)
        if isinstance(v, Ref):
            if v.oid < 0:
                values[path] = "null"
                return
            cls, cells = heap[v.oid]
            values[path] = f"<{cls}>"
            if v.oid in on_path:
                return
            inner = on_path | {v.oid}
            for f, c in zip(program.klass(cls).instance_fields, cells):
                visit(f"{path}.{f.name}", f"{cls}.{f.name}", c, inner)

    for i, (name, _, _) in enumerate(program.statics):
        visit(name, name, store[i], frozenset())
    return values, keys, labels
