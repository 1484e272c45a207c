"""Grammar, parser, AST and policy extraction for the ``.njava`` language."""

from __future__ import annotations

import hashlib
from pathlib import Path

from . import ast
from .check import check, children, walk
from .lexer import ParseError
from .policy import NIPolicy, PolicyError, extract_policy
from .pretty import dump, dump_program, pretty

__all__ = [
    "NIPolicy", "ParseError", "PolicyError", "ast", "contains_abrupt", "dump", "dump_program",
    "extract_policy", "load", "parse", "pretty", "program_sha256", "walk",
]


def parse(source: str) -> ast.Program:
    """Parse and statically check a program."""
    from .parser import parse_unchecked

    return check(parse_unchecked(source))


def load(path: str | Path) -> tuple[ast.Program, NIPolicy]:
    program = parse(Path(path).read_text(encoding="utf-8"))
    return program, extract_policy(program)


def program_sha256(program: ast.Program) -> str:
    return hashlib.sha256(pretty(program).encode()).hexdigest()


def contains_abrupt(branch: ast.Stmt, shield_ifs: bool = False) -> bool:
    """Whether control can leave ``branch`` abruptly, skipping the code after
    the conditional it belongs to.

    ``return`` always escapes. ``break``/``continue`` escape unless an inner
    ``while`` inside the branch captures them. Inner ``if`` statements do
    not shield: a break guarded by a Low test nested inside a High-guarded
    branch still makes the outer conditional's context escape.

    ``shield_ifs=True`` gives the narrower reading in which an inner ``if``
    hides the abrupt statement. That reading loses implicit flows and is
    kept only so tests can demonstrate the leak.
    """
    if isinstance(branch, (ast.Break, ast.Continue, ast.Return)):
        return True
    if isinstance(branch, ast.While):
        return any(isinstance(n, ast.Return) for n in walk(branch.body))
    if isinstance(branch, ast.If):
        if shield_ifs:
            return False
        return contains_abrupt(branch.then) or (
            branch.orelse is not None and contains_abrupt(branch.orelse))
    if isinstance(branch, ast.Block):
        return any(contains_abrupt(s, shield_ifs) for s in branch.stmts)
    return False
