"""Certificates of abstract exploration and their independent checker.

Three kinds share a four-line header::

    version 1
    kind full|rules|labels
    program-sha256 <hex>
    policy-sha256 <hex>

``full`` lists every state (``N<id> <state>``, the initial state being
``N0``) and every edge (``E <src> <rule> <dst>``). The reduced kinds start
from the initial state determined by the hashed program and policy.
``rules`` numbers only the initial state and the targets of branching steps; from each such node ``u`` the checker replays
deterministic steps until it reaches a branch (``R <u> <rule> <v>`` per
outcome), a final state (``F <u>``) or a stuck state (``S <u>``). ``labels``
keeps only the branching rule names, in the same order.

The checker never searches. It walks the certificate, re-deriving each
recorded step with the abstract successor function, and stops as soon as a
demanded step is absent.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import NamedTuple

from .abstract import (
    AbstractMachine, AbstractState, ReachGraph, serialize_state,
)
from .machine import BRANCH_RULES, RULES
from .syntax import ast, program_sha256
from .syntax.policy import NIPolicy

FORMAT_VERSION = "1"
CHAIN_LIMIT = 10**6


class CertificateKind(enum.Enum):
    FULL = "full"
    RULES = "rules"
    LABELS = "labels"


class Reason(str, enum.Enum):
    HASH_MISMATCH = "hash mismatch"
    UNKNOWN_VERSION = "unknown version"
    MALFORMED = "malformed"
    INVALID_STEP = "invalid step"
    MISSING_SUCCESSOR = "missing successor"
    FINAL_STATE_VIOLATION = "final-state violation"

    def __str__(self) -> str:
        return self.value


class CheckResult(NamedTuple):
    accepted: bool
    reason: Reason | None = None
    detail: str = ""

    def __str__(self) -> str:
        if self.accepted:
            return "Accept"
        return f"Reject({self.reason}{': ' + self.detail if self.detail else ''})"


ACCEPT = CheckResult(True)


@dataclass(frozen=True)
class Certificate:
    kind: CertificateKind
    program_sha256: str
    policy_sha256: str
    body: tuple[str, ...]
    version: str = FORMAT_VERSION

    def text(self) -> str:
        head = [f"version {self.version}", f"kind {self.kind.value}",
                f"program-sha256 {self.program_sha256}", f"policy-sha256 {self.policy_sha256}"]
        return "".join(line + "\n" for line in head + list(self.body))

    def size(self) -> int:
        return len(self.text().encode())


class MalformedCertificate(ValueError):
    def __init__(self, reason: Reason, detail: str):
        self.reason = reason
        super().__init__(detail)


_HEADER = re.compile(
    r"version (\S+)\nkind (\S+)\nprogram-sha256 ([0-9a-f]{64})\npolicy-sha256 ([0-9a-f]{64})\n")


def parse_certificate(text: str) -> Certificate:
    m = _HEADER.match(text)
    if m is None:
        if text.startswith("version ") and not text.startswith(f"version {FORMAT_VERSION}\n"):
            raise MalformedCertificate(Reason.UNKNOWN_VERSION, text.split("\n", 1)[0])
        raise MalformedCertificate(Reason.MALFORMED, "bad header")
    version, kind, prog, pol = m.groups()
    if version != FORMAT_VERSION:
        raise MalformedCertificate(Reason.UNKNOWN_VERSION, f"version {version}")
    try:
        k = CertificateKind(kind)
    except ValueError:
        raise MalformedCertificate(Reason.MALFORMED, f"unknown kind {kind!r}") from None
    rest = text[m.end():]
    if rest and not rest.endswith("\n"):
        raise MalformedCertificate(Reason.MALFORMED, "missing final newline")
    body = tuple(rest.split("\n")[:-1]) if rest else ()
    return Certificate(k, prog, pol, body, version)


# -- emission ----------------------------------------------------------------


def _chain_in_graph(g: ReachGraph, out: dict, finals: set, i: int) -> tuple[str, list]:
    for _ in range(len(g.nodes) + 1):
        edges = out.get(i, [])
        if not edges:
            return ("final" if i in finals else "stuck"), []
        if edges[0][0] in BRANCH_RULES:
            return "branch", edges
        i = edges[0][1]
    raise ValueError("deterministic cycle in reachability graph")


def _reduced_walk(g: ReachGraph):
    """Reduced nodes in breadth-first order with their chain endpoints."""
    out = g.out_edges()
    finals = set(g.finals)
    ids = {g.initial: 0}
    order = [g.initial]
    pos = 0
    while pos < len(order):
        u = order[pos]
        end, edges = _chain_in_graph(g, out, finals, u)
        targets = []
        for rule, t in edges:
            if t not in ids:
                ids[t] = len(order)
                order.append(t)
            targets.append((rule, ids[t]))
        yield pos, end, targets
        pos += 1


def emit(graph: ReachGraph, kind: CertificateKind | str) -> Certificate:
    """Serialize a complete reachability graph as a certificate."""
    kind = CertificateKind(kind)
    texts = graph.texts()
    body: list[str] = []
    if kind is CertificateKind.FULL:
        body = [f"N{i} {t}" for i, t in enumerate(texts)]
        body += [f"E {s} {r} {d}" for s, r, d in graph.edges]
    else:
        for u, end, targets in _reduced_walk(graph):
            if kind is CertificateKind.RULES:
                if end == "final":
                    body.append(f"F {u}")
                elif end == "stuck":
                    body.append(f"S {u}")
                body += [f"R {u} {r} {v}" for r, v in targets]
            else:
                body += [r for r, _ in targets]
    return Certificate(kind, graph.program_sha256, graph.policy_sha256, tuple(body))


# -- checking ----------------------------------------------------------------


class _Reject(Exception):
    def __init__(self, reason: Reason, detail: str = ""):
        self.reason, self.detail = reason, detail


_LINE_SYNTAX = {
    CertificateKind.FULL: re.compile(r"N(0|[1-9]\d*) \S+|E (0|[1-9]\d*) [a-z-]+ (0|[1-9]\d*)"),
    CertificateKind.RULES: re.compile(r"R (0|[1-9]\d*) [a-z-]+ (0|[1-9]\d*)|[FS] (0|[1-9]\d*)"),
    CertificateKind.LABELS: re.compile(r"[a-z-]+"),
}


def _key(kind: CertificateKind, line: str) -> tuple:
    """Identity of a body line: what it is about, not what it claims."""
    parts = line.split(" ")
    if kind is CertificateKind.FULL:
        return (parts[0],) if line.startswith("N") else ("E", parts[1], parts[2])
    if kind is CertificateKind.RULES:
        return ("R", parts[1], parts[2]) if parts[0] == "R" else ("end", parts[1])
    return ()


class _Expect:
    """Compares re-derived body lines against the certificate in order."""

    def __init__(self, kind: CertificateKind, body: tuple[str, ...]):
        self.kind = kind
        self.body = body
        self.pos = 0
        self.keys = {_key(kind, line) for line in body}

    def line(self, expected: str) -> None:
        if self.pos >= len(self.body):
            raise _Reject(Reason.MISSING_SUCCESSOR, f"certificate ends before {expected!r}")
        got = self.body[self.pos]
        if got != expected:
            if self.kind is not CertificateKind.LABELS and _key(self.kind, expected) not in self.keys:
                raise _Reject(Reason.MISSING_SUCCESSOR, f"no line for {expected[:60]!r}")
            raise _Reject(Reason.INVALID_STEP, f"line {self.pos + 5}: expected {expected[:60]!r}")
        self.pos += 1

    def done(self) -> None:
        if self.pos != len(self.body):
            raise _Reject(Reason.INVALID_STEP, f"line {self.pos + 5}: step not derivable")


class _Checker:
    def __init__(self, program: ast.Program, policy: NIPolicy):
        self.m = AbstractMachine(program, policy)
        self.steps = 0

    def final_ok(self, s: AbstractState) -> None:
        bad = self.m.violations(s)
        if bad:
            detail = ", ".join(f"{p} = {l}" for p, l in bad)
            raise _Reject(Reason.FINAL_STATE_VIOLATION, detail)

    def chain(self, s: AbstractState) -> tuple[str, AbstractState, list]:
        """Replay deterministic steps from ``s`` up to a branch or an end."""
        while True:
            if self.m.is_final(s):
                self.final_ok(s)
                return "final", s, []
            succ = self.m.successors(s)
            if not succ:
                return "stuck", s, []
            if len(succ) > 1:
                if any(r not in BRANCH_RULES for r, _ in succ):
                    raise _Reject(Reason.INVALID_STEP, "nondeterministic non-branching step")
                return "branch", s, succ
            self.steps += 1
            if self.steps > CHAIN_LIMIT:
                raise _Reject(Reason.INVALID_STEP, "deterministic replay does not terminate")
            s = succ[0][1]

    def full(self, cert: Certificate, exp: _Expect) -> None:
        init = self.m.initial()
        nodes = [init]
        index = {init: 0}
        edges: list[str] = []
        i = 0
        while i < len(nodes):
            exp.line(f"N{i} {serialize_state(nodes[i])}")
            s = nodes[i]
            if self.m.is_final(s):
                self.final_ok(s)
            for rule, t in self.m.successors(s):
                j = index.get(t)
                if j is None:
                    j = len(nodes)
                    if j >= len(cert.body):
                        raise _Reject(Reason.MISSING_SUCCESSOR, f"state N{j} not recorded")
                    index[t] = j
                    nodes.append(t)
                edges.append(f"E {i} {rule} {j}")
            i += 1
        for e in edges:
            exp.line(e)

    def reduced(self, cert: Certificate, exp: _Expect) -> None:
        rules = cert.kind is CertificateKind.RULES
        init = self.m.initial()
        order = [init]
        index = {init: 0}
        u = 0
        while u < len(order):
            end, _, succ = self.chain(order[u])
            if rules and end == "final":
                exp.line(f"F {u}")
            elif rules and end == "stuck":
                exp.line(f"S {u}")
            for rule, t in succ:
                v = index.get(t)
                if v is None:
                    v = len(order)
                    if v > len(cert.body):
                        raise _Reject(Reason.MISSING_SUCCESSOR, f"branch target {v} not recorded")
                    index[t] = v
                    order.append(t)
                exp.line(f"R {u} {rule} {v}" if rules else rule)
            u += 1


def check(program: ast.Program, policy: NIPolicy, cert: Certificate | str) -> CheckResult:
    """Accept iff the certificate is exactly the evidence for a passing program."""
    text = cert.text() if isinstance(cert, Certificate) else cert
    try:
        c = parse_certificate(text)
    except MalformedCertificate as exc:
        return CheckResult(False, exc.reason, str(exc))
    if c.program_sha256 != program_sha256(program):
        return CheckResult(False, Reason.HASH_MISMATCH, "program-sha256")
    if c.policy_sha256 != policy.sha256():
        return CheckResult(False, Reason.HASH_MISMATCH, "policy-sha256")
    syntax = _LINE_SYNTAX[c.kind]
    for n, line in enumerate(c.body, 5):
        if not syntax.fullmatch(line):
            return CheckResult(False, Reason.MALFORMED, f"line {n}")
        if c.kind is not CertificateKind.FULL:
            rule = line if c.kind is CertificateKind.LABELS else line.split(" ")[2:3]
            if isinstance(rule, list):
                rule = rule[0] if rule else None
            if rule is not None and rule not in RULES:
                return CheckResult(False, Reason.MALFORMED, f"line {n}: unknown rule {rule!r}")
    checker = _Checker(program, policy)
    exp = _Expect(c.kind, c.body)
    try:
        if c.kind is CertificateKind.FULL:
            checker.full(c, exp)
        else:
            checker.reduced(c, exp)
        exp.done()
    except _Reject as r:
        return CheckResult(False, r.reason, r.detail)
    return ACCEPT
