"""
Shipping evidence with a program
================================

A producer explores ``bank_safe`` once and ships a certificate. A consumer
replays it step by step instead of searching again.
"""

from nicert import corpus
from nicert.abstract import explore
from nicert.certificate import CertificateKind, check, emit
from nicert.syntax import load

program, policy = load(corpus.path("bank_safe"))
graph, verdict = explore(program, policy)
print(verdict, len(graph.nodes), "states", len(graph.edges), "edges")

certs = {kind: emit(graph, kind) for kind in CertificateKind}
for kind, cert in certs.items():
    print(f"{kind.value:7s} {cert.size():6d} bytes  {check(program, policy, cert)}")

# Only the branch decisions survive in the smallest kind.
print(certs[CertificateKind.LABELS].body[:6])

# Flipping one recorded branch is caught.
text = certs[CertificateKind.RULES].text()
tampered = text.replace("if-then", "if-else", 1)
print(check(program, policy, tampered))
