"""
A public flag that leaks a secret balance
=========================================

The bundled ``ex1`` program stores a secret balance in an ``Account`` and
sets a public ``extraService`` flag when the balance reaches 10000.
"""

from nicert import corpus
from nicert.abstract import explore
from nicert.concrete import run_concrete
from nicert.extended import run_extended
from nicert.oracle import InputDomain, brute_force_ni
from nicert.syntax import load

program, policy = load(corpus.path("ex1"))
print(corpus.source("ex1"))

# Plain runs: the printed flag differs between the two balances.
for balance in (5000, 10000):
    final = run_concrete(program, {"initbalance": balance})
    print(balance, "->", final.output, final.values)

# With labels, the flag ends up marked as upgraded from Low to High.
final, verdict = run_extended(program, policy, {"initbalance": 5000})
print(final.observed.labels["a.extraService"], verdict)

# The abstract exploration reaches the same conclusion without any input.
graph, verdict = explore(program, policy)
print(len(graph.nodes), "abstract states;", verdict)

# And brute force confirms the leak on a two-point domain.
domain = InputDomain.default(program, overrides={"initbalance": (5000, 10000)})
print(brute_force_ni(program, policy, domain))
