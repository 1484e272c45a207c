"""
Context labels through branches and loops
=========================================

Three small programs differ only in how control depends on the secret.
We follow the context label step by step.
"""

from collections import Counter

from nicert import corpus
from nicert.extended import format_trace, run_extended
from nicert.syntax import load

# ex3: the loop count depends on the secret, so ``low`` is tainted.
program, policy = load(corpus.path("ex3"))
trace = []
final, verdict = run_extended(program, policy, {"secret": 2}, trace=trace)
print(final.observed.values, final.observed.labels["low"], verdict)
print(format_trace(trace[-6:]), end="")  # last six steps, renumbered from 1

# ex4: the branch on the secret is closed before ``low`` is written,
# so the context is back to Low and the run passes.
program, policy = load(corpus.path("ex4"))
for secret in (0, 5):
    final, verdict = run_extended(program, policy, {"secret": secret})
    print(secret, final.observed.labels["low"], verdict)

# ex5: a break inside the secret-guarded branch skips the restore, so the
# High context survives into the next iteration.
program, policy = load(corpus.path("ex5"))
trace = []
final, verdict = run_extended(program, policy, {"secret": 3}, trace=trace)
print(Counter(rule for rule, _ in trace)["restore"], "restores;", verdict)
