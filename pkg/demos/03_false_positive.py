"""
A rejected but harmless program
===============================

``ex7`` copies the secret into ``low`` and then subtracts it again, so
``low`` is always 0. Labels do not track values, so the analysis rejects it.
"""

from nicert import corpus
from nicert.abstract import explore
from nicert.oracle import InputDomain, brute_force_ni
from nicert.syntax import load

program, policy = load(corpus.path("ex7"))
_, verdict = explore(program, policy)
print("analysis:", verdict)

result = brute_force_ni(program, policy, InputDomain.default(program, range(-5, 6)))
print("brute force:", result, "after", result.runs, "runs")
