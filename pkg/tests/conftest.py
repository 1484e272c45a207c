import functools
import itertools
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from nicert import corpus  # noqa: E402
from nicert.oracle import InputDomain  # noqa: E402
from nicert.randprog import random_corpus  # noqa: E402
from nicert.syntax import extract_policy, parse  # noqa: E402

# Inputs per corpus program on which every run terminates.
CORPUS_INTS = {name: range(-2, 4) for name in corpus.names()}
CORPUS_INTS["ex5"] = range(1, 4)

RANDOM_COUNT = 250


@functools.lru_cache(maxsize=None)
def load_corpus(name: str):
    program = parse(corpus.source(name))
    return program, extract_policy(program)


def corpus_domain(name: str) -> InputDomain:
    program, _ = load_corpus(name)
    return InputDomain.default(program, CORPUS_INTS[name])


def domain_points(domain: InputDomain):
    names = list(domain.values)
    for combo in itertools.product(*domain.values.values()):
        yield dict(zip(names, combo))


@functools.lru_cache(maxsize=None)
def random_programs():
    return tuple(random_corpus(RANDOM_COUNT, seed=0))


def src(body: str, statics: str = "static int low = 0; static int high; //@ setLabel(high, High);",
        params: str = "int secret", annot: str = "//@ setLabel(secret, High);") -> str:
    """A one-class program around a ``main`` body."""
    return f"class T {{ {statics}\n  public static void main({params}) {{ {annot}\n{body}\n}} }}\n"


@pytest.fixture(params=corpus.names())
def corpus_name(request):
    return request.param
