import pytest
from hypothesis import given, settings, strategies as st

from conftest import load_corpus, random_programs, src
from nicert import corpus
from nicert.labels import HIGH, LOW
from nicert.syntax import (
    ParseError, PolicyError, ast, contains_abrupt, dump_program, extract_policy, parse, pretty,
    walk,
)


def _branch(body: str, shield_ifs: bool = False) -> bool:
    """contains_abrupt of the then-branch of ``if (secret > 0) <body>`` inside a loop."""
    p = parse(src(f"while (high > 0) {{ if (secret > 0) {body} high = 0; }}"))
    ifs = [n for n in walk(p.main.body) if isinstance(n, ast.If)]
    return contains_abrupt(ifs[0].then, shield_ifs)


def test_parse_ex3_structure():
    p, _ = load_corpus("ex3")
    assert [c.name for c in p.classes] == ["Testclass"]
    assert [name for name, _, _ in p.statics] == ["low", "high"]
    loops = [n for n in walk(p.main.body) if isinstance(n, ast.While)]
    assert len(loops) == 1
    assert p.inputs == [("secret", "int")]


def test_parse_errors():
    with pytest.raises(ParseError, match="no entry"):
        parse("class C { }")
    with pytest.raises(ParseError, match="outside loop"):
        parse(src("break;"))
    with pytest.raises(ParseError, match="outside loop"):
        parse(src("continue;"))
    with pytest.raises(ParseError, match="duplicate main"):
        parse("class A { static void main() {} }\nclass B { static void main() {} }")
    with pytest.raises(ParseError, match="cannot resolve"):
        parse(src("low = nothere;"))
    with pytest.raises(ParseError, match="recursion"):
        parse("class C { static int f(int x) { return f(x); }\n"
              "static void main() { int y = f(1); } }")
    with pytest.raises(ParseError):
        parse(src("low = ;"))


def test_parse_error_positions():
    with pytest.raises(ParseError) as info:
        parse("class C {\n  static void main() {\n    x = 1;\n  }\n}")
    assert "3:" in str(info.value)


def test_policy_ex1():
    p, pol = load_corpus("ex1")
    highs = {k for k, v in pol.paths(p).items() if v is HIGH}
    assert highs == {"a.balance", "initbalance"}
    assert pol.label("a.extraService") is LOW
    assert pol.is_low("Account.extraService")
    assert not pol.is_low("Account.balance")


def test_policy_defaults_and_errors():
    p = parse("class C { static int x; static void main() { x = 1; } }")
    assert extract_policy(p).labels == {}
    assert set(extract_policy(p).paths(p).values()) == {LOW}
    with pytest.raises(PolicyError):
        extract_policy(parse("class C { static int x; //@ setLabel(missing, High);\n"
                             "static void main() { x = 1; } }"))
    with pytest.raises(PolicyError):
        extract_policy(parse("class C { static int x; //@ setLabel(x, Secret);\n"
                             "static void main() { x = 1; } }"))


def test_policy_block_annotation_and_order_independence():
    a = parse("class C { static int x; static int y;\n"
              "/*@ setLabel(x, High); setLabel(y, High); @*/\n"
              "static void main() { x = 1; } }")
    b = parse("class C { static int x; static int y;\n"
              "//@ setLabel(y, High);\n//@ setLabel(x, High);\n"
              "static void main() { x = 1; } }")
    pa, pb = extract_policy(a), extract_policy(b)
    assert pa == pb and pa.sha256() == pb.sha256()
    assert pa.high_keys() == {"x", "y"}
    assert extract_policy(a) == pa


def test_jml_clauses_ignored():
    p = parse("class C { static int x;\n//@ requires x > 0;\n//@ ensures true;\n"
              "static void main() { x = 1; } }")
    assert extract_policy(p).labels == {}


def test_pretty_round_trip_corpus(corpus_name):
    p, pol = load_corpus(corpus_name)
    once = pretty(p)
    again = parse(once)
    assert pretty(again) == once
    assert dump_program(again) == dump_program(p)
    assert extract_policy(again) == pol


@settings(max_examples=60, deadline=None)
@given(st.integers(0, len(random_programs()) - 1))
def test_pretty_round_trip_random(i):
    p = random_programs()[i].program
    assert dump_program(parse(pretty(p))) == dump_program(p)


def test_contains_abrupt_examples():
    assert _branch("break;")
    assert _branch("continue;")
    assert not _branch("{ high--; low++; }")
    assert not _branch("{ while (secret > 0) { break; } }")
    assert _branch("{ while (secret > 0) { return; } }")
    assert _branch("{ low = 1; if (low > 0) break; }")


def test_contains_abrupt_return():
    p = parse(src("if (secret > 0) return; low = 1;"))
    (node,) = [n for n in walk(p.main.body) if isinstance(n, ast.If)]
    assert contains_abrupt(node.then)


def test_shielding_reading_differs_on_nested_if():
    assert _branch("{ if (true) break; }")
    assert not _branch("{ if (true) break; }", shield_ifs=True)


def test_contains_abrupt_alpha_invariant():
    bodies = ["break;", "{ high--; low++; }", "{ while (secret > 0) { break; } }",
              "{ if (low > 0) continue; }"]
    for body in bodies:
        plain = parse(src(f"while (high > 0) {{ if (secret > 0) {body} high = 0; }}"))
        renamed_src = src(
            f"while (hh > 0) {{ if (zz > 0) {body.replace('high', 'hh').replace('low', 'll').replace('secret', 'zz')} hh = 0; }}",
            statics="static int ll = 0; static int hh; //@ setLabel(hh, High);",
            params="int zz", annot="//@ setLabel(zz, High);")
        renamed = parse(renamed_src)
        a = [contains_abrupt(n.then) for n in walk(plain.main.body) if isinstance(n, ast.If)]
        b = [contains_abrupt(n.then) for n in walk(renamed.main.body) if isinstance(n, ast.If)]
        assert a == b


def test_corpus_listing():
    names = corpus.names()
    assert {"ex1", "ex3", "ex4", "ex5", "ex7"} <= set(names)
    with pytest.raises(FileNotFoundError):
        corpus.path("nope")
