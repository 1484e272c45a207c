import itertools

from hypothesis import given, settings, strategies as st

from conftest import corpus_domain, domain_points, load_corpus, random_programs, src
from nicert.concrete import ConcreteMachine, execute, initial_concrete, low_fingerprint
from nicert.extended import erase, format_trace, initial_extended, run_extended
from nicert.labelled import LabelledMachine, reachability_ok
from nicert.labels import HIGH, LOW, StoredLabel
from nicert.machine import EXEC, EVAL, RESTORE
from nicert.oracle import InputDomain, brute_force_ni
from nicert.syntax import ast, contains_abrupt, extract_policy, parse, walk

SL = StoredLabel


def _ext_configs(program, policy, inputs):
    m = LabelledMachine(program, policy)
    c = m.initial(inputs)
    out = [(None, c)]
    while c.k:
        rule, c = m.step(c)
        out.append((rule, c))
    return out


def _label(program, policy, inputs, path):
    final, _ = run_extended(program, policy, inputs)
    return final.observed.labels[path]


def test_read_high_under_low_context():
    p = parse(src("low = high;"))
    pol = extract_policy(p)
    read = next(n for n in walk(p.main.body) if isinstance(n, ast.Static) and n.name == "high"
                and n is not p.main.body.stmts[0].target)
    for rule, c in _ext_configs(p, pol, {"secret": 1}):
        if c.k and c.k[-1] == (EVAL, read.nid):
            assert c.cl is LOW
            m = LabelledMachine(p, pol)
            _, nxt = m.step(c)
            assert nxt.vals[-1][1] is HIGH
            break
    else:
        raise AssertionError("read never evaluated")


def test_assign_high_into_low_gives_change_label():
    p = parse(src("low = high;"))
    pol = extract_policy(p)
    assert _label(p, pol, {"secret": 1}, "low") is SL.LOW_TO_HIGH
    assert _label(p, pol, {"secret": 1}, "high") is SL.HIGH


def test_if_restores_context():
    p = parse(src("high = secret; if (high > 0) low = 1; else low = 2; low = 3;"))
    pol = extract_policy(p)
    final, verdict = run_extended(p, pol, {"secret": 1})
    assert final.config.cl is LOW
    assert final.observed.labels["low"] is SL.LOW
    assert verdict.passed
    trace = []
    run_extended(p, pol, {"secret": 1}, trace=trace)
    rules = [r for r, _ in trace]
    i = rules.index("if-then")
    assert trace[i][1] is HIGH
    assert "restore" in rules[i:]
    assert trace[rules.index("restore", i)][1] is LOW


def test_high_to_low_read_does_not_taint():
    p = parse(src("high = 1; low = high;"))
    pol = extract_policy(p)
    final, verdict = run_extended(p, pol, {"secret": 3})
    assert final.observed.labels["high"] is SL.HIGH_TO_LOW
    assert final.observed.labels["low"] is SL.LOW
    assert verdict.passed


def test_ex1_fails_on_extra_service():
    p, pol = load_corpus("ex1")
    final, verdict = run_extended(p, pol, {"initbalance": 5000})
    assert final.observed.labels["a.extraService"] is SL.LOW_TO_HIGH
    assert not verdict.passed
    assert ("a.extraService", SL.LOW_TO_HIGH) in verdict.witness
    assert "a.extraService = Low >> High" in str(verdict)


def test_ex4_passes_everywhere():
    p, pol = load_corpus("ex4")
    for inputs in domain_points(InputDomain.default(p, range(-2, 6))):
        final, verdict = run_extended(p, pol, inputs)
        assert verdict.passed
        assert final.observed.labels["low"] is SL.LOW


def test_ex7_false_positive():
    p, pol = load_corpus("ex7")
    for inputs in domain_points(corpus_domain("ex7")):
        final, verdict = run_extended(p, pol, inputs)
        assert final.observed.values["low"] == 0
        assert final.observed.labels["low"] is SL.LOW_TO_HIGH
        assert not verdict.passed


def test_ex5_break_defeats_restore():
    p, pol = load_corpus("ex5")
    for secret in (2, 3, 4):
        assert _label(p, pol, {"secret": secret}, "low") is SL.LOW_TO_HIGH
    # one iteration: low is incremented before any High guard is tested
    assert _label(p, pol, {"secret": 1}, "low") is SL.LOW


def test_return_in_high_branch():
    p, pol = load_corpus("return_leak")
    _, verdict = run_extended(p, pol, {"secret": 0})
    assert not verdict.passed
    _, verdict = run_extended(p, pol, {"secret": 1})
    assert verdict.passed  # the assignment never runs on this input


def test_println_warning_only():
    p = parse(src("System.out.println(high > 0); low = 1;"))
    pol = extract_policy(p)
    final, verdict = run_extended(p, pol, {"secret": 1})
    assert verdict.passed
    assert len(final.warnings) == 1
    p2 = parse(src("System.out.println(low);"))
    assert run_extended(p2, extract_policy(p2), {"secret": 1})[0].warnings == ()


def test_method_call_restores_caller_context():
    p = parse("class C { static int low = 0; static int high; //@ setLabel(high, High);\n"
              "static int f() { if (high > 0) { high = 0; } return 1; }\n"
              "static void main() { low = f(); } }")
    final, verdict = run_extended(p, extract_policy(p), {})
    assert final.config.cl is LOW
    assert verdict.passed


def test_trace_format():
    p = parse(src("low = 1;"))
    trace = []
    final, _ = run_extended(p, extract_policy(p), {"secret": 0}, trace=trace)
    text = format_trace(trace)
    lines = text.splitlines()
    assert len(lines) == final.steps
    assert lines[0].startswith("1 ") and lines[0].endswith("CL=Low")
    assert all(len(line.split(" ")) == 3 for line in lines)


def test_erase_initial():
    p, pol = load_corpus("ex3")
    assert erase(initial_extended(p, pol, {"secret": 2})) == initial_concrete(p, {"secret": 2})


def _lockstep(p, pol, inputs):
    cm = ConcreteMachine(p)
    ext = _ext_configs(p, pol, inputs)
    cur = erase(ext[0][1])
    for rule, c in ext[1:]:
        e = erase(c)
        if rule == "restore":
            assert e == cur  # restore steps stutter
        else:
            cur = cm.step(cur)[1]
            assert e == cur, rule
    assert not cur.k
    return cur


def test_lockstep_erasure_corpus(corpus_name):
    p, pol = load_corpus(corpus_name)
    for inputs in domain_points(corpus_domain(corpus_name)):
        final = _lockstep(p, pol, inputs)
        assert final == execute(p, inputs).config


@settings(max_examples=60, deadline=None)
@given(st.integers(0, len(random_programs()) - 1), st.integers(-2, 3), st.integers(-2, 3))
def test_lockstep_erasure_random(i, h, lo):
    rp = random_programs()[i]
    inputs = {"h": h, "l": lo}
    inputs = {n: inputs[n] for n, _ in rp.program.inputs}
    _lockstep(rp.program, rp.policy, inputs)


def test_values_conservative(corpus_name):
    p, pol = load_corpus(corpus_name)
    for inputs in domain_points(corpus_domain(corpus_name)):
        final, _ = run_extended(p, pol, inputs)
        concrete = execute(p, inputs).final
        assert final.observed.values == concrete.values
        assert final.observed.output == concrete.output


def _restore_check(p, pol, inputs):
    ext = _ext_configs(p, pol, inputs)
    ifs = {n.nid: n for n in walk(p.main.body) if isinstance(n, ast.If)}
    for c in p.classes:
        for m in c.methods.values():
            ifs.update({n.nid: n for n in walk(m.body) if isinstance(n, ast.If)})
    for i, (_, c) in enumerate(ext):
        if not c.k or c.k[-1][0] != EXEC or c.k[-1][1] not in ifs:
            continue
        node = ifs[c.k[-1][1]]
        if contains_abrupt(node.then) or (node.orelse is not None and contains_abrupt(node.orelse)):
            continue
        rest, depth = c.k[:-1], len(c.frames)
        done = next(c2 for _, c2 in ext[i + 1:] if len(c2.frames) == depth and c2.k == rest)
        assert done.cl is c.cl


def test_context_restore_corpus(corpus_name):
    p, pol = load_corpus(corpus_name)
    for inputs in domain_points(corpus_domain(corpus_name)):
        _restore_check(p, pol, inputs)


def test_context_restore_random():
    for rp in random_programs()[:80]:
        _restore_check(rp.program, rp.policy, {n: 1 for n, _ in rp.program.inputs})


def test_reachability_invariant_every_step(corpus_name):
    p, pol = load_corpus(corpus_name)
    for inputs in domain_points(corpus_domain(corpus_name)):
        for _, c in _ext_configs(p, pol, inputs):
            assert reachability_ok(p, pol, c)
            assert c.cl in (LOW, HIGH)


def test_restore_items_carry_plain_labels():
    p, pol = load_corpus("bank_safe")
    inputs = next(domain_points(corpus_domain("bank_safe")))
    for _, c in _ext_configs(p, pol, inputs):
        assert all(it[1] in (LOW, HIGH) for it in c.k if it[0] == RESTORE)


def _low_divergent_pairs(rp):
    dom = InputDomain.default(rp.program)
    low_names = [n for n, _ in rp.program.inputs if rp.policy.is_low(n)]
    points = list(domain_points(dom))
    runs = {tuple(sorted(pt.items())): execute(rp.program, pt).final for pt in points}
    for a, b in itertools.combinations(points, 2):
        if any(a[n] != b[n] for n in low_names):
            continue
        fa, fb = runs[tuple(sorted(a.items()))], runs[tuple(sorted(b.items()))]
        diff = [k for k in fa.values if rp.policy.is_low(fa.keys[k]) and fa.values[k] != fb.values[k]]
        if diff:
            yield a, b, diff


def test_low_divergence_marked_random():
    violations = []
    for rp in random_programs():
        for a, b, diff in _low_divergent_pairs(rp):
            la = run_extended(rp.program, rp.policy, a)[0].observed.labels
            lb = run_extended(rp.program, rp.policy, b)[0].observed.labels
            for var in diff:
                if SL.LOW_TO_HIGH not in (la[var], lb[var]):
                    violations.append((rp.seed, a, b, var))
    assert violations == []


def test_all_runs_pass_implies_oracle_ni_random():
    for rp in random_programs():
        dom = InputDomain.default(rp.program)
        if all(run_extended(rp.program, rp.policy, pt)[1].passed for pt in domain_points(dom)):
            assert not brute_force_ni(rp.program, rp.policy, dom).interferent, rp.seed


def test_all_runs_pass_implies_oracle_ni_corpus(corpus_name):
    p, pol = load_corpus(corpus_name)
    dom = corpus_domain(corpus_name)
    if all(run_extended(p, pol, pt)[1].passed for pt in domain_points(dom)):
        assert not brute_force_ni(p, pol, dom).interferent
