import random

import pytest

from conftest import load_corpus, random_programs, src
from mutate import mutate
from nicert import abstract, certificate
from nicert.abstract import explore
from nicert.certificate import (
    CertificateKind, MalformedCertificate, Reason, check, emit, parse_certificate,
)
from nicert.machine import BRANCH_RULES
from nicert.syntax import extract_policy, parse

KINDS = list(CertificateKind)
PASSING = ["ex4", "temporal", "bank_safe", "loops"]


def _certs(name):
    p, pol = load_corpus(name)
    g, verdict = explore(p, pol)
    return p, pol, g, verdict, {k: emit(g, k) for k in KINDS}


@pytest.mark.parametrize("name", PASSING)
def test_round_trip_accepts(name):
    p, pol, _, verdict, certs = _certs(name)
    assert verdict.passed
    for kind, cert in certs.items():
        assert check(p, pol, cert).accepted, kind
        assert check(p, pol, cert.text()).accepted


def test_full_certificate_reconstructs_graph():
    _, _, g, _, certs = _certs("ex4")
    c = parse_certificate(certs[CertificateKind.FULL].text())
    nodes = [line.split(" ", 1)[1] for line in c.body if line.startswith("N")]
    edges = [tuple(line.split(" ")[1:]) for line in c.body if line.startswith("E ")]
    assert nodes == g.texts()
    assert [(int(s), r, int(d)) for s, r, d in edges] == g.edges
    assert [abstract.parse_state(t) for t in nodes] == g.nodes


def test_sizes_ordered_and_small(corpus_name):
    _, _, _, _, certs = _certs(corpus_name)
    full, rules, labels = (certs[k].size() for k in KINDS)
    assert labels <= rules < full
    assert rules < 0.10 * full


def test_straight_line_labels_body_empty():
    p = parse(src("high = secret; low = 3; low = low + 1;"))
    pol = extract_policy(p)
    g, _ = explore(p, pol)
    cert = emit(g, CertificateKind.LABELS)
    assert cert.body == ()
    assert cert.text().count("\n") == 4
    assert check(p, pol, cert).accepted


def test_deleted_branch_edge_is_missing_successor():
    p, pol, _, _, certs = _certs("ex4")
    full = certs[CertificateKind.FULL]
    i = next(i for i, line in enumerate(full.body)
             if line.startswith("E ") and line.split(" ")[2] in BRANCH_RULES)
    body = full.body[:i] + full.body[i + 1:]
    result = check(p, pol, certificate.Certificate(full.kind, full.program_sha256,
                                                   full.policy_sha256, body))
    assert result.reason is Reason.MISSING_SUCCESSOR
    rules = certs[CertificateKind.RULES]
    j = next(i for i, line in enumerate(rules.body) if line.startswith("R "))
    body = rules.body[:j] + rules.body[j + 1:]
    result = check(p, pol, certificate.Certificate(rules.kind, rules.program_sha256,
                                                   rules.policy_sha256, body))
    assert result.reason is Reason.MISSING_SUCCESSOR


def test_label_edit_is_invalid_step():
    p, pol, _, _, certs = _certs("ex4")
    text = certs[CertificateKind.FULL].text()
    lines = text.split("\n")
    i = next(i for i, line in enumerate(lines) if line.startswith("N3 "))
    assert '"L"' in lines[i]
    lines[i] = lines[i].replace('"L"', '"H"', 1)
    result = check(p, pol, "\n".join(lines))
    assert result.reason is Reason.INVALID_STEP, result


def test_header_checks():
    p, pol, _, _, certs = _certs("ex4")
    text = certs[CertificateKind.RULES].text()
    assert check(p, pol, text.replace("version 1", "version 2")).reason is Reason.UNKNOWN_VERSION
    other = parse(src("low = 1;"))
    assert check(other, pol, text).reason is Reason.HASH_MISMATCH
    all_low = extract_policy(parse("class C { static int x; static void main() { x = 1; } }"))
    assert check(p, all_low, text).reason is Reason.HASH_MISMATCH
    assert check(p, pol, text.replace("kind rules", "kind proof")).reason is Reason.MALFORMED
    assert check(p, pol, text[:-1]).reason is Reason.MALFORMED
    assert check(p, pol, "").reason is Reason.MALFORMED
    with pytest.raises(MalformedCertificate):
        parse_certificate("version 1\n")


def test_unknown_rule_name_rejected():
    p, pol, _, _, certs = _certs("ex4")
    text = certs[CertificateKind.LABELS].text() + "if-maybe\n"
    assert check(p, pol, text).reason is Reason.MALFORMED


def test_extra_line_rejected():
    p, pol, _, _, certs = _certs("ex4")
    text = certs[CertificateKind.RULES].text() + "F 0\n"
    assert not check(p, pol, text).accepted


@pytest.mark.parametrize("name", ["ex1", "ex3", "ex5", "ex7", "return_leak", "nested_break"])
def test_failing_programs_rejected(name):
    p, pol, _, verdict, certs = _certs(name)
    assert not verdict.passed
    for cert in certs.values():
        assert check(p, pol, cert).reason is Reason.FINAL_STATE_VIOLATION


@pytest.mark.parametrize("name", PASSING)
def test_mutations_rejected(name):
    p, pol, _, _, certs = _certs(name)
    rng = random.Random(name)
    for kind, cert in certs.items():
        text = cert.text()
        for _ in range(150):
            assert not check(p, pol, mutate(text, rng)).accepted, kind


def test_emission_deterministic(corpus_name):
    _, _, _, _, a = _certs(corpus_name)
    _, _, _, _, b = _certs(corpus_name)
    assert all(a[k].text() == b[k].text() for k in KINDS)


def test_checker_never_explores(monkeypatch):
    p, pol, _, _, certs = _certs("bank_safe")

    def forbidden(*args, **kwargs):
        raise AssertionError("checker called explore")

    monkeypatch.setattr(abstract, "explore", forbidden)
    monkeypatch.setattr(certificate, "explore", forbidden, raising=False)
    for cert in certs.values():
        assert check(p, pol, cert.text()).accepted


def test_random_passing_programs_accept():
    n = 0
    for rp in random_programs()[:120]:
        g, verdict = explore(rp.program, rp.policy)
        certs = [emit(g, k) for k in KINDS]
        sizes = [c.size() for c in certs]
        assert sizes[2] <= sizes[1] <= sizes[0]
        for c in certs:
            result = check(rp.program, rp.policy, c)
            if verdict.passed:
                assert result.accepted, (rp.seed, c.kind)
                n += 1
            else:
                assert result.reason is Reason.FINAL_STATE_VIOLATION
    assert n > 0


def test_result_rendering():
    assert str(certificate.ACCEPT) == "Accept"
    r = certificate.CheckResult(False, Reason.INVALID_STEP, "line 7")
    assert str(r) == "Reject(invalid step: line 7)"
