import itertools

from hypothesis import given, strategies as st

from nicert.labels import (
    HIGH, LOW, Label, StoredLabel, as_stored, current, join, parse_label, update,
)

SL = StoredLabel

# Memory-update table: (previous stored label, label written) -> new stored label.
UPDATE_TABLE = {
    (SL.LOW, LOW): SL.LOW,
    (SL.LOW, HIGH): SL.LOW_TO_HIGH,
    (SL.HIGH, HIGH): SL.HIGH,
    (SL.HIGH, LOW): SL.HIGH_TO_LOW,
    (SL.LOW_TO_HIGH, LOW): SL.LOW,
    (SL.LOW_TO_HIGH, HIGH): SL.LOW_TO_HIGH,
    (SL.HIGH_TO_LOW, HIGH): SL.HIGH,
    (SL.HIGH_TO_LOW, LOW): SL.HIGH_TO_LOW,
}

JOIN_TABLE = {(LOW, LOW): LOW, (LOW, HIGH): HIGH, (HIGH, LOW): HIGH, (HIGH, HIGH): HIGH}


def test_update_table_exhaustive():
    assert len(UPDATE_TABLE) == 8
    for (prev, new), expected in UPDATE_TABLE.items():
        assert update(prev, new) is expected, (prev, new)


def test_join_table_exhaustive():
    for (a, b), expected in JOIN_TABLE.items():
        assert join(a, b) is expected


def test_join_lattice_laws():
    for a, b, c in itertools.product(Label, repeat=3):
        assert join(a, b) is join(b, a)
        assert join(join(a, b), c) is join(a, join(b, c))
    for a in Label:
        assert join(a, a) is a
        assert join(LOW, a) is a


def test_values_distinct():
    assert len(set(Label)) == 2
    assert len({s.value for s in SL}) == 4
    assert SL.LOW_TO_HIGH is not SL.HIGH and SL.HIGH_TO_LOW is not SL.LOW


def test_current_projection():
    assert current(SL.LOW) is LOW
    assert current(SL.HIGH) is HIGH
    assert current(SL.LOW_TO_HIGH) is HIGH
    assert current(SL.HIGH_TO_LOW) is LOW


def test_current_of_update_is_written_label():
    for sl, l in itertools.product(SL, Label):
        assert current(update(sl, l)) is l


def test_join_on_stored_labels_projects_first():
    for a, b in itertools.product(SL, Label):
        assert join(a, b) is join(current(a), b)
        assert join(b, a) is join(b, current(a))


def _closure(start: StoredLabel) -> set:
    seen, todo = {start}, [start]
    while todo:
        s = todo.pop()
        for l in Label:
            t = update(s, l)
            if t not in seen:
                seen.add(t)
                todo.append(t)
    return seen


def test_reachability_closure():
    assert _closure(SL.LOW) == {SL.LOW, SL.LOW_TO_HIGH}
    assert _closure(SL.HIGH) == {SL.HIGH, SL.HIGH_TO_LOW}


@given(st.sampled_from([SL.LOW, SL.HIGH]), st.lists(st.sampled_from(list(Label)), max_size=30))
def test_update_sequences_stay_in_their_half(start, writes):
    s = start
    for l in writes:
        s = update(s, l)
        assert s in _closure(start)
    if writes:
        assert current(s) is writes[-1]


def test_tokens_and_rendering():
    assert str(SL.LOW_TO_HIGH) == "Low >> High"
    assert str(SL.HIGH_TO_LOW) == "High >> Low"
    for s in SL:
        assert SL.from_token(s.token) is s
    assert as_stored(LOW) is SL.LOW and as_stored(HIGH) is SL.HIGH
    assert parse_label("High") is HIGH


def test_parse_label_rejects_unknown():
    import pytest

    with pytest.raises(ValueError):
        parse_label("Secret")
    with pytest.raises(ValueError):
        SL.from_token("X")
