import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hnnpatterns.errors import PreconditionError
from hnnpatterns.patterns import (
    CONJECTURED_FORM,
    TRIVIAL,
    TRIVIAL_PATTERN,
    MoveSpec,
    Sequence,
    apply_move_pattern,
    apply_move_sequence,
    apply_moves,
    enumerate_reachable,
    is_subpattern,
    is_subsequence,
    is_well_behaved,
    matches_conjectured_form,
    parse_pattern,
    parse_sequence,
    pattern_of,
    reverse,
)

M2 = lambda s: MoveSpec("M2", split=s)
M3 = lambda s: MoveSpec("M3", split=s)
M0 = MoveSpec("M0")


def conjectured_core(rng: random.Random) -> Sequence:
    left = [rng.choice((-1, 0)) for _ in range(rng.randrange(7))]
    right = [rng.choice((0, 1)) for _ in range(rng.randrange(7))]
    return Sequence(tuple(left + [0] * rng.randrange(3) + right))


symbols = st.lists(st.sampled_from((-1, 0, 1)), max_size=14)
conj = st.builds(
    lambda a, z, b: Sequence(tuple(a) + (0,) * z + tuple(b)),
    st.lists(st.sampled_from((-1, 0)), max_size=7),
    st.integers(0, 3),
    st.lists(st.sampled_from((0, 1)), max_size=7),
)


# -- notation ------------------------------------------------------------------


@pytest.mark.parametrize(
    "text",
    ["(-1)(0)^6(1)", "(-1)(0)(10)(1110)(1^7 0)(1)", "(-1)(1)", "(-1)(0 -1)^2(0)(1)", "(-1)(0)(10)^3(1)"],
)
def test_sequence_notation_round_trip(text):
    assert str(parse_sequence(text)) == text


def test_sequence_parse_values():
    assert parse_sequence("(-1)(0)^6(1)").core == (0,) * 6
    assert parse_sequence("(-1)(1^7 0)(1)").core == (1,) * 7 + (0,)
    assert parse_sequence("(-1)(1)").core == ()


@pytest.mark.parametrize("bad", ["(0)(1)", "(-1)(0)", "(-1)(2)(1)", "(-1)(0,1)(1)", "-1 0 1"])
def test_sequence_parse_errors(bad):
    with pytest.raises(ValueError):
        parse_sequence(bad)


@given(symbols)
def test_print_parse_identity(core):
    s = Sequence(tuple(core))
    assert parse_sequence(str(s)) == s


@pytest.mark.parametrize("text", ["(-1)(0)(10)(1)", "(-1)(0,-1)(0)(1,0)(1)", "(-1)[0 -1](0)(1)"])
def test_pattern_notation_round_trip(text):
    assert str(parse_pattern(text)) == text


def test_trimming_is_canonical():
    assert Sequence((-1, -1, 0, 1)) == Sequence((0,))
    assert parse_pattern("(-1)(-1)(0)(1)(1)") == TRIVIAL_PATTERN


# -- moves on sequences --------------------------------------------------------


def test_m2_chain_on_patterns():
    p = TRIVIAL_PATTERN
    expected = ["(-1)(0)(10)(1)", "(-1)(0)(10)(1110)(1)", "(-1)(0)(10)(1110)(1^7 0)(1)"]
    for text in expected:
        p = apply_move_pattern(p, M2(0))
        assert str(p) == text


def test_m2_chain_on_sequences():
    s = TRIVIAL
    for text in ["(-1)(0)(10)(1)", "(-1)(0)(10)(1110)(1)", "(-1)(0)(10)(1110)(1^7 0)(1)"]:
        s = apply_move_sequence(s, M2(-1))
        assert str(pattern_of(s)) == text
    assert str(s) == "(-1)(0)^2(10)^2(1110)^2(1^7 0)(1)"


def test_m0_is_reverse_negate():
    s = parse_sequence("(-1)(0)(10)(1)")
    assert apply_move_sequence(s, M0).core == (0, -1, 0)
    assert apply_moves(s, [M0, M0]) == s


@given(symbols)
def test_m1_is_identity_and_m4_is_trivial(core):
    s = Sequence(tuple(core))
    assert apply_move_sequence(s, MoveSpec("M1")) == s
    assert apply_move_sequence(s, MoveSpec("M4")).is_trivial()


def test_m1_and_m4_zero_counts():
    assert apply_move_sequence(TRIVIAL, MoveSpec("M1", zeros=2)).core == (0, 0, 0)
    assert apply_move_sequence(parse_sequence("(-1)(10)(1)"), MoveSpec("M4", zeros=1)) == TRIVIAL


def test_move_spec_validation():
    with pytest.raises(PreconditionError):
        MoveSpec("M2")
    with pytest.raises(PreconditionError):
        MoveSpec("M0", split=1)
    with pytest.raises(PreconditionError):
        MoveSpec("M5")
    with pytest.raises(PreconditionError):
        MoveSpec("M2", split=0, zeros=1)


def test_m3_bad_pairing_name():
    with pytest.raises(PreconditionError):
        apply_move_sequence(TRIVIAL, M3(0), pairing="middle")


@settings(max_examples=200)
@given(conj, st.data())
def test_k23_identity(k, data):
    """M2 then M3 at the right terminal gives back the part right of the M2 cut."""
    s = data.draw(st.integers(0, len(k.core)))
    w3 = k.core[s:]
    if -1 in w3:
        return
    k2 = apply_move_sequence(k, M2(s))
    assert apply_move_sequence(k2, M3(len(k2.core))) == Sequence(w3)


@settings(max_examples=200)
@given(conj, st.data())
def test_k203_is_subsequence_of_k0(k, data):
    s = data.draw(st.integers(-1, len(k.core) + 1))
    k20 = apply_moves(k, [M2(s), M0])
    for pairing in ("cut", "far"):
        r = apply_move_sequence(k20, M3(len(k20.core)), pairing=pairing)
        assert is_subsequence(r, reverse(k))


def test_m3_pairing_choice_agrees_1000_trials():
    rng = random.Random(2003)
    for _ in range(1000):
        k = conjectured_core(rng)
        k20 = apply_moves(k, [M2(rng.randrange(-1, len(k.core) + 2)), M0])
        cut = M3(len(k20.core))
        assert apply_move_sequence(k20, cut) == apply_move_sequence(k20, cut, pairing="far")


def test_subsequence_definition():
    big = parse_sequence("(-1)(0)(10)(1110)(1)")
    assert is_subsequence(parse_sequence("(-1)(10)(1)"), big)
    assert is_subsequence(TRIVIAL, big)
    assert not is_subsequence(parse_sequence("(-1)(0)^3(1)"), big)


# -- conjectured form ----------------------------------------------------------


def test_conjectured_form_examples():
    assert matches_conjectured_form(parse_sequence("(-1)(0)(10)(1110)(1)"))
    assert not matches_conjectured_form([1, -1])
    assert matches_conjectured_form(Sequence(()))
    assert is_well_behaved(TRIVIAL) and not is_well_behaved([1, -1])
    assert matches_conjectured_form(parse_pattern("(-1)(0,-1)(0)(1,0)(1)"))


@given(symbols)
def test_conjectured_form_is_a_single_valley(core):
    s = Sequence(tuple(core))
    labels = s.labels()
    lo = labels.index(min(labels))
    valley = all(a >= b for a, b in zip(labels[:lo], labels[1 : lo + 1])) and all(
        a <= b for a, b in zip(labels[lo:], labels[lo + 1 :])
    )
    assert matches_conjectured_form(s) == valley


def test_conjectured_pattern_instances():
    for text in ["(-1)(0)(1)", "(-1)(0 -1)(0)(10)(1)", "(-1)(0)^3(110)(1)"]:
        assert CONJECTURED_FORM.matches(parse_sequence(text))
    assert not CONJECTURED_FORM.matches(parse_sequence("(-1)(0)(1 -1)(0)(1)"))


def test_bad_form_candidate_from_1100():
    p = parse_pattern("(-1)(0)[1100](1)")
    outs = {str(apply_move_pattern(p, M3(k))) for k in range(0, len(p.groups) + 3)}
    assert any(not matches_conjectured_form(parse_pattern(t)) for t in outs)


# -- patterns ------------------------------------------------------------------


def test_pattern_moves_m4_m1():
    assert apply_move_pattern(TRIVIAL_PATTERN, MoveSpec("M4")) == TRIVIAL_PATTERN
    p = parse_pattern("(-1)(0,-1)(0)(1,0)(1)")
    assert apply_move_pattern(p, MoveSpec("M1")) == p


def test_pattern_split_range_checked():
    with pytest.raises(PreconditionError):
        apply_move_pattern(TRIVIAL_PATTERN, M2(9))


def test_pattern_matches_instances():
    p = parse_pattern("(-1)(0)(10)(1)")
    for e in (1, 2, 5):
        assert p.matches(p.instance(e))
    assert not p.matches(parse_sequence("(-1)(0)(1)"))
    assert pattern_of(parse_sequence("(-1)(0)^4(10)^3(1)")) == p


def test_subpattern_and_orientation():
    big = parse_pattern("(-1)(0)(10)(1110)(1)")
    assert is_subpattern(parse_pattern("(-1)(10)(1110)(1)"), big)
    assert big.reversed().reversed() == big
    assert big.oriented() == big.reversed().oriented()


# -- reachability --------------------------------------------------------------


def test_reachable_depth_0_and_1():
    r0 = enumerate_reachable(0)
    assert list(r0.items) == [TRIVIAL_PATTERN]
    r1 = enumerate_reachable(1)
    nontrivial = [p for p in r1.maximal() if not p.is_trivial()]
    assert [str(p) for p in nontrivial] == ["(-1)(0)(10)(1)"]
    assert r1.genealogy("(-1)(0)(10)(1)") == (M2(0),)


def test_reachable_depth_3_conjectured():
    for mode in ("pattern", "sequence"):
        r = enumerate_reachable(3, mode=mode)
        assert all(matches_conjectured_form(x) for x in r.items)
        for obj, word in list(r.items.items())[:50]:
            start = TRIVIAL if mode == "sequence" else TRIVIAL_PATTERN
            for m in word:
                start = apply_move_sequence(start, m) if mode == "sequence" else apply_move_pattern(start, m)
            assert r._key(start) == obj


def test_reachable_depth_checked():
    with pytest.raises(PreconditionError):
        enumerate_reachable(99)
    with pytest.raises(PreconditionError):
        enumerate_reachable(1, mode="words")
