import numpy as np
import pytest

from hnnpatterns.cayley import Strip, build_ball, crossing_labels, extract_sequence
from hnnpatterns.patterns import MoveSpec, matches_conjectured_form, parse_sequence
from hnnpatterns.strips import intersection, iter_crossings, survey


def test_radius_2_only_trivial_sequences(G11):
    s = survey(G11, 2, keep_sequences=True)
    assert s.passed
    assert all(parse_sequence(q).is_trivial() for q in s.sequences)
    assert set(s.initial_patterns) == {"(-1)(0)(1)", "(-1)(1)"}


def test_g11_survey_radius_6(G11):
    s = survey(G11, 6)
    assert s.violations == 0 and s.move_mismatches == 0
    assert s.move_checks == s.crossings - s.initial > 0
    assert s.initial_zero_runs == [0, 1, 2, 4, 6, 8, 10]


def test_survey_is_deterministic(G11):
    a = survey(G11, 4, keep_sequences=True)
    b = survey(G11, 4, keep_sequences=True)
    assert a == b


def test_gw_initial_classes_radius_4(GW):
    s = survey(GW, 4)
    assert set(s.initial_patterns) == {"(-1)(0)(1)", "(-1)(10)(1)", "(-1)(1)", "(-1)(0)(10)(1)"}
    assert s.move_checks == 0  # no move table for G_W


def test_gw_has_non_conjectured_strips(GW):
    """Plain BFS shows a label bump on a G_W strip, so the survey must report it."""
    ball = build_ball(GW, 8)
    g = ball.p.word("a^-4 t s' a^-2")
    labels = crossing_labels(ball, Strip.through(GW, g, "t"), window=(-3, 5))
    assert labels.dist_in == (8, 7, 6, 5, 6, 5, 6, 7, 8)
    assert not matches_conjectured_form(extract_sequence(labels))
    assert survey(GW, 6).violations > 0


def test_exit_labels_agree_with_ball(G11):
    """Every crossing of B(4) read by the plane tree matches a BFS ball around it."""
    ball = build_ball(G11, 5)
    n = 0
    for cr in iter_crossings(G11, 3):
        if cr.initial:
            vals = cr.labels.values
            # initial lines live in the base plane: compare with the ball directly
            b = np.array(cr.c)
            step = np.array(G11.before_vec(*cr.letter))
            for j, v in enumerate(vals):
                pt = tuple(int(x) for x in b + (cr.labels.start + j) * step)
                if G11.metric(pt) <= 5:
                    assert ball.distance_key(pt) == v
                    n += 1
    assert n > 50


def test_intersection():
    assert intersection((1, 0), (1, 1), (0, 3)) is not None
    assert intersection((1, 0), (1, 0), (0, 1)) is None


def test_move_spec_text():
    assert str(MoveSpec("M2", split=3)) == "M2@3"
    assert str(MoveSpec("M1", zeros=2)) == "M1+2"
    assert str(MoveSpec("M0")) == "M0"
