"""Acceptance criteria 1-10.

Every test records one PASS/FAIL line, printed in the "acceptance criteria"
section at the end of the pytest run.  Criteria 3 and 8 fail on the data
and are marked strict xfail; the reasons are spelled out in the markers.
"""

import random
import time
from collections import deque

import pytest

from conftest import ACCEPTANCE_LINES, insert_relator, random_word
from hnnpatterns.analysis import (
    almost_convex_audit,
    canonical_json,
    certificate,
    fellow_traveler_audit,
    fftp_constant,
    nonregularity_cutpoints,
)
from hnnpatterns.cayley import build_ball
from hnnpatterns.cli import FINITE_SHADOW
from hnnpatterns.patterns import (
    TRIVIAL_PATTERN,
    MoveSpec,
    Sequence,
    apply_move_pattern,
    apply_move_sequence,
    apply_moves,
    enumerate_reachable,
    matches_conjectured_form,
)
from hnnpatterns.planes import TreeOracle
from hnnpatterns.presentation import (
    GroupPresentation,
    base_word_metric,
    find_pinch,
    free_reduce,
    g11,
    gw,
    inverse_word,
    normalize,
    stable_letter_sequence,
)
from hnnpatterns.strips import survey

TRIALS = 1000


def record(n: int, ok: bool, detail: str) -> None:
    ACCEPTANCE_LINES[n] = f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}"


@pytest.fixture(scope="module")
def survey12():
    return survey(g11(), 12)


# ---------------------------------------------------------------------------


def test_criterion_01_base_metric():
    t0 = time.perf_counter()
    p = GroupPresentation.loads(g11().dumps())  # fresh metric cache
    steps = [(1, 0), (0, 1), (1, 1), (1, -1)]
    steps += [(-x, -y) for x, y in steps]
    dist = {(0, 0): 0}
    q = deque([(0, 0)])
    while q:
        x = q.popleft()
        for s in steps:
            y = (x[0] + s[0], x[1] + s[1])
            if y not in dist and max(abs(y[0]), abs(y[1])) <= 8:
                dist[y] = dist[x] + 1
                q.append(y)
    bad = [v for v, d in dist.items() if base_word_metric(v, p) != d]
    bad += [(2 * i, 0) for i in range(1, 5) if base_word_metric((2 * i, 0), p) != 2 * i]
    elapsed = time.perf_counter() - t0
    ok = not bad and elapsed < 1.0 and len(dist) == 17 * 17
    record(1, ok, f"{len(dist)} lattice points, {len(bad)} mismatches, {elapsed:.3f}s")
    assert ok


@pytest.mark.slow
def test_criterion_02_initial_sequences_g11():
    s = survey(g11(), 10, check_moves=False)
    allowed = {"(-1)(0)(1)", "(-1)(1)"}
    extra = set(s.initial_patterns) - allowed
    ok = not extra and s.initial > 0
    record(2, ok, f"B(10): {s.initial} initial strips, zero runs k = {s.initial_zero_runs}, other forms {sorted(extra)}")
    assert ok


@pytest.mark.xfail(
    strict=True,
    reason="G_W B(8) also realizes the initial class (-1)(0)(10)(1) (e.g. the s-strip through b^3); "
    "confirmed by plain BFS, so the two-class claim does not hold",
)
def test_criterion_03_initial_patterns_gw():
    s = survey(gw(), 8)
    claimed = {"(-1)(0)(1)", "(-1)(10)(1)"}
    # (-1)(1) is the k = 0 instance of (-1)(0)^k(1), not a new class
    found = set(s.initial_patterns) - {"(-1)(1)"}
    extra = sorted(found - claimed)
    ok = found == claimed
    record(3, ok, f"B(8) initial classes {s.initial_patterns}; extra {extra}")
    assert ok


def test_criterion_04_move_table_chain():
    expected = ["(-1)(0)(10)(1)", "(-1)(0)(10)(1110)(1)", "(-1)(0)(10)(1110)(1^7 0)(1)"]
    p = TRIVIAL_PATTERN
    got = []
    for _ in expected:
        p = apply_move_pattern(p, MoveSpec("M2", split=0))
        got.append(str(p))
    ok = got == expected
    record(4, ok, " -> ".join(got))
    assert ok


@pytest.mark.slow
def test_criterion_05_oracle_vs_moves(survey12):
    s = survey12
    ok = s.move_mismatches == 0 and s.move_checks > 0
    record(5, ok, f"B(12): {s.move_checks} plane crossings checked, {s.move_mismatches} mismatches")
    assert ok, s.examples


@pytest.mark.slow
def test_criterion_06_patterns_theorem(survey12):
    s = survey12
    r = enumerate_reachable(8)
    bad = [str(x) for x in r.items if not matches_conjectured_form(x)]
    ok = s.violations == 0 and not bad
    record(6, ok, f"B(12): {s.crossings} strip sequences, {s.violations} violations; "
                  f"depth 8: {len(r)} patterns, {len(bad)} violations")
    assert ok, (s.examples, bad[:5])


def test_criterion_07_cutpoints():
    reps = nonregularity_cutpoints(3, g11())
    got = [r.max_geodesic_k for r in reps]
    ok = got == [1, 3, 7] and all(r.agrees for r in reps)
    cert = certificate("nonreg", "g11", {"n_max": 3}, reps, ok, note=FINITE_SHADOW)
    record(7, ok, f"max k = {got} (finite shadow, n <= 3)")
    assert ok and cert["note"] == FINITE_SHADOW


@pytest.mark.xfail(
    strict=True,
    reason="the displayed words are not unique geodesics (counts 10/22 and 42/489) and their "
    "s-exponent sums differ by 2, so the endpoints are never adjacent",
)
def test_criterion_08_unique_geodesics():
    oracle = TreeOracle(g11())
    reps = [fellow_traveler_audit(n, "g11", oracle) for n in (1, 2)]
    counts = [r.geodesic_counts for r in reps]
    ends = [r.endpoint_distance for r in reps]
    syncs = [r.sync_constant for r in reps]
    ok = all(c == (1, 1) for c in counts) and all(e <= 1 for e in ends) and syncs[1] > syncs[0]
    record(8, ok, f"geodesic counts {counts}, endpoint distances {ends}, sync constants {syncs} (finite shadow)")
    assert ok


@pytest.mark.slow
def test_criterion_09_almost_convexity():
    parts = []
    ok = True
    for name in ("g11", "gw"):
        k = fftp_constant(name)
        ball = build_ball(name, 8)
        reps = [almost_convex_audit(name, n, k=k, ball=ball) for n in range(1, 9)]
        ok = ok and all(r.passed for r in reps)
        worst = [r.min_connecting_length for r in reps]
        parts.append(f"{name}: k={k}, bound {10 * k + 2}, worst length by N=1..8 {worst}")
    record(9, ok, "; ".join(parts))
    assert ok


def test_criterion_10_property_suites():
    rng = random.Random(10)
    britton = relators = 0
    for i in range(TRIALS):
        p = g11() if i % 2 == 0 else gw()
        u = random_word(p, rng, rng.randrange(1, 14))
        w = free_reduce(u + inverse_word(normalize(u, p).to_word(p)))
        if not stable_letter_sequence(w, p) or find_pinch(w, p) is not None:
            britton += 1
        v = random_word(p, rng, rng.randrange(16))
        if normalize(insert_relator(p, v, rng), p) == normalize(v, p):
            relators += 1
    pairing = 0
    for _ in range(TRIALS):
        left = [rng.choice((-1, 0)) for _ in range(rng.randrange(7))]
        right = [rng.choice((0, 1)) for _ in range(rng.randrange(7))]
        k = Sequence(tuple(left + [0] * rng.randrange(3) + right))
        k20 = apply_moves(k, [MoveSpec("M2", split=rng.randrange(-1, len(k.core) + 2)), MoveSpec("M0")])
        cut = MoveSpec("M3", split=len(k20.core))
        pairing += apply_move_sequence(k20, cut) == apply_move_sequence(k20, cut, pairing="far")
    certs = {
        canonical_json(certificate("nonreg", "g11", {"n_max": 3}, nonregularity_cutpoints(3, g11(), TreeOracle(g11())),
                                   True, note=FINITE_SHADOW))
        for _ in range(3)
    }
    ok = britton == relators == pairing == TRIALS and len(certs) == 1
    record(10, ok, f"Britton {britton}/{TRIALS}, relator insertion {relators}/{TRIALS}, "
                   f"M3 pairing {pairing}/{TRIALS}, certificate texts over 3 runs: {len(certs)}")
    assert ok
