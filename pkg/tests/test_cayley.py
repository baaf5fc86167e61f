import itertools
from collections import Counter

import numpy as np
import pytest

from hnnpatterns.cayley import (
    DistanceMap,
    Strip,
    ball_digest,
    build_ball,
    crossing_labels,
    distance,
    extract_sequence,
    geodesic_count,
    is_geodesic,
    prefix_keys,
)
from hnnpatterns.errors import OutOfRadiusError, PreconditionError, ResourceError
from hnnpatterns.patterns import parse_sequence
from hnnpatterns.planes import TreeOracle
from hnnpatterns.presentation import base_word_metric, identity, load_presentation, multiplier, normalize


def naive_ball(p, radius):
    """Dictionary BFS straight on normal-form keys."""
    mult = multiplier(p)
    start = identity(p).key
    dist = {start: 0}
    frontier = [start]
    for r in range(1, radius + 1):
        nxt = []
        for k in frontier:
            for j in range(len(p.letters)):
                q = mult.apply(k, j)
                if q not in dist:
                    dist[q] = r
                    nxt.append(q)
        frontier = nxt
    return dist


def word_counts(p, length):
    """Number of words of each length <= ``length`` ending at each element."""
    mult = multiplier(p)
    counts = Counter()
    layer = Counter({identity(p).key: 1})
    for n in range(1, length + 1):
        nxt = Counter()
        for k, c in layer.items():
            for j in range(len(p.letters)):
                nxt[mult.apply(k, j)] += c
        layer = nxt
        for k, c in layer.items():
            counts[(k, n)] += c
    return counts


# -- the ball ------------------------------------------------------------------


def test_small_balls(G11):
    b0 = build_ball(G11, 0)
    assert len(b0) == 1 and b0.sphere_sizes() == [1]
    b1 = build_ball(G11, 1)
    assert len(b1) == 13
    gens = {normalize((x,), G11).key for x in G11.letters}
    assert len(gens) == 12 and all(b1.distance_key(k) == 1 for k in gens)


@pytest.mark.parametrize("name", ["g11", "gw"])
def test_ball_matches_naive_bfs(name):
    p = load_presentation(name)
    ball = build_ball(p, 4)
    ref = naive_ball(p, 4)
    assert len(ball) == len(ref)
    for k, d in ref.items():
        assert ball.distance_key(k) == d


def test_g11_sphere_sizes(ball5):
    assert ball5.sphere_sizes()[:5] == [1, 12, 84, 556, 3660]


def test_distance_examples(G11, ball5):
    assert distance(ball5, ()) == 0
    assert distance(ball5, "c d") == 2
    assert distance(ball5, "s' a s c'") == 0
    for n in range(5):
        assert distance(ball5, f"b' s^{n}" if n else "b'") == n + 1


def test_out_of_radius_is_an_error(ball5):
    with pytest.raises(OutOfRadiusError):
        distance(ball5, "s^6")


def test_is_geodesic_examples(ball5, oracle):
    for m in (ball5, oracle):
        assert is_geodesic(m, "c^2 b s'")
        assert not is_geodesic(m, "a a'")
        assert not is_geodesic(m, "b' s c^2")


def test_prefix_keys(G11):
    ks = prefix_keys(G11, G11.word("a s a'"))
    assert len(ks) == 4 and ks[0] == identity(G11).key


def test_ball_edges_are_lipschitz(ball5):
    idx = np.flatnonzero(ball5.dist < 5)
    nb = ball5.neighbours(idx)
    d = ball5.dist[idx][:, None]
    assert (nb >= 0).all()
    assert (np.abs(ball5.dist[nb] - d) <= 1).all()


def test_base_plane_is_totally_geodesic(G11, GW, ball5, gw_ball5):
    for p, ball in ((G11, ball5), (GW, gw_ball5)):
        for x in range(-6, 7):
            for y in range(-6, 7):
                d = base_word_metric((x, y), p)
                if d <= ball.radius:
                    assert ball.distance_key((x, y)) == d


# -- geodesic counts -----------------------------------------------------------


def test_geodesic_count_examples(G11, ball5, oracle):
    assert geodesic_count(ball5, identity(G11)) == 1
    two_words = sum(
        1 for x, y in itertools.product(G11.letters, repeat=2) if normalize((x, y), G11) == normalize(G11.word("a^2"), G11)
    )
    assert two_words >= 2  # a a and c d at least
    assert geodesic_count(ball5, "a^2") == two_words == geodesic_count(oracle, "a^2")


@pytest.mark.parametrize("name", ["g11", "gw"])
def test_geodesic_counts_match_word_enumeration(name):
    p = load_presentation(name)
    ball = build_ball(p, 4)
    oracle = TreeOracle(p)
    counts = word_counts(p, 4)
    rows = ball.geodesic_counts()
    for i in range(len(ball)):
        d = int(ball.dist[i])
        key = ball.element(i).key
        expected = counts[(key, d)] if d else 1
        assert rows[i] == expected
        if d >= 3:
            assert oracle.geodesic_count_key(key) == expected


# -- oracle vs ball ------------------------------------------------------------


@pytest.mark.parametrize("name", ["g11", "gw"])
def test_tree_oracle_matches_ball(name, ball5, gw_ball5):
    ball = ball5 if name == "g11" else gw_ball5
    oracle = TreeOracle(ball.p)
    for i in range(len(ball)):
        assert oracle.distance_key(ball.element(i).key) == ball.dist[i]


def test_tree_oracle_on_sphere_6_sample(G11):
    ball = build_ball(G11, 6)
    oracle = TreeOracle(G11)
    S = ball.sphere(6)
    for i in S[:: max(1, len(S) // 3000)]:
        assert oracle.distance_key(ball.element(int(i)).key) == 6


# -- cache files ---------------------------------------------------------------


def test_cache_round_trip(tmp_path, G11, GW):
    ball = build_ball(G11, 3)
    f = tmp_path / "b.npz"
    ball.save(f)
    back = DistanceMap.load(f, G11, radius=3)
    assert ball_digest(back) == ball_digest(ball)
    assert back.distance_key(normalize(G11.word("s t"), G11).key) == 2
    with pytest.raises(ValueError):
        DistanceMap.load(f, GW)
    with pytest.raises(ValueError):
        DistanceMap.load(f, G11, radius=4)


def test_resource_limit_names_completed_radius(G11):
    with pytest.raises(ResourceError) as e:
        build_ball(G11, 4, max_elements=200)
    assert e.value.completed == 2


def test_negative_radius(G11):
    with pytest.raises(PreconditionError):
        build_ball(G11, -1)


# -- strips --------------------------------------------------------------------


def test_strip_after_c2b(G11, oracle):
    strip = Strip.through(G11, "c^2 b", "s")
    labels = crossing_labels(oracle, strip)
    assert labels.terminal_confirmed
    assert extract_sequence(labels) == parse_sequence("(-1)(0)^6(1)")
    # the prefix itself is geodesic and ends on the strip's boundary line
    assert is_geodesic(oracle, "c^2 b s'")


def test_strip_at_identity(G11, ball5):
    strip = Strip.through(G11, (), "s")
    labels = crossing_labels(ball5, strip)
    assert labels.dist_in == tuple(abs(k) for k in range(-5, 6))
    far = labels.dist_out[1:-1]
    assert far == tuple(abs(k) + 1 for k in range(-4, 5))
    assert extract_sequence(labels) == parse_sequence("(-1)(1)")


def test_strips_compare_by_line(G11):
    assert Strip.through(G11, "a^3", "s") == Strip.through(G11, "a'", "s")
    assert Strip.through(G11, "b", "s") != Strip.through(G11, (), "s")
    with pytest.raises(PreconditionError):
        Strip.through(G11, (), "a")


def test_extract_sequence_from_labels():
    assert extract_sequence([4, 3, 3, 3, 3, 3, 3, 3, 4, 5]) == parse_sequence("(-1)(0)^6(1)")
    assert extract_sequence([3, 2, 1, 2, 3]).is_trivial()
    with pytest.raises(PreconditionError):
        extract_sequence([1, 3])


def test_initial_d_strip_after_c2(G11, oracle):
    seq = extract_sequence(crossing_labels(oracle, Strip.through(G11, "c^2", "t'")))
    assert seq.is_trivial() and len(seq.core) % 2 == 0
