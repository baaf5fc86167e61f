"""Finite experiments around geodesics of the groups.

Every experiment returns a small report dataclass; :func:`certificate`
turns any report into a deterministic JSON-ready dict.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence as Seq, Union

import numpy as np

from . import __version__
from .cayley import DistanceMap, build_ball, prefix_keys
from .errors import PreconditionError
from .planes import TreeOracle
from .presentation import (
    GroupPresentation,
    Letter,
    Word,
    format_word,
    identity,
    inverse_word,
    load_presentation,
    multiplier,
    normalize,
    parse_word,
)

MAX_WITNESS_N = 3


def _oracle(p, oracle) -> TreeOracle:
    return oracle if oracle is not None else TreeOracle(load_presentation(p))


def _dist_between(oracle: TreeOracle, u: Seq[Letter], v: Seq[Letter]) -> int:
    """d(u, v) = |u^-1 v| for words u, v."""
    return oracle.distance_key(normalize(inverse_word(u) + tuple(v), oracle.p).key)


def _geodesic(oracle: TreeOracle, word: Seq[Letter]) -> bool:
    return all(oracle.distance_key(k) == t for t, k in enumerate(prefix_keys(oracle.p, word)))


# ---------------------------------------------------------------------------
# cut points


@dataclass
class CutPointReport:
    n: int
    witness_word: str
    max_geodesic_k: int
    expected: int
    agrees: bool
    geodesic_at_max: bool
    geodesic_after_max: bool
    direction: str = "a"


def witness_word(n: int) -> Word:
    return parse_word(f"b' s^{n}") if n else parse_word("b'")


def nonregularity_cutpoints(n_max: int = 3, p: Union[str, GroupPresentation] = "g11",
                            oracle: Optional[TreeOracle] = None, direction: str = "a") -> list[CutPointReport]:
    """Largest ``k`` for which ``b^-1 s^n x^k`` is geodesic, for ``n = 1..n_max``.

    ``x`` is ``direction``.  After ``b^-1 s^n`` the walk stands where the
    ``n``-th strip's far side meets the ``a``-line that carries the next
    strip; that line's sequence is ``(1^(2^n - 1) 0)``, so with ``x = a``
    the cut point is ``2^n - 1``.  Along the ``c``-line (the far side of
    the ``n``-th strip itself) one move fewer has been applied and the cut
    point is ``2^(n-1) - 1``.

    Geodesic words are closed under prefixes, so the largest ``k`` is found
    by bisection.  Distances come from the plane-tree oracle, which follows
    only the planes the word visits.
    """
    if n_max > MAX_WITNESS_N:
        raise PreconditionError(f"n_max={n_max} exceeds the supported {MAX_WITNESS_N}")
    oracle = _oracle(p, oracle)
    c = parse_word(direction)
    if len(c) != 1 or oracle.p.is_stable(c[0]):
        raise PreconditionError(f"direction must be one base letter, got {direction!r}")
    out = []
    for n in range(1, n_max + 1):
        base = witness_word(n)

        def geo(k):
            return _geodesic(oracle, base + c * k)

        if not geo(0):
            raise PreconditionError(f"the witness b^-1 s^{n} is not geodesic")
        lo, hi = 0, 1
        while geo(hi):
            lo, hi = hi, 2 * hi
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if geo(mid):
                lo = mid
            else:
                hi = mid
        expected = 2**n - 1
        out.append(
            CutPointReport(n, format_word(base), lo, expected, lo == expected, geo(lo), geo(lo + 1),
                           format_word(c))
        )
    return out


# ---------------------------------------------------------------------------
# unique geodesics that do not fellow travel


def unique_geodesic_pair(n: int) -> tuple[Word, Word]:
    """The two words ``w``, ``w'`` of the family, built literally."""
    if n < 1:
        raise PreconditionError("n must be at least 1")
    w = [f"b' s^{n} a"] + [f"s' d^{2 ** j}" for j in range(n, -1, -1)]
    wp = ["a"] + [f"d^{2 ** j} s" for j in range(n + 1)] + [f"a s'^{n}"]
    return parse_word(" ".join(w)), parse_word(" ".join(wp))


@dataclass
class FellowTravelReport:
    n: int
    w: str
    w_prime: str
    length: int
    geodesic_counts: tuple[int, int]
    both_geodesic: bool
    both_unique: bool
    endpoint_distance: int
    sync_constant: int
    reversed_sync_constant: int
    kind: str = "synchronous"


def sync_constant(oracle: TreeOracle, u: Seq[Letter], v: Seq[Letter]) -> int:
    """max over t of d(u(t), v(t)), paths held at their endpoints once finished."""
    T = max(len(u), len(v))
    return max(_dist_between(oracle, u[: min(t, len(u))], v[: min(t, len(v))]) for t in range(T + 1))


def fellow_traveler_audit(n: int, p: Union[str, GroupPresentation] = "g11",
                          oracle: Optional[TreeOracle] = None) -> FellowTravelReport:
    if n > MAX_WITNESS_N:
        raise PreconditionError(f"n={n} exceeds the supported {MAX_WITNESS_N}")
    oracle = _oracle(p, oracle)
    w, wp = unique_geodesic_pair(n)
    P = oracle.p
    counts = (oracle.geodesic_count(normalize(w, P)), oracle.geodesic_count(normalize(wp, P)))
    ep = _dist_between(oracle, w, wp)
    sync = sync_constant(oracle, w, wp)
    # walking both words backwards from their endpoints
    rw, rwp = inverse_word(w), inverse_word(wp)
    rsync = max(
        _dist_between(oracle, w + rw[: min(t, len(rw))], wp + rwp[: min(t, len(rwp))])
        for t in range(max(len(w), len(wp)) + 1)
    )
    return FellowTravelReport(
        n=n,
        w=format_word(w),
        w_prime=format_word(wp),
        length=len(w),
        geodesic_counts=counts,
        both_geodesic=_geodesic(oracle, w) and _geodesic(oracle, wp),
        both_unique=counts == (1, 1),
        endpoint_distance=ep,
        sync_constant=sync,
        reversed_sync_constant=rsync,
    )


# ---------------------------------------------------------------------------
# almost convexity


@dataclass
class ConvexityReport:
    presentation: str
    N: int
    k: int
    bound_claimed: int
    C_cap: int
    pairs_at_distance_2_outside: int
    length_histogram: dict
    min_connecting_length: int
    worst_pair: Optional[tuple[str, str]]
    counterexample: Optional[tuple[str, str]] = None

    @property
    def passed(self) -> bool:
        return self.counterexample is None and self.min_connecting_length <= self.C_cap


@dataclass(frozen=True)
class _PairType:
    """A group element ``h`` of length 2 and the first letters of its geodesics."""

    key: tuple[int, ...]
    x: int
    y: int
    mask: int


def _length2_types(p: GroupPresentation, oracle: TreeOracle) -> list[_PairType]:
    mult = multiplier(p)
    L = p.letters
    one = identity(p).key
    types: dict = {}
    for x in range(len(L)):
        for y in range(len(L)):
            key = mult.apply(mult.apply(one, x), y)
            if key in types or oracle.distance_key(key) != 2:
                continue
            mask = 0
            for z in range(len(L)):
                if oracle.distance_key(normalize((L[z].inverse(), L[x], L[y]), p).key) == 1:
                    mask |= 1 << z
            types[key] = _PairType(key, x, y, mask)
    return sorted(types.values(), key=lambda t: t.key)


def sphere_pairs(ball: DistanceMap, N: int, oracle: Optional[TreeOracle] = None, chunk: int = 1 << 15,
                 limit: Optional[int] = None):
    """Every unordered pair of ``S(N)`` at distance 1 or 2, as index arrays.

    Returns ``(pairs_1, pairs_2)`` with rows ``(i, j)``, ``i < j``.  With
    ``limit`` only pairs whose first point is among the first ``limit``
    points of the sphere are listed.
    """
    p = ball.p
    oracle = oracle or TreeOracle(p)
    pk = ball._packer
    S = ball.sphere(N)[:limit]
    one, two = [], []
    types = _length2_types(p, oracle)
    for a in range(0, len(S), chunk):
        part = S[a : a + chunk]
        rows = ball.rows(part)
        nb = ball.neighbours(part)
        for j in range(nb.shape[1]):
            t = nb[:, j]
            ok = (t >= 0) & (part < t)
            ok[ok] &= ball.dist[t[ok]] == N
            one.append(np.stack([part[ok], t[ok]], axis=1))
        for ty in types:
            g2 = pk.apply(pk.apply(rows, ty.x), ty.y)
            t = ball.index(g2)
            ok = (t >= 0) & (part < t)
            ok[ok] &= ball.dist[t[ok]] == N
            two.append(np.stack([part[ok], t[ok]], axis=1))
    cat = lambda xs: np.unique(np.concatenate(xs), axis=0) if xs else np.zeros((0, 2), dtype=np.int64)
    return cat(one), cat(two)


def _hard_pairs(ball: DistanceMap, N: int, types: list[_PairType], chunk: int = 1 << 16):
    """Pairs of S(N) at distance 2 whose midpoints all lie outside B(N).

    A pair ``(g, g*h)`` with ``|h| = 2`` has a midpoint ``g*x`` for each
    first letter ``x`` of a geodesic for ``h``.  Only when every such
    ``g*x`` leaves the ball is ``g*h`` looked up at all.
    """
    pk = ball._packer
    nl = len(ball.p.letters)
    S = ball.sphere(N)
    found: dict[int, list] = {t: [] for t in range(len(types))}
    for a in range(0, len(S), chunk):
        part = S[a : a + chunk]
        rows = ball.rows(part)
        imgs, lins = [], []
        up = np.zeros((len(part), nl), dtype=bool)
        for x in range(nl):
            img = pk.apply(rows, x)
            t = ball.index(img)
            up[:, x] = (t < 0) | (ball.dist[np.maximum(t, 0)] > N)
            imgs.append(img)
            lins.append(None)
        mask = (up.astype(np.int64) << np.arange(nl)).sum(axis=1)
        for ti, ty in enumerate(types):
            c = np.nonzero((mask & ty.mask) == ty.mask)[0]
            if not len(c):
                continue
            mid = imgs[ty.x]
            c = c[mid[c, 0] >= 0]  # midpoints too deep to pack cannot lead back into the ball
            if lins[ty.x] is None:
                lins[ty.x] = pk.linear_hash(mid)
            h = pk.mix(pk.apply_hash(mid[c], lins[ty.x][c], ty.y))
            j = ball.index_hashes(h)
            ok = j >= 0
            ok[ok] &= ball.dist[j[ok]] == N
            c, j = c[ok], j[ok]
            if not len(c):
                continue
            full = pk.apply(mid[c], ty.y)
            good = (ball.keys[j] == pk.pack(full)) & (part[c] < j)
            found[ti].append(np.stack([part[c[good]], j[good]], axis=1))
    return {
        ti: np.concatenate(v) if v else np.zeros((0, 2), dtype=np.int64) for ti, v in found.items()
    }


def _connect_type(ball: DistanceMap, N: int, ty: _PairType, pairs: np.ndarray, oracle: TreeOracle,
                  max_len: int, batch: int = 8192) -> np.ndarray:
    """Length of the shortest path inside B(N) joining each pair ``(g, g*h)``.

    Iterative deepening over relative positions: a path of length ``l``
    from ``g`` to ``g*h`` is a word for ``h``, and the element ``z`` after
    ``t`` letters satisfies ``|z| <= t`` and ``d(z, h) <= l - t``.  For each
    ``z`` one boolean per pair says whether ``g*z`` lies in the ball, and
    reachability is propagated layer by layer for a whole batch of pairs.
    Returns -1 where no path of length ``<= max_len`` exists.
    """
    p = ball.p
    pk = ball._packer
    mult = multiplier(p)
    L = p.letters
    one = identity(p).key
    hword = (L[ty.x], L[ty.y])
    rel_dist: dict = {}

    def to_h(zkey, zword):
        d = rel_dist.get(zkey)
        if d is None:
            d = rel_dist[zkey] = _dist_between(oracle, zword, hword)
        return d

    out = np.full(len(pairs), -1, dtype=np.int64)
    for a in range(0, len(pairs), batch):
        g = pairs[a : a + batch, 0]
        rows0 = ball.rows(g)
        member: dict = {}
        todo = np.ones(len(g), dtype=bool)
        for ell in range(3, max_len + 1):
            layer = {one: (todo.copy(), rows0, ())}
            for t in range(1, ell + 1):
                nxt: dict = {}
                for zkey, (alive, rows, zword) in layer.items():
                    for x in range(len(L)):
                        z2 = mult.apply(zkey, x)
                        w2 = zword + (L[x],)
                        if to_h(z2, w2) > ell - t:
                            continue
                        if z2 in nxt:
                            prev = nxt[z2]
                            nxt[z2] = (prev[0] | (alive & member[z2]), prev[1], prev[2])
                            continue
                        rows2 = pk.apply(rows, x)
                        if z2 not in member:
                            idx = ball.index(rows2)
                            member[z2] = (idx >= 0) & (ball.dist[np.maximum(idx, 0)] <= N)
                        nxt[z2] = (alive & member[z2], rows2, w2)
                layer = {k: v for k, v in nxt.items() if v[0].any()}
            hit = layer.get(ty.key)
            if hit is not None:
                done = hit[0] & todo
                out[a : a + batch][done] = ell
                todo &= ~done
            if not todo.any():
                break
    return out


def almost_convex_audit(p: Union[str, GroupPresentation], N: int, C_cap: Optional[int] = None,
                        k: Optional[int] = None, ball: Optional[DistanceMap] = None,
                        oracle: Optional[TreeOracle] = None) -> ConvexityReport:
    """Worst shortest path inside ``B(N)`` between points of ``S(N)`` at distance <= 2.

    Pairs at distance 1 are joined by their edge.  A pair at distance 2
    with some midpoint in ``B(N)`` is joined by a path of length 2, so only
    pairs whose midpoints all leave the ball are searched.  ``C_cap``
    defaults to ``10k + 2`` with ``k`` the measured base FFTP constant.
    """
    p = load_presentation(p)
    oracle = oracle or TreeOracle(p)
    if k is None:
        k = fftp_constant(p)
    bound = 10 * k + 2
    C_cap = bound if C_cap is None else C_cap
    if ball is None or ball.radius < N:
        ball = build_ball(p, N)
    types = _length2_types(p, oracle)
    hard = _hard_pairs(ball, N, types)
    hist: dict = {}
    worst_pair, counter = None, None
    # pairs that are not hard are joined by a path as long as their distance
    d1, d2 = sphere_pairs(ball, N, oracle, limit=4096)
    worst = 2 if len(d2) else (1 if len(d1) else 0)
    for ti, pairs in hard.items():
        if not len(pairs):
            continue
        lengths = _connect_type(ball, N, types[ti], pairs, oracle, max_len=min(C_cap, 8))
        missing = np.nonzero(lengths < 0)[0]
        for i in missing:
            lengths[i] = _restricted_bfs(ball, N, int(pairs[i, 0]), int(pairs[i, 1]), C_cap)
        for v, c in zip(*np.unique(lengths, return_counts=True)):
            hist[int(v)] = hist.get(int(v), 0) + int(c)
        if (lengths < 0).any() and counter is None:
            i = int(np.nonzero(lengths < 0)[0][0])
            counter = tuple(ball.element(int(x)).format(p) for x in pairs[i])
        m = int(lengths.max())
        if m > worst or (m == worst and worst_pair is not None and tuple(pairs[lengths == m][0]) < worst_pair):
            worst = m
            worst_pair = tuple(int(x) for x in pairs[np.nonzero(lengths == m)[0][0]])
    names = tuple(ball.element(i).format(p) for i in worst_pair) if worst_pair else None
    return ConvexityReport(
        presentation=p.name,
        N=N,
        k=k,
        bound_claimed=bound,
        C_cap=C_cap,
        pairs_at_distance_2_outside=int(sum(len(v) for v in hard.values())),
        length_histogram=dict(sorted(hist.items())),
        min_connecting_length=worst,
        worst_pair=names,
        counterexample=counter,
    )


def _restricted_bfs(ball: DistanceMap, N: int, i: int, j: int, cap: int) -> int:
    """Shortest path from ball element ``i`` to ``j`` through ``B(N)``, -1 beyond ``cap``."""
    seen = {i: 0}
    frontier = np.array([i])
    for r in range(1, cap + 1):
        nb = ball.neighbours(frontier).ravel()
        nb = np.unique(nb[nb >= 0])
        nb = nb[ball.dist[nb] <= N]
        new = [x for x in nb.tolist() if x not in seen]
        if j in new:
            return r
        for x in new:
            seen[x] = r
        if not new:
            return -1
        frontier = np.array(new)
    return -1


# ---------------------------------------------------------------------------
# falsification by fellow traveler, in the base group


@dataclass
class FFTPReport:
    presentation: str
    k: int
    L_max: int
    passed: bool
    non_geodesic_words: int
    counterexample: Optional[str] = None
    sampled: int = 0


def _fftp_automaton(p: GroupPresentation, k: int):
    """Step function for the set of (offset, stopped) states of a shorter companion word.

    ``offset`` is the companion's position minus the word's position; it
    must stay within distance ``k``.  A companion that has stopped stays at
    the common endpoint while the word keeps moving.
    """
    gens = sorted({v for _, vec in p.base_gens for v in (tuple(vec), tuple(-a for a in vec))})
    metric = p.metric

    def step(states: frozenset, x: tuple[int, ...]) -> frozenset:
        out = set()
        for z, stopped in states | {(z, True) for z, s in states if not s}:
            if stopped:
                cand = [tuple(a - b for a, b in zip(z, x))]
            else:
                cand = [tuple(a + c - b for a, b, c in zip(z, x, y)) for y in gens]
            for z2 in cand:
                if metric(z2) <= k:
                    out.add((z2, stopped))
        return frozenset(out)

    return step


def fftp_base_check(p: Union[str, GroupPresentation], k: int, L_max: int = 8, samples: int = 0,
                    sample_length: Optional[int] = None, seed: int = 0) -> FFTPReport:
    """Does every non-geodesic base word of length <= L_max have a shorter k-fellow traveler?

    The condition only depends on the word's endpoint and the set of
    states of the companion automaton, so words are grouped by that pair
    and each group is decided once.  ``samples`` extra random words of
    length ``sample_length`` are checked directly.
    """
    p = load_presentation(p)
    step = _fftp_automaton(p, k)
    letters = [(f"{name}{'' if s > 0 else chr(39)}", tuple(s * a for a in vec))
               for name, vec in p.base_gens for s in (1, -1)]
    zero = (0,) * p.rank
    start = frozenset({(zero, False)})
    accept = (zero, True)
    layer = {(zero, start): (1, ())}
    bad_count = 0
    counter = None
    for L in range(1, L_max + 1):
        nxt: dict = {}
        for (end, states), (count, word) in sorted(layer.items(), key=lambda kv: kv[1][1]):
            for name, v in letters:
                e2 = tuple(a + b for a, b in zip(end, v))
                key = (e2, step(states, v))
                if key in nxt:
                    nxt[key] = (nxt[key][0] + count, nxt[key][1])
                else:
                    nxt[key] = (count, word + (name,))
        layer = nxt
        for (end, states), (count, word) in layer.items():
            if p.metric(end) < L:
                bad_count += count
                if accept not in states and counter is None:
                    counter = " ".join(word)
    sampled = 0
    if samples and counter is None:
        rng = random.Random(seed)
        n = sample_length or L_max + 4
        for _ in range(samples):
            word = [rng.choice(letters) for _ in range(n)]
            end, states = zero, start
            for _, v in word:
                end = tuple(a + b for a, b in zip(end, v))
                states = step(states, v)
            sampled += 1
            if p.metric(end) < n and accept not in states:
                counter = " ".join(name for name, _ in word)
                break
    return FFTPReport(p.name, k, L_max, counter is None, bad_count, counter, sampled)


def fftp_constant(p: Union[str, GroupPresentation], L_max: int = 8, k_max: int = 6) -> int:
    """Smallest k passing :func:`fftp_base_check` at ``L_max``."""
    for k in range(k_max + 1):
        if fftp_base_check(p, k, L_max).passed:
            return k
    raise PreconditionError(f"no FFTP constant up to {k_max}")


# ---------------------------------------------------------------------------
# certificates


def _plain(obj):
    if hasattr(obj, "__dataclass_fields__"):
        d = asdict(obj)
        for name in ("passed",):
            if hasattr(obj, name) and name not in d:
                d[name] = getattr(obj, name)
        return _plain(d)
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    return obj


def certificate(experiment: str, p: Union[str, GroupPresentation], parameters: dict, results,
                passed: bool, radius: Optional[int] = None, note: Optional[str] = None) -> dict:
    """A deterministic record of one experiment, with a hash over its content."""
    p = load_presentation(p)
    body = {
        "experiment": experiment,
        "tool": "hnnpatterns",
        "version": __version__,
        "presentation": p.name,
        "presentation_digest": p.digest,
        "radius": radius,
        "parameters": _plain(parameters),
        "results": _plain(results),
        "passed": bool(passed),
    }
    if note:
        body["note"] = note
    body["sha256"] = hashlib.sha256(canonical_json(body).encode()).hexdigest()
    return body


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def verify_certificate(cert: dict) -> bool:
    body = {k: v for k, v in cert.items() if k != "sha256"}
    return hashlib.sha256(canonical_json(body).encode()).hexdigest() == cert.get("sha256")
