"""Exact distances by walking the tree of planes.

Every geodesic crosses the same succession of planes and strips as the
normal form of its endpoint, so the distance function on a plane is fixed
by the distances to the crossing points of the strip used to enter it::

    D(y) = min_k  L(k) + 1 + |y - k*after|

where ``L(k)`` are the labels (distances) of the entry strip and ``after``
is the direction of the strip on the new side.  In the base plane
``D(y) = |y|`` since planes are totally geodesic.

A :class:`PlaneState` stores ``L`` on a finite window holding the strip's
core plus one terminal step at each end.  Outside the window the labels
grow by the terminal slope, and those crossing points can never win the
minimum.  Identical states have isomorphic subtrees, which keeps surveys
of large balls within reach.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional

import numpy as np

from .errors import ResourceError
from .presentation import GroupPresentation, NormalForm, Vector, coset_split, multiplier

TERMINAL_MARGIN = 3


class MetricTable:
    """Base word metric tabulated on the box ``[-W, W]^n``, regrown on demand.

    Letters of a base word commute, so a geodesic can be sorted by
    generator and the metric is an iterated min-plus convolution, one
    generator at a time.  Each convolution is two sweeps along the
    generator's direction.  The grid carries a margin of ``gmax`` times the
    largest distance in the box, which holds every partial sum of a
    sorted geodesic, so the table is exact.
    """

    def __init__(self, p: GroupPresentation, half_width: int = 24):
        self.p = p
        self.n = p.rank
        gens = set()
        for v in p.base_vectors.values():
            v = tuple(v)
            if any(v):
                gens.add(max(v, tuple(-a for a in v)))
        self.generators = sorted(gens)
        self.gmax = max(abs(a) for g in self.generators for a in g)
        unit = [tuple(int(i == j) for j in range(self.n)) for i in range(self.n)]
        self._basis_cost = sum(p.metric(e) for e in unit)
        self.W = 0
        self._build(half_width)

    def _build(self, W: int):
        n = self.n
        G = self.gmax * self._basis_cost * W
        size = 2 * G + 1
        if G >= 30000:
            raise ResourceError(f"base metric table of half width {W} is too large")
        dist = np.full((size,) * n, 30000, dtype=np.int16)
        dist[(G,) * n] = 0
        for gen in self.generators:
            _sweep(dist, gen)
        inner = tuple(slice(G - W, G + W + 1) for _ in range(n))
        self.table = np.ascontiguousarray(dist[inner])
        self.flat = self.table.ravel()
        self.W = W
        side = 2 * W + 1
        self.strides = np.array([side ** (n - 1 - i) for i in range(n)], dtype=np.int64)
        self.offset = int(W * self.strides.sum())

    def ensure(self, m: int):
        """Make the table cover coordinates up to ``m`` in absolute value."""
        if m > self.W:
            self._build(max(2 * self.W, -(-m * 5 // 4)))

    def __call__(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts)
        if pts.size:
            self.ensure(int(np.abs(pts).max()))
        return self.flat[self.index(pts)]

    def index(self, pts: np.ndarray) -> np.ndarray:
        """Flat table index of points already known to lie in the box."""
        return pts @ self.strides + self.offset

    def differences(self, pts: np.ndarray, rungs: np.ndarray) -> np.ndarray:
        """``table[pts[..., None, :] - rungs]`` without building the difference array."""
        if pts.size and rungs.size:
            p = pts.reshape(-1, self.n)
            lo = p.min(axis=0) - rungs.max(axis=0)
            hi = p.max(axis=0) - rungs.min(axis=0)
            self.ensure(int(max(-lo.min(), hi.max())))
        return self.flat[self.index(pts)[..., None] - rungs @ self.strides]

    def ball_points(self, radius: int) -> np.ndarray:
        """Points of the base ball of ``radius``, sorted lexicographically."""
        self.ensure(radius * self.gmax)
        idx = np.argwhere(self.table <= radius)
        return idx - self.W


@dataclass(frozen=True)
class PlaneState:
    """Distance data for one plane, up to translation along the entry line.

    ``entry`` is ``(rule, sign)`` of the stable letter crossed to reach the
    plane, ``None`` for the base plane.  ``labels[k]`` is the distance to the
    entry crossing point at ``k*after`` (plane coordinates).
    """

    entry: Optional[tuple[int, int]] = None
    labels: tuple[int, ...] = ()

    @property
    def floor(self) -> int:
        """Distance from the identity to the nearest point of the plane."""
        return min(self.labels) + 1 if self.labels else 0

    def relative(self) -> tuple["PlaneState", int]:
        """The state with labels shifted to start at minimum 0, and the shift."""
        if not self.labels:
            return self, 0
        m = min(self.labels)
        return PlaneState(self.entry, tuple(v - m for v in self.labels)), m


@dataclass(frozen=True)
class LineLabels:
    """Labels of a line ``c + j*b`` for ``j`` in ``[start, start + len(values))``.

    The window covers the core plus one terminal step on each side, and
    the terminals were checked out to ``checked`` on both sides.
    """

    start: int
    values: tuple[int, ...]
    checked: tuple[int, int] = (0, 0)

    def at(self, j: int) -> int:
        if j < self.start:
            return self.values[0] + (self.start - j)
        end = self.start + len(self.values) - 1
        if j > end:
            return self.values[-1] + (j - end)
        return self.values[j - self.start]

    @property
    def differences(self) -> tuple[int, ...]:
        v = self.values
        return tuple(v[i + 1] - v[i] for i in range(len(v) - 1))


def _sweep(dist: np.ndarray, gen: Vector):
    """In place: ``dist(x) <- min_m dist(x - m*gen) + |m|`` over all integers ``m``."""
    i = next(j for j, x in enumerate(gen) if x)
    if gen[i] < 0:
        gen = tuple(-x for x in gen)
    step = gen[i]
    rest = gen[:i] + gen[i + 1 :]
    A = np.moveaxis(dist, i, 0)
    m = A.shape[1:]
    fwd_src = tuple(slice(max(0, -r), k - max(0, r)) for r, k in zip(rest, m))
    fwd_dst = tuple(slice(max(0, r), k - max(0, -r)) for r, k in zip(rest, m))
    size = A.shape[0]
    for t in range(step, size):
        row = A[t][fwd_dst]
        np.minimum(row, A[t - step][fwd_src] + 1, out=row)
    for t in range(size - 1 - step, -1, -1):
        row = A[t][fwd_src]
        np.minimum(row, A[t + step][fwd_dst] + 1, out=row)


def coset_reps(points: np.ndarray, w: Vector) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized :func:`coset_split`: rows ``r`` and multiples ``k`` with ``g = r + k*w``."""
    i = next(j for j, x in enumerate(w) if x)
    wi = w[i]
    g = points[:, i]
    k = (g - g % abs(wi)) // wi
    return points - k[:, None] * np.asarray(w), k


class PlaneTree:
    """Distance oracle for a strip-equidistant presentation, plane by plane."""

    def __init__(self, p: GroupPresentation, max_window: int = 1 << 14):
        self.p = p
        self.n = p.rank
        self.table = MetricTable(p, 96)
        self.metric = p.metric
        self.max_window = max_window
        self.exits = [(i, e) for i in range(len(p.stable_rules)) for e in (1, -1)]
        self.base = PlaneState()
        for i, e in self.exits:
            if self.metric(p.before_vec(i, e)) != self.metric(p.after_vec(i, e)):
                raise ValueError(f"{p} is not strip equidistant")
        self._slope = {x: self.metric(p.before_vec(*x)) for x in self.exits}
        self._states: dict = {}
        self._rungs: dict = {}

    # -- distances within one plane -----------------------------------------

    def after(self, state: PlaneState) -> Vector:
        return self.p.after_vec(*state.entry)

    def distances(self, state: PlaneState, pts: np.ndarray) -> np.ndarray:
        """Distances from the identity of the plane points ``pts`` (shape ``(..., n)``)."""
        pts = np.asarray(pts, dtype=np.int64)
        if state.entry is None:
            return self.table(pts)
        a = np.asarray(self.after(state), dtype=np.int64)
        k, L = self._useful_rungs(state)
        rungs = k[:, None] * a
        return (self.table.differences(pts, rungs) + L).min(axis=-1) + 1

    def _useful_rungs(self, state: PlaneState) -> tuple[np.ndarray, np.ndarray]:
        """Rungs not dominated by a neighbour one step of ``after`` closer."""
        hit = self._rungs.get(state)
        if hit is None:
            L = np.asarray(state.labels, dtype=np.int64)
            step = self._slope[state.entry]
            keep = np.ones(len(L), dtype=bool)
            keep[1:] &= L[1:] - L[:-1] < step
            keep[:-1] &= L[:-1] - L[1:] < step
            k = np.nonzero(keep)[0]
            hit = (k, L[k])
            if len(self._rungs) > 100_000:
                self._rungs.clear()
            self._rungs[state] = hit
        return hit

    def distance(self, state: PlaneState, y: Vector) -> int:
        return int(self.distances(state, np.array([y]))[0])

    def ball(self, state: PlaneState, radius: int) -> np.ndarray:
        """Points of the plane within ``radius`` of the identity, sorted."""
        if state.entry is None:
            return self.table.ball_points(radius)
        a = np.asarray(self.after(state))
        g = self.table.gmax
        lo = hi = None
        for k, v in enumerate(state.labels):
            r = radius - v - 1
            if r < 0:
                continue
            c = k * a
            lo = c - r * g if lo is None else np.minimum(lo, c - r * g)
            hi = c + r * g if hi is None else np.maximum(hi, c + r * g)
        if lo is None:
            return np.zeros((0, self.n), dtype=np.int64)
        axes = [np.arange(l, h + 1) for l, h in zip(lo, hi)]
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, self.n)
        return grid[self.distances(state, grid) <= radius]

    # -- lines and strips ---------------------------------------------------

    def _extent(self, state: PlaneState, c: np.ndarray) -> np.ndarray:
        """L1 size of the region where the distance function along a line can bend."""
        if state.entry is None:
            return np.abs(c).sum(axis=-1)
        a = np.asarray(self.after(state))
        rungs = self._useful_rungs(state)[0][:, None] * a
        return np.abs(c[:, None, :] - rungs).sum(axis=-1).max(axis=-1)

    def lines_labels(self, state: PlaneState, letter: tuple[int, int], reps: np.ndarray) -> list[LineLabels]:
        """Labels of the lines ``c + j*b`` for every row ``c`` of ``reps``.

        The scan runs past every point where the distance could still bend
        (the L1 extent of the entry window) and then demands
        ``TERMINAL_MARGIN`` further terminal steps on each side; lines that
        fail this are rescanned on a wider window.
        """
        b = np.asarray(self.p.before_vec(*letter), dtype=np.int64)
        reps = np.asarray(reps, dtype=np.int64).reshape(-1, self.n)
        if not len(reps):
            return []
        step = int(np.abs(b[b != 0]).min())
        reach = int(self._extent(state, reps).max()) // step + 2
        out = self._scan(state, b, reps, -reach - TERMINAL_MARGIN, reach + TERMINAL_MARGIN, self._slope[letter])
        return out

    def _scan(self, state, b, reps, lo, hi, slope) -> list[LineLabels]:
        if hi - lo > self.max_window:
            raise ResourceError(f"line window {hi - lo} exceeds {self.max_window}")
        j = np.arange(lo, hi + 1)
        pts = reps[:, None, :] + j[:, None] * b
        vals = self.distances(state, pts)
        d = np.diff(vals, axis=1)
        m = TERMINAL_MARGIN
        ok = (d[:, :m] == -slope).all(axis=1) & (d[:, -m:] == slope).all(axis=1)
        out: list[Optional[LineLabels]] = [None] * len(reps)
        good = np.nonzero(ok)[0]
        if len(good):
            # core = differences strictly inside the terminal runs; keep one terminal step each side
            n = d.shape[1]
            first = (d[good] != -slope).argmax(axis=1)
            last = n - (d[good, ::-1] != slope).argmax(axis=1)
            starts = np.maximum(first - 1, 0)
            ends = np.minimum(last + 1, n) + 1
            for r, a, z in zip(good.tolist(), starts.tolist(), ends.tolist()):
                out[r] = LineLabels(lo + a, tuple(vals[r, a:z].tolist()), (lo, hi))
        bad = np.nonzero(~ok)[0]
        if len(bad):
            width = hi - lo
            wider = self._scan(state, b, reps[bad], lo - width, hi + width, slope)
            for r, lab in zip(bad, wider):
                out[r] = lab
        return out

    def line_labels(self, state: PlaneState, c: Vector, b_letter: tuple[int, int]) -> LineLabels:
        return self.lines_labels(state, b_letter, np.array([c]))[0]

    def child(self, state: PlaneState, exit_letter: tuple[int, int], c: Vector) -> tuple[PlaneState, LineLabels]:
        """Cross the strip of ``exit_letter`` glued along the line through ``c``.

        ``c`` must be the coset representative of the line.  The child's
        coordinates put the rung at ``j = labels.start`` at the origin.
        """
        labels = self.line_labels(state, c, exit_letter)
        return PlaneState(exit_letter, labels.values), labels

    def exit_lines(self, state: PlaneState, radius: int) -> Iterator[tuple[tuple[int, int], np.ndarray]]:
        """Strips leaving the plane whose near side meets the ball of ``radius``.

        Yields ``(letter, reps)`` with the coset representatives of the lines
        sorted lexicographically.  The strip we came in through is excluded.
        """
        pts = self.ball(state, radius)
        back = None
        if state.entry is not None:
            i, e = state.entry
            back = ((i, -e), coset_split((0,) * self.n, self.p.after_vec(i, e))[0])
        for letter in self.exits:
            if not len(pts):
                continue
            reps = np.unique(coset_reps(pts, self.p.before_vec(*letter))[0], axis=0)
            if back is not None and letter == back[0]:
                reps = reps[~(reps == np.asarray(back[1])).all(axis=1)]
            yield letter, reps

    # -- whole-group queries ------------------------------------------------

    def state_of(self, prefix: tuple[int, ...]) -> tuple[PlaneState, Vector]:
        """Plane state for a normal-form prefix, and the offset of its origin."""
        hit = self._states.get(prefix)
        if hit is not None:
            return hit
        n = self.n
        if not prefix:
            out = (self.base, (0,) * n)
        else:
            parent, origin = self.state_of(prefix[: -n - 1])
            c = tuple(a - o for a, o in zip(prefix[-n - 1 : -1], origin))
            code = prefix[-1]
            letter = (code >> 1, -1 if code & 1 else 1)
            c_rep, shift = coset_split(c, self.p.before_vec(*letter))
            state, labels = self.child(parent, letter, c_rep)
            # the normal form crosses at c = c_rep + shift*b, which is its child origin;
            # the state's rung 0 sits at j = labels.start on the line through c_rep
            a = self.p.after_vec(*letter)
            out = (state, tuple((labels.start - shift) * ai for ai in a))
        if len(self._states) > 500_000:
            self._states.clear()
        self._states[prefix] = out
        return out

    def distance_nf(self, g: NormalForm) -> int:
        n = self.n
        state, origin = self.state_of(g.key[:-n])
        y = tuple(a - o for a, o in zip(g.key[-n:], origin))
        return self.distance(state, y)

    def distance_key(self, key: tuple[int, ...]) -> int:
        return self.distance_nf(NormalForm(key, self.n))


@dataclass
class TreeOracle:
    """Distances, geodesic tests and geodesic counts for arbitrary elements.

    Unlike a ball this has no radius limit; its cost grows with the number
    of planes a query touches.
    """

    p: GroupPresentation
    tree: PlaneTree = field(init=False)

    def __post_init__(self):
        self.tree = PlaneTree(self.p)
        self._mult = multiplier(self.p)
        self._counts: dict = {}

    def distance_key(self, key: tuple[int, ...]) -> int:
        return self.tree.distance_key(key)

    def distance_of(self, g: NormalForm) -> int:
        return self.tree.distance_nf(g)

    def geodesic_count_key(self, key: tuple[int, ...]) -> int:
        """Number of geodesic words for the element, summing over last letters."""
        count = self._counts.get(key)
        if count is not None:
            return count
        stack = [key]
        while stack:
            k = stack[-1]
            if k in self._counts:
                stack.pop()
                continue
            d = self.distance_key(k)
            if d == 0:
                self._counts[k] = 1
                stack.pop()
                continue
            preds = []
            for j in range(len(self.p.letters)):
                q = self._mult.apply(k, j)
                if self.distance_key(q) == d - 1:
                    preds.append(q)
            missing = [q for q in preds if q not in self._counts]
            if missing:
                stack.extend(missing)
                continue
            self._counts[k] = sum(self._counts[q] for q in preds)
            stack.pop()
        return self._counts[key]

    def geodesic_count(self, g: NormalForm) -> int:
        return self.geodesic_count_key(g.key)
