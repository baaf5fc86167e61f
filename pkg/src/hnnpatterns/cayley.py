"""Exact balls in the Cayley graph, and the strips seen from them.

A ball is built breadth first over packed normal forms.  Every element is
one fixed-width row ``[depth, g0, code1, g1, ..., 0 ...]`` of small ints;
rows are stored big-endian with an offset so that comparing the raw bytes
compares the rows lexicographically.  Sorting, deduplication and lookups
are then plain numpy operations on a void view.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Protocol, Sequence as Seq, Union

import numpy as np

from .errors import OutOfRadiusError, PreconditionError, ResourceError
from .patterns import Sequence, labels_to_core
from .planes import TreeOracle, coset_reps
from .presentation import (
    GroupPresentation,
    Letter,
    NormalForm,
    Vector,
    coset_split,
    load_presentation,
    multiplier,
    normalize,
)

MAX_RADIUS = 16
MAX_ELEMENTS = 40_000_000
_CHUNK = 1 << 17
_OFFSET = 1 << 15


# ---------------------------------------------------------------------------
# packed rows


class _Packer:
    """Conversion between flat normal-form keys and fixed-width packed rows."""

    def __init__(self, p: GroupPresentation, radius: int):
        self.p = p
        self.n = p.rank
        self.radius = radius
        self.width = 1 + self.n + (self.n + 1) * radius
        self.dtype = np.dtype((np.void, 2 * self.width))
        self.actions = multiplier(p).actions
        rng = np.random.default_rng(20240601)
        self._mult = rng.integers(1, 1 << 63, size=self.width, dtype=np.uint64) | np.uint64(1)

    def pack(self, rows: np.ndarray) -> np.ndarray:
        if rows.size and (rows.min() < -_OFFSET or rows.max() >= _OFFSET):
            raise ResourceError("normal form coordinates exceed 16 bits")
        b = (rows + _OFFSET).astype(">u2")
        return np.ascontiguousarray(b).view(self.dtype).ravel()

    def unpack(self, packed: np.ndarray) -> np.ndarray:
        raw = np.ascontiguousarray(packed).view(">u2").reshape(-1, self.width)
        return raw.astype(np.int32) - _OFFSET

    def row(self, key: Seq[int]) -> np.ndarray:
        depth = (len(key) - self.n) // (self.n + 1)
        if depth > self.radius:
            return None
        r = np.zeros(self.width, dtype=np.int32)
        r[0] = depth
        r[1 : 1 + len(key)] = key
        return r

    def key(self, row: np.ndarray) -> tuple[int, ...]:
        depth = int(row[0])
        return tuple(int(x) for x in row[1 : 1 + self.n + depth * (self.n + 1)])

    def apply(self, rows: np.ndarray, j: int) -> np.ndarray:
        """Right-multiply every row by the ``j``-th letter."""
        depth = rows[:, 0]
        if not len(rows):
            return rows.copy()
        lo, hi = int(depth.min()), int(depth.max())
        if lo == hi and lo >= 0:
            return self._apply_depth(rows, lo, j)
        out = rows.copy()
        # rows of depth -1 stand for elements outside the packing and stay so
        if (depth[1:] >= depth[:-1]).all():
            cuts = np.searchsorted(depth, np.arange(max(lo, 0), hi + 2))
            for d, a, b in zip(range(max(lo, 0), hi + 1), cuts[:-1], cuts[1:]):
                if b > a:
                    out[a:b] = self._apply_depth(rows[a:b], d, j)
            return out
        for d in range(max(lo, 0), hi + 1):
            sel = np.nonzero(depth == d)[0]
            if len(sel):
                out[sel] = self._apply_depth(rows[sel], d, j)
        return out

    def apply_hash(self, rows: np.ndarray, lin: np.ndarray, j: int) -> np.ndarray:
        """Linear hashes of ``rows * letter_j`` computed from ``lin = linear_hash(rows)``.

        Only the depth, the last code and the last segment of each row are
        read.  Rows that would outgrow the packing get hash 0.
        """
        n = self.n
        C = self._mult
        kind, data = self.actions[j]
        depth = rows[:, 0].astype(np.int64)
        c = 1 + depth * (n + 1)
        ar = np.arange(n)
        if kind == "base":
            return lin + (C[c[:, None] + ar] * np.asarray(data, dtype=np.int64).astype(np.uint64)).sum(axis=1)
        code, inv_code, before, after = data
        after = np.asarray(after, dtype=np.int64)
        last = rows[np.arange(len(rows))[:, None], c[:, None] + ar].astype(np.int64)
        rep, k = coset_reps(last, before)
        prev_code = rows[np.arange(len(rows)), np.maximum(c - 1, 0)]
        pinch = (depth > 0) & (prev_code == inv_code) & ~rep.any(axis=1)
        u = np.uint64
        drop_last = (C[c[:, None] + ar] * last.astype(u)).sum(axis=1)
        # pinch: remove code and last segment, add k*after to the previous segment
        h_pinch = (
            lin
            - drop_last
            - C[np.maximum(c - 1, 0)] * u(inv_code)
            - C[0]
            + (C[np.maximum(c - n - 1, 0)[:, None] + ar] * (k[:, None] * after).astype(u)).sum(axis=1)
        )
        # push: last segment -> rep, then code and k*after
        room = depth < self.radius
        cc = np.where(room, c, 0)
        h_push = (
            lin
            - drop_last
            + (C[cc[:, None] + ar] * rep.astype(u)).sum(axis=1)
            + C[np.where(room, c + n, 0)] * u(code)
            + (C[np.where(room, c + n + 1, 0)[:, None] + ar] * (k[:, None] * after).astype(u)).sum(axis=1)
            + C[0]
        )
        return np.where(pinch, h_pinch, np.where(room, h_push, u(0)))

    def linear_hash(self, rows: np.ndarray) -> np.ndarray:
        return rows.astype(np.int64).astype(np.uint64) @ self._mult[: rows.shape[1]]

    @staticmethod
    def mix(lin: np.ndarray) -> np.ndarray:
        h = lin ^ (lin >> np.uint64(31))
        return h * np.uint64(0x9E3779B97F4A7C15)

    def _apply_depth(self, rows: np.ndarray, d: int, j: int) -> np.ndarray:
        n = self.n
        kind, data = self.actions[j]
        c = 1 + d * (n + 1)  # first column of the last base segment
        out = rows.copy()
        last = rows[:, c : c + n]
        if kind == "base":
            out[:, c : c + n] += np.asarray(data, dtype=rows.dtype)
            return out
        code, inv_code, before, after = data
        after = np.asarray(after, dtype=rows.dtype)
        rep, k = coset_reps(last, before)
        k = k.astype(rows.dtype)
        if d > 0:
            pinch = (rows[:, c - 1] == inv_code) & ~rep.any(axis=1)
        else:
            pinch = np.zeros(len(rows), dtype=bool)
        if pinch.any():
            pr = np.nonzero(pinch)[0]
            out[pr, c - n - 1 : c - 1] += k[pr, None] * after
            out[pr, c - 1 : c + n] = 0
            out[pr, 0] -= 1
        q = np.nonzero(~pinch)[0]
        if len(q):
            if d >= self.radius:
                # no room for another stable letter; depth -1 marks the row absent
                out[q, 0] = -1
            else:
                out[q, c : c + n] = rep[q]
                out[q, c + n] = code
                out[q, c + n + 1 : c + 2 * n + 1] = k[q, None] * after
                out[q, 0] += 1
        return out

    def hash(self, rows: np.ndarray) -> np.ndarray:
        """A 64-bit mix of every row; equal rows hash equally."""
        return self.mix(self.linear_hash(rows))


def _member(sorted_keys: np.ndarray, queries: np.ndarray) -> np.ndarray:
    """Index of every query in a sorted packed array, -1 where absent."""
    if not len(sorted_keys):
        return np.full(len(queries), -1, dtype=np.int64)
    pos = np.searchsorted(sorted_keys, queries)
    pos_c = np.minimum(pos, len(sorted_keys) - 1)
    hit = sorted_keys[pos_c] == queries
    return np.where(hit, pos_c, -1)


# ---------------------------------------------------------------------------
# the ball


@dataclass
class DistanceMap:
    """The ball ``B(radius)``: every element with its distance from the identity.

    ``keys`` is sorted; ``dist[i]`` belongs to ``keys[i]``.
    """

    p: GroupPresentation
    radius: int
    keys: np.ndarray
    dist: np.ndarray
    _packer: _Packer = field(repr=False, default=None)
    _counts: Optional[np.ndarray] = field(repr=False, default=None)
    _hashes: Optional[tuple] = field(repr=False, default=None)

    def __post_init__(self):
        if self._packer is None:
            self._packer = _Packer(self.p, self.radius)

    def __len__(self):
        return len(self.keys)

    def __contains__(self, g) -> bool:
        return self._index_key(_key_of(g)) >= 0

    def sphere_sizes(self) -> list[int]:
        return np.bincount(self.dist, minlength=self.radius + 1).tolist()

    def _index_key(self, key: Seq[int]) -> int:
        row = self._packer.row(key)
        if row is None:
            return -1
        return int(_member(self.keys, self._packer.pack(row[None, :]))[0])

    def index(self, rows: np.ndarray) -> np.ndarray:
        """Positions of unpacked rows in the ball, -1 where outside."""
        hs, perm = self._hash_index()
        if perm is None:
            return _member(self.keys, self._packer.pack(rows))
        idx = self.index_hashes(self._packer.hash(rows))
        w = np.nonzero(idx >= 0)[0]
        if len(w):
            # confirm the match so that a hash collision can never fake membership
            bad = self.keys[idx[w]] != self._packer.pack(rows[w])
            idx[w[bad]] = -1
        return idx

    def index_hashes(self, h: np.ndarray) -> np.ndarray:
        """Candidate positions for mixed row hashes, -1 where surely absent.

        A hit is unconfirmed: callers must compare keys when a false match
        would matter.
        """
        hs, perm = self._hash_index()
        if perm is None:
            raise ResourceError("hash collision inside the ball; use index()")
        # sorted queries keep the binary searches cache friendly
        order = np.argsort(h)
        pos = np.empty(len(h), dtype=np.int64)
        pos[order] = np.searchsorted(hs, h[order])
        pos = np.minimum(pos, len(hs) - 1)
        hit = hs[pos] == h
        return np.where(hit, perm[pos], -1)

    def _hash_index(self):
        if self._hashes is None:
            parts = [self._packer.hash(self.rows(slice(a, a + _CHUNK))) for a in range(0, len(self.keys), _CHUNK)]
            h = np.concatenate(parts)
            perm = np.argsort(h, kind="stable")
            hs = h[perm]
            if (hs[1:] == hs[:-1]).any():
                perm = None  # collision inside the ball: fall back to exact search
            self._hashes = (hs, perm)
        return self._hashes

    def rows(self, idx=None) -> np.ndarray:
        keys = self.keys if idx is None else self.keys[idx]
        return self._packer.unpack(keys)

    def distance_key(self, key: Seq[int]) -> int:
        i = self._index_key(key)
        if i < 0:
            raise OutOfRadiusError(f"element lies outside B({self.radius})")
        return int(self.dist[i])

    def element(self, i: int) -> NormalForm:
        return NormalForm(self._packer.key(self.rows([i])[0]), self.p.rank)

    def sphere(self, r: int) -> np.ndarray:
        """Indices of the elements at distance exactly ``r``, in key order."""
        return np.nonzero(self.dist == r)[0]

    def neighbours(self, idx: np.ndarray) -> np.ndarray:
        """``out[i, j]`` is the index of ``element(idx[i]) * letter_j``, or -1."""
        rows = self.rows(idx)
        cols = []
        for j in range(len(self.p.letters)):
            img = self._packer.apply(rows, j)
            cols.append(self.index(img))
        return np.stack(cols, axis=1) if cols else np.zeros((len(idx), 0), dtype=np.int64)

    def geodesic_counts(self) -> np.ndarray:
        """Number of geodesic words to every element of the ball (int64)."""
        if self._counts is None:
            counts = np.zeros(len(self.keys), dtype=np.int64)
            counts[self.sphere(0)] = 1
            for r in range(1, self.radius + 1):
                src = self.sphere(r - 1)
                for a in range(0, len(src), _CHUNK):
                    part = src[a : a + _CHUNK]
                    nb = self.neighbours(part)
                    for j in range(nb.shape[1]):
                        t = nb[:, j]
                        ok = t >= 0
                        ok[ok] &= self.dist[t[ok]] == r
                        np.add.at(counts, t[ok], counts[part[ok]])
            if (counts <= 0).any():
                raise ResourceError("geodesic count overflow")
            self._counts = counts
        return self._counts

    # -- cache files ------------------------------------------------------

    def save(self, path: Union[str, Path]) -> None:
        meta = np.frombuffer(self.p.dumps().encode(), dtype=np.uint8)
        np.savez_compressed(
            path,
            keys=np.ascontiguousarray(self.keys).view(np.uint8),
            dist=self.dist,
            radius=np.array(self.radius),
            digest=np.frombuffer(self.p.digest.encode(), dtype=np.uint8),
            presentation=meta,
        )

    @classmethod
    def load(cls, path: Union[str, Path], p: Union[str, GroupPresentation, None] = None,
             radius: Optional[int] = None) -> "DistanceMap":
        """Read a cached ball; ``p`` and ``radius`` are checked when given."""
        with np.load(path) as z:
            stored = GroupPresentation.loads(z["presentation"].tobytes().decode())
            digest = z["digest"].tobytes().decode()
            r = int(z["radius"])
            if digest != stored.digest:
                raise ValueError("cache file is corrupt: presentation digest mismatch")
            if p is not None and load_presentation(p).digest != digest:
                raise ValueError("cache file belongs to a different presentation")
            if radius is not None and radius != r:
                raise ValueError(f"cache file holds B({r}), not B({radius})")
            packer = _Packer(stored, r)
            keys = z["keys"].view(packer.dtype).ravel()
            return cls(stored, r, keys, z["dist"], packer)


def build_ball(p: Union[str, GroupPresentation], radius: int, max_radius: int = MAX_RADIUS,
               max_elements: int = MAX_ELEMENTS) -> DistanceMap:
    """Breadth-first search of the Cayley graph out to ``radius``.

    Raises :class:`ResourceError` (with ``completed`` set to the largest
    radius finished) when the ball outgrows ``max_elements``.
    """
    p = load_presentation(p)
    if radius < 0:
        raise PreconditionError("radius must be non-negative")
    if radius > max_radius:
        raise ResourceError(f"radius {radius} exceeds the limit {max_radius}", completed=None)
    packer = _Packer(p, radius)
    spheres = [packer.pack(np.zeros((1, packer.width), dtype=np.int32))]
    total = 1
    letters = range(len(p.letters))
    for r in range(1, radius + 1):
        prev = spheres[-1]
        older = spheres[-2] if len(spheres) > 1 else prev[:0]
        parts = []
        for a in range(0, len(prev), _CHUNK):
            rows = packer.unpack(prev[a : a + _CHUNK])
            imgs = np.unique(np.concatenate([packer.pack(packer.apply(rows, j)) for j in letters]))
            keep = (_member(prev, imgs) < 0) & (_member(older, imgs) < 0)
            parts.append(imgs[keep])
            if total + sum(len(x) for x in parts) > max_elements:
                raise ResourceError(
                    f"B({r}) exceeds {max_elements} elements; B({r - 1}) was completed", completed=r - 1
                )
        new = np.unique(np.concatenate(parts)) if parts else prev[:0]
        spheres.append(new)
        total += len(new)
    keys = np.concatenate(spheres)
    dist = np.concatenate([np.full(len(s), r, dtype=np.int16) for r, s in enumerate(spheres)])
    order = np.argsort(keys, kind="stable")
    return DistanceMap(p, radius, keys[order], dist[order], packer)


# ---------------------------------------------------------------------------
# queries


class DistanceSource(Protocol):
    p: GroupPresentation

    def distance_key(self, key: Seq[int]) -> int: ...


def _key_of(g) -> tuple[int, ...]:
    return tuple(g.key) if isinstance(g, NormalForm) else tuple(g)


def _word(p: GroupPresentation, w) -> tuple[Letter, ...]:
    return p.word(w) if isinstance(w, str) else tuple(w)


def distance(m: DistanceSource, w) -> int:
    """Word-metric length of the element a word (or normal form) represents."""
    if isinstance(w, NormalForm):
        return m.distance_key(w.key)
    return m.distance_key(normalize(_word(m.p, w), m.p).key)


def prefix_keys(p: GroupPresentation, word: Seq[Letter]) -> list[tuple[int, ...]]:
    """Normal-form keys of every prefix of ``word``, the empty prefix first."""
    mult = multiplier(p)
    key = (0,) * p.rank
    out = [key]
    for letter in word:
        key = mult.apply_letter(key, letter)
        out.append(key)
    return out


def is_geodesic(m: DistanceSource, w) -> bool:
    word = _word(m.p, w)
    return all(m.distance_key(k) == t for t, k in enumerate(prefix_keys(m.p, word)))


def geodesic_count(m: Union[DistanceMap, TreeOracle], g) -> int:
    """Number of geodesic words from the identity to ``g``."""
    if not isinstance(g, NormalForm):
        g = normalize(_word(m.p, g), m.p)
    if isinstance(m, DistanceMap):
        i = m._index_key(g.key)
        if i < 0:
            raise OutOfRadiusError(f"element lies outside B({m.radius})")
        return int(m.geodesic_counts()[i])
    return m.geodesic_count(g)


# ---------------------------------------------------------------------------
# strips


@dataclass(frozen=True)
class Strip:
    """The strip of ``rule^sign`` glued along the line ``anchor * axis^k``.

    ``anchor`` is canonicalized to the coset representative of its line,
    so equal strips compare equal.  ``orientation`` -1 reads the line
    backwards.
    """

    p: GroupPresentation = field(repr=False, compare=False)
    rule: int
    sign: int
    anchor: NormalForm
    orientation: int = 1

    @classmethod
    def through(cls, p: GroupPresentation, g, letter: Union[str, Letter], orientation: int = 1) -> "Strip":
        """The strip crossed by the edge ``g -> g*letter``."""
        p = load_presentation(p)
        if isinstance(letter, str):
            (letter,) = p.word(letter)
        if not p.is_stable(letter):
            raise PreconditionError(f"{letter} is not a stable letter")
        if not isinstance(g, NormalForm):
            g = normalize(_word(p, g), p)
        i = p.stable_index[letter.name]
        rep, _ = coset_split(g.last, p.before_vec(i, letter.sign))
        anchor = NormalForm(g.key[: -p.rank] + rep, p.rank)
        return cls(p, i, letter.sign, anchor, orientation)

    @property
    def axis(self) -> Vector:
        return self.p.before_vec(self.rule, self.sign)

    @property
    def letter(self) -> Letter:
        return Letter(self.p.stable_rules[self.rule].name, self.sign)

    def point(self, k: int) -> tuple[int, ...]:
        """Key of the crossing point ``anchor * axis^(orientation*k)``."""
        n = self.p.rank
        a = self.axis
        last = self.anchor.key[-n:]
        return self.anchor.key[:-n] + tuple(x + self.orientation * k * y for x, y in zip(last, a))

    def far_point(self, k: int) -> tuple[int, ...]:
        return multiplier(self.p).apply_letter(self.point(k), self.letter)


@dataclass(frozen=True)
class CrossingLabels:
    strip: Strip
    window: tuple[int, int]
    dist_in: tuple[int, ...]
    dist_out: tuple[int, ...]
    terminal_confirmed: bool = False

    @property
    def truncated(self) -> bool:
        return not self.terminal_confirmed


def _terminal(d: Seq[int], slope: int, margin: int = 2) -> bool:
    if len(d) < 2 * margin:
        return False
    return all(x == -slope for x in d[:margin]) and all(x == slope for x in d[-margin:])


def crossing_labels(m: DistanceSource, strip: Strip, window: Optional[tuple[int, int]] = None) -> CrossingLabels:
    """Distances to the crossing points ``k`` in ``window`` on both sides of a strip.

    Without a window a ball uses the widest one around the point nearest
    the identity whose points all lie in the ball, and a tree oracle
    widens until both terminals show.  The result says whether both
    terminal runs were seen.
    """
    slope = m.p.metric(strip.axis)

    def dist(k):
        try:
            return m.distance_key(strip.point(k))
        except OutOfRadiusError:
            return None

    if window is None:
        if isinstance(m, DistanceMap):
            # the line meets B(R) in an interval; find it from the anchor outwards
            reach = m.radius + 1
            ks = [k for k in range(-4 * reach - 8, 4 * reach + 9) if dist(k) is not None]
            if not ks:
                raise OutOfRadiusError("strip lies entirely outside the ball")
            window = (min(ks), max(ks))
        else:
            w = 8
            while True:
                vals = [dist(k) for k in range(-w, w + 1)]
                d = [b - a for a, b in zip(vals, vals[1:])]
                if _terminal(d, slope, 3) or w > 1 << 14:
                    break
                w *= 2
            window = (-w, w)
    lo, hi = window
    vals = [dist(k) for k in range(lo, hi + 1)]
    if any(v is None for v in vals):
        raise OutOfRadiusError("window leaves the ball")
    outs = []
    for k in range(lo, hi + 1):
        try:
            outs.append(m.distance_key(strip.far_point(k)))
        except OutOfRadiusError:
            outs.append(-1)
    d = [b - a for a, b in zip(vals, vals[1:])]
    return CrossingLabels(strip, (lo, hi), tuple(vals), tuple(outs), _terminal(d, slope))


def extract_sequence(labels: Union[CrossingLabels, Seq[int]]) -> Sequence:
    """The sequence of a strip: differences of adjacent labels, trimmed."""
    if isinstance(labels, CrossingLabels):
        vals, truncated = labels.dist_in, labels.truncated
        if labels.strip.p.metric(labels.strip.axis) != 1:
            raise PreconditionError("sequences need an axis of length 1")
    else:
        vals, truncated = tuple(labels), False
    if any(abs(b - a) > 1 for a, b in zip(vals, vals[1:])):
        raise PreconditionError("adjacent labels differ by more than 1")
    core = labels_to_core(vals)
    return Sequence(core, truncated=truncated, provenance=getattr(labels, "strip", None))


def ball_digest(m: DistanceMap) -> str:
    """Hash of the presentation, radius and the full distance table."""
    h = hashlib.sha256()
    h.update(m.p.digest.encode())
    h.update(str(m.radius).encode())
    h.update(np.ascontiguousarray(m.keys).view(np.uint8).tobytes())
    h.update(m.dist.astype("<i2").tobytes())
    return h.hexdigest()
