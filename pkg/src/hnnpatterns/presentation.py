"""Multiple HNN extensions of Z^n with cyclic associated subgroups.

A presentation declares base generators (integer vectors spanning Z^n) and
stable letters ``s`` with a rule ``s^-1 u s = v`` where ``u`` and ``v`` are
powers of base generators.  Group elements are handled through Britton
normal forms::

    g0 s1^e1 g1 s2^e2 ... sm^em gm

with every interior ``g_i`` reduced to a fixed coset representative, so that
equal elements get identical normal forms.  Internally a normal form is a
flat tuple of ints (see :class:`NormalForm`), which is what the ball search
hashes.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from pathlib import Path
from typing import Iterable, NamedTuple, Optional, Sequence, Union

from .errors import MalformedWordError, ResourceError

MAX_WORD_LENGTH = 10**6

Vector = tuple[int, ...]


class Letter(NamedTuple):
    name: str
    sign: int = 1

    def inverse(self) -> "Letter":
        return Letter(self.name, -self.sign)

    def __str__(self):
        return self.name if self.sign > 0 else self.name + "'"


Word = tuple[Letter, ...]


# ---------------------------------------------------------------------------
# word syntax

_TOKEN = re.compile(r"([A-Za-z][A-Za-z0-9_]*)('?)(?:\^(-?\d+))?")


def parse_word(text: str) -> Word:
    """Parse the letter syntax ``b' s s a s' d^4``.

    Tokens are separated by whitespace.  A token is a generator name,
    optionally followed by ``'`` (inverse) and then ``^k`` (a power; a
    negative power inverts).  ``1`` or an empty string is the empty word.
    """
    letters: list[Letter] = []
    text = text.strip()
    if text in ("", "1"):
        return ()
    for token in text.split():
        m = _TOKEN.fullmatch(token)
        if m is None:
            raise MalformedWordError(f"cannot parse token {token!r}")
        name, prime, power = m.groups()
        k = 1 if power is None else int(power)
        sign = -1 if prime else 1
        if k < 0:
            sign, k = -sign, -k
        letters.extend([Letter(name, sign)] * k)
        if len(letters) > MAX_WORD_LENGTH:
            raise ResourceError(f"word longer than {MAX_WORD_LENGTH} letters")
    return tuple(letters)


def format_word(word: Iterable[Letter]) -> str:
    """Inverse of :func:`parse_word`; runs of one letter print as powers."""
    parts = []
    for letter, run in itertools.groupby(word):
        k = len(list(run))
        parts.append(str(letter) + (f"^{k}" if k > 1 else ""))
    return " ".join(parts) if parts else "1"


def inverse_word(word: Sequence[Letter]) -> Word:
    return tuple(letter.inverse() for letter in reversed(word))


def free_reduce(word: Sequence[Letter]) -> Word:
    """Cancel adjacent ``x x^-1`` pairs until none remain."""
    out: list[Letter] = []
    for letter in word:
        if out and out[-1].name == letter.name and out[-1].sign == -letter.sign:
            out.pop()
        else:
            out.append(letter)
    return tuple(out)


# ---------------------------------------------------------------------------
# lattice helpers


def _add(x: Vector, y: Vector) -> Vector:
    return tuple(a + b for a, b in zip(x, y))


def _scale(k: int, x: Vector) -> Vector:
    return tuple(k * a for a in x)


def _det(rows: Sequence[Sequence[int]]) -> int:
    m = [[Fraction(v) for v in row] for row in rows]
    n = len(m)
    det = Fraction(1)
    for i in range(n):
        pivot = next((r for r in range(i, n) if m[r][i] != 0), None)
        if pivot is None:
            return 0
        if pivot != i:
            m[i], m[pivot] = m[pivot], m[i]
            det = -det
        det *= m[i][i]
        for r in range(i + 1, n):
            f = m[r][i] / m[i][i]
            for c in range(i, n):
                m[r][c] -= f * m[i][c]
    return int(det)


def spans_lattice(vectors: Sequence[Vector], rank: int) -> bool:
    """True iff the vectors generate all of Z^rank (gcd of maximal minors is 1)."""
    g = 0
    for rows in itertools.combinations(vectors, rank):
        g = math.gcd(g, _det(rows))
        if g == 1:
            return True
    return False


def coset_split(g: Vector, w: Vector) -> tuple[Vector, int]:
    """Write ``g = r + k*w`` with ``r`` the transversal representative.

    The transversal pins the first nonzero coordinate ``i`` of ``w``:
    ``r[i]`` lies in ``[0, |w[i]|)``.  This picks exactly one point per coset
    of ``<w>``.
    """
    for i, wi in enumerate(w):
        if wi:
            break
    else:
        raise ValueError("zero subgroup generator")
    k = (g[i] - g[i] % abs(wi)) // wi
    return tuple(a - k * b for a, b in zip(g, w)), k


# ---------------------------------------------------------------------------
# base group metric


class BaseMetric:
    """Word metric of Z^n with respect to a finite generating set.

    Distances and geodesic-word counts come from a breadth-first search of
    the lattice that is grown lazily, one sphere at a time, as queries need.
    """

    def __init__(self, vectors: Sequence[Vector], max_radius: int = 4000):
        gens = set()
        for v in vectors:
            gens.add(tuple(v))
            gens.add(tuple(-a for a in v))
        self.generators = sorted(gens)
        self.max_radius = max_radius
        origin = tuple(0 for _ in vectors[0])
        self._dist = {origin: 0}
        self._count = {origin: 1}
        self._frontier = [origin]
        self.radius = 0

    def _grow(self):
        if self.radius >= self.max_radius:
            raise ResourceError(
                f"base metric search exceeded radius {self.max_radius}", completed=self.radius
            )
        r = self.radius + 1
        dist, count = self._dist, self._count
        new = []
        for u in self._frontier:
            cu = count[u]
            for g in self.generators:
                w = tuple(a + b for a, b in zip(u, g))
                dw = dist.get(w)
                if dw is None:
                    dist[w] = r
                    count[w] = cu
                    new.append(w)
                elif dw == r:
                    count[w] += cu
        self._frontier = new
        self.radius = r

    def __call__(self, v: Vector) -> int:
        v = tuple(v)
        d = self._dist.get(v)
        while d is None:
            self._grow()
            d = self._dist.get(v)
        return d

    length = __call__

    def geodesic_count(self, v: Vector) -> int:
        """Number of geodesic words in the base generators representing ``v``."""
        self(v)
        return self._count[tuple(v)]

    def ball(self, radius: int) -> dict[Vector, int]:
        while self.radius < radius:
            self._grow()
        return {v: d for v, d in self._dist.items() if d <= radius}


# ---------------------------------------------------------------------------
# presentations


@dataclass(frozen=True)
class StableLetterRule:
    """``s^-1 u s = v`` with ``u = u_gen^u_power`` and ``v = v_gen^v_power``."""

    name: str
    u_gen: str
    v_gen: str
    u_power: int = 1
    v_power: int = 1


@dataclass(frozen=True)
class GroupPresentation:
    name: str
    rank: int
    base_gens: tuple[tuple[str, Vector], ...]
    stable_rules: tuple[StableLetterRule, ...]

    def __post_init__(self):
        names = [g for g, _ in self.base_gens] + [r.name for r in self.stable_rules]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate generator names in {names}")
        for g, vec in self.base_gens:
            if len(vec) != self.rank:
                raise ValueError(f"generator {g} has dimension {len(vec)}, expected {self.rank}")
        if not spans_lattice([v for _, v in self.base_gens], self.rank):
            raise ValueError("base generators do not span Z^n")
        base = dict(self.base_gens)
        for rule in self.stable_rules:
            for gen, power in ((rule.u_gen, rule.u_power), (rule.v_gen, rule.v_power)):
                if gen not in base:
                    raise ValueError(f"rule {rule.name} refers to unknown base generator {gen}")
                if power == 0:
                    raise ValueError(f"rule {rule.name} has a trivial associated subgroup")

    # -- lookups ---------------------------------------------------------

    @cached_property
    def base_vectors(self) -> dict[str, Vector]:
        return {g: tuple(v) for g, v in self.base_gens}

    @cached_property
    def stable_index(self) -> dict[str, int]:
        return {r.name: i for i, r in enumerate(self.stable_rules)}

    @cached_property
    def metric(self) -> BaseMetric:
        return BaseMetric([v for _, v in self.base_gens])

    def u_vec(self, i: int) -> Vector:
        r = self.stable_rules[i]
        return _scale(r.u_power, self.base_vectors[r.u_gen])

    def v_vec(self, i: int) -> Vector:
        r = self.stable_rules[i]
        return _scale(r.v_power, self.base_vectors[r.v_gen])

    def before_vec(self, i: int, sign: int) -> Vector:
        """Subgroup generator ``x`` with ``x s^sign = s^sign y`` (``y`` from after_vec)."""
        return self.u_vec(i) if sign > 0 else self.v_vec(i)

    def after_vec(self, i: int, sign: int) -> Vector:
        return self.v_vec(i) if sign > 0 else self.u_vec(i)

    def after_word(self, i: int, sign: int, k: int) -> Word:
        r = self.stable_rules[i]
        gen, power = (r.v_gen, r.v_power) if sign > 0 else (r.u_gen, r.u_power)
        n = k * power
        return (Letter(gen, 1 if n > 0 else -1),) * abs(n)

    @cached_property
    def letters(self) -> tuple[Letter, ...]:
        """The inverse-closed generating set, in a fixed order."""
        out = []
        for g, _ in self.base_gens:
            out += [Letter(g, 1), Letter(g, -1)]
        for r in self.stable_rules:
            out += [Letter(r.name, 1), Letter(r.name, -1)]
        return tuple(out)

    def is_stable(self, letter: Letter) -> bool:
        return letter.name in self.stable_index

    def check_word(self, word: Sequence[Letter]) -> None:
        if len(word) > MAX_WORD_LENGTH:
            raise ResourceError(f"word longer than {MAX_WORD_LENGTH} letters")
        for letter in word:
            if letter.name not in self.base_vectors and letter.name not in self.stable_index:
                raise MalformedWordError(f"{letter.name!r} is not a generator of {self.name}")
            if letter.sign not in (1, -1):
                raise MalformedWordError(f"bad sign on {letter!r}")

    def is_strip_equidistant(self) -> bool:
        return all(
            self.metric(self.u_vec(i)) == self.metric(self.v_vec(i))
            for i in range(len(self.stable_rules))
        )

    def word(self, text: str) -> Word:
        w = parse_word(text)
        self.check_word(w)
        return w

    # -- serialization ---------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "rank": self.rank,
            "base_gens": {g: list(v) for g, v in self.base_gens},
            "stable_rules": {
                r.name: {"u": r.u_gen, "u_power": r.u_power, "v": r.v_gen, "v_power": r.v_power}
                for r in self.stable_rules
            },
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GroupPresentation":
        rules = tuple(
            StableLetterRule(
                name,
                spec["u"],
                spec["v"],
                int(spec.get("u_power", 1)),
                int(spec.get("v_power", 1)),
            )
            for name, spec in data["stable_rules"].items()
        )
        gens = tuple((g, tuple(int(a) for a in v)) for g, v in data["base_gens"].items())
        return cls(str(data.get("name", "")), int(data["rank"]), gens, rules)

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def loads(cls, text: str) -> "GroupPresentation":
        return cls.from_dict(json.loads(text))

    @cached_property
    def digest(self) -> str:
        """Order-sensitive hash; normal-form keys depend on rule order."""
        blob = json.dumps(self.to_dict(), separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def __str__(self):
        return self.name or f"presentation {self.digest}"


def g11() -> GroupPresentation:
    """``<a,b,c,d,s,t | c=ab=ba, d=ab^-1, s^-1 a s = c, t^-1 a t = d>``."""
    return _builtin("g11")


def gw() -> GroupPresentation:
    """``<a,b,c,d,s,t | c=ab=ba, d=c^2, s^-1 a s = d, t^-1 b t = d>``."""
    return _builtin("gw")


@lru_cache(maxsize=None)
def _builtin(name: str) -> GroupPresentation:
    base = (("a", (1, 0)), ("b", (0, 1)), ("c", (1, 1)))
    if name == "g11":
        return GroupPresentation(
            "g11",
            2,
            base + (("d", (1, -1)),),
            (StableLetterRule("s", "a", "c"), StableLetterRule("t", "a", "d")),
        )
    if name == "gw":
        return GroupPresentation(
            "gw",
            2,
            base + (("d", (2, 2)),),
            (StableLetterRule("s", "a", "d"), StableLetterRule("t", "b", "d")),
        )
    raise KeyError(name)


BUILTINS = ("g11", "gw")


def load_presentation(source: Union[str, Path, GroupPresentation]) -> GroupPresentation:
    """A built-in by name (``"g11"``, ``"gw"``) or a JSON presentation file."""
    if isinstance(source, GroupPresentation):
        return source
    if str(source) in BUILTINS:
        return _builtin(str(source))
    path = Path(source)
    if not path.exists():
        raise KeyError(f"unknown presentation {source!r}")
    return GroupPresentation.loads(path.read_text())


# ---------------------------------------------------------------------------
# normal forms


@dataclass(frozen=True, order=True)
class NormalForm:
    """Britton normal form ``g0 s1^e1 g1 ... sm^em gm``.

    ``key`` is flat: the ``rank`` coordinates of ``g0``, then for every stable
    letter a code ``2*rule + (sign < 0)`` followed by the coordinates of the
    next base segment.
    """

    key: tuple[int, ...]
    rank: int = field(default=2, compare=False)

    @property
    def depth(self) -> int:
        return (len(self.key) - self.rank) // (self.rank + 1)

    @property
    def segments(self) -> list:
        n = self.rank
        out: list = [self.key[:n]]
        for j in range(self.depth):
            off = n + j * (n + 1)
            code = self.key[off]
            out.append((code >> 1, -1 if code & 1 else 1))
            out.append(self.key[off + 1 : off + 1 + n])
        return out

    @property
    def stable_letters(self) -> list[tuple[int, int]]:
        return self.segments[1::2]

    @property
    def last(self) -> Vector:
        return self.key[-self.rank :]

    def is_identity(self) -> bool:
        return not any(self.key)

    def to_word(self, p: GroupPresentation) -> Word:
        """A word for this element (base segments written in a fixed basis)."""
        out: list[Letter] = []
        for j, seg in enumerate(self.segments):
            if j % 2:
                out.append(Letter(p.stable_rules[seg[0]].name, seg[1]))
            else:
                out.extend(base_word(seg, p))
        return tuple(out)

    def format(self, p: GroupPresentation) -> str:
        parts = []
        for j, seg in enumerate(self.segments):
            if j % 2:
                parts.append(str(Letter(p.stable_rules[seg[0]].name, seg[1])))
            else:
                parts.append("(" + ",".join(map(str, seg)) + ")")
        return " ".join(parts)


def identity(p: GroupPresentation) -> NormalForm:
    return NormalForm((0,) * p.rank, p.rank)


def base_word(v: Vector, p: GroupPresentation) -> Word:
    """A geodesic word in the base generators for ``v``."""
    metric = p.metric
    d = metric(v)
    out: list[Letter] = []
    cur = tuple(v)
    letters = [(Letter(g, s), _scale(s, vec)) for g, vec in p.base_gens for s in (1, -1)]
    while d:
        for letter, step in letters:
            prev = tuple(a - b for a, b in zip(cur, step))
            if metric(prev) == d - 1:
                out.append(letter)
                cur, d = prev, d - 1
                break
    return tuple(reversed(out))


class Multiplier:
    """Right multiplication of flat normal-form keys by generators."""

    def __init__(self, p: GroupPresentation):
        self.p = p
        self.n = p.rank
        self.actions = []
        for letter in p.letters:
            if letter.name in p.base_vectors:
                self.actions.append(("base", _scale(letter.sign, p.base_vectors[letter.name])))
            else:
                i = p.stable_index[letter.name]
                e = letter.sign
                self.actions.append(
                    ("stable", (2 * i + (e < 0), 2 * i + (e > 0), p.before_vec(i, e), p.after_vec(i, e)))
                )
        self.index = {letter: j for j, letter in enumerate(p.letters)}

    def apply(self, key: tuple[int, ...], j: int) -> tuple[int, ...]:
        kind, data = self.actions[j]
        n = self.n
        if kind == "base":
            last = key[-n:]
            return key[:-n] + tuple(a + b for a, b in zip(last, data))
        code, inv_code, before, after = data
        last = key[-n:]
        rep, k = coset_split(last, before)
        if len(key) > n and key[-n - 1] == inv_code and not any(rep):
            # pinch: s^-e (k*before) s^e = k*after
            prev = key[-2 * n - 1 : -n - 1]
            return key[: -2 * n - 1] + tuple(a + k * b for a, b in zip(prev, after))
        return key[:-n] + rep + (code,) + tuple(k * b for b in after)

    def apply_letter(self, key, letter: Letter):
        return self.apply(key, self.index[letter])

    def apply_word(self, key, word: Iterable[Letter]):
        for letter in word:
            key = self.apply(key, self.index[letter])
        return key


@lru_cache(maxsize=None)
def multiplier(p: GroupPresentation) -> Multiplier:
    return Multiplier(p)


def normalize(word: Sequence[Letter], p: GroupPresentation) -> NormalForm:
    """Britton normal form of the element a word represents.

    Letters are absorbed one at a time; each step either pinches against the
    previous stable letter or splits the last base segment into its coset
    representative and a subgroup part pushed through the new letter.  The
    result only depends on the group element.
    """
    p.check_word(word)
    return NormalForm(multiplier(p).apply_word(identity(p).key, word), p.rank)


def multiply(g: NormalForm, word: Sequence[Letter], p: GroupPresentation) -> NormalForm:
    return NormalForm(multiplier(p).apply_word(g.key, word), p.rank)


def inverse(g: NormalForm, p: GroupPresentation) -> NormalForm:
    return normalize(inverse_word(g.to_word(p)), p)


def product(g: NormalForm, h: NormalForm, p: GroupPresentation) -> NormalForm:
    return multiply(g, h.to_word(p), p)


def equal_in_group(w1: Sequence[Letter], w2: Sequence[Letter], p: GroupPresentation) -> bool:
    return normalize(w1, p) == normalize(w2, p)


def evaluate_base(word: Sequence[Letter], p: GroupPresentation) -> Vector:
    v = (0,) * p.rank
    for letter in word:
        v = _add(v, _scale(letter.sign, p.base_vectors[letter.name]))
    return v


@dataclass(frozen=True)
class PinchReport:
    start: int
    end: int  # exclusive
    stable_id: str
    replacement_base_word: Word


def find_pinch(word: Sequence[Letter], p: GroupPresentation) -> Optional[PinchReport]:
    """Locate the leftmost pinch ``s^-1 u s`` (u in U) or ``s v s^-1`` (v in V).

    Only consecutive stable letters can bound a pinch, since the middle must
    be a base word.  Returns ``None`` when the word is stable letter reduced.
    """
    p.check_word(word)
    positions = [i for i, x in enumerate(word) if x.name in p.stable_index]
    for i, j in zip(positions, positions[1:]):
        left, right = word[i], word[j]
        if left.name != right.name or left.sign != -right.sign:
            continue
        rule = p.stable_index[right.name]
        e = right.sign
        rep, k = coset_split(evaluate_base(word[i + 1 : j], p), p.before_vec(rule, e))
        if not any(rep):
            return PinchReport(i, j + 1, right.name, p.after_word(rule, e, k))
    return None


def apply_pinch(word: Sequence[Letter], report: PinchReport) -> Word:
    return tuple(word[: report.start]) + report.replacement_base_word + tuple(word[report.end :])


def stable_letter_sequence(word: Sequence[Letter], p: GroupPresentation) -> list[Letter]:
    """The stable letters of a word, in order, with signs."""
    return [x for x in word if x.name in p.stable_index]


def base_word_metric(v: Sequence[int], p: GroupPresentation) -> int:
    """Length of the shortest base-generator word summing to ``v``."""
    if len(v) != p.rank:
        raise ValueError(f"vector {tuple(v)} does not have rank {p.rank}")
    return p.metric(tuple(v))
