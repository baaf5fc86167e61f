"""Sequences on strips, patterns, and the moves that rewrite them.

A sequence is the list of differences between the distances to adjacent
crossing points of a strip.  Far enough out the differences are all -1 on
the left and all +1 on the right (the terminals), so a sequence is stored
as its finite core with those runs trimmed.

Moves describe how the sequence of one strip determines the sequence of
the next strip a geodesic crosses:

* ``M0`` reads a strip backwards (reverse the core, negate every symbol).
* ``M1`` crosses to a parallel line; it widens the valley by ``zeros``.
* ``M2`` goes from a ``c``/``d`` line to an ``a`` line and doubles every
  symbol, with one rule table on each side of the intersection point.
* ``M3`` goes from an ``a`` line to a ``c``/``d`` line and pairs symbols
  walking away from the intersection point.
* ``M4`` goes between ``c`` and ``d`` lines and always yields a trivial
  sequence.
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Iterable, Optional, Sequence as Seq, Union

from .errors import PreconditionError

Core = tuple[int, ...]

MOVE_KINDS = ("M0", "M1", "M2", "M3", "M4")

# Move 2: symbol -> pair, by side of the intersection point
M2_LEFT = {-1: (-1, -1), 0: (0, -1), 1: (0, 0)}
M2_RIGHT = {-1: (0, 0), 0: (1, 0), 1: (1, 1)}

# Move 3: (far, near) pair of {0, 1} symbols -> one symbol
M3_PAIRS = {(0, 0): -1, (0, 1): 0, (1, 0): 0, (1, 1): 1}

_RUN_EXPONENT = 4  # runs at least this long print as x^k


def trim(symbols: Iterable[int]) -> Core:
    """Drop the leading -1 run and trailing +1 run (they merge into the terminals)."""
    s = list(symbols)
    i = 0
    while i < len(s) and s[i] == -1:
        i += 1
    j = len(s)
    while j > i and s[j - 1] == 1:
        j -= 1
    return tuple(s[i:j])


def labels_to_core(labels: Seq[int]) -> Core:
    return trim(labels[i + 1] - labels[i] for i in range(len(labels) - 1))


# ---------------------------------------------------------------------------
# sequences


@dataclass(frozen=True, order=True)
class Sequence:
    """A bi-infinite {-1, 0, 1} sequence ``(-1) core (1)``.

    The core is stored trimmed.  ``truncated`` marks a sequence read off a
    window whose ends were not confirmed to be terminal.
    """

    core: Core = ()
    truncated: bool = field(default=False, compare=False)
    provenance: Any = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        core = tuple(int(x) for x in self.core)
        if any(x not in (-1, 0, 1) for x in core):
            raise ValueError(f"sequence symbols must be -1, 0 or 1: {core}")
        object.__setattr__(self, "core", trim(core))

    @classmethod
    def parse(cls, text: str) -> "Sequence":
        return parse_sequence(text)

    def __str__(self):
        return format_sequence(self)

    def __len__(self):
        return len(self.core)

    def is_trivial(self) -> bool:
        return all(x == 0 for x in self.core)

    def extended(self, left: int, right: int) -> list[int]:
        """The core with ``left`` terminal -1's and ``right`` terminal +1's attached."""
        return [-1] * left + list(self.core) + [1] * right

    def labels(self, base: int = 0, pad: int = 1) -> list[int]:
        """Distances along the strip, starting from ``base`` at the window's left end."""
        out = [base]
        for x in self.extended(pad, pad):
            out.append(out[-1] + x)
        return out


TRIVIAL = Sequence((0,))


def reverse(s: Sequence) -> Sequence:
    """Read the strip in the other direction."""
    return Sequence(tuple(-x for x in reversed(s.core)))


def is_subsequence(small: Sequence, big: Sequence) -> bool:
    """``(-1)w'(1)`` with ``w'`` a contiguous sub-word of ``w``, terminals included."""
    pad = len(small.core) + 1
    w = "".join(_CODE[x] for x in big.extended(pad, pad))
    return "".join(_CODE[x] for x in small.core) in w


_CODE = {-1: "n", 0: "z", 1: "p"}


# ---------------------------------------------------------------------------
# conjectured form


def _symbols_of(s: Union[Sequence, "Pattern", Seq[int]]) -> Core:
    if isinstance(s, Sequence):
        return s.core
    if isinstance(s, Pattern):
        raise TypeError("patterns are handled separately")
    return trim(s)


def matches_conjectured_form(s: Union[Sequence, "Pattern", Seq[int]]) -> bool:
    """Every -1 of the core precedes every +1."""
    if isinstance(s, Pattern):
        return _pattern_conjectured(s)
    seen_plus = False
    for x in _symbols_of(s):
        if x == 1:
            seen_plus = True
        elif x == -1 and seen_plus:
            return False
    return True


def is_well_behaved(s: Union[Sequence, "Pattern", Seq[int]]) -> bool:
    """``(-1,0)(0)(1,0)``: mixtures of -1/0, then zeros, then mixtures of 1/0.

    With the terminals folded into the mixtures this is the same language
    as the conjectured form; it is kept as its own name because it is the
    hypothesis the almost convexity argument consumes.
    """
    return matches_conjectured_form(s)


# ---------------------------------------------------------------------------
# moves


@dataclass(frozen=True)
class MoveSpec:
    """One move.

    ``split`` (M2 and M3 only) is the position of the intersection point,
    counted in symbols from the start of the core: symbols with index
    ``< split`` lie left of it.  It may point into the terminals.

    ``zeros`` (M1 and M4 only) is how many zeros the crossing adds at the
    valley (M1) or leaves in the trivial result (M4).  It is fixed by the
    relative position of the two lines; 0 gives the pattern-level move.
    """

    kind: str
    split: Optional[int] = None
    zeros: int = 0

    def __post_init__(self):
        if self.kind not in MOVE_KINDS:
            raise PreconditionError(f"unknown move kind {self.kind!r}")
        needs_split = self.kind in ("M2", "M3")
        if needs_split and self.split is None:
            raise PreconditionError(f"{self.kind} needs a split")
        if not needs_split and self.split is not None:
            raise PreconditionError(f"{self.kind} takes no split")
        if self.zeros < 0 or (self.zeros and self.kind not in ("M1", "M4")):
            raise PreconditionError(f"zeros={self.zeros} is invalid for {self.kind}")

    def __str__(self):
        if self.split is not None:
            return f"{self.kind}@{self.split}"
        if self.zeros:
            return f"{self.kind}+{self.zeros}"
        return self.kind


def _m2(core: Core, split: int) -> Core:
    pad = abs(split) + 2
    ext = [-1] * pad + list(core) + [1] * pad
    cut = split + pad
    out: list[int] = []
    for i, x in enumerate(ext):
        out.extend(M2_LEFT[x] if i < cut else M2_RIGHT[x])
    return trim(out)


def _m3_half(decreases: list[int]) -> list[int]:
    """Pair symbols walking away from the cut.

    ``decreases`` holds, nearest first, how much the labels drop with each
    step away from the cut.  While both members of a pair are in {0, 1} the
    pair table applies.  A step up (-1) means the valley has been passed:
    nothing beyond it contributes, and later pairs are terminal.
    """
    out = []
    done = False
    for i in range(0, len(decreases) - 1, 2):
        near, far = decreases[i], decreases[i + 1]
        if done or near == -1:
            out.append(-1)
            done = True
        elif far == -1:
            out.append(M3_PAIRS[(0, near)])
            done = True
        else:
            out.append(M3_PAIRS[(far, near)])
    return out


def _m3(core: Core, split: int, align: str = "cut") -> Core:
    pad = abs(split) + len(core) + 4
    pad += pad % 2
    ext = [-1] * pad + list(core) + [1] * pad
    cut = split + pad
    left = ext[:cut][::-1]  # walking left, labels drop by the symbol
    right = [-x for x in ext[cut:]]  # walking right, labels drop by minus the symbol
    if align == "far":
        left = _realign(left)
        right = _realign(right)
    lo = _m3_half(left)
    ro = _m3_half(right)
    return trim(lo[::-1] + [-x for x in ro])


def _realign(decreases: list[int]) -> list[int]:
    """Pair from the far end of the descending run instead of from the cut.

    When the run of {0, 1} steps next to the cut has odd length the first
    step is dropped, so the pairs line up with the bottom of the valley.
    """
    n = 0
    while n < len(decreases) and decreases[n] in (0, 1):
        n += 1
    if n % 2 and n < len(decreases):
        return decreases[1:] + [decreases[-1]]
    return decreases


def _m1(core: Core, zeros: int) -> Core:
    if not zeros:
        return core
    # widening the valley is a sliding minimum over zeros+1 labels
    pad = len(core) + zeros + 2
    labels = Sequence(core).labels(pad=pad)
    w = zeros + 1
    low = [min(labels[i : i + w]) for i in range(len(labels) - w + 1)]
    return trim(low[i + 1] - low[i] for i in range(len(low) - 1))


def apply_move_sequence(s: Sequence, m: MoveSpec, *, pairing: str = "cut") -> Sequence:
    """Rewrite the sequence of a strip by one move.

    ``pairing`` selects where Move 3 anchors its pairs: ``"cut"`` (the
    default) pairs from the intersection point, ``"far"`` from the bottom
    of the valley.
    """
    if m.kind == "M0":
        return reverse(s)
    if m.kind == "M1":
        return Sequence(_m1(s.core, m.zeros))
    if m.kind == "M2":
        return Sequence(_m2(s.core, m.split))
    if m.kind == "M3":
        if pairing not in ("cut", "far"):
            raise PreconditionError(f"unknown pairing {pairing!r}")
        return Sequence(_m3(s.core, m.split, pairing))
    return Sequence((0,) * m.zeros)


def apply_moves(s: Sequence, moves: Iterable[MoveSpec]) -> Sequence:
    for m in moves:
        s = apply_move_sequence(s, m)
    return s


# ---------------------------------------------------------------------------
# notation

_TOKEN = re.compile(r"\s*(-?[01])(?:\^(\d+))?")
_GROUP = re.compile(r"\s*(?:\(([^()]*)\)(?:\^(\d+))?|\[([^\[\]]*)\])")


def _parse_word(text: str) -> Core:
    out: list[int] = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ValueError(f"bad symbol at {text[pos:]!r}")
        out.extend([int(m.group(1))] * int(m.group(2) or 1))
        pos = m.end()
    return tuple(out)


def _format_word(word: Core) -> str:
    tokens = []
    i = 0
    while i < len(word):
        j = i
        while j < len(word) and word[j] == word[i]:
            j += 1
        run = j - i
        if run >= _RUN_EXPONENT:
            tokens.append(f"{word[i]}^{run}")
        else:
            tokens.extend([str(word[i])] * run)
        i = j
    if all(t in ("0", "1") for t in tokens):
        return "".join(tokens)
    return " ".join(tokens)


def blocks(core: Core) -> list[Core]:
    """Split a core into the blocks used for printing.

    Up to the last -1 each block starts with a 0, after it each block ends
    with a 0, so ``0 1 0 1 1 1 0`` reads ``(0)(10)(1110)`` and reversing a
    strip mirrors the grouping.
    """
    last = max((i for i, x in enumerate(core) if x == -1), default=-1)
    out: list[list[int]] = []
    left, right = core[: last + 1], core[last + 1 :]
    for i, x in enumerate(left):
        if not out or (x == 0 and i > 0):
            out.append([])
        out[-1].append(x)
    start = len(out)
    for x in right:
        if len(out) == start or out[-1][-1] == 0:
            out.append([])
        out[-1].append(x)
    return [tuple(b) for b in out]


def _runs(items: list) -> list[tuple[Any, int]]:
    out: list[list] = []
    for b in items:
        if out and out[-1][0] == b:
            out[-1][1] += 1
        else:
            out.append([b, 1])
    return [(b, k) for b, k in out]


def format_sequence(s: Sequence) -> str:
    parts = ["(-1)"]
    for b, k in _runs(blocks(s.core)):
        parts.append(f"({_format_word(b)})" + (f"^{k}" if k > 1 else ""))
    parts.append("(1)")
    return "".join(parts)


def _split_groups(text: str) -> list[tuple[str, str, int]]:
    """Tokenize ``(w)^k`` / ``[w]`` groups into (kind, content, exponent)."""
    out = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _GROUP.match(text, pos)
        if not m:
            raise ValueError(f"cannot parse {text[pos:]!r}")
        if m.group(3) is not None:
            out.append(("[", m.group(3), 1))
        else:
            out.append(("(", m.group(1), int(m.group(2) or 1)))
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    return out


def _strip_terminals(groups, text):
    if len(groups) < 2 or groups[0][:2] != ("(", "-1") or groups[-1][:2] != ("(", "1"):
        raise ValueError(f"{text!r} must start with (-1) and end with (1)")
    if groups[0][2] != 1 or groups[-1][2] != 1:
        raise ValueError("terminals take no exponent")
    return groups[1:-1]


def parse_sequence(text: str) -> Sequence:
    """Parse ``(-1)(0)^6(1)`` style notation into a sequence."""
    core: list[int] = []
    for kind, content, k in _strip_terminals(_split_groups(text), text):
        if "," in content:
            raise ValueError("mixtures describe patterns, not sequences")
        core.extend(_parse_word(content) * k)
    return Sequence(tuple(core))


# ---------------------------------------------------------------------------
# patterns


@dataclass(frozen=True, order=True)
class Group:
    """One group of a pattern.

    ``repeatable`` groups stand for one or more copies of ``word``; a
    ``mixture`` group stands for any non-empty word over the symbols of
    ``word``; other groups occur exactly once.
    """

    word: Core
    repeatable: bool = True
    mixture: bool = False

    def __post_init__(self):
        if not self.word:
            raise ValueError("pattern groups must be non-empty")
        if self.mixture:
            object.__setattr__(self, "word", tuple(sorted(set(self.word), reverse=True)))
            object.__setattr__(self, "repeatable", True)
        elif self.repeatable:
            object.__setattr__(self, "word", _primitive_root(self.word))

    def __str__(self):
        if self.mixture:
            return "(" + ",".join(map(str, self.word)) + ")"
        text = _format_word(self.word)
        return f"({text})" if self.repeatable else f"[{text}]"

    def regex(self) -> str:
        if self.mixture:
            return "[" + "".join(_CODE[x] for x in self.word) + "]+"
        w = "".join(_CODE[x] for x in self.word)
        return f"(?:{w})+" if self.repeatable else w

    def symbols(self) -> set[int]:
        return set(self.word)


def _primitive_root(word: Core) -> Core:
    n = len(word)
    for d in range(1, n + 1):
        if n % d == 0 and word[:d] * (n // d) == word:
            return word[:d]
    return word


@dataclass(frozen=True, order=True)
class Pattern:
    """``(-1)(p1)(p2)...(pk)(1)``; the groups are stored canonically."""

    groups: tuple[Group, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "groups", _canonical_groups(self.groups))

    @classmethod
    def parse(cls, text: str) -> "Pattern":
        return parse_pattern(text)

    def __str__(self):
        return format_pattern(self)

    def is_trivial(self) -> bool:
        return all(g.word == (0,) and not g.mixture for g in self.groups)

    def regex(self) -> re.Pattern:
        return re.compile("n*" + "".join(g.regex() for g in self.groups) + "p*")

    def matches(self, s: Sequence) -> bool:
        """Does the sequence realize this pattern (every group at least once)?"""
        pad = sum(len(g.word) for g in self.groups) + 1
        text = "".join(_CODE[x] for x in s.extended(pad, pad))
        return self.regex().fullmatch(text) is not None

    def reversed(self) -> "Pattern":
        return Pattern(
            tuple(Group(tuple(-x for x in reversed(g.word)), g.repeatable, g.mixture) for g in reversed(self.groups))
        )

    def oriented(self) -> "Pattern":
        """The orientation-free representative: whichever of P, P reversed has fewer -1's."""
        r = self.reversed()
        return min(self, r, key=lambda p: (sum(g.word.count(-1) for g in p.groups), str(p)))

    def instance(self, exponent: int = 1) -> Sequence:
        """A concrete sequence of the pattern, each group repeated ``exponent`` times."""
        out: list[int] = []
        for g in self.groups:
            out.extend(g.word * (exponent if g.repeatable else 1))
        return Sequence(tuple(out))


def _canonical_groups(groups: Iterable[Group]) -> tuple[Group, ...]:
    out: list[Group] = []
    for g in groups:
        if not isinstance(g, Group):
            g = Group(*g) if isinstance(g, tuple) and g and isinstance(g[0], tuple) else Group(tuple(g))
        if out and not g.repeatable and not out[-1].repeatable:
            out[-1] = Group(out[-1].word + g.word, repeatable=False)
            continue
        if out and g.repeatable and out[-1] == g:
            continue
        out.append(g)
    # fold into the terminals
    while out and _absorbed(out[0], -1):
        out.pop(0)
    while out and _absorbed(out[-1], 1):
        out.pop()
    if out and not out[0].repeatable:
        w = _ltrim(out[0].word)
        out[:1] = [Group(w, repeatable=False)] if w else []
    if out and not out[-1].repeatable:
        w = _rtrim(out[-1].word)
        out[-1:] = [Group(w, repeatable=False)] if w else []
    return tuple(out)


def _ltrim(w: Core) -> Core:
    i = 0
    while i < len(w) and w[i] == -1:
        i += 1
    return w[i:]


def _rtrim(w: Core) -> Core:
    j = len(w)
    while j and w[j - 1] == 1:
        j -= 1
    return w[:j]


def _absorbed(g: Group, terminal: int) -> bool:
    return g.repeatable and set(g.word) == {terminal}


def pattern_of(s: Sequence) -> Pattern:
    """Abstract a sequence: every printed block becomes a repeatable group."""
    return Pattern(tuple(Group(b) for b in blocks(s.core)))


def format_pattern(p: Pattern) -> str:
    return "(-1)" + "".join(str(g) for g in p.groups) + "(1)"


def parse_pattern(text: str) -> Pattern:
    """Parse pattern notation: ``(w)`` repeatable, ``(x,y)`` mixture, ``[w]`` once."""
    groups = []
    for kind, content, k in _strip_terminals(_split_groups(text), text):
        if k != 1:
            raise ValueError("exponents on pattern groups are not allowed")
        if kind == "[":
            groups.append(Group(_parse_word(content), repeatable=False))
        elif "," in content:
            groups.append(Group(tuple(int(x) for x in content.split(",")), mixture=True))
        else:
            groups.append(Group(_parse_word(content)))
    return Pattern(tuple(groups))


TRIVIAL_PATTERN = Pattern((Group((0,)),))
CONJECTURED_FORM = Pattern(
    (Group((0, -1), mixture=True), Group((0,)), Group((1, 0), mixture=True))
)


def _pattern_conjectured(p: Pattern) -> bool:
    seen_plus = False
    for g in p.groups:
        syms = g.symbols()
        if 1 in syms and -1 in syms:
            if g.mixture or g.repeatable:
                return False
            if not matches_conjectured_form(Sequence(g.word)) or seen_plus:
                return False
        if -1 in syms and seen_plus:
            return False
        if 1 in syms:
            seen_plus = True
    return True


def is_subpattern(small: Pattern, big: Pattern) -> bool:
    """``small`` is ``(-1)w'(1)`` with ``w'`` a run of consecutive groups of ``big``."""
    a, b = small.groups, big.groups
    return any(b[i : i + len(a)] == a for i in range(len(b) - len(a) + 1))


# -- moves on patterns ------------------------------------------------------


def _extended_groups(p: Pattern) -> list[Group]:
    return [Group((-1,))] + list(p.groups) + [Group((1,))]


def _pattern_m2(p: Pattern, split: int) -> Pattern:
    ext = _extended_groups(p)
    if not 0 <= split <= len(ext):
        raise PreconditionError(f"split {split} outside 0..{len(ext)}")
    out = []
    for i, g in enumerate(ext):
        table = M2_LEFT if i < split else M2_RIGHT
        if g.mixture:
            img = {y for x in g.word for y in table[x]}
            out.append(Group(tuple(img), mixture=True))
        else:
            out.append(Group(tuple(y for x in g.word for y in table[x]), g.repeatable))
    return Pattern(tuple(out))


def _pattern_m3(p: Pattern, split: int) -> Pattern:
    ext = _extended_groups(p)
    if not 0 <= split <= len(ext):
        raise PreconditionError(f"split {split} outside 0..{len(ext)}")
    right_has_minus = any(-1 in g.symbols() for g in ext[split:-1])
    if right_has_minus:
        # the valley lies right of the cut: mirror, apply, mirror back
        mirrored = p.reversed()
        return _pattern_m3(mirrored, len(ext) - split).reversed()
    # walk left from the cut through groups of {0, 1} symbols
    region: list[Group] = []
    for g in reversed(ext[1:split]):
        if -1 in g.symbols():
            break
        region.append(g)
    if any(g.mixture for g in region):
        syms = set()
        for g in region:
            syms |= g.symbols()
        img = {M3_PAIRS[(a, b)] for a in syms for b in syms}
        return Pattern((Group(tuple(img), mixture=True),))
    # instantiate odd-length repeatable groups twice so pairs stay inside groups
    symbols: list[tuple[int, int]] = []  # (decrease, group index), nearest first
    for gi, g in enumerate(region):
        word = g.word * (2 if g.repeatable and len(g.word) % 2 else 1)
        for x in reversed(word):
            symbols.append((x, gi))
    pairs: dict[int, list[int]] = {}
    order: list[int] = []
    i = 0
    while i + 1 < len(symbols):
        (near, gi), (far, _) = symbols[i], symbols[i + 1]
        if gi not in pairs:
            pairs[gi] = []
            order.append(gi)
        pairs[gi].append(M3_PAIRS[(far, near)])
        i += 2
    if i < len(symbols):  # leftover meets the zeros below
        near, gi = symbols[i]
        pairs.setdefault(gi, [])
        if gi not in order:
            order.append(gi)
        pairs[gi].append(M3_PAIRS[(0, near)])
    groups = []
    for gi in reversed(order):
        g = region[gi]
        groups.append(Group(tuple(reversed(pairs[gi])), g.repeatable))
    return Pattern(tuple(groups))


def apply_move_pattern(p: Pattern, m: MoveSpec) -> Pattern:
    """Lift a move to patterns.

    Splits index the boundaries of the group list with one repeatable
    terminal group attached at each end: ``0`` cuts inside the left
    terminal, ``len(p.groups) + 2`` inside the right one.  Repeatable groups
    map to the repeatable group of their image.
    """
    if m.kind == "M0":
        return p.reversed()
    if m.kind == "M1":
        return p
    if m.kind == "M4":
        return TRIVIAL_PATTERN
    if m.kind == "M2":
        return _pattern_m2(p, m.split)
    return _pattern_m3(p, m.split)


# ---------------------------------------------------------------------------
# reachability


@dataclass
class Reachable:
    """Everything reached from the trivial sequence or pattern, with one move word each."""

    mode: str
    depth: int
    items: dict  # canonical object -> tuple of MoveSpec

    def __len__(self):
        return len(self.items)

    def __contains__(self, obj):
        return self._key(obj) in self.items

    def _key(self, obj):
        if isinstance(obj, str):
            obj = parse_sequence(obj) if self.mode == "sequence" else parse_pattern(obj)
        return obj.oriented() if isinstance(obj, Pattern) else obj

    def genealogy(self, obj) -> tuple[MoveSpec, ...]:
        return self.items[self._key(obj)]

    def maximal(self) -> list:
        """Patterns that are not a sub-pattern of another reached pattern."""
        pats = sorted(self.items, key=str)
        if self.mode != "pattern":
            return pats
        out = []
        for p in pats:
            rest = [q for q in pats if q != p]
            if not any(is_subpattern(p, q) or is_subpattern(p, q.reversed()) for q in rest):
                out.append(p)
        return out


MAX_REACH_DEPTH = 12


def _candidate_moves(obj, mode: str) -> list[MoveSpec]:
    moves = [MoveSpec("M0")]
    if mode == "sequence":
        splits = range(-1, len(obj.core) + 2)
    else:
        splits = range(0, len(obj.groups) + 3)
    for kind in ("M2", "M3"):
        moves.extend(MoveSpec(kind, split=s) for s in splits)
    return moves


def enumerate_reachable(depth: int, mode: str = "pattern", max_items: int = 2_000_000) -> Reachable:
    """Breadth-first closure of moves 0, 2, 3 starting from the trivial object.

    Sequences start from ``(-1)(0)(1)`` and try every split from one symbol
    inside the left terminal to one inside the right terminal; patterns are
    kept up to orientation.  Two consecutive M0 never occur, since they
    cancel.
    """
    if mode not in ("sequence", "pattern"):
        raise PreconditionError(f"mode must be 'sequence' or 'pattern', not {mode!r}")
    if not 0 <= depth <= MAX_REACH_DEPTH:
        raise PreconditionError(f"depth must lie in 0..{MAX_REACH_DEPTH}")
    start = TRIVIAL if mode == "sequence" else TRIVIAL_PATTERN
    key = (lambda o: o) if mode == "sequence" else (lambda o: o.oriented())
    items: dict = {key(start): ()}
    frontier = deque([(start, ())])
    for _ in range(depth):
        nxt = deque()
        for obj, word in frontier:
            for m in _candidate_moves(obj, mode):
                if m.kind == "M0" and word and word[-1].kind == "M0":
                    continue
                if mode == "sequence":
                    new = apply_move_sequence(obj, m)
                else:
                    new = apply_move_pattern(obj, m)
                k = key(new)
                if k in items:
                    continue
                items[k] = word + (m,)
                nxt.append((new, word + (m,)))
                if len(items) > max_items:
                    raise PreconditionError(f"more than {max_items} reachable objects")
        frontier = nxt
    return Reachable(mode, depth, items)
