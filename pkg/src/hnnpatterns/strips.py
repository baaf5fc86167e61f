"""Survey of every strip inside a ball, via the plane tree.

A strip lies inside ``B(N)`` when at least one of its rungs does, that is
when its near side comes within ``N - 1`` of the identity.  Planes whose
entry strips carry the same labels up to translation have isomorphic
subtrees, so the survey keeps one copy of every relative plane state,
expanded with the largest budget it is ever reached with.  States are
expanded in order of decreasing budget, which makes that the first time
each is seen.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Optional

import numpy as np

from .patterns import (
    MoveSpec,
    Sequence,
    apply_move_sequence,
    labels_to_core,
    matches_conjectured_form,
    pattern_of,
)
from .planes import LineLabels, PlaneState, PlaneTree
from .presentation import GroupPresentation, Vector, load_presentation


@dataclass(frozen=True)
class Crossing:
    """One strip crossing: leave the plane ``parent`` through ``letter`` along ``c + j*b``.

    ``parent`` is a relative state (minimum label 0) and ``budget`` is how
    far the ball reaches beyond that minimum.
    """

    parent: PlaneState
    letter: tuple[int, int]
    c: Vector
    labels: LineLabels
    budget: int

    @property
    def child(self) -> PlaneState:
        return PlaneState(self.letter, self.labels.values)

    @property
    def initial(self) -> bool:
        return self.parent.entry is None

    def entry_sequence(self) -> Optional[Sequence]:
        if self.parent.entry is None:
            return None
        return Sequence(labels_to_core(self.parent.labels))

    def exit_sequence(self) -> Sequence:
        return Sequence(labels_to_core(self.labels.values))


def iter_crossings(p: GroupPresentation, radius: int, tree: Optional[PlaneTree] = None) -> Iterator[Crossing]:
    """Every distinct strip crossing inside ``B(radius)``, one per relative state.

    Deterministic: states are expanded by decreasing budget, ties broken by
    the state itself, and lines in sorted order.
    """
    p = load_presentation(p)
    tree = tree or PlaneTree(p)
    best = {tree.base: radius}
    heap = [(-radius, _order_key(tree.base), tree.base)]
    while heap:
        neg, _, state = heapq.heappop(heap)
        budget = -neg
        if best[state] != budget:
            continue
        for letter, reps in tree.exit_lines(state, budget - 1):
            for c, lab in zip(reps, tree.lines_labels(state, letter, reps)):
                yield Crossing(state, letter, tuple(int(x) for x in c), lab, budget)
                child, m = PlaneState(letter, lab.values).relative()
                b2 = budget - m
                if b2 >= 1 and best.get(child, 0) < b2:
                    best[child] = b2
                    heapq.heappush(heap, (-b2, _order_key(child), child))


def _order_key(state: PlaneState):
    return (state.entry or (-1, 0), state.labels)


@dataclass
class SurveySummary:
    """Counts from one pass over every strip crossing inside a ball."""

    presentation: str
    radius: int
    states: int = 0
    crossings: int = 0
    initial: int = 0
    violations: int = 0
    move_checks: int = 0
    move_mismatches: int = 0
    initial_patterns: dict = field(default_factory=dict)
    initial_zero_runs: list = field(default_factory=list)
    sequences: dict = field(default_factory=dict)
    examples: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.violations == 0 and self.move_mismatches == 0


def survey(p: GroupPresentation, radius: int, check_moves: Optional[bool] = None,
           keep_sequences: bool = False, tree: Optional[PlaneTree] = None) -> SurveySummary:
    """Sequences on every strip within ``B(radius)``, checked against the conjectured form.

    With ``check_moves`` (default: on for presentations with a move table)
    every non-initial crossing also compares the exit sequence with the
    move predicted from the entry sequence.  ``examples`` holds up to ten
    offending crossings as strings.
    """
    p = load_presentation(p)
    tree = tree or PlaneTree(p)
    if check_moves is None:
        check_moves = p.name == "g11"
    out = SurveySummary(p.name, radius)
    states = set()
    pats: dict = {}
    zero_runs = set()
    seqs: dict = {}
    for cr in iter_crossings(p, radius, tree):
        out.crossings += 1
        states.add(cr.parent)
        seq = cr.exit_sequence()
        if keep_sequences:
            seqs[str(seq)] = seqs.get(str(seq), 0) + 1
        if not matches_conjectured_form(seq):
            out.violations += 1
            if len(out.examples) < 10:
                out.examples.append(f"not conjectured: {seq}")
        if cr.initial:
            out.initial += 1
            key = str(pattern_of(seq).oriented())
            pats[key] = pats.get(key, 0) + 1
            if set(seq.core) <= {0}:
                zero_runs.add(len(seq.core))
        elif check_moves:
            move = move_for_crossing(p, cr, tree)
            out.move_checks += 1
            got = apply_move_sequence(cr.entry_sequence(), move)
            if got != seq:
                out.move_mismatches += 1
                if len(out.examples) < 10:
                    out.examples.append(f"{cr.entry_sequence()} --{move}--> {got}, oracle {seq}")
    out.states = len(states)
    out.initial_patterns = dict(sorted(pats.items()))
    out.initial_zero_runs = sorted(zero_runs)
    out.sequences = dict(sorted(seqs.items()))
    return out


# ---------------------------------------------------------------------------
# moves read off the geometry


def _generator_name(p: GroupPresentation, v: Vector) -> Optional[str]:
    neg = tuple(-a for a in v)
    for name, w in p.base_gens:
        if tuple(w) in (tuple(v), neg):
            return name
    return None


# G_{1,1}: (entry line, exit line) -> move kind
G11_KINDS = {
    ("a", "a"): "M1", ("c", "c"): "M1", ("d", "d"): "M1",
    ("c", "a"): "M2", ("d", "a"): "M2",
    ("a", "c"): "M3", ("a", "d"): "M3",
    ("c", "d"): "M4", ("d", "c"): "M4",
}


def intersection(a: Vector, b: Vector, c: Vector) -> Optional[tuple[Fraction, Fraction]]:
    """Solve ``k*a = c + j*b`` in the plane; ``None`` for parallel lines."""
    det = a[0] * (-b[1]) - a[1] * (-b[0])
    if det == 0:
        return None
    k = Fraction(c[0] * (-b[1]) - c[1] * (-b[0]), det)
    j = Fraction(a[0] * c[1] - a[1] * c[0], det)
    return k, j


def move_for_crossing(p: GroupPresentation, crossing: Crossing, tree: PlaneTree) -> MoveSpec:
    """The move that should turn the entry sequence into the exit sequence.

    Only defined for rank-2 presentations whose lines are classified in
    ``G11_KINDS``.  The split is the entry-line index of the intersection
    point, measured from the first core symbol; the zeros of M1 and M4
    count the extra points where the exit line is closest to the entry line.
    """
    if crossing.parent.entry is None:
        raise ValueError("an initial strip has no entry strip")
    a = p.after_vec(*crossing.parent.entry)
    b = p.before_vec(*crossing.letter)
    kind = G11_KINDS.get((_generator_name(p, a), _generator_name(p, b)))
    if kind is None:
        raise ValueError(f"no move table for {p.name}")
    c = crossing.c
    labels = crossing.parent.labels
    core_start = next((i for i in range(len(labels) - 1) if labels[i + 1] - labels[i] != -1), 0)
    hit = intersection(a, b, c)
    if kind == "M1":
        ks = np.arange(-len(labels) - 4 * (abs(c[0]) + abs(c[1])) - 8, len(labels) + 4 * (abs(c[0]) + abs(c[1])) + 8)
        d = tree.table(np.asarray(c) - ks[:, None] * np.asarray(a))
        return MoveSpec("M1", zeros=int((d == d.min()).sum()) - 1)
    k, _ = hit
    if kind == "M4":
        return MoveSpec("M4", zeros=1 if k.denominator == 2 else 0)
    return MoveSpec(kind, split=int(k) - core_start)
