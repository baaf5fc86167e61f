"""Moves on sequences and patterns, and what they can reach."""

from hnnpatterns.patterns import (
    TRIVIAL,
    TRIVIAL_PATTERN,
    MoveSpec,
    apply_move_pattern,
    apply_move_sequence,
    enumerate_reachable,
    matches_conjectured_form,
    parse_sequence,
)

p = TRIVIAL_PATTERN
print("repeated Move 2 on the trivial pattern:")
for _ in range(3):
    p = apply_move_pattern(p, MoveSpec("M2", split=0))
    print("  ", p)

k = parse_sequence("(-1)(0 -1)(0)^2(110)(1)")
k2 = apply_move_sequence(k, MoveSpec("M2", split=4))
back = apply_move_sequence(k2, MoveSpec("M3", split=len(k2.core)))
print(f"\nK = {k}\nK.M2 = {k2}\nK.M2.M3 = {back}  (the part of K right of the cut)")

print("\nM0 reverses a strip:", apply_move_sequence(parse_sequence("(-1)(0)(10)(1)"), MoveSpec("M0")))
print("M4 always gives", apply_move_sequence(k, MoveSpec("M4")), "; M1 fixes", apply_move_sequence(TRIVIAL, MoveSpec("M1")))

for depth in range(5):
    r = enumerate_reachable(depth)
    ok = all(matches_conjectured_form(x) for x in r.items)
    print(f"depth {depth}: {len(r):>5} patterns, all of conjectured form: {ok}, maximal: {len(r.maximal())}")
