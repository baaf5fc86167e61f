"""Every strip inside a ball: conjectured form and move predictions."""

from hnnpatterns.presentation import g11, gw
from hnnpatterns.strips import survey

s = survey(g11(), 8)
print(f"G11 B(8): {s.crossings} strip crossings ({s.states} distinct plane states)")
print(f"  conjectured-form violations: {s.violations}")
print(f"  move predictions checked against the oracle: {s.move_checks}, mismatches: {s.move_mismatches}")
print(f"  initial strips: {s.initial_patterns}, zero runs k = {s.initial_zero_runs}")

t = survey(gw(), 6)
print(f"\nG_W B(6): initial classes {t.initial_patterns}")
print(f"  strips not of conjectured form: {t.violations}, e.g. {t.examples[:2]}")
