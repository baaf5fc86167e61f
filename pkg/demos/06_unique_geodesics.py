"""The unique-geodesic word family, measured."""

from hnnpatterns.analysis import fellow_traveler_audit
from hnnpatterns.planes import TreeOracle
from hnnpatterns.presentation import g11

oracle = TreeOracle(g11())
for n in (1, 2):
    r = fellow_traveler_audit(n, "g11", oracle)
    print(f"n={n}: w  = {r.w}\n     w' = {r.w_prime}")
    print(f"     geodesic counts {r.geodesic_counts}, d(end w, end w') = {r.endpoint_distance}, "
          f"synchronous distance {r.sync_constant}")
print("\nThe s-exponent sum is -1 on w and +1 on w', so the endpoints are at least 2 apart.")
