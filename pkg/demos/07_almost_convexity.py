"""Base FFTP constant and the almost convexity audit on small spheres."""

from hnnpatterns.analysis import almost_convex_audit, fftp_base_check
from hnnpatterns.cayley import build_ball

for name in ("g11", "gw"):
    k = next(k for k in range(4) if fftp_base_check(name, k, 6).passed)
    print(f"{name}: base FFTP constant k = {k} (words up to length 6), bound 10k+2 = {10 * k + 2}")
    ball = build_ball(name, 5)
    for n in range(1, 6):
        r = almost_convex_audit(name, n, k=k, ball=ball)
        print(f"  S({n}): worst connecting length {r.min_connecting_length}, "
              f"pairs needing a detour {r.pairs_at_distance_2_outside}, histogram {r.length_histogram}")
