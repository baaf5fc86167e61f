"""How far b^-1 s^n x^k stays geodesic."""

from hnnpatterns.analysis import nonregularity_cutpoints

for direction in ("a", "c"):
    print(f"x = {direction}")
    for r in nonregularity_cutpoints(3, direction=direction):
        print(f"  n={r.n}: geodesic up to k={r.max_geodesic_k} (2^n - 1 = {r.expected})")
