"""A BFS ball, the plane-tree oracle and the labels along a strip."""

import time

from hnnpatterns.cayley import Strip, build_ball, crossing_labels, distance, extract_sequence, geodesic_count
from hnnpatterns.planes import TreeOracle
from hnnpatterns.presentation import g11

p = g11()
t = time.perf_counter()
ball = build_ball(p, 6)
print(f"B(6) of G11: {len(ball)} elements in {time.perf_counter() - t:.1f}s")
print("sphere sizes:", ball.sphere_sizes())

oracle = TreeOracle(p)
for word in ["b' s^3", "a^2", "b' s a s' d^2 s' d"]:
    print(f"|{word}| = {distance(oracle, word)}, geodesics: {geodesic_count(oracle, word)}")

# the a-line through c^2 b carries the strip with sequence (-1)(0)^6(1)
strip = Strip.through(p, "c^2 b", "s")
labels = crossing_labels(oracle, strip)
print("\nlabels along the a-line through c^2 b:", labels.dist_in)
print("sequence:", extract_sequence(labels))
