# Action sets, their shrunk versions, and how far projections move when the shrink radius changes.
import numpy as np

from bandit_nash.sets import Ball, Box, Simplex, random_polyhedron
from bandit_nash.diagnostics import lemma3_ratio_scan

box = Box([0.0, 0.0], [1.0, 1.0])
print("box projection of (2, -1):", box.project([2.0, -1.0]))
print("box shrunk by 0.25:", box.shrink(0.25))
print("box inradius:", box.inradius())

# simplex distances live inside the hyperplane sum(x) = 1
tri = Simplex(3)
print("simplex projection of (1, 1, 1):", tri.project([1.0, 1.0, 1.0]))
print("simplex(2) inradius (relative):", Simplex(2).inradius())
print("shrunk simplex floor:", tri.shrink(0.1).floor)

rng = np.random.default_rng(0)
poly = random_polyhedron(rng, dim=2, n_facets=6)
x = rng.normal(size=(5, 2)) * 2
p = poly.project(x)
print("polyhedron projections inside?", poly.contains(p))
print("distance to boundary after shrinking by 0.1:",
      poly.distance_to_boundary(poly.shrink(0.1).project(x)).round(4))

# moving the shrink radius by d moves projections by at most C * d
for name, s in [("ball", Ball(np.zeros(2), 1.0)), ("box 3-D", Box(-np.ones(3), np.ones(3))),
                ("polyhedron", poly)]:
    rep = lemma3_ratio_scan(s, 1000)
    print(f"{name:>10}: max ratio by shift {rep.max_ratio}  known bound {rep.bound}")
