"""Tour of the normotope set type.

A normotope is a norm ball {x : ||alpha (x - center)|| <= offset} with an
invertible shape matrix alpha. This script builds a few, tests membership,
computes axis-aligned hulls and half-space representations, and samples
points.
"""

import numpy as np

from normotopes import (
    NormKind,
    Normotope,
    contains,
    interval_hull,
    sample,
    to_hrep,
    volume_cost,
)

# an ellipse: l2 ball shaped by diag(2, 1), radius 1
ell = Normotope(NormKind.L2, np.zeros(2), np.diag([2.0, 1.0]), 1.0)
print("ellipse contains (0.5, 0):", contains(ell, np.array([0.5, 0.0]), 0.0))
print("ellipse contains (0.51, 0):", contains(ell, np.array([0.51, 0.0]), 0.0))

hull = interval_hull(ell)
print("ellipse interval hull lo/hi:", hull.lo, hull.hi)

# volume cost: -log det(alpha^T alpha / offset^2); smaller = smaller set
print("volume cost of the ellipse:", volume_cost(ell))
print("volume cost of the unit disc:",
      volume_cost(Normotope(NormKind.L2, np.zeros(2), np.eye(2), 1.0)))

# boxes and cross-polytopes convert exactly to half-space form
box = Normotope(NormKind.LINF, np.array([1.0, 0.0]),
                np.array([[2.0, 0.0], [0.0, 1.0]]), 1.0)
poly = to_hrep(box)
print("box H-rep offsets b:", poly.b)

diamond = Normotope(NormKind.L1, np.zeros(2), np.eye(2), 1.0)
print("cross-polytope has", to_hrep(diamond).H.shape[0], "half-spaces")

# sampling is uniform over the set and deterministic in the seed
pts = sample(ell, rng_seed=0, count=5000)
print("sample mean (should be near the center):", pts.mean(axis=0).round(3))
inside = [contains(ell, p, 1e-9) for p in pts[:100]]
print("first 100 samples inside:", all(inside))
