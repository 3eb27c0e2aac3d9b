"""Extend exp(x + y) off the unit square, then x^2 + y^2 off the square
viewed as a manifold with corners (patch charts plus a partition of unity).

Run with ``python3 demos/box_and_manifold.py`` (the second part takes ~10 s).
"""

import numpy as np

from smoothext import extend, manifold
from smoothext import taylor as T
from smoothext.taylor import Box, JetOracle

f = JetOracle.from_program(lambda x, y: T.exp(x + y), 2, domain=Box.unit(2), name="exp")
ext = extend.extend_box(f, 4)
print("axis order:", ext.record.axis_order)
for p in [(0.5, 0.5), (-0.05, 0.5), (1.05, 1.05), (-0.2, -0.2)]:
    print(p, float(ext(np.array(p))), np.exp(sum(p)))
print("straddle mismatch:", extend.straddle_report(ext))

# currying: f^(x) is a function of y
g = extend.curry(f)(np.array([0.25]))
print("f^(0.25)(0.5) =", float(g.value(np.array([0.5]))), "vs", float(f.value(np.array([0.25, 0.5]))))

# classification on the quarter disc with two charts
Q = manifold.quarter_disc()
for p in [(0.3, 0.3), (0.0, 0.4), (0.0, 0.0)]:
    print(p, manifold.classify_point(Q, p))
print("interior invariance:", manifold.check_interior_invariance(Q, samples=100).ok)

L = manifold.unit_square_domain()
h = JetOracle.from_program(lambda x, y: x * x + y * y, 2, domain=L, name="r2")
mext = manifold.extend_on_manifold(L, h, manifold.square_patches(), N=4)
for p in [(0.5, 0.5), (0.0, 0.3), (-0.002, 0.3), (1.001, 1.001)]:
    p = np.array(p)
    print(p, "in U:", mext.in_U(p), "fbar:", float(mext(p)), "weights sum:", mext.partition(p).sum())
