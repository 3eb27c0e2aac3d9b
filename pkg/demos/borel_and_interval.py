"""Realize a prescribed jet at 0, then extend sin from [0, 1] to the line.

Run with ``python3 demos/borel_and_interval.py``.
"""

import numpy as np

from smoothext import borel, extend
from smoothext import taylor as T
from smoothext.taylor import Box, JetOracle

# a function on R whose derivatives at 0 are 1, -2, 3, ..., (-1)^k (k+1)
v = np.array([(-1) ** k * (k + 1) for k in range(7)], dtype=float)
f = borel.realize(borel.TargetJet(v))
print("scales c_k:", f.certificate.scales)
print("derivatives at 0:", f.jet(0.0, 6).raw())
print("certificate violations:", f.certificate.violations())
xs = np.linspace(-2.0, 2.0, 9)
print("values on [-2, 2]:", np.round(f(xs), 6))

# extension of sin beyond [0, 1]; inside the interval nothing changes
src = JetOracle.from_program(lambda x: T.sin(x), 1, domain=Box.unit(1), name="sin")
ext = extend.extend_interval(src, 6)
for x in (-0.5, -0.01, 0.0, 0.5, 1.0, 1.01, 1.5):
    print(f"fbar({x:5.2f}) = {float(ext(np.array([x]))): .12f}   sin = {np.sin(x): .12f}")
print("seam jet mismatch:", extend.seam_smoothness_report(ext, 6))
c = extend.seam_fd_convergence(ext, 2, 1.0, lift=1)
print(f"second derivative across x=1: steps {c.steps}, observed order {c.slope:.2f}")
