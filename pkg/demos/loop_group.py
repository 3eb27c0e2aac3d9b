"""Maps [0, 1] -> SO(3) on a grid: pointwise group operations, the log chart,
a push-forward and its derivative, and a complex-linearity test.

Run with ``python3 demos/loop_group.py``.
"""

import numpy as np

from smoothext import mapspace as ms

K = ms.special_orthogonal(3)
grid = ms.uniform_grid(64)
rng = np.random.default_rng(0)
a, b = (ms.GroupMapElement.random(K, grid, rng, order=4, radius=0.8) for _ in range(2))
ab = ms.pointwise_mul(a, b)
print("membership of ab:", ab.membership_residual())
print("a a^-1 - e:", ms.grid_max_diff(ms.pointwise_mul(a, ms.pointwise_inv(a)),
                                        ms.GroupMapElement.identity(K, grid, 4)))
X = ms.chart_transport(a)
print("exp(log a) - a:", ms.grid_max_diff(ms.inverse_transport(K, X), a))

for name, f, gamma, eta in ms.dpf_battery(grid):
    r1, r2 = (ms.verify_dpf(f, gamma, eta, n) for n in (1, 2))
    print(f"{name:>18}: eps={r1.eps:g}  n=1 {r1.residual:.1e}  n=2 {r2.residual:.1e}")

pts = rng.standard_normal((16, 2))
for name, (f, expected) in ms.holomorphy_battery().items():
    if f.dim == 2:
        rep = ms.holomorphy_check(f, pts)
        print(f"{name:>8}: residual {rep.residual:.2e}  holomorphic={rep.passes} (expected {expected})")
