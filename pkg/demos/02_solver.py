"""
The minimal-norm d-bar solve
============================

For a closed (0,1)-form v on the periodic box we want the u with
dbar u = v and the smallest L^2 norm.  In Fourier space that is
u = theta S^+ v, with S the symbol of the complex Laplacian.
"""

import numpy as np

from hartogs import AffineSubspace, GridSpec, certify_estimates, dbar, norm_l2, solve_minimal
from hartogs.hardy import sample_test_function
from hartogs.solver import check_closed, harmonic_part_norm

grid = GridSpec(2, 32, 8.0)
H = AffineSubspace.coordinate(4)

# Take v = dbar g for a smooth bump away from H.  Then v is closed and
# the minimal solution is g minus its mean.
g = sample_test_function("bump", {"center": [2.0, 0.0, 0.0, 0.0], "width": 1.5, "amplitude": 1.0}, grid)
v = dbar(g)
print(f"closedness |dbar v|/|v|: {check_closed(v):.1e}")
print(f"harmonic content: {harmonic_part_norm(v):.1e}")

u = solve_minimal(v)
print(f"residual |dbar u - v|/|v|: {norm_l2(dbar(u) - v) / norm_l2(v):.1e}")
exact = g.samples - g.samples.mean()
print(f"distance to g - mean(g): {np.linalg.norm(u.data[0] - exact) / np.linalg.norm(exact):.1e}")

# Certify the weighted estimates with the constants 4 and 16/(m-2)^2.
rep = certify_estimates(u, v, H)
print(f"|u|^2 = {rep.u_norm_sq:.4g} <= 16/(m-2)^2 int |v|^2 d_H^2 = {rep.dist_bound:.4g}")
print(f"slack factor {rep.dist_bound / rep.u_norm_sq:.1f}")
