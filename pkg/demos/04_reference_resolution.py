"""
Why the reference geometry needs a finer grid
=============================================

With Omega = B(0, 4) inside the inner half box, the box is at least
[-8, 8)^4 and a 32^4 grid has h >= 0.5.  The cutoff changes on the shell
r/2 <= d_E <= r, which for r = 0.25 is 0.125 wide.  At L = 9 no node
lands in it, so the discrete dbar of the cut-off function is zero and
the pipeline has nothing to correct.  At L = 8 a few nodes do, but the
cutoff then jumps from 0 to 1 within a single cell.
"""

import numpy as np

from hartogs import AffineSubspace, DomainSpec, ExtensionConfig, GridSpec, InputFunction, ObstacleSet, extend

for L, P in ((9.0, 16), (9.0, 32), (8.0, 32)):
    cfg = ExtensionConfig(GridSpec(2, P, L), DomainSpec.ball(np.zeros(4), 4.0),
                          ObstacleSet([(np.zeros(4), 0.5)]), AffineSubspace.coordinate(4), r=0.25, R=1.0)
    dE = cfg.obstacle.distance_field(cfg.grid)
    in_shell = np.count_nonzero((dE > 0.125) & (dE < 0.25))
    _, _, rep = extend(InputFunction.constant(1.0), cfg)
    print(f"L = {L}, P = {P}, h = {cfg.grid.spacing:.3f}: shell nodes {in_shell}, "
          f"|v|^2 = {rep.rhs.v_norm_sq:.1e}, interior error {rep.interior_error:.2f}")

# With u = 0 the result is just chi f, which is 0 on E: the constant 1 is
# not recovered inside the hole.  The shell needs a few nodes across,
# i.e. h <= r/4, which with L = 8 means P >= 256.
print("nodes across the shell at P = 32:", 0.125 / (16.0 / 32))
