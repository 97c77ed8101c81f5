"""Minimal-norm solution of ∂̄u = v on the periodic grid and certification
of the weighted L^2 estimates.

On the torus the complex Laplacian □ = ∂̄ϑ + ϑ∂̄ acts diagonally on Fourier
coefficients of each component with multiplier sum_j |σ_j|^2, σ_j the
symbol of ∂/∂z̄_j.  For closed data without harmonic content the form
u = ϑ □^+ v solves ∂̄u = v and lies in the range of ϑ, which is the
orthogonal complement of ker ∂̄, so it is the solution of least norm.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import PreconditionError, VerificationError
from .geometry import AffineSubspace
from .grid import (FormField, ScalarField, _adjoint_hat, _as_form, backward, dbar,
                   dbar_adjoint, forward, frequency_symbol, norm_l2, weighted_norm_sq)
from .hardy import hardy_constant

__all__ = [
    "SolveReport",
    "check_closed",
    "harmonic_part_norm",
    "project_exact",
    "solve_minimal",
    "certify_estimates",
    "apriori_inequality_check",
    "CLOSED_TOL",
    "HARMONIC_TOL",
    "RESIDUAL_TOL",
    "ESTIMATE_SLACK",
]

CLOSED_TOL = 1e-8
HARMONIC_TOL = 1e-10
RESIDUAL_TOL = 1e-10
ESTIMATE_SLACK = 1e-6
_TINY = 1e-300


def check_closed(v: FormField) -> float:
    """‖∂̄v‖ / ‖v‖ (0 for top-degree forms and for v = 0)."""
    v = _as_form(v)
    if v.degree >= v.grid.complex_dim:
        return 0.0
    nv = norm_l2(v)
    if nv == 0:
        return 0.0
    return norm_l2(dbar(v)) / max(nv, _TINY)


def harmonic_part_norm(v: FormField) -> float:
    """Relative norm of the Fourier modes of v that □ annihilates.

    These are the zero mode and the modes whose every wavenumber is 0 or
    Nyquist; on the torus v must be free of them to be ∂̄-exact.
    """
    v = _as_form(v)
    nv = norm_l2(v)
    if nv == 0:
        return 0.0
    grid = v.grid
    vhat = forward(v.data, grid.real_dim)
    harmonic = frequency_symbol(grid).harmonic_mask()
    # Parseval: sum |v|^2 = sum |vhat|^2 / size.
    part = np.sqrt(grid.cell_volume / grid.size * np.sum(np.abs(vhat[:, harmonic]) ** 2))
    return float(part / nv)


def _potential_hat(v: FormField) -> np.ndarray:
    grid = v.grid
    sym = frequency_symbol(grid)
    vhat = forward(v.data, grid.real_dim)
    with np.errstate(divide="ignore", invalid="ignore"):
        inverse = np.where(sym.box > 0, 1.0 / sym.box, 0.0)
    return _adjoint_hat(vhat * inverse, grid, v.degree)


def project_exact(v: FormField) -> FormField:
    """Orthogonal projection of v onto the range of ∂̄ (the exact forms)."""
    v = _as_form(v)
    if v.degree < 1:
        raise PreconditionError("exact forms have degree >= 1")
    u = FormField(v.grid, v.degree - 1, backward(_potential_hat(v), v.grid.real_dim))
    return dbar(u)


def solve_minimal(v: FormField, check: bool = True) -> FormField:
    """Least-norm u with ∂̄u = v.

    Parameters
    ----------
    v : FormField
        ∂̄-closed (0,q)-form, q >= 1, with no harmonic Fourier content.
    check : bool
        Enforce the closedness (1e-8) and harmonic-content (1e-10) gates.
        With ``check=False`` the result is the least-squares solution of
        least norm, i.e. the exact solution for ``project_exact(v)``.

    Returns
    -------
    FormField
        Degree q-1; a ScalarField-shaped form when q = 1.
    """
    v = _as_form(v)
    if v.degree < 1:
        raise PreconditionError("∂̄u = v needs v of degree >= 1")
    if check:
        closed = check_closed(v)
        if closed > CLOSED_TOL:
            raise PreconditionError(f"datum is not ∂̄-closed (relative defect {closed:.2e})")
        harmonic = harmonic_part_norm(v)
        if harmonic > HARMONIC_TOL:
            raise PreconditionError(
                f"datum has harmonic (zero-mode) content {harmonic:.2e}; not solvable on the torus"
            )
    return FormField(v.grid, v.degree - 1, backward(_potential_hat(v), v.grid.real_dim))


@dataclass
class SolveReport:
    residual_rel: float
    closedness_rel: float
    u_norm_sq: float
    v_norm_sq: float
    v_dH2: float
    zero_mode_norm: float
    codim: int
    dist_bound: float
    dist_margin: float
    v_over_omega: float | None = None
    weighted_bound: float | None = None
    weighted_margin: float | None = None
    slack: float = ESTIMATE_SLACK
    extra: dict = field(default_factory=dict)

    @property
    def dist_ok(self) -> bool:
        return self.u_norm_sq <= self.dist_bound * (1.0 + self.slack)

    @property
    def weighted_ok(self) -> bool:
        if self.weighted_bound is None:
            return True
        return self.u_norm_sq <= self.weighted_bound * (1.0 + self.slack)

    @property
    def residual_ok(self) -> bool:
        return self.residual_rel <= RESIDUAL_TOL

    @property
    def passed(self) -> bool:
        return self.residual_ok and self.dist_ok and self.weighted_ok

    def to_dict(self) -> dict:
        out = {
            "passed": self.passed,
            "residual_rel": self.residual_rel,
            "closedness_rel": self.closedness_rel,
            "zero_mode_norm": self.zero_mode_norm,
            "norms": {
                "u_sq": self.u_norm_sq,
                "v_sq": self.v_norm_sq,
                "v_sq_dH2": self.v_dH2,
                "v_sq_over_omega": self.v_over_omega,
            },
            "margins": {
                "dist_weighted": self.dist_bound - self.u_norm_sq,
                "weighted": (None if self.weighted_bound is None
                             else self.weighted_bound - self.u_norm_sq),
            },
            "bounds": {
                "dist_weighted": self.dist_bound,
                "weighted": self.weighted_bound,
                "dist_constant": 16.0 / (self.codim - 2) ** 2,
                "slack": self.slack,
            },
            "checks": {
                "residual": self.residual_ok,
                "dist_weighted": self.dist_ok,
                "weighted": self.weighted_ok,
            },
        }
        out.update(self.extra)
        return out


def certify_estimates(u: FormField, v: FormField, H: AffineSubspace,
                      reciprocal_weight: ScalarField | np.ndarray | None = None) -> SolveReport:
    """Record ‖u‖² against (16/(m-2)²)∫|v|²d_H² and, optionally, 4∫|v|²/ω.

    ``reciprocal_weight`` holds samples of 1/ω; it is the caller's job to
    make ω a valid Hardy weight on the support of v.
    """
    u, v = _as_form(u), _as_form(v)
    if u.grid != v.grid:
        raise ValueError("u and v live on different grids")
    if u.degree != v.degree - 1:
        raise ValueError("u must have degree one less than v")
    m = H.codim
    hardy_constant(m)
    grid = v.grid
    nv2 = norm_l2(v) ** 2
    residual = norm_l2(dbar(u) - v) / np.sqrt(nv2) if nv2 > 0 else norm_l2(dbar(u))
    dH = H.distance_field(grid)
    v_dH2 = weighted_norm_sq(v, dH**2)
    u2 = norm_l2(u) ** 2
    bound = 16.0 / (m - 2) ** 2 * v_dH2
    report = SolveReport(
        residual_rel=float(residual),
        closedness_rel=check_closed(v),
        u_norm_sq=u2,
        v_norm_sq=nv2,
        v_dH2=v_dH2,
        zero_mode_norm=harmonic_part_norm(v),
        codim=m,
        dist_bound=bound,
        dist_margin=bound - u2,
    )
    if reciprocal_weight is not None:
        vo = weighted_norm_sq(v, reciprocal_weight)
        report.v_over_omega = vo
        report.weighted_bound = 4.0 * vo
        report.weighted_margin = 4.0 * vo - u2
    return report


def apriori_inequality_check(u: FormField, H: AffineSubspace, slack: float = ESTIMATE_SLACK) -> float:
    """Margin 4(‖∂̄u‖² + ‖ϑu‖²)(1+slack) - ∫|u|²ω for ω = ((m-2)²/4) d_H^{-2}.

    Raises
    ------
    PreconditionError
        If u does not vanish within 10h of H.
    VerificationError
        If the margin is negative.
    """
    u = _as_form(u)
    grid = u.grid
    C = hardy_constant(H.codim)
    dH = H.distance_field(grid)
    near = dH < 10.0 * grid.spacing
    scale = np.max(np.abs(u.data))
    if scale > 0 and np.max(np.abs(u.data[:, near])) > 1e-12 * scale:
        raise PreconditionError("test form is not supported at distance >= 10h from H")
    omega = np.where(near, 0.0, C / np.where(near, 1.0, dH) ** 2)
    lhs = weighted_norm_sq(u, omega)
    rhs = 0.0
    if u.degree < grid.complex_dim:
        rhs += norm_l2(dbar(u)) ** 2
    if u.degree >= 1:
        rhs += norm_l2(dbar_adjoint(u)) ** 2
    margin = 4.0 * rhs * (1.0 + slack) - lhs
    if margin < 0:
        raise VerificationError(
            f"a priori inequality fails: {lhs:.6g} > 4*{rhs:.6g}", record={"lhs": lhs, "rhs": rhs}
        )
    return float(margin)
