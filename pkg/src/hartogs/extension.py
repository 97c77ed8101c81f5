"""The cutoff-and-correct extension: v = ∂̄(χ(d_E/r) f), u = least-norm
solution of ∂̄u = v, F = χ(d_E/r) f - u, plus the checks that F is a
holomorphic L^2 extension of f.

Discretization of v.  Because f is holomorphic on the transition shell,
∂̄(χ f) = f ∂̄χ there, and the samples v_raw = f χ'(d_E/r)/r ∂̄d_E are
supported exactly in {r/2 <= d_E <= r}.  Sampled products are not
discretely ∂̄-closed, so the datum handed to the solver is the orthogonal
projection of v_raw onto the range of the spectral ∂̄.  The size of the
discarded part (``projection_defect``) measures how well the grid
resolves the shell; the solution u is the same as the least-squares
solution for v_raw.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import HypothesisError, PreconditionError
from .geometry import ExtensionConfig, HypothesisReport, check_hypotheses
from .grid import FormField, GridSpec, ScalarField, norm_l2, weighted_norm_sq
from .solver import (CLOSED_TOL, ESTIMATE_SLACK, SolveReport, certify_estimates, check_closed,
                     project_exact, solve_minimal)

__all__ = [
    "InputFunction",
    "RhsInfo",
    "ExtensionReport",
    "FarField",
    "build_rhs",
    "extend",
    "farfield_vanishing_check",
    "holomorphy_check",
    "convergence_study",
    "TOL_AGREE",
    "TOL_INTERIOR",
    "TOL_HOLOMORPHY",
    "TOL_FAR",
]

TOL_AGREE = 1e-3
TOL_INTERIOR = 1e-3
TOL_HOLOMORPHY = 1e-3
TOL_FAR = 1e-2


def _coef(c) -> complex:
    if isinstance(c, (list, tuple)):
        return complex(c[0], c[1])
    return complex(c)


def _poly(terms, z):
    out = np.zeros(np.broadcast(*z).shape, dtype=np.complex128)
    for t in terms:
        powers = t.get("powers", [0] * len(z))
        if len(powers) != len(z):
            raise ValueError("monomial powers do not match the number of variables")
        term = np.full(out.shape, _coef(t.get("coef", 1.0)), dtype=np.complex128)
        for zj, a in zip(z, powers):
            if a:
                term = term * zj ** int(a)
        out = out + term
    return out


@dataclass
class InputFunction:
    """A holomorphic function given by a global formula.

    kinds and params
    ----------------
    polynomial : {"terms": [{"coef": c, "powers": [a_1, ..., a_n]}, ...]}
    rational : {"numerator": terms, "denominator": terms}
    exponential : {"coef": A, "linear": [a_1, ..., a_n], "constant": c}
        A exp(sum a_j z_j + c)

    Coefficients are numbers or ``[re, im]`` pairs.  The same formula is
    the known continuation across E, used for the interior-recovery check.
    """

    kind: str
    params: dict

    def __post_init__(self):
        if self.kind not in ("polynomial", "rational", "exponential"):
            raise ValueError(f"unknown input function kind {self.kind!r}")

    @classmethod
    def constant(cls, c, n: int = 2) -> "InputFunction":
        return cls("polynomial", {"terms": [{"coef": c, "powers": [0] * n}]})

    @classmethod
    def monomial(cls, powers, coef=1.0) -> "InputFunction":
        return cls("polynomial", {"terms": [{"coef": coef, "powers": list(powers)}]})

    @classmethod
    def simple_pole(cls, index: int, location, n: int = 2) -> "InputFunction":
        """1 / (z_index - location), ``index`` 1-based."""
        powers = [0] * n
        powers[index - 1] = 1
        return cls("rational", {
            "numerator": [{"coef": 1.0, "powers": [0] * n}],
            "denominator": [{"coef": 1.0, "powers": powers},
                            {"coef": -_coef(location), "powers": [0] * n}],
        })

    def __call__(self, z):
        z = [np.asarray(zj, dtype=np.complex128) for zj in z]
        if self.kind == "polynomial":
            return _poly(self.params["terms"], z)
        if self.kind == "rational":
            num = _poly(self.params["numerator"], z)
            den = _poly(self.params["denominator"], z)
            with np.errstate(divide="ignore", invalid="ignore"):
                return num / den
        lin = self.params.get("linear", [0.0] * len(z))
        expo = _coef(self.params.get("constant", 0.0)) + sum(_coef(a) * zj for a, zj in zip(lin, z))
        return _coef(self.params.get("coef", 1.0)) * np.exp(expo)

    def denominator(self, z):
        return _poly(self.params["denominator"], [np.asarray(zj, np.complex128) for zj in z])

    def samples(self, grid: GridSpec, mask: np.ndarray) -> np.ndarray:
        """Values on ``mask``, zero elsewhere."""
        z = grid.complex_coordinates()
        out = np.zeros(grid.shape, dtype=np.complex128)
        out[mask] = self([zj[mask] for zj in z])
        if not np.all(np.isfinite(out)):
            raise PreconditionError("input function is not finite on the sampled region")
        return out

    def check_holomorphic(self, cfg: ExtensionConfig) -> float:
        """Reject a rational f whose pole set meets the closure of Ω.

        From every sample within 2h of Ω one Newton step on the
        denominator q, z - q conj(∇q) / |∇q|^2, lands near the closest
        zero of q.  Steps no longer than 2h are trusted (exact when q is
        affine) and their endpoints must lie outside the closed domain, so
        a pole between nodes is caught too.

        Returns
        -------
        float
            The shortest Newton step from a sample of Ω, an estimate of the
            distance to the pole set; ``inf`` for entire kinds.
        """
        if self.kind != "rational":
            return float("inf")
        grid = cfg.grid
        h, n = grid.spacing, grid.complex_dim
        z = grid.complex_coordinates()
        near = cfg.domain.mask(grid, shrink=-2 * h)
        inside = cfg.domain.mask(grid)[near]
        zs = [np.asarray(zj[near], np.complex128) for zj in z]
        terms = self.params["denominator"]
        q = _poly(terms, zs)
        grad = np.zeros((n,) + q.shape, dtype=np.complex128)
        for j in range(n):
            dterms = []
            for t in terms:
                a = list(t["powers"])
                if a[j]:
                    c = _coef(t.get("coef", 1.0)) * a[j]
                    a[j] -= 1
                    dterms.append({"coef": [c.real, c.imag], "powers": a})
            if dterms:
                grad[j] = _poly(dterms, zs)
        g2 = np.sum(np.abs(grad) ** 2, axis=0)
        if np.any((q == 0) & inside):
            raise PreconditionError("denominator vanishes at a sample of Omega")
        ok = g2 > 0
        step = np.full(q.shape, np.inf)
        step[ok] = np.abs(q[ok]) / np.sqrt(g2[ok])
        trusted = ok & (step <= 2 * h)
        if trusted.any():
            delta = -q[trusted] * np.conj(grad[:, trusted]) / g2[trusted]
            p = np.stack([zs[j][trusted] + delta[j] for j in range(n)], axis=-1)
            pts = np.stack([p.real, p.imag], axis=-1).reshape(p.shape[0], 2 * n)
            if np.any(cfg.domain.boundary_distance(pts) >= 0):
                raise PreconditionError("denominator vanishes on the closure of Omega")
        return float(step[inside].min()) if inside.any() else float("inf")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": self.params}


@dataclass
class RhsInfo:
    f_norm_sq: float
    v_norm_sq: float
    v_dH2: float
    raw_norm_sq: float
    sup_chi_prime: float
    bound_v: float
    bound_v_dH2: float
    closedness_rel: float
    raw_closedness_rel: float
    projection_defect: float
    support_leakage: float
    raw_support_ok: bool
    shell_samples: int
    shell_cells_across: float
    inner_half_margin: float
    hypotheses: HypothesisReport

    @property
    def bound_v_ok(self) -> bool:
        return self.v_norm_sq <= self.bound_v * (1.0 + ESTIMATE_SLACK)

    @property
    def bound_v_dH2_ok(self) -> bool:
        return self.v_dH2 <= self.bound_v_dH2 * (1.0 + ESTIMATE_SLACK)

    def to_dict(self) -> dict:
        return {
            "f_norm_sq_omega_minus_E": self.f_norm_sq,
            "v_norm_sq": self.v_norm_sq,
            "v_sq_dH2": self.v_dH2,
            "raw_v_norm_sq": self.raw_norm_sq,
            "sup_chi_prime": self.sup_chi_prime,
            "bound_v_sq": self.bound_v,
            "bound_v_sq_dH2": self.bound_v_dH2,
            "closedness_rel": self.closedness_rel,
            "raw_closedness_rel": self.raw_closedness_rel,
            "projection_defect": self.projection_defect,
            "support_leakage": self.support_leakage,
            "raw_support_in_shell": self.raw_support_ok,
            "shell_samples": self.shell_samples,
            "shell_cells_across": self.shell_cells_across,
            "inner_half_margin": self.inner_half_margin,
        }


def _cutoff_fields(cfg: ExtensionConfig):
    grid = cfg.grid
    dE = cfg.obstacle.distance_field(grid)
    t = dE / cfg.r
    return dE, cfg.cutoff(t), cfg.cutoff.derivative(t)


def build_rhs(f: InputFunction, cfg: ExtensionConfig) -> tuple[FormField, RhsInfo]:
    """The (0,1)-form v = ∂̄(χ(d_E/r) f), projected onto exact forms.

    Raises
    ------
    HypothesisError
        If any hypothesis fails (the report is attached).
    """
    hyp = check_hypotheses(cfg)
    if not hyp.passed:
        raise HypothesisError("hypotheses fail: " + ", ".join(hyp.failed()), report=hyp)
    grid = cfg.grid
    if cfg.domain.inner_half_margin(grid) < 0:
        raise PreconditionError("Omega must lie in the inner half-box [-L/2, L/2]^{2n}")
    f.check_holomorphic(cfg)
    n, h, r = grid.complex_dim, grid.spacing, cfg.r
    dE, _, dchi = _cutoff_fields(cfg)
    omega = cfg.domain.mask(grid)
    region = omega & (dE > 0)
    f_s = f.samples(grid, region)

    grad = cfg.obstacle.gradient_field(grid)
    raw = np.empty((n,) + grid.shape, dtype=np.complex128)
    scale = f_s * dchi / r
    for j in range(n):
        raw[j] = scale * 0.5 * (grad[2 * j] + 1j * grad[2 * j + 1])
    v_raw = FormField(grid, 1, raw)
    v = project_exact(v_raw)

    shell = (dE >= 0.5 * r - h) & (dE <= r + h)
    raw_sq = norm_l2(v_raw) ** 2
    v_sq = norm_l2(v) ** 2
    support_ok = bool(np.all(raw[:, ~shell] == 0))
    leak = weighted_norm_sq(v, (~shell).astype(float))
    defect = norm_l2(v - v_raw) / np.sqrt(raw_sq) if raw_sq > 0 else 0.0

    f_sq = weighted_norm_sq(ScalarField(grid, f_s), region.astype(float))
    dH = cfg.subspace.distance_field(grid)
    sup = cfg.cutoff.sup_derivative
    info = RhsInfo(
        f_norm_sq=f_sq,
        v_norm_sq=v_sq,
        v_dH2=weighted_norm_sq(v, dH**2),
        raw_norm_sq=raw_sq,
        sup_chi_prime=sup,
        bound_v=sup**2 / r**2 * f_sq,
        bound_v_dH2=(cfg.R + r) ** 2 / r**2 * sup**2 * f_sq,
        closedness_rel=check_closed(v),
        raw_closedness_rel=check_closed(v_raw),
        projection_defect=float(defect),
        support_leakage=float(np.sqrt(leak / v_sq)) if v_sq > 0 else 0.0,
        raw_support_ok=support_ok,
        shell_samples=int(np.count_nonzero(region & (dchi > 0))),
        shell_cells_across=0.5 * r / h,
        inner_half_margin=cfg.domain.inner_half_margin(grid),
        hypotheses=hyp,
    )
    return v, info


@dataclass
class FarField:
    probe_max: float
    global_max: float
    probe_samples: int

    @property
    def ratio(self) -> float:
        return self.probe_max / self.global_max if self.global_max > 0 else 0.0


def farfield_vanishing_check(u: ScalarField, cfg: ExtensionConfig) -> FarField:
    """max |u| where d_E >= 3r and d_H >= R + 2r inside the inner half-box."""
    grid = cfg.grid
    if isinstance(u, FormField):
        u = u.to_scalar()
    probe = (grid.inner_half_mask()
             & (cfg.obstacle.distance_field(grid) >= 3 * cfg.r)
             & (cfg.subspace.distance_field(grid) >= cfg.R + 2 * cfg.r))
    count = int(np.count_nonzero(probe))
    if count == 0:
        raise PreconditionError("far-field probe region is empty inside the inner half-box")
    mag = np.abs(u.samples)
    return FarField(float(mag[probe].max()), float(mag.max()), count)


_FD4 = ((-2, 1.0 / 12), (-1, -8.0 / 12), (1, 8.0 / 12), (2, -1.0 / 12))


def _fd_axis(a: np.ndarray, axis: int, h: float) -> np.ndarray:
    # f(x + s h) sits at index i + s, so roll by -s.
    out = np.zeros_like(a)
    for s, w in _FD4:
        out += w * np.roll(a, -s, axis=axis)
    return out / h


def holomorphy_check(F: ScalarField, cfg: ExtensionConfig) -> float:
    """‖∂̄F‖ / ‖F‖ over Ω shrunk by 2h.

    ∂̄ is taken with fourth-order central differences, whose five-point
    stencil stays inside Ω at that margin, so values of F outside Ω
    never enter.
    """
    grid = cfg.grid
    h = grid.spacing
    inside = cfg.domain.mask(grid, shrink=2 * h)
    if not inside.any():
        raise PreconditionError("Omega shrunk by 2h contains no samples")
    data = F.samples
    total = np.zeros(grid.shape)
    for j in range(grid.complex_dim):
        d = 0.5 * (_fd_axis(data, 2 * j, h) + 1j * _fd_axis(data, 2 * j + 1, h))
        total += np.abs(d) ** 2
    num = np.sqrt(np.sum(total[inside]))
    den = np.sqrt(np.sum(np.abs(data[inside]) ** 2))
    if den == 0:
        return float(num)
    return float(num / den)


@dataclass
class ExtensionReport:
    config: dict
    function: dict
    rhs: RhsInfo
    solve: SolveReport
    agreement: float
    agreement_full: float
    interior_error: float | None
    interior_samples: int
    holomorphy_residual: float
    farfield: FarField | None
    F_norm_sq: float
    chi_f_norm_sq: float
    u_norm_sq: float
    final_bound_margin: float
    tolerances: dict = field(default_factory=lambda: {
        "agreement": TOL_AGREE, "interior": TOL_INTERIOR,
        "holomorphy": TOL_HOLOMORPHY, "farfield": TOL_FAR,
        "closedness": CLOSED_TOL, "slack": ESTIMATE_SLACK,
    })

    @property
    def checks(self) -> dict:
        t = self.tolerances
        out = {
            "hypotheses": self.rhs.hypotheses.passed,
            "shell_sampled": self.rhs.shell_samples > 0,
            "support": self.rhs.raw_support_ok,
            "closedness": self.rhs.closedness_rel <= t["closedness"],
            "bound_v": self.rhs.bound_v_ok,
            "bound_v_dH2": self.rhs.bound_v_dH2_ok,
            "residual": self.solve.residual_ok,
            "dist_weighted": self.solve.dist_ok,
            "agreement": self.agreement <= t["agreement"],
            "holomorphy": self.holomorphy_residual <= t["holomorphy"],
            "final_bound": self.final_bound_margin >= 0,
        }
        if self.interior_error is not None:
            out["interior"] = self.interior_error <= t["interior"]
        if self.farfield is not None:
            out["farfield"] = self.farfield.ratio <= t["farfield"]
        return out

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "checks": self.checks,
            "config": self.config,
            "function": self.function,
            "hypotheses": self.rhs.hypotheses.to_dict(),
            "rhs": self.rhs.to_dict(),
            "solve": self.solve.to_dict(),
            "agreement_rel": self.agreement,
            "agreement_rel_full": self.agreement_full,
            "interior_recovery_error": self.interior_error,
            "interior_samples": self.interior_samples,
            "holomorphy_residual": self.holomorphy_residual,
            "farfield": None if self.farfield is None else {
                "probe_max": self.farfield.probe_max,
                "global_max": self.farfield.global_max,
                "ratio": self.farfield.ratio,
                "probe_samples": self.farfield.probe_samples,
            },
            "norms": {
                "F_sq_omega": self.F_norm_sq,
                "chi_f_sq_omega": self.chi_f_norm_sq,
                "u_sq": self.u_norm_sq,
            },
            "final_bound_margin": self.final_bound_margin,
            "tolerances": self.tolerances,
        }


def _rel(diff: np.ndarray, ref: np.ndarray, mask: np.ndarray) -> float:
    den = np.linalg.norm(ref[mask])
    if not mask.any():
        return float("nan")
    num = np.linalg.norm(diff[mask])
    return float(num / den) if den > 0 else float(num)


def extend(f: InputFunction, cfg: ExtensionConfig,
           known_continuation: bool = True) -> tuple[ScalarField, ScalarField, ExtensionReport]:
    """Run the full construction.

    Returns
    -------
    F : ScalarField
        χ(d_E/r) f - u; meaningful on Ω.
    u : ScalarField
        The least-norm correction.
    report : ExtensionReport
    """
    v, info = build_rhs(f, cfg)
    u = solve_minimal(v).to_scalar()
    grid = cfg.grid
    dE, chi, _ = _cutoff_fields(cfg)
    omega = cfg.domain.mask(grid)
    region = omega & (dE > 0)
    f_s = f.samples(grid, region)
    chi_f = chi * f_s
    F = ScalarField(grid, chi_f - u.samples)

    solve = certify_estimates(u.as_form(), v, cfg.subspace)
    far_mask = region & (dE >= 2 * cfg.r)
    agreement = _rel(F.samples - f_s, f_s, far_mask)
    agreement_full = _rel(F.samples - f_s, f_s, region)

    interior, interior_count = None, 0
    if known_continuation:
        inE = omega & (dE == 0)
        interior_count = int(np.count_nonzero(inE))
        near = omega & (dE <= cfg.r)
        truth = f.samples(grid, near)
        if interior_count:
            den = np.linalg.norm(truth[near])
            num = np.linalg.norm((F.samples - truth)[inE])
            interior = float(num / den) if den > 0 else float(num)
        else:
            interior = float("inf")

    try:
        far = farfield_vanishing_check(u, cfg)
    except PreconditionError:
        far = None

    vol = grid.cell_volume
    F_sq = vol * float(np.sum(np.abs(F.samples[omega]) ** 2))
    chi_f_sq = vol * float(np.sum(np.abs(chi_f[omega]) ** 2))
    u_sq = norm_l2(u) ** 2
    margin = 2 * chi_f_sq + 2 * u_sq * (1.0 + ESTIMATE_SLACK) - F_sq

    report = ExtensionReport(
        config=cfg.to_dict(),
        function=f.to_dict(),
        rhs=info,
        solve=solve,
        agreement=agreement,
        agreement_full=agreement_full,
        interior_error=interior,
        interior_samples=interior_count,
        holomorphy_residual=holomorphy_check(F, cfg),
        farfield=far,
        F_norm_sq=F_sq,
        chi_f_norm_sq=chi_f_sq,
        u_norm_sq=u_sq,
        final_bound_margin=float(margin),
    )
    return F, u, report


def convergence_study(f: InputFunction, cfg: ExtensionConfig, resolutions=(16, 24, 32),
                      band: float = 2.0) -> dict:
    """Agreement error across resolutions; monotone within a factor ``band``."""
    errors = []
    for P in resolutions:
        _, _, rep = extend(f, cfg.with_grid(cfg.grid.with_resolution(P)))
        errors.append(rep.agreement)
    monotone = all(b <= band * a for a, b in zip(errors, errors[1:]))
    return {"resolutions": list(resolutions), "agreement": errors, "band": band,
            "monotone": bool(monotone)}
