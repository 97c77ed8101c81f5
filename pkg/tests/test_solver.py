import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hartogs.errors import PreconditionError, VerificationError
from hartogs.geometry import AffineSubspace
from hartogs.grid import FormField, GridSpec, ScalarField, dbar, inner, norm_l2
from hartogs.hardy import sample_test_function
from hartogs.solver import (apriori_inequality_check, certify_estimates, check_closed,
                            harmonic_part_norm, project_exact, solve_minimal)

from conftest import band_limited, gaussian
from oracles import dense_dbar_matrix, least_norm_solution

ORIGIN = AffineSubspace.coordinate(4)


def test_zero_datum(grid8):
    v = FormField.zeros(grid8, 1)
    u = solve_minimal(v)
    assert np.all(u.data == 0)
    rep = certify_estimates(u, v, ORIGIN)
    assert rep.passed
    assert rep.dist_margin == 0.0


def test_closedness():
    grid = GridSpec(2, 16, 4.0)
    g = gaussian(grid)
    assert check_closed(dbar(g)) <= 1e-12
    only_first = FormField.from_components(grid, 1, {(1,): g})
    assert check_closed(only_first) > 0.1
    assert check_closed(FormField.zeros(grid, 1)) == 0.0
    assert check_closed(FormField.from_components(grid, 2, {(1, 2): g})) == 0.0


def test_exact_oracle():
    # v = ∂̄g for a resolved Gaussian: the least-norm solution is g - mean(g)
    grid = GridSpec(2, 32, 8.0)
    g = gaussian(grid, center=[0.5, -0.5, 0.25, 0.0], width=1.2)
    u = solve_minimal(dbar(g)).to_scalar()
    exact = g.samples - g.samples.mean()
    assert np.linalg.norm(u.samples - exact) <= 1e-10 * np.linalg.norm(exact)


@pytest.mark.parametrize("seed", range(3))
def test_dense_least_squares_oracle(seed):
    grid = GridSpec(2, 8, np.pi)
    rng = np.random.default_rng(seed)
    g = ScalarField(grid, rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape))
    v = dbar(g)
    A = dense_dbar_matrix(8, np.pi)
    assert np.allclose(A @ g.samples.ravel(), v.data.reshape(-1), atol=1e-12)
    ref = least_norm_solution(A, v.data.reshape(-1))
    u = solve_minimal(v).to_scalar().samples.ravel()
    assert np.linalg.norm(u - ref) <= 1e-8 * np.linalg.norm(ref)


def test_minimal_norm_properties(grid16, rng):
    g = band_limited(grid16, rng) + 3.0
    u = solve_minimal(dbar(g)).to_scalar()
    assert abs(u.samples.mean()) <= 1e-12 * np.abs(u.samples).max()
    base = norm_l2(u)
    for c in (1e-3, -0.5, 2j, 1 + 1j):
        assert norm_l2(u + c) > base


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), alpha=st.complex_numbers(max_magnitude=10, allow_nan=False),
       beta=st.complex_numbers(max_magnitude=10, allow_nan=False))
def test_linearity(seed, alpha, beta):
    grid = GridSpec(2, 8, 2.0)
    rng = np.random.default_rng(seed)
    v1 = dbar(band_limited(grid, rng))
    v2 = dbar(band_limited(grid, rng))
    lhs = solve_minimal(v1 * alpha + v2 * beta)
    rhs = solve_minimal(v1) * alpha + solve_minimal(v2) * beta
    scale = abs(alpha) * norm_l2(solve_minimal(v1)) + abs(beta) * norm_l2(solve_minimal(v2))
    assert norm_l2(lhs - rhs) <= 1e-10 * scale + 1e-300


def test_residual_on_band_limited_data(grid16, rng):
    v = dbar(band_limited(grid16, rng, modes=4))
    u = solve_minimal(v)
    assert norm_l2(dbar(u) - v) <= 1e-10 * norm_l2(v)


def test_rejects_non_closed():
    grid = GridSpec(2, 16, 4.0)
    v = FormField.from_components(grid, 1, {(1,): gaussian(grid)})
    with pytest.raises(PreconditionError, match="closed"):
        solve_minimal(v)


def test_rejects_harmonic_content(grid8):
    # a constant (0,1)-form is closed but not exact on the torus
    v = FormField(grid8, 1, np.ones((2,) + grid8.shape))
    assert check_closed(v) == 0.0
    assert harmonic_part_norm(v) == pytest.approx(1.0)
    with pytest.raises(PreconditionError, match="harmonic"):
        solve_minimal(v)


def test_rejects_functions(grid8):
    with pytest.raises(PreconditionError):
        solve_minimal(ScalarField.zeros(grid8))


def test_projection_is_idempotent_and_orthogonal(grid8, rng):
    w = FormField(grid8, 1, rng.normal(size=(2,) + grid8.shape))
    p = project_exact(w)
    assert norm_l2(project_exact(p) - p) <= 1e-12 * norm_l2(p)
    assert abs(inner(w - p, p)) <= 1e-12 * norm_l2(w) ** 2
    u = solve_minimal(w, check=False)
    assert norm_l2(dbar(u) - p) <= 1e-12 * norm_l2(p)


def test_top_degree_solve():
    # every (0,2)-form in two variables is closed
    grid = GridSpec(2, 16, 4.0)
    v = FormField.from_components(grid, 2, {(1, 2): gaussian(grid) - gaussian(grid).samples.mean()})
    u = solve_minimal(v, check=False)
    assert u.degree == 1
    assert norm_l2(dbar(u) - project_exact(v)) <= 1e-12 * norm_l2(v)


def test_distance_bound_scaling():
    # For data centred at distance D from H = {0}, ∫|v|^2 d_H^2 = (D^2 + s^2)‖v‖^2
    # with s^2 the spread of |v|^2, so the ratio moves by exactly D2^2 - D1^2.
    grid = GridSpec(2, 32, 8.0)
    ratios = {}
    for D in (2.0, 3.0):
        g = sample_test_function("bump", {"center": [D, 0, 0, 0], "width": 0.75, "amplitude": 1.0},
                                 grid)
        v = dbar(g)
        u = solve_minimal(v)
        rep = certify_estimates(u, v, ORIGIN)
        assert rep.passed
        # looseness factor 16/(m-2)^2 (D^2 + s^2) ‖v‖^2/‖u‖^2 with m = 4
        assert rep.dist_bound == pytest.approx(4 * rep.v_dH2)
        ratios[D] = rep.v_dH2 / rep.v_norm_sq
    # spectral tails of the sampled bump reach the far, heavily weighted cells
    assert ratios[3.0] - ratios[2.0] == pytest.approx(5.0, rel=1e-2)
    assert 0 < ratios[2.0] - 4.0 < 0.75**2 * 4


def test_weighted_bound_with_reciprocal_weight():
    grid = GridSpec(2, 16, 4.0)
    H = AffineSubspace.coordinate(4, [3])
    g = sample_test_function("bump", {"center": [1.0, 0, 0, 0], "width": 0.9, "amplitude": 1.0}, grid)
    v = dbar(g)
    u = solve_minimal(v)
    d = H.distance_field(grid)
    recip = np.where(d > 0, 4.0 * d**2, 0.0)
    rep = certify_estimates(u, v, H, reciprocal_weight=recip)
    assert rep.weighted_bound == pytest.approx(4 * rep.v_over_omega)
    assert rep.weighted_ok
    assert rep.to_dict()["bounds"]["dist_constant"] == 16.0


def test_certify_rejects_mismatched_inputs(grid8, grid16):
    with pytest.raises(ValueError):
        certify_estimates(ScalarField.zeros(grid8), FormField.zeros(grid16, 1), ORIGIN)
    with pytest.raises(ValueError):
        certify_estimates(FormField.zeros(grid8, 1), FormField.zeros(grid8, 1), ORIGIN)


def _off_subspace_form(grid, rng, center, radius=0.75):
    x = grid.coordinates()
    rho2 = sum((xa - ca) ** 2 for xa, ca in zip(x, center)) / radius**2
    bump = np.zeros(grid.shape)
    inside = np.broadcast_to(rho2 < 1, grid.shape)
    bump[inside] = np.exp(1 - 1 / (1 - np.broadcast_to(rho2, grid.shape)[inside]))
    coef = rng.normal(size=2) + 1j * rng.normal(size=2)
    return FormField(grid, 1, np.stack([coef[0] * bump, coef[1] * bump]))


@pytest.mark.parametrize("H", [ORIGIN, AffineSubspace.coordinate(4, [3])])
def test_apriori_inequality(H, rng):
    grid = GridSpec(2, 24, 4.0)
    for _ in range(5):
        center = rng.uniform(2.5, 3.0, size=4) * np.array([1, 1, 1, 0])
        u = _off_subspace_form(grid, rng, center)
        assert apriori_inequality_check(u, H) >= 0


def test_apriori_zero_and_preconditions(grid16, rng):
    assert apriori_inequality_check(FormField.zeros(grid16, 1), ORIGIN) == 0.0
    near = _off_subspace_form(grid16, rng, np.zeros(4))
    with pytest.raises(PreconditionError):
        apriori_inequality_check(near, ORIGIN)


def test_apriori_violation_is_reported(grid16, rng, monkeypatch):
    import hartogs.solver as solver
    monkeypatch.setattr(solver, "hardy_constant", lambda m: 1e6)
    u = _off_subspace_form(GridSpec(2, 24, 4.0), rng, [3.0, 3.0, 0, 0])
    with pytest.raises(VerificationError) as err:
        apriori_inequality_check(u, ORIGIN)
    assert err.value.record["lhs"] > err.value.record["rhs"]
