import numpy as np
import pytest

from hartogs.grid import FormField, GridSpec, ScalarField, backward, form_keys

# Lines recorded by tests/test_acceptance.py, echoed after the run.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def band_limited(grid, rng, modes=2, degree=None, scale=1.0):
    """Random complex field whose spectrum sits in |k| <= modes on every axis.

    Returns a ScalarField (degree None) or a FormField of the given degree.
    Every wavenumber is far from Nyquist, so spectral derivatives are exact.
    """
    ncomp = 1 if degree is None else len(form_keys(grid.complex_dim, degree))
    P, N = grid.points_per_axis, grid.real_dim
    k = np.fft.fftfreq(P, d=1.0 / P)
    keep = np.abs(k) <= modes
    mask = np.ones((P,) * N, dtype=bool)
    for a in range(N):
        shape = [1] * N
        shape[a] = P
        mask = mask & keep.reshape(shape)
    coeffs = np.zeros((ncomp,) + grid.shape, dtype=np.complex128)
    count = int(mask.sum())
    for c in range(ncomp):
        coeffs[c][mask] = rng.normal(size=count) + 1j * rng.normal(size=count)
    data = scale * backward(coeffs, N)
    if degree is None:
        return ScalarField(grid, data[0])
    return FormField(grid, degree, data)


def gaussian(grid, center=None, width=1.0):
    c = np.zeros(grid.real_dim) if center is None else np.asarray(center, float)
    return ScalarField.from_function(
        grid, lambda *x: np.exp(-sum((xa - ca) ** 2 for xa, ca in zip(x, c)) / (2 * width**2)))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def grid8():
    return GridSpec(2, 8, np.pi)


@pytest.fixture(scope="session")
def grid16():
    return GridSpec(2, 16, 4.0)
