"""Periodic grids over truncated C^n, scalar and (0,q)-form fields, and
spectral realizations of the d-bar operator, its formal adjoint, the real
Laplacian and the complex Laplacian.

Coordinate convention: the real axes are x_1, ..., x_{2n} and
z_j = x_{2j-1} + i x_{2j}.  In code the axes are 0-based, so z_j pairs axes
2(j-1) and 2(j-1)+1.  Form multi-indices are 1-based tuples, e.g. ``(1,)``
for dz̄_1 and ``(1, 2)`` for dz̄_1 ∧ dz̄_2.

Sign convention (checked by the adjointness tests):

    (∂̄w)_K  = sum_p (-1)^p  ∂_{z̄_{K[p]}} w_{K \\ K[p]}
    (ϑw)_J  = sum_{j not in J} (-1)^{#{i in J: i < j}} (-∂_{z_j}) w_{J ∪ {j}}

Inner products are conjugate-linear in the first argument (``np.vdot``).
"""

from __future__ import annotations

import functools
import itertools
import os
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np
import scipy.fft

__all__ = [
    "GridSpec",
    "ScalarField",
    "FormField",
    "FrequencySymbol",
    "frequency_symbol",
    "form_keys",
    "dbar",
    "dbar_adjoint",
    "laplacian",
    "box_laplacian",
    "gradient",
    "dirichlet_energy",
    "norm_l2",
    "inner",
    "weighted_norm_sq",
    "forward",
    "backward",
]


def _workers() -> int | None:
    value = os.environ.get("HARTOGS_THREADS")
    if not value:
        return None
    return max(1, int(value))


def forward(samples: np.ndarray, ndim: int) -> np.ndarray:
    """FFT over the trailing ``ndim`` axes."""
    axes = tuple(range(-ndim, 0))
    return scipy.fft.fftn(samples, axes=axes, workers=_workers())


def backward(coeffs: np.ndarray, ndim: int) -> np.ndarray:
    """Inverse FFT over the trailing ``ndim`` axes."""
    axes = tuple(range(-ndim, 0))
    return scipy.fft.ifftn(coeffs, axes=axes, workers=_workers())


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid on the box [-L, L)^{2n}.

    Parameters
    ----------
    complex_dim : int
        Number of complex variables n.
    points_per_axis : int
        Samples per real axis, at least 8: a power of two or three times one.
    half_width : float
        Half the box edge L.
    """

    complex_dim: int
    points_per_axis: int
    half_width: float

    def __post_init__(self):
        n, P, L = self.complex_dim, self.points_per_axis, self.half_width
        if int(n) != n or n < 1:
            raise ValueError(f"complex_dim must be a positive integer, got {n!r}")
        if int(P) != P or P < 8 or not _allowed_size(int(P)):
            raise ValueError(
                f"points_per_axis must be >= 8 and a power of two "
                f"(or three times one), got {P!r}"
            )
        if not np.isfinite(L) or L <= 0:
            raise ValueError(f"half_width must be positive, got {L!r}")
        object.__setattr__(self, "complex_dim", int(n))
        object.__setattr__(self, "points_per_axis", int(P))
        object.__setattr__(self, "half_width", float(L))

    @property
    def real_dim(self) -> int:
        return 2 * self.complex_dim

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / self.points_per_axis

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points_per_axis,) * self.real_dim

    @property
    def size(self) -> int:
        return self.points_per_axis**self.real_dim

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.real_dim

    def axis(self) -> np.ndarray:
        """Sample positions along one axis: -L + k h, k = 0..P-1."""
        return -self.half_width + self.spacing * np.arange(self.points_per_axis)

    def coordinates(self, sparse: bool = True) -> list[np.ndarray]:
        """Real coordinates x_1..x_{2n}, broadcastable to ``shape``."""
        x = self.axis()
        return np.meshgrid(*([x] * self.real_dim), indexing="ij", sparse=sparse)

    def complex_coordinates(self) -> list[np.ndarray]:
        """z_1..z_n as full arrays."""
        X = self.coordinates(sparse=True)
        return [
            np.broadcast_to(X[2 * j] + 1j * X[2 * j + 1], self.shape)
            for j in range(self.complex_dim)
        ]

    def points(self) -> np.ndarray:
        """All sample points, shape ``(*shape, 2n)``."""
        X = self.coordinates(sparse=False)
        return np.stack(X, axis=-1)

    def inner_half_mask(self) -> np.ndarray:
        """Samples with every coordinate in [-L/2, L/2]."""
        half = 0.5 * self.half_width
        mask = np.ones(self.shape, dtype=bool)
        for X in self.coordinates():
            mask = mask & (np.abs(X) <= half)
        return mask

    def with_resolution(self, points_per_axis: int) -> "GridSpec":
        return GridSpec(self.complex_dim, points_per_axis, self.half_width)

    def to_dict(self) -> dict:
        return {
            "complex_dim": self.complex_dim,
            "points_per_axis": self.points_per_axis,
            "half_width": self.half_width,
        }


def _allowed_size(P: int) -> bool:
    # 2^a or 3 * 2^a; the convergence study runs at 24 points per axis.
    while P % 2 == 0:
        P //= 2
    return P in (1, 3)


def form_keys(n: int, q: int) -> tuple[tuple[int, ...], ...]:
    """Strictly increasing 1-based multi-indices of length q in {1..n}."""
    if not 0 <= q <= n:
        raise ValueError(f"form degree {q} out of range for n = {n}")
    return tuple(itertools.combinations(range(1, n + 1), q))


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Complex samples of a function on a grid."""

    grid: GridSpec
    samples: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.samples, dtype=np.complex128)
        if data.size != self.grid.size:
            raise ValueError(
                f"expected {self.grid.size} samples, got {data.size}"
            )
        data = data.reshape(self.grid.shape)
        if not np.all(np.isfinite(data)):
            raise ValueError("field samples must be finite")
        object.__setattr__(self, "samples", data)

    @classmethod
    def zeros(cls, grid: GridSpec) -> "ScalarField":
        return cls(grid, np.zeros(grid.shape, dtype=np.complex128))

    @classmethod
    def from_function(cls, grid: GridSpec, func) -> "ScalarField":
        """Sample ``func(*x)`` where x are the real coordinate arrays."""
        values = func(*grid.coordinates())
        return cls(grid, np.broadcast_to(values, grid.shape))

    def as_form(self) -> "FormField":
        return FormField(self.grid, 0, self.samples[None])

    def _check(self, other: "ScalarField"):
        if other.grid != self.grid:
            raise ValueError("grid mismatch")

    def __add__(self, other):
        if isinstance(other, ScalarField):
            self._check(other)
            return ScalarField(self.grid, self.samples + other.samples)
        return ScalarField(self.grid, self.samples + other)

    def __sub__(self, other):
        if isinstance(other, ScalarField):
            self._check(other)
            return ScalarField(self.grid, self.samples - other.samples)
        return ScalarField(self.grid, self.samples - other)

    def __mul__(self, other):
        if isinstance(other, ScalarField):
            self._check(other)
            return ScalarField(self.grid, self.samples * other.samples)
        return ScalarField(self.grid, self.samples * other)

    __rmul__ = __mul__

    def __neg__(self):
        return ScalarField(self.grid, -self.samples)


@dataclass(frozen=True, eq=False)
class FormField:
    """A (0,q)-form stored as a stack of component arrays.

    ``data[i]`` is the coefficient of dz̄_J for ``J = keys[i]``.
    """

    grid: GridSpec
    degree: int
    data: np.ndarray
    keys: tuple = field(init=False)

    def __post_init__(self):
        n = self.grid.complex_dim
        keys = form_keys(n, self.degree)
        data = np.asarray(self.data, dtype=np.complex128)
        expected = (len(keys),) + self.grid.shape
        if data.size != int(np.prod(expected)):
            raise ValueError(
                f"degree-{self.degree} form needs {len(keys)} components of "
                f"{self.grid.size} samples"
            )
        data = data.reshape(expected)
        if not np.all(np.isfinite(data)):
            raise ValueError("form samples must be finite")
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "keys", keys)

    @classmethod
    def zeros(cls, grid: GridSpec, degree: int) -> "FormField":
        ncomp = len(form_keys(grid.complex_dim, degree))
        return cls(grid, degree, np.zeros((ncomp,) + grid.shape, np.complex128))

    @classmethod
    def from_components(
        cls, grid: GridSpec, degree: int, components: dict
    ) -> "FormField":
        """Build from ``{key: ScalarField | array}``; missing keys are zero."""
        out = np.zeros((len(form_keys(grid.complex_dim, degree)),) + grid.shape,
                       dtype=np.complex128)
        keys = form_keys(grid.complex_dim, degree)
        for key, value in components.items():
            key = tuple(key)
            if key not in keys:
                raise KeyError(f"{key} is not a degree-{degree} multi-index")
            if isinstance(value, ScalarField):
                if value.grid != grid:
                    raise ValueError("grid mismatch between components")
                value = value.samples
            out[keys.index(key)] = value
        return cls(grid, degree, out)

    def __getitem__(self, key) -> ScalarField:
        return ScalarField(self.grid, self.data[self.keys.index(tuple(key))])

    def components(self) -> dict:
        return {key: ScalarField(self.grid, self.data[i])
                for i, key in enumerate(self.keys)}

    def to_scalar(self) -> ScalarField:
        if self.degree != 0:
            raise ValueError("only degree-0 forms are scalar fields")
        return ScalarField(self.grid, self.data[0])

    def _check(self, other: "FormField"):
        if other.grid != self.grid or other.degree != self.degree:
            raise ValueError("grid or degree mismatch")

    def __add__(self, other: "FormField") -> "FormField":
        self._check(other)
        return FormField(self.grid, self.degree, self.data + other.data)

    def __sub__(self, other: "FormField") -> "FormField":
        self._check(other)
        return FormField(self.grid, self.degree, self.data - other.data)

    def __mul__(self, scalar) -> "FormField":
        if isinstance(scalar, ScalarField):
            if scalar.grid != self.grid:
                raise ValueError("grid mismatch")
            return FormField(self.grid, self.degree, self.data * scalar.samples)
        return FormField(self.grid, self.degree, self.data * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> "FormField":
        return FormField(self.grid, self.degree, -self.data)


Field = Union[ScalarField, FormField]


def _as_form(w: Field) -> FormField:
    if isinstance(w, ScalarField):
        return w.as_form()
    if isinstance(w, FormField):
        return w
    raise TypeError(f"expected ScalarField or FormField, got {type(w).__name__}")


def _like(template: Field, data: np.ndarray) -> Field:
    if isinstance(template, ScalarField):
        return ScalarField(template.grid, data)
    return FormField(template.grid, template.degree, data)


@dataclass(frozen=True, eq=False)
class FrequencySymbol:
    """Fourier multipliers on a grid.

    Attributes
    ----------
    wavenumbers : ndarray
        Angular frequencies xi = 2 pi k / (2L), k in fftfreq order.
    derivative : ndarray
        First-derivative multiplier i*xi with the Nyquist mode zeroed.
    dbar, dz : list of ndarray
        Multipliers for d/dz̄_j and d/dz_j, broadcastable to the grid shape.
    laplacian : ndarray
        -|xi|^2 (Nyquist included), full grid shape.
    box : ndarray
        sum_j |dbar_j|^2, the multiplier of the complex Laplacian on forms.
        Equals -laplacian/4 except on modes carrying a Nyquist wavenumber.
    """

    grid: GridSpec
    wavenumbers: np.ndarray
    derivative: np.ndarray
    dbar: list
    dz: list
    laplacian: np.ndarray
    box: np.ndarray

    def axis_derivative(self, a: int) -> np.ndarray:
        """Broadcastable first-derivative multiplier along real axis ``a``."""
        shape = [1] * self.grid.real_dim
        shape[a] = self.grid.points_per_axis
        return self.derivative.reshape(shape)

    def harmonic_mask(self) -> np.ndarray:
        """Modes annihilated by every d/dz̄_j (zero mode and Nyquist corners)."""
        return self.box == 0


@functools.lru_cache(maxsize=16)
def frequency_symbol(grid: GridSpec) -> FrequencySymbol:
    P, N = grid.points_per_axis, grid.real_dim
    k = scipy.fft.fftfreq(P, d=1.0 / P)
    xi = np.pi * k / grid.half_width
    d1 = 1j * xi
    if P % 2 == 0:
        d1[P // 2] = 0.0

    def along(a, arr):
        shape = [1] * N
        shape[a] = P
        return arr.reshape(shape)

    dbar_sym, dz_sym = [], []
    for j in range(grid.complex_dim):
        dx, dy = along(2 * j, d1), along(2 * j + 1, d1)
        dbar_sym.append(0.5 * (dx + 1j * dy))
        dz_sym.append(0.5 * (dx - 1j * dy))
    lap = np.zeros(grid.shape)
    for a in range(N):
        lap = lap - along(a, xi**2)
    box = np.zeros(grid.shape)
    for s in dbar_sym:
        box = box + np.abs(s) ** 2
    for arr in (xi, d1, lap, box):
        arr.setflags(write=False)
    return FrequencySymbol(grid, xi, d1, dbar_sym, dz_sym, lap, box)


def _insert_sign(J: Sequence[int], j: int) -> int:
    """Sign of moving dz̄_j to its sorted place in dz̄_J."""
    return -1 if sum(1 for i in J if i < j) % 2 else 1


def _dbar_hat(what: np.ndarray, grid: GridSpec, q: int) -> np.ndarray:
    n = grid.complex_dim
    sym = frequency_symbol(grid)
    src = form_keys(n, q)
    dst = form_keys(n, q + 1)
    out = np.zeros((len(dst),) + grid.shape, dtype=np.complex128)
    for i, K in enumerate(dst):
        for p, j in enumerate(K):
            J = K[:p] + K[p + 1:]
            sign = -1.0 if p % 2 else 1.0
            out[i] += sign * sym.dbar[j - 1] * what[src.index(J)]
    return out


def _adjoint_hat(what: np.ndarray, grid: GridSpec, q: int) -> np.ndarray:
    n = grid.complex_dim
    sym = frequency_symbol(grid)
    src = form_keys(n, q)
    dst = form_keys(n, q - 1)
    out = np.zeros((len(dst),) + grid.shape, dtype=np.complex128)
    for i, J in enumerate(dst):
        for j in range(1, n + 1):
            if j in J:
                continue
            K = tuple(sorted(J + (j,)))
            out[i] += _insert_sign(J, j) * np.conj(sym.dbar[j - 1]) * what[src.index(K)]
    return out


def dbar(w: Field) -> FormField:
    """Spectral ∂̄ of a (0,q)-form (scalars are treated as q = 0)."""
    w = _as_form(w)
    q, grid = w.degree, w.grid
    if q >= grid.complex_dim:
        raise ValueError(f"∂̄ of a degree-{q} form vanishes identically for n = {grid.complex_dim}")
    N = grid.real_dim
    out = _dbar_hat(forward(w.data, N), grid, q)
    return FormField(grid, q + 1, backward(out, N))


def dbar_adjoint(w: FormField) -> FormField:
    """Spectral formal adjoint ϑ of ∂̄, lowering the degree by one."""
    w = _as_form(w)
    q, grid = w.degree, w.grid
    if q < 1:
        raise ValueError("ϑ is not defined on degree-0 forms")
    N = grid.real_dim
    out = _adjoint_hat(forward(w.data, N), grid, q)
    return FormField(grid, q - 1, backward(out, N))


def laplacian(w: Field) -> Field:
    """Spectral real Laplacian, componentwise on forms."""
    sym = frequency_symbol(w.grid)
    data = w.samples if isinstance(w, ScalarField) else w.data
    N = w.grid.real_dim
    return _like(w, backward(sym.laplacian * forward(data, N), N))


def box_laplacian(w: Field) -> FormField:
    """Complex Laplacian ∂̄ϑ + ϑ∂̄, assembled from the two compositions."""
    w = _as_form(w)
    q, n = w.degree, w.grid.complex_dim
    N = w.grid.real_dim
    what = forward(w.data, N)
    total = np.zeros_like(what)
    if q >= 1:
        total += _dbar_hat(_adjoint_hat(what, w.grid, q), w.grid, q - 1)
    if q < n:
        total += _adjoint_hat(_dbar_hat(what, w.grid, q), w.grid, q + 1)
    return FormField(w.grid, q, backward(total, N))


def gradient(w: ScalarField) -> np.ndarray:
    """Spectral gradient, shape ``(2n, *grid.shape)``."""
    grid = w.grid
    sym = frequency_symbol(grid)
    N = grid.real_dim
    what = forward(w.samples, N)
    return np.stack([backward(sym.axis_derivative(a) * what, N) for a in range(N)])


def dirichlet_energy(w: Field) -> float:
    """sum over components of ∫|∇w_J|^2, evaluated by Parseval."""
    grid = w.grid
    sym = frequency_symbol(grid)
    N = grid.real_dim
    data = w.samples[None] if isinstance(w, ScalarField) else w.data
    k2 = np.zeros(grid.shape)
    for a in range(N):
        k2 = k2 + np.abs(sym.axis_derivative(a)) ** 2
    what = forward(data, N)
    return float(grid.cell_volume / grid.size * np.sum(k2 * np.abs(what) ** 2))


def _data(w: Field) -> np.ndarray:
    if isinstance(w, ScalarField):
        return w.samples
    if isinstance(w, FormField):
        return w.data
    raise TypeError(f"expected a field, got {type(w).__name__}")


def _same_space(a: Field, b: Field):
    if a.grid != b.grid:
        raise ValueError("grid mismatch")
    if isinstance(a, FormField) and isinstance(b, FormField) and a.degree != b.degree:
        raise ValueError("degree mismatch")


def norm_l2(w: Field) -> float:
    """L^2 norm by uniform-grid quadrature, summed over form components."""
    data = _data(w)
    return float(np.sqrt(w.grid.cell_volume * np.vdot(data, data).real))


def inner(a: Field, b: Field) -> complex:
    _same_space(a, b)
    return complex(a.grid.cell_volume * np.vdot(_data(a), _data(b)))


def weighted_norm_sq(w: Field, weight: ScalarField | np.ndarray) -> float:
    """∫ weight |w|^2, with ``weight`` sampled on the same grid.

    To evaluate ∫|v|^2/ω pass the reciprocal samples 1/ω explicitly.
    """
    if isinstance(weight, ScalarField):
        if weight.grid != w.grid:
            raise ValueError("grid mismatch")
        weight = weight.samples
    wt = np.asarray(weight)
    if np.iscomplexobj(wt):
        if np.any(wt.imag != 0):
            raise ValueError("weight must be real")
        wt = wt.real
    wt = np.broadcast_to(wt.astype(float), w.grid.shape)
    if np.any(wt < 0):
        raise ValueError("weight has negative samples")
    data = _data(w)
    sq = np.abs(data) ** 2
    if sq.ndim > len(w.grid.shape):
        sq = sq.sum(axis=0)
    return float(w.grid.cell_volume * np.sum(wt * sq))
