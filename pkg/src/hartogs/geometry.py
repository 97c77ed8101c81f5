"""Geometric data for the extension problem: the affine subspace H, the
obstacle E (a finite union of closed balls), the domain Ω (ball or box),
the cutoff profile, and the hypothesis checks.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import ndimage

from .errors import PreconditionError
from .grid import GridSpec

__all__ = [
    "AffineSubspace",
    "ObstacleSet",
    "DomainSpec",
    "CutoffProfile",
    "ExtensionConfig",
    "HypothesisReport",
    "distance_to_subspace",
    "distance_to_obstacle",
    "eval_cutoff",
    "eval_cutoff_derivative",
    "check_hypotheses",
]

_ORTHO_TOL = 1e-12


def _vec(x) -> np.ndarray:
    return np.atleast_1d(np.asarray(x, dtype=float))


@dataclass(frozen=True, eq=False)
class AffineSubspace:
    """H = base_point + span(directions) in R^N.

    ``directions`` must be orthonormal rows; the codimension is
    N - len(directions).
    """

    base_point: np.ndarray
    directions: np.ndarray = None

    def __post_init__(self):
        base = _vec(self.base_point)
        N = base.size
        dirs = self.directions
        if dirs is None or len(dirs) == 0:
            dirs = np.zeros((0, N))
        dirs = np.atleast_2d(np.asarray(dirs, dtype=float))
        if dirs.shape[1] != N:
            raise ValueError(
                f"directions have dimension {dirs.shape[1]}, base point has {N}"
            )
        gram = dirs @ dirs.T
        if not np.allclose(gram, np.eye(len(dirs)), atol=_ORTHO_TOL, rtol=0):
            raise ValueError("directions must be orthonormal within 1e-12")
        if len(dirs) >= N:
            raise ValueError("an affine subspace needs codimension >= 1")
        object.__setattr__(self, "base_point", base)
        object.__setattr__(self, "directions", dirs)

    @classmethod
    def from_spanning(cls, base_point, vectors) -> "AffineSubspace":
        """Orthonormalize ``vectors`` (rows) before building the subspace."""
        base = _vec(base_point)
        vectors = np.atleast_2d(np.asarray(vectors, dtype=float))
        if vectors.size == 0:
            return cls(base)
        q, r = np.linalg.qr(vectors.T)
        rank = int(np.sum(np.abs(np.diag(r)) > 1e-12))
        return cls(base, q[:, :rank].T)

    @classmethod
    def coordinate(cls, ambient_dim: int, free_axes: Sequence[int] = (),
                   base_point=None) -> "AffineSubspace":
        """Subspace spanned by the unit vectors of ``free_axes`` (0-based)."""
        base = np.zeros(ambient_dim) if base_point is None else _vec(base_point)
        dirs = np.eye(ambient_dim)[list(free_axes)] if free_axes else None
        return cls(base, dirs)

    @property
    def ambient_dim(self) -> int:
        return self.base_point.size

    @property
    def codim(self) -> int:
        return self.ambient_dim - len(self.directions)

    def distance(self, points) -> np.ndarray:
        """Euclidean distance to H; ``points`` has shape (..., N)."""
        pts = np.asarray(points, dtype=float)
        if pts.shape[-1] != self.ambient_dim:
            raise ValueError(
                f"points have dimension {pts.shape[-1]}, subspace lives in "
                f"R^{self.ambient_dim}"
            )
        rel = pts - self.base_point
        if len(self.directions):
            rel = rel - (rel @ self.directions.T) @ self.directions
        return np.sqrt(np.sum(rel * rel, axis=-1))

    def distance_field(self, grid: GridSpec) -> np.ndarray:
        """d_H sampled on the grid (no periodic wrap)."""
        self._check_grid(grid)
        X = grid.coordinates()
        rel = [X[a] - self.base_point[a] for a in range(grid.real_dim)]
        d2 = sum(x * x for x in rel)
        for e in self.directions:
            proj = sum(e[a] * rel[a] for a in range(grid.real_dim) if e[a] != 0)
            d2 = d2 - proj * proj
        return np.sqrt(np.maximum(np.broadcast_to(d2, grid.shape), 0.0))

    def translated(self, shift) -> "AffineSubspace":
        return AffineSubspace(self.base_point + _vec(shift), self.directions)

    def _check_grid(self, grid: GridSpec):
        if grid.real_dim != self.ambient_dim:
            raise ValueError("subspace and grid dimensions differ")

    def to_dict(self) -> dict:
        return {
            "base_point": self.base_point.tolist(),
            "directions": self.directions.tolist(),
            "codim": self.codim,
        }


def distance_to_subspace(point, H: AffineSubspace) -> float | np.ndarray:
    """Distance from ``point`` (or an array of points) to H."""
    d = H.distance(point)
    return float(d) if np.ndim(d) == 0 else d


@dataclass(frozen=True, eq=False)
class ObstacleSet:
    """E as a union of closed balls ``[(center, radius), ...]``."""

    balls: list

    def __post_init__(self):
        if len(self.balls) == 0:
            raise ValueError("an obstacle needs at least one ball")
        centers = np.array([_vec(c) for c, _ in self.balls])
        radii = np.array([float(r) for _, r in self.balls])
        if np.any(radii <= 0):
            raise ValueError("ball radii must be positive")
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "radii", radii)
        object.__setattr__(self, "balls", [(c, r) for c, r in zip(centers, radii)])

    @property
    def ambient_dim(self) -> int:
        return self.centers.shape[1]

    def fattened(self, r: float) -> "ObstacleSet":
        """E_r = {d_E <= r}, again a union of balls."""
        return ObstacleSet([(c, rad + r) for c, rad in self.balls])

    def distance(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        if pts.shape[-1] != self.ambient_dim:
            raise ValueError("dimension mismatch between points and obstacle")
        out = np.full(pts.shape[:-1], np.inf)
        for c, rad in self.balls:
            gap = np.sqrt(np.sum((pts - c) ** 2, axis=-1)) - rad
            out = np.minimum(out, np.maximum(gap, 0.0))
        return out

    def _nearest(self, grid: GridSpec):
        X = grid.coordinates()
        best = np.full(grid.shape, np.inf)
        owner = np.zeros(grid.shape, dtype=int)
        for i, (c, rad) in enumerate(self.balls):
            rho = np.sqrt(sum((X[a] - c[a]) ** 2 for a in range(grid.real_dim)))
            gap = np.broadcast_to(rho - rad, grid.shape)
            closer = gap < best
            best = np.where(closer, gap, best)
            owner = np.where(closer, i, owner)
        return best, owner

    def distance_field(self, grid: GridSpec) -> np.ndarray:
        self._check_grid(grid)
        best, _ = self._nearest(grid)
        return np.maximum(best, 0.0)

    def gradient_field(self, grid: GridSpec) -> np.ndarray:
        """∇d_E on the grid, shape (2n, *shape); zero inside E.

        Taken from the nearest ball; ties on the medial set pick the
        lowest index.
        """
        self._check_grid(grid)
        best, owner = self._nearest(grid)
        X = grid.coordinates()
        grad = np.zeros((grid.real_dim,) + grid.shape)
        centers = self.centers[owner]
        rel = np.stack([np.broadcast_to(X[a], grid.shape) - centers[..., a]
                        for a in range(grid.real_dim)])
        rho = np.sqrt(np.sum(rel**2, axis=0))
        outside = best > 0
        grad[:, outside] = rel[:, outside] / rho[outside]
        return grad

    def _check_grid(self, grid: GridSpec):
        if grid.real_dim != self.ambient_dim:
            raise ValueError("obstacle and grid dimensions differ")

    def to_dict(self) -> dict:
        return {"balls": [{"center": c.tolist(), "radius": float(r)}
                          for c, r in self.balls]}


def distance_to_obstacle(point, E: ObstacleSet) -> float | np.ndarray:
    """min over balls of max(|point - center| - radius, 0)."""
    d = E.distance(point)
    return float(d) if np.ndim(d) == 0 else d


@dataclass(frozen=True, eq=False)
class DomainSpec:
    """Ω as an open ball or an open axis-aligned box."""

    kind: str
    center: np.ndarray
    radius: float | None = None
    half_widths: np.ndarray | None = None

    def __post_init__(self):
        center = _vec(self.center)
        object.__setattr__(self, "center", center)
        if self.kind == "ball":
            if self.radius is None or not self.radius > 0:
                raise ValueError("ball domain needs a positive radius")
            object.__setattr__(self, "radius", float(self.radius))
        elif self.kind == "box":
            hw = _vec(self.half_widths)
            if hw.shape != center.shape or np.any(hw <= 0):
                raise ValueError("box domain needs positive half-widths per axis")
            object.__setattr__(self, "half_widths", hw)
        else:
            raise ValueError(f"unknown domain kind {self.kind!r}")

    @classmethod
    def ball(cls, center, radius) -> "DomainSpec":
        return cls("ball", center, radius=radius)

    @classmethod
    def box(cls, center, half_widths) -> "DomainSpec":
        return cls("box", center, half_widths=half_widths)

    @property
    def ambient_dim(self) -> int:
        return self.center.size

    def boundary_distance(self, points) -> np.ndarray:
        """Distance to the complement for interior points; negative outside."""
        pts = np.asarray(points, dtype=float) - self.center
        if self.kind == "ball":
            return self.radius - np.sqrt(np.sum(pts**2, axis=-1))
        return np.min(self.half_widths - np.abs(pts), axis=-1)

    def boundary_distance_field(self, grid: GridSpec) -> np.ndarray:
        X = grid.coordinates()
        rel = [X[a] - self.center[a] for a in range(grid.real_dim)]
        if self.kind == "ball":
            out = self.radius - np.sqrt(sum(x * x for x in rel))
        else:
            out = np.full(grid.shape, np.inf)
            for a in range(grid.real_dim):
                out = np.minimum(out, self.half_widths[a] - np.abs(rel[a]))
        return np.broadcast_to(out, grid.shape)

    def mask(self, grid: GridSpec, shrink: float = 0.0) -> np.ndarray:
        """Grid samples lying in Ω shrunk by ``shrink``."""
        return self.boundary_distance_field(grid) > shrink

    def inner_half_margin(self, grid: GridSpec) -> float:
        """How far Ω stays inside [-L/2, L/2]^{2n} (positive = inside)."""
        half = 0.5 * grid.half_width
        ext = self.radius if self.kind == "ball" else self.half_widths
        return float(np.min(half - (np.abs(self.center) + ext)))

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "center": self.center.tolist()}
        if self.kind == "ball":
            out["radius"] = self.radius
        else:
            out["half_widths"] = self.half_widths.tolist()
        return out


@dataclass(frozen=True)
class CutoffProfile:
    """Quintic smoothstep rising from 0 at ``lower`` to 1 at ``upper``."""

    kind: str = "quintic"
    lower: float = 0.5
    upper: float = 1.0

    def __post_init__(self):
        if self.kind != "quintic":
            raise ValueError(f"unsupported cutoff kind {self.kind!r}")
        if not self.upper > self.lower:
            raise ValueError("cutoff needs lower < upper")

    def _s(self, t):
        return np.clip((np.asarray(t, dtype=float) - self.lower)
                       / (self.upper - self.lower), 0.0, 1.0)

    def __call__(self, t):
        s = self._s(t)
        return s**3 * (10.0 - 15.0 * s + 6.0 * s * s)

    def derivative(self, t):
        s = self._s(t)
        return 30.0 * s * s * (1.0 - s) ** 2 / (self.upper - self.lower)

    @property
    def sup_derivative(self) -> float:
        """max χ' = 15/8 per unit of s, attained at the midpoint."""
        return 15.0 / 8.0 / (self.upper - self.lower)

    def to_dict(self) -> dict:
        return {"kind": self.kind}


def eval_cutoff(chi: CutoffProfile, t):
    out = chi(t)
    return float(out) if np.ndim(out) == 0 else out


def eval_cutoff_derivative(chi: CutoffProfile, t):
    out = chi.derivative(t)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True, eq=False)
class ExtensionConfig:
    grid: GridSpec
    domain: DomainSpec
    obstacle: ObstacleSet
    subspace: AffineSubspace
    r: float
    R: float
    cutoff: CutoffProfile = field(default_factory=CutoffProfile)

    def __post_init__(self):
        if not self.r > 0 or not self.R > 0:
            raise ValueError("r and R must be positive")
        N = self.grid.real_dim
        for name, obj in (("domain", self.domain), ("obstacle", self.obstacle),
                          ("subspace", self.subspace)):
            if obj.ambient_dim != N:
                raise ValueError(f"{name} lives in R^{obj.ambient_dim}, grid in R^{N}")

    def with_grid(self, grid: GridSpec) -> "ExtensionConfig":
        return ExtensionConfig(grid, self.domain, self.obstacle, self.subspace,
                               self.r, self.R, self.cutoff)

    def to_dict(self) -> dict:
        return {
            "grid": self.grid.to_dict(),
            "omega": self.domain.to_dict(),
            "obstacle": self.obstacle.to_dict(),
            "subspace": {"base_point": self.subspace.base_point.tolist(),
                         "directions": self.subspace.directions.tolist()},
            "r": self.r,
            "R": self.R,
            "chi": self.cutoff.to_dict(),
        }


@dataclass
class HypothesisReport:
    """Outcome of the three hypothesis checks, with margins.

    Margins are positive when the hypothesis holds with room to spare.
    """

    fattening_inside_domain: bool
    fattening_margin: float
    tube_contains_obstacle: bool
    tube_margin: float
    complement_connected: bool
    component_count: int
    resolution: int
    codim: int
    complex_dim: int

    @property
    def passed(self) -> bool:
        return (self.fattening_inside_domain and self.tube_contains_obstacle
                and self.complement_connected)

    def failed(self) -> list[str]:
        names = []
        if not self.fattening_inside_domain:
            names.append("(1) E_r inside Omega")
        if not self.tube_contains_obstacle:
            names.append("(2) E inside tube H_R")
        if not self.complement_connected:
            names.append("(3) Omega minus E connected")
        return names

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "failed": self.failed(),
            "hypothesis_1": {"passed": self.fattening_inside_domain,
                             "margin": self.fattening_margin},
            "hypothesis_2": {"passed": self.tube_contains_obstacle,
                             "margin": self.tube_margin,
                             "codim": self.codim},
            "hypothesis_3": {"passed": self.complement_connected,
                             "components": self.component_count,
                             "resolution": self.resolution},
        }


def check_hypotheses(cfg: ExtensionConfig) -> HypothesisReport:
    """Check E_r ⊂ Ω, E ⊂ H_R and connectedness of Ω \\ E.

    (1) and (2) are exact for balls inside a ball or box domain. (3) is a
    flood fill over axis neighbours at the grid resolution.
    """
    n = cfg.grid.complex_dim
    m = cfg.subspace.codim
    if n < 2:
        raise PreconditionError("extension needs at least two complex variables")
    if m < 3:
        raise PreconditionError(f"subspace codimension {m} < 3")

    E = cfg.obstacle
    margins1 = cfg.domain.boundary_distance(E.centers) - (E.radii + cfg.r)
    fat_margin = float(np.min(margins1))

    tube = cfg.R - (cfg.subspace.distance(E.centers) + E.radii)
    tube_margin = float(np.min(tube))

    region = cfg.domain.mask(cfg.grid) & (E.distance_field(cfg.grid) > 0)
    structure = ndimage.generate_binary_structure(cfg.grid.real_dim, 1)
    _, count = ndimage.label(region, structure=structure)

    return HypothesisReport(
        fattening_inside_domain=fat_margin > 0,
        fattening_margin=fat_margin,
        tube_contains_obstacle=tube_margin > 0,
        tube_margin=tube_margin,
        complement_connected=count == 1,
        component_count=int(count),
        resolution=cfg.grid.points_per_axis,
        codim=m,
        complex_dim=n,
    )
