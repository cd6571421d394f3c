"""Cell-centered finite-volume grids on [0, L] with no-flux ends.

A grid is either a line segment or the radial coordinate of a
rotation-symmetric domain in d space dimensions.  Faces sit at i*dx,
centers at (i+1/2)*dx.  Radial cells use the exact shell measure
(x_{i+1/2}^d - x_{i-1/2}^d)/d so the volumes sum to the continuum measure
of [0, L] to rounding, and faces carry the weight x^(d-1); the face at
r = 0 gets weight zero (symmetry axis).  Boundary fluxes are always zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import model

__all__ = [
    "Grid",
    "Field",
    "make_grid",
    "mass",
    "l1_distance",
    "face_gradient",
    "laplacian",
    "laplacian_sigma",
    "threshold_crossing",
]

MIN_CELLS = 8


@dataclass(frozen=True, eq=False)
class Grid:
    geometry: str
    dim: int
    length: float
    m: int
    dx: float
    centers: np.ndarray
    faces: np.ndarray
    volumes: np.ndarray
    face_weights: np.ndarray

    @property
    def d_eff(self) -> int:
        """Dimension factor entering the diffusive stability bound."""
        return self.dim if self.geometry == "radial" else 1


def make_grid(geometry: str, length: float, m: int, dim: int | None = None) -> Grid:
    """Build an immutable grid.

    Args:
        geometry: "line" or "radial".
        length: domain size L > 0.
        m: cell count, at least MIN_CELLS.
        dim: space dimension 1..3, required for radial grids.
    """
    if geometry not in ("line", "radial"):
        raise ValueError(f"geometry must be 'line' or 'radial', got {geometry!r}")
    if not (np.isfinite(length) and length > 0.0):
        raise ValueError(f"domain length must be positive, got {length}")
    if int(m) != m or m < MIN_CELLS:
        raise ValueError(f"need at least {MIN_CELLS} cells, got {m}")
    m = int(m)
    if geometry == "radial":
        if dim not in (1, 2, 3):
            raise ValueError("radial grids need dim in {1, 2, 3}")
    else:
        if dim not in (None, 1):
            raise ValueError("line grids are one dimensional")
        dim = 1

    dx = length / m
    faces = np.arange(m + 1) * dx
    centers = (np.arange(m) + 0.5) * dx
    if geometry == "line":
        volumes = np.full(m, dx)
        face_weights = np.ones(m + 1)
    else:
        volumes = (faces[1:] ** dim - faces[:-1] ** dim) / dim
        face_weights = faces ** (dim - 1)
        face_weights[0] = 0.0  # symmetry axis, no flux through r = 0
    for arr in (faces, centers, volumes, face_weights):
        arr.setflags(write=False)
    return Grid(geometry, dim, float(length), m, dx, centers, faces, volumes, face_weights)


@dataclass(frozen=True, eq=False)
class Field:
    """Finite cell values bound to a grid.  Values are copied and frozen."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.shape != (self.grid.m,):
            raise ValueError(f"expected {self.grid.m} cell values, got shape {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("field values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)


def mass(f: Field) -> float:
    """Volume-weighted total sum(w_i f_i)."""
    return float(f.grid.volumes @ f.values)


def l1_distance(f: Field, g: Field) -> float:
    """Volume-weighted L1 distance between two fields on the same grid."""
    if f.grid is not g.grid and (f.grid.m != g.grid.m or f.grid.dx != g.grid.dx):
        raise ValueError("fields live on different grids")
    return float(f.grid.volumes @ np.abs(f.values - g.values))


def face_gradient(f: Field) -> np.ndarray:
    """Two-point gradient at each of the m+1 faces; zero at the boundary faces."""
    g = np.zeros(f.grid.m + 1)
    g[1:-1] = np.diff(f.values) / f.grid.dx
    return g


def _flux_divergence(vals: np.ndarray, grid: Grid) -> np.ndarray:
    # (1/w_i) [a_{i+1/2} (v_{i+1}-v_i)/dx - a_{i-1/2} (v_i-v_{i-1})/dx]
    m = grid.m
    flux = np.zeros(m + 1)
    flux[1:m] = grid.face_weights[1:m] * np.diff(vals)
    return np.diff(flux) / (grid.dx * grid.volumes)


def laplacian(f: Field) -> Field:
    """Conservative no-flux Laplacian of a cell field."""
    return Field(f.grid, _flux_divergence(f.values, f.grid))


def laplacian_sigma(n: Field, params: model.ModelParams) -> Field:
    """Conservative Laplacian of sigma(n); rejects negative densities."""
    if np.any(n.values < 0.0):
        raise ValueError("density must be nonnegative")
    sig = model.sigma(n.values, params)
    return Field(n.grid, _flux_divergence(sig, n.grid))


def threshold_crossing(values: np.ndarray, centers: np.ndarray, threshold: float) -> float:
    """Rightmost x where the piecewise-linear interpolant crosses threshold.

    Returns nan when the values sit entirely on one side of the level.
    """
    d = values - threshold
    above = d >= 0.0
    flips = np.nonzero(above[:-1] != above[1:])[0]
    if flips.size == 0:
        return float("nan")
    i = int(flips[-1])
    frac = d[i] / (values[i] - values[i + 1])
    return float(centers[i] + frac * (centers[i + 1] - centers[i]))
