"""Diagnostics on states and runs.

Two residuals probe the stiff limit: the graph residual sum(w p (1-n)),
which vanishes exactly when every cell sits on the limit graph, and the
complementarity residual |p (lap p + G(p))| summed over cells safely inside
the pressure support (a collar of height theta excludes the free boundary,
where lap p is a measure and the product has no business being small).
The rest reports bounds from the run series, front positions by threshold
crossing, fitted front speeds, and the interface relation
speed = -dp(R-) + G(0) * tail mass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict

import numpy as np

from . import grid as gridmod
from . import model
from .grid import Field

__all__ = [
    "FrontUndefinedError",
    "BoundCheck",
    "InterfaceReport",
    "DiagnosticsReport",
    "SpeedFit",
    "graph_residual",
    "complementarity_residual",
    "front_position",
    "front_sensitivity",
    "estimate_speed",
    "tw_formula_rhs",
    "sigma_regularity",
    "interface_gradients",
    "lemma_bounds_report",
]

DEFAULT_THRESHOLD = 0.5
SENSITIVITY_THRESHOLDS = (0.3, 0.5, 0.7)
COLLAR_FRACTION = 0.05  # default collar is 0.05 * pm

DENSITY_TOL = 1e-6
PRESSURE_TOL = 1e-3
MASS_RATIO_TOL = 1e-8
MONOTONE_TOL = 1e-8


class FrontUndefinedError(ValueError):
    """The field never crosses the requested threshold."""


def graph_residual(n: Field, params: model.ModelParams) -> float:
    """L1 size of p (1 - n); zero iff every cell satisfies p (1 - n) = 0."""
    p = model.pressure_of_density(n.values, params)
    return float(n.grid.volumes @ np.abs(p * (1.0 - n.values)))


def complementarity_residual(n: Field, params: model.ModelParams,
                             collar: float | None = None) -> float:
    """L1 size of p (lap p + G(p)) away from the free boundary.

    Only cells with p > collar whose both neighbors also clear the collar
    contribute; boundary cells never qualify.  Default collar is
    COLLAR_FRACTION * pm.
    """
    if collar is None:
        collar = COLLAR_FRACTION * params.growth.pm
    if not collar > 0.0:
        raise ValueError(f"collar must be positive, got {collar}")
    p = model.pressure_of_density(n.values, params)
    lap_p = gridmod.laplacian(Field(n.grid, p)).values
    above = p > collar
    keep = above.copy()
    keep[0] = keep[-1] = False
    keep[1:-1] &= above[:-2] & above[2:]
    if not np.any(keep):
        return 0.0
    resid = np.abs(p * (lap_p + params.growth(p)))
    return float(n.grid.volumes[keep] @ resid[keep])


def front_position(f: Field, threshold: float = DEFAULT_THRESHOLD) -> float:
    """Rightmost threshold crossing of the interpolated cell values."""
    if not 0.0 < threshold < 1.0:
        raise ValueError(f"threshold must lie in (0, 1), got {threshold}")
    x = gridmod.threshold_crossing(f.values, f.grid.centers, threshold)
    if math.isnan(x):
        raise FrontUndefinedError(
            f"values never cross threshold {threshold}; front undefined")
    return x


def front_sensitivity(f: Field, thresholds=SENSITIVITY_THRESHOLDS) -> dict:
    """Front position per threshold; nan marks undefined crossings."""
    out = {}
    for th in thresholds:
        out[th] = gridmod.threshold_crossing(f.values, f.grid.centers, th)
    return out


@dataclass(frozen=True)
class SpeedFit:
    """Least-squares slope of a front trajectory over its trailing window."""

    speed: float
    stderr: float
    n_points: int
    t_window: tuple


def estimate_speed(times, positions, window_fraction: float = 0.5) -> SpeedFit:
    """Fit R(t) = a + speed * t over the last window_fraction of the time span.

    Undefined positions (nan) are dropped first.  The window always keeps at
    least 3 points: with a short trajectory it widens to the last 3 samples.
    """
    if not 0.0 < window_fraction <= 1.0:
        raise ValueError("window_fraction must lie in (0, 1]")
    t = np.asarray(times, dtype=float)
    r = np.asarray(positions, dtype=float)
    if t.shape != r.shape or t.ndim != 1:
        raise ValueError("times and positions must be matching 1d arrays")
    ok = np.isfinite(r) & np.isfinite(t)
    t, r = t[ok], r[ok]
    if t.size < 3:
        raise ValueError("need at least 3 defined trajectory points")
    t_lo = t[-1] - window_fraction * (t[-1] - t[0])
    win = t >= t_lo
    if int(win.sum()) < 3:
        win[-3:] = True
    t, r = t[win], r[win]
    tc = t - t.mean()
    stt = float(tc @ tc)
    if stt == 0.0:
        raise ValueError("degenerate trajectory: no time spread in window")
    slope = float(tc @ r) / stt
    resid = r - r.mean() - slope * tc
    var = float(resid @ resid) / (t.size - 2) if t.size > 2 else 0.0
    return SpeedFit(slope, math.sqrt(max(var, 0.0) / stt), int(t.size),
                    (float(t[0]), float(t[-1])))


def tw_formula_rhs(snapshot, params: model.ModelParams, R: float) -> float:
    """Interface relation -dp/dx(R-) + G(0) * mass of n beyond R (1d line).

    The gradient is the one-sided two-point difference of the two cell
    centers just inside R; the tail is the volume-weighted sum over cells
    whose centers lie beyond R.
    """
    g = snapshot.n.grid
    if g.geometry != "line":
        raise ValueError("interface relation is evaluated on 1d line grids")
    j = int(np.searchsorted(g.centers, R, side="right")) - 1
    if j < 1:
        raise ValueError("need two cell centers inside R for the gradient")
    p = snapshot.p.values
    grad_in = (p[j] - p[j - 1]) / g.dx
    tail = g.centers > R
    tail_mass = float(g.volumes[tail] @ snapshot.n.values[tail])
    return -grad_in + params.growth.g0 * tail_mass


def sigma_regularity(result) -> float:
    """Time-trapezoid of the spatial L2 norm squared of lap sigma(n).

    Uses the run snapshots; needs at least two of them.
    """
    snaps = result.snapshots
    if len(snaps) < 2:
        raise ValueError("need at least two snapshots")
    times = np.array([s.t for s in snaps])
    norms = np.empty(len(snaps))
    for i, s in enumerate(snaps):
        lap = gridmod.laplacian(s.sigma).values
        norms[i] = s.n.grid.volumes @ (lap * lap)
    return float(np.trapezoid(norms, times))


@dataclass(frozen=True)
class InterfaceReport:
    max_grad_n: float
    max_grad_p: float
    sigma_kink: float
    front: float
    window: int


def interface_gradients(snapshot, window: int = 6,
                        threshold: float = DEFAULT_THRESHOLD) -> InterfaceReport:
    """Steepness measures within `window` cells of the density front.

    max_grad_n and max_grad_p are the largest face gradients in the window;
    sigma_kink is the largest discrete second derivative of sigma there, the
    quantity that stays bounded under refinement exactly when the flux
    potential keeps a continuous gradient across the interface.
    """
    n = snapshot.n
    g = n.grid
    front = front_position(n, threshold)
    i0 = int(np.clip(round(front / g.dx - 0.5), 0, g.m - 1))
    lo = max(i0 - window, 0)
    hi = min(i0 + window, g.m - 1)
    if hi - lo < 2:
        raise ValueError("window too small for gradient estimates")
    dn = np.diff(n.values[lo:hi + 1]) / g.dx
    dp = np.diff(snapshot.p.values[lo:hi + 1]) / g.dx
    sig = snapshot.sigma.values[lo:hi + 1]
    kink = np.abs(sig[2:] - 2.0 * sig[1:-1] + sig[:-2]) / (g.dx * g.dx)
    return InterfaceReport(float(np.max(np.abs(dn))), float(np.max(np.abs(dp))),
                           float(np.max(kink)), front, window)


@dataclass(frozen=True)
class BoundCheck:
    value: float
    bound: float
    tol: float
    passed: bool


def _check(value: float, bound: float, tol: float) -> BoundCheck:
    return BoundCheck(value, bound, tol, bool(value <= bound + tol))


@dataclass(frozen=True)
class DiagnosticsReport:
    """Worst-case bound checks over a run plus stiff-limit residuals."""

    density: BoundCheck
    pressure: BoundCheck
    mass_ratio: BoundCheck
    time_monotone: BoundCheck
    graph_residual: float
    complementarity_residual: float
    sigma_l2_laplacian: float
    interface: InterfaceReport | None
    front_trajectory_t: np.ndarray
    front_trajectory_r: np.ndarray
    front_sensitivity: dict
    boundary_contact: bool

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in
                   (self.density, self.pressure, self.mass_ratio, self.time_monotone))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["front_trajectory_t"] = [float(v) for v in self.front_trajectory_t]
        d["front_trajectory_r"] = [float(v) for v in self.front_trajectory_r]
        d["front_sensitivity"] = {str(k): float(v) for k, v in self.front_sensitivity.items()}
        d["all_passed"] = self.all_passed
        return d


def lemma_bounds_report(result, collar: float | None = None) -> DiagnosticsReport:
    """Aggregate the a priori bounds and residuals of a finished run.

    Density, pressure and mass are checked at every recorded step against
    max_density, pm and the exponential mass bound; the time-monotonicity
    check is only meaningful when the initial data passed validate_initial.
    Residuals are evaluated on the final snapshot.
    """
    params = result.config.params
    series = result.series
    growth = params.growth
    n_max = model.max_density(params)
    mass0 = gridmod.mass(result.snapshots[0].n)

    if len(series) > 0:
        worst_n = float(np.max(series.max_n))
        worst_p = float(np.max(series.max_p))
        ratio = float(np.max(series.mass / (mass0 * np.exp(growth.g0 * series.t))))
        min_dndt = float(np.min(series.min_dndt))
    else:
        worst_n = float(np.max(result.snapshots[0].n.values))
        worst_p = float(np.max(result.snapshots[0].p.values))
        ratio = 1.0
        min_dndt = 0.0

    final = result.snapshots[-1]
    mono = BoundCheck(min_dndt, 0.0, MONOTONE_TOL, bool(min_dndt >= -MONOTONE_TOL))
    interface = None
    try:
        interface = interface_gradients(final, threshold=result.config.front_threshold)
    except FrontUndefinedError:
        pass
    traj_t = series.t if len(series) else np.empty(0)
    traj_r = series.front if len(series) else np.empty(0)
    return DiagnosticsReport(
        density=_check(worst_n, n_max, DENSITY_TOL),
        pressure=_check(worst_p, growth.pm, PRESSURE_TOL),
        mass_ratio=_check(ratio, 1.0, MASS_RATIO_TOL),
        time_monotone=mono,
        graph_residual=graph_residual(final.n, params),
        complementarity_residual=complementarity_residual(final.n, params, collar),
        sigma_l2_laplacian=sigma_regularity(result) if len(result.snapshots) > 1 else 0.0,
        interface=interface,
        front_trajectory_t=traj_t,
        front_trajectory_r=traj_r,
        front_sensitivity=front_sensitivity(final.n),
        boundary_contact=result.boundary_contact,
    )
