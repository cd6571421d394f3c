"""Explicit conservative time stepping for dn/dt = lap sigma(n) + n G(p).

Forward Euler under the diffusive CFL bound dt <= dx^2/(2 d_eff max sigma')
plus a reaction cap 0.1/G(0).  The update is monotone at these step sizes,
which is what the positivity, comparison and mass-bound properties lean on.
The run loop keeps a per-step series (mass, extrema, front, forward
difference) and lands exactly on requested snapshot times.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from . import grid as gridmod
from . import model
from .grid import Field, Grid

__all__ = [
    "StabilityError",
    "SimulationError",
    "BumpSpec",
    "RunState",
    "RunConfig",
    "Snapshot",
    "StepSeries",
    "RunResult",
    "AdmissibilityReport",
    "make_bump",
    "validate_initial",
    "stable_dt",
    "step",
    "run",
]

REACTION_CAP = 0.1  # max dt * G(0)
OVERSHOOT_TOL = 1e-6
BOUNDARY_TOL = 1e-8


class StabilityError(ValueError):
    """Requested time step exceeds the stability bound."""


class SimulationError(RuntimeError):
    """Run aborted; .payload carries the state of the failure."""

    def __init__(self, message: str, payload: dict):
        super().__init__(message)
        self.payload = payload


@dataclass(frozen=True)
class BumpSpec:
    """Quartic bump  amplitude * max(0, 1 - ((x-center)/width)^2)^2."""

    amplitude: float
    center: float
    width: float

    def __post_init__(self):
        if not (math.isfinite(self.amplitude) and self.amplitude > 0.0):
            raise ValueError(f"amplitude must be positive, got {self.amplitude}")
        if not (math.isfinite(self.width) and self.width > 0.0):
            raise ValueError(f"width must be positive, got {self.width}")
        if not math.isfinite(self.center):
            raise ValueError("center must be finite")


def make_bump(g: Grid, amplitude: float, center: float, width: float,
              params: model.ModelParams | None = None) -> Field:
    """Realize a BumpSpec on a grid.

    When params is given the amplitude is checked against max_density(k),
    the largest density the model admits.
    """
    spec = BumpSpec(amplitude, center, width)
    if params is not None and amplitude > model.max_density(params):
        raise ValueError(
            f"amplitude {amplitude} exceeds max density {model.max_density(params)}")
    xi = (g.centers - spec.center) / spec.width
    vals = spec.amplitude * np.clip(1.0 - xi * xi, 0.0, None) ** 2
    return Field(g, vals)


@dataclass(frozen=True)
class RunState:
    t: float
    n: Field
    step_count: int
    dt_last: float


@dataclass(frozen=True)
class RunConfig:
    """Everything a run needs; the grid is the one the initial data lives on."""

    params: model.ModelParams
    initial: Field | BumpSpec
    grid: Grid
    t_final: float
    snapshot_times: tuple = ()
    cfl_safety: float = 0.9
    front_threshold: float = 0.5

    def __post_init__(self):
        if not (math.isfinite(self.t_final) and self.t_final >= 0.0):
            raise ValueError(f"t_final must be >= 0, got {self.t_final}")
        if not 0.0 < self.cfl_safety < 1.0:
            raise ValueError(f"cfl_safety must lie in (0, 1), got {self.cfl_safety}")
        if not 0.0 < self.front_threshold < 1.0:
            raise ValueError("front threshold must lie in (0, 1)")
        ts = tuple(float(t) for t in self.snapshot_times)
        if any(not math.isfinite(t) for t in ts):
            raise ValueError("snapshot times must be finite")
        if list(ts) != sorted(ts):
            raise ValueError("snapshot times must be sorted")
        if ts and (ts[0] < 0.0 or ts[-1] > self.t_final):
            raise ValueError("snapshot times must lie within [0, t_final]")
        if isinstance(self.initial, Field):
            gi = self.initial.grid
            same = gi is self.grid or (gi.geometry == self.grid.geometry
                                       and gi.dim == self.grid.dim
                                       and gi.m == self.grid.m
                                       and gi.length == self.grid.length)
            if not same:
                raise ValueError("initial field lives on a different grid")
        object.__setattr__(self, "snapshot_times", ts)

    def initial_field(self) -> Field:
        if isinstance(self.initial, Field):
            return self.initial
        b = self.initial
        return make_bump(self.grid, b.amplitude, b.center, b.width, self.params)


@dataclass(frozen=True)
class Snapshot:
    t: float
    n: Field
    p: Field
    sigma: Field


@dataclass
class StepSeries:
    """One row per executed step, evaluated on the post-step state."""

    t: np.ndarray
    dt: np.ndarray
    mass: np.ndarray
    max_n: np.ndarray
    max_p: np.ndarray
    front: np.ndarray
    min_dndt: np.ndarray

    def __len__(self):
        return self.t.size


@dataclass
class RunResult:
    config: RunConfig
    snapshots: list
    series: StepSeries
    final: RunState
    boundary_contact: bool
    wall_time: float


@dataclass(frozen=True)
class AdmissibilityReport:
    """Sign report for the initial rate lap sigma(n0) + n0 G(p(n0))."""

    min_rate: float
    argmin_x: float
    tol: float
    admissible: bool


def validate_initial(n0: Field, params: model.ModelParams) -> AdmissibilityReport:
    """Check the discrete time-monotonicity condition on initial data.

    Reports the smallest cellwise initial rate; the run is expected to stay
    pointwise nondecreasing in time only when this passes.  Report only, no
    side effects.
    """
    rate = gridmod.laplacian_sigma(n0, params).values \
        + n0.values * params.growth(model.pressure_of_density(n0.values, params))
    i = int(np.argmin(rate))
    tol = 1e-10 * max(1.0, float(np.max(np.abs(rate))))
    mn = float(rate[i])
    return AdmissibilityReport(mn, float(n0.grid.centers[i]), tol, mn >= -tol)


def _hard_dt_bound(values: np.ndarray, g: Grid, params: model.ModelParams) -> float:
    """Largest stable dt (safety factor 1): diffusive bound plus reaction cap."""
    sp_max = float(np.max(params.k * values ** (params.k - 1.0))) + params.nu
    cap = REACTION_CAP / params.growth.g0 if params.growth.g0 > 0.0 else math.inf
    if sp_max <= 0.0:
        return cap
    return min(g.dx * g.dx / (2.0 * g.d_eff * sp_max), cap)


def stable_dt(state: RunState, params: model.ModelParams, cfl_safety: float = 0.9) -> float:
    """Safety-scaled diffusive bound, capped by the reaction time scale.

    sigma' is evaluated at the largest density one step can reach, not at
    the current maximum: within a step the reaction multiplies the max by
    up to e^{dt G(0)} <= e^0.1, and for large k that factor is enough to
    leave the monotone regime a current-state bound was chosen for.  The
    homeostatic ceiling n_max is invariant under monotone steps, so it
    caps the lookahead and the stiff phase pays nothing for it.
    """
    if not 0.0 < cfl_safety <= 1.0:
        raise ValueError("cfl_safety must lie in (0, 1]")
    g = state.n.grid
    mx = float(np.max(state.n.values))
    ahead = mx
    if params.growth.g0 > 0.0 and mx > 0.0:
        ahead = min(mx * math.exp(REACTION_CAP),
                    max(mx, model.max_density(params)))
    sp_max = float(model.sigma_prime(np.float64(ahead), params))
    cap = REACTION_CAP / params.growth.g0 if params.growth.g0 > 0.0 else math.inf
    if sp_max <= 0.0:
        return cap
    return min(cfl_safety * g.dx * g.dx / (2.0 * g.d_eff * sp_max), cap)


def _euler_update(n: np.ndarray, dt: float, g: Grid, params: model.ModelParams) -> np.ndarray:
    k, nu = params.k, params.nu
    nk1 = n ** (k - 1.0)
    p = (k / (k - 1.0)) * nk1
    sig = n * nk1 + nu * n
    m = g.m
    flux = np.zeros(m + 1)
    flux[1:m] = g.face_weights[1:m] * np.diff(sig)
    rate = np.diff(flux) / (g.dx * g.volumes)
    rate += n * params.growth(p)
    return n + dt * rate


def step(state: RunState, dt: float, params: model.ModelParams) -> RunState:
    """One forward Euler step.  Steps beyond the stability bound are refused."""
    if not (math.isfinite(dt) and dt > 0.0):
        raise StabilityError(f"dt must be a positive number, got {dt}")
    bound = _hard_dt_bound(state.n.values, state.n.grid, params)
    if dt > bound * (1.0 + 1e-12):
        raise StabilityError(f"dt {dt} exceeds stability bound {bound}")
    vals = _euler_update(state.n.values, dt, state.n.grid, params)
    return RunState(state.t + dt, Field(state.n.grid, vals), state.step_count + 1, dt)


def _snapshot(t: float, n: np.ndarray, g: Grid, params: model.ModelParams) -> Snapshot:
    nf = Field(g, n)
    return Snapshot(t, nf,
                    Field(g, model.pressure_of_density(n, params)),
                    Field(g, model.sigma(n, params)))


class _Rows:
    """Growable column store for the per-step series."""

    def __init__(self, cols: int, cap: int = 4096):
        self.data = np.empty((cols, cap))
        self.size = 0

    def append(self, *vals):
        if self.size == self.data.shape[1]:
            self.data = np.concatenate([self.data, np.empty_like(self.data)], axis=1)
        self.data[:, self.size] = vals
        self.size += 1

    def columns(self):
        return [self.data[i, :self.size].copy() for i in range(self.data.shape[0])]


def _abort(reason: str, t: float, steps: int, n: np.ndarray, payload: dict) -> SimulationError:
    info = {"reason": reason, "t": t, "step_count": steps,
            "min_n": float(np.min(n)), "max_n": float(np.max(n))}
    info.update(payload)
    return SimulationError(f"run aborted at t={t:.6g} after {steps} steps: {reason}", info)


def run(config: RunConfig) -> RunResult:
    """Advance the density to t_final with adaptive stable steps.

    Steps are shortened to land exactly on each requested snapshot time and
    on t_final.  The state must keep 0 <= n <= max_density + OVERSHOOT_TOL;
    violations and non-finite values abort with a SimulationError whose
    payload records where things stood.
    """
    t_start = time.perf_counter()
    g = config.grid
    params = config.params
    k, nu = params.k, params.nu
    growth = params.growth
    ck = k / (k - 1.0)
    dx2_over = config.cfl_safety * g.dx * g.dx / (2.0 * g.d_eff)
    cap = REACTION_CAP / growth.g0 if growth.g0 > 0.0 else math.inf
    # same growth lookahead as stable_dt: within one step the reaction can
    # scale the max density by up to e^{dt G(0)}, and sigma' must stay in
    # the monotone regime across the whole step, not just at its start
    look = math.exp(REACTION_CAP) if growth.g0 > 0.0 else 1.0
    ceil = model.max_density(params)

    n = config.initial_field().values.copy()
    n_hi = model.max_density(params) + OVERSHOOT_TOL
    if np.min(n) < 0.0 or np.max(n) > n_hi:
        raise _abort("initial data out of bounds", 0.0, 0, n, {"bound": n_hi})

    events = sorted({float(ts) for ts in config.snapshot_times} | {config.t_final})
    events = [te for te in events if te > 0.0]

    volumes = g.volumes
    centers = g.centers
    face_w = g.face_weights[1:g.m]
    inv_wdx = 1.0 / (g.dx * volumes)
    threshold = config.front_threshold

    rows = _Rows(7)
    snaps = [_snapshot(0.0, n, g, params)]
    boundary_contact = bool(n[-1] > BOUNDARY_TOL)
    t = 0.0
    steps = 0
    dt = 0.0
    flux = np.zeros(g.m + 1)

    for te in events:
        while t < te:
            nk1 = n ** (k - 1.0)
            mx = float(n.max())
            ahead = mx if look == 1.0 else min(mx * look, max(mx, ceil))
            sp_max = k * ahead ** (k - 1.0) + nu
            dt = cap if sp_max <= 0.0 else min(dx2_over / sp_max, cap)
            if dt >= te - t:
                dt = te - t
                t_next = te
            else:
                t_next = t + dt
            p = ck * nk1
            sig = n * nk1 + nu * n
            flux[1:g.m] = face_w * np.diff(sig)
            rate = np.diff(flux) * inv_wdx
            rate += n * growth(p)
            n_new = n + dt * rate

            max_n = float(n_new.max())
            if not math.isfinite(max_n):
                raise _abort("non-finite density", t_next, steps + 1, n_new, {})
            if max_n > n_hi:
                raise _abort("density above bound", t_next, steps + 1, n_new,
                             {"bound": n_hi})
            if float(n_new.min()) < 0.0:
                raise _abort("negative density", t_next, steps + 1, n_new, {})

            rows.append(t_next, dt,
                        float(volumes @ n_new),
                        max_n,
                        ck * max_n ** (k - 1.0),
                        gridmod.threshold_crossing(n_new, centers, threshold),
                        float(np.min(n_new - n)) / dt)
            n = n_new
            t = t_next
            steps += 1
            if not boundary_contact and n[-1] > BOUNDARY_TOL:
                boundary_contact = True
        snaps.append(_snapshot(te, n, g, params))

    cols = rows.columns()
    series = StepSeries(*cols)
    final = RunState(t, Field(g, n), steps, dt)
    return RunResult(config, snaps, series, final, boundary_contact,
                     time.perf_counter() - t_start)
