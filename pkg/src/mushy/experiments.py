"""Prepared numerical studies built on the solver and diagnostics.

k_sweep re-runs one configuration at increasing stiffness and tracks how
fast the stiff-limit residuals and successive solution distances shrink.
nu_compare runs the same configuration at several motilities and reports
front positions and fitted speeds.  wave_speed_check measures an asymptotic
front speed on a line grid and holds it against the base speed sigma0 and
the interface relation.

Everything here is deterministic: no randomness, single threaded, so
repeated calls give bit-identical results.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace

import numpy as np

from . import diagnostics, model
from .grid import l1_distance, threshold_crossing
from .solver import BumpSpec, RunConfig, RunResult, run

__all__ = [
    "SweepRow",
    "SweepResult",
    "NuRow",
    "NuComparison",
    "WaveStudy",
    "k_sweep",
    "nu_compare",
    "wave_speed_check",
]

MIN_TRAVEL_WIDTHS = 10.0


@dataclass(frozen=True)
class SweepRow:
    k: float
    graph_residual: float
    compl_residual: float
    sigma_l2: float
    dist_prev_n: float | None
    dist_prev_p: float | None
    runtime: float
    result: RunResult


@dataclass(frozen=True)
class SweepResult:
    rows: tuple
    collar: float


def k_sweep(base: RunConfig, ks, collar: float | None = None) -> SweepResult:
    """Run `base` at each stiffness in ks (nondecreasing, all >= 2).

    Rows carry the final-time residuals, the space-time regularity norm of
    sigma, and the L1 distance of the final density and pressure to the
    previous k's run; the first row has no predecessor and keeps None there.
    """
    ks = [float(k) for k in ks]
    if not ks:
        raise ValueError("ks must be nonempty")
    if any(k < 2.0 for k in ks):
        raise ValueError("every k must be >= 2")
    if any(b < a for a, b in zip(ks, ks[1:])):
        raise ValueError("ks must be nondecreasing")
    if collar is None:
        collar = diagnostics.COLLAR_FRACTION * base.params.growth.pm

    rows = []
    prev = None
    for k in ks:
        t0 = time.perf_counter()
        cfg = replace(base, params=replace(base.params, k=k))
        result = run(cfg)
        final = result.snapshots[-1]
        dn = dp = None
        if prev is not None:
            dn = l1_distance(final.n, prev.n)
            dp = l1_distance(final.p, prev.p)
        rows.append(SweepRow(
            k=k,
            graph_residual=diagnostics.graph_residual(final.n, cfg.params),
            compl_residual=diagnostics.complementarity_residual(final.n, cfg.params, collar),
            sigma_l2=diagnostics.sigma_regularity(result),
            dist_prev_n=dn,
            dist_prev_p=dp,
            runtime=time.perf_counter() - t0,
            result=result,
        ))
        prev = final
    return SweepResult(tuple(rows), collar)


@dataclass(frozen=True)
class NuRow:
    nu: float
    front: float
    speed: float
    speed_stderr: float
    front_sensitivity: dict
    result: RunResult


@dataclass(frozen=True)
class NuComparison:
    rows: tuple


def nu_compare(base: RunConfig, nus) -> NuComparison:
    """Run `base` at each motility in nus; order of nus is preserved.

    Each row keeps the finished run so callers can export the final
    profiles.
    """
    nus = [float(nu) for nu in nus]
    if not nus:
        raise ValueError("nus must be nonempty")
    if any(nu < 0.0 for nu in nus):
        raise ValueError("every nu must be >= 0")
    rows = []
    for nu in nus:
        cfg = replace(base, params=replace(base.params, nu=nu))
        result = run(cfg)
        fit = diagnostics.estimate_speed(result.series.t, result.series.front)
        final = result.snapshots[-1]
        rows.append(NuRow(
            nu=nu,
            front=diagnostics.front_position(final.n, cfg.front_threshold),
            speed=fit.speed,
            speed_stderr=fit.stderr,
            front_sensitivity=diagnostics.front_sensitivity(final.n),
            result=result,
        ))
    return NuComparison(tuple(rows))


@dataclass(frozen=True)
class WaveStudy:
    nu: float
    k: float
    speed: float
    speed_stderr: float
    sigma0: float
    formula_rhs: float
    traveled_widths: float
    faster_than_passive: bool
    front_sensitivity: dict
    trajectory_t: np.ndarray
    trajectory_r: np.ndarray
    result: RunResult


def wave_speed_check(config: RunConfig) -> WaveStudy:
    """Measure the asymptotic front speed of a bump run on a line grid.

    The measured speed is the trailing-window fit of the density-front
    trajectory.  The interface relation is evaluated at the edge of the
    pressure support of the final state (located by a threshold crossing of
    p/pm at the collar fraction).  The run should last long enough for the
    front to travel at least MIN_TRAVEL_WIDTHS bump widths; the distance
    actually covered is reported.
    """
    if config.grid.geometry != "line":
        raise ValueError("wave speed study needs a line grid")
    if not isinstance(config.initial, BumpSpec):
        raise ValueError("wave speed study needs bump initial data")
    result = run(config)
    traj_t = result.series.t
    traj_r = result.series.front
    defined = np.isfinite(traj_r)
    if not np.any(defined):
        raise diagnostics.FrontUndefinedError(
            "front never formed: density stayed below the tracking threshold")
    traveled = float(traj_r[defined][-1] - traj_r[defined][0])
    fit = diagnostics.estimate_speed(traj_t, traj_r)
    sigma0 = model.sigma0_speed(config.params.growth)

    final = result.snapshots[-1]
    pm = config.params.growth.pm
    p_scaled = final.p.values / pm
    r_support = threshold_crossing(p_scaled, config.grid.centers,
                                   diagnostics.COLLAR_FRACTION)
    if math.isnan(r_support):
        raise diagnostics.FrontUndefinedError(
            "pressure support edge undefined; cannot evaluate interface relation")
    formula = diagnostics.tw_formula_rhs(final, config.params, r_support)
    return WaveStudy(
        nu=config.params.nu,
        k=config.params.k,
        speed=fit.speed,
        speed_stderr=fit.stderr,
        sigma0=sigma0,
        formula_rhs=formula,
        traveled_widths=traveled / config.initial.width,
        faster_than_passive=bool(config.params.nu > 0.0 and fit.speed > sigma0),
        front_sensitivity=diagnostics.front_sensitivity(final.n),
        trajectory_t=traj_t,
        trajectory_r=traj_r,
        result=result,
    )
