"""Constitutive relations for congestion-limited growth.

Density n and pressure p are tied by the power law p = k/(k-1) * n^(k-1),
so the flux n grad(p) + nu grad(n) is the gradient of a single potential
sigma(n) = n^k + nu n.  Growth is a decreasing function G(p) that vanishes
at the homeostatic pressure pm; density therefore saturates at
max_density = ((k-1) pm / k)^(1/(k-1)).

All operations are pure, accept scalars or numpy arrays, and never mutate
their inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

__all__ = [
    "GrowthLaw",
    "LinearGrowth",
    "TabulatedGrowth",
    "ZeroGrowth",
    "ModelParams",
    "growth_eval",
    "pressure_of_density",
    "density_of_pressure",
    "sigma",
    "sigma_prime",
    "max_density",
    "sigma0_speed",
]

# sample count used to certify strict decrease of a growth law
_MONOTONE_SAMPLES = 128


class GrowthLaw:
    """Pressure-dependent growth rate.

    Concrete laws are callables G(p) exposing two floats: ``pm``, the
    homeostatic pressure where growth stops, and ``g0 = G(0) > 0``.
    """

    pm: float
    g0: float

    def __call__(self, p):
        raise NotImplementedError


def _check_strictly_decreasing(law: GrowthLaw) -> None:
    ps = np.linspace(0.0, law.pm, _MONOTONE_SAMPLES)
    gs = law(ps)
    if not np.all(np.diff(gs) < 0.0):
        raise ValueError("growth law must be strictly decreasing on [0, pm]")


@dataclass(frozen=True)
class LinearGrowth(GrowthLaw):
    """Affine law G(p) = g0 * (1 - p / pm); the default is G(p) = 1 - p."""

    pm: float = 1.0
    g0: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.pm) and self.pm > 0.0):
            raise ValueError(f"homeostatic pressure must be positive, got {self.pm}")
        if not (math.isfinite(self.g0) and self.g0 > 0.0):
            raise ValueError(f"G(0) must be positive, got {self.g0}")
        _check_strictly_decreasing(self)
        if abs(self(self.pm)) > 1e-12:
            raise ValueError("G(pm) must vanish")

    def __call__(self, p):
        return self.g0 * (1.0 - p / self.pm)


@dataclass(frozen=True)
class TabulatedGrowth(GrowthLaw):
    """Piecewise-linear law through user samples.

    Pressures must start at 0 and increase strictly; rates must decrease
    strictly, start positive and end at or below zero.  ``pm`` is where the
    interpolant crosses zero.  Queries outside the tabulated range raise.
    """

    pressures: np.ndarray
    rates: np.ndarray
    pm: float = field(init=False)
    g0: float = field(init=False)

    def __post_init__(self):
        ps = np.asarray(self.pressures, dtype=float)
        gs = np.asarray(self.rates, dtype=float)
        if ps.ndim != 1 or ps.shape != gs.shape or ps.size < 2:
            raise ValueError("need matching 1d sample arrays with at least 2 points")
        if not (np.all(np.isfinite(ps)) and np.all(np.isfinite(gs))):
            raise ValueError("samples must be finite")
        if ps[0] != 0.0:
            raise ValueError("pressure samples must start at 0")
        if not np.all(np.diff(ps) > 0.0):
            raise ValueError("pressure samples must increase strictly")
        if not np.all(np.diff(gs) < 0.0):
            raise ValueError("growth law must be strictly decreasing on [0, pm]")
        if gs[0] <= 0.0:
            raise ValueError("G(0) must be positive")
        if gs[-1] > 0.0:
            raise ValueError("samples must reach zero rate so pm is defined")
        ps = ps.copy()
        gs = gs.copy()
        ps.setflags(write=False)
        gs.setflags(write=False)
        object.__setattr__(self, "pressures", ps)
        object.__setattr__(self, "rates", gs)
        # zero crossing of the interpolant
        j = int(np.searchsorted(-gs, 0.0, side="left"))
        if gs[j] == 0.0:
            pm = float(ps[j])
        else:
            t = gs[j - 1] / (gs[j - 1] - gs[j])
            pm = float(ps[j - 1] + t * (ps[j] - ps[j - 1]))
        object.__setattr__(self, "pm", pm)
        object.__setattr__(self, "g0", float(gs[0]))

    def __call__(self, p):
        arr = np.asarray(p, dtype=float)
        if np.any(arr < self.pressures[0]) or np.any(arr > self.pressures[-1]):
            raise ValueError("pressure outside tabulated range")
        out = np.interp(arr, self.pressures, self.rates)
        return out if out.ndim else float(out)

    def _integral_to_pm(self) -> float:
        # exact integral of the piecewise-linear interpolant on [0, pm]
        ps = np.append(self.pressures[self.pressures < self.pm], self.pm)
        gs = np.interp(ps, self.pressures, self.rates)
        return float(np.trapezoid(gs, ps))


@dataclass(frozen=True)
class ZeroGrowth(GrowthLaw):
    """G identically zero.

    Not an admissible growth law (g0 = 0); exists so mass-conservation
    checks can run the solver with the reaction switched off.
    """

    pm: float = math.inf
    g0: float = 0.0

    def __call__(self, p):
        return 0.0 * p


@dataclass(frozen=True)
class ModelParams:
    """Stiffness exponent k >= 2, active motility nu >= 0, growth law."""

    k: float
    nu: float = 0.0
    growth: GrowthLaw = field(default_factory=LinearGrowth)

    def __post_init__(self):
        if not (math.isfinite(self.k) and self.k >= 2.0):
            raise ValueError(f"k must be a finite number >= 2, got {self.k}")
        if not (math.isfinite(self.nu) and self.nu >= 0.0):
            raise ValueError(f"nu must be a finite number >= 0, got {self.nu}")
        if not isinstance(self.growth, GrowthLaw):
            raise ValueError("growth must be a GrowthLaw")


def growth_eval(law: GrowthLaw, p):
    """Evaluate G(p); domain errors propagate from the law."""
    return law(p)


def _as_nonnegative(x, what: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0.0):
        raise ValueError(f"{what} must be nonnegative")
    return arr


def pressure_of_density(n, params: ModelParams):
    """p = k/(k-1) * n^(k-1).  Underflows to 0 for small n at large k."""
    arr = _as_nonnegative(n, "density")
    k = params.k
    out = (k / (k - 1.0)) * arr ** (k - 1.0)
    return out if out.ndim else float(out)


def density_of_pressure(p, params: ModelParams):
    """Inverse of pressure_of_density: n = ((k-1) p / k)^(1/(k-1))."""
    arr = _as_nonnegative(p, "pressure")
    k = params.k
    out = ((k - 1.0) * arr / k) ** (1.0 / (k - 1.0))
    return out if out.ndim else float(out)


def sigma(n, params: ModelParams):
    """Flux potential sigma(n) = n^k + nu n."""
    arr = _as_nonnegative(n, "density")
    out = arr ** params.k + params.nu * arr
    return out if out.ndim else float(out)


def sigma_prime(n, params: ModelParams):
    """sigma'(n) = k n^(k-1) + nu, bounded below by nu."""
    arr = _as_nonnegative(n, "density")
    out = params.k * arr ** (params.k - 1.0) + params.nu
    return out if out.ndim else float(out)


def max_density(params: ModelParams) -> float:
    """Density at which the pressure reaches pm and growth stops."""
    k = params.k
    return ((k - 1.0) * params.growth.pm / k) ** (1.0 / (k - 1.0))


def sigma0_speed(law: GrowthLaw) -> float:
    """Base front speed sqrt(2 * integral of G over [0, pm]).

    Tabulated laws are integrated exactly (the interpolant is piecewise
    linear); other laws go through adaptive quadrature at 1e-10 relative
    tolerance.
    """
    if isinstance(law, TabulatedGrowth):
        total = law._integral_to_pm()
    else:
        if not (math.isfinite(law.pm) and law.pm > 0.0):
            raise ValueError("law must have a finite positive pm")
        total, _ = integrate.quad(law, 0.0, law.pm, epsabs=1e-14, epsrel=1e-10, limit=200)
    if total <= 0.0:
        raise ValueError("integral of G over [0, pm] must be positive")
    return math.sqrt(2.0 * total)
