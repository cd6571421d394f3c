"""Finite-volume simulation and stiff-limit diagnostics for
congestion-limited tissue growth.

The density n follows a porous-medium flow with motility correction and
pressure-limited growth,

    dn/dt = div(n grad p) + nu lap n + n G(p),    p = k/(k-1) n^(k-1),

which in conservative form reads dn/dt = lap Sigma(n) + n G(p) with
Sigma(n) = n^k + nu n.  Large k drives the flow toward its incompressible
(free boundary) limit; the diagnostics quantify how far a finite-k run is
from that limit and how fronts propagate.
"""

from .model import (
    GrowthLaw,
    LinearGrowth,
    ModelParams,
    TabulatedGrowth,
    ZeroGrowth,
    density_of_pressure,
    max_density,
    pressure_of_density,
    sigma,
    sigma0_speed,
    sigma_prime,
)
from .grid import Field, Grid, make_grid, mass
from .solver import (
    BumpSpec,
    RunConfig,
    RunResult,
    SimulationError,
    StabilityError,
    make_bump,
    run,
    stable_dt,
    step,
    validate_initial,
)
from .diagnostics import (
    complementarity_residual,
    estimate_speed,
    front_position,
    graph_residual,
    lemma_bounds_report,
)
from .experiments import k_sweep, nu_compare, wave_speed_check

__version__ = "0.1.0"

__all__ = [
    "GrowthLaw",
    "LinearGrowth",
    "TabulatedGrowth",
    "ZeroGrowth",
    "ModelParams",
    "pressure_of_density",
    "density_of_pressure",
    "sigma",
    "sigma_prime",
    "max_density",
    "sigma0_speed",
    "Field",
    "Grid",
    "make_grid",
    "mass",
    "BumpSpec",
    "RunConfig",
    "RunResult",
    "SimulationError",
    "StabilityError",
    "make_bump",
    "run",
    "stable_dt",
    "step",
    "validate_initial",
    "graph_residual",
    "complementarity_residual",
    "front_position",
    "estimate_speed",
    "lemma_bounds_report",
    "k_sweep",
    "nu_compare",
    "wave_speed_check",
    "__version__",
]
