"""Information propagation speed bounds for sparse mobile DTNs: kernel
solver, asymptotics, epidemic-broadcast simulator, and slope statistics."""

from .kernel import (
    BoundStatus,
    KernelPoint,
    ModelParams,
    SpeedBound,
    asymptotic_speed_billiard,
    asymptotic_speed_random_walk,
    coupling,
    kernel_residual,
    pole_rho,
    slowness_sweep,
    speed_bound,
    theta_of_rho,
)
from .sim import (
    ConfigError,
    InfectionRecord,
    SimConfig,
    World,
    advance,
    flood,
    init_world,
    run_epidemic,
)
from .specfun import DomainError, bessel_i0, bessel_i1, psi, xi, y
from .stats import (
    DominationReport,
    PropagationCurve,
    SlopeFit,
    StatsError,
    build_curve,
    check_bound,
    curve_r_squared,
    fit_slope,
    front_records,
)

__all__ = [
    "BoundStatus",
    "ConfigError",
    "DomainError",
    "DominationReport",
    "InfectionRecord",
    "KernelPoint",
    "ModelParams",
    "PropagationCurve",
    "SimConfig",
    "SlopeFit",
    "SpeedBound",
    "StatsError",
    "World",
    "advance",
    "asymptotic_speed_billiard",
    "asymptotic_speed_random_walk",
    "bessel_i0",
    "bessel_i1",
    "build_curve",
    "check_bound",
    "coupling",
    "curve_r_squared",
    "fit_slope",
    "flood",
    "front_records",
    "init_world",
    "kernel_residual",
    "pole_rho",
    "psi",
    "run_epidemic",
    "slowness_sweep",
    "speed_bound",
    "theta_of_rho",
    "xi",
    "y",
]
