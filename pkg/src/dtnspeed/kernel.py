"""Kernel equation of the journey Laplace transform and the speed bound.

The kernel is the set of (rho, theta) where

    1/Y_D(rho, theta) - tau - 2*v*nu*Xi_D(rho) / (1 - nu*Psi_D(rho)) = 0,

and the information-propagation-speed upper bound is the smallest ratio
theta/rho on that set.  The bound is finite only for densities below the
threshold 1/V_D (V_D the unit-ball volume).
"""

import enum
import math
from dataclasses import dataclass
from typing import Optional

from .specfun import (
    DomainError,
    UNIT_BALL_VOLUME,
    bessel_i0,
    bessel_i1,
    check_dim,
    psi,
    xi,
    y,
)

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
_SCAN_POINTS = 2000
_POLE_CLIP = 1.0 - 1e-9   # keep the search strictly left of the pole


@dataclass(frozen=True)
class ModelParams:
    """Analytical model inputs: dimension, density, speed, turn rate."""

    d: int
    nu: float
    v: float
    tau: float

    def __post_init__(self):
        check_dim(self.d)
        if self.nu < 0.0:
            raise DomainError(f"nu must be >= 0, got {self.nu}")
        if self.v <= 0.0:
            raise DomainError(f"v must be > 0, got {self.v}")
        if self.tau < 0.0:
            raise DomainError(f"tau must be >= 0, got {self.tau}")

    @property
    def threshold(self):
        """Density 1/V_D above which the bound is infinite."""
        return 1.0 / UNIT_BALL_VOLUME[self.d]


@dataclass(frozen=True)
class KernelPoint:
    """A (rho, theta) pair on or near the kernel set."""

    rho: float
    theta: float


class BoundStatus(enum.Enum):
    FINITE = "finite"
    UNBOUNDED = "unbounded"
    DEGENERATE_ZERO_DENSITY = "degenerate-zero-density"


@dataclass(frozen=True)
class SpeedBound:
    """Result of minimizing theta/rho over the kernel set.

    speed and argmin are present only for FINITE status.  slowness is
    1/speed when finite, 0 by convention when unbounded, and +inf for the
    zero-density random-walk degenerate case (the ratio infimum is 0).
    """

    status: BoundStatus
    slowness: float
    speed: Optional[float] = None
    argmin: Optional[KernelPoint] = None


def coupling(params, rho):
    """Right-hand side A(rho) = tau + 2*v*nu*Xi_D(rho)/(1 - nu*Psi_D(rho)).

    The kernel equation then reads 1/Y_D(rho, theta) = A(rho).
    """
    denom = 1.0 - params.nu * psi(params.d, rho)
    if denom <= 0.0:
        raise DomainError(f"rho={rho} is at or beyond the kernel pole")
    return params.tau + 2.0 * params.v * params.nu * xi(params.d, rho) / denom


def pole_rho(params):
    """Right edge of the rho search interval: the root of nu*Psi_D(rho) = 1.

    Returns +inf for nu = 0; raises for nu >= 1/V_D where the pole
    collapses to the origin.
    """
    if params.nu >= params.threshold:
        raise DomainError(
            f"density {params.nu} meets or exceeds threshold 1/V_D = {params.threshold}"
        )
    if params.nu == 0.0:
        return math.inf
    lo, hi = 0.0, 1.0
    while params.nu * psi(params.d, hi) < 1.0:
        lo = hi
        hi *= 2.0
    while hi - lo > 1e-12 * hi:
        mid = 0.5 * (lo + hi)
        if params.nu * psi(params.d, mid) < 1.0:
            lo = mid
        else:
            hi = mid
    # lo is the side where the denominator is still positive
    return lo


def theta_of_rho(params, rho):
    """The unique theta > 0 solving the kernel equation at this rho.

    Closed forms from inverting 1/Y_D = A: a quadratic for D=1, a square
    root for D=2, and x = rho*v*coth(rho*v/A) with x = tau+theta for D=3.
    """
    if rho <= 0.0:
        raise DomainError(f"theta_of_rho requires rho > 0, got {rho}")
    a_rho = coupling(params, rho)
    a = rho * params.v
    if a_rho == 0.0:
        # nu = 0 and tau = 0: the kernel degenerates to theta = rho*v
        return a
    if params.d == 1:
        x = 0.5 * (a_rho + math.sqrt(a_rho * a_rho + 4.0 * a * a))
    elif params.d == 2:
        x = math.sqrt(a_rho * a_rho + a * a)
    else:
        z = a / a_rho
        if z < 1e-12:
            x = a_rho * (1.0 + z * z / 3.0)
        else:
            x = a / math.tanh(z)
    return x - params.tau


def kernel_residual(params, point):
    """Left-hand side of the kernel equation; zero exactly on the kernel."""
    return 1.0 / y(params.d, point.rho, point.theta, params.v, params.tau) - coupling(
        params, point.rho
    )


def _golden_min(f, lo, hi, rel_tol):
    """Golden-section minimization of a unimodal f on [lo, hi]."""
    c = hi - _GOLDEN * (hi - lo)
    d = lo + _GOLDEN * (hi - lo)
    fc, fd = f(c), f(d)
    while hi - lo > rel_tol * max(1e-300, abs(lo) + abs(hi)):
        if fc < fd:
            hi, d, fd = d, c, fc
            c = hi - _GOLDEN * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + _GOLDEN * (hi - lo)
            fd = f(d)
    x = 0.5 * (lo + hi)
    return x, f(x)


def _minimize_ratio(f, rho_star):
    """Coarse log-grid scan plus golden-section refinement of f on (0, rho_star).

    The scan guards against the (unproven) possibility of multiple local
    minima; refinement then polishes the best bracket.
    """
    raw = f

    def f(r):
        # points rounding past the pole act as +inf, never as candidates
        try:
            return raw(r)
        except DomainError:
            return math.inf

    lo = 1e-6 * rho_star
    hi = _POLE_CLIP * rho_star
    step = (hi / lo) ** (1.0 / (_SCAN_POINTS - 1))
    grid = [lo * step**i for i in range(_SCAN_POINTS)]
    values = [f(r) for r in grid]
    i = min(range(_SCAN_POINTS), key=values.__getitem__)
    left = grid[max(i - 1, 0)]
    right = grid[min(i + 1, _SCAN_POINTS - 1)]
    return _golden_min(f, left, right, 1e-10)


def speed_bound(params):
    """Upper bound on the information propagation speed (smallest theta/rho).

    Unbounded for nu >= 1/V_D.  For nu = 0 the kernel degenerates: with
    tau = 0 the ratio is identically v (infimum at rho -> inf, reported
    with a sentinel argmin); with tau > 0 the ratio infimum is 0 at
    rho -> 0, reported as the zero-density degenerate status.
    """
    if params.nu >= params.threshold:
        return SpeedBound(status=BoundStatus.UNBOUNDED, slowness=0.0)
    if params.nu == 0.0:
        if params.tau == 0.0:
            point = KernelPoint(rho=math.inf, theta=math.inf)
            return SpeedBound(
                status=BoundStatus.FINITE,
                slowness=1.0 / params.v,
                speed=params.v,
                argmin=point,
            )
        return SpeedBound(
            status=BoundStatus.DEGENERATE_ZERO_DENSITY, slowness=math.inf
        )
    rho_star = pole_rho(params)
    rho0, ratio = _minimize_ratio(
        lambda r: theta_of_rho(params, r) / r, rho_star
    )
    theta0 = theta_of_rho(params, rho0)
    speed = theta0 / rho0
    return SpeedBound(
        status=BoundStatus.FINITE,
        slowness=1.0 / speed,
        speed=speed,
        argmin=KernelPoint(rho=rho0, theta=theta0),
    )


def slowness_sweep(d, v, tau, nu_grid):
    """Slowness (1/speed) per density; 0 where the bound is unbounded."""
    out = []
    for nu in nu_grid:
        bound = speed_bound(ModelParams(d=d, nu=nu, v=v, tau=tau))
        out.append((nu, bound.slowness))
    return out


def asymptotic_speed_random_walk(params):
    """Sparse-density random-walk estimate v*sqrt(2*nu*H(0)/tau), D=2 only.

    H(0) = 4*pi*v / (1 - pi*nu) is the zero-rho limit of the coupling
    function behind the random-walk corollary.
    """
    if params.d != 2:
        raise DomainError("random-walk asymptotic is derived for D=2 only")
    if params.tau <= 0.0:
        raise DomainError("random-walk asymptotic requires tau > 0")
    if params.nu >= params.threshold:
        raise DomainError("density must be below 1/pi")
    h0 = 4.0 * math.pi * params.v / (1.0 - math.pi * params.nu)
    return params.v * math.sqrt(2.0 * params.nu * h0 / params.tau)


def asymptotic_speed_billiard(params):
    """Billiard (tau = 0) speed bound v*sqrt(1 + (H1(rho0)/rho0)^2), D=2 only.

    H1(rho) = 4*pi*nu*I0(rho) / (1 - 2*pi*nu*I1(rho)/rho), and rho0
    minimizes H1(rho)/rho on (0, pole).  Algebraically identical to
    speed_bound at tau = 0, D=2.
    """
    if params.d != 2:
        raise DomainError("billiard asymptotic is derived for D=2 only")
    if params.tau != 0.0:
        raise DomainError("billiard asymptotic requires tau = 0")
    if params.nu >= params.threshold:
        raise DomainError("density must be below 1/pi")
    if params.nu == 0.0:
        return params.v

    def h1_over_rho(rho):
        denom = 1.0 - 2.0 * math.pi * params.nu * bessel_i1(rho) / rho
        return 4.0 * math.pi * params.nu * bessel_i0(rho) / (denom * rho)

    rho_star = pole_rho(params)
    _, g0 = _minimize_ratio(h1_over_rho, rho_star)
    return params.v * math.sqrt(1.0 + g0 * g0)
