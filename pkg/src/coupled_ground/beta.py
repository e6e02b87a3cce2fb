"""Coupling thresholds from a weighted Dirichlet eigenproblem.

For a weight w >= 0 the smallest eigenvalue of -Delta h = kappa w h on the
ball of radius R (h = 0 on the boundary) is

    kappa = min ||grad h||_2^2 / int w h^2.

The discrete problem uses the same stiffness matrix as the energy, so
the eigenvalue is the minimum of the discrete Rayleigh quotient over grid
functions vanishing at r = R.  With w = z^r and z the mass-a scalar
ground state, beta = kappa / 2 is the coupling above which adding a small
second component lowers the energy when that component enters
quadratically.  The rescaling z = (lambda/mu)^{1/(p-2)} U(sqrt(lambda) x)
turns this into U-coordinates times an explicit power of mu and a.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse.linalg import splu

from .errors import ParameterError, SolverError
from .radial import RadialField, RadialGrid, grad_norm_sq, lp_norm_pow, make_grid
from .scalar import (
    ScalarGroundState,
    ScalarParams,
    check_exponent,
    ground_state,
    scale_to_mass,
    sobolev_exponent,
)

EIG_RTOL = 1e-12
EIG_MAX_ITERS = 20000
BETA_RADIUS = 40.0
BETA_POINTS = 8001


@dataclass(frozen=True)
class BetaProblem:
    dim: int
    p: float
    mu: float = 1.0
    mass: float = 1.0
    r: float = 2.0

    def __post_init__(self) -> None:
        check_exponent(self.dim, self.p, supercritical=True)
        if not (math.isfinite(self.r) and self.r > 0):
            raise ParameterError(f"r must be positive, got {self.r!r}")
        for name in ("mu", "mass"):
            val = getattr(self, name)
            if not (math.isfinite(val) and val > 0):
                raise ParameterError(f"{name} must be positive, got {val!r}")

    @property
    def kappa(self) -> float:
        return self.dim * (self.p - 2) - 4

    def prefactor(self, Up_mass_sq: float) -> float:
        """beta / kappa_U, the conversion from U-coordinates, including the 1/2."""
        k, n, p, r = self.kappa, self.dim, self.p, self.r
        return (
            0.5
            * self.mu ** ((r * n - 4) / k)
            * Up_mass_sq ** (2 * (p - 2 - r) / k)
            * self.mass ** (-2 * (p - 2 - r) / k)
        )

    def mass_exponent(self) -> float:
        """d log beta / d log a."""
        return -2 * (self.p - 2 - self.r) / self.kappa


@dataclass(frozen=True)
class EigenResult:
    value: float
    vector: RadialField
    iterations: int


def rayleigh_minimizer(weight: RadialField, grid: RadialGrid | None = None) -> EigenResult:
    """Smallest weighted Dirichlet eigenpair by inverse iteration.

    The returned ``value`` is the discrete Rayleigh quotient of the
    returned ``vector``, so it is an upper bound for the discrete minimum
    that is sharp to the iteration tolerance.  The vector is positive and
    normalized to unit L^2 norm.
    """
    grid = weight.grid if grid is None else grid
    if weight.grid != grid:
        raise ParameterError("weight is not sampled on the requested grid")
    w = weight.values
    if np.any(w < 0):
        raise ParameterError("weight must be nonnegative")
    if not np.any(w[:-1] > 0):
        raise ParameterError("weight vanishes identically")
    k = grid.stiffness[:-1, :-1].tocsc()
    mw = grid.volumes[:-1] * w[:-1]
    lu = splu(k)
    x = np.ones(grid.points - 1)
    x /= math.sqrt(x @ (mw * x))
    prev = math.inf
    for it in range(1, EIG_MAX_ITERS + 1):
        y = lu.solve(mw * x)
        y /= math.sqrt(y @ (mw * y))
        val = float(y @ (k @ y))
        x = y
        if abs(prev - val) <= EIG_RTOL * val:
            break
        prev = val
    else:
        raise SolverError("inverse iteration stagnated", {"last": val, "previous": prev})
    x = np.abs(x)
    full = np.append(x, 0.0)
    h = RadialField(grid, full / math.sqrt(lp_norm_pow(RadialField(grid, full), 2.0)))
    quotient = grad_norm_sq(h) / float(np.dot(grid.volumes, w * h.values**2))
    return EigenResult(quotient, h, it)


def rayleigh_min(weight: RadialField, grid: RadialGrid | None = None) -> float:
    """min ||grad h||^2 / int w h^2 over grid functions with h(R) = 0."""
    return rayleigh_minimizer(weight, grid).value


def _default_U(bp: BetaProblem, radius: float, points: int) -> tuple[ScalarGroundState, RadialField]:
    U = ground_state(bp.dim, bp.p)
    return U, U.on_grid(make_grid(bp.dim, radius, points))


def beta_star(bp: BetaProblem, radius: float = BETA_RADIUS, points: int = BETA_POINTS) -> float:
    """Coupling threshold; 0 in dimensions 1 and 2.

    For N >= 3 the eigenproblem is solved once in U-coordinates on the
    ball of the given radius and rescaled to (mu, a).
    """
    if bp.dim <= 2:
        return 0.0
    U, uf = _default_U(bp, radius, points)
    weight = uf.with_values(uf.values**bp.r)
    return bp.prefactor(U.mass_sq) * rayleigh_min(weight)


def beta_direct(bp: BetaProblem, radius: float, points: int) -> float:
    """kappa/2 for the weight z^r with z the mass-a state, on the physical ball of given radius.

    This is the finite-domain estimate used to exhibit the decay to zero
    in dimensions 1 and 2.
    """
    U = ground_state(bp.dim, bp.p)
    z, _ = scale_to_mass(ScalarParams(bp.dim, bp.p, bp.mu, bp.mass), U, make_grid(bp.dim, radius, points))
    return 0.5 * rayleigh_min(z.with_values(z.values**bp.r))


def beta_bounds(bp: BetaProblem, SN: float, U: ScalarGroundState | None = None) -> tuple[float, float]:
    """Explicit lower and upper bounds for the threshold (N >= 3).

    The lower bound combines the Sobolev inequality with Hoelder; the upper
    bound evaluates the quotient at h = U.
    """
    if bp.dim <= 2:
        raise ParameterError("threshold bounds need N >= 3")
    if U is None:
        U = ground_state(bp.dim, bp.p)
    crit = sobolev_exponent(bp.dim)
    s = crit * bp.r / (crit - 2)
    if s < 1:
        raise ParameterError(f"Hoelder exponent 2*r/(2*-2)={s:g} is below 1")
    pref = bp.prefactor(U.mass_sq)
    lower = pref * lp_norm_pow(U.field, s) ** (-bp.r / s) * SN
    upper = pref * U.grad_sq / lp_norm_pow(U.field, bp.r + 2)
    return lower, upper


def talenti_quotient(dim: int, eps: float, radius: float, points: int) -> float:
    grid = make_grid(dim, radius, points)
    h = RadialField.from_function(grid, lambda r: (1 + r * r / eps) ** (-(dim - 2) / 2))
    crit = sobolev_exponent(dim)
    return grad_norm_sq(h) / lp_norm_pow(h, crit) ** (2 / crit)


def sobolev_constant(N: int, radius: float = 400.0, points: int = 80001) -> float:
    """Sharp Sobolev constant ||grad h||^2 >= S ||h||_{2*}^2, from Talenti profiles.

    The profiles are truncated at ``radius``; truncation only lowers the
    quotient, so the returned value never exceeds the true constant.
    """
    if N not in (3, 4):
        raise ParameterError(f"Sobolev constant is provided for N = 3, 4, got {N!r}")
    return min(talenti_quotient(N, eps, radius, points) for eps in (0.5, 1.0, 2.0))


def sobolev_constant_exact(N: int) -> float:
    """Closed form pi N (N-2) (Gamma(N/2)/Gamma(N))^{2/N}."""
    return math.pi * N * (N - 2) * (math.gamma(N / 2) / math.gamma(N)) ** (2 / N)


@dataclass(frozen=True)
class ScalingReport:
    masses: tuple[float, ...]
    values: tuple[float, ...]
    slope: float
    expected_slope: float
    regime: str


def beta_scaling_report(bp: BetaProblem, a_values) -> ScalingReport:
    """Threshold as a function of the mass, with the fitted log-log slope."""
    if bp.dim <= 2:
        raise ParameterError("scaling report needs N >= 3")
    a_values = tuple(float(a) for a in a_values)
    if len(a_values) < 2:
        raise ParameterError("need at least two masses")
    vals = tuple(beta_star(BetaProblem(bp.dim, bp.p, bp.mu, a, bp.r)) for a in a_values)
    slope = float(np.polyfit(np.log(a_values), np.log(vals), 1)[0])
    gap = bp.p - 2 - bp.r
    regime = "increasing" if gap < 0 else ("constant" if gap == 0 else "decreasing")
    return ScalingReport(a_values, vals, slope, bp.mass_exponent(), regime)
