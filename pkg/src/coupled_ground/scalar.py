"""Scalar ground state -Delta U + U = U^{p-1} and its mass-prescribed rescalings.

The radial profile is computed by shooting on u(0) followed by a
two-sided matching refinement that pins the exponentially small tail.
Norms of U are accumulated along the ODE integration, so they carry the
ODE accuracy rather than the accuracy of any particular grid.

Closed forms (frequency, energy level, mass threshold) depend on U only
through ``||U||_2^2``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import root
from scipy.special import kve

from .errors import ParameterError, SolverError
from .radial import (
    SURFACE_MEASURE,
    RadialField,
    RadialGrid,
    apply_laplacian,
    grad_norm_sq,
    lp_norm_pow,
    make_grid,
)

log = logging.getLogger(__name__)

SERIES_RADIUS = 1e-4
TAIL_START = 40.0
ODE_RTOL = 1e-12
BISECTION_RTOL = 1e-12
MAX_BISECTIONS = 200


def sobolev_exponent(dim: int) -> float:
    """2* = 2N/(N-2) for N >= 3, +inf otherwise."""
    return math.inf if dim <= 2 else 2.0 * dim / (dim - 2)


def mass_critical_exponent(dim: int) -> float:
    return 2.0 + 4.0 / dim


def check_exponent(dim: int, p: float, *, supercritical: bool = False, name: str = "p") -> None:
    if dim not in SURFACE_MEASURE:
        raise ParameterError(f"dim must be 1..4, got {dim!r}")
    if not (2.0 < p < sobolev_exponent(dim)):
        raise ParameterError(f"{name}={p} outside (2, 2*) for N={dim}")
    crit = mass_critical_exponent(dim)
    if abs(p - crit) < 1e-12:
        raise ParameterError(f"{name}={p} is the mass-critical exponent 2+4/N")
    if supercritical and p <= crit:
        raise ParameterError(f"{name}={p} must exceed 2+4/N={crit:g} for N={dim}")


@dataclass(frozen=True)
class ScalarParams:
    dim: int
    p: float
    mu: float = 1.0
    mass: float = 1.0

    def __post_init__(self) -> None:
        check_exponent(self.dim, self.p)
        for name in ("mu", "mass"):
            val = getattr(self, name)
            if not (math.isfinite(val) and val > 0):
                raise ParameterError(f"{name} must be positive, got {val!r}")

    @property
    def kappa(self) -> float:
        """N(p-2) - 4; positive exactly in the mass-supercritical range."""
        return self.dim * (self.p - 2.0) - 4.0

    @property
    def mass_exponent(self) -> float:
        """2N - (N-2)p, positive whenever p < 2*."""
        return 2.0 * self.dim - (self.dim - 2.0) * self.p


# --------------------------------------------------------------------------
# radial profile


class _Profile:
    """Continuous representation of U on [0, inf)."""

    def __init__(self, dim, p, height, inner, r_match, outer, tail_start, tail_value):
        self.dim = dim
        self.p = p
        self.height = height
        self.inner = inner
        self.r_match = r_match
        self.outer = outer
        self.tail_start = tail_start
        self.tail_value = tail_value

    def _tail(self, r):
        nu = self.dim / 2.0 - 1.0
        R = self.tail_start
        ratio = (R / r) ** nu * kve(nu, r) / kve(nu, R) * np.exp(-(r - R))
        return self.tail_value * ratio

    def __call__(self, r) -> np.ndarray:
        r = np.atleast_1d(np.asarray(r, dtype=float))
        out = np.empty_like(r)
        h, p, n = self.height, self.p, self.dim
        a = r < SERIES_RADIUS
        out[a] = h + (h - h ** (p - 1)) * r[a] ** 2 / (2 * n)
        b = (~a) & (r <= self.r_match)
        if np.any(b):
            out[b] = self.inner(r[b])[0]
        c = (r > self.r_match) & (r <= self.tail_start)
        if np.any(c):
            out[c] = self.outer(r[c])[0]
        d = r > self.tail_start
        if np.any(d):
            out[d] = self._tail(r[d])
        return out


@dataclass(frozen=True)
class ScalarGroundState:
    """U_p sampled on ``field.grid`` together with its exact norms."""

    dim: int
    p: float
    field: RadialField
    mass_sq: float
    grad_sq: float
    pnorm_pow: float
    shoot_height: float
    profile: Callable = field(repr=False, compare=False)

    def evaluate(self, r) -> np.ndarray:
        return self.profile(r)

    def on_grid(self, grid: RadialGrid) -> RadialField:
        return RadialField(grid, self.profile(grid.nodes))

    def residual(self) -> float:
        """max |-Delta U + U - U^{p-1}| / max U on the sampling grid."""
        u = self.field.values
        lap = apply_laplacian(self.field).values
        return float(np.max(np.abs(-lap + u - u ** (self.p - 1))) / np.max(u))

    def nehari_defect(self) -> float:
        return (self.grad_sq + self.mass_sq - self.pnorm_pow) / self.pnorm_pow

    def pohozaev_defect(self) -> float:
        theta = (self.p - 2) * self.dim / (2 * self.p)
        return (self.grad_sq - theta * self.pnorm_pow) / self.grad_sq


def _rhs(dim: int, p: float, sign: float = 1.0):
    omega = SURFACE_MEASURE[dim]

    def f(r, y):
        u, du = y[0], y[1]
        nl = abs(u) ** (p - 2) * u
        w = omega * r ** (dim - 1)
        return [du, u - nl - (dim - 1) / r * du, w * u * u, w * du * du, w * abs(u) ** p]

    return f


def _series_state(dim: int, p: float, height: float) -> list[float]:
    r0 = SERIES_RADIUS
    c = (height - height ** (p - 1)) / dim
    omega = SURFACE_MEASURE[dim]
    vol = omega * r0**dim / dim
    return [height + c * r0**2 / 2, c * r0, vol * height**2, 0.0, vol * height**p]


def _shoot_class(dim: int, p: float, height: float, r_max: float) -> int:
    """+1 if the trajectory crosses zero (too high), -1 otherwise."""
    if height <= 1.0:
        return -1

    def cross(r, y):
        return y[0]

    cross.terminal = True
    cross.direction = -1

    def turn(r, y):
        return y[1]

    turn.terminal = True
    turn.direction = 1
    sol = solve_ivp(
        _rhs(dim, p), (SERIES_RADIUS, r_max), _series_state(dim, p, height),
        method="DOP853", rtol=ODE_RTOL, atol=1e-14, events=(cross, turn),
    )
    if sol.t_events[0].size:
        return 1
    return -1


def _bisect_height(dim: int, p: float) -> float:
    lo, hi = 1.0, 4.0 * (p / 2.0) ** (1.0 / (p - 2.0))
    r_max = 60.0
    expansions = 0
    while _shoot_class(dim, p, hi, r_max) < 0:
        lo, hi = hi, 2.0 * hi
        expansions += 1
        if expansions > 40:
            raise SolverError("no overshooting height found", {"dim": dim, "p": p, "hi": hi})
    for it in range(MAX_BISECTIONS):
        if hi - lo < BISECTION_RTOL * hi:
            return 0.5 * (lo + hi)
        mid = 0.5 * (lo + hi)
        if _shoot_class(dim, p, mid, r_max) > 0:
            hi = mid
        else:
            lo = mid
    raise SolverError("shooting bisection did not converge", {"dim": dim, "p": p, "bracket": (lo, hi)})


def _outward(dim, p, height, r_match):
    return solve_ivp(
        _rhs(dim, p), (SERIES_RADIUS, r_match), _series_state(dim, p, height),
        method="DOP853", rtol=ODE_RTOL, atol=1e-16, dense_output=True,
    )


def _inward(dim, p, log_amp, r_match, r_start):
    nu = dim / 2.0 - 1.0
    amp = math.exp(log_amp)
    slope = -kve(nu + 1.0, r_start) / kve(nu, r_start)
    y0 = [amp, amp * slope, 0.0, 0.0, 0.0]
    atol = [amp * 1e-6, amp * 1e-6, 1e-40, 1e-40, 1e-40]
    return solve_ivp(
        _rhs(dim, p), (r_start, r_match), y0,
        method="DOP853", rtol=ODE_RTOL, atol=atol, dense_output=True,
    )


def solve_Up(dim: int, p: float, grid: RadialGrid | None = None) -> ScalarGroundState:
    """Positive radial solution of -Delta U + U = U^{p-1} in R^dim.

    Parameters
    ----------
    dim, p
        Space dimension and exponent, 2 < p < 2*.
    grid
        Grid on which the returned ``field`` is sampled.  Defaults to
        radius 20 with 4001 nodes.
    """
    if dim not in SURFACE_MEASURE:
        raise ParameterError(f"dim must be 1..4, got {dim!r}")
    if not (2.0 < p < sobolev_exponent(dim)):
        raise ParameterError(f"p={p} outside (2, 2*) for N={dim}")
    if grid is None:
        grid = make_grid(dim, 20.0, 4001)
    elif grid.dim != dim:
        raise ParameterError(f"grid dimension {grid.dim} differs from dim={dim}")

    height = _bisect_height(dim, p)

    # Match where the shooting trajectory has fallen to 5% of its peak; the tail
    # amplitude is read off further out, where the equation is linear.
    probe = _outward(dim, p, height, 12.0)
    rs = np.linspace(SERIES_RADIUS, 12.0, 2401)
    us = probe.sol(rs)[0]
    below = np.nonzero(us < 0.05 * height)[0]
    r_match = float(np.clip(rs[below[0]] if below.size else 3.0, 0.5, 5.0))
    r_start = TAIL_START
    r_guess = r_match + 2.0

    nu = dim / 2.0 - 1.0
    u_g = float(probe.sol(r_guess)[0])
    lin = (r_start / r_guess) ** nu * kve(nu, r_guess) / kve(nu, r_start) * math.exp(-(r_guess - r_start))
    guess = np.array([height, math.log(u_g / lin)])

    def mismatch(x):
        out = _outward(dim, p, x[0], r_match)
        inn = _inward(dim, p, x[1], r_match, r_start)
        yo, yi = out.y[:, -1], inn.y[:, -1]
        return [(yo[0] - yi[0]) / x[0], (yo[1] - yi[1]) / x[0]]

    sol = root(mismatch, guess, method="hybr", options={"xtol": 1e-14})
    res = np.max(np.abs(mismatch(sol.x)))
    if not res < 1e-9:
        raise SolverError(
            "tail matching failed",
            {"dim": dim, "p": p, "residual": res, "height": sol.x[0], "message": sol.message},
        )
    height, log_amp = float(sol.x[0]), float(sol.x[1])
    inner = _outward(dim, p, height, r_match)
    outer = _inward(dim, p, log_amp, r_match, r_start)
    yi, yo = inner.y[:, -1], outer.y[:, -1]
    tail_value = math.exp(log_amp)
    omega = SURFACE_MEASURE[dim]
    tail_mass = omega * r_start ** (dim - 1) * tail_value**2 / 2.0
    mass_sq = yi[2] - yo[2] + tail_mass
    grad_sq = yi[3] - yo[3] + tail_mass
    pnorm_pow = yi[4] - yo[4]

    profile = _Profile(dim, p, height, inner.sol, r_match, outer.sol, r_start, tail_value)
    values = profile(grid.nodes)
    if np.any(values <= 0) or np.any(np.diff(values) > 0):
        raise SolverError("profile is not positive and decreasing", {"dim": dim, "p": p})
    log.debug("U_p dim=%d p=%g height=%.15g", dim, p, height)
    return ScalarGroundState(
        dim=dim, p=p, field=RadialField(grid, values), mass_sq=float(mass_sq),
        grad_sq=float(grad_sq), pnorm_pow=float(pnorm_pow), shoot_height=height, profile=profile,
    )


@lru_cache(maxsize=64)
def ground_state(dim: int, p: float) -> ScalarGroundState:
    """Cached :func:`solve_Up` on the default grid."""
    return solve_Up(dim, p)


def soliton_1d(p: float, x):
    """Closed-form one-dimensional ground state ((p/2) sech^2((p-2)x/2))^{1/(p-2)}."""
    if not p > 2:
        raise ParameterError(f"p must exceed 2, got {p!r}")
    return (0.5 * p / np.cosh(0.5 * (p - 2.0) * np.asarray(x, dtype=float)) ** 2) ** (1.0 / (p - 2.0))


# --------------------------------------------------------------------------
# closed forms


def _mass_sq_or_default(sp: ScalarParams, Up_mass_sq: float | None) -> float:
    return ground_state(sp.dim, sp.p).mass_sq if Up_mass_sq is None else Up_mass_sq


def lambda_scalar(sp: ScalarParams, Up_mass_sq: float | None = None) -> float:
    """Frequency of the mass-``a`` rescaling of U_p."""
    m = _mass_sq_or_default(sp, Up_mass_sq)
    k = sp.kappa
    return sp.mu ** (-4.0 / k) * m ** (2.0 * (sp.p - 2.0) / k) * sp.mass ** (-2.0 * (sp.p - 2.0) / k)


def scale_to_mass(
    sp: ScalarParams, U: ScalarGroundState | None = None, grid: RadialGrid | None = None
) -> tuple[RadialField, float]:
    """Return (z, lambda) with z = (lambda/mu)^{1/(p-2)} U(sqrt(lambda) r) of mass ``sp.mass``.

    Without ``grid`` the result lives on U's grid shrunk by sqrt(lambda), so
    its node values are exact multiples of U's node values.
    """
    if U is None:
        U = ground_state(sp.dim, sp.p)
    if U.dim != sp.dim or U.p != sp.p:
        raise ParameterError("ground state does not match the scalar parameters")
    lam = lambda_scalar(sp, U.mass_sq)
    amp = (lam / sp.mu) ** (1.0 / (sp.p - 2.0))
    sq = math.sqrt(lam)
    if grid is None:
        grid = U.field.grid.scaled(1.0 / sq)
        vals = amp * U.field.values
    else:
        vals = amp * U.evaluate(sq * grid.nodes)
    return RadialField(grid, vals), lam


def scalar_energy_direct(u: RadialField, p: float, mu: float) -> float:
    """I[u] = 1/2 ||grad u||^2 - mu/p ||u||_p^p."""
    return 0.5 * grad_norm_sq(u) - mu / p * lp_norm_pow(u, p)


def scalar_energy_m(sp: ScalarParams, Up_mass_sq: float | None = None) -> float:
    """Energy level of the mass-``a`` scalar ground state, in closed form."""
    m = _mass_sq_or_default(sp, Up_mass_sq)
    k, e = sp.kappa, sp.mass_exponent
    return (
        0.5 * k / e
        * m ** (2.0 * (sp.p - 2.0) / k)
        * sp.mu ** (-4.0 / k)
        * sp.mass ** (-e / k)
    )


def scalar_fiber_t(u: RadialField, p: float, mu: float) -> float:
    """Critical dilation of s -> I[s*u]."""
    n = u.grid.dim
    check_exponent(n, p)
    g = grad_norm_sq(u)
    b = lp_norm_pow(u, p)
    if g <= 0 or b <= 0:
        raise ParameterError("fiber map needs a nonzero field")
    theta = (p - 2.0) * n / (2.0 * p)
    return (g / (theta * mu * b)) ** (2.0 / ((p - 2.0) * n - 4.0))


def scalar_fiber_value(u: RadialField, p: float, mu: float) -> float:
    """I[t*u] at the critical dilation, written through the norms of u."""
    n = u.grid.dim
    check_exponent(n, p)
    g = grad_norm_sq(u)
    b = lp_norm_pow(u, p)
    k = (p - 2.0) * n - 4.0
    c = (p - 2.0) * n / (2.0 * p)
    return k / (4.0 * p) * (g / c) ** ((p - 2.0) * n / k) * (mu * b) ** (-4.0 / k)


def mass_threshold_b(N: int, p: float, q: float, mu1: float, mu2: float, a: float) -> float:
    """Mass b at which the two semitrivial levels coincide: m_q(b) = m_p(a)."""
    check_exponent(N, p, supercritical=True, name="p")
    check_exponent(N, q, supercritical=True, name="q")
    for name, val in (("mu1", mu1), ("mu2", mu2), ("a", a)):
        if not (math.isfinite(val) and val > 0):
            raise ParameterError(f"{name} must be positive, got {val!r}")
    m_a = scalar_energy_m(ScalarParams(N, p, mu1, a))
    sq = ScalarParams(N, q, mu2, 1.0)
    # m_q(b) = m_q(1) * b^{-e/k}
    return (m_a / scalar_energy_m(sq)) ** (-sq.kappa / sq.mass_exponent)


def gn_quotient(u: RadialField, p: float) -> float:
    """||u||_p / (||grad u||_2^theta ||u||_2^{1-theta}), theta = N(p-2)/(2p)."""
    n = u.grid.dim
    theta = n * (p - 2.0) / (2.0 * p)
    lp = lp_norm_pow(u, p) ** (1.0 / p)
    return lp / (math.sqrt(grad_norm_sq(u)) ** theta * math.sqrt(lp_norm_pow(u, 2.0)) ** (1.0 - theta))


def gn_constant(N: int, p: float, U: ScalarGroundState | None = None) -> float:
    """Sharp Gagliardo-Nirenberg constant, the quotient attained at U_p."""
    check_exponent(N, p)
    if U is None:
        U = ground_state(N, p)
    theta = N * (p - 2.0) / (2.0 * p)
    return U.pnorm_pow ** (1.0 / p) / (U.grad_sq ** (theta / 2.0) * U.mass_sq ** ((1.0 - theta) / 2.0))
