"""Coupled energy, Pohozaev functional and the mass-preserving fiber.

For a pair (u, v) all fiber quantities reduce to seven numbers (gradient
energy, the three potential integrals and the masses), because the
dilation t*u = t^{N/2} u(t .) scales each of them by a fixed power of t.
The fiber function is

    Psi(t) = A t^2 / 2 - sum_k c_k B_k t^{alpha_k},

with alpha_k = (s_k - 2) N / 2 for the exponents s_k in (p, q, r1 + r2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, SolverError
from .radial import (
    RadialField,
    dilate_field,
    grad_norm_sq,
    lp_norm_pow,
    mixed_integral,
    require_same_grid,
    apply_laplacian,
)
from .scalar import check_exponent, mass_critical_exponent, sobolev_exponent

ZERO_PAIR_TOL = 1e-14


@dataclass(frozen=True)
class SystemParams:
    dim: int
    p: float
    q: float
    r1: float
    r2: float
    mu1: float = 1.0
    mu2: float = 1.0
    beta: float = 1.0
    a: float = 1.0
    b: float = 1.0

    def __post_init__(self) -> None:
        check_exponent(self.dim, self.p, supercritical=True, name="p")
        check_exponent(self.dim, self.q, supercritical=True, name="q")
        r = self.r1 + self.r2
        if not (mass_critical_exponent(self.dim) < r < sobolev_exponent(self.dim)):
            raise ParameterError(f"r1+r2={r} outside (2+4/N, 2*) for N={self.dim}")
        if not (self.r1 > 1 and self.r2 > 1):
            raise ParameterError(f"r1 and r2 must exceed 1, got {self.r1}, {self.r2}")
        for name in ("mu1", "mu2", "a", "b"):
            val = getattr(self, name)
            if not (math.isfinite(val) and val > 0):
                raise ParameterError(f"{name} must be positive, got {val!r}")
        if not (math.isfinite(self.beta) and self.beta >= 0):
            raise ParameterError(f"beta must be nonnegative, got {self.beta!r}")

    @property
    def r(self) -> float:
        return self.r1 + self.r2

    def exponents(self) -> tuple[float, float, float]:
        """Fiber powers alpha_k = (s_k - 2) N / 2 for s_k = p, q, r1 + r2."""
        n = self.dim
        return ((self.p - 2) * n / 2, (self.q - 2) * n / 2, (self.r - 2) * n / 2)

    def swapped(self) -> "SystemParams":
        return SystemParams(self.dim, self.q, self.p, self.r2, self.r1, self.mu2, self.mu1, self.beta, self.b, self.a)


@dataclass(frozen=True)
class Pair:
    u: RadialField
    v: RadialField

    def __post_init__(self) -> None:
        require_same_grid(self.u, self.v)

    @property
    def grid(self):
        return self.u.grid

    def swapped(self) -> "Pair":
        return Pair(self.v, self.u)


@dataclass(frozen=True)
class PairIntegrals:
    """Base integrals from which J, P and the fiber follow in closed form."""

    grad_u: float
    grad_v: float
    pot_u: float  # ||u||_p^p
    pot_v: float  # ||v||_q^q
    coupling: float  # int |u|^r1 |v|^r2
    mass_u: float
    mass_v: float

    @property
    def grad(self) -> float:
        return self.grad_u + self.grad_v


def pair_integrals(params: SystemParams, pair: Pair) -> PairIntegrals:
    if pair.grid.dim != params.dim:
        raise ParameterError(f"pair lives in dimension {pair.grid.dim}, parameters in {params.dim}")
    u, v = pair.u, pair.v
    return PairIntegrals(
        grad_u=grad_norm_sq(u),
        grad_v=grad_norm_sq(v),
        pot_u=lp_norm_pow(u, params.p),
        pot_v=lp_norm_pow(v, params.q),
        coupling=mixed_integral(u, v, params.r1, params.r2),
        mass_u=lp_norm_pow(u, 2.0),
        mass_v=lp_norm_pow(v, 2.0),
    )


def _potential_terms(params: SystemParams, ints: PairIntegrals) -> list[tuple[float, float]]:
    """(coefficient c_k B_k, alpha_k) for the three potential terms of Psi."""
    ap, aq, ar = params.exponents()
    return [
        (params.mu1 / params.p * ints.pot_u, ap),
        (params.mu2 / params.q * ints.pot_v, aq),
        (params.beta * ints.coupling, ar),
    ]


def energy_from_integrals(params: SystemParams, ints: PairIntegrals) -> float:
    return 0.5 * ints.grad - sum(c for c, _ in _potential_terms(params, ints))


def pohozaev_from_integrals(params: SystemParams, ints: PairIntegrals) -> float:
    return ints.grad - sum(alpha * c for c, alpha in _potential_terms(params, ints))


def energy_J(params: SystemParams, pair: Pair) -> float:
    """J[u, v] = 1/2 (|grad u|^2 + |grad v|^2) - mu1/p |u|_p^p - mu2/q |v|_q^q - beta int |u|^r1 |v|^r2."""
    return energy_from_integrals(params, pair_integrals(params, pair))


def pohozaev_P(params: SystemParams, pair: Pair) -> float:
    """Derivative of the energy along the fiber at t = 1."""
    return pohozaev_from_integrals(params, pair_integrals(params, pair))


def energy_on_manifold(params: SystemParams, pair: Pair) -> float:
    """Energy of a pair on the Pohozaev set, written without the gradient term."""
    ints = pair_integrals(params, pair)
    n = params.dim
    p, q, r = params.p, params.q, params.r
    return (
        ((p - 2) * n - 4) / (4 * p) * params.mu1 * ints.pot_u
        + ((q - 2) * n - 4) / (4 * q) * params.mu2 * ints.pot_v
        + ((r - 2) * n - 4) / 4 * params.beta * ints.coupling
    )


def dilate(pair: Pair, t: float) -> Pair:
    """Apply t*(u, v) = t^{N/2} (u(t .), v(t .)) by interpolation on the same grid."""
    return Pair(dilate_field(pair.u, t), dilate_field(pair.v, t))


def dilate_exact(pair: Pair, t: float) -> Pair:
    """Apply the dilation exactly by shrinking the grid radius by ``t``."""
    if not (math.isfinite(t) and t > 0):
        raise ParameterError(f"dilation factor must be positive, got {t!r}")
    g = pair.grid.scaled(1.0 / t)
    s = t ** (g.dim / 2.0)
    return Pair(RadialField(g, s * pair.u.values), RadialField(g, s * pair.v.values))


class Fiber:
    """Psi(t) = J[t*(u, v)] evaluated through exact power laws."""

    def __init__(self, params: SystemParams, ints: PairIntegrals):
        self.params = params
        self.ints = ints
        self.grad = ints.grad
        self.terms = [(c, al) for c, al in _potential_terms(params, ints)]

    @classmethod
    def of(cls, params: SystemParams, pair: Pair) -> "Fiber":
        return cls(params, pair_integrals(params, pair))

    def value(self, t: float) -> float:
        return 0.5 * self.grad * t * t - sum(c * t**al for c, al in self.terms)

    def d1(self, t: float) -> float:
        return self.grad * t - sum(c * al * t ** (al - 1) for c, al in self.terms)

    def d2(self, t: float) -> float:
        return self.grad - sum(c * al * (al - 1) * t ** (al - 2) for c, al in self.terms)

    def slope_ratio(self, t: float) -> float:
        """Psi'(t)/t, strictly decreasing on (0, inf) when some c_k > 0."""
        return self.grad - sum(c * al * t ** (al - 2) for c, al in self.terms)

    def maximizer(self) -> float:
        """Unique zero of Psi'(t)/t, by geometric bracketing and bisection."""
        if self.grad < ZERO_PAIR_TOL:
            raise ParameterError("projection onto the Pohozaev set needs a nonzero pair")
        if not any(c > 0 for c, _ in self.terms):
            raise SolverError("fiber has no potential term; Psi increases without bound",
                              {"grad": self.grad})
        g = self.slope_ratio
        lo = hi = 1.0
        for _ in range(2100):
            if g(hi) < 0:
                break
            lo, hi = hi, 2.0 * hi
        else:
            raise SolverError("could not bracket the fiber maximum from above", {"hi": hi})
        if g(lo) <= 0:
            for _ in range(2100):
                if g(lo) > 0:
                    break
                hi, lo = lo, 0.5 * lo
            else:
                raise SolverError("could not bracket the fiber maximum from below", {"lo": lo})
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if g(mid) > 0:
                lo = mid
            else:
                hi = mid
            if hi - lo <= 4e-16 * hi:
                break
        return 0.5 * (lo + hi)

    def sign_changes(self, samples: np.ndarray) -> int:
        vals = np.array([self.slope_ratio(t) for t in samples])
        s = np.sign(vals)
        s = s[s != 0]
        return int(np.count_nonzero(np.diff(s)))


def psi_derivatives(params: SystemParams, pair: Pair, t: float) -> tuple[float, float, float]:
    """(Psi(t), Psi'(t), Psi''(t)) along the fiber through ``pair``."""
    if not t > 0:
        raise ParameterError(f"t must be positive, got {t!r}")
    f = Fiber.of(params, pair)
    return f.value(t), f.d1(t), f.d2(t)


def project_fiber(params: SystemParams, pair: Pair) -> float:
    """The unique t > 0 with t*(u, v) on the Pohozaev set."""
    return Fiber.of(params, pair).maximizer()


def coercivity_constants(params: SystemParams) -> tuple[float, float]:
    """(tau, C0) with J >= C0 (|grad u|^2 + |grad v|^2) on the Pohozaev set."""
    n = params.dim
    tau = max(2.0 / ((s - 2) * n) for s in (params.p, params.q, params.r))
    return tau, 0.5 - tau


def grad_lower_bound(params: SystemParams, CNp: float, CNq: float, CNr: float) -> float:
    """Gradient-energy floor on the Pohozaev set of masses (a, b), from GN constants."""
    n = params.dim
    m = params.a + params.b

    def term(s: float, coef: float, c: float) -> float:
        if coef == 0:
            return math.inf
        k = n * (s - 2) - 4
        e = 2 * n - (n - 2) * s
        return (3 * (s - 2) * n / 2 * coef * c**s) ** (-4.0 / k) * m ** (-e / k)

    return min(
        term(params.p, params.mu1 / params.p, CNp),
        term(params.q, params.mu2 / params.q, CNq),
        term(params.r, params.beta, CNr),
    )


def multipliers(params: SystemParams, pair: Pair) -> tuple[float, float]:
    """Lagrange multipliers obtained by testing each equation against its own component."""
    ints = pair_integrals(params, pair)
    if ints.mass_u <= 0 or ints.mass_v <= 0:
        raise ParameterError("multipliers need both components to have positive mass")
    br = params.beta * ints.coupling
    l1 = (params.mu1 * ints.pot_u + params.r1 * br - ints.grad_u) / ints.mass_u
    l2 = (params.mu2 * ints.pot_v + params.r2 * br - ints.grad_v) / ints.mass_v
    return l1, l2


def _signed_pow(x: np.ndarray, s: float) -> np.ndarray:
    """|x|^{s-1} sign(x)."""
    return np.abs(x) ** (s - 1) * np.sign(x)


def nonlinear_terms(params: SystemParams, u: np.ndarray, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Right-hand sides f_u, f_v of the stationary system."""
    b = params.beta
    au, av = np.abs(u), np.abs(v)
    fu = params.mu1 * _signed_pow(u, params.p) + b * params.r1 * _signed_pow(u, params.r1) * av**params.r2
    fv = params.mu2 * _signed_pow(v, params.q) + b * params.r2 * au**params.r1 * _signed_pow(v, params.r2)
    return fu, fv


def pde_residual(params: SystemParams, pair: Pair, l1: float, l2: float) -> float:
    """Max over both equations of |-Delta w + lambda w - f| relative to max |f|."""
    fu, fv = nonlinear_terms(params, pair.u.values, pair.v.values)
    worst = 0.0
    for w, lam, f in ((pair.u, l1, fu), (pair.v, l2, fv)):
        res = -apply_laplacian(w).values + lam * w.values - f
        scale = np.max(np.abs(f))
        if scale > 0:
            worst = max(worst, float(np.max(np.abs(res)) / scale))
        elif np.any(res):
            worst = max(worst, math.inf)
    return worst


@dataclass(frozen=True)
class FunctionalReport:
    J: float
    P: float
    psi2: float
    masses: tuple[float, float]
    grads: tuple[float, float]


def functional_report(params: SystemParams, pair: Pair) -> FunctionalReport:
    ints = pair_integrals(params, pair)
    f = Fiber(params, ints)
    return FunctionalReport(
        J=energy_from_integrals(params, ints),
        P=pohozaev_from_integrals(params, ints),
        psi2=f.d2(1.0),
        masses=(ints.mass_u, ints.mass_v),
        grads=(ints.grad_u, ints.grad_v),
    )
