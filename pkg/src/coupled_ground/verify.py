"""Bundled self-checks, grouped into suites.

``fast`` covers the scalar problem, the closed forms, the fiber laws and
the rearrangement; ``full`` adds the threshold eigenproblems, coupled
solves and the coupling-gain expansion.  Every suite returns a
:class:`SuiteResult` whose ``detail`` states the worst margin observed.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .beta import BetaProblem, beta_bounds, beta_star, rayleigh_minimizer, sobolev_constant
from .functionals import (
    Fiber,
    Pair,
    SystemParams,
    dilate_exact,
    energy_J,
    energy_on_manifold,
)
from .radial import RadialField, grad_norm_sq, lp_norm_pow, make_grid
from .rearrange import projected_energy, schwartz_rearrange
from .scalar import (
    ScalarParams,
    ground_state,
    lambda_scalar,
    mass_threshold_b,
    scalar_energy_direct,
    scalar_energy_m,
    scale_to_mass,
    soliton_1d,
    solve_Up,
)
from .solver import SolveConfig, coupling_gain_expansion, mass_saturation_check, minimize_ground, scalar_seed


@dataclass(frozen=True)
class SuiteResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] {self.name}: {self.detail} ({self.seconds:.1f} s)"


# --------------------------------------------------------------------------
# random test objects shared with the test-suite


def random_pair(rng: np.random.Generator, dim: int, radius: float = 12.0, points: int = 801) -> Pair:
    """Two positive sums of Gaussian bumps with random centres and widths."""
    grid = make_grid(dim, radius, points)
    r = grid.nodes

    def bumps():
        out = np.zeros_like(r)
        for _ in range(int(rng.integers(1, 4))):
            c = rng.uniform(0.0, radius / 3)
            w = rng.uniform(0.7, 2.0)
            out += rng.uniform(0.3, 2.0) * np.exp(-((r - c) / w) ** 2)
        return RadialField(grid, out)

    return Pair(bumps(), bumps())


def random_field(rng: np.random.Generator, dim: int, radius: float = 10.0, points: int = 601) -> RadialField:
    """Sign-changing sum of bumps, negligible near r = radius."""
    grid = make_grid(dim, radius, points)
    r = grid.nodes
    out = np.zeros_like(r)
    for _ in range(int(rng.integers(1, 5))):
        c = rng.uniform(0.0, 0.4 * radius)
        w = rng.uniform(0.5, 1.5)
        out += rng.uniform(-1.0, 2.0) * np.exp(-((r - c) / w) ** 2)
    return RadialField(grid, out)


# quadrature error of the direct energy is O(h^2); 40001 nodes bring it near 1e-6
DIRECT_POINTS = 40001

SAMPLE_SYSTEMS = (
    SystemParams(1, 8.0, 7.0, 3.0, 4.0, 1.0, 1.5, 0.5, 1.0, 2.0),
    SystemParams(2, 5.0, 4.5, 2.5, 2.5, 1.0, 1.0, 1.0, 1.0, 1.0),
    SystemParams(3, 4.0, 4.5, 1.75, 1.75, 1.0, 2.0, 2.0, 0.5, 1.5),
    SystemParams(4, 3.5, 3.2, 1.6, 1.6, 1.0, 1.0, 1.0, 1.0, 1.0),
)


# --------------------------------------------------------------------------
# fast suites


def suite_scalar_oracle() -> tuple[bool, str]:
    U = solve_Up(1, 4.0, make_grid(1, 20.0, 4001))
    x = np.linspace(0.0, 15.0, 3001)
    exact = soliton_1d(4.0, x)
    err = float(np.max(np.abs(U.evaluate(x) - exact) / exact))
    dm, dg = abs(U.mass_sq - 4.0), abs(U.grad_sq - 4.0 / 3.0)
    ok = err <= 1e-6 and dm <= 1e-4 and dg <= 1e-4
    return ok, f"max rel err {err:.2e}, mass err {dm:.1e}, grad err {dg:.1e}"


def suite_scalar_identities() -> tuple[bool, str]:
    worst = 0.0
    for dim, p in ((1, 8.0), (2, 5.0), (3, 4.0), (4, 3.5)):
        U = ground_state(dim, p)
        worst = max(worst, abs(U.nehari_defect()), abs(U.pohozaev_defect()))
    return worst <= 1e-5, f"worst relative defect {worst:.2e}"


def suite_closed_forms() -> tuple[bool, str]:
    worst = 0.0
    for a in (1.0, 2.0):
        sp = ScalarParams(1, 4.0, 1.0, a)
        worst = max(worst, abs(lambda_scalar(sp) / (a * a / 16) - 1),
                    abs(scalar_energy_m(sp) / (-(a**3) / 96) - 1))
    for dim, p, mu, a in ((1, 7.0, 2.0, 0.7), (2, 4.5, 1.0, 3.0), (3, 4.0, 1.5, 2.0), (4, 3.4, 0.8, 1.2)):
        sp = ScalarParams(dim, p, mu, a)
        grid = make_grid(dim, 20.0 / math.sqrt(lambda_scalar(sp)), DIRECT_POINTS)
        z, _ = scale_to_mass(sp, grid=grid)
        worst = max(worst, abs(scalar_energy_direct(z, p, mu) / scalar_energy_m(sp) - 1))
    return worst <= 1e-5, f"worst relative deviation {worst:.2e}"


def suite_threshold_b() -> tuple[bool, str]:
    same = abs(mass_threshold_b(3, 4.0, 4.0, 1.0, 1.0, 1.7) / 1.7 - 1)
    ok = same <= 1e-12
    mp = scalar_energy_m(ScalarParams(3, 4.0, 1.0, 1.0))
    bs = mass_threshold_b(3, 4.0, 4.5, 1.0, 1.0, 1.0)
    for b, below in ((bs / 2, False), (2 * bs, True)):
        ok &= (scalar_energy_m(ScalarParams(3, 4.5, 1.0, b)) < mp) == below
    return bool(ok), f"b* = a to {same:.1e}; branch switch at b* = {bs:.6g}"


def suite_fiber_laws(count: int = 50, seed: int = 7) -> tuple[bool, str]:
    """Projection, sign law and reduced energy on random pairs.

    The reduced energy is checked against a direct evaluation of J on the
    exactly dilated pair, which does not use the fiber exponents.
    """
    rng = np.random.default_rng(seed)
    worst_formula, failures = 0.0, 0
    for i in range(count):
        params = SAMPLE_SYSTEMS[i % len(SAMPLE_SYSTEMS)]
        pair = random_pair(rng, params.dim)
        fib = Fiber.of(params, pair)
        t = fib.maximizer()
        samples = np.geomspace(t / 50, t * 50, 201)
        if fib.sign_changes(samples) != 1:
            failures += 1
        P = fib.d1(1.0)
        if P != 0 and (t > 1) != (P > 0):
            failures += 1
        on = dilate_exact(pair, t)
        direct = energy_J(params, on)
        worst_formula = max(worst_formula, abs(energy_on_manifold(params, on) / direct - 1))
        if not fib.d2(t) < 0:
            failures += 1
    ok = failures == 0 and worst_formula <= 1e-6
    return ok, f"{failures} law violations, reduced-formula deviation {worst_formula:.2e}"


def suite_rearrangement(count: int = 20, seed: int = 11) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    worst_norm, failures = 0.0, 0
    params = SystemParams(3, 4.0, 4.5, 1.75, 1.75)
    for _ in range(count):
        u = random_field(rng, 3)
        s = schwartz_rearrange(u)
        h2 = u.grid.spacing ** 2
        worst_norm = max(worst_norm, abs(lp_norm_pow(s, 2) / lp_norm_pow(u, 2) - 1) / h2)
        if grad_norm_sq(s) > grad_norm_sq(u) * (1 + 10 * h2):
            failures += 1
    for _ in range(count // 2):
        pair = random_pair(rng, 3)
        dip = 0.3 * pair.u.values[0] * np.exp(-((pair.grid.nodes / 2.0) ** 2))
        pair = Pair(pair.u.with_values(pair.u.values - dip), pair.v)
        t_old = Fiber.of(params, pair).maximizer()
        _, e_new = projected_energy(params, pair)
        e_old = Fiber.of(params, pair).value(t_old)
        if e_new > e_old * (1 + 1e-3):
            failures += 1
    ok = failures == 0 and worst_norm <= 10.0
    return ok, f"{failures} inequality violations, mass drift {worst_norm:.2f} h^2"


# --------------------------------------------------------------------------
# full suites


def suite_beta() -> tuple[bool, str]:
    S3 = sobolev_constant(3)
    parts, ok = [], True
    for r in (1.5, 2.0):
        bp = BetaProblem(3, 4.0, 1.0, 1.0, r)
        val = beta_star(bp)
        lo, hi = beta_bounds(bp, S3)
        ratio = beta_star(BetaProblem(3, 4.0, 1.0, 4.0, r)) / val
        law = 4.0 ** bp.mass_exponent()
        ok &= lo <= val <= hi and abs(ratio / law - 1) <= 1e-6
        parts.append(f"r={r:g}: {lo:.4g} <= {val:.6g} <= {hi:.4g}, law dev {abs(ratio / law - 1):.1e}")
    return bool(ok), "; ".join(parts)


def suite_coupled() -> tuple[bool, str]:
    params = SystemParams(3, 4.0, 4.0, 1.75, 1.75, 1.0, 1.0, 1.0, 1.0, 1.0)
    res = minimize_ground(SolveConfig(params))
    sat = mass_saturation_check(res)
    ok = (res.converged and res.lambda1 > 0 and res.lambda2 > 0 and res.strict_margin > 0 and sat.passed)
    return bool(ok), (
        f"C={res.energy:.6g}, margin {res.strict_margin:.3g}, residual {res.residual:.1e}, "
        f"lambda=({res.lambda1:.4g}, {res.lambda2:.4g}), fiber t-1={res.fiber_t - 1:.2e}"
    )


def suite_expansion() -> tuple[bool, str]:
    grid = make_grid(3, 2.0, 4001)
    sub = SystemParams(3, 4.0, 4.0, 2.0, 1.5)
    h = RadialField.from_function(grid, lambda r: np.exp(-((r / 0.3) ** 2)))
    h = h.with_values(h.values / math.sqrt(lp_norm_pow(h, 2)))
    tab = coupling_gain_expansion(sub, h, np.geomspace(1e-7, 1e-5, 5))
    ok = abs(tab.slope - 1.5) <= 0.05
    z = scalar_seed(ScalarParams(3, 4.0, 1.0, 1.0), grid)
    eig = rayleigh_minimizer(z.with_values(z.values**1.5))
    thr = 0.5 * eig.value
    signs = []
    for f in (0.1, 10.0):
        quad = SystemParams(3, 4.0, 4.0, 1.5, 2.0, beta=f * thr)
        signs.append(coupling_gain_expansion(quad, eig.vector, np.geomspace(1e-4, 1e-2, 5)).coefficient)
    ok &= signs[0] > 0 > signs[1]
    return bool(ok), f"slope {tab.slope:.4f}; quadratic coefficients {signs[0]:.4g} / {signs[1]:.4g}"


FAST: dict[str, Callable[[], tuple[bool, str]]] = {
    "scalar oracle": suite_scalar_oracle,
    "scalar identities": suite_scalar_identities,
    "closed forms": suite_closed_forms,
    "mass threshold": suite_threshold_b,
    "fiber laws and reduced energy": suite_fiber_laws,
    "rearrangement": suite_rearrangement,
}
FULL: dict[str, Callable[[], tuple[bool, str]]] = {
    **FAST,
    "coupling thresholds": suite_beta,
    "coupled ground state": suite_coupled,
    "coupling-gain expansion": suite_expansion,
}


def run_suites(level: str) -> list[SuiteResult]:
    if level not in ("fast", "full"):
        raise ValueError(f"unknown level {level!r}")
    out = []
    for name, fn in (FAST if level == "fast" else FULL).items():
        start = time.perf_counter()
        try:
            ok, detail = fn()
        except Exception as exc:  # a crash is a failed suite, reported like one
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        out.append(SuiteResult(name, ok, detail, time.perf_counter() - start))
    return out
