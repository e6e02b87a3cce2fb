import math
from dataclasses import replace

import numpy as np
import pytest

from coupled_ground.beta import rayleigh_minimizer
from coupled_ground.errors import ExpansionRegimeError, ParameterError
from coupled_ground.functionals import SystemParams, energy_J, multipliers, pde_residual, pohozaev_P
from coupled_ground.radial import RadialField, lp_norm_pow, make_grid
from coupled_ground.scalar import ScalarParams, scalar_energy_m
from coupled_ground.solver import (
    SolveConfig,
    coupling_gain_expansion,
    mass_saturation_check,
    minimize_ground,
    scalar_level_on_grid,
    scalar_seed,
    verify_strict_inequality,
)

SYMMETRIC = SystemParams(3, 4.0, 4.0, 1.75, 1.75)
ONE_D = SystemParams(1, 8.0, 7.0, 3.0, 4.0, 1.0, 1.5, 0.5, 1.0, 2.0)


@pytest.fixture(scope="module")
def ground():
    return minimize_ground(SolveConfig(SYMMETRIC))


@pytest.fixture(scope="module")
def one_d_pair():
    a = minimize_ground(SolveConfig(ONE_D, radius=10.0, points=1001))
    b = minimize_ground(SolveConfig(ONE_D.swapped(), radius=10.0, points=1001))
    return a, b


class TestConfig:
    @pytest.mark.parametrize(
        "kw",
        [dict(tol_residual=0.0), dict(max_iters=0), dict(step=-1.0), dict(init="random"), dict(init="custom")],
    )
    def test_rejects(self, kw):
        with pytest.raises(ParameterError):
            SolveConfig(SYMMETRIC, **kw)

    def test_grid(self):
        g = SolveConfig(SYMMETRIC, radius=7.0, points=301).grid
        assert (g.dim, g.radius, g.points) == (3, 7.0, 301)


class TestGroundState:
    def test_converged_critical_point(self, ground):
        assert ground.converged and not ground.semitrivial
        assert ground.residual <= 1e-8
        assert ground.lambda1 > 0 and ground.lambda2 > 0
        assert ground.masses == pytest.approx((1.0, 1.0), abs=1e-6)
        assert np.all(ground.pair.u.values >= 0) and np.all(ground.pair.v.values >= 0)

    def test_reported_numbers_are_consistent(self, ground):
        pair = ground.pair
        assert energy_J(SYMMETRIC, pair) == pytest.approx(ground.energy, rel=1e-14)
        assert pohozaev_P(SYMMETRIC, pair) == pytest.approx(ground.pohozaev, rel=1e-12, abs=1e-12)
        l1, l2 = multipliers(SYMMETRIC, pair)
        assert (l1, l2) == pytest.approx((ground.lambda1, ground.lambda2), rel=1e-6)
        assert pde_residual(SYMMETRIC, pair, ground.lambda1, ground.lambda2) <= 1e-8

    def test_below_semitrivial_levels(self, ground):
        grid = SolveConfig(SYMMETRIC).grid
        level = scalar_level_on_grid(4.0, 1.0, 1.0, grid)[2]
        assert ground.semitrivial_levels == pytest.approx((level, level), rel=1e-12)
        assert ground.strict_margin == pytest.approx(level - ground.energy, rel=1e-12)
        assert ground.strict_margin > 1e-2
        assert ground.strict_margin_closed_form > 0

    def test_discrete_fiber_defect_is_second_order(self, ground):
        # the discrete critical point sits on the continuous Pohozaev set up to O(h^2)
        fine = minimize_ground(SolveConfig(SYMMETRIC, points=3001))
        d1, d2 = ground.fiber_t - 1, fine.fiber_t - 1
        assert 0 < d2 < d1 < 0.05
        assert d1 / d2 == pytest.approx(4.0, rel=0.1)

    def test_saturation(self, ground):
        assert mass_saturation_check(ground).status == "saturated"

    def test_saturation_negative_control(self, ground):
        bad = replace(ground, masses=(0.9, 1.0))
        rep = mass_saturation_check(bad)
        assert rep.status == "failed" and not rep.passed
        assert "misses" in rep.lines[0]

    def test_saturation_skips_semitrivial(self, ground):
        assert mass_saturation_check(replace(ground, semitrivial=True)).status == "skipped"


def test_uncoupled_is_flagged_semitrivial():
    res = minimize_ground(SolveConfig(replace(SYMMETRIC, beta=0.0)))
    assert res.semitrivial and not res.converged
    level = scalar_level_on_grid(4.0, 1.0, 1.0, SolveConfig(SYMMETRIC).grid)[2]
    assert res.energy == pytest.approx(level, rel=1e-6)


def test_swap_symmetry(one_d_pair):
    a, b = one_d_pair
    assert a.converged and b.converged
    assert a.energy == pytest.approx(b.energy, rel=1e-10)
    assert (a.lambda1, a.lambda2) == pytest.approx((b.lambda2, b.lambda1), rel=1e-8)
    assert np.allclose(a.pair.u.values, b.pair.v.values, atol=1e-8 * np.max(a.pair.u.values))


def test_deterministic(one_d_pair):
    again = minimize_ground(SolveConfig(ONE_D, radius=10.0, points=1001))
    assert again.energy == one_d_pair[0].energy
    assert np.array_equal(again.pair.u.values, one_d_pair[0].pair.u.values)


class TestStrictReport:
    def test_symmetric_instance(self, ground):
        rep = verify_strict_inequality(SYMMETRIC, ground)
        assert rep.predicted == "strict" and rep.case == "i+ii"
        assert rep.observed_strict and rep.consistent
        assert rep.b_star == pytest.approx(1.0, rel=1e-12)
        assert rep.m_p == pytest.approx(scalar_energy_m(ScalarParams(3, 4.0, 1.0, 1.0)), rel=1e-14)

    def test_margin_below_tolerance_is_inconsistent(self, ground):
        rep = verify_strict_inequality(SYMMETRIC, replace(ground, strict_margin=0.0))
        assert rep.predicted == "strict" and not rep.consistent

    def test_quadratic_side_below_threshold(self, ground):
        # b above b* selects case (i), where r1 = 2 needs beta above the threshold
        params = SystemParams(3, 4.0, 4.0, 2.0, 1.5, beta=0.01, a=1.0, b=2.0)
        rep = verify_strict_inequality(params, replace(ground, params=params))
        assert rep.predicted == "outside theorem" and rep.case == "-"
        assert rep.consistent
        assert "threshold" in rep.detail

    def test_quadratic_side_above_threshold(self, ground):
        params = SystemParams(3, 4.0, 4.0, 2.0, 1.5, beta=50.0, a=1.0, b=2.0)
        rep = verify_strict_inequality(params, replace(ground, params=params))
        assert rep.predicted == "strict" and rep.case == "i"

    def test_low_dimension_threshold_is_zero(self, one_d_pair):
        params = SystemParams(1, 8.0, 8.0, 2.0, 5.0, beta=1e-6)
        rep = verify_strict_inequality(params, one_d_pair[0])
        assert rep.predicted == "strict"


@pytest.fixture(scope="module")
def grid():
    return make_grid(3, 2.0, 4001)


@pytest.fixture(scope="module")
def bump(grid):
    h = RadialField.from_function(grid, lambda r: np.exp(-((r / 0.3) ** 2)))
    return h.with_values(h.values / math.sqrt(lp_norm_pow(h, 2)))


class TestExpansion:
    def test_subquadratic_slope(self, bump):
        tab = coupling_gain_expansion(SystemParams(3, 4.0, 4.0, 2.0, 1.5), bump, np.geomspace(1e-7, 1e-5, 5))
        assert tab.slope == pytest.approx(1.5, abs=0.05)
        assert all(d < 0 for d in tab.deltas)
        assert tab.coefficient == pytest.approx(tab.coefficient_theory, rel=1e-3)

    def test_quadratic_sign_flip(self, grid):
        z = scalar_seed(ScalarParams(3, 4.0, 1.0, 1.0), grid)
        eig = rayleigh_minimizer(z.with_values(z.values**1.5))
        thr = 0.5 * eig.value
        coef = []
        for f in (0.1, 10.0):
            params = SystemParams(3, 4.0, 4.0, 1.5, 2.0, beta=f * thr)
            tab = coupling_gain_expansion(params, eig.vector, np.geomspace(1e-4, 1e-2, 5))
            assert tab.slope == pytest.approx(2.0, abs=0.05)
            assert tab.coefficient == pytest.approx(tab.coefficient_theory, rel=1e-3)
            coef.append(tab.coefficient)
        assert coef[0] > 0 > coef[1]

    def test_regime_check(self, bump):
        with pytest.raises(ExpansionRegimeError):
            coupling_gain_expansion(SystemParams(3, 4.0, 4.0, 2.0, 1.5), bump, np.geomspace(1e-3, 10.0, 6))

    def test_input_checks(self, bump):
        params = SystemParams(3, 4.0, 4.0, 2.0, 1.5)
        with pytest.raises(ParameterError):
            coupling_gain_expansion(params, bump.with_values(2 * bump.values), [1e-6, 1e-5, 1e-4])
        with pytest.raises(ParameterError):
            coupling_gain_expansion(params, bump, [1e-6, 1e-5])
        with pytest.raises(ParameterError):
            coupling_gain_expansion(params, bump, [-1e-6, 1e-5, 1e-4])
