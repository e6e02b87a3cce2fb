import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from coupled_ground.errors import GridMismatchError, ParameterError
from coupled_ground.radial import (
    RadialField,
    apply_laplacian,
    dilate_field,
    grad_norm_sq,
    integrate,
    lp_norm_pow,
    make_grid,
    mixed_integral,
)
from oracles import SOLITON_GRAD, SOLITON_L4, SOLITON_MASS, gaussian_laplacian


def sech_field(points=4001, radius=20.0):
    g = make_grid(1, radius, points)
    return RadialField.from_function(g, lambda x: math.sqrt(2) / np.cosh(x))


class TestGrid:
    def test_spacing(self):
        assert make_grid(1, 20.0, 2001).spacing == pytest.approx(0.01, rel=1e-14)

    def test_endpoint(self):
        g = make_grid(3, 15.0, 1501)
        assert g.nodes[0] == 0.0
        assert g.nodes[1500] == pytest.approx(15.0, rel=1e-15)

    @pytest.mark.parametrize("args", [(5, 10.0, 100), (0, 1.0, 100), (3, -1.0, 100), (3, 1.0, 15), (3, math.inf, 100)])
    def test_rejects_bad_input(self, args):
        with pytest.raises(ParameterError):
            make_grid(*args)

    def test_volumes_fill_ball(self):
        for n in (1, 2, 3, 4):
            g = make_grid(n, 3.0, 301)
            assert g.volumes.sum() == pytest.approx(g.omega / n * 3.0**n, rel=1e-13)

    def test_nodes_read_only(self):
        with pytest.raises(ValueError):
            make_grid(2, 1.0, 20).nodes[0] = 1.0


class TestField:
    def test_rejects_non_finite(self):
        g = make_grid(1, 1.0, 20)
        vals = np.zeros(20)
        vals[3] = np.nan
        with pytest.raises(ParameterError):
            RadialField(g, vals)

    def test_rejects_wrong_length(self):
        with pytest.raises(ParameterError):
            RadialField(make_grid(1, 1.0, 20), np.zeros(19))

    def test_grid_mismatch_detected(self):
        u = RadialField.zeros(make_grid(1, 1.0, 20))
        v = RadialField.zeros(make_grid(1, 1.0, 21))
        with pytest.raises(GridMismatchError):
            mixed_integral(u, v, 2, 2)


class TestQuadrature:
    def test_constant_1d(self):
        g = make_grid(1, 10.0, 1001)
        assert integrate(RadialField(g, np.ones(g.points))) == pytest.approx(20.0, rel=1e-14)

    def test_ball_volume_3d(self):
        g = make_grid(3, 1.0, 1001)
        assert integrate(RadialField(g, np.ones(g.points))) == pytest.approx(4 * math.pi / 3, rel=1e-13)

    @pytest.mark.parametrize("dim", [1, 2, 3, 4])
    def test_constants_exact(self, dim):
        g = make_grid(dim, 2.0, 1000)
        assert integrate(RadialField(g, np.full(g.points, 3.0))) == pytest.approx(3 * g.omega / dim * 2.0**dim, rel=1e-12)

    def test_linear_exact_in_1d(self):
        g = make_grid(1, 2.0, 1000)
        assert integrate(RadialField(g, 1 + g.nodes)) == pytest.approx(2 * (2 + 2), rel=1e-12)

    @pytest.mark.parametrize("dim", [1, 2, 3, 4])
    def test_quadratic_second_order(self, dim):
        R = 1.5
        omega = make_grid(dim, R, 16).omega
        exact = omega * R ** (dim + 2) / (dim + 2)
        errs = []
        for m in (1001, 2001):
            g = make_grid(dim, R, m)
            errs.append(abs(integrate(RadialField(g, g.nodes**2)) / exact - 1))
        assert errs[1] < 1e-6
        assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.05)

    def test_sech_squared(self):
        g = make_grid(1, 20.0, 4001)
        f = RadialField.from_function(g, lambda x: 2 / np.cosh(x) ** 2)
        assert integrate(f) == pytest.approx(4.0, abs=1e-8)


class TestNorms:
    def test_zero(self):
        assert lp_norm_pow(RadialField.zeros(make_grid(2, 1.0, 20)), 3.0) == 0.0

    def test_bad_exponent(self):
        with pytest.raises(ParameterError):
            lp_norm_pow(RadialField.zeros(make_grid(2, 1.0, 20)), 0.5)

    def test_soliton_norms(self):
        u = sech_field()
        assert lp_norm_pow(u, 2) == pytest.approx(SOLITON_MASS, abs=1e-5)
        assert lp_norm_pow(u, 4) == pytest.approx(SOLITON_L4, abs=1e-5)
        assert grad_norm_sq(u) == pytest.approx(SOLITON_GRAD, abs=1e-5)

    def test_constant_has_no_gradient(self):
        g = make_grid(3, 2.0, 50)
        assert grad_norm_sq(RadialField(g, np.full(50, 7.0))) == 0.0

    def test_mixed_collapses(self):
        u = sech_field(801)
        assert mixed_integral(u, u, 1.5, 2.5) == pytest.approx(lp_norm_pow(u, 4.0), rel=1e-14)
        assert mixed_integral(u, u, 2, 2) == pytest.approx(SOLITON_L4, abs=1e-3)
        assert mixed_integral(u, RadialField.zeros(u.grid), 2, 2) == 0.0

    @given(st.floats(1.05, 3.0), st.floats(1.05, 3.0), st.floats(0.3, 3.0), st.floats(0.3, 3.0))
    def test_hoelder(self, r1, r2, w1, w2):
        g = make_grid(3, 8.0, 401)
        u = RadialField.from_function(g, lambda r: np.exp(-((r / w1) ** 2)))
        v = RadialField.from_function(g, lambda r: (1 + r) * np.exp(-r / w2))
        s = r1 + r2
        bound = lp_norm_pow(u, s) ** (r1 / s) * lp_norm_pow(v, s) ** (r2 / s)
        assert mixed_integral(u, v, r1, r2) <= bound * (1 + 1e-12)

    @pytest.mark.parametrize("dim", [1, 3])
    def test_refinement_is_second_order(self, dim):
        def norms(m):
            g = make_grid(dim, 10.0, m)
            u = RadialField.from_function(g, lambda r: np.exp(-r * r) * (1 + r * r))
            return np.array([lp_norm_pow(u, 2), lp_norm_pow(u, 3.5), grad_norm_sq(u)])

        n1, n2, n3 = norms(201), norms(401), norms(801)
        # at least second order; the 1D trapezoid is spectrally accurate on smooth decaying data
        d1, d2 = np.abs(n1 - n2), np.abs(n2 - n3)
        assert np.all(d2 <= np.maximum(d1 / 3.7, 1e-11))


class TestLaplacian:
    def test_constant(self):
        g = make_grid(2, 3.0, 100)
        assert np.max(np.abs(apply_laplacian(RadialField(g, np.full(100, 2.0))).values)) < 1e-10

    def test_soliton_equation(self):
        u = sech_field(4001)
        lap = apply_laplacian(u).values
        x = u.values
        inner = u.grid.nodes < 15
        assert np.max(np.abs(lap - (x - x**3))[inner]) < 1e-4

    @pytest.mark.parametrize("dim", [1, 2, 3, 4])
    def test_gaussian(self, dim):
        errs = []
        for m in (801, 1601):
            g = make_grid(dim, 8.0, m)
            u = RadialField.from_function(g, lambda r: np.exp(-0.5 * r * r))
            err = np.abs(apply_laplacian(u).values - gaussian_laplacian(dim, g.nodes))
            errs.append(np.max(err[g.nodes < 7]))
        assert errs[1] < 1e-4
        assert errs[0] / errs[1] > 3.5

    @pytest.mark.parametrize("dim", [1, 2, 3, 4])
    def test_quadratic_exact_inside(self, dim):
        g = make_grid(dim, 2.0, 41)
        lap = apply_laplacian(RadialField(g, g.nodes**2)).values
        assert np.max(np.abs(lap[:-1] - 2 * dim)) < 1e-9


class TestDilation:
    def test_identity(self):
        u = sech_field(401)
        assert dilate_field(u, 1.0) == u

    @pytest.mark.parametrize("t", [0.0, -1.0, math.nan])
    def test_rejects_bad_factor(self, t):
        with pytest.raises(ParameterError):
            dilate_field(sech_field(101), t)

    @given(st.floats(0.5, 2.0))
    def test_laws(self, t):
        g = make_grid(3, 10.0, 16001)
        u = RadialField.from_function(g, lambda r: np.exp(-r * r))
        d = dilate_field(u, t)
        assert lp_norm_pow(d, 2) == pytest.approx(lp_norm_pow(u, 2), rel=1e-6)
        assert grad_norm_sq(d) == pytest.approx(t * t * grad_norm_sq(u), rel=1e-6)
        assert lp_norm_pow(d, 3.5) == pytest.approx(t ** (1.5 * 1.5) * lp_norm_pow(u, 3.5), rel=1e-6)
