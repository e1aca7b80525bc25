import math

import numpy as np
import pytest

from weighted_ckp import (c_bounds_check, dominated, extremizer, make_space, maximize_r,
                          necessary_conditions, phi, q_constant_bounds, r_functional, solve_c,
                          sufficient_condition, tsallis)
from weighted_ckp.errors import NegativeG


class TestPhi:
    def test_constant_zero(self):
        assert phi(make_space([1.0]), [0.0], 2.0, -2.0) == pytest.approx(2.0)

    def test_vanishes_above_max(self, uniform2):
        assert phi(uniform2, [1, -1], 2.0, 1.0) == 0.0
        assert phi(uniform2, [1, -1], 2.0, 5.0) == 0.0

    def test_two_point(self, uniform2):
        assert phi(uniform2, [1, -1], 2.0, -2.0) == pytest.approx(2.0)


class TestSolveC:
    @pytest.mark.parametrize("g0, expected", [(0.0, -2.0), (1.0, -1.0)])
    def test_constant(self, uniform2, g0, expected):
        assert solve_c(uniform2, [g0, g0], 2) == pytest.approx(expected, abs=1e-12)

    def test_two_point(self, uniform2):
        assert solve_c(uniform2, [1, -1], 2) == pytest.approx(-2.0, abs=1e-12)

    @pytest.mark.parametrize("alpha", [1.05, 1.5, 3.0, 6.0, 50.0])
    def test_constant_any_order(self, alpha):
        s = make_space([0.2, 0.3, 0.5])
        beta = alpha / (alpha - 1)
        assert solve_c(s, [0.7] * 3, alpha) == pytest.approx(0.7 - beta, abs=1e-10)

    def test_root_next_to_an_atom(self):
        # alpha = 6 puts the root within 1e-10 of the smallest g value, where
        # phi is very steep; the root must still satisfy the equation to 1e-9
        s = make_space([0.8, 0.2])
        g = np.array([0.0, -5.0])
        beta = 1.2
        c = solve_c(s, g, 6.0)
        target = beta ** (beta - 1)
        assert phi(s, g, beta, c) / target == pytest.approx(1.0, abs=1e-9)


class TestExtremizer:
    def test_constant_g(self, uniform2):
        np.testing.assert_allclose(extremizer(uniform2, [0.3, 0.3], 2.5), [1, 1], atol=1e-12)

    def test_two_point(self, uniform2):
        np.testing.assert_allclose(extremizer(uniform2, [1, -1], 2), [1.5, 0.5], atol=1e-12)

    def test_is_a_density(self, rng):
        s = make_space(rng.dirichlet(np.ones(6)))
        f = extremizer(s, rng.normal(size=6), 1.7)
        assert s.integrate(f) == pytest.approx(1.0, abs=1e-9)
        assert f.min() >= 0


class TestRFunctional:
    def test_at_mu(self, uniform2):
        assert r_functional(uniform2, [1, -3], 2, [1, 1]) == pytest.approx(-1.0)

    def test_two_point(self, uniform2):
        assert r_functional(uniform2, [1, -1], 2, [1.5, 0.5]) == pytest.approx(0.25)

    def test_zero_g(self, uniform2):
        f = [1.8, 0.2]
        assert r_functional(uniform2, [0, 0], 3, f) == pytest.approx(-tsallis(uniform2, f, 3))


class TestOracle:
    def test_zero_g(self, uniform2):
        f, val = maximize_r(uniform2, [0, 0], 2)
        np.testing.assert_allclose(f, [1, 1], atol=1e-6)
        assert val == pytest.approx(0.0, abs=1e-9)

    def test_two_point(self, uniform2):
        f, val = maximize_r(uniform2, [1, -1], 2)
        np.testing.assert_allclose(f, [1.5, 0.5], atol=1e-6)
        assert val == pytest.approx(0.25, abs=1e-9)

    def test_constant_one(self, uniform2):
        f, val = maximize_r(uniform2, [1, 1], 2)
        np.testing.assert_allclose(f, [1, 1], atol=1e-6)
        assert val == pytest.approx(1.0, abs=1e-9)


class TestDomination:
    def test_equality_case(self, uniform2):
        cert = dominated(uniform2, [0, 0], 2)
        assert cert.dominated
        assert cert.lhs_42 == pytest.approx(4.0)
        assert cert.rhs_42 == pytest.approx(4.0)

    def test_not_dominated_with_witness(self, uniform2):
        cert = dominated(uniform2, [1, -1], 2)
        assert not cert.dominated
        assert cert.lhs_42 == pytest.approx(5.0)
        assert cert.rhs_42 == pytest.approx(4.0)
        witness = [1.8, 0.2]
        assert uniform2.integrate(np.multiply([1, -1], witness)) == pytest.approx(0.8)
        assert tsallis(uniform2, witness, 2) == pytest.approx(0.64)

    def test_constant_one(self, uniform2):
        assert not dominated(uniform2, [1, 1], 2).dominated

    def test_margin_matches_r(self, rng):
        s = make_space(rng.dirichlet(np.ones(5)))
        g = rng.normal(size=5)
        cert = dominated(s, g, 3.0)
        assert cert.lhs_42 - cert.rhs_42 == pytest.approx(cert.beta**cert.beta * cert.r_at_extremizer, abs=1e-10)


class TestSufficientAndNecessary:
    def test_sufficient(self, uniform2):
        assert sufficient_condition(uniform2, [0, 0], 2)
        assert not sufficient_condition(uniform2, [1, 1], 2)
        assert sufficient_condition(uniform2, [-2, -2], 2)

    def test_necessary_zero(self, uniform2):
        assert tuple(necessary_conditions(uniform2, [0, 0], 2)) == (True, True, True)

    def test_necessary_one(self, uniform2):
        assert tuple(necessary_conditions(uniform2, [1, 1], 2)) == (False, False, True)

    def test_necessary_not_sufficient(self, uniform2):
        nec = necessary_conditions(uniform2, [1, -1], 2)
        assert nec.mean_ok and nec.cond_82_ok
        assert nec.lhs_82 == pytest.approx(1.0)
        assert not dominated(uniform2, [1, -1], 2).dominated


class TestCBounds:
    @pytest.mark.parametrize("g0, alpha, c", [(0.0, 2.0, -2.0), (-1.0, 2.0, -3.0), (-3.0, 1.5, -6.0)])
    def test_constant(self, uniform2, g0, alpha, c):
        g = [g0, g0]
        cert = dominated(uniform2, g, alpha)
        assert cert.c == pytest.approx(c, abs=1e-12)
        assert c_bounds_check(cert, uniform2, g, alpha)


class TestQConstant:
    def test_constant_one(self, uniform2):
        lower, upper, k = q_constant_bounds(uniform2, [1, 1], 2)
        assert lower == pytest.approx(1 / (2 * math.e))
        assert upper == pytest.approx(1.0)
        assert k == pytest.approx(1.0, abs=1e-9)

    def test_zero(self, uniform2):
        assert q_constant_bounds(uniform2, [0, 0], 2) == (0.0, 0.0, 0.0)

    def test_two_point_grid(self, uniform2):
        lower, upper, k = q_constant_bounds(uniform2, [2, 0], 2)
        assert lower == pytest.approx(math.sqrt(2) / (2 * math.e))
        assert upper == pytest.approx(math.sqrt(2))
        # exhaustive grid over the 1-simplex: f = (1 + t, 1 - t)
        t = np.linspace(-1, 1, 200_001)
        grid = np.max((1 + t) / (0.5 * ((1 + t) ** 2 + (1 - t) ** 2)))
        assert k == pytest.approx(grid, abs=1e-8)
        assert lower <= k <= upper

    def test_negative_rejected(self, uniform2):
        with pytest.raises(NegativeG):
            q_constant_bounds(uniform2, [1, -1], 2)
