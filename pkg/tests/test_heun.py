import cmath

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import oracle, rel
from ellhyp import checks
from ellhyp import heun as H
from ellhyp.errors import InvalidArgumentError, PoleProximityError, SolverFailureError
from ellhyp.gamma import BasePair

ETA, TAU = checks.BETHE["eta"], checks.BETHE["tau"]
A3 = list(checks.BETHE_A)
BP = BasePair(0.11, 0.23)


def a_for(N):
    return A3 + [-2 * N * ETA - sum(A3)]


def same_point(u, v, tau):
    """u = +-v modulo the lattice."""
    for s in (1, -1):
        d = H.reduce_to_cell(u - s * v, tau)
        if min(abs(d - k) for k in (0, 1, tau, 1 + tau)) < 1e-10:
            return True
    return False


cell = st.builds(complex, st.floats(0.05, 0.45), st.floats(0.05, 0.45)).filter(
    lambda u: abs(H.th1(2 * u, TAU)) > 1e-3)


@pytest.fixture(scope="module")
def n1():
    return H.bethe_solve(1, a_for(1), ETA, TAU)


@pytest.fixture(scope="module")
def n2():
    return H.bethe_solve(2, a_for(2), ETA, TAU)


class TestConfig:
    def test_sum_rule(self):
        with pytest.raises(InvalidArgumentError):
            H.BetheConfig(1, a_for(0), ETA, TAU)

    def test_root_count(self):
        with pytest.raises(InvalidArgumentError):
            H.BetheConfig(1, a_for(1), ETA, TAU, (0.1, 0.2))

    def test_psi_empty(self):
        assert H.bethe_psi(0.37 + 0.1j, H.BetheConfig(0, a_for(0), ETA, TAU)) == 1

    def test_psi_oracle(self):
        cfg = H.BetheConfig(1, a_for(1), ETA, TAU, (0.23 + 0.11j,))
        assert rel(H.bethe_psi(0.4, cfg), oracle("psi_n1_0.4")) < 1e-13

    @given(cell)
    def test_psi_even(self, u):
        cfg = H.BetheConfig(1, a_for(1), ETA, TAU, (0.23 + 0.11j,))
        assert rel(H.bethe_psi(u, cfg), H.bethe_psi(-u, cfg)) < 1e-12


class TestBethe:
    def test_root_matches_oracle(self, n1):
        want = oracle("bethe_n1_roots")[0]
        assert same_point(n1.roots[0], want, TAU)
        assert H.bethe_system_residual(n1).max() < 1e-10

    def test_two_roots(self, n2):
        assert H.bethe_system_residual(n2).max() < 1e-10
        assert list(n2.roots) == sorted(n2.roots, key=lambda x: (round(x.real, 12), round(x.imag, 12)))
        assert not same_point(n2.roots[0], n2.roots[1], TAU)

    def test_reproducible(self, n1):
        assert H.bethe_solve(1, a_for(1), ETA, TAU).roots == n1.roots

    def test_perturbation_breaks_equations(self, n1):
        pert = n1.with_roots([n1.roots[0] + 1e-3])
        assert H.bethe_system_residual(pert).max() > 1e-4

    def test_solver_limits(self):
        with pytest.raises(InvalidArgumentError):
            H.bethe_solve(3, a_for(3), ETA, TAU)

    def test_solver_failure(self):
        # a single seed on a lattice point cannot converge
        with pytest.raises(SolverFailureError):
            H.bethe_solve(1, a_for(1), ETA, TAU, seeds=[np.array([0.0])], max_iter=3)

    def test_energy_n0_oracle(self):
        cfg = H.BetheConfig(0, a_for(0), ETA, TAU)
        want = oracle("bethe_n0_energy")
        for l in (1, 2, 3, 4):
            assert rel(H.bethe_energy(cfg, l), want[l - 1]) < 1e-12

    @pytest.mark.parametrize("N", [1, 2])
    def test_energy_independent_of_l(self, N, n1, n2):
        cfg = {1: n1, 2: n2}[N]
        E = [H.bethe_energy(cfg, l) for l in (1, 2, 3, 4)]
        assert max(rel(E[0], e) for e in E) < 1e-8

    def test_energy_index(self, n1):
        with pytest.raises(InvalidArgumentError):
            H.bethe_energy(n1, 5)


class TestEigenfunctions:
    @settings(max_examples=20)
    @given(cell)
    def test_n0(self, u):
        assert H.devp_residual(u, H.BetheConfig(0, a_for(0), ETA, TAU)) < 1e-10

    @settings(max_examples=20)
    @given(cell)
    def test_n1(self, u):
        cfg = H.bethe_solve(1, a_for(1), ETA, TAU)
        assert H.devp_residual(u, cfg) < 1e-8

    def test_n2(self, n2):
        for u in (0.13 + 0.07j, 0.31 + 0.2j, 0.41 + 0.33j):
            assert H.devp_residual(u, n2) < 1e-8

    def test_non_bethe_roots_fail(self, n1):
        wrong = n1.with_roots([n1.roots[0] + 0.05])
        assert H.devp_residual(0.31 + 0.2j, wrong) > 1e-4

    @pytest.mark.parametrize("u", [0.0, 0.5, 0.25j, 0.5 + 0.25j])
    def test_half_period(self, u):
        with pytest.raises(PoleProximityError):
            H.devp_residual(u, H.BetheConfig(0, a_for(0), ETA, TAU))

    def test_half_period_zeros(self):
        assert H.half_period_zero_check(TAU) < 1e-12


class TestWeierstrass:
    def test_oracle(self):
        assert rel(H.weierstrass_p(0.3, 0.5j), oracle("wp_0.3_tau0.5i")) < 1e-11

    @given(cell)
    def test_even_and_periodic(self, u):
        P = H.weierstrass_p(u, 0.5j)
        assert rel(H.weierstrass_p(-u, 0.5j), P) < 1e-11
        assert rel(H.weierstrass_p(u + 1, 0.5j), P) < 1e-11
        assert rel(H.weierstrass_p(u + 0.5j, 0.5j), P) < 1e-10

    def test_lattice_pole(self):
        with pytest.raises(PoleProximityError):
            H.weierstrass_p(0.0, 0.5j)


class TestHeunLimit:
    def test_free_operator(self):
        f = lambda u: cmath.exp(2j * cmath.pi * u)
        d2 = lambda u: -4 * cmath.pi ** 2 * f(u)
        u = 0.21 + 0.07j
        got = H.heun_l_apply(f, d2, u, (0, 1, 0, 1), 0.5j)
        assert rel(got, 4 * cmath.pi ** 2 * f(u)) < 1e-14

    def test_theta_pair_derivative(self):
        f, d2 = H.theta_pair_testfn(0.3, 0.5j)
        u, h = 0.21 + 0.07j, 1e-3
        fd = (-f(u + 2 * h) + 16 * f(u + h) - 30 * f(u) + 16 * f(u - h) - f(u - 2 * h)) / (12 * h * h)
        assert rel(d2(u), fd) < 1e-8

    @pytest.mark.parametrize("k", range(3))
    def test_order_three(self, k):
        f, d2 = checks._heun_testfns(0.5j)[k]
        est = H.heun_limit_order(f, d2, 0.21 + 0.07j, checks.HEUN_ALPHAS, 0.5j)
        assert 2.7 <= est.order <= 3.3 and not est.precision_floor

    @pytest.mark.parametrize("k", range(3))
    def test_order_two_without_potential(self, k):
        f, d2 = checks._heun_testfns(0.5j)[k]
        est = H.heun_limit_order(f, d2, 0.21 + 0.07j, checks.HEUN_ALPHAS, 0.5j, with_potential=False)
        assert 1.7 <= est.order <= 2.3


class TestVanDiejen:
    E = (0.5 * cmath.exp(0.3j), 0.55 * cmath.exp(-0.7j), 0.45 * cmath.exp(1.1j))

    def cfg(self):
        e6, e7, e8 = self.E
        return H.VanDiejenConfig.reduced(1 / (e6 * e7 * e8), e6, e7, e8, BP)

    @pytest.mark.parametrize("f", [lambda x: x + 1 / x, lambda x: 1 + 0 * x, lambda x: x ** 3 + x ** -3 - 2j])
    def test_reduction(self, f):
        cfg = self.cfg()
        for x in (1.05 * cmath.exp(0.4j), 0.9 * cmath.exp(2.1j)):
            assert H.vd_reduction_residual(cfg, f, x) < 1e-10

    def test_product_constraint(self):
        with pytest.raises(InvalidArgumentError):
            H.VanDiejenConfig((0.5,) * 8, BP)
        with pytest.raises(InvalidArgumentError):
            H.VanDiejenConfig.reduced(0.5, 0.5, 0.5, 0.5, BP)

    def test_unreduced(self):
        eps = [0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]
        eps.append(BP.pq ** 2 / np.prod(eps))
        with pytest.raises(InvalidArgumentError):
            H.vd_reduction_residual(H.VanDiejenConfig(eps, BP), lambda x: x, 1.1)


class TestZeroModes:
    zp = H.ZeroModeParams.from_t6(0.5 * cmath.exp(-0.4j), 0.6 * cmath.exp(0.2j), BP)

    @pytest.mark.parametrize("x", [cmath.exp(0.7j), cmath.exp(2.3j), 1.1 * cmath.exp(1.3j)])
    def test_psi2(self, x):
        assert H.zero_mode_residual("psi2", x, self.zp) < 1e-9

    def test_psi1(self):
        assert H.zero_mode_residual("psi1", cmath.exp(0.9j), self.zp) < 1e-6

    def test_ellipticity(self):
        assert H.ellipticity_residual(cmath.exp(0.9j), self.zp) < 1e-6

    def test_constraint(self):
        with pytest.raises(InvalidArgumentError):
            H.ZeroModeParams(0.3, 0.4, 0.5, BP)

    def test_unknown_mode(self):
        with pytest.raises(InvalidArgumentError):
            H.zero_mode_residual("psi3", 1.0, self.zp)
