import cmath

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ellhyp import sklyanin as S
from ellhyp.errors import InvalidArgumentError, InvalidRegimeError, PoleProximityError
from ellhyp.theta import theta1

PRM = S.SklyaninParams(0.07 + 0.21j, 0.5j, 0.17)
TAU = PRM.tau
th1 = lambda u: complex(theta1(u, TAU))
TESTFNS = {"theta_pair": lambda u: th1(u - 0.3) * th1(-u - 0.3), "one": lambda u: 1.0 + 0 * u}
CAS_TESTFNS = {"theta_pair": lambda u: th1(u + 0.3) * th1(u - 0.3), "one": lambda u: 1.0 + 0 * u}
points = st.builds(complex, st.floats(0.05, 0.45), st.floats(0.02, 0.2))
fn_names = st.sampled_from(sorted(TESTFNS))


def a_vector(rng, g=PRM.g):
    a = list(rng.uniform(-0.3, 0.3, 3) + 1j * rng.uniform(-0.1, 0.1, 3))
    return a + [-4 * g - sum(a)]


class TestGenerators:
    def test_s0_on_constant(self):
        u, g = 0.21 + 0.07j, PRM.g
        got = S.s_generator(0, PRM)(lambda x: 1.0 + 0 * x)(u)
        want = (S.s_coefficient(0, u - g, PRM) - S.s_coefficient(0, -u - g, PRM)) / th1(2 * u)
        assert abs(got - want) < 1e-13 * abs(want)

    @given(points)
    def test_s1_listed_form(self, u):
        want = PRM.th(1, PRM.eta + 0.5) * PRM.th(1, 2 * u + 0.5)
        assert abs(S.s_coefficient(1, u, PRM) - want) < 1e-12 * abs(want)

    @given(points)
    def test_oddness(self, u):
        assert abs(th1(-2 * u) + th1(2 * u)) < 1e-14 * abs(th1(2 * u))

    def test_pole(self):
        with pytest.raises(PoleProximityError):
            S.s_generator(0, PRM)(lambda x: 1.0)(0.5)

    def test_bad_index(self):
        with pytest.raises(InvalidArgumentError):
            S.s_coefficient(4, 0.1, PRM)

    def test_bad_tau(self):
        with pytest.raises(InvalidRegimeError):
            S.SklyaninParams(0.1, -0.5j)


class TestAlgebra:
    def test_structure_constants(self):
        assert S.structure_constant_error(PRM) < 1e-12
        for al, be in ((1, 2), (2, 3), (3, 1)):
            assert abs(PRM.J_pair(al, be) + PRM.J_pair(be, al)) < 1e-15
        with pytest.raises(InvalidArgumentError):
            PRM.J_pair(1, 1)

    @settings(max_examples=15)
    @given(points, fn_names)
    def test_relations(self, u, name):
        assert S.sklyanin_relations_residual(PRM, TESTFNS[name], u) < 1e-10

    @settings(max_examples=15)
    @given(points, st.sampled_from(sorted(CAS_TESTFNS)))
    def test_casimirs(self, u, name):
        assert max(S.casimir_residuals(PRM, CAS_TESTFNS[name], u)) < 1e-9

    def test_casimirs_discrete_spin(self):
        prm = S.SklyaninParams(PRM.eta, PRM.tau, PRM.eta / 2)
        for f in CAS_TESTFNS.values():
            assert max(S.casimir_residuals(prm, f, 0.21 + 0.07j)) < 1e-9

    def test_casimir_values(self):
        k0, k2 = S.casimir_values(PRM)
        g, eta = PRM.g, PRM.eta
        assert abs(k0 - 4 * th1(2 * g + eta) ** 2) < 1e-12 * abs(k0)
        assert abs(k2 - 4 * th1(2 * g) * th1(2 * g + 2 * eta)) < 1e-12 * abs(k2)


class TestDelta:
    @settings(max_examples=10)
    @given(st.integers(0, 2 ** 32 - 1), points, fn_names)
    def test_equivalence(self, seed, u, name):
        a = a_vector(np.random.default_rng(seed))
        assert S.delta_equivalence_residual(a, PRM, TESTFNS[name], u) < 1e-10

    @pytest.mark.parametrize("k", range(4))
    def test_s_as_delta(self, k):
        for f in TESTFNS.values():
            assert S.s_as_delta_residual(k, PRM, f, 0.21 + 0.07j) < 1e-10

    def test_bridge(self):
        a = a_vector(np.random.default_rng(1))
        for f in TESTFNS.values():
            assert S.delta_bridge_residual(a, PRM, f, 0.21 + 0.07j) < 1e-10

    def test_sum_rule(self):
        with pytest.raises(InvalidArgumentError):
            S.delta_operator([0.1, 0.2, 0.3, 0.4], PRM)


class TestModularDoubles:
    def test_tau_eta_swap_involution(self):
        back = S.swap_tau_eta(S.swap_tau_eta(PRM))
        assert abs(back.eta - PRM.eta) < 1e-15 and abs(back.tau - PRM.tau) < 1e-15

    def test_omega_swap_coefficient(self):
        u, g, eta = 0.21 + 0.07j, PRM.g, PRM.eta
        tt = TAU / (2 * eta)
        op = S.s_tilde_generator(0, PRM, "omega_swap")
        from ellhyp.theta import jacobi_theta
        want = jacobi_theta(1, 1 / (4 * eta), tt) * jacobi_theta(1, (u - g) / eta, tt) / jacobi_theta(1, u / eta, tt)
        assert abs(op.coeff_plus(u) - want) < 1e-12 * abs(want)
        assert op.shift == 0.5

    @pytest.mark.parametrize("double,a,b,sign", [("tau_eta_swap", 0, 3, 1), ("tau_eta_swap", 0, 1, -1),
                                                 ("omega_swap", 0, 2, -1), ("omega_swap", 0, 1, 1)])
    def test_patterns(self, double, a, b, sign):
        assert S.cross_sign(a, b, double) == sign
        for f in TESTFNS.values():
            assert S.cross_commutation_residual(a, b, PRM, double, f, 0.21 + 0.07j) < 1e-9

    @pytest.mark.parametrize("double", S.DOUBLES)
    def test_all_pairs(self, double):
        worst = max(S.cross_commutation_residual(a, b, PRM, double, f, 0.23 + 0.05j)
                    for a in range(4) for b in range(4) for f in TESTFNS.values())
        assert worst < 1e-9

    def test_unknown_double(self):
        with pytest.raises(InvalidArgumentError):
            S.s_tilde_generator(0, PRM, "other")


class TestUq:
    @pytest.mark.parametrize("f", [lambda u: np.exp(2j * np.pi * u) + 1,
                                   lambda u: np.exp(0.7j * u * u + 0.3 * u) + np.cos(1.3 * u)])
    def test_relations(self, f):
        res = S.uq_relations_residual(PRM, f, 0.21 + 0.07j)
        assert max(res.values()) < 1e-10

    def test_named_groups(self):
        names = set(S.uq_relations(PRM))
        assert {"kE", "kF", "EF", "ktEt", "ktFt", "EtFt", "anti_kFt", "comm_KEt"} <= names
        res = S.uq_relations_residual(PRM, lambda u: np.cos(u) + 2, 0.2, names=["anti_kFt", "comm_KEt"])
        assert set(res) == {"anti_kFt", "comm_KEt"}
