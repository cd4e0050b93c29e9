import cmath

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from conftest import oracle, rel
from ellhyp.errors import InvalidArgumentError
from ellhyp.identities import (add_add_residual, add_mult_residual, jacobi_identity_residual,
                               quasi_periodicity_residual, theta_duplication_residual, theta_relations_residual,
                               triple_product_residual)
from ellhyp.theta import (Nome, TauParam, ThetaChar, jacobi_theta, qpochhammer_infinite, theta1, theta1_via_product,
                          theta_char, theta_pm, theta_short)

P = 0.11
TAU = 0.5j

moduli = st.floats(0.2, 1.5)
phases = st.floats(0, 2 * np.pi)
# away from the half-period lattice, where both sides of several identities vanish
cell_u = st.builds(complex, st.floats(0.05, 0.95), st.floats(-0.2, 0.2)).filter(lambda u: abs(u - 0.5) > 0.02)


def polar(r, a):
    return r * cmath.exp(1j * a)


def apart_additive(*us, d=0.02):
    """No sum or difference of two arguments near an integer (keeps every term away from 0/0)."""
    for i, a in enumerate(us):
        for b in us[i + 1:]:
            for s in (a + b, a - b):
                if abs(s.imag) < d and abs(s.real - round(s.real)) < d:
                    return False
    return True


def apart_multiplicative(*zs, d=0.02):
    """No product or ratio of two arguments near a power of the nome."""
    lp = cmath.log(P).real
    for i, a in enumerate(zs):
        for b in zs[i + 1:]:
            for s in (a * b, a / b):
                l = cmath.log(s)
                if abs(l.imag) < d and abs(l.real / lp - round(l.real / lp)) * abs(lp) < d:
                    return False
    return True


class TestQPochhammer:
    def test_zero_argument_is_one(self):
        assert qpochhammer_infinite(0, P) == 1

    def test_vanishes_at_one(self):
        assert qpochhammer_infinite(1, P) == 0

    def test_against_truncated_product(self):
        assert rel(qpochhammer_infinite(0.5, P), oracle("qpoch_0.5")) < 1e-15

    def test_vectorised(self):
        z = np.array([0.1, 0.5j, -0.3])
        out = qpochhammer_infinite(z, P)
        assert out.shape == (3,)
        assert all(rel(out[i], qpochhammer_infinite(z[i], P)) < 1e-15 for i in range(3))

    @given(moduli, phases)
    def test_functional_equation(self, r, a):
        z = polar(r, a)
        assert rel(qpochhammer_infinite(z, P), (1 - z) * qpochhammer_infinite(P * z, P)) < 1e-13

    def test_bad_nome(self):
        with pytest.raises(InvalidArgumentError):
            qpochhammer_infinite(0.5, 1.2)
        with pytest.raises(InvalidArgumentError):
            Nome(1.0)
        with pytest.raises(InvalidArgumentError):
            TauParam(-0.5j)


class TestThetaShort:
    def test_zero_at_one(self):
        assert theta_short(1, P) == 0

    def test_inversion_pair(self):
        assert rel(theta_short(0.5, P), theta_short(0.22, P)) < 1e-15

    def test_minus_one(self):
        v = theta_short(-1, P)
        assert v.real > 0 and abs(v.imag) < 1e-16
        assert rel(v, oracle("theta_short_-1")) < 1e-15

    def test_essential_singularity(self):
        with pytest.raises(InvalidArgumentError):
            theta_short(0, P)

    @given(moduli, phases)
    def test_symmetries(self, r, a):
        z = polar(r, a)
        t = theta_short(z, P)
        assert rel(theta_short(P / z, P), t) < 1e-13
        assert rel(theta_short(1 / z, P), -t / z) < 1e-13


class TestJacobiTheta:
    def test_theta1_odd_zero(self):
        assert abs(theta1(0, TAU)) < 1e-16
        assert abs(theta_char((1, 1), 0, TAU)) < 1e-16

    def test_periodicity_example(self):
        u = 0.3 + 0.1j
        assert rel(theta1(u + 1, TAU), -theta1(u, TAU)) < 1e-14

    def test_theta1_oracle(self):
        assert rel(theta1(0.3, TAU), oracle("theta1_0.3_tau0.5i")) < 1e-14
        assert rel(theta1_via_product(0.3, TAU), oracle("theta1_0.3_tau0.5i")) < 1e-14

    def test_listed_relations_examples(self):
        assert rel(jacobi_theta(2, 0.2, 0.6j), theta1(0.7, 0.6j)) < 1e-14
        u = 0.1 + 0.05j
        want = -1j * cmath.exp(1j * cmath.pi * TAU / 4 + 1j * cmath.pi * u) * theta1(u + TAU / 2, TAU)
        assert rel(jacobi_theta(4, u, TAU), want) < 1e-14

    def test_theta3_oracle(self):
        assert rel(jacobi_theta(3, 0, TAU), oracle("theta3_0_tau0.5i")) < 1e-15

    def test_bad_index_and_tau(self):
        with pytest.raises(InvalidArgumentError):
            jacobi_theta(5, 0.1, TAU)
        with pytest.raises(InvalidArgumentError):
            theta1(0.1, 0.5)
        with pytest.raises(InvalidArgumentError):
            ThetaChar(2, 0)

    def test_array_input(self):
        u = np.linspace(0.1, 0.4, 4)
        out = theta1(u, TAU)
        assert np.allclose(out, [theta1(x, TAU) for x in u], rtol=1e-14)

    @given(cell_u)
    def test_triple_product(self, u):
        assert triple_product_residual(u, TAU) < 1e-12

    @given(cell_u)
    def test_quasi_periodicity(self, u):
        assert quasi_periodicity_residual(u, TAU) < 1e-12

    @given(cell_u)
    def test_duplication(self, u):
        assert theta_duplication_residual(u, TAU) < 1e-12

    @given(cell_u)
    def test_relations(self, u):
        assert theta_relations_residual(u, TAU) < 1e-12

    @given(cell_u, cell_u, cell_u, cell_u)
    def test_addition_additive(self, u, v, x, y):
        assume(apart_additive(u, v, x, y))
        assert add_add_residual(u, v, x, y, TAU) < 1e-12

    @given(st.lists(st.tuples(st.floats(0.3, 1.4), phases), min_size=4, max_size=4))
    def test_addition_multiplicative(self, zs):
        u, v, x, y = (polar(r, a) for r, a in zs)
        assume(apart_multiplicative(u, v, x, y))
        assert add_mult_residual(u, v, x, y, P) < 1e-12

    @given(st.lists(cell_u, min_size=4, max_size=4))
    def test_four_term_identity(self, b):
        assert jacobi_identity_residual(b, TAU) < 1e-12


class TestThetaPm:
    def test_collapse_at_unit_y(self):
        assert rel(theta_pm(0.5, 1, P), theta_short(0.5, P) ** 2) < 1e-15

    def test_vanishes_at_one_one(self):
        assert theta_pm(1, 1, P) == 0

    def test_oracle(self):
        assert rel(theta_pm(0.4, 0.7j, P), oracle("theta_pm_0.4_0.7i")) < 1e-14

    def test_nonzero_required(self):
        with pytest.raises(InvalidArgumentError):
            theta_pm(0, 1, P)
