import cmath

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from conftest import oracle, rel
from ellhyp.errors import InvalidArgumentError, InvalidRegimeError, PoleProximityError
from ellhyp.gamma import (BasePair, OmegaTriple, bernoulli_b22, cubic_p, gamma_pm, gamma_pq, gamma_prod,
                          modified_gamma_first, modified_gamma_g, modified_gamma_second)
from ellhyp.identities import (gamma_duplication_residual, gamma_p0_limit_residual, gamma_reflection_residual,
                               gamma_shift_residual, modified_gamma_equations_residual,
                               modified_gamma_normalization_residual, modified_gamma_reflection_residual,
                               modified_gamma_representations_residual, modified_gamma_symmetry_residual)

B = BasePair(0.11, 0.23)
GENERIC = OmegaTriple(1.0, 1.3 - 0.4j, 0.2 + 1.1j)
UNIT_Q = OmegaTriple(1.0, 2 ** 0.5, 1j)
BOTH = OmegaTriple(1.0, 2 + 0.5j, 1j)

annulus = st.builds(lambda r, a: r * cmath.exp(1j * a), st.floats(0.3, 0.9), st.floats(0.05, 6.2))
# G has a pole at u = 0; the rest of the strip is regular
strip = st.builds(complex, st.floats(-0.4, 0.4), st.floats(-0.3, 0.3)).filter(lambda u: abs(u) > 0.02)


class TestEllipticGamma:
    def test_fixed_point(self):
        assert rel(gamma_pq(cmath.sqrt(B.pq), B), 1) < 1e-14

    def test_reflection_example(self):
        assert rel(gamma_pq(0.4, B) * gamma_pq(B.pq / 0.4, B), 1) < 1e-14

    def test_oracle(self):
        assert rel(gamma_pq(0.5, B), oracle("gamma_0.5")) < 1e-14

    def test_keyword_bases(self):
        assert gamma_pq(0.5, p=0.11, q=0.23) == gamma_pq(0.5, B)

    def test_pm_examples(self):
        assert rel(gamma_pm(cmath.sqrt(B.pq), 1, B), 1) < 1e-14
        z = 0.8 * cmath.exp(0.4j)
        assert rel(gamma_pm(0.3, z, B), gamma_pm(0.3, 1 / z, B)) < 1e-14
        assert rel(gamma_pm(0.4, cmath.exp(0.7j), B), oracle("gamma_pm_0.4_e0.7i")) < 1e-14

    def test_product(self):
        zs = [0.3, 0.5j, -0.4]
        assert rel(gamma_prod(zs, B), np.prod([gamma_pq(z, B) for z in zs])) < 1e-14

    def test_pole_detected(self):
        with pytest.raises(PoleProximityError):
            gamma_pq(1.0, B)
        with pytest.raises(PoleProximityError):
            gamma_pq(1 / B.q, B)

    def test_bad_bases(self):
        with pytest.raises(InvalidArgumentError):
            BasePair(1.1, 0.2)
        with pytest.raises(InvalidArgumentError):
            BasePair(0.1, 0.2, eps=1e-3)

    @given(annulus)
    def test_reflection(self, z):
        assert gamma_reflection_residual(z, B) < 1e-11

    @given(annulus)
    def test_shifts(self, z):
        assert gamma_shift_residual(z, B) < 1e-12

    @given(annulus)
    def test_duplication(self, z):
        assert gamma_duplication_residual(z, B) < 1e-11

    @given(annulus)
    def test_base_symmetry(self, z):
        assert rel(gamma_pq(z, B), gamma_pq(z, B.swapped())) < 1e-13

    @given(annulus)
    def test_conjugation(self, z):
        assert rel(gamma_pq(z, B).conjugate(), gamma_pq(z.conjugate(), B.conjugated())) < 1e-13

    @given(st.builds(lambda r, a: r * cmath.exp(1j * a), st.floats(0.2, 0.7), st.floats(0.1, 6.1)))
    def test_small_p_limit(self, z):
        assert gamma_p0_limit_residual(z, 0.23) < 1e-6


class TestBernoulliAndCubic:
    def test_b22_at_zero(self):
        assert abs(bernoulli_b22(0, 1, 1) - 5 / 6) < 1e-15

    def test_b22_symmetric(self):
        assert abs(bernoulli_b22(0.3, 1, 2 ** 0.5) - bernoulli_b22(0.3, 2 ** 0.5, 1)) < 1e-15

    def test_b22_value(self):
        assert abs(bernoulli_b22(0.5, 1, 0.5j) - oracle("b22_0.5_1_0.5i")) < 1e-15

    def test_b22_zero_period(self):
        with pytest.raises(InvalidArgumentError):
            bernoulli_b22(0.1, 0, 1)

    def test_cubic(self):
        h = UNIT_Q.half_sum
        assert abs(cubic_p(h, UNIT_Q)) < 1e-16
        assert abs(cubic_p(h + 0.2, UNIT_Q) + cubic_p(h - 0.2, UNIT_Q)) < 1e-15
        assert rel(cubic_p(0.7, UNIT_Q), oracle("cubic_p_0.7")) < 1e-14


class TestModifiedGamma:
    def test_normalization(self):
        assert rel(modified_gamma_g(BOTH.half_sum, BOTH), 1) < 1e-12
        for om in (GENERIC, UNIT_Q, BOTH):
            assert modified_gamma_normalization_residual(om) < 1e-10

    def test_reflection_example(self):
        a = 0.3
        b = 2 * BOTH.half_sum - a
        assert rel(modified_gamma_g(a, BOTH) * modified_gamma_g(b, BOTH), 1) < 1e-10

    def test_representations_example(self):
        assert rel(modified_gamma_first(0.4, BOTH), modified_gamma_second(0.4, BOTH)) < 1e-10

    def test_unit_q_regime(self):
        assert UNIT_Q.unit_q
        with pytest.raises(InvalidRegimeError):
            modified_gamma_first(0.3, UNIT_Q)
        assert np.isfinite(modified_gamma_g(0.3, UNIT_Q))

    def test_regime_errors(self):
        with pytest.raises(InvalidArgumentError):
            OmegaTriple(0, 1, 1j)
        with pytest.raises(InvalidRegimeError):
            OmegaTriple(1.0, 1.0, -1j)

    @given(strip)
    def test_equations_generic(self, u):
        assert modified_gamma_equations_residual(u, GENERIC) < 1e-10

    @given(strip)
    def test_equations_unit_q(self, u):
        assert modified_gamma_equations_residual(u, UNIT_Q) < 1e-10

    @given(strip)
    def test_representations(self, u):
        assert modified_gamma_representations_residual(u, BOTH) < 1e-10

    @given(strip)
    def test_reflection(self, u):
        assert modified_gamma_reflection_residual(u, BOTH) < 1e-10

    @given(strip)
    def test_period_swap(self, u):
        assert modified_gamma_symmetry_residual(u, UNIT_Q) < 1e-10
