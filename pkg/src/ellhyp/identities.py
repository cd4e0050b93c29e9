"""Residuals for the theta, elliptic gamma and quadrature invariants."""
from __future__ import annotations

import cmath

import numpy as np

from .gamma import BasePair, OmegaTriple, bernoulli_b22, gamma_pq, modified_gamma_first, modified_gamma_g, \
    modified_gamma_second
from .integrals import integrand_batch
from .quadrature import contour_factor
from .theta import jacobi_theta, qpochhammer_infinite, theta1, theta1_via_product, theta_short

PI = cmath.pi


def rel(a, b) -> float:
    a, b = complex(a), complex(b)
    s = max(abs(a), abs(b))
    return abs(a - b) / s if s > 0 else 0.0


def _t1(*us, tau):
    out = 1.0 + 0.0j
    for u in us:
        out *= complex(theta1(u, tau))
    return out


# theta --------------------------------------------------------------------


def triple_product_residual(u, tau) -> float:
    return rel(theta1(u, tau), theta1_via_product(u, tau))


def quasi_periodicity_residual(u, tau) -> float:
    t = complex(theta1(u, tau))
    r1 = rel(theta1(u + 1, tau), -t)
    r2 = rel(theta1(u + tau, tau), -cmath.exp(-1j * PI * tau - 2j * PI * u) * t)
    return max(r1, r2)


def theta_duplication_residual(u, tau) -> float:
    p = cmath.exp(2j * PI * tau)
    pref = 1j * cmath.exp(1j * PI * tau / 4) / complex(qpochhammer_infinite(p, p)) ** 3
    return rel(theta1(2 * u, tau), pref * _t1(u, u + 0.5, u + tau / 2, u - (1 + tau) / 2, tau=tau))


def add_add_residual(u, v, x, y, tau) -> float:
    a = _t1(u + x, u - x, v + y, v - y, tau=tau)
    b = _t1(u + y, u - y, v + x, v - x, tau=tau)
    c = _t1(x + y, x - y, u + v, u - v, tau=tau)
    return abs(a - b - c) / max(abs(a), abs(b), abs(c))


def add_mult_residual(u, v, x, y, p) -> float:
    th = lambda *zs: np.prod([complex(theta_short(z, p)) for z in zs])
    a = th(u * x, u / x, v * y, v / y)
    b = th(u * y, u / y, v * x, v / x)
    c = v / x * th(x * y, x / y, u * v, u / v)
    return abs(a - b - c) / max(abs(a), abs(b), abs(c))


def jacobi_identity_residual(b, tau) -> float:
    """2 theta_1(b - B/2) against the four-term right side, b a 4-vector."""
    b = np.asarray(b, dtype=np.complex128)
    B = b.sum()
    T = lambda s: _t1(*(b + s), tau=tau)
    lhs = 2 * T(-B / 2)
    terms = [T(0), T(0.5), cmath.exp(1j * PI * (tau + B)) * T(tau / 2),
             -cmath.exp(1j * PI * (tau + B)) * T(0.5 + tau / 2)]
    return abs(lhs - sum(terms)) / max(abs(lhs), *(abs(t) for t in terms))


def theta_relations_residual(u, tau) -> float:
    """The listed relations of theta_2..theta_4 to theta_1."""
    e = cmath.exp(1j * PI * tau / 4 + 1j * PI * u)
    return max(rel(jacobi_theta(2, u, tau), theta1(u + 0.5, tau)),
               rel(jacobi_theta(3, u, tau), e * theta1(u + 0.5 + tau / 2, tau)),
               rel(jacobi_theta(4, u, tau), -1j * e * theta1(u + tau / 2, tau)))


# elliptic gamma ------------------------------------------------------------


def _g(z, b):
    return complex(gamma_pq(z, b))


def gamma_reflection_residual(z, b: BasePair) -> float:
    return rel(_g(z, b) * _g(b.pq / z, b), 1.0)


def gamma_shift_residual(z, b: BasePair) -> float:
    g = _g(z, b)
    r1 = rel(_g(b.q * z, b), complex(theta_short(z, b.p)) * g)
    r2 = rel(_g(b.p * z, b), complex(theta_short(z, b.q)) * g)
    return max(r1, r2)


def gamma_duplication_residual(z, b: BasePair) -> float:
    sq, sp, spq = cmath.sqrt(b.q), cmath.sqrt(b.p), cmath.sqrt(b.pq)
    rhs = np.prod([_g(s * c * z, b) for c in (1, sq, sp, spq) for s in (1, -1)])
    return rel(_g(z * z, b), rhs)


def gamma_p0_limit_residual(z, q, p: float = 1e-8) -> float:
    """|Gamma_{p,q}(z) (z;q) - 1| at a small p."""
    return abs(complex(gamma_pq(z, p=p, q=q)) * complex(qpochhammer_infinite(z, q)) - 1)


def modified_gamma_equations_residual(u, om: OmegaTriple) -> float:
    """The three first-order equations of G, worst case."""
    G = lambda x: modified_gamma_g(x, om)
    w1, w2, w3 = om.w1, om.w2, om.w3
    f = G(u)
    r1 = rel(G(u + w1), complex(theta_short(cmath.exp(2j * PI * u / w2), om.p)) * f)
    r2 = rel(G(u + w2), complex(theta_short(cmath.exp(2j * PI * u / w1), om.r)) * f)
    r3 = rel(G(u + w3), cmath.exp(-1j * PI * bernoulli_b22(u, w1, w2)) * f)
    return max(r1, r2, r3)


def modified_gamma_normalization_residual(om: OmegaTriple) -> float:
    return rel(modified_gamma_g(om.half_sum, om), 1.0)


def modified_gamma_reflection_residual(a, om: OmegaTriple) -> float:
    b = 2 * om.half_sum - a
    return rel(modified_gamma_g(a, om) * modified_gamma_g(b, om), 1.0)


def modified_gamma_representations_residual(u, om: OmegaTriple) -> float:
    return rel(modified_gamma_first(u, om), modified_gamma_second(u, om))


def modified_gamma_symmetry_residual(u, om: OmegaTriple) -> float:
    return rel(modified_gamma_g(u, om), modified_gamma_g(u, om.swapped12()))


# quadrature -----------------------------------------------------------------


def trapezoid_error_sequence(t, bases: BasePair = BasePair(), n0: int = 8, doublings: int = 7):
    """Error estimates |I_N - I_{N/2}| / |I_N| of the beta integrand for N = 2 n0, 4 n0, ..."""
    f = integrand_batch([np.asarray(t, dtype=np.complex128)], bases)
    vals = []
    n = n0
    for _ in range(doublings + 1):
        z = np.exp(2j * PI * np.arange(n) / n)
        vals.append(contour_factor(bases) * np.mean(f(z)[0]))
        n *= 2
    return [abs(vals[k] - vals[k - 1]) / abs(vals[k]) for k in range(1, len(vals))]


def error_shrink_ok(errs, factor: float = 10.0, floor: float = 1e-14) -> bool:
    """Each estimate above the floor is at least ``factor`` times the next."""
    for a, b in zip(errs, errs[1:]):
        if a <= floor or b <= floor:
            return True
        if a < factor * b:
            return False
    return True
