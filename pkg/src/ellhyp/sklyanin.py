"""Sklyanin algebra generators as difference operators in an additive variable.

Operators are extensional: an :class:`Operator` maps a callable f(u) to a new
callable. Composition is lazy, so commutators are always built from the
generators themselves and the relations below are genuine checks.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DegenerateError, InvalidArgumentError, InvalidRegimeError, PoleProximityError
from .theta import jacobi_theta, qpochhammer_infinite

POLE_TOL = 1e-12
PI = cmath.pi

Fn = Callable[[complex], complex]


def _exp(x):
    return cmath.exp(x)


@dataclass(frozen=True)
class SklyaninParams:
    eta: complex
    tau: complex
    g: complex = 0.17

    def __post_init__(self):
        if complex(self.tau).imag <= 0:
            raise InvalidRegimeError("need Im(tau) > 0")

    @property
    def p(self) -> complex:
        return _exp(2j * PI * self.tau)

    @property
    def q(self) -> complex:
        return _exp(4j * PI * self.eta)

    @property
    def chi(self) -> complex:
        """i p^{1/8} / (p; p)^3, with p^{1/8} = e^{pi i tau / 4}."""
        return 1j * _exp(1j * PI * self.tau / 4) / complex(qpochhammer_infinite(self.p, self.p)) ** 3

    def th(self, k, u) -> complex:
        return complex(jacobi_theta(k, u, self.tau))

    def J(self, a: int) -> complex:
        if a not in (1, 2, 3):
            raise InvalidArgumentError("J_a is defined for a = 1, 2, 3")
        k = a + 1
        return self.th(k, 2 * self.eta) * self.th(k, 0) / self.th(k, self.eta) ** 2

    def J_pair(self, alpha: int, beta: int) -> complex:
        """J_{alpha beta} from the explicit theta quotients (cyclic pairs)."""
        t = lambda k: self.th(k, self.eta) ** 2
        table = {(1, 2): t(1) * t(4) / (t(2) * t(3)),
                 (2, 3): t(1) * t(2) / (t(3) * t(4)),
                 (3, 1): -t(1) * t(3) / (t(2) * t(4))}
        if (alpha, beta) in table:
            return table[(alpha, beta)]
        if (beta, alpha) in table:
            return -table[(beta, alpha)]
        raise InvalidArgumentError("J_{alpha beta} needs two distinct indices in 1..3")

    def J_pair_from_J(self, alpha: int, beta: int) -> complex:
        gamma = 6 - alpha - beta
        return (self.J(beta) - self.J(alpha)) / self.J(gamma)


def structure_constant_error(params: SklyaninParams) -> float:
    """Max relative mismatch of the two parametrizations of J_{alpha beta}."""
    out = 0.0
    for a, b in ((1, 2), (2, 3), (3, 1)):
        x, y = params.J_pair(a, b), params.J_pair_from_J(a, b)
        out = max(out, abs(x - y) / abs(x))
    return out


# --------------------------------------------------------------------------
# operator algebra


class Operator:
    """A linear operator on functions of one complex variable."""

    def __call__(self, f: Fn) -> Fn:
        raise NotImplementedError

    def __matmul__(self, other: Operator) -> Operator:
        return _Composite(lambda f: self(other(f)))

    def __add__(self, other: Operator) -> Operator:
        return _Composite(lambda f: (lambda u: self(f)(u) + other(f)(u)))

    def __sub__(self, other: Operator) -> Operator:
        return _Composite(lambda f: (lambda u: self(f)(u) - other(f)(u)))

    def __rmul__(self, c) -> Operator:
        return _Composite(lambda f: (lambda u: c * self(f)(u)))

    def __neg__(self) -> Operator:
        return (-1) * self


class _Composite(Operator):
    def __init__(self, act):
        self._act = act

    def __call__(self, f):
        return self._act(f)


def commutator(A: Operator, B: Operator) -> Operator:
    return A @ B - B @ A


def anticommutator(A: Operator, B: Operator) -> Operator:
    return A @ B + B @ A


@dataclass(frozen=True)
class ShiftOperator1D(Operator):
    """u -> c_plus(u) f(u + shift) + c_minus(u) f(u - shift) + c_zero(u) f(u)."""

    shift: complex
    coeff_plus: Fn
    coeff_minus: Fn
    coeff_zero: Fn | None = None

    def __call__(self, f: Fn) -> Fn:
        h = self.shift

        def g(u):
            out = self.coeff_plus(u) * f(u + h) + self.coeff_minus(u) * f(u - h)
            if self.coeff_zero is not None:
                out += self.coeff_zero(u) * f(u)
            return out

        return g


def _check_pole(den, what="theta_1(2u)"):
    if abs(den) < POLE_TOL:
        raise PoleProximityError(f"{what} vanishes at the evaluation point")
    return den


def s_coefficient(a: int, u, params: SklyaninParams) -> complex:
    """s_a(u) = i^{delta_{a,2}} theta_{a+1}(eta) theta_{a+1}(2u)."""
    if a not in range(4):
        raise InvalidArgumentError("generator index must be 0..3")
    k = a + 1
    pre = 1j if a == 2 else 1
    return pre * params.th(k, params.eta) * params.th(k, 2 * u)


def s_generator(a: int, params: SklyaninParams) -> ShiftOperator1D:
    """S_a = (s_a(u-g) e^{eta d} - s_a(-u-g) e^{-eta d}) / theta_1(2u)."""
    g = params.g
    den = lambda u: _check_pole(params.th(1, 2 * u))
    return ShiftOperator1D(params.eta,
                           lambda u: s_coefficient(a, u - g, params) / den(u),
                           lambda u: -s_coefficient(a, -u - g, params) / den(u))


CYCLIC = ((1, 2, 3), (2, 3, 1), (3, 1, 2))


def _rel(lhs, rhs, scale=None):
    s = max(abs(lhs), abs(rhs)) if scale is None else scale
    return abs(lhs - rhs) / s if s > 0 else abs(lhs - rhs)


def sklyanin_relations_residual(params: SklyaninParams, testfn: Fn, u) -> float:
    """Max over the six quadratic relations, each normalised by its own terms."""
    S = [s_generator(a, params) for a in range(4)]
    worst = 0.0
    for al, be, ga in CYCLIC:
        lhs = commutator(S[al], S[be])(testfn)(u)
        rhs = 1j * anticommutator(S[0], S[ga])(testfn)(u)
        worst = max(worst, _rel(lhs, rhs))
        lhs = commutator(S[0], S[al])(testfn)(u)
        rhs = 1j * params.J_pair(be, ga) * anticommutator(S[be], S[ga])(testfn)(u)
        worst = max(worst, _rel(lhs, rhs))
    return worst


def casimir_values(params: SklyaninParams):
    g, eta, th1 = params.g, params.eta, lambda x: params.th(1, x)
    return 4 * th1(2 * g + eta) ** 2, 4 * th1(2 * g) * th1(2 * g + 2 * eta)


def casimir_residuals(params: SklyaninParams, testfn: Fn, u):
    """Residuals of sum S_a^2 = K0 and sum_{a>0} J_a S_a^2 = K2 on testfn at u."""
    S = [s_generator(a, params) for a in range(4)]
    k0, k2 = casimir_values(params)
    f0 = testfn(u)
    c0 = sum(((S[a] @ S[a])(testfn)(u) for a in range(4)), 0j)
    c2 = sum((params.J(a) * (S[a] @ S[a])(testfn)(u) for a in range(1, 4)), 0j)
    return _rel(c0, k0 * f0), _rel(c2, k2 * f0)


# --------------------------------------------------------------------------
# the Delta operator


def _check_sum(a, params, target=None):
    a = [complex(x) for x in a]
    if len(a) != 4:
        raise InvalidArgumentError("four parameters expected")
    target = -4 * params.g if target is None else target
    if abs(sum(a) - target) > 1e-12 * max(1.0, abs(target)):
        raise InvalidArgumentError(f"need a1 + a2 + a3 + a4 = {target}")
    return a


def delta_operator(a, params: SklyaninParams, check: bool = True) -> ShiftOperator1D:
    """prod theta_1(a_j + u)/theta_1(2u) e^{eta d} + prod theta_1(a_j - u)/theta_1(-2u) e^{-eta d}."""
    a = _check_sum(a, params) if check else [complex(x) for x in a]
    th1 = lambda x: params.th(1, x)
    return ShiftOperator1D(params.eta,
                           lambda u: np.prod([th1(x + u) for x in a]) / _check_pole(th1(2 * u)),
                           lambda u: np.prod([th1(x - u) for x in a]) / _check_pole(th1(-2 * u)))


def delta_combination(a, params: SklyaninParams) -> Operator:
    """The linear combination of S_0..S_3 that equals 2 Delta(a)."""
    a = _check_sum(a, params)
    tau, eta, g = params.tau, params.eta, params.g
    th1 = lambda x: params.th(1, x)
    S = [s_generator(k, params) for k in range(4)]
    P3 = lambda sh: np.prod([th1(a[j] + a[3] + 2 * g + sh) for j in range(3)])
    ph = _exp(1j * PI * (tau / 2 + 2 * a[3] + 2 * g - eta))
    c = [P3(0) / th1(eta),
         -P3(0.5) / th1(eta + 0.5),
         -1j * ph * P3((1 + tau) / 2) / th1(eta + (1 + tau) / 2),
         ph * P3(tau / 2) / th1(eta + tau / 2)]
    return c[0] * S[0] + c[1] * S[1] + c[2] * S[2] + c[3] * S[3]


def delta_equivalence_residual(a, params: SklyaninParams, testfn: Fn, u) -> float:
    lhs = delta_combination(a, params)(testfn)(u)
    rhs = 2 * delta_operator(a, params)(testfn)(u)
    return _rel(lhs, rhs)


def s_as_delta(k: int, params: SklyaninParams):
    """(constant, a) with S_k = constant * Delta(a)."""
    tau, eta, g, chi = params.tau, params.eta, params.g, params.chi
    th1 = lambda x: params.th(1, x)
    e = _exp(1j * PI * eta)
    table = {
        0: (chi * th1(eta), [-g, 0.5 - g, tau / 2 - g, -(1 + tau) / 2 - g]),
        1: (-chi * th1(eta + 0.5), [0.25 - g, -0.25 - g, 0.25 + tau / 2 - g, -0.25 - tau / 2 - g]),
        2: (chi * e * th1(eta + (1 + tau) / 2), [(1 + tau) / 4 - g, (1 - tau) / 4 - g, (tau - 1) / 4 - g, -(1 + tau) / 4 - g]),
        3: (chi * e * th1(eta + tau / 2), [tau / 4 - g, -tau / 4 - g, 0.5 + tau / 4 - g, -0.5 - tau / 4 - g]),
    }
    if k not in table:
        raise InvalidArgumentError("generator index must be 0..3")
    return table[k]


def s_as_delta_residual(k: int, params: SklyaninParams, testfn: Fn, u) -> float:
    const, a = s_as_delta(k, params)
    return _rel(s_generator(k, params)(testfn)(u), const * delta_operator(a, params)(testfn)(u))


def delta_bridge_residual(a, params: SklyaninParams, testfn: Fn, u) -> float:
    """Delta(a) against (i p^{1/8} (p;p))^3 e^{4 pi i g} D(e(a_1..a_4); p; q) in additive form."""
    a = _check_sum(a, params)
    p = params.p
    z = _exp(2j * PI * u)
    A = [_exp(2j * PI * x) for x in a]
    from .theta import theta_short
    t = lambda *xs: np.prod([theta_short(x, p) for x in xs])
    d = (t(*[x * z for x in A]) / (z * t(z * z)) * testfn(u + params.eta)
         + t(*[x / z for x in A]) / (t(z ** -2) / z) * testfn(u - params.eta))
    pp = complex(qpochhammer_infinite(p, p))
    rhs = (1j * _exp(1j * PI * params.tau / 4) * pp) ** 3 * _exp(4j * PI * params.g) * d
    return _rel(delta_operator(a, params)(testfn)(u), rhs)


# --------------------------------------------------------------------------
# modular doubles

DOUBLES = ("tau_eta_swap", "omega_swap")
COMMUTING = {"tau_eta_swap": ({0, 3}, {1, 2}), "omega_swap": ({0, 1}, {2, 3})}


def s_tilde_generator(a: int, params: SklyaninParams, double: str) -> ShiftOperator1D:
    """The partner generator S~_a of one of the two modular doubles."""
    if a not in range(4):
        raise InvalidArgumentError("generator index must be 0..3")
    k, g, eta, tau = a + 1, params.g, params.eta, params.tau
    pre = 1j if a == 2 else 1
    th = lambda j, x, t: complex(jacobi_theta(j, x, t))
    if double == "tau_eta_swap":
        if complex(eta).imag <= 0:
            raise InvalidRegimeError("the tau <-> 2 eta double needs Im(eta) > 0")
        t2 = 2 * eta
        c = pre * th(k, tau / 2, t2)
        den = lambda u: _check_pole(th(1, 2 * u, t2))
        return ShiftOperator1D(tau / 2,
                               lambda u: c * th(k, 2 * u - 2 * g, t2) / den(u),
                               lambda u: -c * th(k, -2 * u - 2 * g, t2) / den(u))
    if double == "omega_swap":
        tt = tau / (2 * eta)
        if tt.imag <= 0:
            raise InvalidRegimeError("the omega double needs Im(tau / 2 eta) > 0")
        c = pre * th(k, 1 / (4 * eta), tt)
        den = lambda u: _check_pole(th(1, u / eta, tt))
        return ShiftOperator1D(0.5,
                               lambda u: c * th(k, (u - g) / eta, tt) / den(u),
                               lambda u: -c * th(k, (-u - g) / eta, tt) / den(u))
    raise InvalidArgumentError(f"double must be one of {DOUBLES}")


def swap_tau_eta(params: SklyaninParams) -> SklyaninParams:
    """(eta, tau) -> (tau/2, 2 eta); an involution."""
    return SklyaninParams(params.tau / 2, 2 * params.eta, params.g)


def cross_sign(a: int, b: int, double: str) -> int:
    """+1 where S_a and S~_b commute, -1 where they anticommute."""
    return 1 if any(a in grp and b in grp for grp in COMMUTING[double]) else -1


def cross_commutation_residual(a: int, b: int, params: SklyaninParams, double: str, testfn: Fn, u) -> float:
    S, St = s_generator(a, params), s_tilde_generator(b, params, double)
    ab, ba = (S @ St)(testfn)(u), (St @ S)(testfn)(u)
    scale = max(abs(ab), abs(ba))
    return abs(ab - cross_sign(a, b, double) * ba) / scale if scale > 0 else 0.0


# --------------------------------------------------------------------------
# U_q(sl2) and its modular partner


@dataclass(frozen=True)
class UqOps:
    k: Operator
    k_inv: Operator
    E: Operator
    F: Operator
    kt: Operator
    kt_inv: Operator
    Et: Operator
    Ft: Operator
    q_half: complex
    qt_half: complex


def _shift(c, h) -> ShiftOperator1D:
    return ShiftOperator1D(h, lambda u: c, lambda u: 0.0)


def uq_sl2_ops(params: SklyaninParams) -> UqOps:
    """k, E, F with q^{1/2} = e^{2 pi i eta} and the partner triple with q~^{1/2} = e^{-pi i / 2 eta}."""
    eta, g = params.eta, params.g
    qh = _exp(2j * PI * eta)
    if abs(qh - 1 / qh) < POLE_TOL:
        raise DegenerateError("q^{1/2} - q^{-1/2} vanishes")
    c = _exp(1j * PI / (2 * eta))
    if abs(c - 1 / c) < POLE_TOL:
        raise DegenerateError("q~^{1/2} - q~^{-1/2} vanishes")
    e = lambda x: _exp(2j * PI * x)
    k = _shift(_exp(-2j * PI * g), eta)
    k_inv = _shift(_exp(2j * PI * g), -eta)
    F = ShiftOperator1D(eta, lambda u: -e(-u) / (qh - 1 / qh), lambda u: e(-u) / (qh - 1 / qh))
    E = ShiftOperator1D(eta, lambda u: -e(u) * e(-2 * g) / (1 / qh - qh), lambda u: e(u) * e(2 * g) / (1 / qh - qh))
    kt = _shift(_exp(-1j * PI * g / eta), 0.5)
    kt_inv = _shift(_exp(1j * PI * g / eta), -0.5)
    et = lambda x: _exp(1j * PI * x / eta)
    Ft = ShiftOperator1D(0.5, lambda u: -et(-u) / (c - 1 / c), lambda u: et(-u) / (c - 1 / c))
    Et = ShiftOperator1D(0.5, lambda u: -et(u) * et(-2 * g) / (1 / c - c), lambda u: et(u) * et(2 * g) / (1 / c - c))
    return UqOps(k, k_inv, E, F, kt, kt_inv, Et, Ft, qh, _exp(-1j * PI / (2 * eta)))


def uq_relations(params: SklyaninParams) -> dict[str, tuple[Operator, Operator]]:
    """Named relations as (lhs, rhs) operator pairs."""
    o = uq_sl2_ops(params)
    qh, qth = o.q_half, o.qt_half
    K, Kt = o.k @ o.k, o.kt @ o.kt
    rel = {
        "kE": (o.k @ o.E, qh * (o.E @ o.k)),
        "kF": (o.k @ o.F, (1 / qh) * (o.F @ o.k)),
        "EF": (commutator(o.E, o.F), (1 / (qh - 1 / qh)) * (K - o.k_inv @ o.k_inv)),
        "ktEt": (o.kt @ o.Et, (1 / qth) * (o.Et @ o.kt)),
        "ktFt": (o.kt @ o.Ft, qth * (o.Ft @ o.kt)),
        "EtFt": (commutator(o.Et, o.Ft), (1 / (1 / qth - qth)) * (Kt - o.kt_inv @ o.kt_inv)),
    }
    for name, A, B in (("kFt", o.k, o.Ft), ("kEt", o.k, o.Et), ("ktF", o.kt, o.F), ("ktE", o.kt, o.E)):
        rel["anti_" + name] = (A @ B, -(B @ A))
    for name, A, B in (("KEt", K, o.Et), ("KFt", K, o.Ft), ("KKt", K, Kt), ("EEt", o.E, o.Et),
                       ("FFt", o.F, o.Ft), ("EFt", o.E, o.Ft), ("FEt", o.F, o.Et), ("KtE", Kt, o.E), ("KtF", Kt, o.F)):
        rel["comm_" + name] = (A @ B, B @ A)
    return rel


def uq_relations_residual(params: SklyaninParams, testfn: Fn, u, names=None) -> dict[str, float]:
    """Per-relation residuals, normalised by max(|lhs|, |rhs|, |testfn(u)|).

    The floor matters when a test function lies in the kernel of one of the
    operators (e^{2 pi i u} + 1 is annihilated by F~): both sides are then
    rounding noise and a purely relative measure is meaningless.
    """
    out = {}
    floor = abs(testfn(u))
    for name, (lhs, rhs) in uq_relations(params).items():
        if names is not None and name not in names:
            continue
        l, r = lhs(testfn)(u), rhs(testfn)(u)
        out[name] = _rel(l, r, max(abs(l), abs(r), floor))
    return out
