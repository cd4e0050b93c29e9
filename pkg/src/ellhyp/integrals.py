"""Elliptic hypergeometric integrals I^(m), the V-function and its identities.

All integrals are taken over the unit circle; every parameter set that enters
a quadrature is checked against the pole margin of the supplied spec first.
Residual functions return :class:`~ellhyp.quadrature.Residual` values, i.e.
floats normalised by the largest single term of the relation.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations

import numpy as np

from .errors import DegenerateError, InadmissibleError, InvalidArgumentError
from .gamma import BasePair, gamma_pq
from .quadrature import (
    DEFAULT_SPEC,
    QuadratureResult,
    QuadratureSpec,
    Residual,
    circle_mean,
    circle_mean_batch,
    contour_factor,
    pole_margin_check,
    weight,
)
from .theta import theta_short

BALANCE_RTOL = 1e-12
DEGENERATE_TOL = 1e-10
V_SPEC = QuadratureSpec(n0=256, n_max=8192, rtol=1e-13)


def _vec(t) -> np.ndarray:
    return np.asarray([complex(x) for x in t], dtype=np.complex128)


def _check_balance(t, target, what="balancing"):
    prod = complex(np.prod(_vec(t)))
    if abs(prod - target) > BALANCE_RTOL * abs(target):
        raise InvalidArgumentError(f"{what} violated: prod t = {prod}, expected {target}")


def _th(bases, *zs):
    out = 1.0 + 0.0j
    for z in zs:
        out *= theta_short(z, bases.p)
    return out


def _g(bases, *zs):
    out = 1.0 + 0.0j
    for z in zs:
        out *= gamma_pq(z, bases)
    return out


def _nonzero(val, what):
    if abs(val) < DEGENERATE_TOL:
        raise DegenerateError(f"{what} vanishes ({abs(val):.2e})")
    return val


def balance_last(t_head, target) -> np.ndarray:
    """Append the parameter fixed by prod t = target."""
    head = _vec(t_head)
    return np.append(head, complex(target) / complex(np.prod(head)))


@dataclass(frozen=True)
class BalancedParams:
    m: int
    t: tuple
    bases: BasePair = field(default_factory=BasePair)

    def __post_init__(self):
        object.__setattr__(self, "t", tuple(complex(x) for x in self.t))
        if self.m < 0 or len(self.t) != 2 * self.m + 6:
            raise InvalidArgumentError(f"I^({self.m}) takes {2 * self.m + 6} parameters, got {len(self.t)}")
        _check_balance(self.t, self.bases.pq ** (self.m + 1))

    @property
    def epsilon(self) -> complex:
        """sqrt(prod of the last four t / pq), the Bailey-step scaling (principal branch)."""
        return cmath.sqrt(complex(np.prod(self.t[-4:])) / self.bases.pq)


@dataclass(frozen=True)
class EhParams:
    """Eight parameters with the balancing constant of a particular relation."""

    t: tuple
    balance: complex
    bases: BasePair = field(default_factory=BasePair)

    def __post_init__(self):
        object.__setattr__(self, "t", tuple(complex(x) for x in self.t))
        if len(self.t) != 8:
            raise InvalidArgumentError("eight parameters expected")
        _check_balance(self.t, self.balance)

    @property
    def T(self) -> complex:
        return complex(np.prod(self.t[:4]))

    @property
    def U(self) -> complex:
        return complex(np.prod(self.t[4:]))

    @property
    def epsilon(self) -> complex:
        return cmath.sqrt(self.bases.pq / self.T)


@dataclass(frozen=True)
class EpsilonParams:
    """The eight parameters of the operator D_x, balanced to p^2 q^2."""

    eps: tuple
    bases: BasePair = field(default_factory=BasePair)

    def __post_init__(self):
        object.__setattr__(self, "eps", tuple(complex(x) for x in self.eps))
        if len(self.eps) != 8:
            raise InvalidArgumentError("eight parameters expected")
        _check_balance(self.eps, self.bases.pq ** 2)

    def A(self, x):
        x = np.asarray(x, dtype=np.complex128)
        p, q = self.bases.p, self.bases.q
        num = 1.0 + 0.0j
        for e in self.eps:
            num = num * theta_short(e * x, p)
        return num / (theta_short(x * x, p) * theta_short(q * x * x, p))

    @cached_property
    def nu(self) -> complex:
        e8, q = self.eps[7], self.bases.q
        return complex(np.prod([theta_short(e * e8 / q, self.bases.p) for e in self.eps[:6]]))

    def alpha(self, x):
        x = np.asarray(x, dtype=np.complex128)
        out = 1.0 + 0.0j
        for e in self.eps:
            out = out * gamma_pq(e * x, self.bases) * gamma_pq(e / x, self.bases)
        return out

    @property
    def c(self) -> complex:
        return cmath.sqrt(self.eps[5] * self.eps[7]) / self.bases.p ** 2


def epsilon_from_t(t6, c, bases: BasePair = BasePair()) -> EpsilonParams:
    """(t_1..t_6, c) -> epsilon, with eps_7 = eps_8 / q."""
    t6 = _vec(t6)
    if len(t6) != 6:
        raise InvalidArgumentError("six t-parameters expected")
    p, q = bases.p, bases.q
    eps = [q / (c * t6[k]) for k in range(5)]
    eps += [c * t6[5] * p ** 4, c / (q * t6[5]), c / t6[5]]
    return EpsilonParams(tuple(eps), bases)


def t_from_epsilon(ep: EpsilonParams, c=None):
    """Inverse of :func:`epsilon_from_t`; ``c`` fixes the square-root branch."""
    p, q = ep.bases.p, ep.bases.q
    if abs(ep.eps[6] * q - ep.eps[7]) > 1e-12 * abs(ep.eps[7]):
        raise InvalidArgumentError("epsilon set is not in the image of the t-map (eps_7 != eps_8 / q)")
    if c is None:
        c = ep.c
    elif abs(c * c * p ** 4 - ep.eps[5] * ep.eps[7]) > 1e-12 * abs(ep.eps[5] * ep.eps[7]):
        raise InvalidArgumentError("c is inconsistent with eps_6 eps_8")
    t = [q / (c * ep.eps[k]) for k in range(5)] + [c / ep.eps[7]]
    return np.asarray(t), c


# --------------------------------------------------------------------------
# integrals


def elliptic_beta_closed(t, bases: BasePair = BasePair()) -> complex:
    """prod_{j<k} Gamma(t_j t_k), the value of I^(0)."""
    t = _vec(t)
    if len(t) != 6:
        raise InvalidArgumentError("six parameters expected")
    _check_balance(t, bases.pq)
    return complex(np.prod(gamma_pq(np.array([a * b for a, b in combinations(t, 2)]), bases)))


def integrand_batch(T, bases: BasePair):
    """z -> (M, N) array of prod_j Gamma(t_j z^{+-}) / Gamma(z^{+-2}) for rows of T."""
    T = np.atleast_2d(np.asarray(T, dtype=np.complex128))

    def f(z):
        m, k = T.shape
        args = np.concatenate([(T[:, :, None] * z).ravel(), (T[:, :, None] / z).ravel()])
        g = gamma_pq(args, bases).reshape(2, m, k, z.size)
        return np.prod(g[0] * g[1], axis=1) * weight(z, bases)[None, :]

    return f


def _admissible(t, spec, what="parameters"):
    if not pole_margin_check(t, spec.delta_margin):
        worst = max(abs(complex(x)) for x in t)
        raise InadmissibleError(
            f"{what} outside the pole margin: max |t| = {worst:.4f} > {1 - spec.delta_margin}")


def ihm_integral(params: BalancedParams, spec: QuadratureSpec = DEFAULT_SPEC) -> QuadratureResult:
    """kappa \\oint prod Gamma(t_j z^{+-}) / Gamma(z^{+-2}) dz/z."""
    _admissible(params.t, spec)
    f = integrand_batch([params.t], params.bases)
    res = circle_mean(lambda z: f(z)[0], spec)
    c = contour_factor(params.bases)
    return QuadratureResult(c * res.value, res.error_estimate, res.nodes_used, res.converged,
                            tuple((n, c * v) for n, v in res.history))


def v_quadrature(t, bases: BasePair = BasePair(), spec: QuadratureSpec = V_SPEC) -> QuadratureResult:
    t = _vec(t)
    if len(t) != 8:
        raise InvalidArgumentError("V takes eight parameters")
    return ihm_integral(BalancedParams(1, tuple(t), bases), spec)


def v_function(t, bases: BasePair = BasePair(), spec: QuadratureSpec = V_SPEC) -> complex:
    """The elliptic analogue of the Gauss hypergeometric function, V = I^(1)."""
    return v_quadrature(t, bases, spec).value


def ihm_batch(T, bases: BasePair = BasePair(), spec: QuadratureSpec = V_SPEC, check=True):
    """Integrals for many parameter rows at once (shared nodes, joint doubling).

    Rows need not be balanced; nested kernels feed unbalanced intermediate
    sets through here. Returns (values, QuadratureResult-like stats).
    """
    T = np.atleast_2d(np.asarray(T, dtype=np.complex128))
    if check:
        for row in T:
            _admissible(row, spec)
    vals, err, n, conv = circle_mean_batch(integrand_batch(T, bases), spec)
    stats = QuadratureResult(complex(vals[0]) if vals.size else 0j, err, n, conv)
    return contour_factor(bases) * vals, stats


def ihm_continued(t, bases: BasePair = BasePair(), spec: QuadratureSpec = V_SPEC,
                  residue_nodes: int = 64) -> QuadratureResult:
    """I^(m) continued to parameters with |t_j| > 1 by adding crossed residues.

    Each pole t_j p^a q^b of Gamma(t_j/z) that lies outside the unit circle is
    picked up together with its mirror image 1/(t_j p^a q^b); by the z -> 1/z
    symmetry of the integrand the pair contributes twice the outer residue.
    Residues come from a trapezoid rule on a small circle around the pole.
    Assumes the crossed poles are simple and stay off the unit circle.
    """
    t = _vec(t)
    p, q = complex(bases.p), complex(bases.q)
    f = integrand_batch([t], bases)
    res = circle_mean(lambda z: f(z)[0], spec)
    value = contour_factor(bases) * res.value
    poles = []
    for tj in t:
        a = 0
        while abs(tj * p ** a) > 1:
            b = 0
            while abs(tj * p ** a * q ** b) > 1:
                poles.append(tj * p ** a * q ** b)
                b += 1
            a += 1
    if poles:
        singular = []
        for tk in t:
            for a in range(6):
                for b in range(6):
                    z = tk * p ** a * q ** b
                    singular += [z, 1 / z]
        singular = np.asarray(singular)
        ring = np.exp(2j * np.pi * np.arange(residue_nodes) / residue_nodes)
        for z0 in poles:
            if abs(abs(z0) - 1) < spec.delta_margin:
                raise InadmissibleError(f"pole {z0} sits on the integration contour")
            d = np.abs(singular - z0)
            d = d[d > 1e-12 * abs(z0)]
            r = 0.3 * min(d.min(), abs(z0) - 1, abs(z0))
            zz = z0 + r * ring
            res_val = np.mean(f(zz)[0] / zz * r * ring)
            value += 2 * contour_factor(bases) * res_val
    return QuadratureResult(complex(value), res.error_estimate, res.nodes_used, res.converged)


# --------------------------------------------------------------------------
# Bailey step and E7 transformations


def bailey_step_residual(t, bases: BasePair = BasePair(), spec: QuadratureSpec = V_SPEC) -> Residual:
    """I^(1)(t) against the recursion with I^(0) replaced by its product formula."""
    t = _vec(t)
    bp = BalancedParams(1, tuple(t), bases)
    eps = bp.epsilon
    _admissible(t[4:] / eps, spec, "t_k / epsilon")
    _admissible(t[:4] * eps, spec, "epsilon t_k")
    lhs = ihm_integral(bp, spec)
    pre = _g(bases, *[t[k] * t[l] for k, l in combinations(range(4, 8), 2)]) / _g(bases, eps ** 2)
    i0 = _g(bases, *[t[j] * t[k] for j, k in combinations(range(4), 2)]) * _g(bases, eps ** 2)
    row = np.concatenate([t[4:] / eps, t[:4] * eps])
    vals, stats = ihm_batch([row], bases, spec)
    rhs = pre * i0 * vals[0]
    return Residual.of(lhs.value - rhs, [lhs.value, rhs], [lhs, stats])


def bailey_step_m1_residual(t, bases: BasePair = BasePair(),
                            outer_spec: QuadratureSpec = QuadratureSpec(n0=128, n_max=512, rtol=1e-9),
                            inner_spec: QuadratureSpec = QuadratureSpec(n0=256, n_max=1024, rtol=1e-10)) -> Residual:
    """I^(2)(t_1..t_10) against the recursion carrying a nested V quadrature."""
    t = _vec(t)
    bp = BalancedParams(2, tuple(t), bases)
    eps = bp.epsilon
    _admissible(t[6:] / eps, outer_spec, "t_k / epsilon")
    _admissible(t[:6] * eps, inner_spec, "epsilon t_k")
    lhs = ihm_integral(bp, inner_spec)
    pre = _g(bases, *[t[k] * t[l] for k, l in combinations(range(6, 10), 2)]) / _g(bases, eps ** 2)
    stats = []

    def outer(w):
        rows = np.array([np.concatenate([t[:6], [eps * wi, eps / wi]]) for wi in w])
        vals, st = ihm_batch(rows, bases, inner_spec, check=False)
        stats.append(st)
        g = np.ones_like(w)
        for tk in t[6:]:
            g = g * gamma_pq(tk / eps * w, bases) * gamma_pq(tk / (eps * w), bases)
        return g * weight(w, bases) * vals

    res = circle_mean(outer, outer_spec)
    rhs = pre * contour_factor(bases) * res.value
    return Residual.of(lhs.value - rhs, [lhs.value, rhs], [lhs, res] + stats)


E7_KINDS = ("first", "second", "third")


def e7_transforms(t, which: str, bases: BasePair = BasePair(), spec: QuadratureSpec = V_SPEC,
                  check: bool = True):
    """Return (t', prefactor) with V(t) = prefactor * V(t').

    ``second`` uses sqrt(T) on the principal branch and sqrt(U) = pq / sqrt(T);
    the product of the two roots must be pq for the identity to hold.
    """
    t = _vec(t)
    EhParams(tuple(t), bases.pq ** 2, bases)
    pq = bases.pq
    if which == "first":
        eps = cmath.sqrt(pq / complex(np.prod(t[:4])))
        tp = np.concatenate([eps * t[:4], t[4:] / eps])
        pref = _g(bases, *[t[k] * t[l] for k, l in combinations(range(4), 2)],
                  *[t[k + 4] * t[l + 4] for k, l in combinations(range(4), 2)])
    elif which == "second":
        sT = cmath.sqrt(complex(np.prod(t[:4])))
        sU = pq / sT
        tp = np.concatenate([sT / t[:4], sU / t[4:]])
        pref = _g(bases, *[t[j] * t[k + 4] for j in range(4) for k in range(4)])
    elif which == "third":
        tp = cmath.sqrt(pq) / t
        pref = _g(bases, *[a * b for a, b in combinations(t, 2)])
    else:
        raise InvalidArgumentError(f"unknown transformation {which!r}; expected one of {E7_KINDS}")
    if check:
        try:
            _admissible(tp, spec, "transformed parameters")
        except InadmissibleError as exc:
            raise InadmissibleError(f"inadmissible image: {exc}") from None
    return tp, pref


def v_rows_admissible(rows, bases: BasePair = BasePair(), spec: QuadratureSpec = V_SPEC):
    """Map each row of V parameters into the pole margin, using an E7 move if needed.

    Returns (rows', prefactors) with V(row) = prefactor * V(row'). V is also
    invariant under a global sign flip of its parameters, so branch choices
    inside the transformations do not matter.
    """
    rows = np.atleast_2d(np.asarray(rows, dtype=np.complex128))
    out, pref = rows.copy(), np.ones(len(rows), dtype=np.complex128)
    for i, row in enumerate(rows):
        if pole_margin_check(row, spec.delta_margin):
            continue
        for kind in E7_KINDS:
            try:
                tp, pf = e7_transforms(row, kind, bases, spec)
            except InadmissibleError:
                continue
            out[i], pref[i] = tp, pf
            break
        else:
            raise InadmissibleError(
                f"V parameters outside the pole margin and no E7 image is admissible (max |t| = {np.abs(row).max():.3f})")
    return out, pref


def e7_residual(t, which: str, bases: BasePair = BasePair(), spec: QuadratureSpec = V_SPEC) -> Residual:
    tp, pref = e7_transforms(t, which, bases, spec)
    a = v_quadrature(t, bases, spec)
    b = v_quadrature(tp, bases, spec)
    return Residual.of(a.value - pref * b.value, [a.value, pref * b.value], [a, b])


# --------------------------------------------------------------------------
# contiguous relations


def _shift(t, **factors):
    t = _vec(t).copy()
    for k, v in factors.items():
        t[int(k[1:]) - 1] *= v
    return t


def _vs(sets, bases, spec):
    """Evaluate V on several parameter sets, checking admissibility of each."""
    for s in sets:
        _admissible(s, spec, "shifted parameter set")
    vals, stats = ihm_batch(np.array(sets), bases, spec, check=False)
    return vals, stats


def contiguous_c1_residual(t, bases: BasePair = BasePair(), spec: QuadratureSpec = V_SPEC) -> Residual:
    """Three-term relation among V(q t_6), V(q t_7), V(q t_8), prod t = p^2 q."""
    t = _vec(t)
    _check_balance(t, bases.p ** 2 * bases.q, "balancing p^2 q")
    q = bases.q
    (v6, v7, v8), st = _vs([_shift(t, t6=q), _shift(t, t7=q), _shift(t, t8=q)], bases, spec)
    t6, t7, t8 = t[5], t[6], t[7]
    a = t7 * _th(bases, t8 * t7, t8 / t7) * v6
    b = -t6 * _th(bases, t8 * t6, t8 / t6) * v7
    c = -t7 * _th(bases, t6 * t7, t6 / t7) * v8
    return Residual.of(a + b + c, [a, b, c], [st])


def eq2_residual(t, bases: BasePair = BasePair(), spec: QuadratureSpec = V_SPEC) -> Residual:
    """Three-term relation among V(q t_7, q t_8), V(q t_6, q t_8), V(q t_6, q t_7), prod t = p^2."""
    t = _vec(t)
    _check_balance(t, bases.p ** 2, "balancing p^2")
    q = bases.q
    sets = [_shift(t, t7=q, t8=q), _shift(t, t6=q, t8=q), _shift(t, t6=q, t7=q)]
    (v78, v68, v67), st = _vs(sets, bases, spec)
    t6, t7, t8 = t[5], t[6], t[7]
    P = [np.prod([theta_short(tj * t[k], bases.p) for k in range(5)]) for tj in (t6, t7, t8)]
    a = t6 * _th(bases, t7 / t8) * P[0] * v78
    b = -t7 * _th(bases, t6 / t8) * P[1] * v68
    c = -t6 * _th(bases, t7 / t6) * P[2] * v67
    return Residual.of(a + b + c, [a, b, c], [st])


def key_cont_residual(t, bases: BasePair = BasePair(), spec: QuadratureSpec = V_SPEC) -> Residual:
    """Relation among V(t), V(t_7/q, q t_8) and V(t_5/q, q t_6), prod t = (pq)^2."""
    t = _vec(t)
    _check_balance(t, bases.pq ** 2)
    q = bases.q
    sets = [t, _shift(t, t7=1 / q, t8=q), _shift(t, t5=1 / q, t6=q)]
    (vt, v78, v56), st = _vs(sets, bases, spec)
    t5, t6, t7, t8 = t[4:]
    th = lambda *z: _th(bases, *z)
    lhs1 = th(t7 * t6 / q, t7 / (t6 * q)) / _nonzero(th(t8 * t6, t8 / t6), "theta(t8 t6^{+-})") * v78
    r1 = (th(t7 / (q * t6), t5 * t8 / q, q * t8 / t7) / th(t8 * t6, t8 / t6, q * t6 / t5)
          * np.prod([th(t5 * t[j] / q) / th(t7 * t[j] / q) for j in range(4)]) * v56)
    r2 = (th(q * t8 / t7, t7 / t5) / th(t8 / t6, q * t6 / t5)
          * np.prod([th(t6 * t[j]) / th(t7 * t[j] / q) for j in range(4)]) * vt)
    return Residual.of(lhs1 - vt - r1 + r2, [lhs1, vt, r1, r2], [st])


def potential_a(t, bases: BasePair = BasePair()) -> complex:
    """The multiplier that turns the contiguous relation into the t7 <-> t8 symmetric equation."""
    t = _vec(t)
    t6, t7, t8 = t[5], t[6], t[7]
    q = bases.q
    th = lambda *z: _th(bases, *z)
    return (th(t8 / (q * t6), t6 * t8, t6 / t8) / _nonzero(th(t8 / t7, t7 / (q * t8), t7 * t8 / q), "potential denominator")
            * np.prod([th(t7 * t[j] / q) / th(t6 * t[j]) for j in range(5)]))


def _swap78(t):
    t = _vec(t).copy()
    t[[6, 7]] = t[[7, 6]]
    return t


def eh_residual(t, bases: BasePair = BasePair(), spec: QuadratureSpec = V_SPEC) -> Residual:
    """The t7 <-> t8 symmetrised equation written directly in V."""
    t = _vec(t)
    _check_balance(t, bases.pq ** 2)
    q = bases.q
    sets = [t, _shift(t, t7=1 / q, t8=q), _shift(t, t7=q, t8=1 / q)]
    (vt, v78, v87), st = _vs(sets, bases, spec)
    t6, t7, t8 = t[5], t[6], t[7]
    th = lambda *z: _th(bases, *z)
    a1 = potential_a(t, bases) * (th(t7 * t6 / q, t7 / (t6 * q)) / th(t8 * t6, t8 / t6) * v78 - vt)
    a2 = potential_a(_swap78(t), bases) * (th(t8 * t6 / q, t8 / (t6 * q)) / th(t7 * t6, t7 / t6) * v87 - vt)
    return Residual.of(a1 + a2 + vt, [a1, a2, vt], [st])


# operator D(t) of the equation in U(t) = V(t) / Gamma(t7 t6^{+-}, t8 t6^{+-})


def _a_coef(t, bases):
    t = _vec(t)
    t6, t7, t8 = t[5], t[6], t[7]
    q = bases.q
    th = lambda *z: _th(bases, *z)
    return (th(t8 / (q * t6), t6 * t8, t6 / t8) / _nonzero(th(t8 / t7, t7 / (q * t8)), "theta(t8/t7, t7/(q t8))")
            * np.prod([th(t7 * t[k] / q) for k in range(5)]))


def _kappa_coef(t, bases):
    t = _vec(t)
    return _th(bases, t[6] * t[7] / bases.q) * np.prod([theta_short(t[5] * t[k], bases.p) for k in range(5)])


def eheq_operator_coefficients(t, bases: BasePair = BasePair()) -> np.ndarray:
    """Coefficients of (T_{x,q}, T_{x,q}^{-1}, 1) in the operator D(t)."""
    a1 = _a_coef(t, bases)
    a2 = _a_coef(_swap78(t), bases)
    return np.array([a1, a2, _kappa_coef(t, bases) - a1 - a2])


def _u_factor(t, bases):
    t = _vec(t)
    t6, t7, t8 = t[5], t[6], t[7]
    return _g(bases, t7 * t6, t7 / t6, t8 * t6, t8 / t6)


def _u_values(t, bases, spec, extra=()):
    """U at (t), (t7/q, q t8), (q t7, t8/q), plus any extra parameter sets."""
    q = bases.q
    sets = [_shift(t, t7=1 / q, t8=q), _shift(t, t7=q, t8=1 / q), _vec(t)] + [_vec(e) for e in extra]
    vals, st = _vs(sets, bases, spec)
    return np.array([v / _u_factor(s, bases) for v, s in zip(vals, sets)]), st


def eheq_params(t6, c, x, bases: BasePair = BasePair()) -> np.ndarray:
    """(t_1..t_6, c, x) -> the eight parameters with t7 = c/x, t8 = c x."""
    t = np.append(_vec(t6), [c / x, c * x])
    _check_balance(t, bases.pq ** 2)
    return t


def eheq_residual(t6, c, x, bases: BasePair = BasePair(), spec: QuadratureSpec = V_SPEC) -> Residual:
    """|D(t) U(t)| over the largest term, U evaluated at x, qx, x/q."""
    t = eheq_params(t6, c, x, bases)
    coefs = eheq_operator_coefficients(t, bases)
    u, st = _u_values(t, bases, spec)
    terms = coefs * u
    return Residual.of(terms.sum(), terms, [st])


def eh_forms_consistency(t6, c, x, bases: BasePair = BasePair()) -> float:
    """Max mismatch between the V-form and the operator form, term by term.

    Both are linear in (V(t7/q, q t8), V(q t7, t8/q), V(t)); the operator form
    times Gamma(t7 t6^{+-}, t8 t6^{+-}) / kappa must reproduce the V-form
    coefficients exactly.
    """
    t = eheq_params(t6, c, x, bases)
    q = bases.q
    th = lambda *z: _th(bases, *z)
    t6_, t7, t8 = t[5], t[6], t[7]
    A1, A2 = potential_a(t, bases), potential_a(_swap78(t), bases)
    eh = np.array([A1 * th(t7 * t6_ / q, t7 / (t6_ * q)) / th(t8 * t6_, t8 / t6_),
                   A2 * th(t8 * t6_ / q, t8 / (t6_ * q)) / th(t7 * t6_, t7 / t6_),
                   1 - A1 - A2])
    coefs = eheq_operator_coefficients(t, bases)
    sets = [_shift(t, t7=1 / q, t8=q), _shift(t, t7=q, t8=1 / q), t]
    ut = _u_factor(t, bases)
    op = np.array([coefs[k] / _u_factor(s, bases) * ut for k, s in enumerate(sets)]) / _kappa_coef(t, bases)
    return float(np.max(np.abs(op - eh)) / np.max(np.abs(eh)))


def other_solution_params(t, j: int, bases: BasePair = BasePair()) -> np.ndarray:
    """Parameters of another solution of the equation: t_j -> p t_j (j = 1..5), t6 -> t6/p."""
    if not 1 <= j <= 5:
        raise InvalidArgumentError("j must lie in 1..5")
    t = _vec(t).copy()
    t[j - 1] *= bases.p
    t[5] /= bases.p
    return t


def _rep34(t, a, b):
    t = _vec(t).copy()
    t[2], t[3] = a, b
    return t


def op_ident_residual(t, t3p, t4p, t3pp, t4pp, bases: BasePair = BasePair()) -> float:
    """Max coefficient residual of the three-operator identity (pure theta arithmetic)."""
    t = _vec(t)
    for a, b in ((t3p, t4p), (t3pp, t4pp)):
        if abs(a * b - t[2] * t[3]) > 1e-12 * abs(t[2] * t[3]):
            raise InvalidArgumentError("need t3 t4 = t3' t4' = t3'' t4''")
    if abs(t3pp - t3p) < DEGENERATE_TOL * abs(t3p) or abs(t3pp - t4p) < DEGENERATE_TOL * abs(t3p):
        raise DegenerateError("t'' coincides with t'; the identity collapses to 0 = 0")
    t3 = t[2]
    th = lambda *z: _th(bases, *z)
    den = _nonzero(th(t3 / t3pp, t3 / t4pp), "theta(t3/t3'', t3/t4'')")
    c1 = eheq_operator_coefficients(_rep34(t, t3p, t4p), bases)
    c2 = eheq_operator_coefficients(_rep34(t, t3pp, t4pp), bases)
    c0 = eheq_operator_coefficients(t, bases)
    lhs = c1 - th(t3 / t3p, t3 / t4p) / den * c2
    rhs = t3 / t3p * th(t3p / t3pp, t3p / t4pp) / den * c0
    return float(np.max(np.abs(lhs - rhs) / np.maximum(np.abs(rhs), np.abs(lhs))))


def key_eheq_coefficients(t, bases: BasePair = BasePair(), as_printed: bool = False):
    """(alpha, beta) with D(t') U(t) / theta(t3/t3', t3/t4') = alpha U(t5/q, q t6) - beta U(t).

    The corrected alpha omits a theta(t7 t8 / q; p) factor that the printed
    display carries in its numerator; ``as_printed=True`` keeps it.
    """
    t = _vec(t)
    t1, t2, t3, t4, t5, t6, t7, t8 = t
    q = bases.q
    th = lambda *z: _th(bases, *z)
    alpha = (t4 * t6 * th(t3 * t4 * t7 * t8 / q ** 2, t7 * t6, t8 * t6)
             / th(t3 * t7 / q, t3 * t8 / q, t4 * t7 / q, t4 * t8 / q, q * t6 / t5)
             * np.prod([th(t5 * t[j] / q) for j in (0, 1, 2, 3, 6, 7)]))
    if as_printed:
        alpha *= th(t7 * t8 / q)
    beta = (th(q * t6 / t8) * np.prod([th(t6 * t[j]) for j in range(4)]) / th(t3 * t8 / q, q / (t4 * t8))
            * (th(t6 * t8, t7 / t5, t5 * t7 / q, t3 * t4 * t7 * t8 / q ** 2) / th(q * t6 / t5, t3 * t7 / q, t4 * t7 / q)
               - th(t7 * t8 / q, t5 * t6, t3 * t4 * t6 * t8 / q) / th(t3 * t6, t4 * t6)))
    return alpha, beta


def key_eheq_residual(t, t3p, t4p, bases: BasePair = BasePair(), spec: QuadratureSpec = V_SPEC,
                      as_printed: bool = False) -> Residual:
    t = _vec(t)
    _check_balance(t, bases.pq ** 2)
    if abs(t3p * t4p - t[2] * t[3]) > 1e-12 * abs(t[2] * t[3]):
        raise InvalidArgumentError("need t3 t4 = t3' t4'")
    den = _nonzero(_th(bases, t[2] / t3p, t[2] / t4p), "theta(t3/t3', t3/t4')")
    q = bases.q
    u, st = _u_values(t, bases, spec, extra=[_shift(t, t5=1 / q, t6=q)])
    lhs_terms = eheq_operator_coefficients(_rep34(t, t3p, t4p), bases) * u[:3] / den
    alpha, beta = key_eheq_coefficients(t, bases, as_printed)
    r1, r2 = alpha * u[3], beta * u[2]
    return Residual.of(lhs_terms.sum() - r1 + r2, [*lhs_terms, r1, r2], [st])


def key_eheq_ratio(t, t3p, t4p, bases: BasePair = BasePair(), spec: QuadratureSpec = V_SPEC) -> QuadratureResult:
    """D(t') U(t) / theta(t3/t3', t3/t4'), which should not depend on t3'."""
    t = _vec(t)
    den = _nonzero(_th(bases, t[2] / t3p, t[2] / t4p), "theta(t3/t3', t3/t4')")
    u, st = _u_values(t, bases, spec)
    val = complex(np.sum(eheq_operator_coefficients(_rep34(t, t3p, t4p), bases) * u) / den)
    return QuadratureResult(val, st.error_estimate, st.nodes_used, st.converged)


# --------------------------------------------------------------------------
# the operator D_x in epsilon notation and its conjugate


def _check_point(vals, what="coefficient"):
    if not np.all(np.isfinite(vals)):
        from .errors import PoleProximityError
        raise PoleProximityError(f"{what} not finite at the evaluation point")
    return vals


def dx_operator_apply(ep: EpsilonParams, f, x):
    """A(x)(f(qx) - f(x)) + A(1/x)(f(x/q) - f(x)) + nu f(x)."""
    q = ep.bases.q
    x = np.asarray(x, dtype=np.complex128)
    a1, a2 = ep.A(x), ep.A(1 / x)
    _check_point(np.asarray([a1, a2]))
    fx = f(x)
    out = a1 * (f(q * x) - fx) + a2 * (f(x / q) - fx) + ep.nu * fx
    return complex(out) if np.ndim(out) == 0 else out


def dx_conjugate_apply(ep: EpsilonParams, f, x):
    """alpha(x) D_x(alpha^{-1} f)(x)."""
    g = lambda y: f(y) / ep.alpha(y)
    return ep.alpha(x) * dx_operator_apply(ep, g, x)


def _dx_weighted(ep: EpsilonParams, f, x):
    """D_x f times the weight 1/Gamma(x^{+-2}), with the double zero at x = +-1 cancelled."""
    p, q = ep.bases.p, ep.bases.q

    def aw(y):
        num = 1.0 + 0.0j
        for e in ep.eps:
            num = num * theta_short(e * y, p)
        return -y ** -2 * num * theta_short(y * y, q) / theta_short(q * y * y, p)

    fx = f(x)
    return aw(x) * (f(q * x) - fx) + aw(1 / x) * (f(x / q) - fx) + ep.nu * fx * weight(x, ep.bases)


def dx_adjoint_residual(ep: EpsilonParams, chi, psi, spec: QuadratureSpec = V_SPEC) -> Residual:
    """<chi, D psi> against <D* chi, psi> by two quadratures.

    Holds when chi and psi have no singularities in |q| < |x| < 1/|q|.
    """
    lhs = circle_mean(lambda x: chi(x) * _dx_weighted(ep, psi, x), spec)
    rhs = circle_mean(lambda x: ep.alpha(x) * _dx_weighted(ep, lambda y: chi(y) / ep.alpha(y), x) * psi(x), spec)
    return Residual.of(lhs.value - rhs.value, [lhs.value, rhs.value], [lhs, rhs])


def eheq_bio_residual(t6, c, t3p, bases: BasePair = BasePair(), n_outer: int = 256,
                      inner_spec: QuadratureSpec = QuadratureSpec(n0=256, n_max=1024, rtol=1e-12)) -> Residual:
    """|<chi(x; eps'), D_x(eps') psi(x; eps)>| over the integrand scale, beta = 1.

    psi(x; eps) = U(t_1..t_6, c/x, c x) and chi(x; eps') = alpha(x; eps') U(t', c/x, c x)
    with (t3, t4) -> (t3', t4'), t3 t4 = t3' t4'. The outer integral runs on
    the unit circle with a fixed node count; the inner V's use ``inner_spec``.
    """
    t6 = _vec(t6)
    tp = t6.copy()
    tp[2], tp[3] = t3p, t6[2] * t6[3] / t3p
    ep = epsilon_from_t(tp, c, bases)
    q = bases.q
    xs = np.exp(2j * np.pi * np.arange(n_outer) / n_outer)

    def u_on(tt, ys):
        rows = np.array([np.append(tt, [c / y, c * y]) for y in ys])
        for row in rows:
            _admissible(row, inner_spec, "embedded V parameters")
        vals, st = ihm_batch(rows, bases, inner_spec, check=False)
        fac = (gamma_pq(c * tt[5] * ys, bases) * gamma_pq(c * tt[5] / ys, bases)
               * gamma_pq(c / tt[5] * ys, bases) * gamma_pq(c / (tt[5] * ys), bases))
        return vals / fac, st

    psi0, s0 = u_on(t6, xs)
    psip, s1 = u_on(t6, q * xs)
    psim, s2 = u_on(t6, xs / q)
    chi, s3 = u_on(tp, xs)
    chi = chi * ep.alpha(xs)
    lookup = {}
    for y, v in zip(np.concatenate([xs, q * xs, xs / q]), np.concatenate([psi0, psip, psim])):
        lookup[complex(y)] = v
    integrand = chi * _dx_weighted(ep, lambda y: np.array([lookup[complex(v)] for v in np.atleast_1d(y)]), xs)
    cf = contour_factor(bases)
    val = cf * integrand.mean()
    scale = abs(cf) * np.abs(integrand).mean()
    st = [s0, s1, s2, s3]
    return Residual(abs(val) / scale, max(s.nodes_used for s in st), all(s.converged for s in st))

