"""Basis vectors phi, f, g, the R-kernel and the generalized eigenvalue problems.

Square roots that enter the basis functions are taken on the principal branch
once per call and can be overridden through explicit ``*_root`` arguments;
the identities below then hold exactly in that branch.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateError, InadmissibleError, InvalidArgumentError, PoleProximityError
from .gamma import BasePair, OmegaTriple, gamma_pq, modified_gamma_g
from .integrals import V_SPEC, ihm_batch, v_rows_admissible
from .quadrature import (
    QuadratureResult,
    QuadratureSpec,
    Residual,
    circle_mean,
    contour_factor,
    pole_margin_check,
    weight,
)
from .theta import theta_short

ROOT_TOL = 1e-12
THETA_ZERO_TOL = 1e-12
OUTER_SPEC = QuadratureSpec(n0=256, n_max=512, rtol=1e-10)
INNER_SPEC = QuadratureSpec(n0=256, n_max=512, rtol=1e-8)

sqrt = cmath.sqrt


def _th(nome, *zs):
    out = 1.0 + 0.0j
    for z in zs:
        out = out * theta_short(z, nome)
    return out


def _gpm(y, x, bases):
    """Gamma(y x^{+-})."""
    return gamma_pq(y * x, bases) * gamma_pq(y / x, bases)


def _finite(val, what):
    if not np.all(np.isfinite(val)):
        raise PoleProximityError(f"{what} hits a pole")
    return val


def _rel(lhs, rhs):
    return Residual.of(lhs - rhs, [lhs, rhs])


@dataclass(frozen=True)
class BasisParams:
    a: complex
    b: complex
    rho: complex
    bases: BasePair = field(default_factory=BasePair)
    s: complex | None = None

    def __post_init__(self):
        if self.s is None:
            object.__setattr__(self, "s", sqrt(self.bases.pq / self.rho))
        elif abs(self.s ** 2 - self.bases.pq / self.rho) > ROOT_TOL * abs(self.bases.pq / self.rho):
            raise InvalidArgumentError("s^2 must equal pq / rho")

    def conjugation_box(self) -> bool:
        p, q = abs(self.bases.p), abs(self.bases.q)
        return all(p < abs(x) < q ** 0.5 for x in (self.a, self.b))


@dataclass(frozen=True)
class DOpParams:
    """Parameters of the difference operator D(a, b, c, d; p; q).

    ``swap=True`` gives D(a, b, c, d; q; p): theta functions in base q and
    shifts by p^{1/2}.
    """

    a: complex
    b: complex
    c: complex
    d: complex
    bases: BasePair = field(default_factory=BasePair)
    swap: bool = False

    @property
    def rho(self) -> complex:
        return self.a * self.b * self.c * self.d

    @property
    def nome(self):
        return self.bases.q if self.swap else self.bases.p

    @property
    def shift(self):
        return sqrt(self.bases.p if self.swap else self.bases.q)

    def with_cd(self, c, d) -> DOpParams:
        return DOpParams(self.a, self.b, c, d, self.bases, self.swap)

    def coefficients(self, z):
        """(coefficient of T^{1/2}, coefficient of T^{-1/2}) at z."""
        n = self.nome
        t = (self.a, self.b, self.c, self.d)
        den_p = z * theta_short(z * z, n)
        den_m = theta_short(z ** -2, n) / z
        if np.any(np.abs(den_p) < THETA_ZERO_TOL) or np.any(np.abs(den_m) < THETA_ZERO_TOL):
            raise PoleProximityError("theta(z^2) vanishes at the evaluation point")
        return _th(n, *[x * z for x in t]) / den_p, _th(n, *[x / z for x in t]) / den_m

    def apply(self, fn, z):
        cp, cm = self.coefficients(z)
        s = self.shift
        return cp * fn(s * z) + cm * fn(z / s)

    def apply_weighted(self, fn, z):
        """(D fn)(z) / Gamma(z^{+-2}), with theta(z^{+-2}) cancelled so z = +-1 is regular."""
        if self.swap:
            raise InvalidArgumentError("weighted form is implemented for D(.; p; q) only")
        p, q = self.bases.p, self.bases.q
        t = (self.a, self.b, self.c, self.d)
        s = self.shift
        return (-z ** -3 * _th(p, *[x * z for x in t]) * theta_short(z * z, q) * fn(s * z)
                - z ** 3 * _th(p, *[x / z for x in t]) * theta_short(z ** -2, q) * fn(z / s))

    def star(self) -> tuple[complex, DOpParams]:
        """(scale, params) with D* = scale * D(params)."""
        p, s = self.bases.p, sqrt(self.bases.q)
        return self.c * self.d / s, DOpParams(p * s / self.a, p * s / self.b, s / self.c, s / self.d, self.bases)


@dataclass(frozen=True)
class DRParams:
    """D_R(a, b, c, d; p; q) with plain theta(z^{+-2}) denominators."""

    a: complex
    b: complex
    c: complex
    d: complex
    bases: BasePair = field(default_factory=BasePair)

    def star(self) -> DRParams:
        k = self.bases.p * sqrt(self.bases.q)
        return DRParams(k / self.a, k / self.b, k / self.c, k / self.d, self.bases)

    def apply(self, fn, z):
        p, s = self.bases.p, sqrt(self.bases.q)
        t = (self.a, self.b, self.c, self.d)
        return (_th(p, *[x * z for x in t]) / theta_short(z * z, p) * fn(s * z)
                + _th(p, *[x / z for x in t]) / theta_short(z ** -2, p) * fn(z / s))

    def as_d(self) -> tuple[complex, DOpParams]:
        """D_R(a, ...) = scale * D(a / p, ...)."""
        return -self.bases.p / self.a, DOpParams(self.a / self.bases.p, self.b, self.c, self.d, self.bases)


def double_star_error(params: DRParams) -> float:
    back = params.star().star()
    return max(abs(x - y) / abs(y) for x, y in zip((back.a, back.b, back.c, back.d),
                                                    (params.a, params.b, params.c, params.d)))


def weight_positivity(bases: BasePair, n: int = 100) -> float:
    """min over n circle nodes of Re(weight) minus |Im(weight)| scaled by max |weight|.

    Non-negative when the weight is real and non-negative on the circle.
    """
    z = np.exp(2j * np.pi * (np.arange(n) + 0.5) / n)
    w = weight(z, bases)
    return float(np.min(w.real - np.abs(w.imag)) / np.max(np.abs(w)))


# --------------------------------------------------------------------------
# basis functions


def phi_vector(w, a, b, xi, s, bases: BasePair = BasePair(), pq_ab_root=None):
    """Gamma(s a xi^{+-}, s b xi^{+-}, sqrt(pq/ab) w^{+-} xi^{+-})."""
    r = sqrt(bases.pq / (a * b)) if pq_ab_root is None else pq_ab_root
    val = _gpm(s * a, xi, bases) * _gpm(s * b, xi, bases) * _gpm(r * w, xi, bases) * _gpm(r / w, xi, bases)
    return _finite(val, "phi")


def f_basis(z, w, a, b, rho, bases: BasePair = BasePair(), ab_rho_root=None):
    """Gamma(pq/a z^{+-}, pq/b z^{+-}, sqrt(ab/rho) w^{+-} z^{+-})."""
    pq = bases.pq
    r = sqrt(a * b / rho) if ab_rho_root is None else ab_rho_root
    val = _gpm(pq / a, z, bases) * _gpm(pq / b, z, bases) * _gpm(r * w, z, bases) * _gpm(r / w, z, bases)
    return _finite(val, "f")


def g_dual(z, v, a, b, rho, bases: BasePair = BasePair(), rho_ab_root=None):
    """Gamma(a z^{+-}, b z^{+-}, sqrt(rho/ab) v^{+-} z^{+-})."""
    r = sqrt(rho / (a * b)) if rho_ab_root is None else rho_ab_root
    val = _gpm(a, z, bases) * _gpm(b, z, bases) * _gpm(r * v, z, bases) * _gpm(r / v, z, bases)
    return _finite(val, "g")


def dis_bas_residual(z, a, b, N: int, k: int, bases: BasePair = BasePair()) -> Residual:
    """f at rho = q^{-N}, w = q^k sqrt(a/(b q^N)) against a finite theta product.

    The root in w is taken as a / sqrt(ab q^N) so that it matches the one inside f.
    """
    if not 0 <= k <= N:
        raise InvalidArgumentError("need 0 <= k <= N")
    p, q = bases.p, bases.q
    rho = q ** (-N)
    r = sqrt(a * b * q ** N)
    w = q ** k * a / r
    lhs = f_basis(z, w, a, b, rho, bases, r)
    rhs = 1.0 + 0.0j
    for j in range(k):
        rhs *= _th(p, q ** j * a * z, q ** j * a / z)
    for j in range(N - k):
        rhs *= _th(p, q ** j * b * z, q ** j * b / z)
    return _rel(lhs, rhs)


def f_eq_residual(z, w, a, b, rho, cd, bases: BasePair = BasePair()) -> Residual:
    """f(q^{1/2} z)/f(q^{-1/2} z) at (q^{1/2}a, q^{1/2}b) against the theta ratio.

    ``cd`` must equal rho / (ab); only the product enters.
    """
    if abs(a * b * cd - rho) > ROOT_TOL * abs(rho):
        raise InvalidArgumentError("need a b (cd) = rho")
    p, s = bases.p, sqrt(bases.q)
    fn = lambda y: f_basis(y, w, s * a, s * b, rho, bases)
    lhs = fn(s * z) / fn(z / s)
    r = sqrt(cd)
    rhs = z ** 4 * _th(p, a / z, b / z, r * w / z, r / (w * z)) / _th(p, a * z, b * z, r * w * z, r * z / w)
    return _rel(lhs, rhs)


def f_root(D: DOpParams) -> complex:
    """The principal sqrt(ab/rho) = (cd)^{-1/2}; every other root is tied to it."""
    return sqrt(D.a * D.b / D.rho)


def gevp2_scalar(w, D: DOpParams, root=None):
    """d^{-1} theta(w^{+-} sqrt(d/c), cd) in the base of D, with sqrt(d/c) = d * root."""
    n = D.nome
    r = D.d * (f_root(D) if root is None else root)
    return _th(n, w * r, r / w, D.c * D.d) / D.d


def gevp2_residual(z, w, D: DOpParams) -> Residual:
    """D(a,b,c,d) f(z; w; s a, s b; rho) = d^{-1} theta(w^{+-} sqrt(d/c), cd) f(z; w; a, b; rho),
    s = q^{1/2} (p^{1/2} for the swapped operator)."""
    s, r = D.shift, f_root(D)
    lhs = D.apply(lambda y: f_basis(y, w, s * D.a, s * D.b, D.rho, D.bases, s * r), z)
    rhs = gevp2_scalar(w, D, r) * f_basis(z, w, D.a, D.b, D.rho, D.bases, r)
    return _rel(lhs, rhs)


def spectral_lambda(w, c, d, cp, dp, nome, root=None):
    """theta(w sqrt(c/d), w sqrt(d/c)) / (c, d -> c', d'); the roots are x * root when
    ``root`` = (cd)^{-1/2} = (c'd')^{-1/2} is given, principal otherwise."""
    if root is None:
        num = _th(nome, w * sqrt(c / d), w * sqrt(d / c))
        den = _th(nome, w * sqrt(cp / dp), w * sqrt(dp / cp))
    else:
        num = _th(nome, w * c * root, w * d * root)
        den = _th(nome, w * cp * root, w * dp * root)
    if abs(den) < THETA_ZERO_TOL:
        raise DegenerateError("lambda(w) has a vanishing denominator")
    return num / den


def _check_cd(D, cp, dp):
    if abs(cp * dp - D.c * D.d) > ROOT_TOL * abs(D.c * D.d):
        raise InvalidArgumentError("need c d = c' d'")
    if abs(cp - D.c) < ROOT_TOL * abs(D.c) and abs(dp - D.d) < ROOT_TOL * abs(D.d):
        raise DegenerateError("(c', d') = (c, d): the relation reduces to 0 = 0")


def gevp_residual(z, w, D: DOpParams, cp, dp) -> Residual:
    """D(a,b,c,d) f = lambda(w) D(a,b,c',d') f for f = f(z; w; s a, s b; rho).

    With ``D.swap`` this is the partner problem with p and q exchanged.
    """
    _check_cd(D, cp, dp)
    r = f_root(D)
    lam = spectral_lambda(w, D.c, D.d, cp, dp, D.nome, r)
    s = D.shift
    fn = lambda y: f_basis(y, w, s * D.a, s * D.b, D.rho, D.bases, s * r)
    lhs = D.apply(fn, z)
    rhs = lam * D.with_cd(cp, dp).apply(fn, z)
    return _rel(lhs, rhs)


def lambda_ratio_error(w, D: DOpParams, cp, dp) -> float:
    """|lambda(w) - ratio of the two gevp2 eigen-scalars| relative."""
    r = f_root(D)
    lam = spectral_lambda(w, D.c, D.d, cp, dp, D.nome, r)
    ratio = gevp2_scalar(w, D, r) / gevp2_scalar(w, D.with_cd(cp, dp), r)
    return float(abs(lam - ratio) / abs(lam))


def ccr_residual(D: DOpParams, cp, dp, z, testfn=None, w=None) -> Residual:
    """D(a,b,c',d') D(sa,sb,c/s,d/s) = D(a,b,c,d) D(sa,sb,c'/s,d'/s) on testfn at z.

    The default test function is f(z; w; qa, qb; rho).
    """
    if abs(cp * dp - D.c * D.d) > ROOT_TOL * abs(D.c * D.d):
        raise InvalidArgumentError("need c d = c' d'")
    s = D.shift
    if testfn is None:
        if w is None:
            raise InvalidArgumentError("w is required for the default test function")
        testfn = lambda y: f_basis(y, w, s * s * D.a, s * s * D.b, D.rho, D.bases)

    def side(outer, c, d):
        # the four terms of the composition; the two sides cancel heavily near zeros
        Di = DOpParams(s * D.a, s * D.b, c / s, d / s, D.bases, D.swap)
        terms = []
        for co, y in zip(outer.coefficients(z), (s * z, z / s)):
            ci = Di.coefficients(y)
            terms += [co * ci[0] * testfn(s * y), co * ci[1] * testfn(y / s)]
        return terms

    lhs = side(D.with_cd(cp, dp), D.c, D.d)
    rhs = side(D, cp, dp)
    return Residual.of(sum(lhs) - sum(rhs), lhs + rhs)


# --------------------------------------------------------------------------
# D acting on f(z; w; q^{1/2}e, q^{1/2}h; rho) with unrelated (e, h)


def theta_lemma_residual(A, B, z, nome) -> Residual:
    """The n / (n+2) theta identity: z^{-n-1} prod theta(a_j z, b_k z) - (z -> 1/z)
    expanded over the a_j, for prod a * prod b = 1 (len B = len A + 2)."""
    A = [complex(x) for x in A]
    B = [complex(x) for x in B]
    n = len(A)
    if len(B) != n + 2:
        raise InvalidArgumentError("need len(B) = len(A) + 2")
    if abs(np.prod(A) * np.prod(B) - 1) > 1e-12:
        raise InvalidArgumentError("need prod A * prod B = 1")

    def side(y):
        return y ** (-n - 1) * _th(nome, *[x * y for x in A]) * _th(nome, *[x * y for x in B])

    lhs = side(z) - side(1 / z)
    total = 0j
    for j in range(n):
        term = _th(nome, *[A[j] * x for x in B])
        for l in range(n):
            if l != j:
                term *= _th(nome, A[l] * z, A[l] / z) / _th(nome, A[j] / A[l])
        total += term
    rhs = (-1) ** n * z * theta_short(z ** -2, nome) / np.prod(A) * total
    return _rel(lhs, rhs)


def gen_act_terms(D: DOpParams, e, h, z, w):
    """The three-term expansion of D(a,b,c,d) f(z; w; q^{1/2}e, q^{1/2}h; rho)."""
    p, q = D.bases.p, D.bases.q
    sq = sqrt(q)
    rho = D.rho
    a, b, c, d = D.a, D.b, D.c, D.d
    seh = sqrt(e * h / rho)
    srh = sqrt(rho / (e * h))

    def wterm(u):
        den = _th(p, h * seh * u, u * u)
        if abs(den) < THETA_ZERO_TOL:
            raise DegenerateError("theta denominator of the expansion vanishes")
        return (_th(p, seh * a * u, seh * b * u, seh * c * u, seh * d * u, seh * u / e) / (h * h * den)
                * f_basis(z, u / sq, q * e, h, rho, D.bases))

    t3 = (_th(p, a / h, b / h, c / h, d / h, 1 / (h * e)) / _th(p, srh * w / h, srh / (w * h))
          * f_basis(z, w, q * e, q * h, rho, D.bases))
    return rho * h * wterm(w), rho * h * wterm(1 / w), rho * h * t3


def gen_act_residual(D: DOpParams, e, h, z, w, swap_eh: bool = False) -> Residual:
    sq = sqrt(D.bases.q)
    lhs = D.apply(lambda y: f_basis(y, w, sq * e, sq * h, D.rho, D.bases), z)
    terms = gen_act_terms(D, h, e, z, w) if swap_eh else gen_act_terms(D, e, h, z, w)
    return Residual.of(lhs - sum(terms), [lhs, *terms])


# --------------------------------------------------------------------------
# conjugation


def _pairing(chi, psi_w, bases, spec):
    res = circle_mean(lambda z: chi(z) * psi_w(z), spec)
    c = contour_factor(bases)
    return QuadratureResult(c * res.value, res.error_estimate, res.nodes_used, res.converged)


def adjoint_residual(D: DOpParams, chi, psi, spec: QuadratureSpec = V_SPEC) -> Residual:
    """<chi, D psi> against <D* chi, psi>; chi, psi analytic in |q|^{1/2} < |z| < |q|^{-1/2}."""
    scale, Ds = D.star()
    lhs = _pairing(chi, lambda z: D.apply_weighted(psi, z), D.bases, spec)
    rhs = _pairing(psi, lambda z: scale * Ds.apply_weighted(chi, z), D.bases, spec)
    return Residual.of(lhs.value - rhs.value, [lhs.value, rhs.value], [lhs, rhs])


def conjugation_box_ok(D: DOpParams, v, w) -> bool:
    """Parameter restrictions for moving D across the pairing with g and f."""
    p, q = abs(D.bases.p), abs(D.bases.q)
    k = abs(D.rho / (D.a * D.b * q))
    return (all(p < abs(x) < q ** 0.5 for x in (D.a, D.b))
            and k < abs(v) ** 2 < 1 / k and 1 / k < abs(w) ** 2 < k)


def gevp_dual_residual(D: DOpParams, v, w, spec: QuadratureSpec = V_SPEC, enforce_box: bool = True) -> Residual:
    """<D* g(v), f(w; q^{1/2}a, q^{1/2}b)> against <g(v), D f(w; q^{1/2}a, q^{1/2}b)>.

    The two spectral boxes in :func:`conjugation_box_ok` exclude each other
    (the v-box needs |cd| < |q|, the w-box |cd| > 1/|q|), so with
    ``enforce_box`` every call raises; without it the pairing is taken
    with f and g crossing poles and the two sides differ.
    """
    if enforce_box and not conjugation_box_ok(D, v, w):
        raise InadmissibleError("parameters outside the conjugation box")
    sq = sqrt(D.bases.q)
    g = lambda z: g_dual(z, v, D.a, D.b, D.rho, D.bases)
    f = lambda z: f_basis(z, w, sq * D.a, sq * D.b, D.rho, D.bases)
    return adjoint_residual(D, g, f, spec)


# --------------------------------------------------------------------------
# R-kernel and the rotation of phi


@dataclass(frozen=True)
class KernelRoots:
    """Branch-fixed square roots used by the first printed form of R."""

    ab_rho: complex
    rho_cd: complex
    arho_b: complex
    brho_a: complex
    crho_d: complex
    drho_c: complex

    @classmethod
    def principal(cls, c, d, a, b, rho):
        return cls(sqrt(a * b / rho), sqrt(rho / (c * d)), sqrt(a * rho / b), sqrt(b * rho / a),
                   sqrt(c * rho / d), sqrt(d * rho / c))


def r_kernel_params(c, d, a, b, x, w, s, bases: BasePair = BasePair(), form: str = "first"):
    """(prefactor, V parameters) for R(c,d,a,b; x,w | s); w may be an array."""
    pq = bases.pq
    rho = pq / (s * s)
    w = np.atleast_1d(np.asarray(w, dtype=np.complex128))
    ww = weight(w, bases)
    if form == "first":
        r = KernelRoots.principal(c, d, a, b, rho)
        pre = (gamma_pq(a * b, bases) * _gpm(r.arho_b, w, bases) * _gpm(r.brho_a, w, bases)
               / (gamma_pq(c * d, bases) * _gpm(r.crho_d, x, bases) * _gpm(r.drho_c, x, bases)
                  * gamma_pq(a * b / rho, bases) * gamma_pq(rho / (c * d), bases)))
        rows = np.array([[c, d, r.rho_cd * x, r.rho_cd / x, pq / a, pq / b, r.ab_rho * wi, r.ab_rho / wi] for wi in w])
    elif form == "second":
        pre = 1 / (gamma_pq(pq / (a * b), bases) * gamma_pq(a * b / pq, bases))
        k, m = sqrt(pq / (c * d)), sqrt(a * b / pq)
        rows = np.array([[s * c, s * d, k * x, k / x, pq / (a * s), pq / (b * s), m * wi, m / wi] for wi in w])
    else:
        raise InvalidArgumentError("form must be 'first' or 'second'")
    return pre * ww, rows


def r_kernel_batch(c, d, a, b, x, w, s, bases: BasePair = BasePair(), spec: QuadratureSpec = V_SPEC,
                   form: str = "first", e7_fallback: bool = False):
    pre, rows = r_kernel_params(c, d, a, b, x, w, s, bases, form)
    if e7_fallback:
        rows, pf = v_rows_admissible(rows, bases, spec)
        pre = pre * pf
    else:
        for row in rows:
            if not pole_margin_check(row, spec.delta_margin):
                raise InadmissibleError(f"embedded V parameters outside the pole margin (max |t| = {np.abs(row).max():.3f})")
    vals, stats = ihm_batch(rows, bases, spec, check=False)
    return _finite(pre * vals, "R-kernel"), stats


def r_kernel(c, d, a, b, x, w, s, bases: BasePair = BasePair(), spec: QuadratureSpec = V_SPEC,
             form: str = "first") -> complex:
    """R(c, d, a, b; x, w | s), including the 1/Gamma(w^{+-2}) factor."""
    vals, _ = r_kernel_batch(c, d, a, b, x, w, s, bases, spec, form)
    return complex(vals[0])


def r_forms_residual(c, d, a, b, x, w, s, bases: BasePair = BasePair(), spec: QuadratureSpec = V_SPEC) -> Residual:
    r1, s1 = r_kernel_batch(c, d, a, b, x, w, s, bases, spec, "first")
    r2, s2 = r_kernel_batch(c, d, a, b, x, w, s, bases, spec, "second")
    return Residual.of(r1[0] - r2[0], [r1[0], r2[0]], [s1, s2])


def _outer(f, bases, spec):
    res = circle_mean(f, spec)
    cf = contour_factor(bases)
    return QuadratureResult(cf * res.value, res.error_estimate, res.nodes_used, res.converged)


def key_relation_residual(c, d, a, b, x, xi, s, bases: BasePair = BasePair(),
                          outer_spec: QuadratureSpec = OUTER_SPEC, inner_spec: QuadratureSpec = INNER_SPEC,
                          form: str = "first") -> Residual:
    """phi(x; c,d | xi; s) against kappa \\int R(c,d,a,b; x,w | s) phi(w; a,b | xi; s) dw/w."""
    lhs = phi_vector(x, c, d, xi, s, bases)
    inner = []

    def integrand(w):
        r, st = r_kernel_batch(c, d, a, b, x, w, s, bases, inner_spec, form)
        inner.append(st)
        return r * phi_vector(w, a, b, xi, s, bases)

    rhs = _outer(integrand, bases, outer_spec)
    return Residual.of(lhs - rhs.value, [lhs, rhs.value], [rhs] + inner)


def compact_kernel_batch(alpha, beta, gamma, delta, z, x, t, w, bases: BasePair = BasePair(),
                         spec: QuadratureSpec = INNER_SPEC):
    """r(alpha, beta, gamma, delta; z, x; t, w) for an array of w.

    Rows of the embedded V outside the pole margin are moved back inside by
    an E7 transformation before the quadrature.
    """
    if abs(alpha * beta - gamma * delta) > ROOT_TOL * abs(alpha * beta):
        raise InvalidArgumentError("need alpha beta = gamma delta")
    pq = bases.pq
    w = np.atleast_1d(np.asarray(w, dtype=np.complex128))
    rows = np.array([[beta * x, beta / x, alpha * z, alpha / z, pq / gamma * t, pq / (gamma * t),
                      wi / delta, 1 / (wi * delta)] for wi in w])
    rows, pf = v_rows_admissible(rows, bases, spec)
    vals, stats = ihm_batch(rows, bases, spec, check=False)
    pre = pf * weight(w, bases) / (gamma_pq(delta ** 2, bases) * gamma_pq(delta ** -2, bases))
    return pre * vals, stats


def compact_key_relation_residual(alpha, beta, gamma, delta, z, x, t, xi, bases: BasePair = BasePair(),
                                  outer_spec: QuadratureSpec = OUTER_SPEC,
                                  inner_spec: QuadratureSpec = INNER_SPEC) -> Residual:
    """Gamma(alpha z^{+-} xi^{+-}, beta x^{+-} xi^{+-}) against
    kappa \\int r(...; t, w) Gamma(gamma t^{+-} xi^{+-}, delta w^{+-} xi^{+-}) dw/w."""
    lhs = (_gpm(alpha * z, xi, bases) * _gpm(alpha / z, xi, bases)
           * _gpm(beta * x, xi, bases) * _gpm(beta / x, xi, bases))
    inner = []

    def integrand(w):
        r, st = compact_kernel_batch(alpha, beta, gamma, delta, z, x, t, w, bases, inner_spec)
        inner.append(st)
        return r * _gpm(gamma * t, xi, bases) * _gpm(gamma / t, xi, bases) * _gpm(delta * w, xi, bases) * _gpm(delta / w, xi, bases)

    rhs = _outer(integrand, bases, outer_spec)
    return Residual.of(lhs - rhs.value, [lhs, rhs.value], [rhs] + inner)


def reproducing_residual(a, b, c, d, e, f, x, z, s, bases: BasePair = BasePair(),
                         outer_spec: QuadratureSpec = QuadratureSpec(n0=128, n_max=256, rtol=1e-7),
                         inner_spec: QuadratureSpec = INNER_SPEC) -> Residual:
    """kappa \\int R(a,b,c,d; x,w) R(c,d,e,f; w,z) dw/w against R(a,b,e,f; x,z).

    The second kernel is taken in its E7-transformed form, which stays
    admissible for a wider range of w.
    """
    rhs = r_kernel(a, b, e, f, x, z, s, bases, inner_spec)
    inner = []

    def integrand(w):
        k1, st1 = r_kernel_batch(a, b, c, d, x, w, s, bases, inner_spec)
        k2 = np.empty_like(w)
        for i, wi in enumerate(w):
            v, st2 = r_kernel_batch(c, d, e, f, wi, z, s, bases, inner_spec, form="second")
            k2[i] = v[0]
            inner.append(st2)
        inner.append(st1)
        return k1 * k2

    lhs = _outer(integrand, bases, outer_spec)
    return Residual.of(lhs.value - rhs, [lhs.value, rhs], [lhs] + inner)


# --------------------------------------------------------------------------
# overlaps


def overlap_v_residual(a, b, c, d, e, v, w, bases: BasePair = BasePair(), spec: QuadratureSpec = V_SPEC) -> Residual:
    """kappa \\int g(z; v; a,b; e) f(z; w; c,d; e) / Gamma(z^{+-2}) dz/z against V."""
    pq = bases.pq
    k, m = sqrt(e / (a * b)), sqrt(c * d / e)
    t = np.array([a, b, k * v, k / v, pq / c, pq / d, m * w, m / w])
    if not pole_margin_check(t, spec.delta_margin):
        raise InadmissibleError("induced V parameters outside the pole margin")
    lhs = _outer(lambda z: g_dual(z, v, a, b, e, bases, k) * f_basis(z, w, c, d, e, bases, m) * weight(z, bases),
                 bases, spec)
    vals, st = ihm_batch([t], bases, spec, check=False)
    return Residual.of(lhs.value - vals[0], [lhs.value, vals[0]], [lhs, st])


def overlap_phi_residual(c, d, e, f, x, z, s, bases: BasePair = BasePair(), spec: QuadratureSpec = V_SPEC) -> Residual:
    """kappa \\int phi(z; pq/e, pq/f | xi; 1/s) phi(x; c,d | xi; s) / Gamma(xi^{+-2}) dxi/xi against V."""
    pq = bases.pq
    k, m = sqrt(pq / (c * d)) / s, s * sqrt(e * f / pq)
    t = np.array([c, d, k * x, k / x, pq / e, pq / f, m * z, m / z])
    scaled = np.concatenate([s * t[:4], t[4:] / s])
    if not pole_margin_check(scaled, spec.delta_margin):
        raise InadmissibleError("induced V parameters outside the pole margin")
    r1 = sqrt(pq / ((pq / e) * (pq / f)))
    r2 = sqrt(pq / (c * d))
    lhs = _outer(lambda xi: phi_vector(z, pq / e, pq / f, xi, 1 / s, bases, r1)
                 * phi_vector(x, c, d, xi, s, bases, r2) * weight(xi, bases), bases, spec)
    vals, st = ihm_batch([scaled], bases, spec, check=False)
    return Residual.of(lhs.value - vals[0], [lhs.value, vals[0]], [lhs, st])


# --------------------------------------------------------------------------
# modular basis


def h_modular(u, v, alpha, beta, sigma, om: OmegaTriple):
    """G(alpha/2 + beta/2 - sigma/2 +- v +- u) / G(alpha +- u, beta +- u)."""
    G = lambda x: modified_gamma_g(x, om)
    base = alpha / 2 + beta / 2 - sigma / 2
    num = 1.0 + 0.0j
    for s1 in (1, -1):
        for s2 in (1, -1):
            num *= G(base + s1 * v + s2 * u)
    return _finite(num / (G(alpha + u) * G(alpha - u) * G(beta + u) * G(beta - u)), "h")


def f_eq_add_residual(u, v, alpha, beta, sigma, om: OmegaTriple) -> Residual:
    """h(u + w1/2)/h(u - w1/2) at (alpha + w1/2, beta + w1/2) against the theta ratio
    with z = e(u), a = e(alpha), b = e(beta), w = e(v), sqrt(cd) = e((sigma - alpha - beta)/2),
    e(x) = exp(2 pi i x / w2)."""
    w1 = om.w1
    h = lambda x: h_modular(x, v, alpha + w1 / 2, beta + w1 / 2, sigma, om)
    lhs = h(u + w1 / 2) / h(u - w1 / 2)
    E = lambda x: cmath.exp(2j * cmath.pi * x / om.w2)
    z, a, b, w = E(u), E(alpha), E(beta), E(v)
    scd = cmath.exp(1j * cmath.pi * (sigma - alpha - beta) / om.w2)
    P = om.p
    rhs = z ** 4 * _th(P, a / z, b / z, w * scd / z, scd / (w * z)) / _th(P, a * z, b * z, w * z * scd, z * scd / w)
    return _rel(lhs, rhs)
