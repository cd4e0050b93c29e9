"""The difference Heun operator: Bethe ansatz, continuum limit, van Diejen reduction, zero modes."""
from __future__ import annotations

import cmath
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError, PoleProximityError, SolverFailureError
from .gamma import BasePair, gamma_pq
from .integrals import V_SPEC, ihm_continued
from .quadrature import QuadratureSpec
from .theta import qpochhammer_infinite, theta1, theta_short

PI = cmath.pi
POLE_TOL = 1e-12
BETHE_TOL = 1e-10


def th1(u, tau) -> complex:
    return complex(theta1(u, tau))


def _prod_th1(us, tau):
    out = 1.0 + 0.0j
    for u in us:
        out *= th1(u, tau)
    return out


# --------------------------------------------------------------------------
# Bethe ansatz


@dataclass(frozen=True)
class BetheConfig:
    N: int
    a: tuple
    eta: complex
    tau: complex
    roots: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(complex(x) for x in self.a))
        object.__setattr__(self, "roots", tuple(complex(x) for x in self.roots))
        if self.N < 0 or len(self.a) != 4:
            raise InvalidArgumentError("need N >= 0 and four parameters a_k")
        if len(self.roots) not in (0, self.N):
            raise InvalidArgumentError("roots must have length N")
        if abs(sum(self.a) + 2 * self.N * self.eta) > 1e-12 * max(1.0, abs(self.eta)):
            raise InvalidArgumentError("need a_1 + a_2 + a_3 + a_4 = -2 N eta")

    def with_roots(self, roots) -> BetheConfig:
        return BetheConfig(self.N, self.a, self.eta, self.tau, tuple(roots))


def bethe_psi(u, cfg: BetheConfig) -> complex:
    """prod_m theta_1(u + u_m) theta_1(u - u_m)."""
    return _prod_th1([u + s * r for r in cfg.roots for s in (1, -1)], cfg.tau)


def _nz(v, what):
    if abs(v) < POLE_TOL:
        raise PoleProximityError(f"{what} vanishes")
    return v


def _bethe_sides(roots, cfg):
    a, eta, tau = cfg.a, cfg.eta, cfg.tau
    out = []
    for um in roots:
        lhs = _prod_th1([ak + um for ak in a], tau) / _nz(_prod_th1([ak - um for ak in a], tau), "theta_1(a_k - u_m)")
        rhs = 1.0 + 0.0j
        for un in roots:
            rhs *= _prod_th1([um + un - eta, um - un - eta], tau) / _nz(_prod_th1([um + un + eta, um - un + eta], tau),
                                                                        "theta_1(u_m +- u_n + eta)")
        out.append((lhs, rhs))
    return out


def bethe_system_residual(cfg: BetheConfig) -> np.ndarray:
    """|LHS/RHS - 1| for each of the N equations."""
    if len(cfg.roots) != cfg.N:
        raise InvalidArgumentError("configuration carries no roots")
    return np.array([abs(l / r - 1) for l, r in _bethe_sides(cfg.roots, cfg)])


def _bethe_f(roots, cfg):
    return np.array([l - r for l, r in _bethe_sides(roots, cfg)])


def reduce_to_cell(u, tau):
    """Representative of u modulo the lattice (1, tau) with 0 <= Im < Im tau, 0 <= Re' < 1."""
    n = np.floor(u.imag / tau.imag + 1e-13)
    u = u - n * tau
    return u - np.floor(u.real + 1e-13)


def bethe_solve(N: int, a, eta, tau, seeds=None, *, max_iter: int = 60, seed: int = 0) -> BetheConfig:
    """Newton iteration on the Bethe equations, restarting from each seed in turn.

    ``seeds`` is a list of length-N complex arrays; when omitted, 32 seeds are
    drawn from the fundamental cell with a fixed generator.
    """
    if N not in (1, 2):
        raise InvalidArgumentError("the solver handles N = 1 or 2")
    cfg = BetheConfig(N, a, eta, tau)
    tau = complex(tau)
    if seeds is None:
        rng = np.random.default_rng(seed)
        seeds = [rng.uniform(0.05, 0.45, N) + 1j * rng.uniform(0.05, 0.45, N) * tau.imag for _ in range(32)]
    diagnostics = []
    h = 1e-7
    for k, s0 in enumerate(seeds):
        u = np.asarray(s0, dtype=np.complex128).reshape(N)
        res = np.inf
        try:
            for _ in range(max_iter):
                F = _bethe_f(u, cfg)
                res = float(np.max(np.abs(F)))
                if res < 1e-14:
                    break
                J = np.empty((N, N), dtype=np.complex128)
                for j in range(N):
                    du = u.copy()
                    du[j] += h
                    J[:, j] = (_bethe_f(du, cfg) - F) / h
                u = u - np.linalg.solve(J, F)
        except (PoleProximityError, np.linalg.LinAlgError, FloatingPointError) as exc:
            diagnostics.append((k, repr(exc)))
            continue
        u = np.array([reduce_to_cell(x, tau) for x in u])
        if np.any(np.abs([th1(x, tau) for x in u]) < 1e-8):
            diagnostics.append((k, "root collapsed onto u = 0"))
            continue
        if N == 2 and abs(th1(u[0] - u[1], tau) * th1(u[0] + u[1], tau)) < 1e-8:
            diagnostics.append((k, "coincident roots"))
            continue
        try:
            out = cfg.with_roots(sorted(u, key=lambda x: (round(x.real, 12), round(x.imag, 12))))
            r = bethe_system_residual(out)
        except PoleProximityError as exc:
            diagnostics.append((k, repr(exc)))
            continue
        if np.all(np.isfinite(r)) and r.max() < BETHE_TOL:
            return out
        diagnostics.append((k, f"residual {r.max():.2e}"))
    raise SolverFailureError("Bethe equations did not converge from any seed", dict(diagnostics))


def bethe_energy(cfg: BetheConfig, l: int) -> complex:
    """E computed from the point u = a_l (l = 1..4)."""
    if l not in (1, 2, 3, 4):
        raise InvalidArgumentError("l must be in 1..4")
    a, eta, tau = cfg.a, cfg.eta, cfg.tau
    al = a[l - 1]
    E = _prod_th1([ak + al for ak in a], tau) / _nz(th1(2 * al, tau), "theta_1(2 a_l)")
    for r in cfg.roots:
        E *= _prod_th1([al + r + eta, al - r + eta], tau) / _nz(_prod_th1([al + r, al - r], tau), "theta_1(a_l +- u_n)")
    return E


def delta_apply(f, u, a, eta, tau):
    """Returns (term with f(u + eta), term with f(u - eta))."""
    den = th1(2 * u, tau)
    if abs(den) < POLE_TOL:
        raise PoleProximityError("theta_1(2u) vanishes at the evaluation point")
    return (_prod_th1([x + u for x in a], tau) / den * f(u + eta),
            _prod_th1([x - u for x in a], tau) / (-den) * f(u - eta))


def devp_residual(u, cfg: BetheConfig) -> float:
    """|Delta psi - E psi| / (|E psi| + max term)."""
    E = bethe_energy(cfg, 1)
    f = lambda x: bethe_psi(x, cfg)
    t1, t2 = delta_apply(f, u, cfg.a, cfg.eta, cfg.tau)
    ef = E * f(u)
    return abs(t1 + t2 - ef) / (abs(ef) + max(abs(t1), abs(t2)))


# --------------------------------------------------------------------------
# Weierstrass potential and the Heun limit


def _theta1_derivs(u, tau, eps=1e-17):
    """theta_1 and its first two u-derivatives from the Fourier series."""
    u, tau = complex(u), complex(tau)
    vals = np.zeros(3, dtype=np.complex128)
    k = 0
    while True:
        added = 0.0
        for n in (k, -k - 1):
            m = n + 0.5
            term = -cmath.exp(1j * PI * tau * m * m + 2j * PI * m * (u + 0.5))
            w = 2j * PI * m
            vals += term * np.array([1, w, w * w])
            added = max(added, abs(term) * (1 + abs(w)) ** 2)
        if added < eps * (abs(vals[0]) + 1) and k > 2:
            break
        k += 1
    return vals


def weierstrass_p(u, tau) -> complex:
    """-(log theta_1)''(u), which equals the Weierstrass function up to a constant."""
    t, d1, d2 = _theta1_derivs(u, tau)
    if abs(t) < 1e-10:
        raise PoleProximityError("u is on the period lattice")
    return complex(-(d2 * t - d1 * d1) / (t * t))


def heun_half_periods(tau):
    return (0.0, 1.0, tau, 1 + tau)


def heun_l_apply(f, d2f, u, alphas, tau) -> complex:
    """-f''(u) + sum_i alpha_i (alpha_i - 1) P(u + omega_i / 2) f(u)."""
    om = heun_half_periods(tau)
    pot = sum(al * (al - 1) * weierstrass_p(u + w / 2, tau) for al, w in zip(alphas, om) if al * (al - 1) != 0)
    return -d2f(u) + pot * f(u)


def heun_a(alphas, eta, tau):
    a0, a1, a2, a3 = alphas
    return (a0 * eta, 0.5 + a1 * eta, tau / 2 + a2 * eta, -(1 + tau) / 2 + a3 * eta)


def heun_chi(alphas, eta, tau):
    p = cmath.exp(2j * PI * tau)
    pp = complex(qpochhammer_infinite(p, p))
    return 1j * cmath.exp(1j * PI * tau / 4) * cmath.exp(1j * PI * (alphas[2] - alphas[3]) * eta) / pp ** 3


def delta_tilde_apply(f, u, alphas, eta, tau) -> complex:
    """f(u + eta) - chi^2 theta_1(u - a, u + a - eta) / theta_1(2u, 2u - 2 eta) f(u - eta)."""
    a = heun_a(alphas, eta, tau)
    chi = heun_chi(alphas, eta, tau)
    den = _prod_th1([2 * u, 2 * u - 2 * eta], tau)
    if abs(den) < POLE_TOL:
        raise PoleProximityError("theta_1(2u, 2u - 2 eta) vanishes")
    v = _prod_th1([u - x for x in a] + [u + x - eta for x in a], tau) / den
    return f(u + eta) - chi * chi * v * f(u - eta)


@dataclass(frozen=True)
class OrderEstimate:
    order: float
    residuals: tuple
    orders: tuple
    precision_floor: bool


def heun_limit_order(f, d2f, u, alphas, tau, etas=(0.02, 0.01, 0.005), with_potential: bool = True) -> OrderEstimate:
    """log2 of r(eta)/r(eta/2) for r = |(Delta~ - 2 + eta^2 L) f(u)|.

    With ``with_potential=False`` L is dropped, which should give order 2.
    """
    L = heun_l_apply(f, d2f, u, alphas, tau) if with_potential else 0.0
    fu = f(u)
    rs = [abs(delta_tilde_apply(f, u, alphas, e, tau) - 2 * fu + e * e * L) for e in etas]
    orders = [float(np.log2(rs[i] / rs[i + 1])) for i in range(len(rs) - 1)]
    floor = min(rs) < 1e-12 * max(abs(fu), 1.0)
    return OrderEstimate(orders[-1], tuple(rs), tuple(orders), floor)


def theta_pair_testfn(c, tau):
    """f(u) = theta_1(u + c) theta_1(u - c) and its second derivative."""
    def f(u):
        return th1(u + c, tau) * th1(u - c, tau)

    def d2f(u):
        a0, a1, a2 = _theta1_derivs(u + c, tau)
        b0, b1, b2 = _theta1_derivs(u - c, tau)
        return complex(a2 * b0 + 2 * a1 * b1 + a0 * b2)

    return f, d2f


# --------------------------------------------------------------------------
# van Diejen one-particle operator


@dataclass(frozen=True)
class VanDiejenConfig:
    eps: tuple
    bases: BasePair = field(default_factory=BasePair)

    def __post_init__(self):
        object.__setattr__(self, "eps", tuple(complex(x) for x in self.eps))
        if len(self.eps) != 8:
            raise InvalidArgumentError("eight parameters expected")
        target = self.bases.pq ** 2
        if abs(np.prod(self.eps) - target) > 1e-12 * abs(target):
            raise InvalidArgumentError("need prod eps = p^2 q^2")

    @classmethod
    def reduced(cls, e5, e6, e7, e8, bases: BasePair = BasePair()) -> VanDiejenConfig:
        """eps_1..4 = +-q^{1/2}, +-(pq)^{1/2} and eps_5 -> p eps_5, with e5 e6 e7 e8 = 1."""
        if abs(e5 * e6 * e7 * e8 - 1) > 1e-12:
            raise InvalidArgumentError("need eps_5 eps_6 eps_7 eps_8 = 1 after the p-rescaling")
        sq, spq = cmath.sqrt(bases.q), cmath.sqrt(bases.pq)
        return cls((sq, -sq, spq, -spq, bases.p * e5, e6, e7, e8), bases)

    @property
    def is_reduced(self) -> bool:
        sq, spq = cmath.sqrt(self.bases.q), cmath.sqrt(self.bases.pq)
        want = (sq, -sq, spq, -spq)
        return all(abs(x - y) < 1e-14 * abs(y) for x, y in zip(self.eps[:4], want))

    def A(self, x):
        p, q = self.bases.p, self.bases.q
        num = np.prod([theta_short(e * x, p) for e in self.eps])
        den = theta_short(x * x, p) * theta_short(q * x * x, p)
        if abs(den) < POLE_TOL:
            raise PoleProximityError("theta(x^2, q x^2) vanishes")
        return num / den


def vd_apply(cfg: VanDiejenConfig, f, x) -> complex:
    q = cfg.bases.q
    fx = f(x)
    return cfg.A(x) * (f(q * x) - fx) + cfg.A(1 / x) * (f(x / q) - fx)


def d_q2_apply(params, f, x, bases: BasePair) -> complex:
    """D(t_1..t_4; p; q^2) f at x: theta(t x)/(x theta(x^2)) f(q x) + (x -> 1/x)."""
    p, q = bases.p, bases.q
    t = lambda *zs: np.prod([theta_short(z, p) for z in zs])
    up = t(*[a * x for a in params]) / (x * t(x * x))
    dn = t(*[a / x for a in params]) / (t(x ** -2) / x)
    return up * f(q * x), dn * f(x / q)


def vd_reduction_residual(cfg: VanDiejenConfig, f, x) -> float:
    """H f against -(D(eps_5..eps_8; p; q^2) f - theta(eps_5 eps_{6,7,8}) f / eps_5) / eps_5."""
    if not cfg.is_reduced:
        raise InvalidArgumentError("configuration is not in the reduced form")
    p = cfg.bases.p
    e5, e6, e7, e8 = cfg.eps[4] / p, *cfg.eps[5:]
    if abs(e5 * e6 * e7 * e8 - 1) > 1e-12:
        raise InvalidArgumentError("need eps_5 eps_6 eps_7 eps_8 = 1")
    lhs = vd_apply(cfg, f, x)
    up, dn = d_q2_apply((e5, e6, e7, e8), f, x, cfg.bases)
    sc = np.prod([theta_short(e5 * e, p) for e in (e6, e7, e8)]) * f(x) / e5
    rhs = -(up + dn - sc) / e5
    return float(abs(lhs - rhs) / max(abs(lhs), abs(rhs), abs(up) / abs(e5), abs(sc) / abs(e5)))


# --------------------------------------------------------------------------
# zero modes of D(c t6, c/t6, c/(q t6), pq/(c t5); p; q^2)


@dataclass(frozen=True)
class ZeroModeParams:
    t5: complex
    t6: complex
    c: complex
    bases: BasePair = field(default_factory=BasePair)

    def __post_init__(self):
        if abs(self.t5 * self.t6 - self.bases.p * self.c ** 2) > 1e-12 * abs(self.bases.p * self.c ** 2):
            raise InvalidArgumentError("need t5 t6 = p c^2")

    @classmethod
    def from_t6(cls, t6, c, bases: BasePair = BasePair()):
        return cls(bases.p * c * c / t6, t6, c, bases)

    @property
    def d_params(self):
        c, t5, t6, b = self.c, self.t5, self.t6, self.bases
        return (c * t6, c / t6, c / (b.q * t6), b.pq / (c * t5))


def zero_mode_psi2(x, zp: ZeroModeParams) -> complex:
    """Gamma_{p,q^2}(q^2 t6/c x^{+-}, c t5/p x^{+-}) / Gamma_{p,q^2}(q c t6 x^{+-}, q c/t6 x^{+-})."""
    p, q = zp.bases.p, zp.bases.q
    c, t5, t6 = zp.c, zp.t5, zp.t6
    G = lambda z: gamma_pq(z, p=p, q=q * q)
    pm = lambda y: G(y * x) * G(y / x)
    val = pm(q * q * t6 / c) * pm(c * t5 / p) / (pm(q * c * t6) * pm(q * c / t6))
    if not np.isfinite(val):
        raise PoleProximityError("psi_2 hits a pole")
    return complex(val)


def zero_mode_psi1(x, zp: ZeroModeParams, spec: QuadratureSpec = V_SPEC) -> complex:
    """V(q^{1/2}/c, -q^{1/2}/c, (pq)^{1/2}/c, -(pq)^{1/2}/c, t5, t6, c/x, c x) / Gamma(c x^{+-} t6^{+-}).

    V is continued past the unit circle by residues where a parameter has
    left it (this happens at q^{+-2} x for typical x).
    """
    b = zp.bases
    c, t5, t6 = zp.c, zp.t5, zp.t6
    sq, spq = cmath.sqrt(b.q), cmath.sqrt(b.pq)
    t = [sq / c, -sq / c, spq / c, -spq / c, t5, t6, c / x, c * x]
    v = ihm_continued(t, b, spec).value
    den = gamma_pq(c * x * t6, b) * gamma_pq(c * x / t6, b) * gamma_pq(c / x * t6, b) * gamma_pq(c / (x * t6), b)
    return complex(v / den)


def zero_mode_residual(which: str, x, zp: ZeroModeParams, spec: QuadratureSpec = V_SPEC) -> float:
    """|D psi(x)| over the sum of the two term magnitudes."""
    if which == "psi2":
        f = lambda y: zero_mode_psi2(y, zp)
    elif which == "psi1":
        f = lambda y: zero_mode_psi1(y, zp, spec)
    else:
        raise InvalidArgumentError("which must be 'psi1' or 'psi2'")
    up, dn = d_q2_apply(zp.d_params, f, x, zp.bases)
    return float(abs(up + dn) / (abs(up) + abs(dn)))


def ellipticity_residual(x, zp: ZeroModeParams, spec: QuadratureSpec = V_SPEC) -> float:
    """psi_1/psi_2 at q^2 x against the same ratio at x."""
    q2 = zp.bases.q ** 2
    r = lambda y: zero_mode_psi1(y, zp, spec) / zero_mode_psi2(y, zp)
    a, b = r(q2 * x), r(x)
    return float(abs(a - b) / max(abs(a), abs(b)))


def half_period_zero_check(tau) -> float:
    """max |theta_1(2u)| over the four half periods, all of which should vanish."""
    return max(abs(th1(2 * u, tau)) for u in (0, 0.5, tau / 2, (1 + tau) / 2))
