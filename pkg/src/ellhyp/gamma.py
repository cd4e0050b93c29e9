"""The elliptic gamma function Gamma_{p,q} and the modified gamma G(u; omega)."""
from __future__ import annotations

import cmath
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ._backend import kernels
from .errors import InvalidArgumentError, InvalidRegimeError, PoleProximityError
from .theta import DEFAULT_EPS

POLE_GUARD = 1e-8
UNIT_TOL = 1e-12

CANONICAL_P = 0.11
CANONICAL_Q = 0.23


@dataclass(frozen=True)
class BasePair:
    p: complex = CANONICAL_P
    q: complex = CANONICAL_Q
    eps: float = DEFAULT_EPS

    def __post_init__(self):
        if not (abs(self.p) < 1 and abs(self.q) < 1):
            raise InvalidArgumentError(f"need |p|, |q| < 1, got {self.p}, {self.q}")
        if not 0 < self.eps <= 1e-8:
            raise InvalidArgumentError("eps must lie in (0, 1e-8]")

    @property
    def pq(self) -> complex:
        return complex(self.p) * complex(self.q)

    def swapped(self) -> BasePair:
        return BasePair(self.q, self.p, self.eps)

    def conjugated(self) -> BasePair:
        return BasePair(complex(self.p).conjugate(), complex(self.q).conjugate(), self.eps)


def _gamma_raw(z, p, q, eps):
    """Gamma_{p,q} for |p| < 1 and any q off the unit circle."""
    if abs(q) > 1:
        # Gamma(z; p, q) = 1 / Gamma(z / q; p, 1/q)
        val, mind = _gamma_raw(z / q, p, 1 / q, eps)
        return 1.0 / val, mind
    if abs(p) > 1:
        val, mind = _gamma_raw(z / p, 1 / p, q, eps)
        return 1.0 / val, mind
    return kernels.gamma_product(z, p, q, eps)


def gamma_pq(z, bases: BasePair | None = None, *, p=None, q=None, eps=DEFAULT_EPS):
    """Gamma_{p,q}(z) from the double product, vectorised over ``z``.

    Either pass a :class:`BasePair` or the keyword bases; the latter also
    accepts ``|q| > 1`` (or ``|p| > 1``) through the inversion
    Gamma(z; p, q) = 1 / Gamma(z/q; p, 1/q).
    """
    if bases is not None:
        p, q, eps = complex(bases.p), complex(bases.q), bases.eps
    else:
        p, q = complex(p), complex(q)
        if abs(abs(p) - 1) < UNIT_TOL or abs(abs(q) - 1) < UNIT_TOL:
            raise InvalidRegimeError("Gamma_{p,q} needs |p| != 1 and |q| != 1")
    arr = np.asarray(z, dtype=np.complex128)
    if np.any(arr == 0):
        raise InvalidArgumentError("Gamma_{p,q} is undefined at z = 0")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError("non-finite argument")
    val, mind = _gamma_raw(arr.reshape(-1), p, q, eps)
    if mind < POLE_GUARD:
        raise PoleProximityError(f"argument within {mind:.2e} of a Gamma_{{p,q}} pole")
    val = val.reshape(arr.shape)
    return complex(val) if val.ndim == 0 else val


def gamma_prod(zs, bases: BasePair | None = None, **kw):
    """Gamma(z_1, ..., z_k) = Gamma(z_1) ... Gamma(z_k)."""
    zs = np.asarray(list(zs), dtype=np.complex128)
    vals = gamma_pq(zs.reshape(-1), bases, **kw)
    return complex(np.prod(vals))


def gamma_pm(t, z, bases: BasePair | None = None, **kw):
    """Gamma(t z^{+-1}) = Gamma(t z) Gamma(t / z)."""
    return gamma_pq(t * np.asarray(z), bases, **kw) * gamma_pq(t / np.asarray(z), bases, **kw)


def bernoulli_b22(u, w1, w2):
    if w1 == 0 or w2 == 0:
        raise InvalidArgumentError("periods must be nonzero")
    return u * u / (w1 * w2) - u / w1 - u / w2 + w1 / (6 * w2) + w2 / (6 * w1) + 0.5


@dataclass(frozen=True)
class OmegaTriple:
    """Quasi-periods (w1, w2, w3) and the six bases derived from them.

    Incommensurability of the periods is a uniqueness hypothesis for G and is
    not checked.
    """

    w1: complex
    w2: complex
    w3: complex
    eps: float = DEFAULT_EPS

    def __post_init__(self):
        if 0 in (self.w1, self.w2, self.w3):
            raise InvalidArgumentError("periods must be nonzero")
        if not (abs(self.p) < 1 and abs(self.r) < 1):
            raise InvalidRegimeError(f"need |p|, |r| < 1, got {abs(self.p)}, {abs(self.r)}")

    def _e(self, x):
        return cmath.exp(2j * cmath.pi * x)

    @cached_property
    def q(self):
        return self._e(self.w1 / self.w2)

    @cached_property
    def p(self):
        return self._e(self.w3 / self.w2)

    @cached_property
    def r(self):
        return self._e(self.w3 / self.w1)

    @cached_property
    def q_tilde(self):
        return self._e(-self.w2 / self.w1)

    @cached_property
    def p_tilde(self):
        return self._e(-self.w2 / self.w3)

    @cached_property
    def r_tilde(self):
        return self._e(-self.w1 / self.w3)

    @property
    def half_sum(self):
        return (self.w1 + self.w2 + self.w3) / 2

    @property
    def unit_q(self) -> bool:
        return abs(abs(self.q) - 1) < UNIT_TOL

    def swapped12(self) -> OmegaTriple:
        return OmegaTriple(self.w2, self.w1, self.w3, self.eps)


def cubic_p(u, om: OmegaTriple):
    """The cubic exponent P(u) in the second representation of G."""
    v = u - om.half_sum
    s2 = om.w1 ** 2 + om.w2 ** 2 + om.w3 ** 2
    return v * (v * v - s2 / 4) / (3 * om.w1 * om.w2 * om.w3)


def modified_gamma_first(u, om: OmegaTriple):
    """Gamma_{p,q}(e^{2 pi i u/w2}) Gamma_{q~,r}(r e^{-2 pi i u/w1}); needs |q| != 1."""
    if om.unit_q:
        raise InvalidRegimeError("first representation of G diverges at |q| = 1")
    u = np.asarray(u, dtype=np.complex128)
    a = gamma_pq(np.exp(2j * np.pi * u / om.w2), p=om.p, q=om.q, eps=om.eps)
    b = gamma_pq(om.r * np.exp(-2j * np.pi * u / om.w1), p=om.q_tilde, q=om.r, eps=om.eps)
    return a * b


def modified_gamma_second(u, om: OmegaTriple):
    """e^{-pi i P(u)} Gamma(e^{-2 pi i u/w3}; r~, p~); needs |r~|, |p~| < 1."""
    if not (abs(om.r_tilde) < 1 and abs(om.p_tilde) < 1):
        raise InvalidRegimeError("second representation of G needs |r~|, |p~| < 1")
    u = np.asarray(u, dtype=np.complex128)
    g = gamma_pq(np.exp(-2j * np.pi * u / om.w3), p=om.r_tilde, q=om.p_tilde, eps=om.eps)
    return np.exp(-1j * np.pi * cubic_p(u, om)) * g


def modified_gamma_g(u, om: OmegaTriple):
    """G(u; omega), dispatching on |q|: the first product form off the unit
    circle, the second (cubic-exponent) form when |q| = 1."""
    val = modified_gamma_second(u, om) if om.unit_q else modified_gamma_first(u, om)
    return complex(val) if np.ndim(val) == 0 else val
