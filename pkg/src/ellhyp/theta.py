"""q-Pochhammer symbols, the short theta function and Jacobi theta functions.

Multiplicative objects take a nome ``p`` with ``|p| < 1``; additive ones take
``tau`` in the upper half plane with ``p = exp(2 pi i tau)``.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .errors import InvalidArgumentError

DEFAULT_EPS = 1e-16


@dataclass(frozen=True)
class Nome:
    p: complex
    eps: float = DEFAULT_EPS

    def __post_init__(self):
        if not abs(self.p) < 1:
            raise InvalidArgumentError(f"|p| must be < 1, got {abs(self.p)}")
        if not 0 < self.eps <= 1e-8:
            raise InvalidArgumentError("eps must lie in (0, 1e-8]")


@dataclass(frozen=True)
class TauParam:
    tau: complex

    def __post_init__(self):
        if not complex(self.tau).imag > 0:
            raise InvalidArgumentError(f"Im(tau) must be > 0, got {self.tau}")

    @property
    def nome(self) -> complex:
        return cmath.exp(2j * cmath.pi * self.tau)


@dataclass(frozen=True)
class ThetaChar:
    a: int
    b: int

    def __post_init__(self):
        if self.a not in (0, 1) or self.b not in (0, 1):
            raise InvalidArgumentError("theta characteristics take values 0 or 1")


def _p_of(nome) -> tuple[complex, float]:
    if isinstance(nome, Nome):
        return complex(nome.p), nome.eps
    p = complex(nome)
    if not abs(p) < 1:
        raise InvalidArgumentError(f"|p| must be < 1, got {abs(p)}")
    return p, DEFAULT_EPS


def _tau_of(tau) -> complex:
    if isinstance(tau, TauParam):
        return complex(tau.tau)
    t = complex(tau)
    if not t.imag > 0:
        raise InvalidArgumentError(f"Im(tau) must be > 0, got {t}")
    return t


def _array_call(fn, z, *args):
    arr = np.asarray(z, dtype=np.complex128)
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError("non-finite argument")
    out = fn(arr.reshape(-1), *args).reshape(arr.shape)
    return complex(out) if out.ndim == 0 else out


def qpochhammer_infinite(z, nome=0.11):
    """(z; p)_inf, truncated once |z| |p|^j / (1 - |p|) drops below eps."""
    p, eps = _p_of(nome)
    return _array_call(kernels.qpoch, z, p, eps)


def theta_short(z, nome=0.11):
    """theta(z; p) = (z; p)_inf (p/z; p)_inf."""
    p, eps = _p_of(nome)
    arr = np.asarray(z, dtype=np.complex128)
    if np.any(arr == 0):
        raise InvalidArgumentError("theta(z; p) has an essential singularity at z = 0")
    return _array_call(kernels.theta, arr, p, eps)


def theta_prod(zs, nome=0.11):
    """Product of short thetas over an iterable of arguments."""
    out = 1.0 + 0.0j
    for z in zs:
        out = out * theta_short(z, nome)
    return out


def theta_pm(x, y, nome=0.11):
    """theta(x y^{+-1}; p) = theta(x y; p) theta(x / y; p)."""
    if np.any(np.asarray(x) == 0) or np.any(np.asarray(y) == 0):
        raise InvalidArgumentError("theta_pm needs nonzero arguments")
    return theta_short(x * y, nome) * theta_short(x / y, nome)


def theta_char(ch: ThetaChar | tuple, u, tau, eps: float = DEFAULT_EPS):
    """Theta function with characteristics (a, b) as a symmetric lattice sum."""
    if not isinstance(ch, ThetaChar):
        ch = ThetaChar(*ch)
    t = _tau_of(tau)
    u = np.asarray(u, dtype=np.complex128)
    half = ch.a / 2.0
    shift = u + ch.b / 2.0

    def term(k):
        n = k + half
        return np.exp(1j * np.pi * t * n * n + 2j * np.pi * n * shift)

    total = term(0)
    k = 1
    while True:
        pair = term(k) + term(-k)
        total = total + pair
        if np.all(np.abs(pair) < eps * (np.abs(total) + 1.0)) and k > 2:
            break
        k += 1
        if k > 10_000:
            raise InvalidArgumentError("theta series failed to converge")
    return complex(total) if total.ndim == 0 else total


def jacobi_theta(k: int, u, tau, eps: float = DEFAULT_EPS):
    """Jacobi theta_1..theta_4 in the convention theta_1 = -theta_{11}."""
    if k == 1:
        return -theta_char((1, 1), u, tau, eps)
    if k == 2:
        return theta_char((1, 0), u, tau, eps)
    if k == 3:
        return theta_char((0, 0), u, tau, eps)
    if k == 4:
        return theta_char((0, 1), u, tau, eps)
    raise InvalidArgumentError(f"Jacobi theta index must be 1..4, got {k}")


def theta1(u, tau):
    return jacobi_theta(1, u, tau)


def theta1_prod(us, tau):
    """theta_1(u_1) ... theta_1(u_k)."""
    out = 1.0 + 0.0j
    for u in us:
        out = out * jacobi_theta(1, u, tau)
    return out


def theta1_via_product(u, tau):
    """theta_1 through the Jacobi triple product; an independent route to the series."""
    t = _tau_of(tau)
    p = cmath.exp(2j * cmath.pi * t)
    u = np.asarray(u, dtype=np.complex128)
    pref = 1j * cmath.exp(1j * cmath.pi * t / 4) * qpochhammer_infinite(p, p)
    val = pref * np.exp(-1j * np.pi * u) * theta_short(np.exp(2j * np.pi * u), p)
    return complex(val) if np.ndim(val) == 0 else val
