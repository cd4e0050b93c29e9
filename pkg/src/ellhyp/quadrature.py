"""Trapezoidal quadrature on the unit circle with node doubling.

For an integrand analytic in an annulus r < |z| < 1/r the N-point rule is
exact on Laurent monomials z^k with |k| < N and converges like r^N, so
doubling N until two successive means agree is both cheap and reliable.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import IntegrandFailureError, InvalidArgumentError
from .gamma import BasePair
from .theta import qpochhammer_infinite, theta_short


@dataclass(frozen=True)
class QuadratureSpec:
    n0: int = 256
    n_max: int = 16384
    rtol: float = 1e-11
    delta_margin: float = 0.05

    def __post_init__(self):
        if self.n0 < 64 or self.n0 & (self.n0 - 1):
            raise InvalidArgumentError("n0 must be a power of two >= 64")
        if self.n_max > 2 ** 20 or self.n_max < self.n0:
            raise InvalidArgumentError("n_max must lie in [n0, 2^20]")
        if not 1e-14 <= self.rtol <= 1e-2:
            raise InvalidArgumentError("rtol must lie in [1e-14, 1e-2]")
        if not 0 < self.delta_margin < 0.5:
            raise InvalidArgumentError("delta_margin must lie in (0, 0.5)")

    def with_(self, **kw) -> QuadratureSpec:
        return replace(self, **kw)


DEFAULT_SPEC = QuadratureSpec()
INNER_SPEC = QuadratureSpec(n0=256, n_max=1024, rtol=1e-8)


@dataclass(frozen=True)
class QuadratureResult:
    value: complex
    error_estimate: float
    nodes_used: int
    converged: bool
    history: tuple = ()


def _nodes(n: int, odd_only: bool = False) -> np.ndarray:
    k = np.arange(1, n, 2) if odd_only else np.arange(n)
    return np.exp(2j * np.pi * k / n)


def _eval(f, z):
    vals = np.asarray(f(z), dtype=np.complex128)
    if vals.shape != z.shape:
        vals = np.broadcast_to(vals, z.shape)
    bad = ~np.isfinite(vals)
    if bad.any():
        node = complex(z[np.argmax(bad)])
        raise IntegrandFailureError(f"integrand not finite at node {node}", node=node)
    return vals


def circle_mean(f, spec: QuadratureSpec = DEFAULT_SPEC) -> QuadratureResult:
    """(1/2 pi i) \\oint f(z) dz/z, i.e. the mean of f over N equispaced nodes.

    ``f`` must accept a 1-d complex array of nodes.  Doubling reuses the
    previous nodes; sums use numpy's pairwise reduction so the result does not
    depend on evaluation order.
    """
    n = spec.n0
    vals = _eval(f, _nodes(n))
    total = np.sum(vals)
    value = total / n
    history = [(n, value)]
    # the even nodes form the N/2 grid, so the first level already has an estimate
    err = abs(value - np.mean(vals[::2])) / max(abs(value), 1e-300)
    if err < spec.rtol:
        return QuadratureResult(complex(value), float(err), n, True, tuple(history))
    while n < spec.n_max:
        total = total + np.sum(_eval(f, _nodes(2 * n, odd_only=True)))
        n *= 2
        new = total / n
        err = abs(new - value) / max(abs(new), 1e-300)
        value = new
        history.append((n, value))
        if err < spec.rtol:
            return QuadratureResult(complex(value), float(err), n, True, tuple(history))
    return QuadratureResult(complex(value), float(err), n, False, tuple(history))


def circle_mean_batch(f, spec: QuadratureSpec = DEFAULT_SPEC):
    """Node-doubling mean for a family of integrands evaluated together.

    ``f`` maps a 1-d array of N nodes to an (M, N) array. Returns
    (values, error_estimate, nodes_used, converged) with ``values`` of shape
    (M,); convergence is judged on the worst member.
    """
    def ev(z):
        vals = np.asarray(f(z), dtype=np.complex128)
        bad = ~np.isfinite(vals)
        if bad.any():
            node = complex(z[np.argmax(bad.any(axis=0))])
            raise IntegrandFailureError(f"integrand not finite at node {node}", node=node)
        return vals

    n = spec.n0
    vals = ev(_nodes(n))
    total = vals.sum(axis=1)
    value = total / n
    err = float(np.max(np.abs(value - vals[:, ::2].mean(axis=1)) / np.maximum(np.abs(value), 1e-300)))
    if err < spec.rtol:
        return value, err, n, True
    while n < spec.n_max:
        total = total + ev(_nodes(2 * n, odd_only=True)).sum(axis=1)
        n *= 2
        new = total / n
        err = float(np.max(np.abs(new - value) / np.maximum(np.abs(new), 1e-300)))
        value = new
        if err < spec.rtol:
            return value, err, n, True
    return value, err, n, False


def kappa_factor(bases: BasePair) -> complex:
    """(p; p)_inf (q; q)_inf / (4 pi i)."""
    p, q = complex(bases.p), complex(bases.q)
    return qpochhammer_infinite(p, p) * qpochhammer_infinite(q, q) / (4j * math.pi)


def contour_factor(bases: BasePair) -> complex:
    """kappa times 2 pi i: kappa \\oint f dz/z = contour_factor * circle_mean(f)."""
    p, q = complex(bases.p), complex(bases.q)
    return qpochhammer_infinite(p, p) * qpochhammer_infinite(q, q) / 2


def kappa_integral(f, bases: BasePair, spec: QuadratureSpec = DEFAULT_SPEC) -> QuadratureResult:
    res = circle_mean(f, spec)
    c = contour_factor(bases)
    return QuadratureResult(c * res.value, res.error_estimate, res.nodes_used, res.converged,
                            tuple((n, c * v) for n, v in res.history))


def weight(z, bases: BasePair):
    """1/Gamma(z^{+-2}) = theta(z^{-2}; p) theta(z^2; q), entire away from z = 0."""
    return theta_short(np.asarray(z) ** -2, bases.p) * theta_short(np.asarray(z) ** 2, bases.q)


class Residual(float):
    """A relative residual that also remembers how it was obtained."""

    def __new__(cls, value, nodes_used: int = 0, converged: bool = True):
        obj = super().__new__(cls, value)
        obj.nodes_used = int(nodes_used)
        obj.converged = bool(converged)
        return obj

    @classmethod
    def of(cls, num, terms, results=()):
        """|num| / max |term|, folding in node counts and convergence of ``results``."""
        scale = max((abs(complex(t)) for t in terms), default=0.0)
        val = abs(complex(num)) / scale if scale > 0 else abs(complex(num))
        nodes = max((r.nodes_used for r in results), default=0)
        conv = all(r.converged for r in results)
        return cls(val, nodes, conv)


def pole_margin_check(params, delta: float) -> bool:
    """True iff every |t_j| <= 1 - delta."""
    return all(abs(complex(t)) <= 1 - delta for t in params)
