"""Pure numpy kernels for the infinite products.

Same contract as the compiled ``_kernels`` module: inputs are 1-d complex128
arrays, bases satisfy ``|p|, |q| < 1``, and every routine returns a fresh
array.  ``gamma_product`` additionally reports the smallest denominator
modulus met, so callers can flag pole proximity.
"""
import numpy as np

_CHUNK = 2048


def _as_c128(z):
    return np.ascontiguousarray(z, dtype=np.complex128).reshape(-1)


def qpoch(z, p, eps):
    z = _as_c128(z)
    out = np.ones_like(z)
    ap = abs(p)
    if z.size == 0:
        return out
    zmax = float(np.max(np.abs(z)))
    if zmax == 0.0:
        return out
    pj = 1.0 + 0.0j
    # tail bound |z| |p|^j / (1 - |p|)
    while zmax * abs(pj) >= eps * (1.0 - ap):
        out *= 1.0 - z * pj
        pj *= p
        if pj == 0:
            break
    return out


def theta(z, p, eps):
    z = _as_c128(z)
    return qpoch(z, p, eps) * qpoch(p / z, p, eps)


def _lattice_weights(p, q, scale, eps):
    """Monomials p^j q^k whose contribution scale*|p^j q^k| exceeds the cut."""
    ap, aq = abs(p), abs(q)
    cut = eps * (1.0 - ap) * (1.0 - aq) / max(scale, 1.0) / 4.0
    weights = []
    pj = 1.0 + 0.0j
    while abs(pj) >= cut:
        qk = pj
        while abs(qk) >= cut:
            weights.append(qk)
            qk *= q
            if qk == 0:
                break
        pj *= p
        if pj == 0:
            break
    return np.array(weights, dtype=np.complex128)


def gamma_product(z, p, q, eps):
    z = _as_c128(z)
    if z.size == 0:
        return z.copy(), np.inf
    az = np.abs(z)
    pq = p * q
    scale = max(float(az.max()), abs(pq) / float(az.min()))
    w = _lattice_weights(p, q, scale, eps)
    out = np.empty_like(z)
    mind = np.inf
    for s in range(0, z.size, _CHUNK):
        zz = z[s:s + _CHUNK, None]
        den = 1.0 - zz * w[None, :]
        num = 1.0 - (pq / zz) * w[None, :]
        mind = min(mind, float(np.abs(den).min()))
        out[s:s + _CHUNK] = np.prod(num / den, axis=1)
    return out, mind
