"""Compiled vs numpy kernels on the infinite products.

    python3 benchmarks/bench_kernels.py [--sizes 64 1024 16384] [--repeat 5]

Also times one elliptic beta quadrature end to end under each backend
(the backend is fixed at import, so that part runs in subprocesses).
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from ellhyp import _fallback

try:
    from ellhyp import _kernels
except ImportError:
    _kernels = None

P, Q, EPS = 0.11, 0.23, 1e-16

END_TO_END = """
import timeit
from ellhyp import BACKEND
from ellhyp.gamma import BasePair
from ellhyp.integrals import BalancedParams, ihm_integral
b = BasePair()
t = (0.5, 0.6j, -0.55, 0.45 - 0.2j, 0.7)
import numpy as np
t = t + (b.pq / np.prod(t),)
P = BalancedParams(0, t, b)
n = 20
print(BACKEND, min(timeit.repeat(lambda: ihm_integral(P), number=n, repeat=3)) / n * 1e3)
"""


def _best(fn, repeat):
    n, _ = timeit.Timer(fn).autorange()
    return min(timeit.repeat(fn, number=n, repeat=repeat)) / n


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[64, 1024, 16384])
    ap.add_argument("--repeat", type=int, default=5)
    ns = ap.parse_args(argv)
    if _kernels is None:
        print("compiled extension not built; run `pip install -e . --no-build-isolation` first")
        return 1

    rng = np.random.default_rng(0)
    print(f"{'kernel':<14}{'n':>7}{'numpy ms':>12}{'cython ms':>12}{'speedup':>9}{'max rel diff':>14}")
    for n in ns.sizes:
        z = 0.3 * np.exp(2j * np.pi * rng.random(n)) * (1 + rng.random(n))
        cases = {
            "qpoch": lambda m: m.qpoch(z, P, EPS),
            "theta": lambda m: m.theta(z, P, EPS),
            "gamma_product": lambda m: m.gamma_product(z, P, Q, EPS)[0],
        }
        for name, call in cases.items():
            tp = _best(lambda: call(_fallback), ns.repeat)
            tc = _best(lambda: call(_kernels), ns.repeat)
            a, b = call(_fallback), call(_kernels)
            diff = float(np.max(np.abs(a - b) / np.abs(a)))
            print(f"{name:<14}{n:>7}{tp * 1e3:>12.3f}{tc * 1e3:>12.3f}{tp / tc:>9.1f}{diff:>14.1e}")

    print("\nelliptic beta quadrature, one evaluation:")
    for pure in ("0", "1"):
        env = dict(os.environ, ELLHYP_PURE=pure)
        out = subprocess.run([sys.executable, "-c", END_TO_END], env=env, capture_output=True, text=True, check=True)
        backend, ms = out.stdout.split()
        print(f"  {backend:<8}{float(ms):8.2f} ms")
    return 0


if __name__ == "__main__":
    sys.exit(main())
