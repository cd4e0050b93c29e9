"""Kernel selection: compiled extension when importable, numpy otherwise.

Set ``ELLHYP_PURE=1`` to force the numpy path.
"""
import os

from . import _fallback

BACKEND = "python"
kernels = _fallback

if os.environ.get("ELLHYP_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as kernels  # noqa: F811
        BACKEND = "cython"
    except ImportError:
        kernels = _fallback
