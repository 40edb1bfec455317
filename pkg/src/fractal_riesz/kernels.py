"""Kernel dispatch: compiled extension when importable, numpy fallback otherwise.

Set FRACTAL_RIESZ_PURE=1 to force the fallback.
"""
import os

from . import _kernels_py

BACKEND = "python"
if os.environ.get("FRACTAL_RIESZ_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _kernels_py
else:
    _impl = _kernels_py

digit_product = _impl.digit_product
gram_products = _impl.gram_products

__all__ = ["BACKEND", "digit_product", "gram_products"]
