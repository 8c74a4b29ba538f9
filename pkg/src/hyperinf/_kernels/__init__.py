"""Kernel backend selection.

The hot inner loops (multilinear row products, their gradients, and the
per-edge zeta forms) exist twice: a compiled Cython extension and a NumPy
fallback.  The compiled backend is preferred when available; set
HYPERINF_BACKEND=pure or HYPERINF_BACKEND=fast to force one.
"""
import os

from . import pure

_choice = os.environ.get("HYPERINF_BACKEND", "")

if _choice == "pure":
    _impl = pure
else:
    try:
        from . import _fast as _impl
    except ImportError:
        if _choice == "fast":
            raise
        _impl = pure

BACKEND = _impl.BACKEND
row_products = _impl.row_products
row_grad_accumulate = _impl.row_grad_accumulate
zeta_edge_values = _impl.zeta_edge_values
zeta_edge_grad = _impl.zeta_edge_grad
