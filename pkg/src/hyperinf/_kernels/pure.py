"""NumPy reference implementations of the evaluation kernels.

These are the fallback backend used when the compiled extension is not
available.  Both backends implement the same four functions and must agree
to floating-point roundoff; see tests/test_kernels.py.
"""
import numpy as np

BACKEND = "pure"


def row_products(idx, v):
    """Per-row product of v entries: out[r] = prod_t v[idx[r, t]]."""
    if idx.shape[0] == 0:
        return np.zeros(0)
    return np.prod(v[idx], axis=1)


def row_grad_accumulate(idx, w, v):
    """Gradient of sum_r w[r] * prod_t v[idx[r, t]] with respect to v.

    Uses leave-one-out products per position, so repeated indices within a
    row are handled without special-casing zeros.
    """
    n = v.shape[0]
    out = np.zeros(n)
    if idx.shape[0] == 0:
        return out
    vals = v[idx]  # (R, m)
    m = idx.shape[1]
    # prefix[r, t] = prod of vals[r, :t], suffix[r, t] = prod of vals[r, t+1:]
    prefix = np.ones_like(vals)
    suffix = np.ones_like(vals)
    prefix[:, 1:] = np.cumprod(vals[:, :-1], axis=1)
    suffix[:, :-1] = np.cumprod(vals[:, :0:-1], axis=1)[:, ::-1]
    contrib = w[:, None] * prefix * suffix
    for t in range(m):
        np.add.at(out, idx[:, t], contrib[:, t])
    return out


def zeta_edge_values(w_edges, patterns, mpow):
    """Per-edge zeta value: out[e] = sum_c (patterns[c] . w_edges[e]) ** mpow."""
    if w_edges.shape[0] == 0:
        return np.zeros(0)
    t = w_edges @ patterns.T  # (E, C)
    return np.sum(t**mpow, axis=1)


def zeta_edge_grad(w_edges, patterns, mpow):
    """Per-edge gradient of zeta with respect to the edge's w entries."""
    if w_edges.shape[0] == 0:
        return np.zeros_like(w_edges)
    t = w_edges @ patterns.T  # (E, C)
    return (mpow * t ** (mpow - 1)) @ patterns
