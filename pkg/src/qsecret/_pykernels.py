"""Pure numpy implementations of the channel/CMI kernels.

Mirrors the API of the compiled ``_ckernels`` module exactly; used when the
extension is not built and as a cross-check in the test-suite.
"""
from __future__ import annotations

import numpy as np

_LN2 = np.log(2.0)


def _xlogy_sum(q, axes=None):
    q = np.asarray(q)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(q > 0, q * np.log(np.where(q > 0, q, 1.0)), 0.0)
    return t.sum(axis=axes)


def cmi_bits(q):
    """I(X;Y|Z) in bits of a nonnegative array indexed ``q[x, y, z]``."""
    q = np.ascontiguousarray(q, dtype=np.float64)
    h = (
        _xlogy_sum(q)
        + _xlogy_sum(q.sum(axis=(0, 1)))
        - _xlogy_sum(q.sum(axis=1))
        - _xlogy_sum(q.sum(axis=0))
    )
    return max(float(h) / _LN2, 0.0)


def channel_cmi(p, ch):
    p = np.asarray(p, dtype=np.float64)
    ch = np.asarray(ch, dtype=np.float64)
    return cmi_bits(np.tensordot(p, ch, axes=([2], [0])))


def channel_cmi_batch(p, chs):
    """CMI after each channel in the stack ``chs[k, z, zbar]``."""
    p = np.asarray(p, dtype=np.float64)
    chs = np.asarray(chs, dtype=np.float64)
    q = np.einsum("xyz,kzw->kxyw", p, chs, optimize=True)
    h = (
        _xlogy_sum(q, axes=(1, 2, 3))
        + _xlogy_sum(q.sum(axis=(1, 2)), axes=1)
        - _xlogy_sum(q.sum(axis=2), axes=(1, 2))
        - _xlogy_sum(q.sum(axis=1), axes=(1, 2))
    )
    return np.maximum(h / _LN2, 0.0)


def channel_cmi_grad(p, ch):
    """Value and gradient (w.r.t. channel entries) of the CMI after ``ch``.

    Zero cells are floored at 1e-300 inside the logarithms, which keeps the
    gradient finite and pointing towards filling empty cells.
    """
    p = np.asarray(p, dtype=np.float64)
    ch = np.asarray(ch, dtype=np.float64)
    q = np.tensordot(p, ch, axes=([2], [0]))
    qz = q.sum(axis=(0, 1))
    qxz = q.sum(axis=1)
    qyz = q.sum(axis=0)
    lq = np.log(np.maximum(q, 1e-300))
    score = (
        lq
        + np.log(np.maximum(qz, 1e-300))[None, None, :]
        - np.log(np.maximum(qxz, 1e-300))[:, None, :]
        - np.log(np.maximum(qyz, 1e-300))[None, :, :]
    )
    grad = np.einsum("xyz,xyw->zw", p, score) / _LN2
    return cmi_bits(q), grad
