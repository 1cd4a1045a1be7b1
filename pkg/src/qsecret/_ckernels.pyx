# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for conditional mutual information under classical channels.

Same API as ``_pykernels``. All arrays are float64; inputs are copied to
C-contiguous layout on entry.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport log
from libc.stdlib cimport malloc, free

cnp.import_array()

cdef double LN2 = 0.6931471805599453
cdef double FLOOR = 1e-300


cdef inline double xlogx(double v) noexcept nogil:
    if v > 0.0:
        return v * log(v)
    return 0.0


cdef inline double safelog(double v) noexcept nogil:
    if v > FLOOR:
        return log(v)
    return log(FLOOR)


cdef double _cmi_of_q(double* q, Py_ssize_t nx, Py_ssize_t ny, Py_ssize_t nw,
                      double* qxw, double* qyw, double* qw) noexcept nogil:
    cdef Py_ssize_t x, y, w
    cdef double h = 0.0, v
    for w in range(nw):
        qw[w] = 0.0
    for x in range(nx):
        for w in range(nw):
            qxw[x * nw + w] = 0.0
    for y in range(ny):
        for w in range(nw):
            qyw[y * nw + w] = 0.0
    for x in range(nx):
        for y in range(ny):
            for w in range(nw):
                v = q[(x * ny + y) * nw + w]
                h += xlogx(v)
                qxw[x * nw + w] += v
                qyw[y * nw + w] += v
                qw[w] += v
    for w in range(nw):
        h += xlogx(qw[w])
        for x in range(nx):
            h -= xlogx(qxw[x * nw + w])
        for y in range(ny):
            h -= xlogx(qyw[y * nw + w])
    h /= LN2
    if h < 0.0:
        return 0.0
    return h


cdef void _apply(double* p, double* ch, double* q, Py_ssize_t nxy,
                 Py_ssize_t nz, Py_ssize_t nw) noexcept nogil:
    cdef Py_ssize_t i, z, w
    cdef double pv
    for i in range(nxy * nw):
        q[i] = 0.0
    for i in range(nxy):
        for z in range(nz):
            pv = p[i * nz + z]
            if pv == 0.0:
                continue
            for w in range(nw):
                q[i * nw + w] += pv * ch[z * nw + w]


def cmi_bits(q):
    """I(X;Y|Z) in bits of a nonnegative array indexed ``q[x, y, z]``."""
    cdef cnp.ndarray[cnp.float64_t, ndim=3, mode="c"] qa = np.ascontiguousarray(q, dtype=np.float64)
    cdef Py_ssize_t nx = qa.shape[0], ny = qa.shape[1], nw = qa.shape[2]
    cdef double* buf = <double*> malloc((nx * nw + ny * nw + nw) * sizeof(double))
    cdef double r
    try:
        r = _cmi_of_q(&qa[0, 0, 0], nx, ny, nw, buf, buf + nx * nw, buf + nx * nw + ny * nw)
    finally:
        free(buf)
    return r


def channel_cmi(p, ch):
    return channel_cmi_batch(p, np.asarray(ch, dtype=np.float64)[None])[0]


def channel_cmi_batch(p, chs):
    """CMI after each channel in the stack ``chs[k, z, zbar]``."""
    cdef cnp.ndarray[cnp.float64_t, ndim=3, mode="c"] pa = np.ascontiguousarray(p, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=3, mode="c"] ca = np.ascontiguousarray(chs, dtype=np.float64)
    cdef Py_ssize_t nx = pa.shape[0], ny = pa.shape[1], nz = pa.shape[2]
    cdef Py_ssize_t nk = ca.shape[0], nw = ca.shape[2]
    if ca.shape[1] != nz:
        raise ValueError("channel input alphabet does not match distribution")
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(nk, dtype=np.float64)
    if nk == 0:
        return out
    cdef double* q = <double*> malloc((nx * ny * nw + nx * nw + ny * nw + nw) * sizeof(double))
    cdef double* qxw = q + nx * ny * nw
    cdef double* qyw = qxw + nx * nw
    cdef double* qw = qyw + ny * nw
    cdef Py_ssize_t k
    cdef double* pp = &pa[0, 0, 0]
    cdef double* cp = &ca[0, 0, 0]
    try:
        with nogil:
            for k in range(nk):
                _apply(pp, cp + k * nz * nw, q, nx * ny, nz, nw)
                out[k] = _cmi_of_q(q, nx, ny, nw, qxw, qyw, qw)
    finally:
        free(q)
    return out


def channel_cmi_grad(p, ch):
    """Value and gradient (w.r.t. channel entries) of the CMI after ``ch``.

    Zero cells are floored at 1e-300 inside the logarithms, which keeps the
    gradient finite and pointing towards filling empty cells.
    """
    cdef cnp.ndarray[cnp.float64_t, ndim=3, mode="c"] pa = np.ascontiguousarray(p, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2, mode="c"] ca = np.ascontiguousarray(ch, dtype=np.float64)
    cdef Py_ssize_t nx = pa.shape[0], ny = pa.shape[1], nz = pa.shape[2]
    cdef Py_ssize_t nw = ca.shape[1]
    if ca.shape[0] != nz:
        raise ValueError("channel input alphabet does not match distribution")
    cdef cnp.ndarray[cnp.float64_t, ndim=2, mode="c"] grad = np.zeros((nz, nw), dtype=np.float64)
    cdef double* q = <double*> malloc((nx * ny * nw + nx * nw + ny * nw + nw) * sizeof(double))
    cdef double* qxw = q + nx * ny * nw
    cdef double* qyw = qxw + nx * nw
    cdef double* qw = qyw + ny * nw
    cdef Py_ssize_t x, y, z, w, i
    cdef double value, s, pv
    cdef double* pp = &pa[0, 0, 0]
    cdef double* gp = &grad[0, 0]
    try:
        with nogil:
            _apply(pp, &ca[0, 0], q, nx * ny, nz, nw)
            value = _cmi_of_q(q, nx, ny, nw, qxw, qyw, qw)
            for x in range(nx):
                for y in range(ny):
                    i = x * ny + y
                    for w in range(nw):
                        s = (safelog(q[i * nw + w]) + safelog(qw[w])
                             - safelog(qxw[x * nw + w]) - safelog(qyw[y * nw + w])) / LN2
                        for z in range(nz):
                            pv = pp[i * nz + z]
                            if pv != 0.0:
                                gp[z * nw + w] += pv * s
    finally:
        free(q)
    return value, grad
