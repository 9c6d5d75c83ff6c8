# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels.

Same signatures and semantics as ``_kernels_py``; that module is the
reference the tests compare against.
"""

import numpy as np

from libc.math cimport log2
from libc.stdlib cimport free, malloc
from scipy.linalg.cython_lapack cimport zheev

cdef double CLIP = 1e-12


cdef int _heev(const double complex[:, :] h, double *w) except -1:
    # Eigenvalues only, ascending, reading the lower triangle like numpy.eigvalsh.
    cdef int n = <int> h.shape[0]
    cdef int lda = n if n > 0 else 1
    cdef int lwork = 2 * n if n > 0 else 1
    cdef int nr = 3 * n - 2 if n > 1 else 1
    cdef int info = 0
    cdef char jobz = b'N'
    cdef char uplo = b'L'
    cdef Py_ssize_t i, j
    if h.shape[1] != n:
        raise ValueError("matrix must be square")
    if n == 0:
        return 0
    cdef double complex *a = <double complex *> malloc(n * n * sizeof(double complex))
    cdef double complex *work = <double complex *> malloc(lwork * sizeof(double complex))
    cdef double *rwork = <double *> malloc(nr * sizeof(double))
    if a == NULL or work == NULL or rwork == NULL:
        free(a)
        free(work)
        free(rwork)
        raise MemoryError()
    for j in range(n):
        for i in range(n):
            a[i + j * n] = h[i, j]
    zheev(&jobz, &uplo, &n, a, &lda, w, work, &lwork, rwork, &info)
    free(a)
    free(work)
    free(rwork)
    if info != 0:
        raise np.linalg.LinAlgError(f"zheev failed with info={info}")
    return 0


def eigvalsh(const double complex[:, :] h):
    """Ascending eigenvalues of a Hermitian matrix (lower triangle is read)."""
    out = np.empty(h.shape[0], dtype=np.float64)
    cdef double[::1] w = out
    if h.shape[0] > 0:
        _heev(h, &w[0])
    return out


def entropy_bits(const double complex[:, :] h):
    """Von Neumann entropy in bits, eigenvalues below ``CLIP`` dropped."""
    cdef Py_ssize_t n = h.shape[0], i
    cdef double s = 0.0, x
    if n == 0:
        return 0.0
    cdef double *w = <double *> malloc(n * sizeof(double))
    if w == NULL:
        raise MemoryError()
    try:
        _heev(h, w)
        for i in range(n):
            x = w[i]
            if x > CLIP:
                s -= x * log2(x)
    finally:
        free(w)
    return s


def trace_norm_hermitian(const double complex[:, :] h):
    cdef Py_ssize_t n = h.shape[0], i
    cdef double s = 0.0
    if n == 0:
        return 0.0
    cdef double *w = <double *> malloc(n * sizeof(double))
    if w == NULL:
        raise MemoryError()
    try:
        _heev(h, w)
        for i in range(n):
            s += w[i] if w[i] >= 0 else -w[i]
    finally:
        free(w)
    return s


cdef object _offsets(object dims, object flags, bint want):
    # Row-major offsets into the full index of every joint index over the
    # subsystems whose flag equals ``want``.
    cdef Py_ssize_t n = len(dims), i, j, m = 0, total = 1, acc
    cdef Py_ssize_t *sd = <Py_ssize_t *> malloc((n + 1) * sizeof(Py_ssize_t))
    cdef Py_ssize_t *ss = <Py_ssize_t *> malloc((n + 1) * sizeof(Py_ssize_t))
    cdef Py_ssize_t *dig = <Py_ssize_t *> malloc((n + 1) * sizeof(Py_ssize_t))
    if sd == NULL or ss == NULL or dig == NULL:
        free(sd)
        free(ss)
        free(dig)
        raise MemoryError()
    try:
        acc = 1
        for i in range(n - 1, -1, -1):
            if bool(flags[i]) == want:
                sd[m] = <Py_ssize_t> dims[i]
                ss[m] = acc
                m += 1
            acc *= <Py_ssize_t> dims[i]
        # sd/ss were filled last-subsystem first; digit 0 is the fastest.
        for j in range(m):
            total *= sd[j]
            dig[j] = 0
        out = np.empty(total, dtype=np.intp)
        _fill(out, sd, ss, dig, m, total)
        return out
    finally:
        free(sd)
        free(ss)
        free(dig)


cdef int _fill(object out, Py_ssize_t *sd, Py_ssize_t *ss, Py_ssize_t *dig,
               Py_ssize_t m, Py_ssize_t total) except -1:
    cdef Py_ssize_t[::1] o = out
    cdef Py_ssize_t idx, j, cur = 0
    for idx in range(total):
        o[idx] = cur
        j = 0
        while j < m:
            dig[j] += 1
            cur += ss[j]
            if dig[j] < sd[j]:
                break
            cur -= ss[j] * sd[j]
            dig[j] = 0
            j += 1
    return 0


def partial_trace(const double complex[:, :] rho, dims, keep):
    """Trace out every subsystem whose ``keep`` flag is false.

    Kept subsystems stay in their original order.
    """
    ok_arr = _offsets(dims, keep, True)
    ot_arr = _offsets(dims, keep, False)
    cdef Py_ssize_t[::1] ok = ok_arr
    cdef Py_ssize_t[::1] ot = ot_arr
    cdef Py_ssize_t dk = ok.shape[0], dt = ot.shape[0], a, b, t
    cdef double complex s
    out = np.empty((dk, dk), dtype=np.complex128)
    cdef double complex[:, ::1] res = out
    for a in range(dk):
        for b in range(dk):
            s = 0
            for t in range(dt):
                s = s + rho[ok[a] + ot[t], ok[b] + ot[t]]
            res[a, b] = s
    return out


def pure_marginal(const double complex[::1] psi, dims, keep):
    """Reduced density matrix of the pure state ``psi`` on the kept subsystems."""
    ok_arr = _offsets(dims, keep, True)
    ot_arr = _offsets(dims, keep, False)
    cdef Py_ssize_t[::1] ok = ok_arr
    cdef Py_ssize_t[::1] ot = ot_arr
    cdef Py_ssize_t dk = ok.shape[0], dt = ot.shape[0], a, b, t
    cdef double complex s
    out = np.empty((dk, dk), dtype=np.complex128)
    cdef double complex[:, ::1] res = out
    for a in range(dk):
        for b in range(a, dk):
            s = 0
            for t in range(dt):
                s = s + psi[ok[a] + ot[t]] * psi[ok[b] + ot[t]].conjugate()
            res[a, b] = s
            res[b, a] = s.conjugate()
    return out


def kraus_apply(const double complex[:, :, :] kraus, const double complex[:, :] rho,
                Py_ssize_t rest):
    """``sum_k (1_rest (x) K_k) rho (1_rest (x) K_k)^dagger`` with the channel on the last factor."""
    cdef Py_ssize_t nk = kraus.shape[0], dout = kraus.shape[1], din = kraus.shape[2]
    cdef Py_ssize_t no = rest * dout, ni = rest * din
    cdef Py_ssize_t k, a, b, i, j, m, nn
    cdef double complex s
    out = np.zeros((no, no), dtype=np.complex128)
    tmp = np.empty((no, ni), dtype=np.complex128)
    cdef double complex[:, ::1] res = out
    cdef double complex[:, ::1] t = tmp
    for k in range(nk):
        for a in range(rest):
            for i in range(dout):
                for nn in range(ni):
                    s = 0
                    for m in range(din):
                        s = s + kraus[k, i, m] * rho[a * din + m, nn]
                    t[a * dout + i, nn] = s
        for a in range(no):
            for b in range(rest):
                for j in range(dout):
                    s = 0
                    for nn in range(din):
                        s = s + t[a, b * din + nn] * kraus[k, j, nn].conjugate()
                    res[a, b * dout + j] = res[a, b * dout + j] + s
    return out
