# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled batched symmetric-function kernels.

Same contracts as ``hesskit.kernels.fallback``: eigenvalues via LAPACK
dsyev, elementary symmetric functions via coefficient accumulation,
matrix gradients via the spectral formula.  One fused C loop per batch
avoids the temporary arrays of the numpy path.
"""

import numpy as np

cimport numpy as cnp
from scipy.linalg.cython_lapack cimport dsyev

cnp.import_array()

DEF MAXN = 12
DEF LWORK = 1 + 6 * MAXN + 2 * MAXN * MAXN


cdef inline void _esym(const double* lam, int n, int kmax, double* e) noexcept nogil:
    # coefficient accumulation of prod(x + lam_i); e holds S_0..S_kmax
    cdef int i, j, top
    e[0] = 1.0
    for j in range(1, kmax + 1):
        e[j] = 0.0
    for i in range(n):
        top = i + 1
        if top > kmax:
            top = kmax
        for j in range(top, 0, -1):
            e[j] += lam[i] * e[j - 1]


cdef inline void _esym_deflated(const double* lam, int n, int j, double* out) noexcept nogil:
    # out[m] = S_j of the eigenvalues with lam[m] removed
    cdef double sub[MAXN]
    cdef double e[MAXN + 1]
    cdef int m, i, c
    for m in range(n):
        c = 0
        for i in range(n):
            if i != m:
                sub[c] = lam[i]
                c += 1
        _esym(sub, n - 1, j, e)
        out[m] = e[j]


cdef inline int _eig(double* a, int n, double* w, bint vectors) noexcept nogil:
    # symmetric eigensolve; on exit with vectors=True the rows of the
    # C-ordered buffer ``a`` are the eigenvectors (ascending eigenvalues)
    cdef char jobz = b'V' if vectors else b'N'
    cdef char uplo = b'L'
    cdef int info = 0
    cdef int lwork = LWORK
    cdef double work[LWORK]
    dsyev(&jobz, &uplo, &n, a, &n, w, work, &lwork, &info)
    return info


def _check(mats):
    mats = np.ascontiguousarray(mats, dtype=np.float64)
    if mats.ndim != 3 or mats.shape[1] != mats.shape[2]:
        raise ValueError("expected an (N, n, n) batch of matrices")
    if mats.shape[1] > MAXN:
        raise ValueError(f"compiled kernels support n <= {MAXN}")
    return mats


def elem_sym_batch(lam, kmax=None):
    """Elementary symmetric functions S_0..S_kmax for each row of ``lam``."""
    lam = np.ascontiguousarray(lam, dtype=np.float64)
    squeeze = lam.ndim == 1
    lam = np.atleast_2d(lam)
    cdef Py_ssize_t N = lam.shape[0]
    cdef int n = lam.shape[1]
    if n > MAXN:
        raise ValueError(f"compiled kernels support n <= {MAXN}")
    cdef int km = n if kmax is None else int(kmax)
    if not 0 <= km <= n:
        raise ValueError(f"kmax must be in [0, {n}], got {km}")
    out = np.empty((N, km + 1))
    cdef double[:, ::1] lv = lam
    cdef double[:, ::1] ov = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(N):
            _esym(&lv[i, 0], n, km, &ov[i, 0])
    return out[0] if squeeze else out


def sigma_all_batch(mats, kmax):
    """S_0..S_kmax of the eigenvalues of each matrix; shape (N, kmax+1)."""
    mats = _check(mats)
    cdef Py_ssize_t N = mats.shape[0]
    cdef int n = mats.shape[1]
    cdef int km = int(kmax)
    if not 0 <= km <= n:
        raise ValueError(f"kmax must be in [0, {n}], got {km}")
    out = np.empty((N, km + 1))
    cdef double[:, :, ::1] mv = mats
    cdef double[:, ::1] ov = out
    cdef double a[MAXN * MAXN]
    cdef double w[MAXN]
    cdef Py_ssize_t i
    cdef int r, c, info = 0
    with nogil:
        for i in range(N):
            for r in range(n):
                for c in range(n):
                    a[r * n + c] = mv[i, r, c]
            info = _eig(a, n, w, False)
            if info != 0:
                break
            _esym(w, n, km, &ov[i, 0])
    if info != 0:
        raise np.linalg.LinAlgError(f"dsyev failed with info={info}")
    return out


def sigma_batch(mats, k):
    """S_k of the eigenvalues of each matrix; shape (N,)."""
    return sigma_all_batch(mats, int(k))[:, int(k)]


def sigma_grad_batch(mats, k):
    """Matrix gradient of M -> S_k(eigvals(M)) for each matrix; (N, n, n)."""
    mats = _check(mats)
    cdef Py_ssize_t N = mats.shape[0]
    cdef int n = mats.shape[1]
    cdef int kk = int(k)
    out = np.zeros((N, n, n))
    if kk == 0:
        return out
    if not 1 <= kk <= n:
        raise ValueError(f"k must be in [1, {n}], got {kk}")
    cdef double[:, :, ::1] mv = mats
    cdef double[:, :, ::1] ov = out
    cdef double a[MAXN * MAXN]
    cdef double w[MAXN]
    cdef double d[MAXN]
    cdef double acc
    cdef Py_ssize_t i
    cdef int r, c, m, info = 0
    with nogil:
        for i in range(N):
            for r in range(n):
                for c in range(n):
                    a[r * n + c] = mv[i, r, c]
            info = _eig(a, n, w, True)
            if info != 0:
                break
            _esym_deflated(w, n, kk - 1, d)
            # rows of ``a`` are eigenvectors: G_rc = sum_m d[m] a[m,r] a[m,c]
            for r in range(n):
                for c in range(r, n):
                    acc = 0.0
                    for m in range(n):
                        acc += d[m] * a[m * n + r] * a[m * n + c]
                    ov[i, r, c] = acc
                    ov[i, c, r] = acc
    if info != 0:
        raise np.linalg.LinAlgError(f"dsyev failed with info={info}")
    return out


def sigma_grad_contract_batch(mats, vmats, k):
    """sum_ij V_ij * (dS_k/dM)_ij for each matrix pair; shape (N,)."""
    mats = _check(mats)
    vmats = _check(vmats)
    if mats.shape != vmats.shape:
        raise ValueError("matrix batches must have identical shapes")
    cdef Py_ssize_t N = mats.shape[0]
    cdef int n = mats.shape[1]
    cdef int kk = int(k)
    out = np.zeros(N)
    if kk == 0:
        return out
    if not 1 <= kk <= n:
        raise ValueError(f"k must be in [1, {n}], got {kk}")
    cdef double[:, :, ::1] mv = mats
    cdef double[:, :, ::1] vv = vmats
    cdef double[::1] ov = out
    cdef double a[MAXN * MAXN]
    cdef double w[MAXN]
    cdef double d[MAXN]
    cdef double g, acc
    cdef Py_ssize_t i
    cdef int r, c, m, info = 0
    with nogil:
        for i in range(N):
            for r in range(n):
                for c in range(n):
                    a[r * n + c] = mv[i, r, c]
            info = _eig(a, n, w, True)
            if info != 0:
                break
            _esym_deflated(w, n, kk - 1, d)
            acc = 0.0
            for r in range(n):
                for c in range(n):
                    g = 0.0
                    for m in range(n):
                        g += d[m] * a[m * n + r] * a[m * n + c]
                    acc += g * vv[i, r, c]
            ov[i] = acc
    if info != 0:
        raise np.linalg.LinAlgError(f"dsyev failed with info={info}")
    return out
