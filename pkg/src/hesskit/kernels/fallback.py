"""Pure numpy implementation of the batched symmetric-function kernels.

These are the hot loops of the toolkit: every grid sweep evaluates the
elementary symmetric functions of Hessian eigenvalues (and their matrix
gradients) at each node.  The compiled core in ``_fast`` implements the
same contracts; this module is the reference and the import-time
fallback.

Conventions
-----------
* ``mats`` is an array of shape (N, n, n) of symmetric matrices.
* Eigenvalues come from the symmetric eigensolver in ascending order.
* ``S_j`` denotes the j-th elementary symmetric function of the
  eigenvalues, computed by coefficient accumulation of prod(x + lam_i)
  (stable, O(n^2) per matrix), never by subset enumeration.
* The matrix gradient d S_k / d M uses the spectral form
  Q diag(S_{k-1}(lam with lam_m removed)) Q^T, which treats the two
  off-diagonal entries of a symmetric matrix as independent variables.
"""

import numpy as np


def elem_sym_batch(lam, kmax=None):
    """Elementary symmetric functions S_0..S_kmax for each row of ``lam``.

    ``lam`` has shape (N, n); the result has shape (N, kmax + 1) with
    S_0 = 1 in the first column.
    """
    lam = np.asarray(lam, dtype=np.float64)
    squeeze = lam.ndim == 1
    lam = np.atleast_2d(lam)
    n = lam.shape[1]
    if kmax is None:
        kmax = n
    if not 0 <= kmax <= n:
        raise ValueError(f"kmax must be in [0, {n}], got {kmax}")
    e = np.zeros((lam.shape[0], kmax + 1))
    e[:, 0] = 1.0
    for i in range(n):
        for j in range(min(i + 1, kmax), 0, -1):
            e[:, j] += lam[:, i] * e[:, j - 1]
    return e[0] if squeeze else e


def _deflated_elem_sym(lam, j):
    """S_j of the eigenvalue list with one entry removed, for each entry.

    Returns shape (N, n): column m holds S_j(lam with lam_m deleted).
    """
    N, n = lam.shape
    out = np.empty((N, n))
    cols = np.arange(n)
    for m in range(n):
        sub = lam[:, cols != m]
        out[:, m] = elem_sym_batch(sub, j)[:, j] if n > 1 else 1.0 if j == 0 else 0.0
    return out


def sigma_batch(mats, k):
    """S_k of the eigenvalues of each matrix; shape (N,)."""
    return sigma_all_batch(mats, k)[:, k]


def sigma_all_batch(mats, kmax):
    """S_0..S_kmax of the eigenvalues of each matrix; shape (N, kmax+1)."""
    mats = np.asarray(mats, dtype=np.float64)
    lam = np.linalg.eigvalsh(mats)
    return elem_sym_batch(lam, kmax)


def sigma_grad_batch(mats, k):
    """Matrix gradient of M -> S_k(eigvals(M)) for each matrix; (N, n, n)."""
    mats = np.asarray(mats, dtype=np.float64)
    n = mats.shape[-1]
    if k == 0:
        return np.zeros_like(mats)
    lam, q = np.linalg.eigh(mats)
    d = _deflated_elem_sym(lam, k - 1) if n > 1 else np.ones_like(lam)
    return np.einsum("nim,nm,njm->nij", q, d, q)


def sigma_grad_contract_batch(mats, vmats, k):
    """sum_ij V_ij * (dS_k/dM)_ij for each matrix pair; shape (N,)."""
    g = sigma_grad_batch(mats, k)
    return np.einsum("nij,nij->n", g, np.asarray(vmats, dtype=np.float64))
