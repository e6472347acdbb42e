"""Elementary symmetric functions of eigenvalues and their matrix calculus.

For a symmetric matrix M with eigenvalues lam_1 <= ... <= lam_n,

    S_k(M) = sum over i1 < ... < ik of lam_{i1} * ... * lam_{ik},

which equals the sum of all k x k principal minors of M.  The matrix of
partial derivatives G = dS_k/dM satisfies two identities this module
exposes for verification:

    Euler:   S_k(M)   = (1/k) sum_ij M_ij G_ij
    trace:   trace(G) = (n - k + 1) S_{k-1}(M)

and, along a matrix line t -> M + tB,

    d/dt S_k(M + tB) = sum_ij B_ij G_ij(M + tB).

Derivative convention: off-diagonal entries M_ij and M_ji are treated as
independent variables, so a finite-difference probe of G_ij must perturb
both symmetric entries by half the step each.  With this convention the
Euler identity holds with the 1/k factor as written.
"""

import numpy as np

from . import kernels


def spectrum(values) -> np.ndarray:
    """Canonical ascending eigenvalue list."""
    lam = np.sort(np.asarray(values, dtype=np.float64))
    if lam.ndim != 1 or lam.size < 1:
        raise ValueError("a spectrum is a nonempty 1-D list of eigenvalues")
    return lam


def sym_matrix(entries) -> np.ndarray:
    """Validate and return a symmetric matrix as float64."""
    m = np.asarray(entries, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("expected a square matrix")
    if not np.array_equal(m, m.T):
        raise ValueError("matrix entries must be exactly symmetric")
    return m


def elem_sym(lam, kmax=None) -> np.ndarray:
    """S_0..S_kmax of a spectrum, by coefficient accumulation."""
    return kernels.elem_sym_batch(np.asarray(lam, dtype=np.float64), kmax)


def sigma_k(M, k: int) -> float:
    """S_k of the eigenvalues of symmetric ``M``."""
    M = sym_matrix(M)
    n = M.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n={n}, got k={k}")
    try:
        return float(kernels.sigma_batch(M[None], k)[0])
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(
            f"symmetric eigensolver failed on a {n}x{n} matrix: {exc}") from exc


def sigma_k_grad(M, k: int) -> np.ndarray:
    """Matrix derivative dS_k/dM (independent-entries convention)."""
    M = sym_matrix(M)
    n = M.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n={n}, got k={k}")
    return kernels.sigma_grad_batch(M[None], k)[0]


def check_euler_identity(M, k: int) -> float:
    """Residual of S_k = (1/k) sum_ij M_ij (dS_k/dM)_ij."""
    M = sym_matrix(M)
    g = sigma_k_grad(M, k)
    return abs(float(np.tensordot(M, g)) / k - sigma_k(M, k))

def check_trace_identity(M, k: int) -> float:
    """Residual of trace(dS_k/dM) = (n - k + 1) S_{k-1}."""
    M = sym_matrix(M)
    g = sigma_k_grad(M, k)
    s = elem_sym(np.linalg.eigvalsh(M), k - 1)[k - 1]
    return abs(np.trace(g) - (M.shape[0] - k + 1) * s)


def sigma_along_line(A, B, k: int, ts) -> np.ndarray:
    """S_k(A + tB) for each t; a degree-k polynomial in t."""
    A, B = sym_matrix(A), sym_matrix(B)
    ts = np.asarray(ts, dtype=np.float64)
    mats = A[None] + ts[:, None, None] * B[None]
    return kernels.sigma_batch(mats, k)


def sigma_line_derivative(A, B, k: int, t: float = 0.0) -> float:
    """Exact d/dt S_k(A + tB) via degree-k polynomial interpolation.

    S_k along a matrix line is a polynomial of degree at most k, so
    sampling at k+1 points determines the derivative exactly (up to
    conditioning); this is the oracle side of the derivative identity
    and stays independent of ``sigma_k_grad``.
    """
    nodes = t + np.linspace(-0.5, 0.5, k + 1) if k > 0 else np.array([t])
    vals = sigma_along_line(A, B, k, nodes)
    coeffs = np.polynomial.polynomial.polyfit(nodes - t, vals, deg=k)
    return float(coeffs[1]) if k >= 1 else 0.0


def line_derivative_residual(A, B, k: int, t: float = 0.0) -> float:
    """|exact-in-t derivative of S_k(A+tB) - sum_ij B_ij (dS_k/dM)_ij|."""
    lhs = sigma_line_derivative(A, B, k, t)
    g = sigma_k_grad(sym_matrix(A) + t * sym_matrix(B), k)
    return abs(lhs - float(np.tensordot(sym_matrix(B), g)))


def principal_minor_sum(M, k: int) -> float:
    """S_k by explicit enumeration of k x k principal minors.

    Exponential in n; kept as an independent test oracle only.
    """
    from itertools import combinations

    M = sym_matrix(M)
    n = M.shape[0]
    total = 0.0
    for idx in combinations(range(n), k):
        sub = M[np.ix_(idx, idx)]
        total += float(np.linalg.det(sub))
    return total
