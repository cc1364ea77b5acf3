"""Dense linear-algebra primitives.

Matrices are plain 2-D ``numpy`` float arrays.  A :class:`~nrmselect.problem.Dataset`
stores its sensing matrices stacked as an ``(n, p, q)`` array, which lets the
sensing operator and its adjoint run as single BLAS calls.
"""

import numpy as np

from .errors import InvalidInputError


def as_matrix(M, name="M"):
    """Return `M` as a finite 2-D float64 array or raise InvalidInputError."""
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2:
        raise InvalidInputError(f"{name} must be 2-D, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise InvalidInputError(f"{name} has non-finite entries")
    return M


def svd(M):
    """Thin SVD ``M = U diag(s) Vt`` with `s` nonincreasing.

    Returns
    -------
    U : ndarray, shape (p, r)
    s : ndarray, shape (r,)
    Vt : ndarray, shape (r, q)
    """
    M = as_matrix(M)
    return np.linalg.svd(M, full_matrices=False)


def singular_values(M):
    """Singular values of `M`, nonincreasing, length ``min(p, q)``."""
    M = as_matrix(M)
    if M.size == 0:
        return np.zeros(0)
    return np.linalg.svd(M, compute_uv=False)


def spectral_norm(M):
    s = singular_values(M)
    return float(s[0]) if s.size else 0.0


def nuclear_norm(M):
    return float(np.sum(singular_values(M)))


def frobenius_norm(M):
    return float(np.sqrt(np.sum(singular_values(M) ** 2)))


def svt(M, tau):
    r"""Singular value thresholding, the prox of ``tau * ||.||_*``.

    .. math::
        \operatorname{svt}(M, \tau) = U \operatorname{diag}(\max(\sigma - \tau, 0)) V^T
            = \arg\min_Z \tfrac12 \|Z - M\|_F^2 + \tau \|Z\|_*

    Parameters
    ----------
    M : array_like, shape (p, q)
    tau : float
        Threshold, must be nonnegative.

    Returns
    -------
    Z : ndarray, shape (p, q)
    """
    return svt_with_values(M, tau)[0]


def svt_with_values(M, tau):
    """Like :func:`svt` but also returns the shrunken singular values."""
    if not np.isfinite(tau) or tau < 0:
        raise InvalidInputError(f"threshold must be a nonnegative finite number, got {tau}")
    U, s, Vt = svd(M)
    shrunk = np.maximum(s - tau, 0.0)
    keep = shrunk > 0
    Z = (U[:, keep] * shrunk[keep]) @ Vt[keep]
    return Z, shrunk


def adjoint_apply(data, theta):
    """Return ``sum_i theta_i X_i`` for the sensing matrices of `data`."""
    theta = np.asarray(theta, dtype=np.float64)
    if theta.shape != (data.n,):
        raise InvalidInputError(f"theta must have length n={data.n}, got shape {theta.shape}")
    return (theta @ data.flat).reshape(data.p, data.q)


def forward_apply(data, B):
    """Return ``(<X_1, B>, ..., <X_n, B>)`` with the trace inner product."""
    B = np.asarray(B, dtype=np.float64)
    if B.shape != (data.p, data.q):
        raise InvalidInputError(
            f"B must have shape {(data.p, data.q)}, got {B.shape}")
    return data.flat @ B.ravel()
