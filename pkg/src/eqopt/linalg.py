"""Dense linear-algebra kernels.

SVD-based Moore-Penrose pseudo-inverse, rank-revealing QR reduction of
linear systems to full row rank, and orthonormal null-space bases. These
are the primitives everything above (constrained expressions, solvers)
is built on.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ComputationError, InfeasibleConstraintsError, RankDeficiencyError

EPS = float(np.finfo(np.float64).eps)


def as_matrix(a, name="matrix"):
    """Coerce to a finite 2-D float64 array or raise ValueError."""
    out = np.asarray(a, dtype=np.float64)
    if out.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {out.shape}")
    if not np.all(np.isfinite(out)):
        raise ValueError(f"{name} contains non-finite entries")
    return out


def as_vector(v, name="vector"):
    """Coerce to a finite 1-D float64 array or raise ValueError."""
    out = np.asarray(v, dtype=np.float64)
    if out.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {out.shape}")
    if not np.all(np.isfinite(out)):
        raise ValueError(f"{name} contains non-finite entries")
    return out


def pseudo_inverse(m, tol=None):
    """Moore-Penrose pseudo-inverse via singular value decomposition.

    A singular value ``s[i]`` is inverted only when
    ``s[i] > tol * max(rows, cols) * s[0]``; smaller ones are treated as
    zero, which makes the result well defined for rank-deficient input.

    Parameters
    ----------
    m : (r, c) array_like
        Matrix to invert. May be rectangular or rank deficient.
    tol : float, optional
        Relative cutoff for singular values. Defaults to machine epsilon.
        Must be nonnegative.

    Returns
    -------
    (c, r) ndarray
        The pseudo-inverse ``m^+``.

    Raises
    ------
    ComputationError
        If the SVD fails to converge.
    """
    m = as_matrix(m, "m")
    if tol is None:
        tol = EPS
    elif tol < 0:
        raise ValueError("tol must be nonnegative")
    if min(m.shape) == 0:
        return np.zeros((m.shape[1], m.shape[0]))
    try:
        u, s, vt = np.linalg.svd(m, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise ComputationError(
            f"SVD did not converge for a {m.shape[0]}x{m.shape[1]} matrix"
        ) from exc
    cutoff = tol * max(m.shape) * s[0]
    inv = np.zeros_like(s)
    keep = s > cutoff
    inv[keep] = 1.0 / s[keep]
    return (vt.T * inv) @ u.T


@dataclass
class ReducedConstraints:
    """Equivalent full-row-rank constraint system produced by :func:`rrqr_reduce`."""

    a_tilde: np.ndarray  # (p, n) full-row-rank coefficient matrix
    b_tilde: np.ndarray  # (p,) right-hand side
    rank: int  # p, the numerical row rank of the original A
    permutation: np.ndarray  # (n,) column pivot order chosen by the QR


def rrqr_reduce(a, b, eps=None):
    """Replace ``A x = b`` with an equivalent full-row-rank system.

    Column-pivoted QR gives ``A P = Q R``. With ``e = |diag(R)|`` the
    numerical rank is the largest ``k`` such that
    ``e[k-1] > eps * max(m, n) * e[0]``, and the reduced system is the
    first ``p`` rows of ``R P^T x = Q^T b``. The discarded rows have a
    numerically zero left-hand side; a nonzero right-hand side there
    means the original system is contradictory.

    Parameters
    ----------
    a : (m, n) array_like
    b : (m,) array_like
    eps : float, optional
        Relative tolerance for both the rank decision and the
        consistency check. Defaults to machine epsilon. Must be positive.

    Returns
    -------
    ReducedConstraints

    Raises
    ------
    InfeasibleConstraintsError
        If a discarded row leaves a residual above
        ``eps * max(m, n) * (1 + ||b||_inf)``.
    """
    a = as_matrix(a, "A")
    b = as_vector(b, "b")
    m, n = a.shape
    if b.shape[0] != m:
        raise ValueError(f"b has length {b.shape[0]}, expected {m}")
    if eps is None:
        eps = EPS
    elif eps <= 0:
        raise ValueError("eps must be positive")
    if m == 0:
        return ReducedConstraints(
            a_tilde=a.copy(),
            b_tilde=b.copy(),
            rank=0,
            permutation=np.arange(n, dtype=np.intp),
        )
    try:
        q, r, piv = scipy.linalg.qr(a, pivoting=True)  # full Q: all m rows of Q^T b
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise ComputationError("pivoted QR factorization failed") from exc

    e = np.abs(np.diag(r))
    if e.size == 0 or e[0] == 0.0:
        p = 0
    else:
        satisfied = np.nonzero(e > eps * max(m, n) * e[0])[0]
        p = int(satisfied[-1]) + 1 if satisfied.size else 0

    qtb = q.T @ b
    if p < m:
        drop = float(np.max(np.abs(qtb[p:])))
        bound = eps * max(m, n) * (1.0 + float(np.max(np.abs(b), initial=0.0)))
        if drop > bound:
            raise InfeasibleConstraintsError(
                f"constraints are inconsistent: a redundant row leaves residual "
                f"{drop:.6e} (tolerance {bound:.6e})"
            )

    inv_piv = np.empty(n, dtype=np.intp)
    inv_piv[piv] = np.arange(n, dtype=np.intp)
    a_tilde = r[:p][:, inv_piv]  # first p rows of R P^T
    return ReducedConstraints(
        a_tilde=a_tilde, b_tilde=qtb[:p].copy(), rank=p, permutation=piv
    )


def nullspace_basis(a, eps=None):
    """Orthonormal basis of ker(A) for a full-row-rank A.

    The columns are the right singular vectors belonging to the zero part
    of the spectrum, so ``N^T N = I`` and ``A N = 0`` up to rounding.

    Parameters
    ----------
    a : (m, n) array_like
        Must have full row rank at tolerance; reduce first otherwise.
    eps : float, optional
        Relative singular-value cutoff used to verify the rank.
        Defaults to machine epsilon.

    Returns
    -------
    (n, n - m) ndarray

    Raises
    ------
    RankDeficiencyError
        If the numerical row rank of ``a`` is below ``m``.
    """
    a = as_matrix(a, "A")
    m, n = a.shape
    if eps is None:
        eps = EPS
    elif eps <= 0:
        raise ValueError("eps must be positive")
    if m == 0:
        return np.eye(n)
    if m > n:
        raise RankDeficiencyError(
            f"A is {m}x{n} with m > n, so it cannot have full row rank"
        )
    try:
        _, s, vt = np.linalg.svd(a, full_matrices=True)
    except np.linalg.LinAlgError as exc:
        raise ComputationError(
            f"SVD did not converge for a {m}x{n} matrix"
        ) from exc
    if s[0] == 0.0:
        rank = 0
    else:
        rank = int(np.sum(s > eps * max(m, n) * s[0]))
    if rank < m:
        raise RankDeficiencyError(
            f"A has numerical row rank {rank} < {m}; reduce the system first"
        )
    return vt[m:].T.copy()
