"""Feasible-set parameterizations for linear equality constraints.

Both forms map a free vector ``g`` to a point ``x(g)`` that satisfies
``A x = b`` identically, turning constrained problems into unconstrained
ones over ``g``:

* projector form: ``x = x0 + D g`` with ``x0 = H (A H)^{-1} b`` and
  ``D = I - H (A H)^{-1} A``; ``g`` lives in the full space and ``D``
  projects it onto ker(A) along range(H).
* null-space form: ``x = x0 + N g`` with the minimum-norm particular
  solution ``x0 = A^T (A A^T)^{-1} b`` and an orthonormal basis ``N`` of
  ker(A); ``g`` has the intrinsic dimension ``n - m``.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import InvalidHMatrixError, RankDeficiencyError
from .linalg import EPS, as_matrix, as_vector, nullspace_basis, rrqr_reduce


@dataclass
class EqualityConstraints:
    """Linear equality constraints ``A x = b`` with A of shape (m, n)."""

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        self.a = as_matrix(self.a, "A")
        self.b = as_vector(self.b, "b")
        if self.b.shape[0] != self.a.shape[0]:
            raise ValueError(
                f"b has length {self.b.shape[0]}, expected {self.a.shape[0]}"
            )

    @property
    def m(self):
        return self.a.shape[0]

    @property
    def n(self):
        return self.a.shape[1]

    def residual(self, x):
        """Feasibility defect ``||A x - b||_inf`` at x."""
        x = as_vector(x, "x")
        if self.m == 0:
            return 0.0
        return float(np.max(np.abs(self.a @ x - self.b)))

    def reduced(self, eps=None):
        """Equivalent full-row-rank system (may raise InfeasibleConstraintsError)."""
        red = rrqr_reduce(self.a, self.b, eps)
        return EqualityConstraints(red.a_tilde, red.b_tilde)


@dataclass
class ProjectorExpression:
    """Projector-form parameterization ``x(g) = x0 + D g`` (g of length n)."""

    x0: np.ndarray
    d: np.ndarray
    h: np.ndarray

    @property
    def free_dim(self):
        return self.d.shape[1]

    def embed(self, g):
        g = as_vector(g, "g")
        if g.shape[0] != self.free_dim:
            raise ValueError(f"g has length {g.shape[0]}, expected {self.free_dim}")
        return self.x0 + self.d @ g


@dataclass
class NullspaceExpression:
    """Null-space parameterization ``x(g) = x0 + N g`` (g of length n - m)."""

    x0: np.ndarray
    n_basis: np.ndarray

    @property
    def free_dim(self):
        return self.n_basis.shape[1]

    def embed(self, g):
        g = as_vector(g, "g")
        if g.shape[0] != self.free_dim:
            raise ValueError(f"g has length {g.shape[0]}, expected {self.free_dim}")
        return self.x0 + self.n_basis @ g


def build_projector(constraints, h_choice="transpose_of_a"):
    """Build the projector-form expression for a full-row-rank system.

    Parameters
    ----------
    constraints : EqualityConstraints
        Must already have full row rank (reduce first if unsure).
    h_choice : str or (n, m) array_like
        ``"transpose_of_a"`` uses H = A^T, which always makes A H
        nonsingular for full-row-rank A. ``"identity_block"`` uses
        H = [I; 0]. A custom matrix may be supplied directly. Choices
        that leave A H singular at tolerance are rejected.

    Raises
    ------
    InvalidHMatrixError
        If A H is singular at tolerance.
    """
    a, b = constraints.a, constraints.b
    m, n = a.shape
    if m == 0:
        return ProjectorExpression(x0=np.zeros(n), d=np.eye(n), h=np.zeros((n, 0)))

    if isinstance(h_choice, str):
        if h_choice == "transpose_of_a":
            h = a.T.copy()
        elif h_choice == "identity_block":
            h = np.zeros((n, m))
            h[:m, :m] = np.eye(m)
        else:
            raise ValueError(
                f"unknown h_choice {h_choice!r}; use 'transpose_of_a', "
                f"'identity_block' or pass an (n, m) matrix"
            )
    else:
        h = as_matrix(h_choice, "H")
        if h.shape != (n, m):
            raise ValueError(f"H has shape {h.shape}, expected ({n}, {m})")

    ah = a @ h
    sv = scipy.linalg.svdvals(ah)
    if sv[0] == 0.0 or sv[-1] <= EPS * m * sv[0]:
        raise InvalidHMatrixError(
            "the m-by-m matrix A H is singular at tolerance; choose an H whose "
            "range is complementary to ker(A) (H = A^T always works)"
        )
    lu = scipy.linalg.lu_factor(ah)
    x0 = h @ scipy.linalg.lu_solve(lu, b)
    d = np.eye(n) - h @ scipy.linalg.lu_solve(lu, a)
    return ProjectorExpression(x0=x0, d=d, h=h)


def build_nullspace(constraints, eps=None):
    """Build the null-space expression with the minimum-norm particular solution.

    Raises
    ------
    RankDeficiencyError
        If A does not have full row rank at tolerance.
    """
    a, b = constraints.a, constraints.b
    m, n = a.shape
    if m == 0:
        return NullspaceExpression(x0=np.zeros(n), n_basis=np.eye(n))
    n_basis = nullspace_basis(a, eps)
    try:
        cf = scipy.linalg.cho_factor(a @ a.T)
    except np.linalg.LinAlgError as exc:  # full rank was just verified; belt and braces
        raise RankDeficiencyError("A A^T is not positive definite") from exc
    x0 = a.T @ scipy.linalg.cho_solve(cf, b)
    return NullspaceExpression(x0=x0, n_basis=n_basis)


def embed(expression, g):
    """Evaluate a constrained expression at the free vector g.

    The result satisfies ``A x = b`` for every g by construction.
    """
    return expression.embed(g)
