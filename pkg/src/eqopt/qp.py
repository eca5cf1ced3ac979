"""Closed-form solvers for equality-constrained quadratic programs.

Three independent routes to a stationary point of
``1/2 x^T Q x + c^T x`` on ``{x : A x = b}``:

* :func:`solve_projector` — projector-form reduction, solved with a
  pseudo-inverse so singular reduced systems still yield the
  minimum-norm stationary point;
* :func:`solve_nullspace` — null-space reduction to an (n - m)-sized
  positive-definite solve (with an eigenvalue fallback otherwise);
* :func:`solve_kkt` — the saddle-point (KKT) system, kept strict and
  unreduced so it can serve as an independent verification oracle.

Every solution carries the feasibility and stationarity residuals plus a
classification of the stationary point from reduced-Hessian inertia.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import OracleUnavailableError
from .expressions import EqualityConstraints, build_nullspace, build_projector
from .linalg import EPS, as_matrix, as_vector, pseudo_inverse


@dataclass
class QpProblem:
    """``min 1/2 x^T Q x + c^T x  s.t.  A x = b``.

    Q is symmetrized on construction: the quadratic form only senses
    ``(Q + Q^T) / 2``.
    """

    q: np.ndarray
    c: np.ndarray
    constraints: EqualityConstraints

    def __post_init__(self):
        q = as_matrix(self.q, "Q")
        if q.shape[0] != q.shape[1]:
            raise ValueError(f"Q must be square, got shape {q.shape}")
        self.q = 0.5 * (q + q.T)
        self.c = as_vector(self.c, "c")
        if self.c.shape[0] != q.shape[0]:
            raise ValueError(
                f"c has length {self.c.shape[0]}, expected {q.shape[0]}"
            )
        if self.constraints.n != q.shape[0]:
            raise ValueError(
                f"A has {self.constraints.n} columns, expected {q.shape[0]}"
            )

    @property
    def n(self):
        return self.q.shape[0]

    def objective_value(self, x):
        x = as_vector(x, "x")
        return float(0.5 * x @ self.q @ x + self.c @ x)


@dataclass
class QpSolution:
    """A stationary point with its certificates.

    ``classification`` is one of ``"min"``, ``"max"``, ``"saddle"``,
    ``"non_unique"`` (flat directions exist) or ``"point"`` (the feasible
    set is a single point, also flagged by ``degenerate``).
    ``constraint_residual`` is measured against the *original* system,
    ``stationarity_residual`` is the method's own first-order condition
    in the infinity norm.
    """

    x: np.ndarray
    objective: float
    method: str
    constraint_residual: float
    stationarity_residual: float
    classification: str
    degenerate: bool = False
    lagrange_multipliers: np.ndarray | None = None


def _classify(eigs, expected_zeros):
    """Label a stationary point from reduced-Hessian eigenvalues.

    ``expected_zeros`` eigenvalues are structurally zero (the projector
    form embeds the reduced Hessian in the full space); any zero beyond
    those means flat directions, i.e. a non-unique stationary point.
    """
    k = eigs.shape[0]
    if k == expected_zeros:
        return "point"
    scale = float(np.max(np.abs(eigs), initial=0.0))
    if scale == 0.0:
        return "non_unique"  # reduced Hessian vanishes: every direction is flat
    cut = EPS * k * scale
    pos = int(np.sum(eigs > cut))
    neg = int(np.sum(eigs < -cut))
    zero = k - pos - neg
    if zero > expected_zeros:
        return "non_unique"
    if neg == 0:
        return "min"
    if pos == 0:
        return "max"
    return "saddle"


def solve_projector(problem, h_choice="transpose_of_a", eps=None):
    """Stationary point via the projector form.

    The constraints are reduced to full row rank, the expression
    ``x = x0 + D g`` is built, and the stationary system
    ``(D^T Q D) g = -(D^T Q x0 + D^T c)`` is solved with the
    pseudo-inverse — so indefinite and even singular reduced Hessians are
    handled, returning the minimum-norm free vector.

    Raises
    ------
    InfeasibleConstraintsError
        If the constraints are contradictory.
    InvalidHMatrixError
        If ``h_choice`` leaves A H singular.
    """
    reduced = problem.constraints.reduced(eps)
    n = problem.n
    expr = build_projector(reduced, h_choice)
    p = reduced.m
    if p == n:
        x = expr.x0
        sol_class = "point"
    else:
        aa = expr.d.T @ problem.q @ expr.d
        aa = 0.5 * (aa + aa.T)
        rhs = expr.d.T @ (problem.q @ expr.x0 + problem.c)
        g = -(pseudo_inverse(aa, eps) @ rhs)
        x = expr.embed(g)
        sol_class = _classify(np.linalg.eigvalsh(aa), expected_zeros=p)
    grad = problem.q @ x + problem.c
    stationarity = float(np.max(np.abs(expr.d.T @ grad), initial=0.0))
    return QpSolution(
        x=x,
        objective=problem.objective_value(x),
        method="projector",
        constraint_residual=problem.constraints.residual(x),
        stationarity_residual=stationarity,
        classification=sol_class,
        degenerate=(p == n),
    )


def solve_nullspace(problem, eps=None):
    """Stationary point via the null-space form.

    Solves ``(N^T Q N) g = -(N^T Q x0 + N^T c)`` with a Cholesky
    factorization (certifying a minimizer when it succeeds) and falls
    back to an eigendecomposition for indefinite or singular reduced
    Hessians, where zero modes are dropped pseudo-inverse style.
    """
    reduced = problem.constraints.reduced(eps)
    n = problem.n
    expr = build_nullspace(reduced, eps)
    nb = expr.n_basis
    p = reduced.m
    if nb.shape[1] == 0:
        x = expr.x0
        sol_class = "point"
    else:
        bmat = nb.T @ problem.q @ nb
        bmat = 0.5 * (bmat + bmat.T)
        rhs = nb.T @ (problem.q @ expr.x0 + problem.c)
        try:
            cf = scipy.linalg.cho_factor(bmat)
            g = -scipy.linalg.cho_solve(cf, rhs)
            sol_class = "min"
        except np.linalg.LinAlgError:
            w, v = np.linalg.eigh(bmat)
            sol_class = _classify(w, expected_zeros=0)
            inv = np.zeros_like(w)
            keep = np.abs(w) > EPS * w.shape[0] * float(np.max(np.abs(w), initial=0.0))
            inv[keep] = 1.0 / w[keep]
            g = -((v * inv) @ (v.T @ rhs))
        x = expr.embed(g)
    grad = problem.q @ x + problem.c
    stationarity = float(np.max(np.abs(nb.T @ grad), initial=0.0))
    return QpSolution(
        x=x,
        objective=problem.objective_value(x),
        method="nullspace",
        constraint_residual=problem.constraints.residual(x),
        stationarity_residual=stationarity,
        classification=sol_class,
        degenerate=(p == n),
    )


def _block_diag_eigs(d):
    """Eigenvalues of the 1x1/2x2 block-diagonal factor of an LDL^T."""
    k = d.shape[0]
    eigs = []
    i = 0
    while i < k:
        if i + 1 < k and d[i + 1, i] != 0.0:
            t = d[i, i] + d[i + 1, i + 1]
            det = d[i, i] * d[i + 1, i + 1] - d[i + 1, i] * d[i, i + 1]
            disc = np.sqrt(max(t * t - 4.0 * det, 0.0))
            eigs.extend([0.5 * (t - disc), 0.5 * (t + disc)])
            i += 2
        else:
            eigs.append(d[i, i])
            i += 1
    return np.asarray(eigs)


def solve_kkt(problem):
    """Independent oracle: solve the saddle-point system directly.

    Assembles ``[[Q, A^T], [A, 0]] [x; lam] = [-c; b]`` and solves it
    densely. The constraints are *not* reduced: a singular system (rank
    deficiency, singular reduced Hessian) raises
    :class:`OracleUnavailableError` instead of guessing. The
    classification comes from the inertia of the saddle matrix (LDL^T),
    which exceeds that of the reduced Hessian by exactly (m, m).

    Returns the Lagrange multipliers alongside the point; the
    stationarity residual is ``||Q x + c + A^T lam||_inf``.
    """
    a, b = problem.constraints.a, problem.constraints.b
    n, m = problem.n, problem.constraints.m
    kkt = np.zeros((n + m, n + m))
    kkt[:n, :n] = problem.q
    kkt[:n, n:] = a.T
    kkt[n:, :n] = a
    rhs = np.concatenate([-problem.c, b])
    try:
        z = scipy.linalg.solve(kkt, rhs, assume_a="sym")
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise OracleUnavailableError(
            "the saddle-point system is singular; the direct oracle cannot "
            "certify this problem (reduce the constraints or use the "
            "projector/null-space solvers)"
        ) from exc
    resid = float(np.max(np.abs(kkt @ z - rhs), initial=0.0))
    scale = float(np.max(np.abs(kkt)) * max(1.0, np.max(np.abs(z), initial=0.0)) + np.max(np.abs(rhs), initial=0.0))
    if not np.all(np.isfinite(z)) or resid > 1e-8 * max(scale, 1.0):
        raise OracleUnavailableError(
            f"the saddle-point system is numerically singular "
            f"(residual {resid:.3e} at scale {scale:.3e})"
        )
    x, lam = z[:n], z[n:]

    # LDL^T is a congruence, so it preserves inertia: zero eigenvalues of the
    # block-diagonal factor mean the saddle matrix is singular at tolerance
    # even when the LU solve above happened to produce a small residual
    # (consistent rank-deficient systems do exactly that).
    _, d, _ = scipy.linalg.ldl(kkt)
    eigs = _block_diag_eigs(d)
    scale_e = float(np.max(np.abs(eigs), initial=0.0))
    cut = EPS * (n + m) * scale_e
    pos = int(np.sum(eigs > cut))
    neg = int(np.sum(eigs < -cut))
    if pos + neg < n + m:
        raise OracleUnavailableError(
            "the saddle-point system is singular at tolerance (rank-deficient "
            "constraints or a singular reduced Hessian); the direct oracle "
            "cannot certify this problem"
        )
    pos -= m
    neg -= m
    free = n - m
    if free <= 0:
        sol_class = "point"
    elif neg == 0:
        sol_class = "min"
    elif pos == 0:
        sol_class = "max"
    else:
        sol_class = "saddle"

    stationarity = float(np.max(np.abs(problem.q @ x + problem.c + a.T @ lam), initial=0.0))
    return QpSolution(
        x=x,
        objective=problem.objective_value(x),
        method="kkt",
        constraint_residual=problem.constraints.residual(x),
        stationarity_residual=stationarity,
        classification=sol_class,
        degenerate=(free <= 0),
        lagrange_multipliers=lam,
    )
