"""Newton solvers for smooth convex objectives on ``{x : A x = b}``.

The constraints are eliminated by the null-space parameterization
``x = x0 + N g``, leaving the unconstrained reduced problem
``h(g) = f(x0 + N g)`` with gradient ``N^T grad f`` and Hessian
``N^T (hess f) N``. On top of the damped-Newton and pure-Newton loops
this module provides the a-priori convergence certificates: the
gradient-based suboptimality bound, the damped/pure phase constants and
the iteration cap they imply, and the quadratic contraction factor of
the pure phase.
"""

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import DivergenceError, LineSearchError, NonConvexError
from .expressions import build_nullspace
from .linalg import as_vector

_FD_STEP = float(np.cbrt(np.finfo(np.float64).eps))


class ObjectiveOracle:
    """Bundle of callbacks (value, gradient, hessian) for a smooth f on R^n.

    Parameters
    ----------
    dim : int
        Dimension of the ambient space.
    value : callable
        ``x -> float``. May return ``inf`` outside an effective domain
        (barriers); the line search treats that as "too far".
    gradient : callable
        ``x -> (dim,) ndarray``.
    hessian : callable, optional
        ``x -> (dim, dim) ndarray``. When omitted, a central
        finite-difference of the gradient is used with per-coordinate
        step ``cbrt(eps) * (1 + |x_i|)``.
    """

    def __init__(self, dim, value, gradient, hessian=None):
        self.dim = int(dim)
        if self.dim < 1:
            raise ValueError("dim must be at least 1")
        self.value = value
        self.gradient = gradient
        self.hessian = hessian if hessian is not None else self._fd_hessian

    def _fd_hessian(self, x):
        x = np.asarray(x, dtype=np.float64)
        out = np.empty((self.dim, self.dim))
        for i in range(self.dim):
            step = _FD_STEP * (1.0 + abs(x[i]))
            e = np.zeros(self.dim)
            e[i] = step
            out[:, i] = (self.gradient(x + e) - self.gradient(x - e)) / (2.0 * step)
        return 0.5 * (out + out.T)


@dataclass
class ReducedObjective:
    """A full-space objective pulled back through a null-space expression."""

    expr: object  # NullspaceExpression
    oracle: ObjectiveOracle

    @property
    def free_dim(self):
        return self.expr.free_dim

    def point(self, g):
        """The full-space point x(g) = x0 + N g."""
        return self.expr.embed(g)

    def value(self, g):
        return float(self.oracle.value(self.point(g)))

    def gradient(self, g):
        return self.expr.n_basis.T @ self.oracle.gradient(self.point(g))

    def hessian(self, g):
        nb = self.expr.n_basis
        f = nb.T @ self.oracle.hessian(self.point(g)) @ nb
        return 0.5 * (f + f.T)


def reduce_problem(oracle, constraints, eps=None):
    """Eliminate the constraints: build x = x0 + N g and wrap the oracle.

    The constraint system is first reduced to full row rank, so redundant
    rows are fine and contradictory ones raise
    InfeasibleConstraintsError.
    """
    if oracle.dim != constraints.n:
        raise ValueError(
            f"objective dimension {oracle.dim} != constraint columns {constraints.n}"
        )
    expr = build_nullspace(constraints.reduced(eps), eps)
    if expr.free_dim == 0:
        raise ValueError(
            "the feasible set is a single point; nothing to optimize"
        )
    return ReducedObjective(expr=expr, oracle=oracle)


@dataclass
class NewtonConfig:
    """Knobs for :func:`newton_solve`.

    ``alpha`` in (0, 1/2) and ``beta`` in (0, 1) are the backtracking
    parameters; ``epsilon`` is the termination threshold on half the
    squared Newton decrement; ``g0`` defaults to the zero free vector
    (i.e. the minimum-norm feasible point).
    """

    alpha: float = 0.25
    beta: float = 0.5
    epsilon: float = 1e-10
    max_iter: int = 100
    g0: np.ndarray | None = None

    def __post_init__(self):
        if not 0.0 < self.alpha < 0.5:
            raise ValueError("alpha must lie in (0, 1/2)")
        if not 0.0 < self.beta < 1.0:
            raise ValueError("beta must lie in (0, 1)")
        if not self.epsilon > 0.0:
            raise ValueError("epsilon must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if self.g0 is not None:
            self.g0 = as_vector(self.g0, "g0")


@dataclass
class NewtonIteration:
    """State at the start of one executed Newton step."""

    g: np.ndarray
    x: np.ndarray
    h_value: float
    grad_norm: float  # ||E||_2 at g
    decrement_sq: float  # squared Newton decrement E^T F^{-1} E
    step_size: float  # accepted t
    phase: str  # "pure" when t == 1, else "damped"


@dataclass
class NewtonTrace:
    """Full record of a Newton run.

    ``iterations`` holds one entry per executed step (pre-step state plus
    the accepted step size); the ``final_*`` fields describe the last
    iterate, where no further step was taken.
    """

    iterations: list = field(default_factory=list)
    converged: bool = False
    final_g: np.ndarray | None = None
    final_x: np.ndarray | None = None
    final_h: float = math.nan
    final_grad_norm: float = math.nan
    final_decrement_sq: float = math.nan

    def h_values(self):
        """Objective at every visited iterate, final included."""
        return [it.h_value for it in self.iterations] + [self.final_h]

    def grad_norms(self):
        """||E||_2 at every visited iterate, final included."""
        return [it.grad_norm for it in self.iterations] + [self.final_grad_norm]


def _newton_step(reduced, g, iteration):
    """Gradient, Newton direction and squared decrement at g.

    Raises NonConvexError when the reduced Hessian fails its Cholesky
    factorization.
    """
    e = reduced.gradient(g)
    f = reduced.hessian(g)
    try:
        cf = scipy.linalg.cho_factor(f)
    except np.linalg.LinAlgError:
        raise NonConvexError(
            f"reduced Hessian is not positive definite at iteration {iteration}",
            g=g.copy(),
            iteration=iteration,
        ) from None
    step = -scipy.linalg.cho_solve(cf, e)
    dec_sq = max(float(-(e @ step)), 0.0)  # E^T F^{-1} E, clamped against rounding
    return e, step, dec_sq


def newton_decrement(reduced, g):
    """Newton decrement and step at g.

    Returns ``(lambda, step)`` where ``lambda = sqrt(E^T F^{-1} E)`` and
    ``step = -F^{-1} E``. Raises NonConvexError if F is not positive
    definite.
    """
    g = as_vector(g, "g")
    _, step, dec_sq = _newton_step(reduced, g, iteration=0)
    return math.sqrt(dec_sq), step


def _armijo(reduced, g, direction, h0, slope, alpha, beta):
    """Largest t in {1, beta, beta^2, ...} with sufficient decrease."""
    t = 1.0
    while True:
        h_t = reduced.value(g + t * direction)
        # written so that nan/inf trial values shrink t rather than pass
        if h_t <= h0 + alpha * t * slope:
            return t
        t *= beta
        if t < 1e-300:
            raise LineSearchError(
                "backtracking underflowed without satisfying the decrease "
                "condition; the direction is not a usable descent direction"
            )


def backtracking_line_search(reduced, g, direction, alpha=0.25, beta=0.5):
    """Armijo backtracking along a descent direction.

    Returns the largest ``t`` in ``{1, beta, beta^2, ...}`` satisfying
    ``h(g + t d) <= h(g) + alpha t grad^T d``.
    """
    if not 0.0 < alpha < 0.5:
        raise ValueError("alpha must lie in (0, 1/2)")
    if not 0.0 < beta < 1.0:
        raise ValueError("beta must lie in (0, 1)")
    g = as_vector(g, "g")
    direction = as_vector(direction, "direction")
    slope = float(reduced.gradient(g) @ direction)
    if not slope < 0.0:
        raise ValueError("direction is not a descent direction (grad^T d >= 0)")
    return _armijo(reduced, g, direction, reduced.value(g), slope, alpha, beta)


def newton_solve(reduced, config=None):
    """Damped Newton with backtracking on the reduced objective.

    Starting from ``config.g0`` (default: zero, i.e. the minimum-norm
    feasible point), repeats: Newton step, Armijo backtracking, update —
    until half the squared decrement drops to ``config.epsilon``. Each
    executed step is recorded; exhausting ``max_iter`` returns a
    non-converged trace rather than raising.

    Raises
    ------
    NonConvexError
        If a reduced Hessian fails its Cholesky factorization.
    LineSearchError
        If backtracking underflows (gradient/value inconsistency).
    """
    config = config if config is not None else NewtonConfig()
    if config.g0 is None:
        g = np.zeros(reduced.free_dim)
    else:
        g = config.g0.copy()
        if g.shape[0] != reduced.free_dim:
            raise ValueError(
                f"g0 has length {g.shape[0]}, expected {reduced.free_dim}"
            )
    trace = NewtonTrace()
    while True:
        e, step, dec_sq = _newton_step(reduced, g, iteration=len(trace.iterations))
        h_g = reduced.value(g)
        if dec_sq / 2.0 <= config.epsilon:
            trace.converged = True
            break
        if len(trace.iterations) >= config.max_iter:
            break
        t = _armijo(reduced, g, step, h_g, -dec_sq, config.alpha, config.beta)
        trace.iterations.append(
            NewtonIteration(
                g=g.copy(),
                x=reduced.point(g),
                h_value=h_g,
                grad_norm=float(np.linalg.norm(e)),
                decrement_sq=dec_sq,
                step_size=t,
                phase="pure" if t == 1.0 else "damped",
            )
        )
        g = g + t * step
    trace.final_g = g
    trace.final_x = reduced.point(g)
    trace.final_h = h_g
    trace.final_grad_norm = float(np.linalg.norm(e))
    trace.final_decrement_sq = dec_sq
    return trace


def sqp_iterate(reduced, g0=None, tol_g=1e-10, max_iter=100):
    """Pure Newton iteration: full steps, no line search.

    ``g <- g - F^{-1} E`` until either the step or the gradient drops
    below ``tol_g`` in the 2-norm. Converges quadratically close to the
    solution but has no global safeguard: three consecutive increases of
    the objective raise :class:`DivergenceError` (carrying the partial
    trace); :func:`newton_solve` is the damped alternative.
    """
    if not tol_g > 0.0:
        raise ValueError("tol_g must be positive")
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    g = np.zeros(reduced.free_dim) if g0 is None else as_vector(g0, "g0").copy()
    if g.shape[0] != reduced.free_dim:
        raise ValueError(f"g0 has length {g.shape[0]}, expected {reduced.free_dim}")
    trace = NewtonTrace()
    rises = 0
    prev_h = None
    step_converged = False
    while True:
        e, step, dec_sq = _newton_step(reduced, g, iteration=len(trace.iterations))
        h_g = reduced.value(g)
        grad_norm = float(np.linalg.norm(e))
        if prev_h is not None and not h_g <= prev_h:
            rises += 1
            if rises >= 3:
                trace.final_g = g
                trace.final_x = reduced.point(g)
                trace.final_h = h_g
                trace.final_grad_norm = grad_norm
                trace.final_decrement_sq = dec_sq
                raise DivergenceError(
                    "pure Newton increased the objective three times in a row; "
                    "use the damped newton_solve instead",
                    trace=trace,
                )
        else:
            rises = 0
        prev_h = h_g
        if step_converged or grad_norm < tol_g:
            trace.converged = True
            break
        if len(trace.iterations) >= max_iter:
            break
        trace.iterations.append(
            NewtonIteration(
                g=g.copy(),
                x=reduced.point(g),
                h_value=h_g,
                grad_norm=grad_norm,
                decrement_sq=dec_sq,
                step_size=1.0,
                phase="pure",
            )
        )
        if float(np.linalg.norm(step)) < tol_g:
            step_converged = True  # record the arrival point, then stop
        g = g + step
    trace.final_g = g
    trace.final_x = reduced.point(g)
    trace.final_h = h_g
    trace.final_grad_norm = grad_norm
    trace.final_decrement_sq = dec_sq
    return trace


@dataclass
class ConvergenceConstants:
    """Spectral constants feeding the a-priori certificates.

    ``m_strong`` and ``m_upper`` sandwich the reduced Hessian
    (``m I <= F <= M I``) on the initial sublevel set; ``lipschitz`` is
    the Lipschitz constant of the full-space Hessian there; ``norm_n``
    is ``||N||_2`` (exactly 1 for an orthonormal basis). ``kappa``, the
    conditioning of the saddle system, may be recorded but enters no
    bound.
    """

    m_strong: float
    m_upper: float
    lipschitz: float
    norm_n: float = 1.0
    kappa: float | None = None

    def __post_init__(self):
        if not 0.0 < self.m_strong <= self.m_upper:
            raise ValueError("need 0 < m_strong <= m_upper")
        if not self.lipschitz > 0.0:
            raise ValueError("lipschitz must be positive")
        if not self.norm_n > 0.0:
            raise ValueError("norm_n must be positive")
        if self.kappa is not None and not self.kappa > 0.0:
            raise ValueError("kappa must be positive when given")


@dataclass
class IterationBound:
    """Certificate constants produced by :func:`iteration_bound`.

    ``eta`` splits the damped phase (``||E|| >= eta``) from the pure
    phase; ``gamma`` is the guaranteed objective decrease per damped
    step; ``d_max`` caps the total number of Newton iterations;
    ``lipschitz_reduced`` is ``K = L ||N||^3``, the Hessian-variation
    constant of the reduced objective; ``contraction`` is
    ``K / (2 m^2)``, the factor in the pure-phase quadratic recursion
    ``c_{k+1} <= c_k^2`` for ``c_k = contraction * ||E_k||``.
    """

    eta: float
    gamma: float
    d_max: float
    lipschitz_reduced: float
    contraction: float


def suboptimality_bound(grad_norm, constants):
    """Certified gap bound ``h(g) - h* <= ||E||^2 / (2 m)``.

    Valid whenever the reduced Hessian satisfies ``F >= m I`` on the
    sublevel set containing g.
    """
    if grad_norm < 0.0:
        raise ValueError("grad_norm must be nonnegative")
    return float(grad_norm) ** 2 / (2.0 * constants.m_strong)


def iteration_bound(constants, config, h0_minus_hstar):
    """A-priori phase constants and iteration cap for damped Newton.

    With ``K = L ||N||^3``:

    * ``eta = min{1, 3 (1 - 2 alpha)} m^2 / K`` — while ``||E_k|| >= eta``
      every backtracking step decreases h by at least
      ``gamma = alpha beta eta^2 m / M^2``;
    * once ``||E_k|| < eta`` the iteration takes full steps and the
      scaled gradient norm ``K / (2 m^2) ||E||`` squares at every step;
    * the total number of iterations is then at most
      ``d_max = 6 + (h0 - h*) / gamma``.

    ``h0_minus_hstar`` is the initial objective gap (an upper bound on it
    is fine and just loosens the cap).
    """
    if config is None:
        config = NewtonConfig()
    if h0_minus_hstar < 0.0:
        raise ValueError("h0_minus_hstar must be nonnegative")
    k = constants.lipschitz * constants.norm_n**3
    eta = min(1.0, 3.0 * (1.0 - 2.0 * config.alpha)) * constants.m_strong**2 / k
    gamma = (
        config.alpha
        * config.beta
        * eta**2
        * constants.m_strong
        / constants.m_upper**2
    )
    return IterationBound(
        eta=eta,
        gamma=gamma,
        d_max=6.0 + h0_minus_hstar / gamma,
        lipschitz_reduced=k,
        contraction=k / (2.0 * constants.m_strong**2),
    )


def estimate_convergence_constants(reduced, points):
    """Empirical (m, M, L) sampled at the given free vectors.

    ``m`` and ``M`` are the extreme reduced-Hessian eigenvalues over the
    sample; ``L`` is the largest spectral-norm difference quotient
    ``||H(x_i) - H(x_j)|| / ||x_i - x_j||`` of the *full-space* Hessian
    over sample pairs. These are estimates tied to the sample, not
    certificates — pass worst-case constants to :func:`iteration_bound`
    when you have them.
    """
    points = [as_vector(p, "point") for p in points]
    if len(points) < 1:
        raise ValueError("need at least one sample point")
    m_lo = math.inf
    m_hi = -math.inf
    hessians = []
    xs = []
    for g in points:
        w = np.linalg.eigvalsh(reduced.hessian(g))
        m_lo = min(m_lo, float(w[0]))
        m_hi = max(m_hi, float(w[-1]))
        x = reduced.point(g)
        xs.append(x)
        hessians.append(reduced.oracle.hessian(x))
    lip = 0.0
    for i in range(len(points)):
        for j in range(i + 1, len(points)):
            gap = float(np.linalg.norm(xs[i] - xs[j]))
            if gap == 0.0:
                continue
            lip = max(lip, float(np.linalg.norm(hessians[i] - hessians[j], 2)) / gap)
    if m_lo <= 0.0:
        raise NonConvexError(
            "sampled reduced Hessians are not uniformly positive definite"
        )
    # a quadratic objective has identical Hessians everywhere; keep the
    # constant valid (a smaller L only tightens the bound formulas)
    lip = max(lip, 1e-30)
    return ConvergenceConstants(
        m_strong=m_lo,
        m_upper=m_hi,
        lipschitz=lip,
        norm_n=float(np.linalg.norm(reduced.expr.n_basis, 2)),
    )
