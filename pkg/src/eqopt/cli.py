"""Command-line front end.

``eqopt solve`` solves a problem file with any of the five methods,
``eqopt bench`` runs seeded Monte Carlo timing benchmarks (table on
stdout, JSON report on disk), ``eqopt check`` runs the invariant /
oracle / convergence self-check suites.

Exit codes: 0 success, 1 self-check violation, 2 infeasible constraints,
3 non-convergence or numerical failure, 4 input error.
"""

import argparse
import json
import sys
import time

import numpy as np

from . import objectives
from .errors import (
    ComputationError,
    DivergenceError,
    InfeasibleConstraintsError,
    InvalidHMatrixError,
    LineSearchError,
    NonConvexError,
    OracleUnavailableError,
    ProblemFormatError,
    RankDeficiencyError,
    UnknownObjectiveError,
)
from .expressions import EqualityConstraints, build_nullspace, build_projector
from .linalg import nullspace_basis, pseudo_inverse, rrqr_reduce
from .nlp import (
    NewtonConfig,
    estimate_convergence_constants,
    iteration_bound,
    newton_solve,
    reduce_problem,
    sqp_iterate,
)
from .problems import GeneratorSpec, NlpProblem, generate, load
from .qp import QpProblem, solve_kkt, solve_nullspace, solve_projector

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INFEASIBLE = 2
EXIT_NO_CONVERGENCE = 3
EXIT_INPUT = 4

DEFAULT_SIZES = "10:2,10:4,10:8,20:4,20:8,20:16,40:8,40:16,40:32,80:16,80:32,80:64"

_QP_SOLVERS = {
    "projector": solve_projector,
    "nullspace": solve_nullspace,
    "kkt": lambda problem, eps=None: solve_kkt(problem),
}

_FAILURE_KINDS = {
    InfeasibleConstraintsError: "infeasible",
    NonConvexError: "non_convex",
    DivergenceError: "non_converged",
    LineSearchError: "non_converged",
    OracleUnavailableError: "ill_conditioned",
    ComputationError: "ill_conditioned",
    RankDeficiencyError: "ill_conditioned",
}


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on bad flags; 2 means infeasible here, so remap to 4."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_INPUT)


def _build_parser():
    parser = _Parser(prog="eqopt", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_solve = sub.add_parser("solve", help="solve a problem file")
    p_solve.add_argument("--input", required=True, help="problem file (JSON)")
    p_solve.add_argument(
        "--method",
        default="nullspace",
        choices=["projector", "nullspace", "kkt", "newton", "sqp"],
    )
    p_solve.add_argument(
        "--tol",
        type=float,
        default=None,
        help="rank/pinv tolerance for direct methods; termination tolerance "
        "for newton (epsilon on half the squared decrement) and sqp (step/"
        "gradient norm)",
    )
    p_solve.add_argument("--alpha", type=float, default=0.25, help="Armijo slope fraction")
    p_solve.add_argument("--beta", type=float, default=0.5, help="backtracking shrink factor")
    p_solve.add_argument("--max-iter", type=int, default=100)
    p_solve.add_argument("--trace", default=None, help="write the full Newton trace here")
    p_solve.add_argument("--output", default=None, help="write the solution here (default stdout)")
    p_solve.set_defaults(func=cmd_solve)

    p_bench = sub.add_parser("bench", help="seeded Monte Carlo timing benchmark")
    p_bench.add_argument("--sizes", default=DEFAULT_SIZES, help='comma list of "n:m" pairs')
    p_bench.add_argument("--trials", type=int, default=10000)
    p_bench.add_argument("--seed", type=int, default=0)
    p_bench.add_argument(
        "--methods",
        default="projector,nullspace,kkt",
        help="comma list out of projector,nullspace,kkt",
    )
    p_bench.add_argument(
        "--q-class",
        default="spd",
        choices=["spd", "symmetric_indefinite", "asymmetric"],
        dest="q_class",
    )
    p_bench.add_argument("--output", default="bench_report.json")
    p_bench.set_defaults(func=cmd_bench)

    p_check = sub.add_parser("check", help="run the self-check suites")
    p_check.add_argument(
        "--suite",
        default="all",
        choices=["invariants", "oracle", "convergence", "all"],
    )
    p_check.add_argument("--trials", type=int, default=50)
    p_check.add_argument("--seed", type=int, default=0)
    p_check.add_argument(
        "--counterexample",
        default="counterexample.json",
        help="where to serialize the first failing case",
    )
    p_check.set_defaults(func=cmd_check)
    return parser


def _emit(doc, path):
    text = json.dumps(doc, indent=2)
    if path is None:
        print(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")


# ---------------------------------------------------------------------------
# solve


def _qp_solution_doc(sol):
    return {
        "formatVersion": 1,
        "method": sol.method,
        "x": sol.x.tolist(),
        "objective": sol.objective,
        "constraintResidual": sol.constraint_residual,
        "stationarityResidual": sol.stationarity_residual,
        "classification": sol.classification,
        "degenerate": sol.degenerate,
        "lagrangeMultipliers": None
        if sol.lagrange_multipliers is None
        else sol.lagrange_multipliers.tolist(),
    }


def _trace_doc(trace, method):
    return {
        "formatVersion": 1,
        "method": method,
        "converged": trace.converged,
        "finalG": trace.final_g.tolist(),
        "finalX": trace.final_x.tolist(),
        "finalH": trace.final_h,
        "finalGradNorm": trace.final_grad_norm,
        "finalDecrementSq": trace.final_decrement_sq,
        "iterations": [
            {
                "g": it.g.tolist(),
                "x": it.x.tolist(),
                "hValue": it.h_value,
                "gradNorm": it.grad_norm,
                "decrementSq": it.decrement_sq,
                "stepSize": it.step_size,
                "phase": it.phase,
            }
            for it in trace.iterations
        ],
    }


def cmd_solve(args):
    problem = load(args.input)
    if args.method in _QP_SOLVERS:
        if not isinstance(problem, QpProblem):
            raise ValueError(
                f"method {args.method!r} requires a quadratic problem file; "
                f"use --method newton or sqp for nonlinear objectives"
            )
        if args.trace is not None:
            print("note: --trace is only produced by newton/sqp; ignoring", file=sys.stderr)
        sol = _QP_SOLVERS[args.method](problem, eps=args.tol)
        _emit(_qp_solution_doc(sol), args.output)
        return EXIT_OK

    if isinstance(problem, QpProblem):
        oracle = objectives.quadratic(problem.q, problem.c)
    else:
        oracle = problem.oracle
    reduced = reduce_problem(oracle, problem.constraints)
    if args.method == "newton":
        config = NewtonConfig(
            alpha=args.alpha,
            beta=args.beta,
            epsilon=args.tol if args.tol is not None else 1e-10,
            max_iter=args.max_iter,
        )
        trace = newton_solve(reduced, config)
    else:
        trace = sqp_iterate(
            reduced,
            tol_g=args.tol if args.tol is not None else 1e-10,
            max_iter=args.max_iter,
        )
    doc = {
        "formatVersion": 1,
        "method": args.method,
        "converged": trace.converged,
        "iterations": len(trace.iterations),
        "x": trace.final_x.tolist(),
        "objective": trace.final_h,
        "constraintResidual": problem.constraints.residual(trace.final_x),
        "gradNorm": trace.final_grad_norm,
        "decrementSq": trace.final_decrement_sq,
    }
    _emit(doc, args.output)
    if args.trace is not None:
        _emit(_trace_doc(trace, args.method), args.trace)
    if not trace.converged:
        print(
            f"error: {args.method} did not converge within {args.max_iter} iterations",
            file=sys.stderr,
        )
        return EXIT_NO_CONVERGENCE
    return EXIT_OK


# ---------------------------------------------------------------------------
# bench


def _parse_sizes(text):
    sizes = []
    for token in text.split(","):
        token = token.strip()
        parts = token.split(":")
        if len(parts) != 2:
            raise ValueError(f"size {token!r} does not match 'n:m'")
        try:
            n, m = int(parts[0]), int(parts[1])
        except ValueError:
            raise ValueError(f"size {token!r} does not contain two integers") from None
        if not 0 <= m < n:
            raise ValueError(f"size {token!r} needs 0 <= m < n")
        sizes.append((n, m))
    if not sizes:
        raise ValueError("no benchmark sizes given")
    return sizes


def _parse_methods(text):
    methods = [tok.strip() for tok in text.split(",") if tok.strip()]
    for name in methods:
        if name not in _QP_SOLVERS:
            raise ValueError(f"unknown method {name!r}; choose from projector,nullspace,kkt")
    if not methods:
        raise ValueError("no methods given")
    return methods


def _rel_gap(x, y):
    scale = 1.0 + max(float(np.max(np.abs(x))), float(np.max(np.abs(y))))
    return float(np.max(np.abs(x - y))) / scale


def cmd_bench(args):
    sizes = _parse_sizes(args.sizes)
    methods = _parse_methods(args.methods)
    master = np.random.default_rng(args.seed)
    rows = []
    for n, m in sorted(set(sizes)):
        stats = {
            name: {"times": [], "max_resid": 0.0, "failures": {}} for name in methods
        }
        max_disagree = 0.0
        # one untimed warmup per size so first-call overhead stays out of means
        warm = generate(GeneratorSpec(n=n, m=m, seed=int(master.integers(2**63)), q_class=args.q_class))
        for name in methods:
            try:
                _QP_SOLVERS[name](warm)
            except tuple(_FAILURE_KINDS):
                pass
        for _ in range(args.trials):
            seed_t = int(master.integers(2**63))
            problem = generate(GeneratorSpec(n=n, m=m, seed=seed_t, q_class=args.q_class))
            xs = []
            for name in methods:
                entry = stats[name]
                t0 = time.perf_counter()
                try:
                    sol = _QP_SOLVERS[name](problem)
                except tuple(_FAILURE_KINDS) as exc:
                    kind = _FAILURE_KINDS[type(exc)]
                    entry["failures"][kind] = entry["failures"].get(kind, 0) + 1
                    continue
                entry["times"].append(time.perf_counter() - t0)
                entry["max_resid"] = max(entry["max_resid"], sol.constraint_residual)
                xs.append(sol.x)
            for i in range(len(xs)):
                for j in range(i + 1, len(xs)):
                    max_disagree = max(max_disagree, _rel_gap(xs[i], xs[j]))
        for name in methods:
            entry = stats[name]
            mean_ms = (
                1000.0 * float(np.mean(entry["times"])) if entry["times"] else None
            )
            rows.append(
                {
                    "n": n,
                    "m": m,
                    "method": name,
                    "trials": args.trials,
                    "solved": len(entry["times"]),
                    "meanTimeMs": mean_ms,
                    "maxConstraintResidual": entry["max_resid"],
                    "maxCrossMethodDisagreement": max_disagree,
                    "failures": dict(sorted(entry["failures"].items())),
                }
            )
    if args.trials == 0:
        rows = []
    rows.sort(key=lambda r: (r["n"], r["m"], r["method"]))

    report = {
        "formatVersion": 1,
        "seed": args.seed,
        "trials": args.trials,
        "qClass": args.q_class,
        "methods": methods,
        "rows": rows,
    }
    with open(args.output, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2)
        fh.write("\n")

    header = (
        f"{'n':>5} {'m':>5}  {'method':<10} {'trials':>7} {'solved':>7} "
        f"{'mean-ms':>10} {'ratio':>7} {'max-resid':>10} {'disagree':>10}  failures"
    )
    print(header)
    print("-" * len(header))
    by_size = {}
    for row in rows:
        by_size.setdefault((row["n"], row["m"]), []).append(row)
    for (n, m), group in sorted(by_size.items()):
        means = [r["meanTimeMs"] for r in group if r["meanTimeMs"] is not None]
        base = min(means) if means else None
        for row in group:
            mean = row["meanTimeMs"]
            mean_s = f"{mean:10.4f}" if mean is not None else f"{'-':>10}"
            ratio_s = (
                f"{mean / base:7.2f}" if (mean is not None and base) else f"{'-':>7}"
            )
            fail_s = (
                ",".join(f"{k}:{v}" for k, v in row["failures"].items()) or "-"
            )
            print(
                f"{row['n']:>5} {row['m']:>5}  {row['method']:<10} "
                f"{row['trials']:>7} {row['solved']:>7} {mean_s} {ratio_s} "
                f"{row['maxConstraintResidual']:>10.2e} "
                f"{row['maxCrossMethodDisagreement']:>10.2e}  {fail_s}"
            )
    print(f"report written to {args.output}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# check


def _check_rng(seed, salt):
    return np.random.default_rng([seed, salt])


def _check_pinv_penrose(seed, trials):
    rng = _check_rng(seed, 1)
    for t in range(trials):
        r = int(rng.integers(1, 30))
        c = int(rng.integers(1, 30))
        if rng.random() < 0.5:
            k = int(rng.integers(1, min(r, c) + 1))
            mat = rng.uniform(-1, 1, (r, k)) @ rng.uniform(-1, 1, (k, c))
        else:
            mat = rng.uniform(-1, 1, (r, c))
        plus = pseudo_inverse(mat)
        scale = max(float(np.linalg.norm(mat)), 1e-30)
        scale_p = max(float(np.linalg.norm(plus)), 1e-30)
        checks = [
            float(np.linalg.norm(mat @ plus @ mat - mat)) / scale,
            float(np.linalg.norm(plus @ mat @ plus - plus)) / scale_p,
            float(np.linalg.norm((mat @ plus).T - mat @ plus)) / max(float(np.linalg.norm(mat @ plus)), 1e-30),
            float(np.linalg.norm((plus @ mat).T - plus @ mat)) / max(float(np.linalg.norm(plus @ mat)), 1e-30),
        ]
        if max(checks) > 1e-10:
            return t, {"shape": [r, c], "penroseResiduals": checks}
    return trials, None


def _check_rrqr_rank(seed, trials):
    rng = _check_rng(seed, 2)
    for t in range(trials):
        n = int(rng.integers(2, 40))
        m = int(rng.integers(1, n + 5))
        r = int(rng.integers(1, min(m, n) + 1))
        a = rng.uniform(-1, 1, (m, r)) @ rng.uniform(-1, 1, (r, n))
        x_true = rng.uniform(-1, 1, n)
        b = a @ x_true
        red = rrqr_reduce(a, b)
        rank_oracle = int(np.linalg.matrix_rank(a))
        x_min = pseudo_inverse(red.a_tilde) @ red.b_tilde
        resid = float(np.max(np.abs(a @ x_min - b)))
        if red.rank != rank_oracle or resid > 1e-8 * (1.0 + float(np.max(np.abs(b)))):
            return t, {
                "n": n,
                "m": m,
                "expectedRank": rank_oracle,
                "reportedRank": red.rank,
                "residual": resid,
            }
        if red.rank < m:
            # perturb one right-hand side entry; the reducer's verdict must
            # match the augmented-rank oracle's
            b_bad = b.copy()
            b_bad[int(rng.integers(0, m))] += 1.0
            truly_bad = (
                int(np.linalg.matrix_rank(np.column_stack([a, b_bad]))) > rank_oracle
            )
            try:
                rrqr_reduce(a, b_bad)
                flagged = False
            except InfeasibleConstraintsError:
                flagged = True
            if flagged != truly_bad:
                return t, {"n": n, "m": m, "flaggedInfeasible": flagged, "trulyInfeasible": truly_bad}
    return trials, None


def _check_nullspace_basis(seed, trials):
    rng = _check_rng(seed, 3)
    for t in range(trials):
        n = int(rng.integers(2, 60))
        m = int(rng.integers(1, n))
        a = rng.uniform(-1, 1, (m, n))
        nb = nullspace_basis(a)
        gram = float(np.max(np.abs(nb.T @ nb - np.eye(n - m))))
        ann = float(np.max(np.abs(a @ nb), initial=0.0))
        if nb.shape != (n, n - m) or gram > 1e-12 or ann > 1e-12 * max(1.0, float(np.max(np.abs(a)))):
            return t, {"n": n, "m": m, "gramDefect": gram, "annihilationDefect": ann}
    return trials, None


def _check_projector_algebra(seed, trials):
    rng = _check_rng(seed, 4)
    for t in range(trials):
        n = int(rng.integers(2, 50))
        m = int(rng.integers(1, n))
        a = rng.uniform(-1, 1, (m, n))
        b = rng.uniform(-1, 1, m)
        expr = build_projector(EqualityConstraints(a, b))
        a_scale = float(np.max(np.abs(a)))
        ad = float(np.max(np.abs(a @ expr.d)))
        idem = float(np.max(np.abs(expr.d @ expr.d - expr.d)))
        feas = float(np.max(np.abs(a @ expr.x0 - b)))
        if ad > 1e-10 * a_scale or idem > 1e-10 or feas > 1e-9 * (1.0 + float(np.max(np.abs(b)))):
            return t, {"n": n, "m": m, "AD": ad, "idempotencyDefect": idem, "x0Residual": feas}
    return trials, None


def _check_embed_feasibility(seed, trials):
    rng = _check_rng(seed, 5)
    for t in range(trials):
        n = int(rng.integers(2, 50))
        m = int(rng.integers(1, n))
        a = rng.uniform(-1, 1, (m, n))
        b = rng.uniform(-1, 1, m)
        if rng.random() < 0.5 and m >= 1:
            # redundant rows: expressions are built on the reduced system
            pick = rng.integers(0, m, size=int(rng.integers(1, 4)))
            a = np.vstack([a, a[pick]])
            b = np.concatenate([b, b[pick]])
        original = EqualityConstraints(a, b)
        reduced = original.reduced()
        for expr in (build_projector(reduced), build_nullspace(reduced)):
            g = rng.uniform(-2, 2, expr.free_dim)
            resid = original.residual(expr.embed(g))
            if resid > 1e-9 * (1.0 + float(np.max(np.abs(b)))):
                return t, {"n": n, "m": int(a.shape[0]), "kind": type(expr).__name__, "residual": resid}
    return trials, None


def _check_spd_agreement(seed, trials):
    rng = _check_rng(seed, 6)
    for t in range(trials):
        n = int(rng.integers(2, 60))
        m = int(rng.integers(1, n))
        problem = generate(GeneratorSpec(n=n, m=m, seed=int(rng.integers(2**63))))
        sols = [solve_projector(problem), solve_nullspace(problem), solve_kkt(problem)]
        xs = [s.x for s in sols]
        x_gap = max(
            _rel_gap(xs[i], xs[j]) for i in range(3) for j in range(i + 1, 3)
        )
        f_kkt = sols[2].objective
        f_gap = max(abs(s.objective - f_kkt) for s in sols) / (1.0 + abs(f_kkt))
        stat = max(s.stationarity_residual for s in sols)
        c_scale = 1.0 + float(np.max(np.abs(problem.c)))
        if x_gap > 1e-8 or f_gap > 1e-10 or stat > 1e-8 * c_scale:
            return t, {
                "n": n,
                "m": m,
                "xDisagreement": x_gap,
                "objectiveDisagreement": f_gap,
                "stationarity": stat,
            }
    return trials, None


def _check_indefinite_agreement(seed, trials):
    rng = _check_rng(seed, 7)
    for t in range(trials):
        n = int(rng.integers(3, 40))
        m = int(rng.integers(1, n))
        problem = generate(
            GeneratorSpec(n=n, m=m, seed=int(rng.integers(2**63)), q_class="symmetric_indefinite")
        )
        try:
            ref = solve_kkt(problem)
        except OracleUnavailableError:
            continue  # legitimately singular reduced Hessian; nothing to compare
        for sol in (solve_projector(problem), solve_nullspace(problem)):
            if _rel_gap(sol.x, ref.x) > 1e-8:
                return t, {
                    "n": n,
                    "m": m,
                    "method": sol.method,
                    "xDisagreement": _rel_gap(sol.x, ref.x),
                    "classification": sol.classification,
                }
    return trials, None


def _check_redundant_rows(seed, trials):
    rng = _check_rng(seed, 8)
    for t in range(trials):
        n = int(rng.integers(3, 40))
        m = int(rng.integers(1, n))
        base_seed = int(rng.integers(2**63))
        base = generate(GeneratorSpec(n=n, m=m, seed=base_seed))
        x_proj = solve_projector(base).x
        x_null = solve_nullspace(base).x
        for k in (1, 2, 4):
            padded = generate(GeneratorSpec(n=n, m=m, seed=base_seed, rank_deficiency=k))
            for name, solver, ref in (
                ("projector", solve_projector, x_proj),
                ("nullspace", solve_nullspace, x_null),
            ):
                gap = float(np.max(np.abs(solver(padded).x - ref)))
                if gap > 1e-9 * (1.0 + float(np.max(np.abs(ref)))):
                    return t, {"n": n, "m": m, "extraRows": k, "method": name, "gap": gap}
    return trials, None


def _check_quadratic_one_step(seed, trials):
    rng = _check_rng(seed, 9)
    for t in range(trials):
        n = int(rng.integers(2, 30))
        m = int(rng.integers(1, n))
        problem = generate(GeneratorSpec(n=n, m=m, seed=int(rng.integers(2**63))))
        oracle = objectives.quadratic(problem.q, problem.c)
        reduced = reduce_problem(oracle, problem.constraints)
        trace = newton_solve(reduced)
        if not trace.iterations:
            continue  # started at the optimum
        ref = solve_nullspace(problem).x
        gap = float(np.max(np.abs(trace.final_x - ref)))
        ok = (
            trace.converged
            and len(trace.iterations) == 1
            and trace.iterations[0].step_size == 1.0
            and gap <= 1e-10 * (1.0 + float(np.max(np.abs(ref))))
        )
        if not ok:
            return t, {
                "n": n,
                "m": m,
                "iterations": len(trace.iterations),
                "converged": trace.converged,
                "gap": gap,
            }
    return trials, None


def _check_sqp_quadratic(seed, trials):
    rng = _check_rng(seed, 10)
    for t in range(trials):
        n = int(rng.integers(2, 30))
        m = int(rng.integers(1, n))
        problem = generate(GeneratorSpec(n=n, m=m, seed=int(rng.integers(2**63))))
        oracle = objectives.quadratic(problem.q, problem.c)
        reduced = reduce_problem(oracle, problem.constraints)
        trace = sqp_iterate(reduced)
        ref = solve_nullspace(problem).x
        gap = float(np.max(np.abs(trace.final_x - ref)))
        if not trace.converged or len(trace.iterations) > 2 or gap > 1e-9 * (1.0 + float(np.max(np.abs(ref)))):
            return t, {"n": n, "m": m, "iterations": len(trace.iterations), "gap": gap}
    return trials, None


def _random_lse_instance(rng, n, m):
    # 4n rows and a small right-hand side keep the optimum where many
    # softmax terms are active, i.e. the reduced Hessian stays uniformly
    # positive definite on the relevant sublevel set
    k = 4 * n
    oracle = objectives.log_sum_exp(rng.uniform(-1, 1, (k, n)))
    a = rng.uniform(-1, 1, (m, n))
    b = rng.uniform(-0.3, 0.3, m)
    return oracle, EqualityConstraints(a, b)


def _random_sum_exp_instance(rng, n, m):
    oracle = objectives.sum_exp(dim=n)
    a = rng.uniform(-1, 1, (m, n))
    a[0, :] = 1.0  # fixing sum(x) bounds every null-space ray, so a minimum exists
    b = rng.uniform(-1, 1, m)
    b[0] = rng.uniform(-0.3, 0.3) * n
    return oracle, EqualityConstraints(a, b)


def _check_newton_descent(seed, trials):
    rng = _check_rng(seed, 11)
    for t in range(trials):
        n = int(rng.integers(4, 30))
        m = int(rng.integers(1, min(n - 1, 10) + 1))
        oracle, constraints = _random_lse_instance(rng, n, m)
        reduced = reduce_problem(oracle, constraints)
        g0 = rng.uniform(-1.5, 1.5, reduced.free_dim)
        trace = newton_solve(reduced, NewtonConfig(max_iter=200, g0=g0))
        hs = trace.h_values()
        slack = 1e-12 * (1.0 + abs(hs[0]))
        monotone = all(hs[i + 1] <= hs[i] + slack for i in range(len(hs) - 1))
        if not trace.converged or not monotone:
            return t, {
                "n": n,
                "m": m,
                "converged": trace.converged,
                "hValues": hs,
            }
    return trials, None


def _check_contraction_bound(seed, trials):
    rng = _check_rng(seed, 12)
    for t in range(trials):
        n = int(rng.integers(4, 30))
        m = int(rng.integers(1, min(n - 1, 10) + 1))
        if rng.random() < 0.5:
            oracle, constraints = _random_lse_instance(rng, n, m)
        else:
            oracle, constraints = _random_sum_exp_instance(rng, n, m)
        reduced = reduce_problem(oracle, constraints)
        config = NewtonConfig(max_iter=200, g0=rng.uniform(-1.5, 1.5, reduced.free_dim))
        trace = newton_solve(reduced, config)
        if not trace.converged or not trace.iterations:
            return t, {"n": n, "m": m, "converged": trace.converged}
        samples = [it.g for it in trace.iterations] + [trace.final_g]
        constants = estimate_convergence_constants(reduced, samples)
        bound = iteration_bound(
            constants, config, trace.iterations[0].h_value - trace.final_h
        )
        norms = trace.grad_norms()
        cs = [bound.contraction * v for v in norms[-3:]]
        tail_ok = all(cs[i + 1] <= 2.0 * cs[i] ** 2 for i in range(len(cs) - 1))
        if len(trace.iterations) > bound.d_max or not tail_ok:
            return t, {
                "n": n,
                "m": m,
                "iterations": len(trace.iterations),
                "dMax": bound.d_max,
                "tail": cs,
            }
    return trials, None


def _check_suboptimality(seed, trials):
    rng = _check_rng(seed, 13)
    for t in range(trials):
        n = int(rng.integers(2, 40))
        m = int(rng.integers(1, n))
        problem = generate(GeneratorSpec(n=n, m=m, seed=int(rng.integers(2**63))))
        oracle = objectives.quadratic(problem.q, problem.c)
        reduced = reduce_problem(oracle, problem.constraints)
        h_star = solve_nullspace(problem).objective
        w = np.linalg.eigvalsh(reduced.hessian(np.zeros(reduced.free_dim)))
        constants_m = float(w[0])
        for _ in range(10):
            g = rng.uniform(-3, 3, reduced.free_dim)
            gap = reduced.value(g) - h_star
            bound = float(np.linalg.norm(reduced.gradient(g))) ** 2 / (2.0 * constants_m)
            if gap > bound + 1e-9 * (1.0 + abs(bound)):
                return t, {"n": n, "m": m, "gap": gap, "bound": bound}
    return trials, None


def _check_termination_gap(seed, trials):
    rng = _check_rng(seed, 14)
    for t in range(trials):
        n = int(rng.integers(2, 30))
        m = int(rng.integers(1, n))
        problem = generate(GeneratorSpec(n=n, m=m, seed=int(rng.integers(2**63))))
        oracle = objectives.quadratic(problem.q, problem.c)
        reduced = reduce_problem(oracle, problem.constraints)
        epsilon = 10.0 ** rng.uniform(-12, -6)
        trace = newton_solve(reduced, NewtonConfig(epsilon=epsilon))
        if not trace.converged:
            return t, {"n": n, "m": m, "epsilon": epsilon, "converged": False}
        gap = trace.final_h - solve_nullspace(problem).objective
        if gap > epsilon + 1e-12:
            return t, {"n": n, "m": m, "epsilon": epsilon, "gap": gap}
    return trials, None


_SUITES = {
    "invariants": [
        ("pinv_penrose", _check_pinv_penrose),
        ("rrqr_rank", _check_rrqr_rank),
        ("nullspace_basis", _check_nullspace_basis),
        ("projector_algebra", _check_projector_algebra),
        ("embed_feasibility", _check_embed_feasibility),
    ],
    "oracle": [
        ("spd_agreement", _check_spd_agreement),
        ("indefinite_agreement", _check_indefinite_agreement),
        ("redundant_rows", _check_redundant_rows),
    ],
    "convergence": [
        ("quadratic_one_step", _check_quadratic_one_step),
        ("sqp_quadratic", _check_sqp_quadratic),
        ("newton_descent", _check_newton_descent),
        ("contraction_bound", _check_contraction_bound),
        ("suboptimality", _check_suboptimality),
        ("termination_gap", _check_termination_gap),
    ],
}


def cmd_check(args):
    if args.trials < 1:
        raise ValueError("--trials must be at least 1")
    suites = ["invariants", "oracle", "convergence"] if args.suite == "all" else [args.suite]
    any_failed = False
    first_cx = None
    for suite in suites:
        for name, fn in _SUITES[suite]:
            passed, cx = fn(args.seed, args.trials)
            if cx is None:
                print(f"PASS {suite}/{name} ({passed}/{args.trials})")
            else:
                any_failed = True
                print(f"FAIL {suite}/{name} (failed at trial {passed} of {args.trials})")
                if first_cx is None:
                    first_cx = {
                        "formatVersion": 1,
                        "suite": suite,
                        "check": name,
                        "seed": args.seed,
                        "trial": passed,
                        "details": cx,
                    }
    if first_cx is not None:
        with open(args.counterexample, "w", encoding="utf-8") as fh:
            json.dump(first_cx, fh, indent=2)
            fh.write("\n")
        print(f"first counterexample written to {args.counterexample}", file=sys.stderr)
    return EXIT_CHECK_FAILED if any_failed else EXIT_OK


# ---------------------------------------------------------------------------


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InfeasibleConstraintsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (NonConvexError, DivergenceError, LineSearchError, OracleUnavailableError, ComputationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    except (ProblemFormatError, UnknownObjectiveError, InvalidHMatrixError, RankDeficiencyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
