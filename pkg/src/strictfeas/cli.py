"""Command-line harness: solve, diagnose, reduce, reproduce, export.

Exit codes are a stable contract: 0 on success (for `solve`: status Optimal;
for `reproduce`: every check passed), 2 when the solver reports a non-optimal
status, 1 on errors.  Every command emits a JSON run report with `--json`, or
writes it with `--out`; reports echo the options so runs can be repeated.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import bell, certify
from .exactnum import format_scalar
from .facial import (
    InconsistentConstraintsError,
    ReducingCertificate,
    RoundingFailedError,
    SolverFailedError,
    StrictlyFeasible,
    apply_constraints,
    derive_implicit_constraints,
    find_reducing_certificate,
)
from .model import (
    SdpProblem,
    StatusTag,
    problem_from_json,
    problem_to_json_str,
    to_double,
    validate,
)
from .solver import InvalidProblemError, SolveResult, SolverOptions, diagnostics_report, solve_sdp

TROUBLE_VAR_BOUND = 1e6
VALUE_TOL = 1e-6


class CliError(Exception):
    pass


def load_problem(path: str) -> SdpProblem:
    """Parse a problem file; parse errors carry line/column positions."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliError(
            f"{path}: parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    try:
        prob = problem_from_json(doc)
    except ValueError as exc:
        raise CliError(f"{path}: {exc}") from exc
    violations = validate(prob)
    if violations:
        raise CliError(f"{path}: invalid problem: " + "; ".join(violations))
    return prob


def store_problem(prob: SdpProblem, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(problem_to_json_str(prob))


BUILTINS = {
    "problem1-raw": lambda: bell.almost_quantum_pencil(bell.line1()),
    "problem1-simplified": bell.problem1_simplified,
    "problem2-raw": lambda: bell.almost_quantum_pencil(bell.line2()),
    "problem2-simplified": bell.problem2_simplified,
    "chsh-toy": bell.chsh_toy_pencil,
    "chsh-toy-simplified": bell.chsh_toy_simplified,
}


@dataclass
class RunReport:
    command: str
    inputs: dict
    options: dict
    solver: dict = field(default_factory=dict)
    reduction: dict = field(default_factory=dict)
    verification: list = field(default_factory=list)
    claims: list = field(default_factory=list)
    errors: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2) + "\n"


def _solver_options(args) -> SolverOptions:
    return SolverOptions(
        gap_tol=args.gap_tol, feas_tol=args.feas_tol, max_iter=args.max_iter
    )


def _echo_options(args) -> dict:
    out = {
        "gap_tol": args.gap_tol,
        "feas_tol": args.feas_tol,
        "max_iter": args.max_iter,
        "max_den": getattr(args, "max_den", None),
        "eig_threshold": getattr(args, "eig_threshold", None),
        "seed_env": os.environ.get("STRICTFEAS_SEED"),
    }
    return out


def _solve_summary(res: SolveResult) -> dict:
    d = res.diagnostics
    return {
        "status": res.status.tag.value,
        "message": res.status.message,
        "objective_primal": res.objective_primal,
        "objective_dual": res.objective_dual,
        "iterations": d.iterations,
        "final_gap": d.final_gap,
        "max_abs_variable": d.max_abs_variable,
        "min_slack_eigenvalue_estimate": d.min_slack_eigenvalue_estimate,
        "condition_estimate": d.condition_estimate,
    }


def _emit(report: RunReport, args, human_text: str | None = None) -> None:
    if getattr(args, "json", False):
        sys.stdout.write(report.to_json())
    elif human_text:
        print(human_text)
    if getattr(args, "out", None):
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(report.to_json())


def _numeric(prob: SdpProblem) -> tuple[SdpProblem, bool]:
    if prob.pencil.scalar == "double":
        return prob, False
    return to_double(prob), True


def cmd_solve(args) -> int:
    t0 = time.perf_counter()
    prob = load_problem(args.file)
    report = RunReport(
        command="solve", inputs={"file": args.file, "name": prob.name},
        options=_echo_options(args),
    )
    numeric, downcast = _numeric(prob)
    if downcast:
        report.solver["note"] = "exact problem downcast to double for the solver"
    res = solve_sdp(numeric, _solver_options(args))
    report.solver.update(_solve_summary(res))
    report.timings["seconds"] = time.perf_counter() - t0
    _emit(report, args, diagnostics_report(res))
    return 0 if res.status.tag is StatusTag.OPTIMAL else 2


def _diagnose(prob: SdpProblem, args):
    opts = _solver_options(args)
    return find_reducing_certificate(
        prob,
        opts,
        eig_threshold=args.eig_threshold,
        max_den=args.max_den,
    )


def _require_exact(prob: SdpProblem) -> SdpProblem:
    if prob.pencil.scalar == "exact":
        return prob
    # doubles are dyadic rationals, so the conversion is exact
    from fractions import Fraction

    from .exactnum import qarray, quad
    from .model import MatrixPencil

    def conv(M):
        return qarray([[Fraction(float(x)) for x in row] for row in M])

    pencil = MatrixPencil(
        n=prob.pencil.n,
        scalar="exact",
        f0=conv(prob.pencil.f0),
        var_names=prob.pencil.var_names,
        terms=tuple(conv(T) for T in prob.pencil.terms),
    )
    return SdpProblem(
        pencil=pencil,
        objective=tuple(quad(Fraction(float(b))) for b in prob.objective),
        form=prob.form,
        name=prob.name,
        note=prob.note,
    )


def cmd_diagnose(args) -> int:
    t0 = time.perf_counter()
    prob = _require_exact(load_problem(args.file))
    report = RunReport(
        command="diagnose", inputs={"file": args.file, "name": prob.name},
        options=_echo_options(args),
    )
    outcome = _diagnose(prob, args)
    lines = []
    if isinstance(outcome, StrictlyFeasible):
        report.reduction["verdict"] = "StrictlyFeasible"
        report.reduction["exact"] = outcome.exact
        report.reduction["tolerance"] = outcome.tolerance
        report.reduction["detail"] = outcome.detail
        lines.append("verdict: StrictlyFeasible")
        lines.append(
            "  (exact linear-algebra proof)" if outcome.exact
            else f"  (numerical verdict at tolerance {outcome.tolerance:g}, not a proof)"
        )
        lines.append(f"  {outcome.detail}")
    else:
        report.reduction["verdict"] = "ReducingCertificate"
        report.reduction["certificate"] = outcome.as_dict()
        lines.append(f"reducing certificate of rank {outcome.rank} found ({outcome.note})")
        lines.append("null vectors (range of the certificate):")
        for v in outcome.range_vectors:
            lines.append("  (" + ", ".join(format_scalar(x) for x in v) + ")")
    report.timings["seconds"] = time.perf_counter() - t0
    _emit(report, args, "\n".join(lines))
    return 0


def cmd_reduce(args) -> int:
    t0 = time.perf_counter()
    prob = _require_exact(load_problem(args.file))
    report = RunReport(
        command="reduce", inputs={"file": args.file, "name": prob.name},
        options=_echo_options(args),
    )
    outcome = _diagnose(prob, args)
    lines = []
    if isinstance(outcome, StrictlyFeasible):
        reduced = prob
        report.reduction["verdict"] = "StrictlyFeasible"
        report.reduction["eliminated"] = []
        lines.append("no reduction needed: problem diagnosed strictly feasible")
    else:
        cons = derive_implicit_constraints(prob, outcome.range_vectors)
        reduced = apply_constraints(prob, cons)
        report.reduction["certificate"] = outcome.as_dict()
        report.reduction["constraints"] = cons.as_dict()
        report.reduction["eliminated"] = list(cons.eliminated_names)
        if cons.eliminated:
            lines.append("eliminated variables:")
            for v, expr in cons.eliminated:
                lines.append(f"  {v} = {expr}")
        else:
            lines.append("certificate implies no substitutions; problem unchanged")
    if args.out_problem:
        store_problem(reduced, args.out_problem)
        lines.append(f"reduced problem written to {args.out_problem}")
    report.timings["seconds"] = time.perf_counter() - t0
    _emit(report, args, "\n".join(lines))
    return 0


# ---------------------------------------------------------------------------
# reproduce: the full pipeline on the bundled problems with known answers


def _span_canonical(vectors):
    from .exactnum import _rref, as_quad

    M = np.array([[as_quad(x) for x in v] for v in vectors], dtype=object)
    R, pivots = _rref(M)
    return tuple(tuple(R[r]) for r in sorted(pivots.values()))


def _problems_equal(a: SdpProblem, b: SdpProblem) -> bool:
    pa, pb = a.pencil, b.pencil
    if pa.n != pb.n or pa.var_names != pb.var_names:
        return False
    mats = [(pa.f0, pb.f0), *zip(pa.terms, pb.terms)]
    for ma, mb in mats:
        for i in range(pa.n):
            for j in range(pa.n):
                if ma[i, j] != mb[i, j]:
                    return False
    return tuple(a.objective) == tuple(b.objective)


def _trouble_signature(res: SolveResult, certified: float) -> bool:
    return (
        res.status.tag is not StatusTag.OPTIMAL
        or res.diagnostics.max_abs_variable > TROUBLE_VAR_BOUND
        or abs(res.objective_dual - certified) > VALUE_TOL
    )


def _reproduce_target(target: str, args, report: RunReport) -> bool:
    claims: list[tuple[str, bool, str]] = []
    opts = _solver_options(args)

    if target == "problem1":
        raw = bell.almost_quantum_pencil(bell.line1())
        golden = bell.problem1_simplified()
        vectors = bell.line1_null_vectors()
        relations = bell.line1_expected_relations()
        certified = 0.0
    elif target == "problem2":
        raw = bell.almost_quantum_pencil(bell.line2())
        golden = bell.problem2_simplified()
        vectors = bell.line2_null_vectors()
        relations = bell.line2_expected_relations()
        certified = float(certify.MU2_STAR)
    else:
        raw = bell.chsh_toy_pencil()
        golden = bell.chsh_toy_simplified()
        vectors = bell.toy_null_vectors()
        relations = bell.toy_expected_relations()
        certified = 0.0

    raw_res = solve_sdp(to_double(raw), opts)
    claims.append(
        (
            "raw solve shows the trouble signature",
            _trouble_signature(raw_res, certified),
            f"status {raw_res.status.tag.value}, objective {raw_res.objective_dual:.3e}, "
            f"max |variable| {raw_res.diagnostics.max_abs_variable:.3e}",
        )
    )
    report.solver[f"{target}-raw"] = _solve_summary(raw_res)

    outcome = _diagnose(raw, args)
    if isinstance(outcome, StrictlyFeasible):
        claims.append(("diagnosis finds a reducing certificate", False, outcome.detail))
        cert = None
    else:
        cert = outcome
        ok = _span_canonical(cert.range_vectors) == _span_canonical(vectors)
        claims.append(
            (
                "certificate range matches the known null directions exactly",
                ok,
                cert.note,
            )
        )
        report.reduction[f"{target}-certificate"] = cert.as_dict()

    if cert is not None:
        cons = derive_implicit_constraints(raw, cert.range_vectors)
        got = {v: (e.const, dict(e.coeffs)) for v, e in cons.eliminated}
        want = {v: (c, dict(co)) for v, (c, co) in relations.items()}
        claims.append(
            (
                "implicit constraints match the known relations symbol for symbol",
                got == want,
                "; ".join(f"{v} = {e}" for v, e in cons.eliminated),
            )
        )
        report.reduction[f"{target}-constraints"] = cons.as_dict()

        reduced = apply_constraints(raw, cons)
        claims.append(
            (
                "substitution reproduces the reduced pencil entry for entry",
                _problems_equal(reduced, golden),
                f"{len(reduced.var_names)} variables remain",
            )
        )

        red_res = solve_sdp(to_double(reduced), opts)
        clean = (
            red_res.status.tag is StatusTag.OPTIMAL
            and abs(red_res.objective_dual - certified) <= VALUE_TOL
            and red_res.diagnostics.max_abs_variable < 1e3
        )
        claims.append(
            (
                "reduced problem solves cleanly to the certified value",
                clean,
                f"status {red_res.status.tag.value}, objective {red_res.objective_dual:.10f}",
            )
        )
        report.solver[f"{target}-reduced"] = _solve_summary(red_res)

    if target == "problem1":
        verdict = certify.verify_primal_point(golden, bell.problem1_optimal_point())
        claims.append(
            ("known optimal point is exactly feasible", verdict.feasible, "mu = 0")
        )
        report.verification.append(verdict.as_dict())
        bound = certify.verify_bound_certificate(
            golden, bell.problem1_bound_matrix(), "mu"
        )
        ok = isinstance(bound, certify.BoundCertificate) and not bool(
            bound.certified_bound
        )
        claims.append(
            (
                "dual matrix certifies the optimum exactly (mu* = 0)",
                ok,
                bound.as_dict().get("certified_bound", "invalid"),
            )
        )
        report.verification.append(bound.as_dict())
    elif target == "problem2":
        verdict = certify.verify_mu2_bound(golden)
        claims.append(
            (
                "pencil is exactly PSD at 5*sqrt5 - 11 and exactly not above",
                verdict.confirmed,
                verdict.detail,
            )
        )
        report.verification.append(verdict.as_dict())
        formula = certify.check_eigenvalue_formula(golden)
        claims.append(
            ("closed-form eigenvalue branch confirmed", formula.confirmed, formula.detail)
        )
        report.verification.append(formula.as_dict())
    else:
        if cert is not None:
            tiny = abs(red_res.objective_dual) <= 1e-8
            claims.append(
                (
                    "reduced toy optimum is zero to 1e-8",
                    tiny,
                    f"objective {red_res.objective_dual:.3e}",
                )
            )

    all_ok = all(ok for _, ok, _ in claims)
    for name, ok, detail in claims:
        print(f"[{'PASS' if ok else 'FAIL'}] {target}: {name}")
        if not ok:
            print(f"       {detail}")
    report.claims.extend(
        {"target": target, "claim": name, "ok": ok, "detail": detail}
        for name, ok, detail in claims
    )
    return all_ok


def cmd_reproduce(args) -> int:
    t0 = time.perf_counter()
    targets = ["problem1", "problem2", "chsh-toy"] if args.target == "all" else [args.target]
    report = RunReport(
        command="reproduce", inputs={"target": args.target},
        options=_echo_options(args),
    )
    ok = True
    for target in targets:
        ok = _reproduce_target(target, args, report) and ok
    report.timings["seconds"] = time.perf_counter() - t0
    print(f"overall: {'all checks passed' if ok else 'CHECKS FAILED'}")
    _emit(report, args)
    return 0 if ok else 1


def cmd_export(args) -> int:
    prob = BUILTINS[args.target]()
    if args.out_problem:
        store_problem(prob, args.out_problem)
        print(f"{args.target} written to {args.out_problem}")
    else:
        sys.stdout.write(problem_to_json_str(prob))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="strictfeas",
        description="Diagnose and repair strict-feasibility failure in small SDPs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, problem_file=True, report_out=True):
        if problem_file:
            p.add_argument("file", help="problem JSON file")
        p.add_argument("--gap-tol", type=float, default=1e-9, dest="gap_tol")
        p.add_argument("--feas-tol", type=float, default=1e-9, dest="feas_tol")
        p.add_argument("--max-iter", type=int, default=200, dest="max_iter")
        p.add_argument("--max-den", type=int, default=10**6, dest="max_den")
        p.add_argument(
            "--eig-threshold", type=float, default=1e-6, dest="eig_threshold"
        )
        if report_out:
            p.add_argument("--out", dest="out", help="write the JSON run report here")
        p.add_argument(
            "--json", action="store_true", help="print the JSON run report to stdout"
        )

    p = sub.add_parser("solve", help="solve a pencil-form SDP numerically")
    common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("diagnose", help="look for a reducing certificate")
    common(p)
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("reduce", help="diagnose and substitute implicit constraints")
    common(p, report_out=False)
    p.add_argument(
        "--out",
        dest="out_problem",
        help="write the reduced problem JSON here",
    )
    p.add_argument(
        "--report",
        dest="out",
        help="write the JSON run report here",
    )
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("reproduce", help="run the bundled end-to-end reproductions")
    p.add_argument(
        "target", choices=["problem1", "problem2", "chsh-toy", "all"]
    )
    common(p, problem_file=False)
    p.set_defaults(func=cmd_reproduce)

    p = sub.add_parser("export", help="write a bundled problem to JSON")
    p.add_argument("target", choices=sorted(BUILTINS))
    p.add_argument("--out", dest="out_problem", help="output path (stdout if omitted)")
    p.set_defaults(func=cmd_export)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (
        CliError,
        InvalidProblemError,
        InconsistentConstraintsError,
        RoundingFailedError,
        SolverFailedError,
    ) as exc:
        label = "" if isinstance(exc, CliError) else f"{type(exc).__name__}: "
        print(f"error: {label}{exc}", file=sys.stderr)
        # reports stay valid JSON on error paths too
        report = RunReport(
            command=args.command,
            inputs={"file": getattr(args, "file", None)},
            options={},
            errors=[f"{label}{exc}"],
        )
        if getattr(args, "json", False):
            sys.stdout.write(report.to_json())
        if getattr(args, "out", None):
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(report.to_json())
        return 1


if __name__ == "__main__":
    sys.exit(main())
