"""Primal-dual interior-point solver for small dense SDPs in pencil form.

Infeasible-start path following with Nesterov-Todd scaling and a
Mehrotra-style predictor-corrector, dense Cholesky on the Schur complement.
Built for n <= ~10: everything is dense, single-threaded and deterministic
(two runs on the same input produce bitwise-identical iterates).

Honesty is the point: when iterates blow up, steps stagnate or the Newton
system degenerates, the result is reported as NumericalTrouble rather than
passing off the last iterate as optimal.  Maximization problems whose optimum
is only approached as variables run off to infinity (the signature of a
strict-feasibility failure on the primal side) reliably trigger this.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .model import Form, SdpProblem, SolveStatus, StatusTag, pencil_eval, validate


class InvalidProblemError(ValueError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class NoInteriorStartFoundError(RuntimeError):
    """No strictly positive starting point could be formed (reported, not patched)."""


@dataclass(frozen=True)
class SolverOptions:
    gap_tol: float = 1e-9
    feas_tol: float = 1e-9
    max_iter: int = 200
    var_bound: float = 1e8
    min_step: float = 1e-3
    stagnation_rounds: int = 5
    cond_bound: float = 1e14
    step_frac: float = 0.98
    keep_history: bool = False

    def __post_init__(self):
        for name in ("gap_tol", "feas_tol", "var_bound", "min_step"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass
class Diagnostics:
    iterations: int = 0
    final_gap: float = float("inf")
    primal_residual: float = float("inf")
    dual_residual: float = float("inf")
    max_abs_variable: float = 0.0
    min_slack_eigenvalue_estimate: float = float("nan")
    condition_estimate: float = 0.0
    history: list = field(default_factory=list)


@dataclass
class SolveResult:
    status: SolveStatus
    y: dict[str, float]
    X: np.ndarray
    objective_primal: float
    objective_dual: float
    diagnostics: Diagnostics

    @property
    def is_optimal(self) -> bool:
        return self.status.is_optimal


def _structural_rows(F0: np.ndarray, terms) -> np.ndarray:
    """Rows that carry any data in any pencil matrix (others are dropped)."""
    present = np.abs(F0).sum(axis=1) > 0
    for T in terms:
        present |= np.abs(T).sum(axis=1) > 0
    return np.flatnonzero(present)


def _sym(M: np.ndarray) -> np.ndarray:
    return 0.5 * (M + M.T)


def _floored_eigh(M: np.ndarray, label: str):
    """Eigendecomposition with tiny roundoff-negative eigenvalues floored.

    Iterates stay PD by construction; values at -1e-13 scale are float noise
    near the boundary, not genuine indefiniteness.  Anything worse raises.
    """
    lam, U = np.linalg.eigh(M)
    top = max(float(lam[-1]), 1e-300)
    if lam[0] <= 0:
        if lam[0] < -1e-10 * top:
            raise np.linalg.LinAlgError(f"{label} lost positive definiteness")
        lam = np.maximum(lam, 1e-14 * top)
    return lam, U


def _nt_scaling(X: np.ndarray, Z: np.ndarray) -> np.ndarray:
    """The Nesterov-Todd point W with W Z W = X."""
    lx, Ux = _floored_eigh(X, "X")
    Xh = (Ux * np.sqrt(lx)) @ Ux.T
    G = _sym(Xh @ Z @ Xh)
    lg, Ug = _floored_eigh(G, "Z")
    Ginvh = (Ug * (lg**-0.5)) @ Ug.T
    return _sym(Xh @ Ginvh @ Xh)


def _safe_inv(M: np.ndarray, label: str) -> np.ndarray:
    lam, U = _floored_eigh(M, label)
    return _sym((U * (1.0 / lam)) @ U.T)


def _max_step(S: np.ndarray, dS: np.ndarray) -> float:
    """Largest alpha with S + alpha dS >= 0 (S assumed PD up to roundoff)."""
    lam, U = _floored_eigh(S, "iterate")
    R = (U * (lam**-0.5)) @ U.T
    lam_min = float(np.linalg.eigvalsh(_sym(R @ dS @ R))[0])
    if lam_min >= 0:
        return np.inf
    return -1.0 / lam_min


def solve_sdp(prob: SdpProblem, opts: SolverOptions | None = None) -> SolveResult:
    """Solve max <b,y> s.t. F0 + sum y_i F_i >= 0 (numeric scalars only)."""
    opts = opts or SolverOptions()
    violations = validate(prob)
    if violations:
        raise InvalidProblemError(violations)
    if prob.form is not Form.DUAL:
        raise InvalidProblemError(["solver expects the pencil (dual) form"])
    if prob.pencil.scalar != "double":
        raise InvalidProblemError(
            ["solver expects double scalars; downcast exact problems explicitly"]
        )

    n_full = prob.pencil.n
    b = np.asarray(prob.objective, dtype=float)
    m = b.size
    names = prob.pencil.var_names

    rows = _structural_rows(prob.pencil.f0, prob.pencil.terms)
    C = prob.pencil.f0[np.ix_(rows, rows)].copy()
    Gammas = [T[np.ix_(rows, rows)].copy() for T in prob.pencil.terms]
    n = rows.size

    diag = Diagnostics()

    def finish(status: SolveStatus, y, Xred, cond) -> SolveResult:
        X_full = np.zeros((n_full, n_full))
        if n:
            X_full[np.ix_(rows, rows)] = Xred
        ydict = {name: float(val) for name, val in zip(names, y)}
        obj_p = float(np.tensordot(C, Xred, axes=2)) if n else 0.0
        obj_d = float(b @ y)
        diag.condition_estimate = cond
        diag.max_abs_variable = max(
            float(np.max(np.abs(y))) if m else 0.0,
            float(np.max(np.abs(Xred))) if n else 0.0,
        )
        slack = pencil_eval(prob.pencil, ydict)
        diag.min_slack_eigenvalue_estimate = float(np.linalg.eigvalsh(slack)[0])
        return SolveResult(
            status=status,
            y=ydict,
            X=X_full,
            objective_primal=obj_p,
            objective_dual=obj_d,
            diagnostics=diag,
        )

    # degenerate cases -------------------------------------------------
    if n == 0:
        # the pencil is identically zero: any y is feasible
        if np.any(b != 0):
            return finish(
                SolveStatus(StatusTag.DUAL_UNBOUNDED_SUSPECTED, "zero pencil, nonzero objective"),
                np.zeros(m),
                np.zeros((0, 0)),
                0.0,
            )
        return finish(SolveStatus(StatusTag.OPTIMAL, "zero pencil"), np.zeros(m), np.zeros((0, 0)), 0.0)

    dead_vars = [k for k, G in enumerate(Gammas) if not np.any(G)]
    if any(b[k] != 0 for k in dead_vars):
        return finish(
            SolveStatus(
                StatusTag.DUAL_UNBOUNDED_SUSPECTED,
                "objective increases along an unconstrained variable",
            ),
            np.zeros(m),
            np.eye(n),
            0.0,
        )
    if m == 0:
        lam = float(np.linalg.eigvalsh(C)[0])
        tag = StatusTag.OPTIMAL if lam >= -opts.feas_tol else StatusTag.PRIMAL_INFEASIBLE
        msg = "no variables" if tag is StatusTag.OPTIMAL else "constant pencil is not PSD"
        return finish(SolveStatus(tag, msg), np.zeros(0), np.zeros((n, n)), 0.0)

    Avec = np.array([(-G)[np.triu_indices(n)] for G in Gammas])
    if np.linalg.matrix_rank(Avec, tol=1e-12) < m:
        raise InvalidProblemError(["linearly dependent constraint matrices"])

    A = [-G for G in Gammas]  # standard form: sum y_i A_i + Z = C

    def a_of(M: np.ndarray) -> np.ndarray:
        return np.array([np.tensordot(Ai, M, axes=2) for Ai in A])

    def at_of(y: np.ndarray) -> np.ndarray:
        out = np.zeros((n, n))
        for yi, Ai in zip(y, A):
            out += yi * Ai
        return out

    # initial point: dual-feasible start from the constant term when it is
    # strictly diagonally dominant with a positive diagonal, identity otherwise
    c_scale = float(np.max(np.abs(C))) if np.any(C) else 1.0
    d = np.diag(C)
    dom = np.all(d > 0) and np.all(2 * d > np.abs(C).sum(axis=1))
    Z = C.copy() if dom else max(1.0, c_scale) * np.eye(n)
    xi = max(1.0, float(np.max(np.abs(b))), c_scale)
    X = xi * np.eye(n)
    y = np.zeros(m)
    if not np.all(np.isfinite(Z)) or not np.all(np.isfinite(X)):
        raise NoInteriorStartFoundError("could not form a finite interior start")

    b_scale = 1.0 + float(np.max(np.abs(b)))
    stagnant = 0
    cond = 0.0
    tau = opts.step_frac
    status = None

    for it in range(opts.max_iter):
        Rp = b - a_of(X)
        Rd = C - Z - at_of(y)
        obj_p = float(np.tensordot(C, X, axes=2))
        obj_d = float(b @ y)
        gap = abs(obj_p - obj_d) / (1.0 + abs(obj_p))
        res_p = float(np.max(np.abs(Rp))) / b_scale
        res_d = float(np.max(np.abs(Rd))) / (1.0 + c_scale)
        max_var = max(float(np.max(np.abs(y))), float(np.max(np.abs(X))))

        diag.iterations = it
        diag.final_gap = gap
        diag.primal_residual = res_p
        diag.dual_residual = res_d
        if opts.keep_history:
            diag.history.append(
                {"objective_primal": obj_p, "objective_dual": obj_d,
                 "res_p": res_p, "res_d": res_d, "gap": gap}
            )

        if gap <= opts.gap_tol and res_p <= opts.feas_tol and res_d <= opts.feas_tol:
            status = SolveStatus(StatusTag.OPTIMAL)
            break
        if max_var > opts.var_bound:
            status = SolveStatus(
                StatusTag.NUMERICAL_TROUBLE,
                f"iterate magnitude {max_var:.2e} exceeded the bound {opts.var_bound:.0e}; "
                "optimal solutions may fail to exist (strict feasibility suspect)",
            )
            break
        if obj_d > 1e12 * b_scale and res_d <= np.sqrt(opts.feas_tol):
            status = SolveStatus(
                StatusTag.DUAL_UNBOUNDED_SUSPECTED, "objective appears unbounded above"
            )
            break

        try:
            W = _nt_scaling(X, Z)
            WA = [W @ Ai @ W for Ai in A]
            M = np.array([[np.tensordot(Ai, WAj, axes=2) for WAj in WA] for Ai in A])
            M = _sym(M)
            cond = float(np.linalg.cond(M))
            # near convergence the Schur complement conditioning always
            # degrades (~1/mu); it only signals trouble while the gap is
            # still far from tolerance
            far_from_done = gap > 1e4 * opts.gap_tol
            if not np.isfinite(cond) or (cond > opts.cond_bound and far_from_done):
                status = SolveStatus(
                    StatusTag.NUMERICAL_TROUBLE,
                    f"Newton system condition {cond:.2e} exceeded {opts.cond_bound:.0e}",
                )
                break
            Mfac = None
            for reg_scale in (0.0, 1e-14, 1e-10):
                reg = reg_scale * max(float(np.trace(M)) / m, 1.0) * np.eye(m)
                try:
                    Mfac = sla.cho_factor(M + reg, check_finite=False)
                    break
                except np.linalg.LinAlgError:
                    continue
            if Mfac is None:
                raise np.linalg.LinAlgError("Schur complement factorization failed")
            Zinv = _safe_inv(Z, "Z")
            WRdW = W @ Rd @ W

            def newton(Rc: np.ndarray):
                rhs = Rp - a_of(Rc) + a_of(WRdW)
                dy = sla.cho_solve(Mfac, rhs, check_finite=False)
                dZ = Rd - at_of(dy)
                dX = _sym(Rc - W @ dZ @ W)
                return dy, dZ, dX

            # predictor
            dy_a, dZ_a, dX_a = newton(-X)
            ap = min(1.0, _max_step(X, dX_a))
            ad = min(1.0, _max_step(Z, dZ_a))
            mu = float(np.tensordot(X, Z, axes=2)) / n
            mu_aff = float(
                np.tensordot(X + ap * dX_a, Z + ad * dZ_a, axes=2)
            ) / n
            # centering: the exponent backs off to 1 when steps are blocked,
            # so boundary-crawling iterates get re-centered instead of stalling
            expon = max(1.0, 3.0 * min(ap, ad) ** 2)
            sigma = min(1.0, max(0.0, max(mu_aff, 0.0) / mu) ** expon)

            # corrector
            corr = _sym(dX_a @ dZ_a @ Zinv)
            Rc = sigma * mu * Zinv - X - corr
            dy, dZ, dX = newton(Rc)
            ap = min(1.0, tau * _max_step(X, dX))
            ad = min(1.0, tau * _max_step(Z, dZ))
        except np.linalg.LinAlgError as exc:
            status = SolveStatus(
                StatusTag.NUMERICAL_TROUBLE, f"factorization failed: {exc}"
            )
            break
        # merit safeguard: near-singular Newton systems can emit destructive
        # directions; retract the step rather than let residuals explode
        merit = abs(np.tensordot(X, Z, axes=2)) / n + float(
            np.max(np.abs(Rp))
        ) + float(np.max(np.abs(Rd)))
        for _ in range(3):
            Xn = _sym(X + ap * dX)
            yn = y + ad * dy
            Zn = _sym(Z + ad * dZ)
            merit_new = abs(np.tensordot(Xn, Zn, axes=2)) / n + float(
                np.max(np.abs(b - a_of(Xn)))
            ) + float(np.max(np.abs(C - Zn - at_of(yn))))
            if merit_new <= 10.0 * merit + 1e-14:
                break
            ap *= 0.25
            ad *= 0.25
        X, y, Z = Xn, yn, Zn
        tau = min(opts.step_frac, 0.9 + 0.09 * min(ap, ad))

        if min(ap, ad) < opts.min_step:
            stagnant += 1
            if stagnant >= opts.stagnation_rounds:
                status = SolveStatus(
                    StatusTag.NUMERICAL_TROUBLE,
                    f"step length below {opts.min_step} for "
                    f"{opts.stagnation_rounds} consecutive iterations",
                )
                break
        else:
            stagnant = 0
    else:
        status = SolveStatus(StatusTag.ITERATION_LIMIT, f"no convergence in {opts.max_iter} iterations")

    if status is None:  # pragma: no cover - defensive
        status = SolveStatus(StatusTag.ITERATION_LIMIT, "no status recorded")
    return finish(status, y, X, cond)


def diagnostics_report(res: SolveResult) -> str:
    """Plain-text summary of a solve, with a strict-feasibility warning."""
    d = res.diagnostics
    lines = [
        f"status: {res.status.tag.value}"
        + (f" ({res.status.message})" if res.status.message else ""),
        f"objective (primal reading): {res.objective_primal: .12g}",
        f"objective (pencil maximization): {res.objective_dual: .12g}",
        f"relative gap: {d.final_gap:.3e}",
        f"residuals: primal {d.primal_residual:.3e}, dual {d.dual_residual:.3e}",
        f"iterations: {d.iterations}",
        f"largest iterate magnitude: {d.max_abs_variable:.3e}",
        f"min slack eigenvalue estimate: {d.min_slack_eigenvalue_estimate:.3e}",
        f"Newton system condition estimate: {d.condition_estimate:.3e}",
    ]
    troubled = (not res.status.is_optimal) or d.max_abs_variable > 1e6
    if troubled:
        lines.append(
            "strict-feasibility warning: iterates or status indicate that optimal "
            "solutions may not exist for this formulation."
        )
        lines.append(
            "recommendation: diagnose with the facial module "
            "(find_reducing_certificate) and substitute the implicit constraints."
        )
    else:
        lines.append("no strict-feasibility warning.")
    return "\n".join(lines)
