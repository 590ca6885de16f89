"""Strict-feasibility diagnosis and repair for pencil-form SDPs.

Given max <b,y> s.t. F0 + sum_i y_i F_i >= 0, exactly one of two things holds
(when the problem is feasible): either some y makes the pencil positive
definite, or there is a nonzero X >= 0 with <F0, X> = 0 and <F_i, X> = 0 for
every i.  Such an X is a *reducing certificate*: every feasible slack matrix
annihilates range(X), so each range vector v yields linear relations
(F0 v)_j + sum_i y_i (F_i v)_j = 0 among the variables.  Substituting those
relations produces an equivalent, smaller problem that solvers handle
reliably.

The search runs numerically (maximizing the minimum eigenvalue over the
trace-one slice of matrices orthogonal to the pencil), the candidate is
rationalized, and every certificate property is then verified exactly; a
candidate that cannot be rationalized is surfaced as RoundingFailed, never
guessed around.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np

from .exactnum import (
    QUAD_ONE,
    qeye,
    QUAD_ZERO,
    QuadExt,
    as_quad,
    format_scalar,
    frob_inner,
    kernel_basis_exact,
    mat_vec,
    nullspace_exact,
    primitive_integer_vector,
    psd_check_exact,
    quad,
    qzeros,
    reconstruct_quadext,
    reconstruct_rational,
    row_space_basis_exact,
    to_float,
)
from .model import (
    Form,
    MatrixPencil,
    SdpProblem,
    StatusTag,
    UnknownVariableError,
)
from .solver import SolverOptions, solve_sdp


class RoundingFailedError(RuntimeError):
    """The numerical certificate could not be rationalized and verified."""


class SolverFailedError(RuntimeError):
    """The numerical stage of the diagnosis did not converge."""


class InconsistentConstraintsError(ValueError):
    """The implied linear relations admit no solution: the SDP is infeasible."""


@dataclass(frozen=True)
class AffineExpr:
    """const + sum_v coeffs[v] * v with exact scalars."""

    const: QuadExt
    coeffs: dict

    def __post_init__(self):
        object.__setattr__(
            self, "coeffs", {v: c for v, c in self.coeffs.items() if bool(c)}
        )

    def evaluate(self, assignment) -> QuadExt:
        total = self.const
        for v, c in self.coeffs.items():
            total = total + c * as_quad(assignment[v])
        return total

    def __str__(self) -> str:
        parts = [format_scalar(self.const)] if bool(self.const) else []
        for v, c in sorted(self.coeffs.items()):
            parts.append(f"({format_scalar(c)})*{v}")
        return " + ".join(parts) if parts else "0"

    def as_dict(self) -> dict:
        return {
            "const": format_scalar(self.const),
            "coeffs": {v: format_scalar(c) for v, c in sorted(self.coeffs.items())},
        }


@dataclass(frozen=True)
class ImplicitConstraintSet:
    """Reduced consistent relations and a triangular elimination order."""

    equations: tuple[AffineExpr, ...]  # each reads: expression = 0
    eliminated: tuple[tuple[str, AffineExpr], ...]

    @property
    def eliminated_names(self) -> tuple[str, ...]:
        return tuple(v for v, _ in self.eliminated)

    def as_dict(self) -> dict:
        return {
            "equations": [e.as_dict() for e in self.equations],
            "eliminated": [[v, e.as_dict()] for v, e in self.eliminated],
        }


@dataclass(frozen=True)
class ReducingCertificate:
    """Exact nonzero X >= 0 orthogonal to the whole pencil, plus range basis."""

    X: np.ndarray
    range_vectors: tuple
    note: str = ""

    @property
    def rank(self) -> int:
        return len(self.range_vectors)

    def as_dict(self) -> dict:
        n = self.X.shape[0]
        return {
            "n": n,
            "X": [
                [i + 1, j + 1, format_scalar(self.X[i, j])]
                for i in range(n)
                for j in range(i, n)
                if bool(as_quad(self.X[i, j]))
            ],
            "range_vectors": [
                [format_scalar(x) for x in v] for v in self.range_vectors
            ],
            "note": self.note,
        }


@dataclass(frozen=True)
class StrictlyFeasible:
    """Verdict that no reducing certificate exists.

    `exact` verdicts are proved by linear algebra (the orthogonal slice is
    trivial); numeric verdicts carry the solver tolerance and are evidence,
    not proof.
    """

    exact: bool
    tolerance: float | None
    detail: str = ""


def _upper_pairs(n: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(n) for j in range(i, n)]


def _constraint_row(Q: np.ndarray, pairs) -> list:
    # <Q, X> as a functional of the upper-triangle entries of symmetric X
    return [
        Q[i, j] * (QUAD_ONE if i == j else quad(2)) for i, j in pairs
    ]


def _coords_to_matrix(coords, pairs, n: int) -> np.ndarray:
    M = qzeros(n)
    for (i, j), v in zip(pairs, coords):
        M[i, j] = v
        M[j, i] = v
    return M


def _slice_parameterization(prob: SdpProblem):
    """Exact affine chart of {X symmetric: <F0,X> = <F_i,X> = 0, tr X = 1}.

    Returns (X0, basis) with X0 in the slice and basis spanning its traceless
    orthogonal directions, or a StrictlyFeasible verdict when the slice is
    empty (an exact alternative-1 proof).
    """
    p = prob.pencil
    n = p.n
    pairs = _upper_pairs(n)
    rows = [_constraint_row(p.f0, pairs)]
    rows += [_constraint_row(T, pairs) for T in p.terms]
    K = np.array(rows, dtype=object)
    kernel = nullspace_exact(K)
    if not kernel:
        return StrictlyFeasible(
            exact=True,
            tolerance=None,
            detail="no nonzero symmetric matrix is orthogonal to the pencil",
        )
    traces = []
    for vec in kernel:
        t = QUAD_ZERO
        for (i, j), v in zip(pairs, vec):
            if i == j:
                t = t + v
        traces.append(t)
    pivot = next((k for k, t in enumerate(traces) if bool(t)), None)
    if pivot is None:
        return StrictlyFeasible(
            exact=True,
            tolerance=None,
            detail="every matrix orthogonal to the pencil is traceless, "
            "so none is PSD and nonzero",
        )
    x0 = [v / traces[pivot] for v in kernel[pivot]]
    basis = []
    for k, vec in enumerate(kernel):
        if k == pivot:
            continue
        f = traces[k] / traces[pivot]
        basis.append([v - f * p0 for v, p0 in zip(vec, kernel[pivot])])
    X0 = _coords_to_matrix(x0, pairs, n)
    B = [_coords_to_matrix(b, pairs, n) for b in basis]
    return X0, B


def build_alternative_problem(prob: SdpProblem) -> SdpProblem:
    """The feasibility SDP of the second alternative, trace-normalized.

    Solutions X(z) = X0 + sum_k z_k B_k satisfy X >= 0, <F0, X> = 0,
    <F_i, X> = 0 and tr X = 1 (the normalization excludes X = 0).  The
    objective is zero.  When the slice is already empty the returned problem
    has an infeasible pencil of dimension 1 (constant -1), encoding exact
    infeasibility of the alternative.
    """
    if prob.form is not Form.DUAL:
        raise ValueError("expected a pencil (dual) form problem")
    chart = _slice_parameterization(prob)
    if isinstance(chart, StrictlyFeasible):
        pencil = MatrixPencil(
            n=1, scalar="exact", f0=qzeros(1) - 1, var_names=(), terms=()
        )
        return SdpProblem(
            pencil=pencil,
            objective=(),
            name=f"{prob.name or 'problem'}-alternative",
            note=f"alternative infeasible: {chart.detail}",
        )
    X0, B = chart
    pencil = MatrixPencil(
        n=prob.pencil.n,
        scalar="exact",
        f0=X0,
        var_names=tuple(f"z{k+1}" for k in range(len(B))),
        terms=tuple(B),
    )
    return SdpProblem(
        pencil=pencil,
        objective=tuple(QUAD_ZERO for _ in B),
        name=f"{prob.name or 'problem'}-alternative",
        note="trace-normalized feasibility problem of the second alternative",
    )


def _round_coords(
    zhat: np.ndarray, max_den: int, extension: bool, tol: float | None = None
):
    """Snap floats to exact scalars; `tol` overrides the default acceptance.

    A loose tolerance is sound here because every snapped candidate is then
    verified exactly; a wrong snap fails verification and the ladder moves on.
    """
    out = []
    for z in zhat:
        z = float(z)
        if extension:
            r = reconstruct_quadext(z, max_den)
        elif tol is None:
            r = reconstruct_rational(z, max_den)
        else:
            cand = Fraction(z).limit_denominator(max_den)
            r = cand if abs(z - float(cand)) <= tol else None
        if r is None:
            return None
        out.append(as_quad(r))
    return out


def _affine_solve_exact(K: np.ndarray, rhs) -> tuple | None:
    """Exact particular solution and nullspace basis of K x = rhs, or None."""
    rows, cols = K.shape
    aug = np.empty((rows, cols + 1), dtype=object)
    aug[:, :cols] = K
    for r in range(rows):
        aug[r, cols] = as_quad(rhs[r])
    from .exactnum import _rref

    R, pivots = _rref(aug, column_order=range(cols))
    for r in range(rows):
        if r not in set(pivots.values()) and bool(R[r, cols]):
            return None
    particular = np.empty(cols, dtype=object)
    particular[...] = QUAD_ZERO
    for c, r in pivots.items():
        particular[c] = R[r, cols]
    return particular, nullspace_exact(K)


def _exact_matrix(rows_of) -> np.ndarray:
    out = np.empty((len(rows_of), len(rows_of[0])), dtype=object)
    for i, row in enumerate(rows_of):
        for j, v in enumerate(row):
            out[i, j] = as_quad(v)
    return out


def _face_split_certificate(
    prob: SdpProblem, Xnum: np.ndarray, eig_threshold: float, ladders
):
    """Certificate extraction that rounds the range projector first.

    The projector onto range(X) is basis independent, so it rounds to small
    exact entries even though the solver lands at an arbitrary interior point
    of the optimal face.  With the face fixed exactly, the remaining in-face
    coordinates are forgiving: any nearby rational point keeps the restricted
    matrix positive definite.  Returns (certificate, None) or (None, reason).
    """
    n = prob.pencil.n
    lam, V = np.linalg.eigh(Xnum)
    lmax = max(float(lam[-1]), 1e-300)
    keep = lam >= eig_threshold * lmax
    r = int(np.sum(keep))
    if r == 0:
        return None, "numerical certificate has rank 0"
    Pnum = V[:, keep] @ V[:, keep].T
    reason = "projector rounding never succeeded"
    # iterates sit ~sqrt(gap) off the optimal face, so small-denominator
    # snaps need a loose acceptance; exact verification guards every snap
    rational_dens = [d for d, ext in ladders if not ext]
    loose = [
        (d, False, t)
        for d, t in zip(rational_dens[:2], (1e-3, 1e-5))
    ]
    ladders = loose + [(d, ext, None) for d, ext in ladders]
    for max_den, extension, tol in ladders:
        flat = Pnum[np.triu_indices(n)]
        coords = _round_coords(flat, max_den, extension, tol)
        if coords is None:
            reason = f"projector entries not representable at max_den={max_den}"
            continue
        P = _coords_to_matrix(coords, _upper_pairs(n), n)
        PP = _exact_matrix(
            [
                [
                    sum((P[i, k] * P[k, j] for k in range(n)), QUAD_ZERO)
                    for j in range(n)
                ]
                for i in range(n)
            ]
        )
        if any(PP[i, j] != P[i, j] for i in range(n) for j in range(n)):
            reason = f"rounded matrix at max_den={max_den} is not a projector"
            continue
        Wrows = row_space_basis_exact(P)
        if len(Wrows) != r:
            reason = f"projector rank {len(Wrows)} != numerical rank {r}"
            continue
        Wrows = [primitive_integer_vector(w) for w in Wrows]
        # face-restricted slice: M symmetric r x r with
        # <W^T Q W, M> = 0 for every pencil matrix Q and tr(W^T W M) = 1
        W = np.empty((n, r), dtype=object)
        for j, w in enumerate(Wrows):
            for i in range(n):
                W[i, j] = as_quad(w[i])

        def congr(Q):
            QW = _exact_matrix(
                [
                    [
                        sum((as_quad(Q[i, k]) * W[k, j] for k in range(n)), QUAD_ZERO)
                        for j in range(r)
                    ]
                    for i in range(n)
                ]
            )
            return _exact_matrix(
                [
                    [
                        sum((W[k, i] * QW[k, j] for k in range(n)), QUAD_ZERO)
                        for j in range(r)
                    ]
                    for i in range(r)
                ]
            )

        pairs_r = _upper_pairs(r)
        qmats = [prob.pencil.f0, *prob.pencil.terms]
        K = np.array(
            [_constraint_row(congr(Q), pairs_r) for Q in qmats]
            + [_constraint_row(congr(qeye(n)), pairs_r)],
            dtype=object,
        )
        rhs = [QUAD_ZERO] * len(qmats) + [QUAD_ONE]
        solved = _affine_solve_exact(K, rhs)
        if solved is None:
            reason = f"face slice at max_den={max_den} is inconsistent"
            continue
        particular, homogeneous = solved
        Wf = np.array([[float(x) for x in row] for row in W])
        Mhat = np.linalg.pinv(Wf) @ Xnum @ np.linalg.pinv(Wf).T
        mflat = Mhat[np.triu_indices(r)]
        base = np.array([float(x) for x in particular])
        if homogeneous:
            Hf = np.array([[float(x) for x in h] for h in homogeneous]).T
            shat, *_ = np.linalg.lstsq(Hf, mflat - base, rcond=None)
            s = _round_coords(shat, max_den, extension, tol)
            if s is None:
                reason = f"face coordinates not representable at max_den={max_den}"
                continue
        else:
            s = []
        mcoords = np.array(particular, dtype=object)
        for sj, h in zip(s, homogeneous):
            if bool(sj):
                mcoords = mcoords + sj * np.asarray(h, dtype=object)
        M = _coords_to_matrix(mcoords, pairs_r, r)
        X = _exact_matrix(
            [
                [
                    sum(
                        (
                            W[i, a] * M[a, bcol] * W[j, bcol]
                            for a in range(r)
                            for bcol in range(r)
                        ),
                        QUAD_ZERO,
                    )
                    for j in range(n)
                ]
                for i in range(n)
            ]
        )
        problems = verify_certificate_matrix(prob, X)
        if problems:
            reason = f"face rounding at max_den={max_den}: " + "; ".join(problems)
            continue
        vectors = tuple(primitive_integer_vector(v) for v in row_space_basis_exact(X))
        note = (
            f"face-projector rounding at max_den={max_den}"
            + (" over Q(sqrt5)" if extension else "")
            + f"; rank {len(vectors)}"
        )
        return ReducingCertificate(X=X, range_vectors=vectors, note=note), None
    return None, reason


def find_reducing_certificate(
    prob: SdpProblem,
    opts: SolverOptions | None = None,
    eig_threshold: float = 1e-6,
    max_den: int | None = None,
):
    """Search for a reducing certificate; verify it exactly or report back.

    The trace-one orthogonal slice is parameterized exactly, the minimum
    eigenvalue of X(z) is maximized numerically (the interior-point iterate
    then lands in the relative interior of the optimal face, i.e. at maximal
    rank), and the optimizer coordinates are rationalized on an escalating
    denominator ladder (sqrt5-extension reconstruction only after plain
    rationals fail); every certificate invariant is then re-checked exactly.
    """
    opts = opts or SolverOptions()
    chart = _slice_parameterization(prob)
    if isinstance(chart, StrictlyFeasible):
        return chart
    X0, B = chart
    n = prob.pencil.n

    names = tuple(f"z{k+1}" for k in range(len(B))) + ("slack_margin",)
    terms = tuple(to_float(Bk) for Bk in B) + (-np.eye(n),)
    pencil = MatrixPencil(
        n=n, scalar="double", f0=to_float(X0), var_names=names, terms=terms
    )
    margin_prob = SdpProblem(
        pencil=pencil,
        objective=tuple(0.0 for _ in B) + (1.0,),
        name=f"{prob.name or 'problem'}-alternative-margin",
    )
    # the margin problem is strictly feasible on both sides but its optimum
    # is heavily degenerate, so Schur conditioning is no failure signal here;
    # every downstream conclusion is verified exactly anyway
    inner_opts = replace(opts, cond_bound=max(opts.cond_bound, 1e30))
    res = solve_sdp(margin_prob, inner_opts)
    if res.status.tag is not StatusTag.OPTIMAL:
        raise SolverFailedError(
            f"alternative-problem solve ended with {res.status.tag.value}: "
            f"{res.status.message}"
        )
    tstar = res.y["slack_margin"]
    feas_cut = max(1e-8, 10 * opts.feas_tol)
    if tstar < -feas_cut:
        return StrictlyFeasible(
            exact=False,
            tolerance=feas_cut,
            detail=(
                "the alternative problem is infeasible at solver tolerance "
                f"(best slack margin {tstar:.3e}); this is numerical evidence, "
                "not an exact proof"
            ),
        )

    zhat = np.array([res.y[f"z{k+1}"] for k in range(len(B))])
    Xnum = to_float(X0) + sum(z * to_float(Bk) for z, Bk in zip(zhat, B)) if len(B) else to_float(X0)
    eigs = np.linalg.eigvalsh(Xnum)
    numeric_rank = int(np.sum(eigs >= eig_threshold * max(eigs[-1], 1e-300)))

    dens = [d for d in (100, 10**4, 10**6) if max_den is None or d <= max_den]
    if max_den is not None and max_den not in dens:
        dens.append(max_den)
    ladders = [(d, False) for d in dens] + [(d, True) for d in dens]
    failure = "no rounding attempt succeeded"
    for max_den, extension in ladders:
        coords = _round_coords(zhat, max_den, extension)
        if coords is None:
            failure = f"coordinates not representable at max_den={max_den}"
            continue
        X = np.array(X0, dtype=object)
        for c, Bk in zip(coords, B):
            if bool(c):
                X = X + c * Bk
        problems = verify_certificate_matrix(prob, X)
        if problems:
            failure = f"max_den={max_den}: " + "; ".join(problems)
            continue
        vectors = tuple(
            primitive_integer_vector(v) for v in row_space_basis_exact(X)
        )
        note = (
            f"rounded at max_den={max_den}"
            + (" over Q(sqrt5)" if extension else "")
            + f"; numerical rank {numeric_rank} at threshold {eig_threshold:g}"
        )
        if numeric_rank != len(vectors):
            note += f" (exact rank {len(vectors)} differs)"
        return ReducingCertificate(X=X, range_vectors=vectors, note=note)

    # the direct rounding only lands when the optimal face is axis aligned;
    # otherwise fix the face first via its projector, then round inside it
    cert, reason = _face_split_certificate(prob, Xnum, eig_threshold, ladders)
    if cert is not None:
        return cert
    raise RoundingFailedError(
        f"could not rationalize the numerical certificate: {failure}; {reason}"
    )


def verify_certificate_matrix(prob: SdpProblem, X: np.ndarray) -> list[str]:
    """Exact invariant check for a candidate certificate; [] when valid."""
    problems = []
    if not any(bool(as_quad(x)) for x in X.ravel()):
        problems.append("X is zero")
    check = psd_check_exact(X)
    if not check.is_psd:
        problems.append(f"X is not PSD (step {check.bad_index})")
    v = frob_inner(prob.pencil.f0, X)
    if bool(v):
        problems.append(f"<F0, X> = {format_scalar(v)} != 0")
    for name, T in zip(prob.pencil.var_names, prob.pencil.terms):
        v = frob_inner(T, X)
        if bool(v):
            problems.append(f"<F_{name}, X> = {format_scalar(v)} != 0")
    return problems


def verify_range_vectors(cert: ReducingCertificate) -> list[str]:
    """Each stored vector must lie in range(X) = kernel(X)^perp, exactly."""
    problems = []
    kernel = kernel_basis_exact(cert.X)
    for idx, v in enumerate(cert.range_vectors):
        for k in kernel:
            dot = QUAD_ZERO
            for a, b in zip(v, k):
                dot = dot + as_quad(a) * as_quad(b)
            if bool(dot):
                problems.append(f"range vector {idx} is not orthogonal to ker X")
                break
    return problems


def certificate_null_vectors(cert: ReducingCertificate) -> list[np.ndarray]:
    """Primitive integer-scaled exact basis of range(X)."""
    return [primitive_integer_vector(v) for v in row_space_basis_exact(cert.X)]


def derive_implicit_constraints(
    prob: SdpProblem, vectors, protect_objective: bool = True
) -> ImplicitConstraintSet:
    """Stack (F0 v)_j + sum_i y_i (F_i v)_j = 0 and reduce exactly.

    Pivots prefer the variable of largest file index among those solvable;
    when the objective is a single variable it is never eliminated.  Raises
    InconsistentConstraintsError when the relations admit no solution, which
    means the original SDP itself is infeasible.
    """
    p = prob.pencil
    if p.scalar != "exact":
        raise ValueError("implicit constraints are derived over exact pencils")
    names = list(p.var_names)
    protected = set()
    if protect_objective:
        support = [v for v, b in zip(names, prob.objective) if bool(as_quad(b))]
        if len(support) == 1:
            protected = {support[0]}

    rows = []
    for v in vectors:
        const_col = mat_vec(p.f0, v)
        coeff_cols = [mat_vec(T, v) for T in p.terms]
        for j in range(p.n):
            row = [col[j] for col in coeff_cols] + [const_col[j]]
            if any(bool(x) for x in row):
                rows.append(row)
    if not rows:
        return ImplicitConstraintSet(equations=(), eliminated=())

    A = np.array(rows, dtype=object)
    ncols = len(names)
    order = sorted(
        (k for k, v in enumerate(names) if v not in protected), reverse=True
    )
    from .exactnum import _rref

    R, pivots = _rref(A, column_order=order)

    equations = []
    eliminated = []
    for c, r in sorted(pivots.items(), key=lambda kv: -kv[0]):
        coeffs = {
            names[k]: R[r, k] for k in range(ncols) if k != c and bool(R[r, k])
        }
        const = R[r, ncols]
        equations.append(
            AffineExpr(const=const, coeffs={names[c]: QUAD_ONE, **coeffs})
        )
        eliminated.append(
            (names[c], AffineExpr(const=-const, coeffs={v: -x for v, x in coeffs.items()}))
        )
    # rows with no pivot must be trivially satisfied
    pivot_rows = set(pivots.values())
    for r in range(R.shape[0]):
        if r in pivot_rows:
            continue
        if any(bool(R[r, k]) for k in range(ncols)):
            bad = [names[k] for k in range(ncols) if bool(R[r, k])]
            raise InconsistentConstraintsError(
                "the relations pin protected variable(s) "
                f"{bad}; the problem cannot be reduced by substitution"
            )
        if bool(R[r, ncols]):
            raise InconsistentConstraintsError(
                "the implied linear relations are inconsistent: "
                "the original SDP is infeasible"
            )
    return ImplicitConstraintSet(
        equations=tuple(equations), eliminated=tuple(eliminated)
    )


def apply_constraints(prob: SdpProblem, cons: ImplicitConstraintSet) -> SdpProblem:
    """Eliminate the constrained variables by exact affine substitution.

    The reduced pencil evaluated at any assignment of the remaining variables
    equals the original pencil at the lifted assignment, exactly; the
    objective is rewritten the same way (constants land in objective_offset).
    """
    p = prob.pencil
    names = list(p.var_names)
    for v, expr in cons.eliminated:
        if v not in names:
            raise UnknownVariableError(v)
        for w in expr.coeffs:
            if w not in names:
                raise UnknownVariableError(w)
    if not cons.eliminated:
        return prob

    eliminated = dict(cons.eliminated)
    keep = [v for v in names if v not in eliminated]
    term_of = dict(zip(names, p.terms))
    b_of = dict(zip(names, prob.objective))

    f0 = np.array(p.f0, dtype=object)
    new_terms = {v: np.array(term_of[v], dtype=object) for v in keep}
    offset = as_quad(prob.objective_offset)
    new_b = {v: as_quad(b_of[v]) for v in keep}
    for v, expr in eliminated.items():
        T = term_of[v]
        bv = as_quad(b_of[v])
        if bool(expr.const):
            f0 = f0 + expr.const * T
        offset = offset + bv * expr.const
        for w, c in expr.coeffs.items():
            new_terms[w] = new_terms[w] + c * T
            new_b[w] = new_b[w] + bv * c

    pencil = MatrixPencil(
        n=p.n,
        scalar="exact",
        f0=f0,
        var_names=tuple(keep),
        terms=tuple(new_terms[v] for v in keep),
    )
    base = prob.name or "problem"
    new_name = base[: -len("-raw")] + "-reduced" if base.endswith("-raw") else base + "-reduced"
    return SdpProblem(
        pencil=pencil,
        objective=tuple(new_b[v] for v in keep),
        form=prob.form,
        name=new_name,
        note=prob.note,
        objective_offset=offset,
    )


def lift_assignment(cons: ImplicitConstraintSet, assignment: dict) -> dict:
    """Extend an assignment of the remaining variables to the original ones."""
    full = dict(assignment)
    for v, expr in reversed(cons.eliminated):
        full[v] = expr.evaluate(full)
    return full


@dataclass(frozen=True)
class ReductionRound:
    certificate: ReducingCertificate
    constraints: ImplicitConstraintSet
    problem: SdpProblem


def reduce_problem(
    prob: SdpProblem, opts: SolverOptions | None = None
) -> tuple[SdpProblem, list[ReductionRound], StrictlyFeasible | None]:
    """Repeat diagnose -> derive -> substitute until nothing more is implied.

    One round sufficed for every problem we bundle; the loop is capped at the
    pencil dimension.  Returns the final problem, the rounds performed, and
    the terminating verdict: a StrictlyFeasible outcome, or None when the
    last certificate implied no further substitutions (a fixed point, e.g.
    structurally zero rows that no substitution can remove) or the cap hit.
    """
    rounds: list[ReductionRound] = []
    current = prob
    for _ in range(prob.pencil.n):
        outcome = find_reducing_certificate(current, opts)
        if isinstance(outcome, StrictlyFeasible):
            return current, rounds, outcome
        cons = derive_implicit_constraints(current, outcome.range_vectors)
        if not cons.eliminated:
            return current, rounds, None
        current = apply_constraints(current, cons)
        rounds.append(
            ReductionRound(certificate=outcome, constraints=cons, problem=current)
        )
    return current, rounds, None
