"""Linear matrix pencils and small dense SDPs in pencil (dual) form.

An SDP here is ``maximize <b, y>  s.t.  F0 + sum_i y_i F_i >= 0``: the dual
form.  Its primal is ``minimize <F0, X>  s.t.  <F_i, X> = -b_i, X >= 0``.
One data model carries both numeric (float64) and exact (QuadExt) entries,
tagged by ``scalar``; exact -> double conversion is explicit and lossy.

Problems are immutable after construction and safe for concurrent reads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterable, Mapping, Sequence

import numpy as np

from .exactnum import (
    as_quad,
    format_scalar,
    frob_inner,
    parse_scalar,
    qzeros,
    to_float,
)


class Form(str, Enum):
    DUAL = "dual"
    PRIMAL = "primal"


class StatusTag(str, Enum):
    OPTIMAL = "Optimal"
    NUMERICAL_TROUBLE = "NumericalTrouble"
    PRIMAL_INFEASIBLE = "PrimalInfeasible"
    DUAL_UNBOUNDED_SUSPECTED = "DualUnboundedSuspected"
    ITERATION_LIMIT = "IterationLimit"


@dataclass(frozen=True)
class SolveStatus:
    tag: StatusTag
    message: str = ""

    @property
    def is_optimal(self) -> bool:
        return self.tag is StatusTag.OPTIMAL


class MissingVariableError(KeyError):
    pass


class UnknownVariableError(KeyError):
    pass


def _freeze(M: np.ndarray) -> np.ndarray:
    M = M.copy()
    M.setflags(write=False)
    return M


@dataclass(frozen=True)
class MatrixPencil:
    """Affine symmetric-matrix family F0 + sum_i y_i F_i.

    Matrices are stored as full symmetric arrays; constructors take the upper
    triangle only, which keeps transcription single-entry.  `scalar` is
    "exact" (object arrays of QuadExt) or "double" (float64).
    """

    n: int
    scalar: str
    f0: np.ndarray
    var_names: tuple[str, ...]
    terms: tuple[np.ndarray, ...]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("pencil dimension must be >= 1")
        if self.scalar not in ("exact", "double"):
            raise ValueError(f"unknown scalar kind {self.scalar!r}")
        object.__setattr__(self, "f0", _freeze(self.f0))
        object.__setattr__(self, "terms", tuple(_freeze(t) for t in self.terms))

    @property
    def m(self) -> int:
        return len(self.var_names)

    def term(self, name: str) -> np.ndarray:
        try:
            return self.terms[self.var_names.index(name)]
        except ValueError:
            raise UnknownVariableError(name) from None

    @staticmethod
    def from_upper(
        n: int,
        scalar: str,
        f0_entries: Iterable[tuple[int, int, object]],
        var_entries: Sequence[tuple[str, Iterable[tuple[int, int, object]]]],
    ) -> "MatrixPencil":
        """Build from 0-based upper-triangle (i, j, value) triples."""

        def build(entries):
            if scalar == "exact":
                M = qzeros(n)
                coerce = lambda v: parse_scalar(v) if isinstance(v, str) else as_quad(v)
            else:
                M = np.zeros((n, n))
                coerce = float
            for i, j, v in entries:
                if not (0 <= i <= j < n):
                    raise ValueError(f"entry ({i},{j}) outside upper triangle of n={n}")
                M[i, j] = coerce(v)
                M[j, i] = M[i, j]
            return M

        names = tuple(name for name, _ in var_entries)
        return MatrixPencil(
            n=n,
            scalar=scalar,
            f0=build(f0_entries),
            var_names=names,
            terms=tuple(build(e) for _, e in var_entries),
        )


@dataclass(frozen=True)
class SdpProblem:
    """A pencil, an objective vector over its variables, and a form tag."""

    pencil: MatrixPencil
    objective: tuple
    form: Form = Form.DUAL
    name: str = ""
    note: str = ""
    objective_offset: object = 0

    def __post_init__(self):
        if len(self.objective) != self.pencil.m:
            raise ValueError("objective length must match the number of pencil terms")
        object.__setattr__(self, "objective", tuple(self.objective))

    @property
    def var_names(self) -> tuple[str, ...]:
        return self.pencil.var_names

    def b_of(self, name: str) -> object:
        try:
            return self.objective[self.var_names.index(name)]
        except ValueError:
            raise UnknownVariableError(name) from None


def pencil_eval(pencil: MatrixPencil, y: Mapping[str, object]) -> np.ndarray:
    """Evaluate F0 + sum_i y_i F_i; exact when the pencil is exact."""
    missing = [v for v in pencil.var_names if v not in y]
    if missing:
        raise MissingVariableError(f"missing assignment for {missing}")
    if pencil.scalar == "double":
        out = pencil.f0.copy()
        for name, term in zip(pencil.var_names, pencil.terms):
            out = out + float(y[name]) * term
        return out
    out = np.array(pencil.f0, dtype=object)
    for name, term in zip(pencil.var_names, pencil.terms):
        c = y[name]
        c = parse_scalar(c) if isinstance(c, str) else as_quad(c)
        if c is NotImplemented:
            raise TypeError(f"assignment for {name} is not an exact scalar")
        if bool(c):
            out = out + c * term
    return out


def dualize(prob: SdpProblem) -> SdpProblem:
    """Flip between the pencil (dual) form and its primal counterpart.

    The primal reading of the same data is: minimize <F0, X> subject to
    <F_i, X> = -b_i for every pencil term, X >= 0.  Candidate primal points
    are checked with :func:`primal_objective` / :func:`primal_residuals`.
    Applying this twice returns the original problem up to metadata.
    """
    flipped = Form.PRIMAL if prob.form is Form.DUAL else Form.DUAL
    return replace(prob, form=flipped, note=prob.note)


def primal_objective(prob: SdpProblem, X: np.ndarray):
    """<F0, X> for a candidate primal matrix, exact when both sides are."""
    if prob.pencil.scalar == "double":
        return float(np.tensordot(prob.pencil.f0, X, axes=2))
    return frob_inner(prob.pencil.f0, X)


def primal_residuals(prob: SdpProblem, X: np.ndarray) -> list:
    """Constraint residuals <F_i, X> + b_i of the primal reading."""
    out = []
    for term, b in zip(prob.pencil.terms, prob.objective):
        if prob.pencil.scalar == "double":
            out.append(float(np.tensordot(term, X, axes=2)) + float(b))
        else:
            out.append(frob_inner(term, X) + as_quad(b))
    return out


def validate(prob: SdpProblem) -> list[str]:
    """Structural checks; an empty list means the problem is well formed."""
    violations: list[str] = []
    p = prob.pencil
    mats = [("F0", p.f0)] + list(zip(p.var_names, p.terms))
    seen = set()
    for name in p.var_names:
        if name in seen:
            violations.append(f"DuplicateVariable: {name}")
        seen.add(name)
    for name, M in mats:
        if M.shape != (p.n, p.n):
            violations.append(
                f"DimensionMismatch: {name} has shape {M.shape}, expected {(p.n, p.n)}"
            )
            continue
        if p.scalar == "double":
            if not np.all(np.isfinite(M)):
                violations.append(f"NonFinite: {name} contains NaN or infinity")
            if not np.array_equal(M, M.T):
                violations.append(f"NotSymmetric: {name}")
        else:
            bad = next(
                (
                    (i, j)
                    for i in range(p.n)
                    for j in range(i + 1, p.n)
                    if M[i, j] != M[j, i]
                ),
                None,
            )
            if bad:
                violations.append(f"NotSymmetric: {name} at {bad}")
    return violations


def to_double(prob: SdpProblem) -> SdpProblem:
    """Explicit lossy downcast of an exact problem to float64 scalars."""
    p = prob.pencil
    if p.scalar == "double":
        return prob
    pencil = MatrixPencil(
        n=p.n,
        scalar="double",
        f0=to_float(p.f0),
        var_names=p.var_names,
        terms=tuple(to_float(t) for t in p.terms),
    )
    return replace(
        prob,
        pencil=pencil,
        objective=tuple(float(b) for b in prob.objective),
        objective_offset=float(prob.objective_offset),
    )


# ---------------------------------------------------------------------------
# JSON problem files
#
# { "name": str, "n": int, "scalar": "double"|"exact",
#   "F0": [[i, j, value-string], ...],
#   "vars": [ {"name": str, "b": value-string, "F": [[i,j,value-string],...]},
#             ... ] }
# with 1-based upper-triangle indices (i <= j) and exact value strings per
# the exactnum grammar.


def _value_to_str(v, scalar: str) -> str:
    if scalar == "double":
        return repr(float(v))
    return format_scalar(v)


def _value_from_str(s, scalar: str):
    if scalar == "double":
        return float(s)
    return parse_scalar(s) if isinstance(s, str) else as_quad(s)


def _matrix_to_entries(M: np.ndarray, scalar: str) -> list:
    n = M.shape[0]
    out = []
    for i in range(n):
        for j in range(i, n):
            v = M[i, j]
            nonzero = (v != 0.0) if scalar == "double" else bool(as_quad(v))
            if nonzero:
                out.append([i + 1, j + 1, _value_to_str(v, scalar)])
    return out


def problem_to_json(prob: SdpProblem) -> dict:
    p = prob.pencil
    return {
        "name": prob.name,
        "n": p.n,
        "scalar": p.scalar,
        "F0": _matrix_to_entries(p.f0, p.scalar),
        "vars": [
            {
                "name": name,
                "b": _value_to_str(b, p.scalar),
                "F": _matrix_to_entries(term, p.scalar),
            }
            for name, b, term in zip(p.var_names, prob.objective, p.terms)
        ],
    }


def problem_from_json(doc: dict) -> SdpProblem:
    try:
        n = int(doc["n"])
        scalar = doc["scalar"]
        name = doc.get("name", "")
        raw_f0 = doc["F0"]
        raw_vars = doc["vars"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"problem file missing field: {exc}") from exc
    if scalar not in ("double", "exact"):
        raise ValueError(f"unknown scalar kind {scalar!r}")

    def entries(raw, where):
        out = []
        for k, item in enumerate(raw):
            try:
                i, j, v = item
            except (TypeError, ValueError):
                raise ValueError(f"{where}[{k}]: expected [i, j, value]") from None
            i, j = int(i), int(j)
            if not (1 <= i <= j <= n):
                raise ValueError(
                    f"{where}[{k}]: index ({i},{j}) outside 1-based upper triangle"
                )
            out.append((i - 1, j - 1, _value_from_str(v, scalar)))
        return out

    seen = set()
    var_entries = []
    objective = []
    for k, rv in enumerate(raw_vars):
        vname = rv.get("name")
        if not vname or not isinstance(vname, str):
            raise ValueError(f"vars[{k}]: missing variable name")
        if vname in seen:
            raise ValueError(f"vars[{k}]: duplicate variable name {vname!r}")
        seen.add(vname)
        var_entries.append((vname, entries(rv.get("F", []), f"vars[{k}].F")))
        objective.append(_value_from_str(rv.get("b", "0"), scalar))

    pencil = MatrixPencil.from_upper(n, scalar, entries(raw_f0, "F0"), var_entries)
    return SdpProblem(pencil=pencil, objective=tuple(objective), name=name)


def problem_to_json_str(prob: SdpProblem) -> str:
    """Canonical serialization: fixed key order, 2-space indent, newline end."""
    return json.dumps(problem_to_json(prob), indent=2) + "\n"
