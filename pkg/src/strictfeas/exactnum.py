"""Exact arithmetic over Q and Q(sqrt5), plus exact symmetric linear algebra.

Scalars are either :class:`fractions.Fraction` (rationals) or :class:`QuadExt`
(numbers of the form a + b*sqrt(5) with rational a, b).  Exact matrices are
numpy object arrays whose entries are QuadExt; see :func:`qarray`.  Everything
here is immutable and side-effect free, so values can be shared freely.

The exact scalar string grammar is ``p/q`` for rationals and
``p/q+r/s*sqrt5`` for extension elements (signs inline, either term may be
omitted, no whitespace, locale independent).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np

Rational = Fraction

#: tolerance used by the float -> exact reconstruction helpers
RECONSTRUCT_TOL = 1e-6

SQRT5 = math.sqrt(5.0)


class NonFiniteError(ValueError):
    """Raised when a reconstruction input is NaN or infinite."""


class NonSymmetricError(ValueError):
    """Raised when a matrix claimed symmetric is not."""


def _fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot coerce {type(x).__name__} to an exact rational")


class QuadExt:
    """Exact element a + b*sqrt(5) of Q(sqrt5).

    Ring and field operations are exact; comparisons use :func:`qsign` and
    never go through floating point.  Rationals embed with b = 0.
    """

    __slots__ = ("a", "b")

    def __init__(self, a=0, b=0):
        object.__setattr__(self, "a", _fraction(a))
        object.__setattr__(self, "b", _fraction(b))

    def __setattr__(self, name, value):  # pragma: no cover - guard
        raise AttributeError("QuadExt is immutable")

    # -- basic predicates -------------------------------------------------
    @property
    def is_rational(self) -> bool:
        return self.b == 0

    def __bool__(self) -> bool:
        return bool(self.a) or bool(self.b)

    # -- arithmetic -------------------------------------------------------
    def __add__(self, other):
        other = as_quad(other)
        if other is NotImplemented:
            return NotImplemented
        return QuadExt(self.a + other.a, self.b + other.b)

    __radd__ = __add__

    def __sub__(self, other):
        other = as_quad(other)
        if other is NotImplemented:
            return NotImplemented
        return QuadExt(self.a - other.a, self.b - other.b)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return QuadExt(-self.a, -self.b)

    def __pos__(self):
        return self

    def __abs__(self):
        return self if qsign(self) >= 0 else -self

    def __mul__(self, other):
        other = as_quad(other)
        if other is NotImplemented:
            return NotImplemented
        return QuadExt(
            self.a * other.a + 5 * self.b * other.b,
            self.a * other.b + self.b * other.a,
        )

    __rmul__ = __mul__

    def inverse(self) -> "QuadExt":
        # (a + b*sqrt5)^-1 = (a - b*sqrt5) / (a^2 - 5 b^2); the norm only
        # vanishes at 0 because sqrt5 is irrational.
        norm = self.a * self.a - 5 * self.b * self.b
        if norm == 0:
            raise ZeroDivisionError("inverse of zero in Q(sqrt5)")
        return QuadExt(self.a / norm, -self.b / norm)

    def __truediv__(self, other):
        other = as_quad(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        return as_quad(other) * self.inverse()

    def __pow__(self, exponent: int):
        if not isinstance(exponent, (int, np.integer)):
            return NotImplemented
        if exponent < 0:
            return self.inverse() ** (-exponent)
        result = QuadExt(1)
        base = self
        n = int(exponent)
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def conjugate(self) -> "QuadExt":
        return QuadExt(self.a, -self.b)

    # -- comparisons ------------------------------------------------------
    def __eq__(self, other):
        other = as_quad(other)
        if other is NotImplemented:
            return NotImplemented
        return self.a == other.a and self.b == other.b

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b))

    def __lt__(self, other):
        return qsign(self - as_quad(other)) < 0

    def __le__(self, other):
        return qsign(self - as_quad(other)) <= 0

    def __gt__(self, other):
        return qsign(self - as_quad(other)) > 0

    def __ge__(self, other):
        return qsign(self - as_quad(other)) >= 0

    # -- conversion -------------------------------------------------------
    def __float__(self) -> float:
        return float(self.a) + float(self.b) * SQRT5

    def decimal(self, dps: int = 50) -> mpmath.mpf:
        """Evaluate to a decimal with `dps` digits (the sign oracle)."""
        with mpmath.workdps(dps):
            value = (
                mpmath.mpf(self.a.numerator) / self.a.denominator
                + mpmath.mpf(self.b.numerator) / self.b.denominator * mpmath.sqrt(5)
            )
            return +value

    def __str__(self) -> str:
        return format_scalar(self)

    def __repr__(self) -> str:
        return f"QuadExt({self.a!r}, {self.b!r})"


QUAD_ZERO = QuadExt(0)
QUAD_ONE = QuadExt(1)
SQRT5_EXACT = QuadExt(0, 1)


def as_quad(x):
    """Coerce ints, Fractions and QuadExt to QuadExt; NotImplemented otherwise."""
    if isinstance(x, QuadExt):
        return x
    if isinstance(x, (int, np.integer, Fraction)):
        return QuadExt(x)
    return NotImplemented


def quad(a=0, b=0) -> QuadExt:
    """Build a + b*sqrt5 from ints, Fractions or fraction strings."""
    return QuadExt(a, b)


def qsign(x) -> int:
    """Exact sign of a + b*sqrt5 in {-1, 0, +1}, no floating point.

    Case analysis on the signs of a and b; the mixed-sign cases compare
    a^2 against 5 b^2, which decides because sqrt5 is irrational.
    """
    x = as_quad(x)
    if x is NotImplemented:
        raise TypeError("qsign expects an exact scalar")
    sa = (x.a > 0) - (x.a < 0)
    sb = (x.b > 0) - (x.b < 0)
    if sb == 0:
        return sa
    if sa == 0:
        return sb
    if sa == sb:
        return sa
    # opposite signs: |a| vs sqrt5 |b|
    cmp = x.a * x.a - 5 * x.b * x.b
    if cmp == 0:
        # would force a = b = 0, handled above
        raise AssertionError("a^2 = 5 b^2 with nonzero parts is impossible")
    return sa if cmp > 0 else sb


# ---------------------------------------------------------------------------
# scalar string grammar


_RATIONAL_RE = r"[+-]?\d+(?:/\d+)?"
_SCALAR_RE = re.compile(
    rf"^(?P<a>{_RATIONAL_RE})?(?P<b>(?:[+-]|^)(?:\d+(?:/\d+)?\*)?sqrt5)?$"
)


def parse_scalar(text: str) -> QuadExt:
    """Parse the exact grammar 'p/q', 'p/q+r/s*sqrt5', '-sqrt5', ...

    Whitespace is rejected; parsing never consults the locale.
    """
    if not isinstance(text, str) or text != text.strip() or " " in text:
        raise ValueError(f"malformed exact scalar {text!r}")
    m = _SCALAR_RE.match(text)
    if not m or (m.group("a") is None and m.group("b") is None):
        raise ValueError(f"malformed exact scalar {text!r}")
    a = Fraction(m.group("a")) if m.group("a") else Fraction(0)
    b = Fraction(0)
    if m.group("b"):
        bt = m.group("b")
        sign = 1
        if bt.startswith("-"):
            sign, bt = -1, bt[1:]
        elif bt.startswith("+"):
            bt = bt[1:]
        bt = bt[: -len("sqrt5")].rstrip("*")
        b = sign * (Fraction(bt) if bt else Fraction(1))
    return QuadExt(a, b)


def _format_fraction(f: Fraction) -> str:
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


def format_scalar(x) -> str:
    """Canonical string for an exact scalar, inverse of :func:`parse_scalar`."""
    x = as_quad(x)
    if x is NotImplemented:
        raise TypeError("format_scalar expects an exact scalar")
    if x.b == 0:
        return _format_fraction(x.a)
    bpart = f"{_format_fraction(abs(x.b))}*sqrt5"
    bpart = ("-" if x.b < 0 else "+") + bpart
    if x.a == 0:
        return bpart if bpart.startswith("-") else bpart[1:]
    return _format_fraction(x.a) + bpart


# ---------------------------------------------------------------------------
# exact matrices (numpy object arrays of QuadExt)


def qarray(rows) -> np.ndarray:
    """Object ndarray of QuadExt from nested ints/Fractions/QuadExt/strings."""

    def conv(x):
        if isinstance(x, QuadExt):
            return x
        if isinstance(x, str):
            return parse_scalar(x)
        return QuadExt(x)

    data = np.asarray(rows, dtype=object)
    out = np.empty(data.shape, dtype=object)
    for idx in np.ndindex(data.shape):
        out[idx] = conv(data[idx])
    return out


def qzeros(n: int, m: int | None = None) -> np.ndarray:
    out = np.empty((n, n if m is None else m), dtype=object)
    out[...] = QUAD_ZERO
    return out


def qeye(n: int) -> np.ndarray:
    out = qzeros(n)
    for i in range(n):
        out[i, i] = QUAD_ONE
    return out


def to_float(M: np.ndarray) -> np.ndarray:
    """Lossy downcast of an exact matrix/vector to float64."""
    return np.array([[float(x) for x in row] for row in M]) if M.ndim == 2 else np.array(
        [float(x) for x in M]
    )


def is_symmetric(M: np.ndarray) -> bool:
    n, m = M.shape
    if n != m:
        return False
    return all(M[i, j] == M[j, i] for i in range(n) for j in range(i + 1, n))


def frob_inner(A: np.ndarray, B: np.ndarray) -> QuadExt:
    """Exact Frobenius inner product sum_ij A_ij B_ij."""
    total = QUAD_ZERO
    for i in range(A.shape[0]):
        for j in range(A.shape[1]):
            total = total + as_quad(A[i, j]) * as_quad(B[i, j])
    return total


def mat_vec(M: np.ndarray, v: Sequence) -> np.ndarray:
    n, m = M.shape
    out = np.empty(n, dtype=object)
    for i in range(n):
        acc = QUAD_ZERO
        for j in range(m):
            acc = acc + as_quad(M[i, j]) * as_quad(v[j])
        out[i] = acc
    return out


def _rref(M: np.ndarray, column_order: Sequence[int] | None = None):
    """Exact reduced row-echelon form over Q(sqrt5).

    Returns (R, pivots) where pivots maps pivot column -> row.  The optional
    column order controls which columns are prefered as pivots.
    """
    R = np.array([[as_quad(x) for x in row] for row in M], dtype=object)
    rows, cols = R.shape
    order = list(column_order) if column_order is not None else list(range(cols))
    pivots: dict[int, int] = {}
    r = 0
    for c in order:
        if r >= rows:
            break
        pivot_row = next((i for i in range(r, rows) if bool(R[i, c])), None)
        if pivot_row is None:
            continue
        if pivot_row != r:
            R[[r, pivot_row]] = R[[pivot_row, r]]
        inv = R[r, c].inverse()
        for j in range(cols):
            R[r, j] = R[r, j] * inv
        for i in range(rows):
            if i != r and bool(R[i, c]):
                f = R[i, c]
                for j in range(cols):
                    R[i, j] = R[i, j] - f * R[r, j]
        pivots[c] = r
        r += 1
    return R, pivots


def nullspace_exact(M: np.ndarray) -> list[np.ndarray]:
    """Exact basis of {v : Mv = 0} for a rectangular exact matrix."""
    rows, cols = M.shape
    R, pivots = _rref(M)
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for f in free:
        v = np.empty(cols, dtype=object)
        v[...] = QUAD_ZERO
        v[f] = QUAD_ONE
        for c, r in pivots.items():
            v[c] = -R[r, f]
        basis.append(v)
    return basis


def kernel_basis_exact(M: np.ndarray) -> list[np.ndarray]:
    """Exact kernel basis of a square matrix; empty iff M is nonsingular."""
    n, m = M.shape
    if n != m:
        raise ValueError("kernel_basis_exact expects a square matrix")
    return nullspace_exact(M)


def row_space_basis_exact(M: np.ndarray) -> list[np.ndarray]:
    """Exact basis of the row space (= range, for symmetric M)."""
    R, pivots = _rref(M)
    return [np.array(R[r], dtype=object) for r in sorted(pivots.values())]


@dataclass(frozen=True)
class PsdCheck:
    """Outcome of the exact PSD decision.

    When not PSD, `bad_index` is the 0-based elimination step that failed and
    `witness` is an exact vector with witness^T M witness < 0.
    """

    is_psd: bool
    bad_index: int | None = None
    witness: tuple | None = None

    def __bool__(self) -> bool:
        return self.is_psd


def psd_check_exact(M: np.ndarray, require_symmetric: bool = True) -> PsdCheck:
    """Exact PSD decision by pivoted symmetric Gaussian elimination.

    At step k: a positive pivot eliminates its row/column; a zero pivot must
    have an all-zero remaining row (otherwise an indefinite 2x2 block gives a
    witness); a negative pivot yields its own witness direction.  Returns PSD
    iff M >= 0 exactly.
    """
    n, m = M.shape
    if n != m:
        raise NonSymmetricError("matrix is not square")
    if require_symmetric and not is_symmetric(M):
        raise NonSymmetricError("matrix is not symmetric")
    A = np.array([[as_quad(x) for x in row] for row in M], dtype=object)
    # T tracks row operations: current quadratic form = T M T^T, so row k of T
    # maps the current k-th basis direction back to original coordinates.
    T = qeye(n)

    def witness_at(row: int) -> tuple:
        return tuple(T[row])

    for k in range(n):
        pivot = A[k, k]
        s = qsign(pivot)
        if s < 0:
            return PsdCheck(False, k, witness_at(k))
        if s == 0:
            bad = next((j for j in range(k + 1, n) if bool(A[k, j])), None)
            if bad is None:
                continue
            d = A[bad, bad]
            sd = qsign(d)
            if sd < 0:
                return PsdCheck(False, k, witness_at(bad))
            # u = e_k + t e_bad has value 2 t A[k,bad] + t^2 A[bad,bad] < 0
            t = -A[k, bad] if sd == 0 else -A[k, bad] / d
            vec = tuple(T[k, j] + t * T[bad, j] for j in range(n))
            return PsdCheck(False, k, vec)
        # one congruence step: trailing block becomes the Schur complement
        factors = {i: A[i, k] / pivot for i in range(k + 1, n) if bool(A[i, k])}
        row_k = [A[k, j] for j in range(n)]
        for i, f in factors.items():
            for j in range(k + 1, n):
                A[i, j] = A[i, j] - f * row_k[j]
            for j in range(n):
                T[i, j] = T[i, j] - f * T[k, j]
        for i in factors:
            A[i, k] = QUAD_ZERO
            A[k, i] = QUAD_ZERO
    return PsdCheck(True)


def quadratic_form(M: np.ndarray, v: Sequence) -> QuadExt:
    """Exact v^T M v."""
    Mv = mat_vec(M, v)
    acc = QUAD_ZERO
    for i in range(len(v)):
        acc = acc + as_quad(v[i]) * Mv[i]
    return acc


def primitive_integer_vector(v: Sequence) -> np.ndarray:
    """Rescale an exact vector to primitive form.

    The result is an integer multiple of v with coefficient content 1 (gcd of
    all integer coefficients, over both the rational and sqrt5 parts) and a
    positive leading entry.
    """
    vals = [as_quad(x) for x in v]
    denoms = [f.denominator for x in vals for f in (x.a, x.b)]
    scale = Fraction(math.lcm(*denoms)) if denoms else Fraction(1)
    scaled = [x * scale for x in vals]
    numerators = [abs(int(f)) for x in scaled for f in (x.a, x.b) if f != 0]
    if numerators:
        g = math.gcd(*numerators)
        if g > 1:
            scaled = [x / g for x in scaled]
    lead = next((x for x in scaled if bool(x)), None)
    if lead is not None and qsign(lead) < 0:
        scaled = [-x for x in scaled]
    out = np.empty(len(scaled), dtype=object)
    out[:] = scaled
    return out


# ---------------------------------------------------------------------------
# float -> exact reconstruction


def reconstruct_rational(x: float, max_den: int = 10**6) -> Fraction | None:
    """Best bounded-denominator rational approximation of x, or None.

    Uses the continued-fraction convergents (via Fraction.limit_denominator)
    and accepts only when |x - p/q| <= 1e-6.
    """
    if max_den < 1:
        raise ValueError("max_den must be >= 1")
    if not math.isfinite(x):
        raise NonFiniteError(f"cannot reconstruct from {x!r}")
    cand = Fraction(x).limit_denominator(max_den)
    return cand if abs(x - float(cand)) <= RECONSTRUCT_TOL else None


def _convergents(x: float, max_den: int, max_terms: int = 30) -> list[Fraction]:
    """Continued-fraction convergents of x with denominator <= max_den."""
    out: list[Fraction] = []
    p0, q0, p1, q1 = 0, 1, 1, 0
    value = x
    for _ in range(max_terms):
        a = math.floor(value)
        p0, q0, p1, q1 = p1, q1, a * p1 + p0, a * q1 + q0
        if q1 > max_den:
            break
        out.append(Fraction(p1, q1))
        frac = value - a
        if frac < 1e-15:
            break
        value = 1.0 / frac
    return out


def _height(f: Fraction) -> int:
    return max(abs(f.numerator), f.denominator)


def reconstruct_quadext(x: float, max_den: int = 10**6) -> QuadExt | None:
    """Small-height a + b*sqrt5 with |x - (a + b*sqrt5)| <= 1e-6, or None.

    Candidates come from three generators: a plain rational reconstruction,
    pairs (a, b) with a among the convergents of x and b reconstructed from
    (x - a)/sqrt5, and a PSLQ integer relation between (x, 1, sqrt5).  The
    verified candidate of smallest height wins.
    """
    if max_den < 1:
        raise ValueError("max_den must be >= 1")
    if not math.isfinite(x):
        raise NonFiniteError(f"cannot reconstruct from {x!r}")

    candidates: list[QuadExt] = []

    r = reconstruct_rational(x, max_den)
    if r is not None:
        candidates.append(QuadExt(r))

    for a in [Fraction(0)] + _convergents(x, max_den):
        b = Fraction((x - float(a)) / SQRT5).limit_denominator(max_den)
        candidates.append(QuadExt(a, b))

    def admissible(q: QuadExt) -> bool:
        return (
            q.a.denominator <= max_den
            and q.b.denominator <= max_den
            and abs(x - float(q)) <= RECONSTRUCT_TOL
        )

    with mpmath.workdps(40):
        for tol in ("1e-12", "1e-9", "1e-7"):
            rel = mpmath.pslq(
                [mpmath.mpf(x), mpmath.mpf(1), mpmath.sqrt(5)],
                tol=mpmath.mpf(tol),
                maxcoeff=max(max_den, 10**6),
                maxsteps=10000,
            )
            if rel and rel[0] != 0:
                cand = QuadExt(Fraction(-rel[1], rel[0]), Fraction(-rel[2], rel[0]))
                candidates.append(cand)
                if admissible(cand):
                    break

    verified = [q for q in candidates if admissible(q)]
    if not verified:
        return None
    return min(
        verified,
        key=lambda q: (
            max(_height(q.a), _height(q.b)),
            _height(q.b),
            _height(q.a),
        ),
    )
