"""Pencil evaluation, dualization, validation, JSON round trips."""

import json
import random
from fractions import Fraction

import numpy as np
import pytest

from strictfeas.exactnum import frob_inner, qarray, quad
from strictfeas.model import (
    Form,
    MatrixPencil,
    MissingVariableError,
    SdpProblem,
    dualize,
    pencil_eval,
    primal_objective,
    primal_residuals,
    problem_from_json,
    problem_to_json,
    problem_to_json_str,
    to_double,
    validate,
)


def small_exact_problem():
    pencil = MatrixPencil.from_upper(
        2,
        "exact",
        [(0, 0, 1), (1, 1, 1)],
        [("y1", [(0, 0, -1), (1, 1, 1)]), ("y2", [(0, 1, "1/2")])],
    )
    return SdpProblem(pencil=pencil, objective=(quad(1), quad(0)), name="tiny")


def random_exact_pencil(rng, n=3, m=2):
    def entries():
        return [
            (i, j, Fraction(rng.randint(-4, 4), rng.randint(1, 3)))
            for i in range(n)
            for j in range(i, n)
        ]

    return MatrixPencil.from_upper(
        n, "exact", entries(), [(f"v{k}", entries()) for k in range(m)]
    )


class TestPencilEval:
    def test_constant_pencil(self):
        pencil = MatrixPencil.from_upper(
            2, "exact", [(0, 0, 2)], [("y", [])]
        )
        out = pencil_eval(pencil, {"y": 7})
        assert out[0, 0] == quad(2) and not bool(out[1, 0])

    def test_missing_variable(self):
        prob = small_exact_problem()
        with pytest.raises(MissingVariableError):
            pencil_eval(prob.pencil, {"y1": 0})

    def test_exact_evaluation(self):
        prob = small_exact_problem()
        out = pencil_eval(prob.pencil, {"y1": Fraction(1, 3), "y2": 2})
        assert out[0, 0] == quad(Fraction(2, 3))
        assert out[0, 1] == quad(1)
        assert out[1, 1] == quad(Fraction(4, 3))

    def test_affine_in_y(self):
        rng = random.Random(11)
        pencil = random_exact_pencil(rng)
        for _ in range(20):
            y1 = {v: Fraction(rng.randint(-3, 3), 2) for v in pencil.var_names}
            y2 = {v: Fraction(rng.randint(-3, 3), 2) for v in pencil.var_names}
            lhs = pencil_eval(pencil, y1) + pencil_eval(pencil, y2)
            zero = {v: 0 for v in pencil.var_names}
            rhs = pencil_eval(pencil, zero) + pencil_eval(
                pencil, {v: y1[v] + y2[v] for v in pencil.var_names}
            )
            assert all(
                lhs[i, j] == rhs[i, j] for i in range(pencil.n) for j in range(pencil.n)
            )

    def test_weak_duality_identity(self):
        # <X, pencil(y)> = <X, F0> + sum_i y_i <X, F_i>, exactly
        rng = random.Random(12)
        pencil = random_exact_pencil(rng)
        for _ in range(20):
            y = {v: Fraction(rng.randint(-3, 3), 3) for v in pencil.var_names}
            X = qarray(
                [[rng.randint(-3, 3) for _ in range(pencil.n)] for _ in range(pencil.n)]
            )
            X = X + X.T
            lhs = frob_inner(X, pencil_eval(pencil, y))
            rhs = frob_inner(X, pencil.f0)
            for name, term in zip(pencil.var_names, pencil.terms):
                rhs = rhs + quad(y[name]) * frob_inner(X, term)
            assert lhs == rhs


class TestDualize:
    def test_involution(self):
        prob = small_exact_problem()
        again = dualize(dualize(prob))
        assert again.form is Form.DUAL
        assert again.pencil is prob.pencil
        assert again.objective == prob.objective

    def test_primal_candidate_checking(self):
        prob = small_exact_problem()
        primal = dualize(prob)
        assert primal.form is Form.PRIMAL
        X = qarray([[1, 0], [0, 1]])
        # objective <F0, X> and residuals <F_i, X> + b_i
        assert primal_objective(primal, X) == quad(2)
        res = primal_residuals(primal, X)
        assert res[0] == quad(1)  # <diag(-1,1), I> + 1 = 0 + 1
        assert res[1] == quad(0)

    def test_zero_objective_gives_zero_b(self):
        pencil = MatrixPencil.from_upper(2, "exact", [], [("y", [(0, 0, 1)])])
        prob = SdpProblem(pencil=pencil, objective=(quad(0),))
        primal = dualize(prob)
        assert all(not bool(b) for b in primal.objective)


class TestValidate:
    def test_well_formed(self):
        assert validate(small_exact_problem()) == []

    def test_dimension_mismatch(self):
        pencil = MatrixPencil(
            n=3,
            scalar="double",
            f0=np.zeros((3, 3)),
            var_names=("y",),
            terms=(np.zeros((2, 2)),),
        )
        prob = SdpProblem(pencil=pencil, objective=(1.0,))
        assert any(v.startswith("DimensionMismatch") for v in validate(prob))

    def test_not_symmetric(self):
        M = np.zeros((2, 2))
        M[0, 1] = 1.0
        pencil = MatrixPencil(
            n=2, scalar="double", f0=np.zeros((2, 2)), var_names=("y",), terms=(M,)
        )
        prob = SdpProblem(pencil=pencil, objective=(1.0,))
        assert any(v.startswith("NotSymmetric") for v in validate(prob))

    def test_non_finite(self):
        M = np.zeros((2, 2))
        M[0, 0] = float("nan")
        pencil = MatrixPencil(
            n=2, scalar="double", f0=M, var_names=(), terms=()
        )
        prob = SdpProblem(pencil=pencil, objective=())
        assert any(v.startswith("NonFinite") for v in validate(prob))

    def test_duplicate_variables(self):
        pencil = MatrixPencil.from_upper(
            2, "double", [], [("y", [(0, 0, 1)]), ("y", [(1, 1, 1)])]
        )
        prob = SdpProblem(pencil=pencil, objective=(1.0, 1.0))
        assert any(v.startswith("DuplicateVariable") for v in validate(prob))


class TestJson:
    def test_round_trip_exact(self):
        prob = small_exact_problem()
        doc = problem_to_json(prob)
        back = problem_from_json(doc)
        assert validate(back) == []
        assert problem_to_json_str(back) == problem_to_json_str(prob)

    def test_canonical_bytes_stable(self):
        prob = small_exact_problem()
        text = problem_to_json_str(prob)
        again = problem_to_json_str(problem_from_json(json.loads(text)))
        assert again == text

    def test_duplicate_variable_rejected(self):
        doc = problem_to_json(small_exact_problem())
        doc["vars"].append(dict(doc["vars"][0]))
        with pytest.raises(ValueError, match="duplicate"):
            problem_from_json(doc)

    def test_bad_index_rejected(self):
        doc = problem_to_json(small_exact_problem())
        doc["F0"].append([2, 1, "1"])
        with pytest.raises(ValueError, match="upper triangle"):
            problem_from_json(doc)

    def test_double_round_trip(self):
        prob = to_double(small_exact_problem())
        back = problem_from_json(problem_to_json(prob))
        assert np.allclose(back.pencil.f0, prob.pencil.f0)
        assert back.objective == prob.objective


class TestDowncast:
    def test_exact_to_double(self):
        prob = small_exact_problem()
        d = to_double(prob)
        assert d.pencil.scalar == "double"
        assert d.pencil.f0.dtype == np.float64
        assert d.objective == (1.0, 0.0)
