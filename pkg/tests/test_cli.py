"""CLI contract: exit codes, JSON reports, file round trips."""

import json

import numpy as np
import pytest

from strictfeas.cli import BUILTINS, load_problem, main, store_problem
from strictfeas.model import problem_to_json_str, validate

from helpers import random_certified_sdp


@pytest.fixture()
def tmpfile(tmp_path):
    def make(name):
        return str(tmp_path / name)

    return make


def write_builtin(name, path):
    store_problem(BUILTINS[name](), path)


class TestLoadStore:
    def test_round_trip_canonical_bytes(self, tmpfile):
        path = tmpfile("p2.json")
        write_builtin("problem2-raw", path)
        prob = load_problem(path)
        again = tmpfile("p2-again.json")
        store_problem(prob, again)
        assert open(path).read() == open(again).read()

    def test_loaded_builtin_validates(self, tmpfile):
        path = tmpfile("p1.json")
        write_builtin("problem1-raw", path)
        assert validate(load_problem(path)) == []

    def test_duplicate_variables_rejected(self, tmpfile):
        path = tmpfile("dup.json")
        doc = json.loads(problem_to_json_str(BUILTINS["chsh-toy"]()))
        doc["vars"].append(dict(doc["vars"][0]))
        with open(path, "w") as fh:
            json.dump(doc, fh)
        assert main(["solve", path]) == 1

    def test_parse_error_position(self, tmpfile, capsys):
        path = tmpfile("bad.json")
        with open(path, "w") as fh:
            fh.write('{"name": "x",\n  "n": ???}')
        assert main(["solve", path]) == 1
        err = capsys.readouterr().err
        assert "line 2" in err and "column" in err


class TestSolveCommand:
    def test_raw_problem_exits_2_or_warns(self, tmpfile, capsys):
        path = tmpfile("p1raw.json")
        write_builtin("problem1-raw", path)
        code = main(["solve", path])
        out = capsys.readouterr().out
        assert code in (0, 2)
        # whichever way it fails, the report must carry the warning and the
        # facial-module recommendation
        assert "no strict-feasibility warning" not in out
        assert "strict-feasibility warning" in out
        assert "facial" in out

    def test_simplified_problem_exits_0(self, tmpfile, capsys):
        path = tmpfile("p1s.json")
        write_builtin("problem1-simplified", path)
        assert main(["solve", path]) == 0
        out = capsys.readouterr().out
        assert "no strict-feasibility warning" in out

    def test_json_report(self, tmpfile, capsys):
        path = tmpfile("p2s.json")
        write_builtin("problem2-simplified", path)
        report_path = tmpfile("report.json")
        assert main(["solve", path, "--json", "--out", report_path]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["command"] == "solve"
        assert doc["solver"]["status"] == "Optimal"
        assert abs(doc["solver"]["objective_dual"] - 0.1803398875) < 1e-6
        on_disk = json.load(open(report_path))
        assert on_disk["solver"]["status"] == "Optimal"


class TestDiagnoseCommand:
    def test_problem2_prints_three_null_vectors(self, tmpfile, capsys):
        path = tmpfile("p2raw.json")
        write_builtin("problem2-raw", path)
        assert main(["diagnose", path]) == 0
        out = capsys.readouterr().out
        assert out.count("(") >= 3
        assert "rank 3" in out

    def test_problem1_prints_two_null_vectors(self, tmpfile, capsys):
        path = tmpfile("p1raw.json")
        write_builtin("problem1-raw", path)
        assert main(["diagnose", path]) == 0
        assert "rank 2" in capsys.readouterr().out

    def test_strictly_feasible_sample(self, tmpfile, capsys):
        rng = np.random.default_rng(77)
        prob, _, _ = random_certified_sdp(rng, 3, 2)
        path = tmpfile("strictly-feasible-sample.json")
        store_problem(prob, path)
        assert main(["diagnose", path]) == 0
        assert "StrictlyFeasible" in capsys.readouterr().out


class TestReduceCommand:
    def test_problem1_reduction_file(self, tmpfile, capsys):
        src = tmpfile("p1raw.json")
        dst = tmpfile("p1red.json")
        write_builtin("problem1-raw", src)
        assert main(["reduce", src, "--out", dst]) == 0
        out = capsys.readouterr().out
        assert "eliminated variables:" in out
        reduced = load_problem(dst)
        golden = BUILTINS["problem1-simplified"]()
        assert problem_to_json_str(reduced) == problem_to_json_str(
            golden.__class__(
                pencil=golden.pencil,
                objective=golden.objective,
                name=reduced.name,
            )
        )

    def test_problem2_reduction_single_variable(self, tmpfile):
        src = tmpfile("p2raw.json")
        dst = tmpfile("p2red.json")
        write_builtin("problem2-raw", src)
        assert main(["reduce", src, "--out", dst]) == 0
        assert load_problem(dst).var_names == ("mu",)

    def test_already_reduced_unchanged(self, tmpfile, capsys):
        src = tmpfile("p2s.json")
        dst = tmpfile("p2s-red.json")
        write_builtin("problem2-simplified", src)
        assert main(["reduce", src, "--out", dst]) == 0
        out = capsys.readouterr().out
        assert "no substitutions" in out or "strictly feasible" in out
        assert open(src).read() == open(dst).read()


class TestReproduceCommand:
    def test_problem1(self, capsys):
        assert main(["reproduce", "problem1"]) == 0
        out = capsys.readouterr().out
        assert "[FAIL]" not in out
        assert "all checks passed" in out

    def test_report_deterministic(self, tmpfile, capsys):
        r1, r2 = tmpfile("r1.json"), tmpfile("r2.json")
        assert main(["reproduce", "chsh-toy", "--out", r1]) == 0
        assert main(["reproduce", "chsh-toy", "--out", r2]) == 0
        capsys.readouterr()
        d1, d2 = json.load(open(r1)), json.load(open(r2))
        d1.pop("timings"), d2.pop("timings")
        assert d1 == d2


class TestExportCommand:
    def test_export_stdout(self, capsys):
        assert main(["export", "chsh-toy"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["n"] == 5
        assert len(doc["vars"]) == 8
