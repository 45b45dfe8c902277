import json
import pathlib

import numpy as np
import pytest

import optrec

FIXTURES = pathlib.Path(__file__).resolve().parents[2] / "fixtures"


def load(name):
    return json.loads((FIXTURES / name).read_text())


def test_build_and_eval_e1():
    problem = load("e1_box.json")
    e_hat, estimator = optrec.build(problem, seed=3)
    assert e_hat == pytest.approx(1.0, abs=1e-6)
    assert estimator["metadata"]["problem_hash"] == optrec.problem_hash(problem)
    assert estimator["metadata"]["seed"] == 3
    assert optrec.eval_error(problem, estimator) == pytest.approx(e_hat, abs=1e-6)


def test_verify_report_passes_and_is_deterministic():
    problem = load("e1_box.json")
    _, estimator = optrec.build(problem)
    a = optrec.verify(problem, estimator, samples=20000, seed=7)
    b = optrec.verify(problem, estimator, samples=20000, seed=7)
    assert a["passed"]
    assert a == b


def test_compare_plugin():
    gap = optrec.compare_plugin(load("linf_plugin_gap.json"))
    assert gap["gap"] > 1e-3
    equal = optrec.compare_plugin(load("hilbert_plugin.json"))
    assert abs(equal["gap"]) <= 1e-5 * max(equal["e_opt"], 1.0)


def test_errors():
    with pytest.raises(ValueError):
        optrec.build(load("lth_zero.json"))
    with pytest.raises(optrec.ProgramFailure, match="direction"):
        optrec.build(load("halfspace.json"))


def test_hb_extension_check():
    r = optrec.hb_extension_check(np.array([[1.0, 0.0]]), np.array([[1.0, 0.0], [-1.0, 0.0]]), np.array([[0.0, 1.0]]))
    assert r["certified"]
    assert abs(r["c"][0]) <= 1e-9


def test_canonical_json_and_program_text():
    assert optrec.canonical_json({"b": 1, "a": [1, 2]}) == '{\n  "a": [1, 2],\n  "b": 1\n}\n'
    assert optrec.program_text(load("e1_box.json")).startswith("conic v1")
