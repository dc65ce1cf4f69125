import csv
import json
import math

import pytest
from pytest import fixture, mark
from click.testing import CliRunner

from ..cli import cli
from ..info import VERSION
from ..regions import RateRegion


FAST_CONF = """
[solver]
restarts = 2
max_iter = 20000
tol = 1e-10
threads = 1

[regions]
lambda_count = 5
"""


H_075 = -(0.75 * math.log2(0.75) + 0.25 * math.log2(0.25))


@fixture
def run_cli(make_config_file, tmp_path):
    """Invoke the CLI with a fast config, writing the report to a temp file"""
    config_path = make_config_file(FAST_CONF)

    def _run(*args, expect_code=0, parse=True):
        out_path = tmp_path / "report.out"
        if out_path.exists():
            out_path.unlink()
        full_args = ["--config", config_path, "--quiet"] + list(args)
        if parse:
            full_args += ["-o", str(out_path)]
        print(full_args)
        result = CliRunner().invoke(cli, full_args)
        print(result.output)
        assert result.exit_code == expect_code
        if parse and expect_code == 0:
            text = out_path.read_text()
            return json.loads(text) if text.lstrip().startswith(("{", "[")) else text
        return result

    return _run


def test_version(run_cli):
    result = run_cli("version", parse=False)
    assert result.output == f"{VERSION}\n"


def test_conf_show_default(run_cli):
    result = run_cli("conf", "--show-default", parse=False)
    assert "#[solver]" in result.output
    assert "vertex_cap = 64" in result.output


def test_fixture_round_trip(run_cli, tmp_path):
    doc = run_cli("fixture", "ex2:0.75")
    problem_path = tmp_path / "ex2.json"
    problem_path.write_text(json.dumps(doc))
    summary = run_cli("validate", "--problem", str(problem_path))
    assert summary["problem"] == str(problem_path)
    assert summary["alphabets"]["X"] == ["0", "1"]
    assert summary["reduction_hypotheses"]["full_support"]
    assert not summary["cond_independent"]


def test_validate_fixture(run_cli):
    summary = run_cli("validate", "--fixture", "ex4")
    assert summary["problem"] == "fixture:ex4"
    assert summary["reduction_hypotheses"] == {
        "full_support": True,
        "complete_graph": True,
        "cond_independent": False,
    }


def test_validate_errors(run_cli, tmp_path):
    bad_path = tmp_path / "bad.json"
    bad_path.write_text("{ not json")
    result = run_cli("validate", "--problem", str(bad_path), expect_code=1, parse=False)
    assert "SchemaError" in result.output
    result = run_cli("validate", "--fixture", "ex9", expect_code=1, parse=False)
    assert "SchemaError" in result.output
    # Both or neither of --problem/--fixture is a usage error
    run_cli("validate", expect_code=2, parse=False)


def test_graph(run_cli):
    report = run_cli("graph", "--fixture", "ex4", "--target", "Y", "--given", "X,Z")
    assert report["config"]["command"] == "graph"
    assert report["result"]["edges"] == [["0", "1"], ["1", "2"]]
    assert report["result"]["provenance"] == "G_{Y|X,Z}"
    report = run_cli("graph", "--fixture", "ex2:0.75", "--target", "XY")
    assert report["result"]["provenance"] == "G_{X,Y|Z}"
    assert len(report["result"]["edges"]) == 4


def test_graph_reduction(run_cli):
    report = run_cli("graph", "--fixture", "ex1", "--reduction")
    entries = report["result"]["entries"]
    assert not all(e["equal"] for e in entries)
    assert report["result"]["missing_edges"] == []
    assert not report["result"]["hypotheses"]["full_support"]


def test_graph_vertex_cap(run_cli):
    result = run_cli(
        "graph", "--fixture", "ex1", "--vertex-cap", "3", expect_code=2, parse=False
    )
    assert "SizeError" in result.output


def test_sets(run_cli):
    report = run_cli("sets", "--fixture", "ex1")
    assert report["result"]["family"] == ["{1,2}", "{2,3}", "{3,4}"]
    assert report["config"]["mode"] == "maximal"
    report = run_cli("sets", "--fixture", "ex1", "--all")
    assert len(report["result"]["family"]) == 7
    report = run_cli(
        "sets", "--fixture", "ex4", "--target", "Y", "--given", "X,Z",
        "--multisets", "4", "--dominated",
    )
    assert report["result"]["multisets"] == [["{1}", "{0,2}", "{0,2}", "{0,2}"]]
    assert report["config"]["settings"]["sets"]["dominated_pruning"]


def test_entropy(run_cli):
    report = run_cli("entropy", "--fixture", "ex3")
    solve = report["result"]["solve"]
    assert solve["value"] == pytest.approx(math.log2(3), abs=1e-4)
    assert report["config"]["problem"] == "fixture:ex3"


def test_entropy_oracle(run_cli):
    report = run_cli("entropy", "--fixture", "ex2:0.75", "--oracle", "20")
    solve = report["result"]["solve"]
    oracle = report["result"]["oracle"]
    assert solve["value"] <= oracle["value"] + 1e-6
    assert oracle["value"] - solve["value"] <= oracle["gap"] + 1e-9


def _region(report):
    return RateRegion.from_json_dict(report["result"])


def test_region_closed_forms(run_cli):
    sw = _region(run_cli("region", "--fixture", "ex2:0.75", "--sw"))
    assert sw.triples[0].a == pytest.approx(H_075)
    assert sw.triples[0].s == pytest.approx(1.0 + H_075)
    km = _region(run_cli("region", "--fixture", "ex2:0.75", "--km"))
    assert km.triples[0].s == pytest.approx(2 * H_075)


def test_region_needs_selector(run_cli):
    run_cli("region", "--fixture", "ex2:0.75", expect_code=2, parse=False)


def test_region_hypothesis_error(run_cli):
    result = run_cli(
        "region", "--fixture", "ex2:0.75", "--independent", expect_code=1, parse=False
    )
    assert "HypothesisError" in result.output


def test_region_csv(run_cli):
    text = run_cli("region", "--fixture", "ex2:0.75", "--km", "--out-format", "csv")
    rows = list(csv.reader(text.splitlines()))
    assert rows[0] == ["lambda", "R_X", "R_Y", "mode", "candidate_id"]
    assert len(rows) == 3
    assert all(row[3] == "korner-marton" for row in rows[1:])
    for row in rows[1:]:
        assert row[0] == ""
        assert float(row[1]) == pytest.approx(H_075)
        assert float(row[2]) == pytest.approx(H_075)
    # Only regions have a CSV form
    run_cli("entropy", "--fixture", "ex3", "--out-format", "csv", expect_code=2, parse=False)


def test_inner_sweep(run_cli):
    report = run_cli(
        "inner", "--fixture", "ex2:0.75", "--lambdas", "0.5,1,2", "--no-progress"
    )
    region = _region(report)
    assert report["config"]["lambdas"] == [0.5, 1.0, 2.0]
    assert report["config"]["restarts"] is None
    assert report["config"]["settings"]["solver"]["restarts"] == 2
    assert {e.lam for e in region.entries} == {0.5, 1.0, 2.0}
    # Every achievable pair is outside the Korner-Marton bound
    km = _region(run_cli("region", "--fixture", "ex2:0.75", "--km"))
    for triple in region.triples:
        assert triple.s >= km.triples[0].s - 1e-6


def test_compare(run_cli, tmp_path):
    paths = {}
    for name in ("sw", "km"):
        report = run_cli("region", "--fixture", "ex2:0.75", f"--{name}")
        paths[name] = tmp_path / f"{name}.json"
        paths[name].write_text(json.dumps(report))
    report = run_cli("compare", str(paths["sw"]), str(paths["km"]))
    res = report["result"]
    assert res["a_in_b"]
    assert not res["b_in_a"]
    assert res["max_gap"] == pytest.approx((1.0 - H_075) / math.sqrt(2), abs=1e-9)
    # Selectors need a problem to evaluate
    run_cli("compare", "outer", "km", expect_code=2, parse=False)
    report = run_cli("compare", "outer", str(paths["km"]), "--fixture", "ex2:0.75")
    assert report["result"]["a_in_b"] and report["result"]["b_in_a"]


def test_laws(run_cli):
    report = run_cli("laws", "--fixture", "ex4", "--seeds", "4", "--seed", "1")
    assert report["result"]["passed"]
    assert report["config"]["seed"] == 1


def test_bad_selector_and_cardinality(run_cli):
    result = run_cli(
        "compare", "partial:Q", "sw", "--fixture", "ex4", expect_code=2, parse=False
    )
    assert "partial" in result.output
    assert "KeyError" not in result.output
    result = run_cli(
        "sets", "--fixture", "ex4", "--multisets", "0", expect_code=1, parse=False
    )
    assert "ValidationError" in result.output


def test_outer_options(run_cli):
    report = run_cli("outer", "--fixture", "ex3", "--restarts", "3", "--seed", "5")
    assert report["result"]["meta"]["restarts"] == 3
    assert report["config"]["restarts"] == 3
    assert report["config"]["lambdas"] is None
    # The outer bound has no sweep to configure
    run_cli("outer", "--fixture", "ex3", "--lambdas", "1", expect_code=2, parse=False)


@mark.slow
def test_partial_matches_slepian_wolf(run_cli):
    report = run_cli("compare", "partial:Y", "sw", "--fixture", "inv")
    assert report["result"]["a_in_b"] and report["result"]["b_in_a"]


def test_bad_config(make_config_file):
    config_path = make_config_file("[solver]\nwarp_factor = 9\n")
    result = CliRunner().invoke(cli, ["--config", config_path, "version"])
    assert result.exit_code == 1
