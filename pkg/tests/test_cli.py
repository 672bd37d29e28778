import csv
import json
import math

import pytest

from riemsecant.cli import BENCH_COLUMNS, cmd_bench, main
from riemsecant.config import load_run_config, parse_run_config
from riemsecant.errors import InvalidConfig
from riemsecant.serialization import read_trace


def write_config(tmp_path, name="run.json", **data):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


SQRT2 = {"problem": "euclid-sqrt2", "initial_points": [[1.0], [2.0]]}


# --- config parsing ---------------------------------------------------------

def test_parse_defaults():
    cfg = parse_run_config({"problem": "euclid-2d"})
    assert cfg.initial_points is None
    assert cfg.solver.quad_nodes == 8
    assert cfg.seed == 0


@pytest.mark.parametrize(
    "data, field",
    [
        ({}, "problem"),
        ({"problem": "euclid-sqrt2", "bogus": 1}, "bogus"),
        ({"problem": "euclid-sqrt2", "solver": {"max_iters": 0}}, "max_iters"),
        ({"problem": "euclid-sqrt2", "initial_points": [[1.0]]}, "initial_points"),
        ({"problem": "euclid-sqrt2", "omega": {"family": "cubic"}}, "omega"),
    ],
)
def test_parse_errors_name_the_field(data, field):
    with pytest.raises(InvalidConfig, match=field):
        parse_run_config(data)


def test_load_config_errors(tmp_path):
    with pytest.raises(InvalidConfig):
        load_run_config(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(InvalidConfig):
        load_run_config(bad)


def test_sphere_start_is_renormalized(tmp_path, capsys):
    path = write_config(tmp_path, problem="sphere-rayleigh", initial_points=[[2, 0.2, 0], [1, 0, 0.1]])
    assert main(["solve", "--config", path]) == 0
    assert "renormalized" in capsys.readouterr().out


# --- solve ------------------------------------------------------------------

def test_solve_sqrt2(tmp_path):
    out = tmp_path / "trace.json"
    assert main(["solve", "--config", write_config(tmp_path, **SQRT2), "--out", str(out)]) == 0
    trace, name = read_trace(out)
    assert name == "euclid-sqrt2"
    assert abs(trace.final.coords[0] - math.sqrt(2)) <= 1e-10


def test_solve_coincident_points(tmp_path, capsys):
    path = write_config(tmp_path, problem="euclid-sqrt2", initial_points=[[1.0], [1.0]])
    assert main(["solve", "--config", path]) == 1
    assert "initial points coincide" in capsys.readouterr().err


def test_solve_budget_exhausted(tmp_path):
    path = write_config(tmp_path, problem="euclid-2d", solver={"max_iters": 1})
    assert main(["solve", "--config", path]) == 2


def test_solve_breakdown(tmp_path):
    path = write_config(tmp_path, problem="euclid-sqrt2", initial_points=[[-1.0], [1.0]])
    assert main(["solve", "--config", path]) == 3


def test_solve_unknown_problem(tmp_path, capsys):
    assert main(["solve", "--config", write_config(tmp_path, problem="nope")]) == 1
    assert "nope" in capsys.readouterr().err


def test_solve_unwritable_output(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    out = blocker / "sub" / "trace.json"
    assert main(["solve", "--config", write_config(tmp_path, **SQRT2), "--out", str(out)]) == 1


# --- certify ------------------------------------------------------------------

def test_certify_zero_omega(tmp_path, capsys):
    path = write_config(tmp_path, problem="euclid-affine", omega={"K": 0.0}, domain_radius=2.0)
    assert main(["certify", "--config", path]) == 0
    report = json.loads(capsys.readouterr().out.split("\n", 1)[1])
    assert report["R"] == report["eta"]
    assert report["certified"] is True


def test_certify_sqrt2_values(tmp_path, capsys):
    path = write_config(tmp_path, **SQRT2, omega={"K": 1.0})
    assert main(["certify", "--config", path]) == 4
    report = json.loads(capsys.readouterr().out.split("\n", 1)[1])
    assert report["alpha"] == 1.0
    assert report["beta"] == pytest.approx(1 / 3)
    assert report["eta"] == pytest.approx(2 / 3)


def test_certify_huge_K(tmp_path, capsys):
    path = write_config(tmp_path, problem="euclid-sqrt2", initial_points=[[1.41], [1.42]], omega={"K": 1e6})
    assert main(["certify", "--config", path]) == 4
    report = json.loads(capsys.readouterr().out.split("\n", 1)[1])
    assert not (report["checks"]["root_exists"] and report["checks"]["c_lt_1"])


def test_certify_estimated_K_is_flagged(tmp_path, capsys):
    path = write_config(
        tmp_path, problem="euclid-sqrt2", initial_points=[[1.41], [1.42]],
        omega={"samples": 20}, domain_radius=0.5,
    )
    assert main(["certify", "--config", path]) == 0
    out = capsys.readouterr().out
    assert out.startswith("empirical certificate")
    assert json.loads(out.split("\n", 1)[1])["empirical"] is True


# --- order --------------------------------------------------------------------

def test_order_sqrt2(tmp_path):
    out = tmp_path / "order.json"
    assert main(["order", "--config", write_config(tmp_path, **SQRT2), "--out", str(out)]) == 0
    assert 1.5 <= json.loads(out.read_text())["order"] <= 1.75


def test_order_affine_has_too_few_points(tmp_path):
    assert main(["order", "--config", write_config(tmp_path, problem="euclid-affine")]) == 5


def test_order_sphere(tmp_path):
    out = tmp_path / "order.json"
    assert main(["order", "--config", write_config(tmp_path, problem="sphere-rayleigh"), "--out", str(out)]) == 0
    assert json.loads(out.read_text())["order"] >= 1.0


@pytest.mark.parametrize("fmt", ["json", "csv"])
def test_order_from_saved_trace_matches(tmp_path, fmt):
    cfg = write_config(tmp_path, problem="euclid-2d")
    trace_file = tmp_path / f"trace.{fmt}"
    assert main(["solve", "--config", cfg, "--out", str(trace_file), "--format", fmt]) == 0
    direct, replay = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["order", "--config", cfg, "--out", str(direct)]) == 0
    assert main(["order", "--config", cfg, "--trace", str(trace_file), "--out", str(replay)]) == 0
    assert direct.read_text() == replay.read_text()


def test_order_missing_trace(tmp_path):
    cfg = write_config(tmp_path, problem="euclid-2d")
    assert main(["order", "--config", cfg, "--trace", str(tmp_path / "none.json")]) == 1


# --- bench --------------------------------------------------------------------

def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_bench_default_suite(tmp_path):
    assert main(["bench", "--out", str(tmp_path)]) == 0
    rows = read_rows(tmp_path / "results.csv")
    assert [r["problem"] for r in rows] == ["euclid-sqrt2", "euclid-2d", "sphere-rayleigh", "spd-karcher"]
    assert all(r["termination"] in ("ResidualMet", "StepMet") for r in rows)
    assert all(r["status"] == "ok" for r in rows)
    assert len(list((tmp_path / "traces").iterdir())) == 4
    assert len(read_rows(tmp_path / "timings.csv")) == 4


def test_bench_empty_suite(tmp_path):
    suite = tmp_path / "suite.json"
    suite.write_text("[]")
    assert cmd_bench(str(suite), str(tmp_path / "out")) == 0
    assert (tmp_path / "out" / "results.csv").read_text() == ",".join(BENCH_COLUMNS) + "\n"


def test_bench_bad_entry(tmp_path):
    suite = tmp_path / "suite.json"
    suite.write_text(json.dumps({"entries": [SQRT2 | {"omega": {"K": 1.0}}, {"problem": "no-such"}]}))
    assert main(["bench", "--suite", str(suite), "--out", str(tmp_path / "out")]) == 6
    rows = read_rows(tmp_path / "out" / "results.csv")
    assert [r["status"] for r in rows] == ["ok", "error"]
    assert "no-such" in rows[1]["error"]


def test_bench_parallel_matches_serial(tmp_path):
    suite = tmp_path / "suite.json"
    suite.write_text(json.dumps([SQRT2 | {"omega": {"K": 1.0}}, {"problem": "euclid-affine", "omega": {"K": 0.0}}]))
    assert cmd_bench(str(suite), str(tmp_path / "serial")) == 0
    assert cmd_bench(str(suite), str(tmp_path / "par"), jobs=2) == 0
    assert (tmp_path / "serial" / "results.csv").read_bytes() == (tmp_path / "par" / "results.csv").read_bytes()


def test_bench_missing_suite(tmp_path):
    assert cmd_bench(str(tmp_path / "none.json"), str(tmp_path)) == 1
