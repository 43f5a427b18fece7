import csv
import io
import json
import subprocess
import sys

import pytest

from rangeassign.cli import SWEEP_COLUMNS, main
from rangeassign.core import ArrivalInstance


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def summary(out):
    return dict(line[2:].split(": ", 1) for line in out.splitlines() if line.startswith("# "))


@pytest.fixture
def two_points(tmp_path):
    path = tmp_path / "two.json"
    ArrivalInstance.line([0, 2]).save(path)
    return str(path)


@pytest.fixture
def nn_lb(tmp_path, capsys):
    path = tmp_path / "lb.json"
    assert main(["generate", "nn-lb-1d", "--delta", "0.01", "--x", "1", "--out", str(path)]) == 0
    return str(path)


def test_generate_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        assert main(["generate", "random", "--seed", "5", "--n", "12", "--space", "plane", "--out", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()
    code, out, _ = run(capsys, "generate", "random", "--seed", "6", "--n", "12")
    assert code == 0 and out.encode() != a.read_bytes()


@pytest.mark.parametrize(
    "argv,n",
    [
        (["nn-lb-2d", "--epsilon", "0.001"], 19),
        (["recursive-squares", "--rounds", "3"], 85),
        (["universal-1d", "--x", "10", "--branch", "F2"], 4),
        (["random", "--space", "metric", "--n", "7"], 7),
    ],
)
def test_generate_counts(capsys, argv, n):
    code, out, _ = run(capsys, "generate", *argv)
    assert code == 0
    assert ArrivalInstance.loads(out).n == n


def test_generate_bad_parameter(capsys):
    code, _, err = run(capsys, "generate", "recursive-squares", "--rounds", "9")
    assert code == 1 and "rounds" in err


def test_simulate_nn(capsys, nn_lb):
    code, out, _ = run(capsys, "simulate", nn_lb, "--strategy", "nn")
    assert code == 0
    info = summary(out)
    assert float(info["total_cost"]) == pytest.approx(1.9801, abs=1e-9)
    assert info["invariants"] == "ok"
    rows = list(csv.reader(io.StringIO("".join(l + "\n" for l in out.splitlines() if not l.startswith("#")))))
    assert len(rows) == 4


def test_simulate_knn_alias(capsys, nn_lb):
    _, a, _ = run(capsys, "simulate", nn_lb, "--strategy", "knn", "--k", "2")
    _, b, _ = run(capsys, "simulate", nn_lb, "--strategy", "2nn")
    assert a == b


def test_simulate_dual_reports_sum_y(capsys, two_points, tmp_path):
    out_csv = tmp_path / "steps.csv"
    code, out, _ = run(capsys, "simulate", two_points, "--strategy", "dual", "--gamma", "4", "--out", str(out_csv))
    assert code == 0
    assert float(summary(out)["sum_y"]) == 4.0
    assert out_csv.read_text().startswith("j,action")


def test_simulate_bad_gamma(capsys, two_points):
    code, _, _ = run(capsys, "simulate", two_points, "--strategy", "dual", "--gamma", "0.5")
    assert code == 1


def test_oracle_exact_and_approx(capsys, two_points):
    code, out, _ = run(capsys, "oracle", two_points)
    assert code == 0 and json.loads(out)["cost"] == 4.0
    code, out, _ = run(capsys, "oracle", two_points, "--approx")
    report = json.loads(out)
    assert code == 0
    assert report["cost"] == 100.0 and report["certificate"] == "ok"


def test_oracle_size_limit(capsys, tmp_path):
    path = tmp_path / "big.json"
    assert main(["generate", "random", "--n", "25", "--out", str(path)]) == 0
    code, _, err = run(capsys, "oracle", str(path))
    assert code == 3 and "too large" in err
    code, _, _ = run(capsys, "oracle", str(path), "--approx")
    assert code == 0


def test_missing_file_is_usage_error(capsys, tmp_path):
    code, _, err = run(capsys, "oracle", str(tmp_path / "nope.json"))
    assert code == 1 and "no such" in err


def test_unknown_option_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["simulate", "x.json", "--strategy", "greedy"])
    assert exc.value.code == 1


def test_bounds(capsys):
    code, out, _ = run(capsys, "bounds", "--alpha", "2")
    report = json.loads(out)
    assert code == 0 and report["c"] == pytest.approx(1.5763788, abs=1e-6)
    _, out, _ = run(capsys, "bounds", "--fstar", "--alpha", "3")
    assert json.loads(out)["f_star"] == 15
    _, out, _ = run(capsys, "bounds", "--alpha-star")
    assert json.loads(out)["alpha_star"] == pytest.approx(4.3, abs=0.05)
    code, _, _ = run(capsys, "bounds", "--fstar", "--alpha", "2")
    assert code == 1


def test_export_lp(capsys, nn_lb, tmp_path):
    code, out, _ = run(capsys, "export-lp", nn_lb)
    assert code == 0 and out.startswith("\\") and "Minimize" in out and out.rstrip().endswith("End")
    dest = tmp_path / "dual.lp"
    assert main(["export-lp", nn_lb, "--form", "dual", "--out", str(dest)]) == 0
    assert "Maximize" in dest.read_text()


def _sweep_rows(text):
    rows = list(csv.DictReader(io.StringIO(text)))
    for r in rows:
        r.pop("wall_time_s_nondeterministic")
    return rows


def test_sweep_reproducible(tmp_path, capsys):
    spec = {
        "instances": [
            {"generator": "nn-lb-1d", "params": {"delta": [0.01, 0.1], "x": 1}},
            {"random": {"seed": 3, "space": "line", "n": 6, "count": 2}},
            {"random": {"seed": 1, "space": "plane", "n": 22, "count": 1}},
        ],
        "strategies": ["nn", "ci", {"kind": "knn", "k": 2}, {"kind": "dual", "gamma": 4}],
        "alphas": [2, 3],
    }
    path = tmp_path / "sweep.json"
    path.write_text(json.dumps(spec))
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["sweep", str(path), "--out", str(a)]) == 0
    assert main(["sweep", str(path), "--out", str(b)]) == 0
    assert a.read_text().splitlines()[0].split(",") == list(SWEEP_COLUMNS)
    ra, rb = _sweep_rows(a.read_text()), _sweep_rows(b.read_text())
    assert ra == rb and len(ra) == 5 * 2 * 4
    big = [r for r in ra if r["n"] == "22"]
    assert big and all(r["status"].startswith("error:") and r["cost"] for r in big)
    small = [r for r in ra if r["n"] != "22"]
    assert all(r["status"] == "ok" and float(r["ratio"]) >= 1 - 1e-9 for r in small)


def test_sweep_without_strategies(tmp_path, capsys):
    path = tmp_path / "sweep.json"
    path.write_text(json.dumps({"instances": [{"generator": "nn-lb-2d"}], "strategies": []}))
    code, _, err = run(capsys, "sweep", str(path))
    assert code == 1 and "strategy" in err


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "rangeassign", "bounds", "--fstar", "--alpha", "4"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0 and json.loads(proc.stdout)["f_star"] == 13
