"""End-to-end tests of the fairwasp command-line tool."""
import json

import pandas as pd
import pytest

from fairwasp.commands import EXIT_ERROR, EXIT_INFEASIBLE, EXIT_OK, exit_code_for
from fairwasp.data.dataset import load_csv, marginal_y
from fairwasp.main import main
from fairwasp.reporting import RunManifest, manifest_path

DATA_ARGS = ["--d-col", "d", "--y-col", "y"]


@pytest.fixture(autouse=True)
def _workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)


def _synth(tmp_path, n=40, seed=1):
    path = tmp_path / f"synth_{n}_{seed}.csv"
    assert main(["synth", "--n", str(n), "--seed", str(seed), "--out", str(path)]) == EXIT_OK
    return path


def _verify_json(capsys, args):
    capsys.readouterr()
    assert main(["verify", *args, "--json"]) == EXIT_OK
    return json.loads(capsys.readouterr().out)


@pytest.mark.parametrize("status, code", [
    ("converged", 0), ("converged-with-ties", 0), ("infeasible", 2),
    ("numerical-failure", 3), ("iteration-limit", 4), ("unknown", 1),
])
def test_exit_codes(status, code):
    assert exit_code_for(status) == code


def test_synth_is_deterministic(tmp_path):
    a = _synth(tmp_path, 50, 3)
    b = tmp_path / "again.csv"
    assert main(["synth", "--n", "50", "--seed", "3", "--out", str(b)]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()
    frame = pd.read_csv(a)
    assert list(frame.columns) == ["x1", "x2", "d", "y"]
    assert len(frame) == 50


def test_solve_writes_weights_and_manifest(tmp_path, capsys):
    data = _synth(tmp_path)
    out = tmp_path / "weights.csv"
    code = main(["solve", "--input", str(data), *DATA_ARGS, "--epsilon", "0.05", "--out", str(out)])
    assert code == EXIT_OK
    assert capsys.readouterr().out.startswith("status=converged")

    weights = pd.read_csv(out)
    assert list(weights.columns) == ["index", "weight"]
    assert int(weights["weight"].sum()) == 40
    assert (weights["weight"] >= 0).all()

    manifest = RunManifest.model_validate_json(manifest_path(out).read_text())
    assert manifest.command == "solve"
    assert manifest.n == 40
    assert manifest.after.violation <= 1e-6
    assert manifest.config["epsilon"] == 0.05


def test_solve_is_deterministic(tmp_path):
    data = _synth(tmp_path)
    outputs = []
    for name in ("a.csv", "b.csv"):
        out = tmp_path / name
        assert main(["--threads", "2", "solve", "--input", str(data), *DATA_ARGS, "--out", str(out)]) == EXIT_OK
        manifest = RunManifest.model_validate_json(manifest_path(out).read_text())
        outputs.append((out.read_bytes(), manifest.to_json(include_timings=False)))
    assert outputs[0] == outputs[1]


@pytest.mark.parametrize("n", [40, 60])
@pytest.mark.parametrize("seed", [1, 2, 3])
def test_solve_synthetic_converges(tmp_path, n, seed):
    data = _synth(tmp_path, n=n, seed=seed)
    out = tmp_path / "weights.csv"
    code = main(["solve", "--input", str(data), *DATA_ARGS, "--epsilon", "0.05", "--out", str(out)])
    assert code == EXIT_OK
    manifest = RunManifest.model_validate_json(manifest_path(out).read_text())
    assert manifest.after.violation <= 1e-6
    assert int(pd.read_csv(out)["weight"].sum()) == n


def test_solve_infeasible(tmp_path, toy2_csv, capsys):
    out = tmp_path / "weights.csv"
    code = main(["solve", "--input", str(toy2_csv), *DATA_ARGS, "--epsilon", "0", "--out", str(out)])
    assert code == EXIT_INFEASIBLE
    assert not out.exists()
    manifest = RunManifest.model_validate_json(manifest_path(out).read_text())
    assert manifest.status == "infeasible"
    assert manifest.after is None


def test_solve_json_report(tmp_path, toy4_csv, capsys):
    out = tmp_path / "weights.csv"
    assert main(["solve", "--input", str(toy4_csv), *DATA_ARGS, "--out", str(out), "--json"]) == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert report["status"] in ("converged", "converged-with-ties")
    assert report["best_primal"] == pytest.approx(0.0, abs=1e-9)
    assert out.read_text() == "index,weight\n0,1\n1,1\n2,1\n3,1\n"


def test_verify_fair_toy(toy4_csv, capsys):
    assert main(["verify", "--input", str(toy4_csv), *DATA_ARGS]) == EXIT_OK
    text = capsys.readouterr().out
    assert "violation: 0\n" in text
    assert "demographic disparity: 0\n" in text


def test_verify_all_rows(toy4_csv, capsys):
    compact = _verify_json(capsys, ["--input", str(toy4_csv), *DATA_ARGS])
    full = _verify_json(capsys, ["--input", str(toy4_csv), *DATA_ARGS, "--all-rows"])
    # |D| = 2 at the default epsilon: four rows per class in full, three once the implied y = 1 upper row goes
    assert len(full["margins"]) == 8
    assert len(compact["margins"]) == 6


def test_verify_rejects_bad_target(toy4_csv):
    assert main(["verify", "--input", str(toy4_csv), *DATA_ARGS, "--target", "0.5"]) == EXIT_ERROR


def test_materialize_round_trip(tmp_path, capsys):
    data = _synth(tmp_path, 60, 5)
    weights = tmp_path / "weights.csv"
    assert main(["solve", "--input", str(data), *DATA_ARGS, "--out", str(weights)]) == EXIT_OK
    out = tmp_path / "fair.csv"
    assert main(["materialize", "--input", str(data), *DATA_ARGS, "--weights", str(weights),
                 "--out", str(out)]) == EXIT_OK
    assert len(pd.read_csv(out)) == 60

    original = load_csv(data, "d", "y")
    p_y = dict(zip(original.y_values, marginal_y(original).probs))
    reloaded = load_csv(out, "d", "y")
    target = ",".join(repr(float(p_y[v])) for v in reloaded.y_values)

    weighted = _verify_json(capsys, ["--input", str(data), *DATA_ARGS, "--weights", str(weights)])
    unit = _verify_json(capsys, ["--input", str(out), *DATA_ARGS, "--target", target])
    assert unit["violation"] == pytest.approx(weighted["violation"], abs=1e-12)
    assert unit["violation"] <= 1e-6


def test_missing_column(toy4_csv, tmp_path):
    code = main(["solve", "--input", str(toy4_csv), "--d-col", "race", "--y-col", "y",
                 "--out", str(tmp_path / "w.csv")])
    assert code == EXIT_ERROR


def test_missing_input(tmp_path):
    code = main(["verify", "--input", str(tmp_path / "absent.csv"), *DATA_ARGS])
    assert code == EXIT_ERROR


def test_negative_epsilon(toy4_csv, tmp_path):
    code = main(["solve", "--input", str(toy4_csv), *DATA_ARGS, "--epsilon", "-0.1",
                 "--out", str(tmp_path / "w.csv")])
    assert code == EXIT_ERROR


def test_bench(tmp_path):
    out = tmp_path / "bench.csv"
    code = main(["bench", "--n-start", "40", "--n-end", "80", "--trials", "2", "--out", str(out)])
    assert code == EXIT_OK
    table = pd.read_csv(out)
    assert len(table) == 4
    assert sorted(table["n"].unique().tolist()) == [40, 80]
    assert (table["violation"] <= 1e-6).all()


def test_bench_rejects_bad_range():
    assert main(["bench", "--n-start", "80", "--n-end", "40"]) == EXIT_ERROR


def test_oracle_command(toy4_csv, capsys):
    assert main(["oracle", "--input", str(toy4_csv), *DATA_ARGS]) == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert payload["objective"] == 0.0
    assert payload["theta"] == [1, 1, 1, 1]


def test_oracle_infeasible(toy2_csv, capsys):
    assert main(["oracle", "--input", str(toy2_csv), *DATA_ARGS, "--epsilon", "0"]) == EXIT_INFEASIBLE


def test_solve_pw_command(tmp_path, toy4_csv, capsys):
    out = tmp_path / "pw.csv"
    code = main(["solve-pw", "--input", str(toy4_csv), *DATA_ARGS, "--epsilon", "0.2",
                 "--nm-max-evals", "10", "--restarts", "0", "--out", str(out)])
    assert code == EXIT_OK
    assert out.read_text() == "index,weight\n0,1\n1,1\n2,1\n3,1\n"
    assert manifest_path(out).exists()


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert "fairwasp" in capsys.readouterr().out
