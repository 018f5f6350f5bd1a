import json
from pathlib import Path

import pytest

from rcar.cli import main, parse_grid
from rcar.model import ModelParams, fig1_params

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def run(args, tmp_path, name="out"):
    out = tmp_path / name
    return main(args + ["--out", str(out)]), out


def write_config(tmp_path, params, name="cfg.json"):
    path = tmp_path / name
    path.write_text(params.to_json())
    return str(path)


def manifest(out):
    return json.loads((out / "manifest.json").read_text())


def test_parse_grid():
    grid = parse_grid("-0.5:0.5:0.05")
    assert len(grid) == 21 and grid[0] == -0.5 and grid[-1] == 0.5 and 0.0 in grid
    assert parse_grid("0:1:0.3") == [0.0, 0.3, 0.6, 0.9]


def test_theta_star_alpha_zero_returns_theta(tmp_path, capsys):
    code, out = run(["theta-star", "--config", str(CONFIGS / "fig1_alpha0.json")], tmp_path)
    assert code == 0
    doc = json.loads((out / "theta_star.json").read_text())
    assert doc["theta_star"] == [0.3, 0.0]
    assert json.loads(capsys.readouterr().out)["theta_star"] == [0.3, 0.0]


def test_theta_star_fig1(tmp_path):
    code, out = run(["theta-star", "--config", str(CONFIGS / "fig1.json")], tmp_path)
    assert code == 0
    doc = json.loads((out / "theta_star.json").read_text())
    assert doc["theta_star"] == pytest.approx([0.3231443600, 0.0521098773], abs=1e-9)
    assert doc["flags"] == []


def test_simulate_is_byte_identical(tmp_path):
    args = ["simulate", "--config", str(CONFIGS / "fig1.json"), "--n", "500", "--seed", "7"]
    _, a = run(args, tmp_path, "a")
    _, b = run(args, tmp_path, "b")
    text = (a / "trajectory.csv").read_bytes()
    assert text == (b / "trajectory.csv").read_bytes()
    assert len(text.splitlines()) == 503


def test_estimate_round_trip(tmp_path):
    _, sim = run(["simulate", "--config", str(CONFIGS / "fig1.json"), "--n", "800"], tmp_path, "sim")
    code, out = run(["estimate", "--input", str(sim / "trajectory.csv"), "--order", "2"], tmp_path, "est")
    assert code == 0
    doc = json.loads((out / "estimate.json").read_text())
    assert len(doc["theta_hat"]) == 2 and len(doc["z1"]) == 2


def test_estimate_missing_order(tmp_path, capsys):
    _, sim = run(["simulate", "--config", str(CONFIGS / "fig1.json"), "--n", "50"], tmp_path, "sim")
    code, _ = run(["estimate", "--input", str(sim / "trajectory.csv")], tmp_path, "est")
    assert code == 2
    assert "order" in capsys.readouterr().err


def test_mc_dist_writes_csv_and_svg(tmp_path):
    code, out = run(
        ["mc-dist", "--config", str(CONFIGS / "fig1.json"), "--n", "200", "--reps", "50", "--svg"], tmp_path
    )
    assert code == 0
    assert len((out / "dist.csv").read_text().splitlines()) == 51
    assert (out / "dist.svg").read_text().startswith("<svg")
    roles = {o["role"] for o in manifest(out)["outputs"]}
    assert roles == {"distribution", "figure"}


@pytest.mark.slow
def test_mc_reject_full_grid(tmp_path):
    code, out = run(
        ["mc-reject", "--config", str(CONFIGS / "fig1.json"), "--alpha1-grid", "-0.5:0.5:0.05", "--reps", "2000", "--svg"],
        tmp_path,
    )
    assert code == 0
    rows = (out / "reject.csv").read_text().splitlines()[1:]
    assert len(rows) == 21
    for row in (rows[0], rows[-1]):
        _, r1, r2 = map(float, row.split(","))
        assert r1 > 0.15 and r2 > 0.15


def test_lil_subcommand(tmp_path):
    code, out = run(
        ["lil", "--config", str(CONFIGS / "fig1.json"), "--n", "20000", "--n-min", "1000", "--seeds", "2"], tmp_path
    )
    assert code == 0
    assert (out / "lil.csv").read_text().startswith("seed,n,functional")


def test_validate_fig1_exit_zero(tmp_path):
    code, out = run(["validate", "--config", str(CONFIGS / "fig1.json"), "--draws", "20000"], tmp_path)
    assert code == 0
    doc = json.loads((out / "validate.json").read_text())
    assert doc["flags"] == [] and doc["rho_A2"] < 1 and doc["log_norm_estimate"] < 0


def test_validate_explosive_exit_three(tmp_path, capsys):
    cfg = write_config(tmp_path, ModelParams.gaussian([1.1], [0.0], [0.0]))
    code, out = run(["validate", "--config", cfg, "--draws", "1000"], tmp_path)
    assert code == 3
    assert json.loads((out / "validate.json").read_text())["rho_A2"] == pytest.approx(1.21)
    assert "spectral radius" in capsys.readouterr().err


def test_validate_two_beta1_exit_three(tmp_path, capsys):
    cfg = write_config(tmp_path, fig1_params(alpha1=2.5))
    code, _ = run(["validate", "--config", cfg, "--draws", "1000"], tmp_path)
    assert code == 3
    assert "two_beta1_eq_one" in capsys.readouterr().err


def test_invalid_config_exit_two(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"theta": [0.3], "alpha": [0.1, 0.2], "eta": [{"variance": 0.1}]}))
    code, _ = run(["theta-star", "--config", str(path)], tmp_path)
    assert code == 2
    assert "field: alpha" in capsys.readouterr().err


def test_missing_config_exit_two(tmp_path):
    code, _ = run(["theta-star", "--config", str(tmp_path / "nope.json")], tmp_path)
    assert code == 2


def test_non_stationary_exit_three(tmp_path):
    cfg = write_config(tmp_path, ModelParams.gaussian([1.1], [0.0], [0.0]))
    code, _ = run(["theta-star", "--config", cfg], tmp_path)
    assert code == 3


def test_explosion_exit_four(tmp_path, capsys):
    cfg = write_config(tmp_path, ModelParams.gaussian([3.0], [0.0], [0.0]))
    code, _ = run(["simulate", "--config", cfg, "--n", "2000", "--burn-in", "0"], tmp_path)
    assert code == 4
    assert "exploded" in capsys.readouterr().err


def test_bad_thread_env(tmp_path, monkeypatch):
    monkeypatch.setenv("RCAR_THREADS", "many")
    code, _ = run(["theta-star", "--config", str(CONFIGS / "fig1.json")], tmp_path)
    assert code == 2


def test_manifest_contents(tmp_path):
    code, out = run(["simulate", "--config", str(CONFIGS / "fig1.json"), "--n", "20"], tmp_path)
    assert code == 0
    doc = manifest(out)
    assert set(doc) == {"config_digest", "tool_version", "command", "outputs", "wall_time"}
    assert len(doc["config_digest"]) == 64
    for entry in doc["outputs"]:
        assert Path(entry["path"]).stat().st_size > 0


def test_digest_tracks_resolved_config(tmp_path):
    base = ["simulate", "--config", str(CONFIGS / "fig1.json"), "--n", "20"]
    digests = {}
    for name, extra in {"a": [], "b": [], "seed": ["--seed", "1"], "threads": ["--threads", "3"]}.items():
        _, out = run(base + extra, tmp_path, name)
        digests[name] = manifest(out)["config_digest"]
    assert digests["a"] == digests["b"] == digests["threads"]
    assert digests["seed"] != digests["a"]
    _, out = run(["simulate", "--config", str(CONFIGS / "fig1_alpha0.json"), "--n", "20"], tmp_path, "other")
    assert manifest(out)["config_digest"] != digests["a"]
