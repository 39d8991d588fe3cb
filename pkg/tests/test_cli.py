import csv
import json
import math

import pytest

from qngcert.cli import RunConfig, _columns, main
from qngcert.errors import InvalidConfig

SMALL_GRID = {"n_phi": 41, "n_theta": 41, "refine_starts": 1}
QUICK_GAUSS = {
    "optimizer": {"restarts": 2, "max_evals": 1500},
    "escalation": {"start_cutoff": 4, "stop_cutoff": 6, "step": 2},
}


def write_config(tmp_path, data, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data), encoding="utf-8")
    return path


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


@pytest.fixture
def noon_sweep():
    return {
        "target": {"family": "noon_like", "theta": 0.0, "n": 1},
        "kind": "passive",
        "grid": SMALL_GRID,
        "sweep": {"parameter": "theta", "start": 0.0, "stop": math.pi / 2, "steps": 33},
    }


class TestThresholdCommand:
    def test_passive_csv_and_sidecar(self, tmp_path):
        cfg = write_config(tmp_path, {"target": {"family": "fock_pair", "theta": 0.5, "n": 1}, "kind": "passive",
                                      "grid": SMALL_GRID})
        out = tmp_path / "res.csv"
        assert main(["threshold", "--config", str(cfg), "--out", str(out), "--seed", "7"]) == 0
        rows = read_csv(out)
        assert rows[0] == ["threshold_passive"]
        assert 0 < float(rows[1][0]) < 1
        assert out.read_bytes().endswith(b"\r\n")
        meta = json.loads((tmp_path / "res.csv.meta.json").read_text())
        assert meta["seed"] == 7
        assert "wall_time_ms" in meta["rows"][0]
        assert meta["rows"][0]["passive"]["kind"] == "passive"

    def test_both_kinds(self, tmp_path):
        cfg = write_config(tmp_path, {"target": {"family": "fock_pair", "theta": 0.5, "n": 1}, "grid": SMALL_GRID,
                                      **QUICK_GAUSS})
        out = tmp_path / "both.csv"
        code = main(["threshold", "--config", str(cfg), "--out", str(out)])
        rows = read_csv(out)
        assert rows[0] == ["threshold_passive", "threshold_gaussian", "converged_gaussian"]
        assert rows[1][2] in ("true", "false")
        assert code == (0 if rows[1][2] == "true" else 2)
        assert float(rows[1][1]) >= float(rows[1][0]) - 1e-9

    def test_not_converged_exit_code(self, tmp_path):
        data = {"target": {"family": "fock_pair", "theta": 0.6, "n": 1}, "kind": "gaussian", **QUICK_GAUSS}
        data["escalation"] = {**data["escalation"], "tol": 1e-300}
        cfg = write_config(tmp_path, data)
        out = tmp_path / "nc.csv"
        assert main(["threshold", "--config", str(cfg), "--out", str(out)]) == 2
        assert read_csv(out)[1][1] == "false"

    def test_stdout_without_out(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"target": {"family": "noon_like", "theta": 0.3, "n": 1}, "kind": "passive",
                                      "grid": SMALL_GRID, "format": "json"})
        assert main(["threshold", "--config", str(cfg)]) == 0
        rows = json.loads(capsys.readouterr().out)
        assert set(rows[0]) == {"threshold_passive"}


class TestSweep:
    def test_theta_sweep(self, tmp_path, noon_sweep):
        cfg = write_config(tmp_path, noon_sweep)
        out = tmp_path / "sweep.csv"
        assert main(["sweep", "--config", str(cfg), "--out", str(out)]) == 0
        rows = read_csv(out)
        assert rows[0] == ["sweep_value", "threshold_passive"]
        assert len(rows) == 34
        assert float(rows[1][0]) == 0.0 and float(rows[-1][0]) == pytest.approx(math.pi / 2)
        # the end points are Fock products
        assert float(rows[1][1]) == pytest.approx(1.0)
        assert float(rows[-1][1]) == pytest.approx(1.0)

    def test_jobs_do_not_change_output(self, tmp_path, noon_sweep, monkeypatch):
        noon_sweep["sweep"]["steps"] = 4
        cfg = write_config(tmp_path, noon_sweep)
        a, b, c = (tmp_path / f"{n}.csv" for n in "abc")
        assert main(["sweep", "--config", str(cfg), "--out", str(a)]) == 0
        assert main(["sweep", "--config", str(cfg), "--out", str(b), "--jobs", "2"]) == 0
        monkeypatch.setenv("QNG_CERTIFY_JOBS", "2")
        assert main(["sweep", "--config", str(cfg), "--out", str(c), "--jobs", "1"]) == 0
        assert a.read_bytes() == b.read_bytes() == c.read_bytes()

    def test_bad_jobs_env(self, tmp_path, noon_sweep, monkeypatch, capsys):
        monkeypatch.setenv("QNG_CERTIFY_JOBS", "many")
        cfg = write_config(tmp_path, noon_sweep)
        assert main(["sweep", "--config", str(cfg)]) == 1
        assert "QNG_CERTIFY_JOBS" in capsys.readouterr().err

    def test_loss_columns(self, tmp_path):
        data = {"target": {"family": "fock_pair", "theta": 0.5, "n": 1}, "kind": "passive", "grid": SMALL_GRID}
        out = tmp_path / "loss.csv"
        assert main(["loss-tolerance", "--config", str(write_config(tmp_path, data)), "--out", str(out)]) == 0
        rows = read_csv(out)
        assert rows[0] == ["threshold_passive", "eta_min_passive"]
        assert 0 <= float(rows[1][1]) <= 1


class TestValidation:
    def test_misspelled_target_key(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"target": {"famly": "fock_pair", "theta": 0.5, "n": 1}})
        assert main(["threshold", "--config", str(cfg)]) == 1
        assert "famly" in capsys.readouterr().err

    def test_unknown_top_level_key(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"target": {"family": "fock_pair", "theta": 0.5, "n": 1}, "colour": 1})
        assert main(["threshold", "--config", str(cfg)]) == 1
        assert "colour" in capsys.readouterr().err

    def test_unknown_suite(self):
        assert main(["verify", "--suite", "everything"]) == 1

    def test_config_required(self):
        assert main(["threshold"]) == 1

    def test_unreadable_config(self, tmp_path):
        assert main(["threshold", "--config", str(tmp_path / "missing.json")]) == 1

    @pytest.mark.parametrize("sweep,fragment", [
        ({"parameter": "theta", "start": 0, "stop": 1}, "steps"),
        ({"parameter": "colour", "start": 0, "stop": 1, "steps": 3}, "parameter"),
        ({"parameter": "theta", "start": 0, "stop": 1, "steps": 1}, "steps"),
        ({"parameter": "n", "start": 1, "stop": 2, "steps": 3}, "integers"),
        ({"parameter": "theta", "start": 0, "stop": 1, "steps": 3, "extra": 1}, "extra"),
    ])
    def test_sweep_validation(self, sweep, fragment):
        data = {"target": {"family": "fock_pair", "theta": 0.5, "n": 1}, "sweep": sweep}
        with pytest.raises(InvalidConfig, match=fragment):
            RunConfig.from_dict("sweep", data)

    def test_phis_item_sweep(self):
        data = {"target": {"family": "photon_subtracted", "m": 2, "phis": [0.1, 0.2], "r": 0.3},
                "sweep": {"parameter": "phis[1]", "start": -0.5, "stop": 0.5, "steps": 3}}
        cfg = RunConfig.from_dict("sweep", data)
        assert [spec.phis[1] for _, spec in cfg.points()] == [-0.5, 0.0, 0.5]

    def test_optimizer_override_validated(self):
        data = {"target": {"family": "fock_pair", "theta": 0.5, "n": 1}, "optimizer": {"dim": 3}}
        with pytest.raises(InvalidConfig, match="dim"):
            RunConfig.from_dict("threshold", data)

    def test_column_order(self):
        cfg = RunConfig.from_dict("sweep", {"target": {"family": "fock_pair", "theta": 0.5, "n": 1}, "loss": True,
                                            "sweep": {"parameter": "theta", "start": 0, "stop": 1, "steps": 2}})
        assert _columns(cfg) == ["sweep_value", "threshold_passive", "threshold_gaussian", "converged_gaussian",
                                 "eta_min_passive", "eta_min_gaussian"]
