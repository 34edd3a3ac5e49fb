"""End-to-end tests for the command-line application."""

import orjson
import pytest
import yaml
from typer.testing import CliRunner

from cli import app
from cli.settings import defaults_from_config, settings_from_dict
from config import Config
from core.errors import ConfigError
from storage import RunLog


runner = CliRunner()

IDEAL = {
    "source": {"p": 0.05},
    "noise": {"efficiency": 1.0, "include_multi_pair": False},
    "engine": {"trials": 5000, "block_size": 1024},
}


@pytest.fixture
def ideal_config(run_env):
    path = run_env / "ideal.yaml"
    path.write_text(yaml.safe_dump(IDEAL))
    return path


def _invoke(*args):
    result = runner.invoke(app, list(args))
    return result


def _report(path):
    return orjson.loads(path.read_bytes())


class TestSettings:
    def test_overlay(self):
        settings = settings_from_dict(IDEAL, Config())
        assert settings.source.p == 0.05
        assert settings.noise.efficiency == 1.0
        assert settings.engine.trials == 5000
        assert settings.repeater.name == "all-photonic"

    def test_unknown_section(self):
        with pytest.raises(ConfigError):
            settings_from_dict({"detectors": {}}, Config())

    def test_bad_values_become_config_errors(self):
        with pytest.raises(ConfigError):
            settings_from_dict({"source": {"p": 0.9}}, Config())
        with pytest.raises(ConfigError):
            settings_from_dict({"engine": {"method": "guess"}}, Config())

    def test_workers_left_out_of_report_config(self):
        data = defaults_from_config(Config()).to_dict(include_workers=False)
        assert "workers" not in data["engine"]
        assert data["layout"] == {"repeater": "all-photonic", "baseline": "conventional"}


class TestRateCommands:
    def test_rates(self, run_env):
        out = run_env / "rates.json"
        result = _invoke("--out", str(out), "rates", "--M", "2", "--N", "1", "--eta", "0.5")
        assert result.exit_code == 0, result.output
        payload = _report(out)["payload"]
        assert payload["conventional"] == pytest.approx(0.5)
        assert payload["all_photonic"] == pytest.approx(1.0)
        assert payload["ratio"] == pytest.approx(2.0)

    def test_ratio_scan_enumerated(self, ideal_config):
        out = ideal_config.parent / "scan.json"
        result = _invoke("--config", str(ideal_config), "--out", str(out), "ratio-scan", "--steps", "3")
        assert result.exit_code == 0, result.output
        rows = _report(out)["payload"]["rows"]
        assert rows[0]["p"] == 0.0
        assert rows[0]["r_theory"] == 2.0
        assert rows[0]["r_simulated"] is None
        for row in rows[1:]:
            assert row["std_error"] == 0.0
            assert row["r_simulated"] == pytest.approx(row["r_theory"], abs=1e-6)

    def test_ratio_scan_csv(self, ideal_config):
        result = _invoke("--config", str(ideal_config), "--format", "csv", "ratio-scan", "--steps", "2")
        assert result.exit_code == 0, result.output
        assert result.output.splitlines()[0] == "p,r_theory,r_simulated,std_error"

    def test_sampled_scan_is_independent_of_workers(self, ideal_config):
        reports = []
        for workers in ("1", "4", "8"):
            out = ideal_config.parent / f"scan-{workers}.json"
            result = _invoke("--config", str(ideal_config), "--seed", "7", "--workers", workers, "--out", str(out),
                             "ratio-scan", "--p-min", "0.05", "--p-max", "0.1", "--steps", "2", "--method", "sample")
            assert result.exit_code == 0, result.output
            data = _report(out)
            for key in ("duration_s", "created_at"):
                data.pop(key)
            reports.append(orjson.dumps(data, option=orjson.OPT_SORT_KEYS))
        assert reports[0] == reports[1] == reports[2]

    def test_theory_conditions_reproduce_closed_form(self, run_env):
        out = run_env / "theory.json"
        result = _invoke("--out", str(out), "ratio-scan", "--p-min", "0.0344", "--p-max", "0.0483",
                         "--steps", "2", "--method", "enumerate", "--theory-conditions")
        assert result.exit_code == 0, result.output
        payload = _report(out)["payload"]
        assert payload["theory_comparable"] is True
        assert payload["efficiency"] == 1.0
        for row in payload["rows"]:
            assert row["r_simulated"] == pytest.approx(row["r_theory"], rel=1e-9)

    def test_lossy_scan_is_flagged(self, run_env):
        path = run_env / "lossy.yaml"
        path.write_text(yaml.safe_dump({**IDEAL, "noise": {"efficiency": 0.9, "include_multi_pair": False}}))
        out = run_env / "lossy.json"
        result = _invoke("--config", str(path), "--out", str(out), "ratio-scan",
                         "--p-min", "0.05", "--p-max", "0.1", "--steps", "2", "--method", "enumerate")
        assert result.exit_code == 0, result.output
        assert _report(out)["payload"]["theory_comparable"] is False

    def test_bad_p_range(self, run_env):
        result = _invoke("ratio-scan", "--p-min", "0.2", "--p-max", "0.1")
        assert result.exit_code == 2

    def test_twofold(self, run_env):
        out = run_env / "twofold.json"
        result = _invoke("--out", str(out), "twofold", "--p", "0.0344", "--eta", "0.38")
        assert result.exit_code == 0, result.output
        assert _report(out)["payload"]["twofold_hz"] == pytest.approx(3.974e5, rel=1e-3)

    def test_false_bsm(self, run_env):
        out = run_env / "fbsm.json"
        result = _invoke("--out", str(out), "false-bsm")
        assert result.exit_code == 0, result.output
        rows = _report(out)["payload"]["rows"]
        assert [r["p"] for r in rows] == [0.0344, 0.0483]
        assert rows[0]["false_bsm_rate"] < rows[1]["false_bsm_rate"]


class TestConfigHandling:
    def test_dump_config(self, run_env):
        result = _invoke("--dump-config")
        assert result.exit_code == 0
        data = yaml.safe_load(result.output)
        assert set(data) == {"source", "noise", "layout", "engine"}

    def test_unknown_key_exits_with_config_error(self, run_env):
        path = run_env / "bad.yaml"
        path.write_text(yaml.safe_dump({"noise": {"visiblity": 0.9}}))
        result = _invoke("--config", str(path), "rates")
        assert result.exit_code == 2

    def test_missing_config_file(self, run_env):
        result = _invoke("--config", str(run_env / "nope.yaml"), "rates")
        assert result.exit_code == 2


class TestProtocolCommands:
    def test_table(self, ideal_config):
        out = ideal_config.parent / "table.json"
        result = _invoke("--config", str(ideal_config), "--out", str(out), "table")
        assert result.exit_code == 0, result.output
        rows = _report(out)["payload"]["rows"]
        assert len(rows) == 64
        for row in rows:
            assert row["ideal_fidelity"] == pytest.approx(1.0, abs=1e-9)

    def test_fidelity_on_conventional_layout(self, ideal_config):
        out = ideal_config.parent / "fidelity.json"
        result = _invoke("--config", str(ideal_config), "--out", str(out),
                         "fidelity", "--layout", "conventional", "--shots", "4000")
        assert result.exit_code == 0, result.output
        pairs = {p["pair"]: p for p in _report(out)["payload"]["pairs"]}
        assert pairs["1&11"]["fidelity"] == pytest.approx(1.0)
        assert pairs["4&10"]["fidelity"] == pytest.approx(1.0)
        assert pairs["4&11"]["fidelity"] == pytest.approx(0.25, abs=0.05)
        assert pairs["1&10"]["exact_fidelity"] == pytest.approx(0.25)

    def test_fidelity_fits_white_noise_to_target(self, ideal_config):
        out = ideal_config.parent / "fit.json"
        result = _invoke("--config", str(ideal_config), "--out", str(out), "fidelity",
                         "--layout", "conventional-upper", "--shots", "2000", "--target-fidelity", "0.8")
        assert result.exit_code == 0, result.output
        payload = _report(out)["payload"]
        assert payload["method"] == "enumerate"
        assert payload["calibration"]["parameter"] == "white_noise"
        assert payload["calibration"]["reached"]
        assert payload["average_fidelity"] == pytest.approx(0.8, abs=1e-4)

    def test_zbasis(self, run_env):
        out = run_env / "z.json"
        result = _invoke("--out", str(out), "zbasis")
        assert result.exit_code == 0, result.output
        assert _report(out)["payload"]["support"] == pytest.approx({"H" * 12: 0.5, "V" * 12: 0.5})


class TestTomoAndRuns:
    def test_tomo_pcm(self, run_env, monkeypatch):
        monkeypatch.setenv("MLE_TOLERANCE", "1e-8")
        out = run_env / "pcm.json"
        result = _invoke("--out", str(out), "tomo", "pcm", "--shots", "20000", "--visibility", "0.8")
        assert result.exit_code == 0, result.output
        payload = _report(out)["payload"]
        assert payload["probes"] == 16
        phi = payload["elements"][0]
        assert phi["element"] == "phi_plus"
        assert phi["bell_fidelity"] == pytest.approx(0.9, abs=0.02)

    def test_runs_are_logged(self, run_env):
        _invoke("rates")
        _invoke("ratio-scan", "--p-min", "0.2", "--p-max", "0.1")
        entries = RunLog(str(run_env / "runs.db")).get_recent_runs()
        assert [e.command for e in entries] == ["ratio-scan", "rates"]
        assert entries[0].exit_code == 2
        assert entries[1].digest

        result = _invoke("runs", "--limit", "5")
        assert result.exit_code == 0, result.output
        assert "2 total" in result.output
