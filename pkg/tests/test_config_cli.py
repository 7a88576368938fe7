import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from fluctlab.config import config_schema, parse_config
from fluctlab.errors import ConfigError
from fluctlab.report import canonical_json, emit
from fluctlab.runner import run

MINIMAL = {
    "model": {"class": "gaussian", "dim": 1, "two_point": {"form": "gaussian"}},
    "analyses": [{"kind": "scaling-sweep", "orders": [2]}],
}


def cfg_text(payload) -> str:
    return json.dumps(payload)


class TestParsing:
    def test_minimal_defaults(self):
        cfg = parse_config(cfg_text(MINIMAL))
        assert cfg.numeric_block["alpha_mode"] == "canonical"
        assert cfg.numeric_block["r_grid"] == {"start": 8.0, "stop": 512.0, "count": 8}
        assert cfg.window_block["kind"] == "mollified-step"
        sc = cfg.scaling_config()
        assert sc.resolved_alpha(1) == 0.5
        assert len(sc.r_values) == 8 and sc.r_values[0] == 8.0 and sc.r_values[-1] == 512.0

    def test_duplicate_key_rejected(self):
        text = '{"model": {"class": "gaussian"}, "model": {"class": "powerlaw"}}'
        with pytest.raises(ConfigError, match="duplicate key"):
            parse_config(text)

    def test_unknown_keys_listed(self):
        bad = dict(MINIMAL)
        bad["numeric"] = {"r_gird": {}, "epsilon": 1}
        with pytest.raises(ConfigError) as err:
            parse_config(cfg_text(bad))
        assert "epsilon" in str(err.value) and "r_gird" in str(err.value)

    def test_unknown_analysis_kind(self):
        bad = dict(MINIMAL)
        bad["analyses"] = [{"kind": "fourier-party"}]
        with pytest.raises(ConfigError, match="fourier-party"):
            parse_config(cfg_text(bad))

    def test_alpha_outside_l2_window_rejected(self):
        bad = {
            "model": {"class": "powerlaw", "dim": 1, "beta": 0.75},
            "numeric": {"alpha_mode": "explicit", "alpha": 0.9},
            "analyses": [{"kind": "scaling-sweep", "orders": [2]}],
        }
        with pytest.raises(ConfigError, match="square-integrable window"):
            parse_config(cfg_text(bad))

    def test_alpha_inside_l2_window_accepted(self):
        good = {
            "model": {"class": "powerlaw", "dim": 1, "beta": 0.75},
            "numeric": {"alpha_mode": "explicit", "alpha": 0.7},
            "analyses": [{"kind": "scaling-sweep", "orders": [2]}],
        }
        parse_config(cfg_text(good))

    def test_weighted_needs_gamma_mode(self):
        bad = {
            "model": {
                "class": "weighted",
                "dim": 1,
                "orders": [{"order": 2, "alpha": 0.5,
                            "factor": {"form": "bessel-power", "power": 1.0}}],
            },
            "analyses": [{"kind": "scaling-sweep", "orders": [2]}],
        }
        with pytest.raises(ConfigError, match="gamma"):
            parse_config(cfg_text(bad))

    def test_incompatible_model_analysis(self):
        bad = dict(MINIMAL)
        bad["analyses"] = [{"kind": "ssb-bound"}]
        with pytest.raises(ConfigError, match="incompatible"):
            parse_config(cfg_text(bad))

    def test_sharp_window_rejected(self):
        bad = dict(MINIMAL)
        bad["window"] = {"kind": "sharp", "dim": 1}
        with pytest.raises(ConfigError, match="sharp"):
            parse_config(cfg_text(bad))

    def test_malformed_json(self):
        with pytest.raises(ConfigError, match="malformed"):
            parse_config("{not json")

    def test_schema_outline(self):
        schema = config_schema()
        assert "scaling-sweep" in schema["analyses"][0]["kind"]
        assert "bisect" in schema["numeric"]["alpha_mode"]


@pytest.fixture(scope="module")
def report(cache_dir):
    cfg = parse_config(cfg_text({
        "model": {"class": "gaussian", "dim": 1, "two_point": {"form": "gaussian"}},
        "numeric": {"r_grid": {"start": 8, "stop": 512, "count": 7}, "eps_vanish": 1e-3},
        "analyses": [
            {"kind": "scaling-sweep", "orders": [2, 3]},
            {"kind": "qmode", "order": 2, "q_values": [0.0, 0.3]},
        ],
    }))
    return cfg, run(cfg, cache_dir=cache_dir)


class TestRunAndEmit:

    def test_l1_sweep_verdicts(self, report):
        _, rep = report
        sweeps = rep.results[0]["sweeps"]
        assert sweeps[0]["verdict"] == "finite-nonzero"
        assert sweeps[1]["verdict"] == "vanishing"  # quasi-free: S_3 = 0

    def test_empty_analyses(self, cache_dir):
        cfg = parse_config(cfg_text({
            "model": {"class": "gaussian", "dim": 1, "two_point": {"form": "gaussian"}},
            "analyses": [],
        }))
        rep = run(cfg, cache_dir=cache_dir)
        assert rep.results == ()

    def test_json_round_trip(self, report, tmp_path):
        _, rep = report
        paths = emit(rep, tmp_path, "r", ["json"])
        payload = json.loads(paths[0].read_text())
        again = canonical_json(payload)
        assert again == canonical_json(json.loads(canonical_json(rep.payload())))

    def test_csv_row_count(self, report, tmp_path):
        cfg, rep = report
        paths = emit(rep, tmp_path, "r", ["csv"])
        rows = paths[0].read_text().strip().splitlines()
        n_r = cfg.numeric_block["r_grid"]["count"]
        expected = n_r * (2 + 2)  # two sweep orders + two q-mode sweeps
        assert len(rows) == 1 + expected
        assert rows[0] == "analysis,label,order,r,re,im,abs"

    def test_plot_data_slope(self, cache_dir, tmp_path):
        cfg = parse_config(cfg_text({
            "model": {"class": "product-ansatz", "dim": 1, "orders": {
                "2": [{"amplitude": 1.0, "width": 1.0}],
                "3": [{"amplitude": 1.0, "width": 1.0}, {"amplitude": 0.8, "width": 1.3}],
            }},
            "numeric": {"r_grid": {"start": 8, "stop": 512, "count": 7}, "eps_vanish": 1e-3},
            "analyses": [{"kind": "scaling-sweep", "orders": [3]}],
        }))
        rep = run(cfg, cache_dir=cache_dir)
        paths = emit(rep, tmp_path, "r", ["plot-data"])
        rows = [r.split(",") for r in paths[0].read_text().strip().splitlines()[1:]]
        x = np.array([float(r[2]) for r in rows])
        y = np.array([float(r[3]) for r in rows])
        slope = np.polyfit(x, y, 1)[0]
        assert slope == pytest.approx(-0.5, abs=0.1)

    def test_determinism(self, report, cache_dir):
        cfg, rep = report
        rep2 = run(cfg, cache_dir=cache_dir)
        assert canonical_json(rep.payload()) == canonical_json(rep2.payload())

    def test_timings_sidecar(self, report, tmp_path):
        _, rep = report
        paths = emit(rep, tmp_path, "s", ["json"])
        timings = json.loads(paths[1].read_text())
        assert "total" in timings


class TestCLI:
    def run_cli(self, args, env_cache):
        import os

        env = dict(os.environ)
        env["FLUCTLAB_CACHE"] = str(env_cache)
        return subprocess.run(
            [sys.executable, "-m", "fluctlab.cli", *args],
            capture_output=True, text=True, env=env,
        )

    def test_schema_command(self, cache_dir):
        proc = self.run_cli(["schema"], cache_dir)
        assert proc.returncode == 0
        json.loads(proc.stdout)

    def test_validate_and_run(self, tmp_path, cache_dir):
        path = tmp_path / "run.json"
        path.write_text(cfg_text({
            "model": {"class": "gaussian", "dim": 1, "two_point": {"form": "gaussian"}},
            "numeric": {"r_grid": {"start": 8, "stop": 512, "count": 7}},
            "analyses": [{"kind": "qmode", "order": 2, "q_values": [0.0]}],
            "output": {"directory": str(tmp_path / "out"), "formats": ["json", "csv"]},
        }))
        proc = self.run_cli(["validate", str(path)], cache_dir)
        assert proc.returncode == 0, proc.stderr
        proc = self.run_cli(["run", str(path)], cache_dir)
        assert proc.returncode == 0, proc.stderr
        assert (tmp_path / "out" / "report.json").exists()
        assert (tmp_path / "out" / "report.csv").exists()

    def test_config_error_exit_code(self, tmp_path, cache_dir):
        path = tmp_path / "bad.json"
        path.write_text('{"model": {"class": "nonsense"}}')
        proc = self.run_cli(["run", str(path)], cache_dir)
        assert proc.returncode == 2
        assert "configuration error" in proc.stderr

    def test_missing_file_exit_code(self, tmp_path, cache_dir):
        proc = self.run_cli(["run", str(tmp_path / "absent.json")], cache_dir)
        assert proc.returncode == 2

    def test_numerical_accuracy_exit_code(self, tmp_path, cache_dir):
        path = tmp_path / "tight.json"
        path.write_text(cfg_text({
            "model": {"class": "gaussian", "dim": 1, "two_point": {"form": "gaussian"}},
            "numeric": {"r_grid": {"start": 8, "stop": 512, "count": 7},
                        "quad": {"1": [6.0, 4, 8, 0]}},
            "analyses": [{"kind": "scaling-sweep", "orders": [2]}],
        }))
        proc = self.run_cli(["run", str(path)], cache_dir)
        assert proc.returncode == 3
        assert "numerical-accuracy" in proc.stderr

    def test_model_validation_exit_code(self, tmp_path, cache_dir):
        path = tmp_path / "badmodel.json"
        path.write_text(cfg_text({
            "model": {"class": "goldstone-ssb", "dim": 3,
                      "rho_qa": {"re": 0.0, "im": 5.0}},
            "analyses": [{"kind": "gap-check"}],
        }))
        proc = self.run_cli(["run", str(path)], cache_dir)
        assert proc.returncode == 4
        assert "model-validation" in proc.stderr
