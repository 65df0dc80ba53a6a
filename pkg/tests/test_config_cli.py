import json
from pathlib import Path

import numpy as np
import pytest

from qtypicality.cli import EXIT_CONFIG, EXIT_OK, main
from qtypicality.config import (
    ConfigError,
    config_from_dict,
    load_config,
    sanity_warnings,
)

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


def tiny_config(tmp_path, mode="speckle", **overrides):
    data = {
        "schema_version": 1,
        "mode": mode,
        "system": {"dim_e": 24, "sigma_e": 1.0, "gap": 1.0, "epsilon_e": -1.27},
        "ensemble": {"kind": "wigner", "sigma_w": 0.2, "normalization": "exact"},
        "times": {"t_max": 20.0, "n_points": 40},
        "n_realizations": 2,
        "master_seed": 5,
        "workers": 1,
        "out_dir": str(tmp_path / "out"),
    }
    data.update(overrides)
    return data


def write_config(tmp_path, data, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return path


class TestConfigValidation:
    @pytest.mark.parametrize("name", sorted(p.name for p in CONFIG_DIR.glob("*.json")))
    def test_shipped_configs_are_valid(self, name):
        config = load_config(CONFIG_DIR / name)
        assert config.mode in name.replace("-", "_") or config.mode.replace("-", "_") in name

    def test_negative_sigma_w_rejected(self, tmp_path):
        data = tiny_config(tmp_path)
        data["ensemble"]["sigma_w"] = -0.2
        with pytest.raises(ConfigError, match="sigma_w"):
            config_from_dict(data)

    def test_huge_environment_rejected_with_memory_estimate(self, tmp_path):
        data = tiny_config(tmp_path)
        data["system"]["dim_e"] = 10**6
        with pytest.raises(ConfigError, match="MiB"):
            config_from_dict(data)

    def test_concentration_needs_two_realizations(self, tmp_path):
        data = tiny_config(tmp_path, mode="concentration", n_realizations=1)
        with pytest.raises(ConfigError, match="n_realizations"):
            config_from_dict(data)

    def test_parse_error_has_location(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text('{"mode": "speckle",\n  "system": }')
        with pytest.raises(ConfigError, match="line 2"):
            load_config(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="config file"):
            load_config(tmp_path / "nope.json")

    def test_unknown_mode(self, tmp_path):
        with pytest.raises(ConfigError, match="mode"):
            config_from_dict(tiny_config(tmp_path, mode="dashboard"))

    def test_sanity_warning_for_strong_coupling(self, tmp_path):
        data = tiny_config(tmp_path)
        data["ensemble"]["sigma_w"] = 5.0
        config = config_from_dict(data)
        assert any("span" in w for w in sanity_warnings(config))

    def test_roundtrip_hash_is_stable(self, tmp_path):
        config = config_from_dict(tiny_config(tmp_path))
        again = config_from_dict(config.to_dict())
        assert config.sha256() == again.sha256()


class TestCliRuns:
    def test_validate_ok(self, tmp_path, capsys):
        path = write_config(tmp_path, tiny_config(tmp_path))
        assert main(["validate", "--config", str(path)]) == EXIT_OK
        out = capsys.readouterr().out
        assert "config ok" in out and "MiB" in out

    def test_validate_bad_config(self, tmp_path, capsys):
        data = tiny_config(tmp_path)
        data["ensemble"]["kind"] = "sparse"
        path = write_config(tmp_path, data)
        assert main(["validate", "--config", str(path)]) == EXIT_CONFIG
        assert "invalid config" in capsys.readouterr().err

    def test_mode_mismatch_is_config_error(self, tmp_path, capsys):
        path = write_config(tmp_path, tiny_config(tmp_path, mode="speckle"))
        assert main(["concentration", "--config", str(path)]) == EXIT_CONFIG

    def test_speckle_run_artifacts(self, tmp_path):
        data = tiny_config(tmp_path)
        path = write_config(tmp_path, data)
        assert main(["speckle", "--config", str(path)]) == EXIT_OK
        out = tmp_path / "out"
        files = sorted(p.name for p in out.glob("*.csv"))
        assert files == ["speckle_dim24_r0.csv", "speckle_dim24_r1.csv"]
        header = (out / files[0]).read_text().splitlines()[0]
        assert header == "time,p_0,p_1,re_rho_0_1,im_rho_0_1,stream"
        summary = json.loads((out / "summary.json").read_text())
        assert "stationary_prediction" in summary
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["config_sha256"]
        assert manifest["versions"]["qtypicality"]

    def test_speckle_bytes_deterministic_and_worker_independent(self, tmp_path):
        base = tiny_config(tmp_path)
        runs = {}
        for tag, workers in (("a", 1), ("b", 1), ("c", 2)):
            data = dict(base, out_dir=str(tmp_path / tag))
            path = write_config(tmp_path, data, name=f"{tag}.json")
            assert main(["speckle", "--config", str(path), "--workers", str(workers)]) == EXIT_OK
            runs[tag] = (tmp_path / tag / "speckle_dim24_r0.csv").read_bytes()
        assert runs["a"] == runs["b"] == runs["c"]

    def test_seed_override_changes_output(self, tmp_path):
        data = tiny_config(tmp_path)
        path = write_config(tmp_path, data)
        assert main(["speckle", "--config", str(path)]) == EXIT_OK
        first = (tmp_path / "out" / "speckle_dim24_r0.csv").read_bytes()
        assert main(["speckle", "--config", str(path), "--seed", "99",
                     "--out", str(tmp_path / "out2")]) == EXIT_OK
        second = (tmp_path / "out2" / "speckle_dim24_r0.csv").read_bytes()
        assert first != second

    def test_concentration_run(self, tmp_path):
        data = tiny_config(
            tmp_path, mode="concentration", n_realizations=8,
            times={"points": [1.0, 5.0]},
        )
        path = write_config(tmp_path, data)
        assert main(["concentration", "--config", str(path)]) == EXIT_OK
        body = (tmp_path / "out" / "concentration.csv").read_text().splitlines()
        assert body[0] == "time,sigma_rho_sq,variance_bound,n"
        assert len(body) == 3
        summary = json.loads((tmp_path / "out" / "summary.json").read_text())
        assert summary["bound_satisfied_everywhere"] is True
        assert summary["physicality"]["pass"] is True

    def test_scaling_run(self, tmp_path):
        data = tiny_config(
            tmp_path, mode="scaling", n_realizations=6,
            dims_e=[6, 12], t=3.0, window_points=10,
        )
        path = write_config(tmp_path, data)
        assert main(["scaling", "--config", str(path)]) == EXIT_OK
        body = (tmp_path / "out" / "scaling.csv").read_text().splitlines()
        assert body[0] == "dim_e,t,sigma_rho_sq,variance_bound,speckle_std_p0,n"
        assert len(body) == 3

    def test_scaling_dims_beyond_cap_is_config_error(self, tmp_path):
        data = tiny_config(
            tmp_path, mode="scaling", n_realizations=4, dims_e=[6, 4096], t=1.0
        )
        path = write_config(tmp_path, data)
        assert main(["scaling", "--config", str(path)]) == EXIT_CONFIG

    def test_gradient_check_run(self, tmp_path):
        data = tiny_config(
            tmp_path, mode="gradient-check", n_realizations=1,
            dims_e=[2, 4], n_instances=6, tau_range=[0.2, 1.5],
        )
        data["system"]["dim_e"] = 2
        path = write_config(tmp_path, data)
        assert main(["gradient-check", "--config", str(path)]) == EXIT_OK
        summary = json.loads((tmp_path / "out" / "summary.json").read_text())
        assert summary["all_chains_hold"] is True
        assert summary["max_numeric_over_exact"] <= 1.0 + 1e-4

    def test_poincare_check_run(self, tmp_path):
        data = tiny_config(
            tmp_path, mode="poincare-check", n_realizations=1,
            functions=["linear"], dims=[16], n_samples=200,
        )
        data["ensemble"]["normalization"] = "expectation"
        path = write_config(tmp_path, data)
        assert main(["poincare-check", "--config", str(path)]) == EXIT_OK
        summary = json.loads((tmp_path / "out" / "summary.json").read_text())
        assert summary["all_within_tolerance"] is True
