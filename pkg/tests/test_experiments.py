import math
import subprocess
import sys

import numpy as np
import pytest

from rotorlab import ConfigError
from rotorlab.cli import main
from rotorlab.experiments import (RunConfig, build_config, parse_config_file,
                                  run)

K1 = 0.8 * math.pi


def read_csv(path):
    lines = path.read_text().splitlines()
    header = lines[0].split(",")
    data = np.array([[float(v) for v in line.split(",")] for line in lines[1:]])
    return header, data


def read_meta(path):
    out = {}
    for line in path.read_text().splitlines():
        key, value = line.split(" = ", 1)
        out[key] = value
    return out


class TestConfigFile:
    def test_parse_with_comments(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("# a comment\nt_max = 12  # trailing\n\nk1 = 2.5\n")
        assert parse_config_file(cfg) == {"t_max": "12", "k1": "2.5"}

    def test_unknown_key_rejected(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("t_mux = 12\n")
        with pytest.raises(ConfigError, match="unknown config key"):
            build_config("figure1", parse_config_file(cfg))

    def test_duplicate_key_rejected(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("t_max = 12\nt_max = 13\n")
        with pytest.raises(ConfigError, match="duplicate"):
            parse_config_file(cfg)

    def test_malformed_line_rejected(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("what is this\n")
        with pytest.raises(ConfigError, match="key = value"):
            parse_config_file(cfg)

    def test_bad_value_names_field(self):
        with pytest.raises(ConfigError, match="'t_max'"):
            build_config("figure1", {"t_max": "twelve"})

    def test_experiment_mismatch(self):
        with pytest.raises(ConfigError, match="experiment"):
            build_config("figure1", {"experiment": "figure2a"})

    def test_validation_names_field(self):
        with pytest.raises(ConfigError, match="'beta'"):
            build_config("figure1", {"beta": "1.5"})
        with pytest.raises(ConfigError, match="'sigma_smooth'"):
            build_config("figure1", {"sigma_smooth": "-1"})
        with pytest.raises(ConfigError, match="'sweep_field'"):
            build_config("sweep", {"sweep_field": "tau"})

    def test_tau_overrides_epsilon(self):
        cfg = build_config("figure1", {"tau": repr(2 * math.pi + 0.02)})
        assert cfg.params().epsilon == pytest.approx(0.02, abs=1e-15)

    def test_threads_resolution(self, monkeypatch):
        cfg = RunConfig(experiment="figure1", threads=3)
        assert cfg.resolved_threads() == 3
        monkeypatch.setenv("ROTORLAB_THREADS", "2")
        cfg = RunConfig(experiment="figure1", threads=0)
        assert cfg.resolved_threads() == 2
        monkeypatch.delenv("ROTORLAB_THREADS")
        cfg = RunConfig(experiment="figure1", threads=1)
        assert cfg.resolved_threads() is None  # single-threaded: no worker arg


class TestRunners:
    def test_figure1_artifacts(self, tmp_path):
        cfg = build_config("figure1", overrides={"t_max": 30,
                                                 "output_path": str(tmp_path)})
        csv_path, meta_path = run(cfg)
        header, data = read_csv(csv_path)
        assert header == ["t", "F_numeric", "F_res_raw", "F_res_smoothed"]
        assert data[0, 0] == 1 and data[-1, 0] == 30
        assert np.all(data[:, 1] <= 1 + 1e-9)
        meta = read_meta(meta_path)
        for key in ("omega1", "omega2", "beat_period", "n_max_used", "backend",
                    "island1_halfwidth_beta", "sigma_smooth"):
            assert key in meta
        assert float(meta["beat_period"]) == pytest.approx(295.8267768338056)

    def test_figure1_identical_kicks_all_ones(self, tmp_path):
        cfg = build_config("figure1", {"k2": repr(K1)},
                           {"t_max": 10, "output_path": str(tmp_path)})
        csv_path, _ = run(cfg)
        _, data = read_csv(csv_path)
        np.testing.assert_allclose(data[:, 1:], 1.0, atol=1e-12)

    def test_figure2a_columns_and_meta(self, tmp_path):
        cfg = build_config("figure2a", {"count": "40"},
                           {"t_max": 30, "output_path": str(tmp_path)})
        with pytest.warns(UserWarning):
            csv_path, meta_path = run(cfg)
        header, data = read_csv(csv_path)
        assert header == ["t", "F_numeric_ensemble", "F_ens_raw", "F_ens_smoothed"]
        meta = read_meta(meta_path)
        assert meta["validity_warning_epsilon_vs_b2"] == "true"

    def test_figure2b_numeric_only(self, tmp_path):
        cfg = build_config("figure2b", {"count": "16"},
                           {"t_max": 10, "output_path": str(tmp_path)})
        csv_path, meta_path = run(cfg)
        header, _ = read_csv(csv_path)
        assert header == ["t", "F_numeric_ensemble"]
        assert read_meta(meta_path)["halfwidth"] == "0.5"

    def test_figure2_single_member_matches_figure1(self, tmp_path):
        # a width-zero single-member ensemble degenerates to the single-rotor
        # run, bit for bit (and carries no analytic ensemble columns)
        f2 = build_config("figure2a", {"count": "1", "halfwidth": "0"},
                          {"t_max": 25, "output_path": str(tmp_path / "f2")})
        f1 = build_config("figure1", overrides={"t_max": 25,
                                                "output_path": str(tmp_path / "f1")})
        csv2, _ = run(f2)
        csv1, _ = run(f1)
        header2, d2 = read_csv(csv2)
        _, d1 = read_csv(csv1)
        assert header2 == ["t", "F_numeric_ensemble"]
        np.testing.assert_array_equal(d2[:, 1], d1[:, 1])

    def test_exact_resonance_meta_reports_agreement(self, tmp_path):
        cfg = build_config("exact_resonance",
                           overrides={"t_max": 60, "output_path": str(tmp_path)})
        csv_path, meta_path = run(cfg)
        meta = read_meta(meta_path)
        assert float(meta["max_abs_column_difference"]) < 1e-6
        header, data = read_csv(csv_path)
        assert header == ["t", "F_numeric", "F_exact_law"]

    def test_map_portrait(self, tmp_path):
        cfg = build_config("map_portrait",
                           {"map_theta_count": "4", "map_action_count": "3"},
                           {"t_max": 20, "output_path": str(tmp_path)})
        csv_path, meta_path = run(cfg)
        header, data = read_csv(csv_path)
        assert header == ["orbit", "step", "theta", "action"]
        assert data.shape[0] == 4 * 3 * 21
        meta = read_meta(meta_path)
        assert float(meta["island_halfwidth_beta"]) == pytest.approx(0.0503824642580850,
                                                                     rel=1e-10)

    def test_map_portrait_zero_kick_constant_action(self, tmp_path):
        cfg = build_config("map_portrait",
                           {"k1": "0", "map_theta_count": "3",
                            "map_action_count": "3"},
                           {"t_max": 15, "output_path": str(tmp_path)})
        csv_path, _ = run(cfg)
        _, data = read_csv(csv_path)
        for orbit in range(9):
            actions = data[data[:, 0] == orbit][:, 3]
            assert np.all(actions == actions[0])

    def test_sweep(self, tmp_path):
        cfg = build_config("sweep", {"sweep_count": "3", "sweep_start": "0.005",
                                     "sweep_stop": "0.015"},
                           {"t_max": 25, "output_path": str(tmp_path)})
        csv_path, _ = run(cfg)
        header, data = read_csv(csv_path)
        assert header[0] == "epsilon"
        assert data.shape[0] == 3
        assert np.all(np.isfinite(data[:, 1:3]))

    def test_determinism_bit_identical(self, tmp_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        for out in (out1, out2):
            cfg = build_config("figure2a", {"count": "10"},
                               {"t_max": 15, "output_path": str(out)})
            with pytest.warns(UserWarning):
                run(cfg)
        assert (out1 / "figure2a.csv").read_bytes() == (out2 / "figure2a.csv").read_bytes()
        # meta files differ only in the echoed output directory
        strip = lambda p: [ln for ln in p.read_text().splitlines()
                           if not ln.startswith("output_path")]
        assert strip(out1 / "figure2a.meta") == strip(out2 / "figure2a.meta")

    def test_csv_17_significant_digits(self, tmp_path):
        cfg = build_config("figure1", overrides={"t_max": 5,
                                                 "output_path": str(tmp_path)})
        csv_path, _ = run(cfg)
        line = csv_path.read_text().splitlines()[1].split(",")
        # round-trip: parsing the printed value reproduces the double exactly
        from rotorlab import rotor_fidelity, rotor_overlap_series
        fid = rotor_fidelity(rotor_overlap_series(cfg.params(), cfg.n_max, 5))
        assert float(line[1]) == fid.values[1]


class TestCli:
    def test_exit_zero_and_prints_paths(self, tmp_path, capsys):
        rc = main(["figure1", "--t-max", "8", "--out", str(tmp_path)])
        assert rc == 0
        out = capsys.readouterr().out
        assert "figure1.csv" in out and "figure1.meta" in out

    def test_exit_two_on_bad_config(self, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("nonsense_key = 5\n")
        rc = main(["figure1", "--config", str(cfg), "--out", str(tmp_path)])
        assert rc == 2
        assert "configuration error" in capsys.readouterr().err

    def test_exit_two_on_missing_config_file(self, tmp_path, capsys):
        rc = main(["figure1", "--config", str(tmp_path / "absent.cfg")])
        assert rc == 2

    def test_exit_three_on_resolution_failure(self, tmp_path, capsys, monkeypatch):
        import rotorlab.fidelity as fid_mod
        monkeypatch.setattr(fid_mod, "N_MAX_LIMIT", 128)
        rc = main(["exact-resonance", "--t-max", "200", "--n-max", "128",
                   "--out", str(tmp_path)])
        assert rc == 3
        assert "resolution" in capsys.readouterr().err

    def test_console_entry_point(self, tmp_path):
        proc = subprocess.run(
            [sys.executable, "-m", "rotorlab.cli", "figure1", "--t-max", "5",
             "--out", str(tmp_path)],
            capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        assert (tmp_path / "figure1.csv").exists()


class TestBackendConsistency:
    def test_numpy_and_active_backends_agree(self, tmp_path, monkeypatch):
        import rotorlab.kernels as kernels
        from rotorlab import RotorParams, rotor_overlap_series
        p = RotorParams.from_epsilon(0.01, K1, 0.6 * math.pi, 0.31)
        baseline = rotor_overlap_series(p, 64, 40).overlaps
        for name, impl in kernels.IMPLEMENTATIONS["numpy"].items():
            monkeypatch.setattr(kernels, name, impl)
        numpy_result = rotor_overlap_series(p, 64, 40).overlaps
        np.testing.assert_allclose(numpy_result, baseline, atol=1e-13)

    def test_map_kernel_backends_agree(self, rng):
        import rotorlab.kernels as kernels
        theta0 = rng.uniform(0, 2 * math.pi, 50)
        action0 = rng.uniform(-1, 1, 50)
        results = {}
        for name, impl in kernels.IMPLEMENTATIONS.items():
            results[name] = impl["map_orbit"](theta0, action0, 0.025, math.pi * 2.1, 500)
        if len(results) > 1:
            np.testing.assert_allclose(results["numpy"][0], results["numba"][0],
                                       atol=1e-9)
            np.testing.assert_allclose(results["numpy"][1], results["numba"][1],
                                       atol=1e-9)
