"""Command-line interface: parsing, exit codes, file outputs, manifests."""

import csv
import filecmp
import json
import math
import os

import pytest

from cohsim import __version__
from cohsim.cli import main, parse_angle, parse_angle_list
from cohsim.experiment import CountTable, ExperimentConfig, point_correlator

FAST_CFG_TEXT = (
    "pair_rate = 1e5\n"
    "duration_per_setting = 0.01\n"
    "num_trials = 2\n"
    "efficiency = 1.0\n"
    "seed = 1\n"
)


@pytest.fixture
def fast_cfg(tmp_path):
    path = tmp_path / "fast.cfg"
    path.write_text(FAST_CFG_TEXT)
    return str(path)


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def manifest_of(out_dir):
    return json.loads((out_dir / "manifest.json").read_text())


def assert_manifest_complete(out_dir):
    """The manifest must list exactly the files on disk."""
    manifest = manifest_of(out_dir)
    on_disk = sorted(
        os.path.relpath(os.path.join(root, name), out_dir).replace(os.sep, "/")
        for root, _dirs, names in os.walk(out_dir)
        for name in names
    )
    assert manifest["output_files"] == on_disk
    return manifest


class TestParseAngle:
    @pytest.mark.parametrize(
        "text,value",
        [
            ("pi/12", math.pi / 12),
            ("3pi/4", 3 * math.pi / 4),
            ("3*pi/4", 3 * math.pi / 4),
            ("pi", math.pi),
            ("2pi", 2 * math.pi),
            ("PI/6", math.pi / 6),
            ("0.5", 0.5),
            (" pi/8 ", math.pi / 8),
        ],
    )
    def test_accepted_forms(self, text, value):
        assert parse_angle(text) == pytest.approx(value, rel=1e-15)

    @pytest.mark.parametrize("text", ["pi/0", "junk", "", "pi/pi", "4/pi"])
    def test_rejected_forms(self, text):
        with pytest.raises(ValueError):
            parse_angle(text)

    def test_angle_list(self):
        assert parse_angle_list("pi/4, 0.5") == pytest.approx((math.pi / 4, 0.5))
        with pytest.raises(ValueError, match="nonempty"):
            parse_angle_list(" , ")


class TestExitCodes:
    def test_bad_angle_exits_two(self, tmp_path, capsys):
        code = main(["paradox", "--theta", "junk", "--out", str(tmp_path / "o")])
        assert code == 2
        assert "cohsim: error:" in capsys.readouterr().err

    def test_boundary_angle_exits_two(self, tmp_path, capsys):
        code = main(["paradox", "--theta", "pi/2", "--out", str(tmp_path / "o")])
        assert code == 2

    def test_dicke_n_too_small_exits_two(self, tmp_path, capsys):
        assert main(["dicke", "--n", "1", "--out", str(tmp_path / "o")]) == 2

    def test_empty_game_grid_exits_two(self, tmp_path, capsys):
        code = main(["game", "--theta-grid", " , ", "--out", str(tmp_path / "o")])
        assert code == 2

    def test_too_few_scan_points_exits_two(self, tmp_path, capsys):
        code = main(["visibility", "--points", "2", "--out", str(tmp_path / "o")])
        assert code == 2

    def test_unknown_command_raises_argparse_exit(self, capsys):
        with pytest.raises(SystemExit) as info:
            main(["frobnicate"])
        assert info.value.code == 2

    def test_version_flag(self, capsys):
        with pytest.raises(SystemExit) as info:
            main(["--version"])
        assert info.value.code == 0
        assert f"cohsim {__version__}" in capsys.readouterr().out

    def test_numerical_failure_exits_three(self, tmp_path, capsys, monkeypatch):
        def explode(*args, **kwargs):
            raise ArithmeticError("fit degenerate")

        monkeypatch.setattr("cohsim.cli.visibility_scan", explode)
        code = main(["visibility", "--out", str(tmp_path / "o")])
        assert code == 3
        assert "cohsim: numerical failure:" in capsys.readouterr().err


class TestConfigPlumbing:
    def test_config_flag_feeds_manifest_and_run(self, tmp_path, fast_cfg, capsys):
        out = tmp_path / "o"
        assert main(["paradox", "--config", fast_cfg, "--out", str(out)]) == 0
        manifest = manifest_of(out)
        assert manifest["config"]["pair_rate"] == 1e5
        assert manifest["config"]["num_trials"] == 2
        assert manifest["seed"] == 1

    def test_env_var_used_when_flag_absent(self, tmp_path, fast_cfg, monkeypatch, capsys):
        monkeypatch.setenv("COHSIM_CONFIG", fast_cfg)
        out = tmp_path / "o"
        assert main(["paradox", "--out", str(out)]) == 0
        assert manifest_of(out)["config"]["duration_per_setting"] == 0.01

    def test_flag_overrides_file_values(self, tmp_path, fast_cfg, capsys):
        out = tmp_path / "o"
        code = main(
            [
                "visibility",
                "--config",
                fast_cfg,
                "--seed",
                "77",
                "--visibility",
                "0.85",
                "--out",
                str(out),
            ]
        )
        assert code == 0
        manifest = manifest_of(out)
        assert manifest["seed"] == 77
        assert manifest["config"]["visibility_v"] == 0.85
        doc = json.loads((out / "visibility.json").read_text())
        assert doc["visibility"] == pytest.approx(0.85, abs=1e-10)

    def test_versions_block(self, tmp_path, capsys):
        out = tmp_path / "o"
        assert main(["paradox", "--out", str(out)]) == 0
        versions = manifest_of(out)["versions"]
        assert set(versions) == {"cohsim", "numpy", "scipy", "python"}
        assert versions["cohsim"] == __version__


class TestParadoxCommand:
    def test_exact_table_values(self, tmp_path, capsys):
        out = tmp_path / "o"
        assert main(["paradox", "--theta", "pi/4", "--out", str(out)]) == 0
        rows = read_csv(out / "paradox.csv")
        assert len(rows) == 5
        by_key = {(r["label"], r["observable"]): float(r["theoretical"]) for r in rows}
        assert by_key[("01", "ZZ")] == -1.0
        assert by_key[("10", "ZZ")] == -1.0
        assert by_key[("01", "XX")] == 0.0
        assert by_key[("10", "XX")] == 0.0
        assert by_key[("00", "XX")] == pytest.approx(1.0)
        verdict = json.loads((out / "verdict.json").read_text())
        assert not verdict["lhv_feasible"]
        assert verdict["violation_gap"] == pytest.approx(1.0)
        assert "INFEASIBLE" in capsys.readouterr().out
        assert_manifest_complete(out)

    def test_simulated_run_files_and_estimates(self, tmp_path, fast_cfg, capsys):
        out = tmp_path / "o"
        code = main(
            [
                "paradox",
                "--mode",
                "simulated",
                "--config",
                fast_cfg,
                "--out",
                str(out),
            ]
        )
        assert code == 0
        manifest = assert_manifest_complete(out)
        count_files = [f for f in manifest["output_files"] if f.startswith("counts_")]
        assert len(count_files) == 5
        rows = read_csv(out / "paradox.csv")
        for row in rows:
            assert abs(float(row["estimate"]) - float(row["theoretical"])) < 0.12
            assert 0.0 <= float(row["std_err"]) < 0.1
            assert int(row["n_total"]) > 0
        verdict = json.loads((out / "verdict.json").read_text())
        assert verdict["p_value"] < 1e-10

    def test_count_csv_round_trips_to_the_reported_estimate(self, tmp_path, fast_cfg, capsys):
        out = tmp_path / "o"
        main(["paradox", "--mode", "simulated", "--config", fast_cfg, "--out", str(out)])
        manifest = manifest_of(out)
        cfg = ExperimentConfig(**manifest["config"])
        rows = {(r["label"], r["observable"]): r for r in read_csv(out / "paradox.csv")}
        # Stream tags follow constraint order: ZZ on 01 and 10, then the
        # transverse rows on 01, 10, 00.
        tags = {
            ("01", "ZZ"): 0,
            ("10", "ZZ"): 1,
            ("01", "XX"): 2,
            ("10", "XX"): 3,
            ("00", "XX"): 4,
        }
        for (label, obs), tag in tags.items():
            table = CountTable.from_csv(out / f"counts_{label}_{obs}.csv", cfg, stream_tag=tag)
            value, total = point_correlator(table, obs[0], obs[1])
            row = rows[(label, obs)]
            assert value == pytest.approx(float(row["estimate"]), abs=1e-12)
            assert total == int(row["n_total"])

    def test_simulated_outputs_are_deterministic(self, tmp_path, fast_cfg, capsys):
        args = ["paradox", "--mode", "simulated", "--config", fast_cfg]
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        assert main(args + ["--out", str(out_a)]) == 0
        assert main(args + ["--out", str(out_b)]) == 0
        for name in manifest_of(out_a)["output_files"]:
            if name == "manifest.json":
                continue
            assert filecmp.cmp(out_a / name, out_b / name, shallow=False), name


class TestGameCommand:
    def test_exact_default_grid(self, tmp_path, capsys):
        out = tmp_path / "o"
        assert main(["game", "--out", str(out)]) == 0
        rows = read_csv(out / "game.csv")
        assert [float(r["p_win"]) for r in rows] == pytest.approx(
            [0.5625, 0.5883883476483184, 0.6082531754730548, 0.625]
        )
        for row in rows:
            coherence_sum = sum(float(row[f"i_{a}{b}"]) for a in "01" for b in "01")
            assert coherence_sum == pytest.approx(0.0, abs=1e-12)
        assert_manifest_complete(out)

    def test_simulated_z_strategy(self, tmp_path, fast_cfg, capsys):
        out = tmp_path / "o"
        code = main(
            [
                "game",
                "--strategy",
                "z",
                "--mode",
                "simulated",
                "--theta-grid",
                "pi/4",
                "--config",
                fast_cfg,
                "--out",
                str(out),
            ]
        )
        assert code == 0
        (row,) = read_csv(out / "game.csv")
        assert float(row["p_win"]) == pytest.approx(0.625)
        # At unit visibility every ZZ count lands in an anticorrelated
        # cell, so the estimate is exact and the bootstrap spread is 0.
        assert float(row["p_win_estimate"]) == pytest.approx(0.625)
        assert float(row["p_win_std_err"]) == 0.0

    def test_simulated_x_strategy_has_real_spread(self, tmp_path, fast_cfg, capsys):
        out = tmp_path / "o"
        code = main(
            [
                "game",
                "--mode",
                "simulated",
                "--theta-grid",
                "pi/6",
                "--config",
                fast_cfg,
                "--out",
                str(out),
            ]
        )
        assert code == 0
        (row,) = read_csv(out / "game.csv")
        p_win = 0.5 + math.sin(2 * math.pi / 6) / 8.0
        assert float(row["p_win"]) == pytest.approx(p_win)
        assert abs(float(row["p_win_estimate"]) - p_win) < 0.05
        assert float(row["p_win_std_err"]) > 0.0


class TestDickeCommand:
    def test_n_three_matches_born_rule(self, tmp_path, capsys):
        out = tmp_path / "o"
        assert main(["dicke", "--n", "3", "--out", str(out)]) == 0
        rows = read_csv(out / "dicke.csv")
        assert len(rows) == 21
        finals = [r for r in rows if r["observable"].count("Z") == 0]
        for row in rows:
            if float(row["expected"]) == pytest.approx(2.0 / 3.0):
                assert float(row["born_value"]) == pytest.approx(2.0 / 3.0)
        text = capsys.readouterr().out
        assert "+0.666667" in text
        docs = json.loads((out / "dicke_specs.json").read_text())
        assert len(docs) == 3
        assert_manifest_complete(out)

    def test_n_four_shows_construction_gap(self, tmp_path, capsys):
        out = tmp_path / "o"
        assert main(["dicke", "--n", "4", "--out", str(out)]) == 0
        text = capsys.readouterr().out
        assert "advertises +0.750000" in text
        assert "(Born value +0.000000)" in text


class TestTomoCommand:
    def test_single_angle_run(self, tmp_path, fast_cfg, capsys):
        out = tmp_path / "o"
        code = main(
            [
                "tomo",
                "--states",
                "pi/4",
                "--bootstrap",
                "5",
                "--config",
                fast_cfg,
                "--out",
                str(out),
            ]
        )
        assert code == 0
        manifest = assert_manifest_complete(out)
        slug = "00_theta_0_785398"
        for name in (f"rho_{slug}.csv", f"rho_{slug}.json", "fidelities.csv"):
            assert name in manifest["output_files"]
        rows = read_csv(out / "fidelities.csv")
        assert [r["label"] for r in rows] == ["01", "00(theta=0.785398)", "10"]
        for row in rows:
            assert float(row["fidelity"]) > 0.99


class TestVisibilityCommand:
    def test_exact_scan_reports_config_visibility(self, tmp_path, capsys):
        out = tmp_path / "o"
        code = main(["visibility", "--visibility", "0.9", "--out", str(out)])
        assert code == 0
        doc = json.loads((out / "visibility.json").read_text())
        assert doc["visibility"] == pytest.approx(0.9, abs=1e-10)
        assert doc["exceeds_classical_bound"] is True
        assert doc["num_points"] == 25
        assert "exceeds" in capsys.readouterr().out
        assert_manifest_complete(out)

    def test_low_visibility_stays_within_bound(self, tmp_path, capsys):
        out = tmp_path / "o"
        assert main(["visibility", "--visibility", "0.6", "--out", str(out)]) == 0
        assert "is within" in capsys.readouterr().out


class TestReportCommand:
    def test_full_report_layout(self, tmp_path, fast_cfg, capsys):
        out = tmp_path / "o"
        code = main(
            ["report", "--config", fast_cfg, "--bootstrap", "5", "--out", str(out)]
        )
        assert code == 0
        manifest = assert_manifest_complete(out)
        files = manifest["output_files"]
        expected = {
            "manifest.json",
            "paradox_x.csv",
            "paradox_y.csv",
            "paradox_simulated.csv",
            "verdicts.json",
            "paradox_curve.csv",
            "game_x.csv",
            "game_z.csv",
            "game_curve.csv",
            "dicke.csv",
            "visibility_arm0.csv",
            "visibility_arm3pi4.csv",
            "visibility.json",
            "tomo/fidelities.csv",
        }
        assert expected <= set(files)
        assert sum(name.startswith("tomo/rho_") for name in files) == 12
        verdicts = json.loads((out / "verdicts.json").read_text())
        assert set(verdicts["exact"]) == {"X", "Y"}
        sim = verdicts["simulated"]["axis=X theta=pi/4"]
        assert not sim["lhv_feasible"]
        assert sim["p_value"] < 1e-6
        assert manifest["wall_clock_seconds"] > 0.0
