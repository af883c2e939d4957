"""CLI behavior: config precedence, outputs, formats and exit codes."""

import json
import math
import textwrap

import pytest

import ambc
import ambc.ofdm
from ambc.cli import BER_HEADER, CliError, main, parse_snr_spec


def run_cli(*argv):
    return main(list(argv))


def read_rows(csv_path):
    lines = csv_path.read_text(encoding="utf-8").splitlines()
    return lines[0], [line.split(",") for line in lines[1:]]


class TestParseSnrSpec:
    def test_standard_grid(self):
        assert parse_snr_spec("0:2:14") == [0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0]

    def test_single_point(self):
        assert parse_snr_spec("4:4:4") == [4.0]

    def test_fractional_step(self):
        assert parse_snr_spec("0:0.5:1") == [0.0, 0.5, 1.0]

    def test_stop_not_on_grid_truncates(self):
        assert parse_snr_spec("0:3:7") == [0.0, 3.0, 6.0]

    @pytest.mark.parametrize("spec", ["0:2", "a:2:14", "0:0:4", "5:2:3", "1:2:3:4"])
    def test_malformed_specs_rejected(self, spec):
        with pytest.raises(CliError):
            parse_snr_spec(spec)


class TestBerCommand:
    def test_writes_csv_and_manifest(self, tmp_path, capsys):
        out = tmp_path / "out"
        rc = run_cli(
            "ber", "--out", str(out), "--snr-db", "2:2:4",
            "--trials", "600", "--seed", "5", "--stop-errors", "0",
        )
        assert rc == 0
        csv_path = out / "ber_0001.csv"
        manifest_path = out / "ber_0001_manifest.json"
        assert csv_path.exists() and manifest_path.exists()
        assert str(csv_path) in capsys.readouterr().out
        header, rows = read_rows(csv_path)
        assert header == BER_HEADER
        assert [r[0] for r in rows] == ["2.0", "4.0"]
        for row in rows:
            assert len(row) == 10
            assert int(row[1]) == 600
            assert int(row[2]) == 600 * 64

    def test_manifest_records_run(self, tmp_path):
        out = tmp_path / "out"
        run_cli(
            "ber", "--out", str(out), "--snr-db", "2:2:4",
            "--trials", "600", "--seed", "5", "--stop-errors", "0",
        )
        manifest = json.loads((out / "ber_0001_manifest.json").read_text())
        assert manifest["tool"] == "ambc"
        assert manifest["version"] == ambc.__version__
        assert manifest["command"] == "ber"
        assert manifest["master_seed"] == 5
        assert manifest["config"]["master_seed"] == 5
        assert manifest["config"]["snr_grid_db"] == [2.0, 4.0]
        assert manifest["config"]["trials_per_point"] == 600
        assert manifest["config"]["stop_at_errors"] is None
        assert manifest["outputs"] == [str(out / "ber_0001.csv")]
        assert manifest["started_utc"] <= manifest["finished_utc"]

    def test_reruns_get_fresh_numbered_stems(self, tmp_path):
        out = tmp_path / "out"
        args = ("ber", "--out", str(out), "--snr-db", "2:2:2", "--trials", "64")
        run_cli(*args)
        first_bytes = (out / "ber_0001.csv").read_bytes()
        run_cli(*args)
        assert (out / "ber_0002.csv").exists()
        assert (out / "ber_0001.csv").read_bytes() == first_bytes

    def test_svg_output(self, tmp_path):
        out = tmp_path / "out"
        rc = run_cli(
            "ber", "--out", str(out), "--snr-db", "2:2:4",
            "--trials", "64", "--svg",
        )
        assert rc == 0
        svg = out / "ber_0001.svg"
        assert svg.exists()
        assert b"<svg" in svg.read_bytes()
        manifest = json.loads((out / "ber_0001_manifest.json").read_text())
        assert str(svg) in manifest["outputs"]

    def test_worker_count_never_changes_results(self, tmp_path):
        common = ("--snr-db", "2:2:4", "--trials", "600", "--seed", "5",
                  "--stop-errors", "0")
        run_cli("ber", "--out", str(tmp_path / "serial"), "--jobs", "1", *common)
        run_cli("ber", "--out", str(tmp_path / "parallel"), "--jobs", "2", *common)
        serial = (tmp_path / "serial" / "ber_0001.csv").read_bytes()
        parallel = (tmp_path / "parallel" / "ber_0001.csv").read_bytes()
        assert serial == parallel

    def test_baseline_column_undefined_at_zero_db(self, tmp_path):
        out = tmp_path / "out"
        run_cli("ber", "--out", str(out), "--snr-db", "0:2:2", "--trials", "1")
        _, rows = read_rows(out / "ber_0001.csv")
        assert rows[0][9] == "nan"
        assert rows[1][9] != "nan"

    def test_index_modulation_has_no_closed_form_columns(self, tmp_path):
        out = tmp_path / "out"
        run_cli(
            "ber", "--out", str(out), "--modulation", "im",
            "--snr-db", "2:2:2", "--trials", "8",
        )
        _, rows = read_rows(out / "ber_0001.csv")
        assert rows[0][7] == "nan" and rows[0][8] == "nan"
        assert rows[0][9] != "nan"

    def test_config_file_with_flag_precedence(self, tmp_path):
        config = tmp_path / "run.yaml"
        config.write_text(
            textwrap.dedent(
                """
                master_seed: 123
                trials_per_point: 320
                snr_grid_db: [2.0]
                """
            )
        )
        out = tmp_path / "out"
        rc = run_cli("ber", "--config", str(config), "--out", str(out), "--seed", "7")
        assert rc == 0
        manifest = json.loads((out / "ber_0001_manifest.json").read_text())
        assert manifest["config"]["master_seed"] == 7
        assert manifest["config"]["trials_per_point"] == 320

    def test_unknown_config_key_fails_without_outputs(self, tmp_path, capsys):
        config = tmp_path / "run.yaml"
        config.write_text("bogus_knob: 1\n")
        out = tmp_path / "never"
        rc = run_cli("ber", "--config", str(config), "--out", str(out))
        assert rc == 2
        assert "unknown config key" in capsys.readouterr().err
        assert not out.exists()

    def test_nested_unknown_key_reports_path(self, tmp_path, capsys):
        config = tmp_path / "run.yaml"
        config.write_text("ofdm:\n  n_subcarrier: 32\n")
        rc = run_cli("ber", "--config", str(config), "--out", str(tmp_path / "x"))
        assert rc == 2
        assert "ofdm.n_subcarrier" in capsys.readouterr().err

    def test_unparseable_yaml_rejected(self, tmp_path):
        config = tmp_path / "run.yaml"
        config.write_text("snr_grid_db: [0.0, 2.0\n")
        assert run_cli("ber", "--config", str(config)) == 2

    def test_non_mapping_yaml_rejected(self, tmp_path):
        config = tmp_path / "run.yaml"
        config.write_text("- 1\n- 2\n")
        assert run_cli("ber", "--config", str(config)) == 2

    def test_missing_config_file_rejected(self, tmp_path):
        assert run_cli("ber", "--config", str(tmp_path / "absent.yaml")) == 2

    def test_bad_snr_flag_rejected(self, tmp_path, capsys):
        rc = run_cli("ber", "--out", str(tmp_path / "x"), "--snr-db", "5:2:3")
        assert rc == 2
        assert "error:" in capsys.readouterr().err

    def test_bad_trial_count_rejected(self, tmp_path):
        assert run_cli("ber", "--out", str(tmp_path / "x"), "--trials", "0") == 2

    def test_bad_modulation_in_config(self, tmp_path):
        config = tmp_path / "run.yaml"
        config.write_text("modulation: qam\n")
        assert run_cli("ber", "--config", str(config)) == 2


class TestCoverageCommand:
    def test_default_grid(self, tmp_path):
        out = tmp_path / "out"
        assert run_cli("coverage", "--out", str(out)) == 0
        header, rows = read_rows(out / "coverage_0001.csv")
        assert header == "q_b,c0,ratio"
        assert len(rows) == 100
        match = [r for r in rows if r[0] == "10" and r[1] == "1.0"]
        assert float(match[0][2]) == pytest.approx(math.sqrt(60.0), abs=1e-12)

    def test_reflector_cap_flag(self, tmp_path):
        out = tmp_path / "out"
        assert run_cli("coverage", "--out", str(out), "--qb", "5") == 0
        _, rows = read_rows(out / "coverage_0001.csv")
        assert len(rows) == 25
        assert {r[0] for r in rows} == {"1", "2", "3", "4", "5"}

    def test_manifest_has_no_seed(self, tmp_path):
        out = tmp_path / "out"
        run_cli("coverage", "--out", str(out))
        manifest = json.loads((out / "coverage_0001_manifest.json").read_text())
        assert manifest["master_seed"] is None
        assert manifest["command"] == "coverage"

    def test_nonpositive_direct_gain_rejected(self, tmp_path):
        config = tmp_path / "run.yaml"
        config.write_text("coverage:\n  c0_grid: [-1.0]\n")
        assert run_cli("coverage", "--config", str(config)) == 2

    def test_bad_reflector_cap_rejected(self, tmp_path):
        assert run_cli("coverage", "--out", str(tmp_path / "x"), "--qb", "0") == 2


class TestBriCommand:
    def test_full_table(self, tmp_path):
        out = tmp_path / "out"
        assert run_cli("bri", "--out", str(out)) == 0
        header, rows = read_rows(out / "bri_0001.csv")
        assert header == "k,eta_im,lambda_im,eta_ook,lambda_ook"
        assert len(rows) == 64
        assert rows[0][0] == "1" and rows[-1][0] == "64"

    def test_single_count_row(self, tmp_path):
        out = tmp_path / "out"
        assert run_cli("bri", "--out", str(out), "--k", "32") == 0
        _, rows = read_rows(out / "bri_0001.csv")
        assert rows == [["32", "60", "1.875", "64", "2.0"]]

    @pytest.mark.parametrize("k", ["0", "65"])
    def test_out_of_range_count_rejected(self, tmp_path, k):
        assert run_cli("bri", "--out", str(tmp_path / "x"), "--k", k) == 2


class TestSelftestCommand:
    def test_passes_cleanly(self, capsys):
        assert run_cli("selftest") == 0
        out = capsys.readouterr().out
        assert "ok   unitary transforms" in out
        assert "selftest passed" in out

    def test_detects_injected_regression(self, capsys, monkeypatch):
        monkeypatch.setattr(ambc.ofdm, "dft", lambda signal: signal)
        assert run_cli("selftest") == 1
        assert "FAIL" in capsys.readouterr().out


class TestParser:
    def test_requires_subcommand(self):
        with pytest.raises(SystemExit) as excinfo:
            main([])
        assert excinfo.value.code == 2

    def test_version_flag(self, capsys):
        with pytest.raises(SystemExit) as excinfo:
            main(["--version"])
        assert excinfo.value.code == 0
        assert f"ambc {ambc.__version__}" in capsys.readouterr().out
