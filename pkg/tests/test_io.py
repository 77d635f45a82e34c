"""Config parsing, CSV round-trips, and run-manifest tests."""

import json
import math

import numpy as np
import pytest

from kickedspin.io import (OUTPUT_DIR_ENV, ConfigError, RunManifest,
                           apply_overrides, format_cell, load_config,
                           load_table, parse_config_text, parse_value,
                           resolve_output_dir, sha256_file, write_csv)


class TestParseValue:
    def test_scalars(self):
        assert parse_value("3") == 3 and isinstance(parse_value("3"), int)
        assert parse_value("0.25") == 0.25
        assert parse_value("1e-3") == 1e-3
        assert parse_value("pi") == math.pi
        assert parse_value("-pi") == -math.pi
        assert parse_value("reduced") == "reduced"

    def test_booleans(self):
        assert parse_value("true") is True
        assert parse_value("Yes") is True
        assert parse_value("off") is False

    def test_comma_list(self):
        assert parse_value("1, 2, 3") == [1, 2, 3]
        assert parse_value("0.1,pi") == [0.1, math.pi]

    def test_float_range_inclusive(self):
        got = parse_value("0.2:1.6:0.05")
        assert len(got) == 29
        assert got[0] == pytest.approx(0.2)
        assert got[-1] == pytest.approx(1.6)

    def test_int_range_stays_int(self):
        got = parse_value("2:8:2")
        assert got == [2, 4, 6, 8]
        assert all(isinstance(v, int) for v in got)

    def test_range_errors(self):
        with pytest.raises(ConfigError):
            parse_value("1:2")
        with pytest.raises(ConfigError):
            parse_value("1:2:0")
        with pytest.raises(ConfigError):
            parse_value("2:1:0.5")  # step walks away from stop
        with pytest.raises(ConfigError):
            parse_value("a:b:c")


class TestParseConfig:
    def test_comments_and_blanks(self):
        cfg = parse_config_text("""
            # preset header
            h = 0.1   # inline comment
            K = 0.3

            engine = dtwa
        """)
        assert cfg == {"h": 0.1, "K": 0.3, "engine": "dtwa"}

    def test_duplicate_key_reports_line(self):
        with pytest.raises(ConfigError, match="<config>:3: duplicate key 'h'"):
            parse_config_text("h = 1\nK = 2\nh = 3\n")

    def test_missing_value_and_missing_equals(self):
        with pytest.raises(ConfigError, match="no value"):
            parse_config_text("h =\n")
        with pytest.raises(ConfigError, match="expected key = value"):
            parse_config_text("just words\n")

    def test_bad_value_carries_position(self):
        with pytest.raises(ConfigError, match="conf:1"):
            parse_config_text("K = 1:2\n", source="conf")

    def test_load_config_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="cannot read"):
            load_config(tmp_path / "absent.cfg")

    def test_load_config_round_trip(self, tmp_path):
        p = tmp_path / "run.cfg"
        p.write_text("two_l = 2\ntau = 0.6\nphi = pi\n")
        assert load_config(p) == {"two_l": 2, "tau": 0.6, "phi": math.pi}


class TestOverrides:
    def test_override_wins_and_adds(self):
        cfg = {"h": 0.1, "N": 50}
        out = apply_overrides(cfg, ["h=0.2", "seed=7"])
        assert out == {"h": 0.2, "N": 50, "seed": 7}
        assert cfg["h"] == 0.1  # original untouched

    def test_malformed_override(self):
        with pytest.raises(ConfigError):
            apply_overrides({}, ["h"])
        with pytest.raises(ConfigError):
            apply_overrides({}, ["h="])


class TestOutputDir:
    def test_env_beats_key(self, tmp_path, monkeypatch):
        monkeypatch.setenv(OUTPUT_DIR_ENV, str(tmp_path / "env"))
        assert resolve_output_dir({"out_dir": "other"}) == tmp_path / "env"

    def test_key_beats_cwd(self, monkeypatch):
        monkeypatch.delenv(OUTPUT_DIR_ENV, raising=False)
        assert resolve_output_dir({"out_dir": "runs"}).name == "runs"

    def test_cwd_fallback(self, tmp_path, monkeypatch):
        monkeypatch.delenv(OUTPUT_DIR_ENV, raising=False)
        monkeypatch.chdir(tmp_path)
        assert resolve_output_dir({}) == tmp_path


class TestCsv:
    def test_format_cell(self):
        assert format_cell(True) == "true"
        assert format_cell(np.int64(4)) == "4"
        assert format_cell(0.1) == "0.10000000000000001"
        assert float(format_cell(1.0 / 3.0)) == 1.0 / 3.0

    def test_round_trip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(0)
        values = rng.standard_normal(40)
        path = tmp_path / "t.csv"
        write_csv(path, ["n", "value"],
                  [(i, v) for i, v in enumerate(values)])
        table = load_table(path)
        assert list(table) == ["n", "value"]
        np.testing.assert_array_equal(table["value"], values)
        np.testing.assert_array_equal(table["n"], np.arange(40.0))

    def test_width_mismatch(self, tmp_path):
        with pytest.raises(ValueError, match="row width"):
            write_csv(tmp_path / "bad.csv", ["a", "b"], [(1.0,)])

    def test_load_table_errors(self, tmp_path):
        p = tmp_path / "t.csv"
        p.write_text("a,b\n1.0\n")
        with pytest.raises(ConfigError, match="expected 2 cells"):
            load_table(p)
        p.write_text("a\nnot_a_number\n")
        with pytest.raises(ConfigError, match="non-numeric"):
            load_table(p)
        p.write_text("")
        with pytest.raises(ConfigError, match="empty table"):
            load_table(p)


class TestManifest:
    def test_json_round_trip(self, tmp_path):
        csv_path = tmp_path / "out.csv"
        write_csv(csv_path, ["n"], [(1,), (2,)])
        m = RunManifest(command="dtwa_evolve", engine="dtwa",
                        params={"h": 0.1, "two_l": np.int64(3)},
                        seed=1, version="0.1.0", wall_time_s=2.5,
                        outputs={"out.csv": sha256_file(csv_path)})
        mpath = tmp_path / "manifest.json"
        m.write(mpath)
        doc = json.loads(mpath.read_text())
        assert doc["command"] == "dtwa_evolve"
        assert doc["params"]["two_l"] == 3
        assert doc["outputs"]["out.csv"] == sha256_file(csv_path)

    def test_sha_tracks_content(self, tmp_path):
        p = tmp_path / "x.csv"
        p.write_text("a\n1\n")
        first = sha256_file(p)
        p.write_text("a\n2\n")
        assert sha256_file(p) != first
