"""
Tests for run configuration parsing, settings and the command-line surface
"""
import json
from math import pi
from pathlib import Path

import pytest

from pathid.app.config import Settings, settings, update_settings
from pathid.app.main import EXIT_DOMAIN, EXIT_OK, EXIT_VALIDATION, main
from pathid.app.run_config import parse_config
from pathid.core.errors import ConfigError, SpecValidationError
from pathid.core.model import PhaseConvention
from pathid.utils.serialization import SCAN_COLUMNS, dumps_record_csv, format_float, read_scan_csv, to_plain

RUNS = Path(__file__).parent / "config" / "runs"

THREE_SOURCES = {
    "sources": [
        {"label": "NL1", "yield_rate": 1.0},
        {"label": "NL2", "yield_rate": 1.0},
        {"label": "NL3", "yield_rate": 1.0},
    ]
}


def write_config(tmp_path, document, name="run.json"):
    path = tmp_path / name
    path.write_text(json.dumps(document), encoding="utf-8")
    return str(path)


def run_json(tmp_path, command, document, *extra):
    out = tmp_path / f"{command}.json"
    code = main([command, "--config", write_config(tmp_path, document), "--out", str(out), "--format", "json",
                 *extra])
    assert code == EXIT_OK
    return json.loads(out.read_text(encoding="utf-8"))


class TestParseConfig:
    def test_minimal(self, tmp_path):
        config = parse_config(write_config(tmp_path, {"interferometer": THREE_SOURCES}))
        spec = config.to_spec()
        assert spec.labels == ["NL1", "NL2", "NL3"]
        assert list(spec.yields) == [1.0, 1.0, 1.0]
        assert spec.is_coherent
        assert spec.phase_convention == PhaseConvention.ABSOLUTE

    def test_degrees_are_converted(self, tmp_path):
        document = {"units": "degrees", "interferometer": {"sources": [
            {"label": "NL1", "yield_rate": 1.0, "phase": 180, "leak_angle": 90},
        ]}}
        spec = parse_config(write_config(tmp_path, document)).to_spec()
        assert spec.phases[0] == pytest.approx(pi)
        assert spec.leak_angles[0] == pytest.approx(pi / 2)

    def test_yaml_accepted(self, tmp_path):
        path = tmp_path / "run.yaml"
        path.write_text("interferometer:\n  sources:\n    - {label: a, yield_rate: 4.0}\n", encoding="utf-8")
        assert parse_config(path).to_spec().yields[0] == 4.0

    def test_malformed_json_reports_line(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text('{\n  "units": "radians",\n  "interferometer": \n}\n', encoding="utf-8")
        with pytest.raises(ConfigError) as info:
            parse_config(path)
        assert info.value.line == 4

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            parse_config(tmp_path / "absent.json")

    def test_duplicate_labels(self, tmp_path):
        document = {"interferometer": {"sources": [{"label": "a", "yield_rate": 1.0}] * 2}}
        with pytest.raises(SpecValidationError):
            parse_config(write_config(tmp_path, document))

    def test_unknown_reference(self, tmp_path):
        document = {"interferometer": THREE_SOURCES, "scan": {"varying": ["NL9"]}}
        with pytest.raises(SpecValidationError):
            parse_config(write_config(tmp_path, document))

    def test_unknown_field(self, tmp_path):
        with pytest.raises(SpecValidationError):
            parse_config(write_config(tmp_path, {"interferometer": THREE_SOURCES, "colour": "blue"}))

    def test_negative_yield(self, tmp_path):
        document = {"interferometer": {"sources": [{"label": "a", "yield_rate": -1.0}]}}
        with pytest.raises(SpecValidationError):
            parse_config(write_config(tmp_path, document))

    def test_scan_defaults_follow_settings(self, tmp_path, monkeypatch):
        monkeypatch.setattr(settings, "SCAN_GRID_POINTS", 11)
        config = parse_config(write_config(tmp_path, {"interferometer": THREE_SOURCES,
                                                      "scan": {"varying": ["NL3"]}, "seed": 9}))
        scanspec = config.to_scanspec()
        assert scanspec.axes[0].steps == 11
        assert scanspec.axes[0].stop == pytest.approx(2 * pi)
        assert scanspec.rng_seed == 9

    def test_shipped_configs_parse(self):
        for path in sorted(RUNS.glob("*.json")):
            parse_config(path)


class TestSettings:
    def test_nested_update(self):
        target = Settings()
        update_settings({"scan": {"grid_points": 37}, "output": {"digits": 8}}, target=target)
        assert target.SCAN_GRID_POINTS == 37
        assert target.OUTPUT_DIGITS == 8

    def test_unknown_keys_ignored(self):
        target = Settings()
        update_settings({"nonsense": 1}, target=target)
        assert not hasattr(target, "NONSENSE")

    def test_environment_prefix(self, monkeypatch):
        monkeypatch.setenv("PATHID_SCAN_GRID_POINTS", "19")
        assert Settings().SCAN_GRID_POINTS == 19


class TestSerialization:
    def test_twelve_significant_digits(self):
        assert format_float(pi) == "3.14159265359"
        assert to_plain(2 * pi) == 6.28318530718

    def test_plain_values(self):
        assert to_plain({"z": 1 + 2j, "flag": True, "missing": float("nan")}) == {
            "z": {"re": 1.0, "im": 2.0}, "flag": True, "missing": None,
        }

    def test_record_csv(self):
        text = dumps_record_csv({"rate_hz": 9.0, "blocked": ["NL3"]})
        assert text.splitlines() == ["key,value", "rate_hz,9", 'blocked,"[""NL3""]"']


class TestCommands:
    def test_rate(self, tmp_path):
        document = run_json(tmp_path, "rate", {"interferometer": THREE_SOURCES})
        assert document["command"] == "rate"
        assert document["result"]["rate_hz"] == pytest.approx(9.0)
        assert document["metadata"]["settings"]["OUTPUT_DIGITS"] == 12
        assert "output" not in document["metadata"]["config"]

    def test_rate_to_stdout(self, tmp_path, capsys):
        code = main(["rate", "--config", write_config(tmp_path, {"interferometer": THREE_SOURCES})])
        assert code == EXIT_OK
        assert "rate_hz,9" in capsys.readouterr().out

    def test_two_dimensional_scan_csv(self, tmp_path):
        out = tmp_path / "scan.csv"
        assert main(["scan", "--config", str(RUNS / "balanced_scan_2d.json"), "--out", str(out)]) == EXIT_OK
        assert out.read_text(encoding="utf-8").splitlines()[0] == ",".join(SCAN_COLUMNS)
        rows = read_scan_csv(out)
        assert len(rows) == 73 * 73
        assert rows[0]["rate_hz"] == pytest.approx(9.0)
        assert rows[-1]["phase_a"] == pytest.approx(2 * pi)
        assert all(row["counts"] is None and row["sigma"] is None for row in rows)

    def test_one_dimensional_scan_visibility(self, tmp_path):
        document = {
            "units": "degrees",
            "interferometer": THREE_SOURCES,
            "scan": {"varying": ["NL3"], "fixed_phases": {"NL1": 120}, "axes": [{"steps": 721}]},
        }
        out = tmp_path / "scan.csv"
        assert main(["scan", "--config", write_config(tmp_path, document), "--out", str(out)]) == EXIT_OK
        rows = read_scan_csv(out)
        assert all(row["phase_c"] is None for row in rows)
        rates = [row["rate_hz"] for row in rows]
        assert (max(rates) - min(rates)) / (max(rates) + min(rates)) == pytest.approx(1.0, abs=1e-9)

    def test_counting_scan_is_deterministic(self, tmp_path):
        config = str(RUNS / "fringe_counts.json")
        first, second = tmp_path / "a.json", tmp_path / "b.json"
        assert main(["scan", "--config", config, "--out", str(first)]) == EXIT_OK
        assert main(["scan", "--config", config, "--out", str(second)]) == EXIT_OK
        assert first.read_bytes() == second.read_bytes()

        document = json.loads(first.read_text(encoding="utf-8"))
        assert len(document["rows"]) == 25
        assert all(isinstance(row["counts"], int) for row in document["rows"])
        assert document["result"]["seed"] == 20240517
        assert document["result"]["measured"]["visibility"] == pytest.approx(0.997, abs=0.05)

    def test_seed_override(self, tmp_path):
        config = str(RUNS / "fringe_counts.json")
        first, second = tmp_path / "a.json", tmp_path / "b.json"
        assert main(["scan", "--config", config, "--out", str(first)]) == EXIT_OK
        assert main(["scan", "--config", config, "--out", str(second), "--seed", "1"]) == EXIT_OK
        counts = [[row["counts"] for row in json.loads(path.read_text())["rows"]] for path in (first, second)]
        assert counts[0] != counts[1]

    def test_reported_seed_replays(self, tmp_path):
        document = {"interferometer": THREE_SOURCES,
                    "scan": {"varying": ["NL3"], "axes": [{"steps": 9}], "integration_time": 5.0}}
        drawn = run_json(tmp_path, "scan", document)
        seed = drawn["result"]["seed"]
        assert 0 <= seed < 2 ** 64
        replayed = run_json(tmp_path, "scan", {**document, "seed": seed})
        assert [row["counts"] for row in replayed["rows"]] == [row["counts"] for row in drawn["rows"]]

    def test_resolved_scan_is_echoed(self, tmp_path, monkeypatch):
        monkeypatch.setattr(settings, "SCAN_GRID_POINTS", 11)
        document = run_json(tmp_path, "scan", {"interferometer": THREE_SOURCES, "scan": {"varying": ["NL3"]}})
        assert document["metadata"]["config"]["scan"]["axes"][0]["steps"] is None
        assert document["metadata"]["scan"]["axes"][0]["steps"] == 11
        assert len(document["rows"]) == 11

    def test_one_config_drives_several_commands(self, tmp_path):
        config = write_config(tmp_path, {"interferometer": THREE_SOURCES,
                                         "grouping": {"blocks": [["NL1", "NL2"], ["NL3"]]},
                                         "scan": {"varying": ["NL3"], "axes": [{"steps": 5}]}})
        for command in ("rate", "duality", "scan"):
            assert main([command, "--config", config, "--out", str(tmp_path / f"{command}.csv")]) == EXIT_OK
        assert main(["opld", "--config", config]) == EXIT_VALIDATION

    def test_duality(self, tmp_path):
        out = tmp_path / "duality.json"
        assert main(["duality", "--config", str(RUNS / "duality_pi_pi.json"), "--out", str(out)]) == EXIT_OK
        result = json.loads(out.read_text())["result"]
        assert result["V"] == pytest.approx(0.0, abs=1e-12)
        assert result["D"] == pytest.approx(1.0)
        assert result["sum"] == pytest.approx(1.0)

    def test_gedanken(self, tmp_path):
        document = {"units": "degrees", "interferometer": {"sources": [
            {"label": "NL1", "yield_rate": 1.0, "phase": 180},
            {"label": "NL2", "yield_rate": 1.0},
            {"label": "NL3", "yield_rate": 1.0, "phase": 180},
        ]}}
        result = run_json(tmp_path, "gedanken", document)["result"]
        assert result["contradiction"] is True
        assert [p["attributed_to"] for p in result["perspectives"]] == [["NL3"], ["NL1"]]

    def test_block_with_counts(self, tmp_path):
        document = {
            "interferometer": THREE_SOURCES,
            "blocked": ["NL3"],
            "counts": {"cc_tot": 10000, "cc_when_last_blocked": 486, "cc_when_first_blocked": 359},
        }
        result = run_json(tmp_path, "block", document)["result"]
        assert result["rate_hz"] == pytest.approx(4.0)
        assert result["attribution"]["sum"] == pytest.approx(1.9155, abs=1e-4)
        assert result["attribution"]["contradiction"] is True

    def test_estimate_v13(self, tmp_path):
        out = tmp_path / "v13.json"
        assert main(["estimate-v13", "--config", str(RUNS / "estimate_v13.json"), "--out", str(out)]) == EXIT_OK
        result = json.loads(out.read_text())["result"]
        assert result["v13"] == pytest.approx(0.9724, abs=0.01)
        assert result["v13_fock"] == pytest.approx(result["v13"], abs=1e-11)

    def test_imperfect(self, tmp_path):
        document = {"imperfections": {"alignment": {"tilt": 0.1}, "tilt_anchor_angle": 0.1,
                                      "yield_ratios": [0.9, 1.0], "phase_fixed": 180},
                    "units": "degrees"}
        result = run_json(tmp_path, "imperfect", document)["result"]
        assert result["overlap"]["tilt"] == pytest.approx(0.97, abs=1e-9)
        assert result["imbalance"]["visibility"] == pytest.approx(0.1023, abs=5e-4)

    def test_opld(self, tmp_path):
        out = tmp_path / "opld.json"
        assert main(["opld", "--config", str(RUNS / "opld.json"), "--out", str(out), "--format", "json"]) == EXIT_OK
        assert "feasible" in json.loads(out.read_text())["result"]

    def test_schema(self, tmp_path):
        out = tmp_path / "schema.json"
        assert main(["schema", "--out", str(out)]) == EXIT_OK
        assert "interferometer" in json.loads(out.read_text())["properties"]


class TestExitCodes:
    def test_seed_override_is_validated(self, tmp_path):
        config = write_config(tmp_path, {"interferometer": THREE_SOURCES, "scan": {"varying": ["NL3"]}})
        assert main(["scan", "--config", config, "--seed", str(2 ** 64)]) == EXIT_VALIDATION
        assert main(["scan", "--config", config, "--seed", "-1"]) == EXIT_VALIDATION

    def test_missing_file(self, tmp_path):
        assert main(["rate", "--config", str(tmp_path / "absent.json")]) == EXIT_VALIDATION

    def test_duplicate_labels(self, tmp_path):
        document = {"interferometer": {"sources": [{"label": "a", "yield_rate": 1.0}] * 2}}
        assert main(["rate", "--config", write_config(tmp_path, document)]) == EXIT_VALIDATION

    def test_missing_block(self, tmp_path):
        assert main(["scan", "--config", write_config(tmp_path, {"interferometer": THREE_SOURCES})]) == EXIT_VALIDATION

    def test_incomplete_grouping(self, tmp_path):
        document = {"interferometer": THREE_SOURCES, "grouping": {"blocks": [["NL1"], ["NL2"]]}}
        assert main(["duality", "--config", write_config(tmp_path, document)]) == EXIT_VALIDATION

    def test_inconsistent_estimate(self, tmp_path):
        document = {"estimate": {"v12": 1.0, "v23": 1.0, "yields": [4.0, 1.0, 1.0]}}
        assert main(["estimate-v13", "--config", write_config(tmp_path, document)]) == EXIT_DOMAIN

    def test_partially_coherent_duality(self, tmp_path):
        document = {
            "interferometer": {"sources": [
                {"label": "NL1", "yield_rate": 1.0, "leak_angle": 0.3},
                {"label": "NL2", "yield_rate": 1.0},
            ]},
            "grouping": {"blocks": [["NL1"], ["NL2"]]},
        }
        assert main(["duality", "--config", write_config(tmp_path, document)]) == EXIT_DOMAIN
