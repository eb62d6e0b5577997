import hashlib
import json

import pytest

from fputkin.cli import EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, EXIT_OUTPUT, ConfigError, main, parse_config


def write_config(tmp_path, payload, name="run.json"):
    path = tmp_path / name
    path.write_text(payload if isinstance(payload, str) else json.dumps(payload))
    return str(path)


PREDICT = {"params": {"N": 16}, "spectrum": "default", "options": {"t": 1.0}}


def test_predict_run_writes_results_and_manifest(tmp_path):
    out = tmp_path / "out"
    assert main(["predict", "--config", write_config(tmp_path, PREDICT), "--out", str(out)]) == EXIT_OK
    manifest = json.loads((out / "manifest.json").read_text())
    assert set(manifest["files"]) == {"predictor.csv"}
    digest = hashlib.sha256((out / "predictor.csv").read_bytes()).hexdigest()
    assert manifest["files"]["predictor.csv"] == digest
    assert manifest["config"]["params"]["N"] == 16 and manifest["threads"] == 1


def test_repeated_runs_are_byte_identical(tmp_path):
    cfg = write_config(tmp_path, PREDICT)
    for name in ("a", "b"):
        assert main(["predict", "--config", cfg, "--out", str(tmp_path / name), "--format", "json"]) == EXIT_OK
    assert (tmp_path / "a" / "predictor.json").read_bytes() == (tmp_path / "b" / "predictor.json").read_bytes()


def test_count_with_json_format(tmp_path):
    cfg = {"options": {"N_list": [16], "T_exponents": [0.5], "k_cells": 2, "m_cells": 3}}
    out = tmp_path / "out"
    assert main(["count", "--config", write_config(tmp_path, cfg), "--out", str(out), "--format", "json"]) == EXIT_OK
    tables = [p for p in out.iterdir() if p.name != "manifest.json"]
    assert tables and all(p.suffix == ".json" for p in tables)
    rows = json.loads(tables[0].read_text())["rows"]
    assert rows and all(row[0] == 16 for row in rows)


@pytest.mark.parametrize(
    "payload",
    [
        "",
        "{not json",
        {"params": {"N": 16, "size": 3}},
        {"colour": "red"},
        {"options": {"t": 1.0, "speed": 2}},
        {"spectrum": "no-such-profile"},
        {"params": {"N": 1}},
    ],
)
def test_invalid_configs_exit_with_config_error(tmp_path, payload):
    out = tmp_path / "out"
    assert main(["predict", "--config", write_config(tmp_path, payload), "--out", str(out)]) == EXIT_CONFIG
    assert not out.exists()


def test_bad_command_line_values(tmp_path):
    assert main(["nonsense"]) == EXIT_CONFIG
    assert main(["predict", "--threads", "0", "--out", str(tmp_path / "o")]) == EXIT_CONFIG
    assert main(["predict", "--seed", str(2**64), "--out", str(tmp_path / "o")]) == EXIT_CONFIG
    assert main(["predict", "--config", str(tmp_path / "missing.json")]) == EXIT_CONFIG


def test_numerical_failure_exit_code(tmp_path):
    cfg = {"params": {"N": 16}, "spectrum": "bump", "options": {"t_end": 60.0, "dt": 60.0, "method": "sinc_broadened", "nodes": 12}}
    assert main(["wke", "--config", write_config(tmp_path, cfg), "--out", str(tmp_path / "o")]) == EXIT_NUMERICAL


def test_unwritable_output_exit_code(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["predict", "--config", write_config(tmp_path, PREDICT), "--out", str(blocker / "sub")]) == EXIT_OUTPUT


def test_parse_config_fills_defaults_and_seed_override():
    cfg = parse_config({"params": {"N": 8}}, "diagram", seed=5, fmt="json")
    assert cfg.params.N == 8 and cfg.params.seed == 5 and cfg.format == "json"
    assert cfg.options["order"] == 2
    with pytest.raises(ConfigError):
        parse_config({"spectrum": {"table": [1.0, 2.0]}}, "predict")
