"""Serialization round trips, config parsing, and the CLI surface."""

import json
import subprocess
import sys

import numpy as np
import pytest

from levymult import SampledField, SymbolSpec, evaluate_grid, gaussian_bump
from levymult.config import emit_config, parse_config
from levymult.errors import MeasureValidationError, ModulatorExceedsOne, ParseError
from levymult.gridio import (
    field_csv,
    read_field,
    read_symbol_grid,
    symbol_grid_csv,
    write_field,
    write_symbol_grid,
)


# ---------------------------------------------------------------------------
# binary + CSV formats
# ---------------------------------------------------------------------------


def test_symbol_grid_binary_round_trip(tmp_path):
    grid = evaluate_grid(SymbolSpec(variant="stable", alpha=0.7), L=20.0, N=128)
    path = tmp_path / "g.lmgrid"
    write_symbol_grid(path, grid)
    back = read_symbol_grid(path)
    assert back.d == grid.d and back.N == grid.N
    assert np.allclose(back.L, grid.L)
    assert np.array_equal(back.values, grid.values)
    assert path.read_bytes()[:8] == b"LMGRID1\x00"


def test_field_binary_round_trip(tmp_path):
    f = gaussian_bump(20.0, 64, 2, center=[0.5, -0.2], width=0.8,
                      phase_freq=[0.3, 0.0])
    path = tmp_path / "f.lmfield"
    write_field(path, f)
    back = read_field(path)
    assert np.array_equal(back.values, f.values)
    assert path.read_bytes()[:8] == b"LMFIELD1"


def test_bad_magic_rejected(tmp_path):
    path = tmp_path / "junk.bin"
    path.write_bytes(b"NOTMAGIC" + b"\x00" * 64)
    with pytest.raises(ParseError):
        read_field(path)


def test_symbol_csv_layout():
    grid = evaluate_grid(SymbolSpec(variant="stable", alpha=0.5), L=20.0, N=8)
    text = symbol_grid_csv(grid)
    lines = text.strip().split("\n")
    assert lines[0] == "xi_1,re_m,im_m"
    assert len(lines) == 9
    first = [float(v) for v in lines[1].split(",")]
    assert first[0] == pytest.approx(-4 * 2 * np.pi / 20.0)  # ascending frequencies


def test_field_csv_layout():
    f = SampledField(d=1, L=(4.0,), N=(4,), values=np.arange(4) + 1j)
    lines = field_csv(f).strip().split("\n")
    assert lines[0] == "x_1,re_f,im_f"
    assert [float(v) for v in lines[1].split(",")] == [-2.0, 0.0, 1.0]


# ---------------------------------------------------------------------------
# config
# ---------------------------------------------------------------------------

STABLE_CONFIG = """
{
  "dimensions": {"d": 1, "n": 1},
  "matrices": {"A": [[-1.0]], "B": [[1.0]]},
  "measure": {"variant": "stable", "alpha": 0.5},
  "modulator": {"phi": {"kind": "sign"}},
  "symbol": {"variant": "stable", "alpha": 0.5},
  "params": {"seed": 7, "paths": 500}
}
"""


def test_parse_minimal_stable_config():
    cfg = parse_config(STABLE_CONFIG)
    assert cfg.d == cfg.n == 1
    assert cfg.A[0, 0] == -1.0 and cfg.B[0, 0] == 1.0
    data = cfg.build_data()
    assert type(data.nu).__name__ == "StableMeasure"


def test_parse_round_trip():
    cfg = parse_config(STABLE_CONFIG)
    again = parse_config(emit_config(cfg))
    assert again.raw == cfg.raw
    assert emit_config(again) == emit_config(cfg)


def test_unknown_key_named():
    with pytest.raises(ParseError, match="fooo"):
        parse_config('{"fooo": 1}')


def test_nested_unknown_key_named():
    with pytest.raises(ParseError, match="warp"):
        parse_config('{"params": {"warp": 9}}')


def test_syntax_error_carries_position():
    with pytest.raises(ParseError) as err:
        parse_config('{"dimensions": {"d": 1,}}')
    assert err.value.line is not None


def test_config_oversized_table_rejected():
    bad = json.loads(STABLE_CONFIG)
    bad["measure"] = {"variant": "atoms", "atoms": [[1.0]], "weights": [1.0]}
    bad["modulator"] = {"phi": {"kind": "table", "table": [[1.5, 0.0]]}}
    with pytest.raises(ModulatorExceedsOne):
        parse_config(json.dumps(bad))


def test_config_invalid_measure_rejected():
    bad = json.loads(STABLE_CONFIG)
    bad["measure"] = {"variant": "atoms", "atoms": [[0.0]], "weights": [1.0]}
    with pytest.raises(MeasureValidationError):
        parse_config(json.dumps(bad))


# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------


def _run_cli(args, tmp_path):
    return subprocess.run(
        [sys.executable, "-m", "levymult.cli", *args],
        capture_output=True, text=True, cwd=tmp_path,
    )


@pytest.fixture
def stable_cfg_file(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(STABLE_CONFIG)
    return path


def test_cli_symbol_writes_artifacts(tmp_path, stable_cfg_file):
    res = _run_cli(["symbol", "--config", str(stable_cfg_file), "--out", "run1"],
                   tmp_path)
    assert res.returncode == 0, res.stdout + res.stderr
    out = tmp_path / "run1"
    assert (out / "symbol.csv").exists()
    assert (out / "symbol.lmgrid").exists()
    assert (out / "config.echo.json").exists()
    last = json.loads(res.stdout.strip().split("\n")[-1])
    assert last["status"] == "ok"
    # every |m| entry in the CSV stays below 1
    rows = (out / "symbol.csv").read_text().strip().split("\n")[1:]
    mags = [abs(complex(float(r.split(",")[1]), float(r.split(",")[2])))
            for r in rows]
    assert max(mags) < 1.0


def test_cli_symbol_deterministic_output(tmp_path, stable_cfg_file):
    _run_cli(["symbol", "--config", str(stable_cfg_file), "--out", "a"], tmp_path)
    _run_cli(["symbol", "--config", str(stable_cfg_file), "--out", "b"], tmp_path)
    assert (tmp_path / "a/symbol.csv").read_bytes() == \
        (tmp_path / "b/symbol.csv").read_bytes()


def test_cli_probe_p2_passes(tmp_path):
    cfg = json.loads(STABLE_CONFIG)
    cfg["grid"] = {"length": 20.0, "points": 256}
    cfg["params"].update({"p": [2.0], "trials": 40, "ascent_steps": 20})
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    res = _run_cli(["probe", "--config", str(path), "--out", "pr"], tmp_path)
    assert res.returncode == 0, res.stdout
    text = (tmp_path / "pr/probe.csv").read_text()
    assert text.startswith("p,bound,best_ratio,trials,seed,pass")
    assert ",true" in text


def test_cli_mc_small_run(tmp_path):
    cfg = json.loads(STABLE_CONFIG)
    cfg["matrices"] = {"A": [[1.0]], "B": [[1.0]]}
    cfg["measure"] = {"variant": "atoms", "atoms": [[1.0]], "weights": [1.0]}
    cfg["modulator"] = {"phi": {"kind": "constant", "value": [1.0, 0.0]}}
    cfg["symbol"] = {"variant": "q_form"}
    cfg["grid"] = {"length": 40.0, "points": 512}
    cfg["field"] = {"kind": "gaussian", "center": [0.5], "width": 0.9}
    cfg["params"].update({"paths": 6000, "seed": 5})
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    res = _run_cli(["mc", "--config", str(path), "--out", "mc"], tmp_path)
    assert res.returncode == 0, res.stdout + res.stderr
    last = json.loads(res.stdout.strip().split("\n")[-1])
    assert last["status"] == "ok"
    assert (tmp_path / "mc/mc_report.csv").exists()


def test_cli_error_reports_reason_on_last_line(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"fooo": 1}')
    res = _run_cli(["symbol", "--config", str(path)], tmp_path)
    assert res.returncode == 2
    last = json.loads(res.stdout.strip().split("\n")[-1])
    assert last["status"] == "error"
    assert "fooo" in last["message"]


def test_cli_flag_overrides(tmp_path, stable_cfg_file):
    res = _run_cli(["symbol", "--config", str(stable_cfg_file), "--seed", "99",
                    "--out", "ov"], tmp_path)
    assert res.returncode == 0
    echo = json.loads((tmp_path / "ov/config.echo.json").read_text())
    assert echo["params"]["seed"] == 7   # echo carries the file's config verbatim


def test_cli_gaussian_mc_small_run(tmp_path):
    cfg = json.loads(STABLE_CONFIG)
    cfg["matrices"] = {"A": [[1.0]], "B": [[1.0]]}
    cfg["measure"] = {"variant": "atoms", "atoms": [[1.0]], "weights": [1.0]}
    cfg["modulator"] = {"phi": {"kind": "constant", "value": [1.0, 0.0]}}
    cfg["symbol"] = {"variant": "gaussian", "K": [[[1.0, 0.0]]]}
    cfg["grid"] = {"length": 40.0, "points": 512}
    cfg["field"] = {"kind": "gaussian", "center": [0.4], "width": 0.9}
    cfg["params"].update({"paths": 600, "steps": 240, "seed": 3, "var_scale": 0.5})
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    res = _run_cli(["gaussian-mc", "--config", str(path), "--out", "gmc"], tmp_path)
    assert res.returncode == 0, res.stdout + res.stderr
    assert (tmp_path / "gmc/gaussian_mc_report.csv").exists()


def test_cli_pair_and_apply(tmp_path, stable_cfg_file):
    res = _run_cli(["apply", "--config", str(stable_cfg_file), "--out", "ap"],
                   tmp_path)
    assert res.returncode == 0
    assert (tmp_path / "ap/applied.lmfield").exists()
    res = _run_cli(["pair", "--config", str(stable_cfg_file), "--out", "pr"],
                   tmp_path)
    assert res.returncode == 0
    text = (tmp_path / "pr/pairing.csv").read_text()
    assert text.startswith("route,re,im")


def test_selftest_suite_all_green(capsys):
    from levymult import selftest
    assert selftest.run_all()
    out = capsys.readouterr().out
    assert "[FAIL]" not in out
    assert out.count("[PASS]") == len(selftest.ALL_CHECKS)
