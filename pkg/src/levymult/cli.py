"""Command-line surface: one config file per run, scalar flag overrides.

    levymult <command> --config <path> [--seed N] [--paths N] [--out DIR]

Commands: symbol, apply, pair, probe, mc, gaussian-mc, selftest.  Every
run echoes its defaults-filled config into the output directory, writes
CSV (and binary, where applicable) artifacts, and exits nonzero on any
failure with a machine-readable JSON reason on the last line.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .config import emit_config, parse_config
from .errors import LevyMultError
from .gridio import (
    field_csv,
    probe_report_csv,
    symbol_grid_csv,
    write_field,
    write_symbol_grid,
)
from .mc import (
    brownian_pairing,
    estimate_pairing,
    gaussian_spectral_value,
    spectral_pairing_value,
)
from .spectral import apply_multiplier, norm_probe, pairing
from .symbols import evaluate_grid
from . import selftest as selftest_mod


def _outdir(cfg, override):
    path = Path(override or cfg.output_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _echo_config(cfg, out: Path):
    (out / "config.echo.json").write_text(emit_config(cfg))


def _grid(cfg):
    return evaluate_grid(cfg.build_symbol_spec(), L=cfg.grid_length, N=cfg.grid_points)


def cmd_symbol(cfg, out):
    grid = _grid(cfg)
    (out / "symbol.csv").write_text(symbol_grid_csv(grid))
    write_symbol_grid(out / "symbol.lmgrid", grid)
    print(f"max |m| = {grid.max_abs:.12g} at xi = {grid.argmax_xi}")
    return grid.max_abs <= 1.0 + 1e-9, {"max_abs": grid.max_abs}


def cmd_apply(cfg, out):
    grid = _grid(cfg)
    f = cfg.build_field("field")
    mf = apply_multiplier(grid, f)
    (out / "applied.csv").write_text(field_csv(mf))
    write_field(out / "applied.lmfield", mf)
    print(f"wrote applied field, sup |Mf| = {np.abs(mf.values).max():.12g}")
    return True, {}


def cmd_pair(cfg, out):
    grid = _grid(cfg)
    f = cfg.build_field("field")
    g = cfg.build_field("field_g")
    res = pairing(grid, f, g)
    rows = ["route,re,im",
            f"spatial,{res.spatial.real:.17g},{res.spatial.imag:.17g}",
            f"spectral,{res.spectral.real:.17g},{res.spectral.imag:.17g}"]
    (out / "pairing.csv").write_text("\n".join(rows) + "\n")
    print(f"pairing spatial  = {res.spatial}")
    print(f"pairing spectral = {res.spectral}")
    return True, {"spatial": [res.spatial.real, res.spatial.imag]}


def cmd_probe(cfg, out, seed):
    grid = _grid(cfg)
    reports = []
    ok = True
    for p in cfg.params["p"]:
        rep = norm_probe(grid, float(p), trials=int(cfg.params["trials"]),
                         seed=seed, ascent_steps=int(cfg.params["ascent_steps"]))
        reports.append(rep)
        ok &= rep.passed
        print(f"[{'PASS' if rep.passed else 'FAIL'}] p={p}: best ratio "
              f"{rep.best_ratio:.6f} vs bound {rep.bound:.6f}")
    (out / "probe.csv").write_text(probe_report_csv(reports))
    return ok, {"worst": max(r.best_ratio / r.bound for r in reports)}


def cmd_mc(cfg, out, seed, paths):
    data = cfg.build_data()
    mod = cfg.build_modulator()
    f = cfg.build_field("field")
    g = cfg.build_field("field_g")
    block = int(cfg.params["block_size"]) or None
    est = estimate_pairing(f, g, data, mod, paths, seed,
                           sub_stride=int(cfg.params["sub_stride"]), block_size=block)
    ref = spectral_pairing_value(f, g, data, mod)
    ok_spec = est.agrees_with(ref)
    ok_routes = est.routes_agree()
    rows = [
        "quantity,re,im,se_re,se_im",
        f"mc_endpoint,{est.estimate.real:.17g},{est.estimate.imag:.17g},"
        f"{est.stderr.real:.17g},{est.stderr.imag:.17g}",
        f"mc_covariation,{est.cov_estimate.real:.17g},{est.cov_estimate.imag:.17g},"
        f"{est.cov_stderr.real:.17g},{est.cov_stderr.imag:.17g}",
        f"spectral,{ref.real:.17g},{ref.imag:.17g},0,0",
    ]
    (out / "mc_report.csv").write_text("\n".join(rows) + "\n")
    print(f"MC endpoint    = {est.estimate} +- {est.stderr}")
    print(f"MC covariation = {est.cov_estimate} +- {est.cov_stderr}")
    print(f"spectral       = {ref}")
    print(f"[{'PASS' if ok_spec else 'FAIL'}] MC vs spectral within 3 standard errors")
    print(f"[{'PASS' if ok_routes else 'FAIL'}] endpoint vs covariation routes agree")
    return ok_spec and ok_routes, {"mc": [est.estimate.real, est.estimate.imag],
                                   "spectral": [ref.real, ref.imag]}


def cmd_gaussian_mc(cfg, out, seed, paths):
    f = cfg.build_field("field")
    g = cfg.build_field("field_g")
    spec = cfg.build_symbol_spec()
    if spec.variant not in ("gaussian", "gaussian_limit"):
        raise LevyMultError("gaussian-mc needs a gaussian symbol variant in the config")
    var_scale = float(cfg.params["var_scale"])
    est = brownian_pairing(f, g, cfg.A, cfg.B, spec.K, paths,
                           int(cfg.params["steps"]), seed, var_scale=var_scale,
                           sub_stride=int(cfg.params["sub_stride"]))
    ref = gaussian_spectral_value(f, g, cfg.A, cfg.B, spec.K, var_scale=var_scale)
    from .mc import within_sigmas

    ok = within_sigmas(est.estimate, est.stderr, ref)
    rows = [
        "quantity,re,im,se_re,se_im",
        f"mc_endpoint,{est.estimate.real:.17g},{est.estimate.imag:.17g},"
        f"{est.stderr.real:.17g},{est.stderr.imag:.17g}",
        f"mc_covariation,{est.cov_estimate.real:.17g},{est.cov_estimate.imag:.17g},"
        f"{est.cov_stderr.real:.17g},{est.cov_stderr.imag:.17g}",
        f"spectral,{ref.real:.17g},{ref.imag:.17g},0,0",
    ]
    (out / "gaussian_mc_report.csv").write_text("\n".join(rows) + "\n")
    print(f"MC endpoint = {est.estimate} +- {est.stderr}  (steps={est.steps})")
    print(f"spectral    = {ref}")
    print(f"[{'PASS' if ok else 'FAIL'}] Brownian MC vs spectral within 3 standard errors")
    return ok, {"mc": [est.estimate.real, est.estimate.imag]}


def cmd_selftest(cfg, out):
    lines = []

    def sink(msg):
        print(msg)
        lines.append(msg)

    ok = selftest_mod.run_all(sink)
    (out / "selftest.txt").write_text("\n".join(lines) + "\n")
    return ok, {"checks": len(lines)}


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="levymult",
        description="Non-symmetric multiplier symbols, spectral application, "
                    "and Monte-Carlo verification.")
    parser.add_argument("command", choices=["symbol", "apply", "pair", "probe",
                                            "mc", "gaussian-mc", "selftest"])
    parser.add_argument("--config", required=True, help="path to the JSON config")
    parser.add_argument("--seed", type=int, default=None, help="override params.seed")
    parser.add_argument("--paths", type=int, default=None, help="override params.paths")
    parser.add_argument("--out", default=None, help="override output_dir")
    args = parser.parse_args(argv)

    try:
        cfg = parse_config(Path(args.config).read_text())
        out = _outdir(cfg, args.out)
        _echo_config(cfg, out)
        seed = args.seed if args.seed is not None else int(cfg.params["seed"])
        paths = args.paths if args.paths is not None else int(cfg.params["paths"])

        if args.command == "symbol":
            ok, info = cmd_symbol(cfg, out)
        elif args.command == "apply":
            ok, info = cmd_apply(cfg, out)
        elif args.command == "pair":
            ok, info = cmd_pair(cfg, out)
        elif args.command == "probe":
            ok, info = cmd_probe(cfg, out, seed)
        elif args.command == "mc":
            ok, info = cmd_mc(cfg, out, seed, paths)
        elif args.command == "gaussian-mc":
            ok, info = cmd_gaussian_mc(cfg, out, seed, paths)
        else:
            ok, info = cmd_selftest(cfg, out)
    except LevyMultError as exc:
        print(json.dumps({"status": "error", "code": type(exc).__name__,
                          "message": str(exc)}))
        return 2
    except OSError as exc:
        print(json.dumps({"status": "error", "code": "OSError", "message": str(exc)}))
        return 2

    print(json.dumps({"status": "ok" if ok else "fail", "command": args.command,
                      **info}))
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
