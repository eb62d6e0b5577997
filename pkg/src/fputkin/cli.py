"""Command-line front end.

Usage::

    python3 -m fputkin <command> [--config run.json] [--out DIR] [--threads N]
                                 [--seed S] [--format csv|json]

Commands: ``simulate``, ``predict``, ``wke``, ``count``, ``diagram`` and
``compare``.  The JSON config has the top-level keys ``command``,
``params``, ``spectrum``, ``options`` and ``format``; unknown keys are
rejected before anything runs.  Exit codes: 0 success, 2 invalid config,
3 numerical failure, 4 unwritable output.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import export
from .errors import FputKinError, InvalidParameter, SerializationError
from .model import PROFILES, SimParams, sample_initial_data, spectrum_on_grid

COMMANDS = ("simulate", "predict", "wke", "count", "diagram", "compare")
FORMATS = ("csv", "json")
EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OUTPUT = 0, 2, 3, 4

PARAM_KEYS = {"N", "gamma", "kappa", "mass", "epsilon", "T", "seed", "dist", "beta_override"}
TOP_KEYS = {"command", "params", "spectrum", "options", "format"}

# allowed option keys and their defaults, per command
OPTION_DEFAULTS: dict[str, dict] = {
    "simulate": {"t_end": None, "t_over_T_kin": 0.01, "snapshots": 2, "samples": 1, "dt": None, "method": "fft"},
    "predict": {"t": None, "t_over_T_kin": 0.01, "form": "stated", "shift_order": None},
    "wke": {"t_end": 0.01, "nodes": 16, "method": "level_set", "dt": None},
    "count": {"N_list": [64, 128, 256], "T_exponents": [0.5, 0.8], "k_cells": 32, "m_cells": 21, "sets": ["S3", "S2+", "S2-"]},
    "diagram": {"order": 2, "with_degeneracies": True, "kernels": False, "k": None, "t": 0.5, "s": None, "shift_order": None, "dot": False},
    "compare": {"samples": 200, "t_over_T_kin": 0.01, "form": "stated", "collision_method": "level_set", "sing_tol": 1e-4, "dt": None, "batch": 100},
}

DEFAULT_PARAMS = {
    "simulate": {"N": 64},
    "predict": {"N": 64},
    "wke": {"N": 64},
    "count": {"N": 64},
    "diagram": {"N": 8},
    "compare": {"N": 64},
}


class ConfigError(FputKinError):
    """Schema violations in a run configuration."""


@dataclass
class RunConfig:
    command: str
    params: SimParams
    spectrum: object  # profile name or array of grid values
    spectrum_echo: object
    options: dict
    format: str = "csv"
    echo: dict = field(default_factory=dict)


def _check_keys(section: str, data: dict, allowed: set) -> None:
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) in {section}: {', '.join(unknown)}")


def parse_config(raw: dict | None, command: str, seed: int | None = None, fmt: str | None = None) -> RunConfig:
    """Validate a config mapping for ``command``; raises :class:`ConfigError`."""
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}")
    raw = {} if raw is None else raw
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    _check_keys("config", raw, TOP_KEYS)
    if "command" in raw and raw["command"] != command:
        raise ConfigError(f"config is for {raw['command']!r}, not {command!r}")
    params_raw = raw.get("params", {})
    if not isinstance(params_raw, dict):
        raise ConfigError("params must be an object")
    _check_keys("params", params_raw, PARAM_KEYS)
    merged = dict(DEFAULT_PARAMS[command])
    merged.update(params_raw)
    if seed is not None:
        merged["seed"] = seed
    try:
        params = SimParams(**merged)
    except (InvalidParameter, TypeError) as exc:
        raise ConfigError(f"invalid params: {exc}") from exc
    spectrum_raw = raw.get("spectrum", "default")
    if isinstance(spectrum_raw, str):
        if spectrum_raw not in PROFILES:
            raise ConfigError(f"unknown spectrum profile {spectrum_raw!r}")
        spectrum = spectrum_raw
    elif isinstance(spectrum_raw, dict):
        _check_keys("spectrum", spectrum_raw, {"table"})
        if "table" not in spectrum_raw:
            raise ConfigError("spectrum object needs a 'table' of N-1 values")
        spectrum = np.asarray(spectrum_raw["table"], dtype=float)
    else:
        raise ConfigError("spectrum must be a profile name or {'table': [...]}")
    try:
        spectrum_on_grid(spectrum, params.grid)
    except InvalidParameter as exc:
        raise ConfigError(f"invalid spectrum: {exc}") from exc
    options_raw = raw.get("options", {})
    if not isinstance(options_raw, dict):
        raise ConfigError("options must be an object")
    _check_keys(f"options for {command}", options_raw, set(OPTION_DEFAULTS[command]))
    options = dict(OPTION_DEFAULTS[command])
    options.update(options_raw)
    fmt = fmt or raw.get("format", "csv")
    if fmt not in FORMATS:
        raise ConfigError(f"format must be one of {FORMATS}")
    echo = {
        "command": command,
        "params": {k: getattr(params, k) for k in sorted(PARAM_KEYS)},
        "spectrum": spectrum_raw,
        "options": options,
        "format": fmt,
    }
    return RunConfig(command, params, spectrum, spectrum_raw, options, fmt, echo)


# -- commands ----------------------------------------------------------------------------


def _physical_time(params: SimParams, t, t_over_T_kin) -> float:
    return float(t) if t is not None else float(t_over_T_kin) * params.T_kin


def _shift(params, spectrum, order):
    from .renormalization import solve_frequency_shift

    return None if order is None else solve_frequency_shift(spectrum, params, int(order))


def run_simulate(cfg: RunConfig, threads: int) -> dict:
    from .simulator import ensemble_spectrum, evolve, max_stable_dt

    p, o = cfg.params, cfg.options
    t_end = _physical_time(p, o["t_end"], o["t_over_T_kin"])
    times = np.linspace(0.0, t_end, max(2, int(o["snapshots"])))
    k = p.grid.points
    n = spectrum_on_grid(cfg.spectrum, p.grid)
    dt = o["dt"]
    if dt is None:
        dt = min(max_stable_dt(p, float(np.max(n)) * 10.0), 0.1 / p.frequency_scale)
    if int(o["samples"]) <= 1:
        b0 = sample_initial_data(cfg.spectrum, p, 0)
        traj = evolve(b0, t_end, dt, p, times, method=o["method"], check_dt=False)
        return {"trajectory": export.trajectory_table(traj.times, traj.snapshots, k)}
    ens = ensemble_spectrum(cfg.spectrum, p, int(o["samples"]), times, dt=dt, threads=threads, method=o["method"])
    return {"ensemble": export.ensemble_table(ens.times, ens.mean, ens.stderr, k, ens.samples)}


def run_predict(cfg: RunConfig, threads: int) -> dict:
    from .kinetic import second_order_predictor

    p, o = cfg.params, cfg.options
    t = _physical_time(p, o["t"], o["t_over_T_kin"])
    shift = _shift(p, cfg.spectrum, o["shift_order"])
    res = second_order_predictor(cfg.spectrum, t, shift, p, form=o["form"])
    n = spectrum_on_grid(cfg.spectrum, p.grid)
    rows = [[float(a), float(b), float(c), float(d)] for a, b, c, d in zip(res.k, n, res.values, res.resonant)]
    return {"predictor": export.Table("predictor", rows)}


def run_wke(cfg: RunConfig, threads: int) -> dict:
    from .kinetic import wke_solve

    p, o = cfg.params, cfg.options
    nodes = np.linspace(0.0, 1.0, int(o["nodes"]) + 2)[1:-1]
    profile = PROFILES[cfg.spectrum] if isinstance(cfg.spectrum, str) else None
    if profile is None:
        from .kinetic import SpectrumInterpolant

        profile = SpectrumInterpolant.from_grid(spectrum_on_grid(cfg.spectrum, p.grid), p.N, p)
    res = wke_solve(profile, float(o["t_end"]), p, nodes=nodes, method=o["method"], dt=o["dt"])
    rows = [[float(t), float(x), float(v)] for t, spec in zip(res.times, res.spectra) for x, v in zip(res.nodes, spec)]
    totals = [[float(t), float(a), float(e)] for t, a, e in zip(res.times, res.action, res.energy)]
    return {"wke": export.Table("wke", rows), "wke_totals": export.Table("wke_totals", totals)}


def run_count(cfg: RunConfig, threads: int) -> dict:
    from .counting import bound_ratio_scan, default_m_grid

    o = cfg.options
    scan = bound_ratio_scan(
        N_list=tuple(int(x) for x in o["N_list"]),
        T_exponents=tuple(float(x) for x in o["T_exponents"]),
        k_cells=int(o["k_cells"]),
        m_grid=default_m_grid(int(o["m_cells"])),
        sets=tuple(o["sets"]),
    )
    rows = [rep.row() for row in scan for rep in row.reports]
    rows = [[int(r[0]), float(r[1]), float(r[2]), float(r[3]), r[4], int(r[5]), float(r[6]), float(r[7]), float(r[8])] for r in rows]
    return {"counting": export.Table("counting", rows)}


def run_diagram(cfg: RunConfig, threads: int) -> dict:
    from .diagrams.couples import enumerate_couples
    from .diagrams.kernel import evaluate_couple_kernel
    from .diagrams.molecules import molecule_from_couple

    p, o = cfg.params, cfg.options
    couples = sorted(enumerate_couples(int(o["order"]), bool(o["with_degeneracies"])), key=lambda c: c.key())
    kernels = [None] * len(couples)
    if o["kernels"]:
        k = int(o["k"]) if o["k"] is not None else p.N // 2
        t = float(o["t"])
        s = t if o["s"] is None else float(o["s"])
        shift = _shift(p, cfg.spectrum, o["shift_order"])

        def one(c):
            return evaluate_couple_kernel(c, t, s, k, shift, p, cfg.spectrum)

        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                kernels = list(pool.map(one, couples))
        else:
            kernels = [one(c) for c in couples]
    rows = []
    for i, (c, kv) in enumerate(zip(couples, kernels)):
        re = None if kv is None else float(kv.real)
        im = None if kv is None else float(kv.imag)
        rows.append([i, c.order, c.plus.scale, c.minus.scale, len(c.degenerate_nodes), re, im])
    out = {"couples": export.Table("couples", rows), "_couples_json": [c.to_json() for c in couples]}
    if o["dot"]:
        out["_dot"] = "".join(molecule_from_couple(c).to_dot(f"couple{i}") for i, c in enumerate(couples) if c.order > 0)
    return out


def run_compare(cfg: RunConfig, threads: int) -> dict:
    from .kinetic import kinetic_prediction, second_order_predictor
    from .simulator import ensemble_spectrum

    p, o = cfg.params, cfg.options
    t = float(o["t_over_T_kin"]) * p.T_kin
    ens = ensemble_spectrum(cfg.spectrum, p, int(o["samples"]), [0.0, t], dt=o["dt"], threads=threads, batch=int(o["batch"]))
    pred = second_order_predictor(cfg.spectrum, t, None, p, form=o["form"])
    extra = {"sing_tol": float(o["sing_tol"])} if o["collision_method"] == "level_set" else {}
    kin = kinetic_prediction(cfg.spectrum, t, p, method=o["collision_method"], **extra)
    n = spectrum_on_grid(cfg.spectrum, p.grid)
    rows = []
    for i, kv in enumerate(p.grid.points):
        rows.append([float(kv), float(n[i]), float(ens.mean[-1, i]), float(ens.stderr[-1, i]), float(pred.values[i]), float(kin[i])])
    return {"compare": export.Table("compare", rows)}


RUNNERS = {
    "simulate": run_simulate,
    "predict": run_predict,
    "wke": run_wke,
    "count": run_count,
    "diagram": run_diagram,
    "compare": run_compare,
}


# -- driver ----------------------------------------------------------------------------------


def run(cfg: RunConfig, out_dir, threads: int = 1) -> dict:
    """Execute a validated config and write the result files and manifest."""
    start = time.perf_counter()
    results = RUNNERS[cfg.command](cfg, max(1, int(threads)))
    config_hash = export.content_hash(cfg.echo)
    os.makedirs(out_dir, exist_ok=True)
    files = {}
    ext = cfg.format
    for name, table in results.items():
        if name.startswith("_"):
            continue
        path = os.path.join(out_dir, f"{name}.{ext}")
        text = export.write_table(table, path, cfg.format, config_hash)
        files[os.path.basename(path)] = _sha256(text)
    if "_couples_json" in results:
        path = os.path.join(out_dir, "couples_structure.json")
        text = export.dumps_json({"config_hash": config_hash, "couples": results["_couples_json"]})
        with open(path, "w") as fh:
            fh.write(text)
        files["couples_structure.json"] = _sha256(text)
    if "_dot" in results:
        path = os.path.join(out_dir, "molecules.dot")
        text = f"// config-sha256: {config_hash}\n" + results["_dot"]
        with open(path, "w") as fh:
            fh.write(text)
        files["molecules.dot"] = _sha256(text)
    manifest = {
        "config_hash": config_hash,
        "config": cfg.echo,
        "seed": cfg.params.seed,
        "threads": int(threads),
        "files": files,
        "wall_time": time.perf_counter() - start,
    }
    with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
        fh.write(export.dumps_json(manifest))
    return manifest


def _sha256(text: str) -> str:
    import hashlib

    return hashlib.sha256(text.encode()).hexdigest()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fputkin", description="Quartic lattice chain: simulation, kinetic limit, diagrams.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON run configuration")
        p.add_argument("--out", default="results", help="output directory")
        p.add_argument("--threads", type=int, default=1, help="worker pool size")
        p.add_argument("--seed", type=int, default=None, help="unsigned 64-bit seed (overrides the config)")
        p.add_argument("--format", choices=FORMATS, default=None, help="result format")
    return parser


def _load_config(path):
    if path is None:
        return None
    with open(path) as fh:
        text = fh.read()
    if not text.strip():
        raise ConfigError("config file is empty")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        if args.threads < 1:
            raise ConfigError("--threads must be at least 1")
        if args.seed is not None and not 0 <= args.seed < 2**64:
            raise ConfigError("--seed must be an unsigned 64-bit integer")
        raw = _load_config(args.config)
        cfg = parse_config(raw, args.command, args.seed, args.format)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        manifest = run(cfg, args.out, args.threads)
    except (SerializationError, OSError) as exc:
        print(f"output error: {exc}", file=sys.stderr)
        return EXIT_OUTPUT
    except InvalidParameter as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FputKinError, ArithmeticError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    print(f"wrote {len(manifest['files'])} file(s) to {args.out} (config {manifest['config_hash'][:12]})")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
