"""Command-line entry point binding all engines.

Usage::

    kickedspin CONFIG [KEY=VALUE]...

CONFIG is a plain-text ``key = value`` file naming one engine command via
``command = ...``; trailing arguments override single keys.  Every run
writes one CSV table plus one JSON manifest (resolved parameters, engine
id, seed, code version, wall time, SHA-256 of each output) into the output
directory (KICKEDSPIN_OUTPUT_DIR, else the ``out_dir`` key, else the
working directory).

Exit codes: 0 success, 2 configuration error, 3 numerical abort.

All trajectory tables emit the order parameter per spin length,
O(n tau)/l, so curves for different l are directly comparable; scan tables
say in their header what each column holds.  Unknown configuration keys
are fatal: a typo never silently becomes a default.
"""

from __future__ import annotations

import math
import sys
import time
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from . import __version__
from .analysis import (FitWindowError, adjacent_crossings, decay_time,
                       fit_exponential_decay, fit_line, fit_power_law,
                       decay_window)
from .bruteforce import full_floquet_evolve
from .classical import classical_trajectory
from .classical import DEFAULT_STEPS_PER_PERIOD as CLASSICAL_STEPS
from .dtwa import dtwa_order_parameter
from .floquet import (build_floquet, evolve_stroboscopic, first_zero,
                      level_spacing_ratio)
from .fock import enumerate_basis, even_sector_basis
from .io import (ConfigError, RunManifest, apply_overrides, load_config,
                 load_table, resolve_output_dir, sha256_file, write_csv)
from .meanfield import (gpe_trajectory, initial_state, lyapunov,
                        perturbed_initial_state, rabi_analysis)
from .params import ModelParams, NumericalAbort, TrajectoryRecord


class _Key:
    """One schema entry: type coercion plus default handling."""

    def __init__(self, kind: str, default: Any = ...):
        self.kind = kind
        self.default = default  # ... means required

    def coerce(self, name: str, value: Any) -> Any:
        k = self.kind
        if k.startswith("list:"):
            inner = _Key(k[5:])
            items = value if isinstance(value, list) else [value]
            return [inner.coerce(name, v) for v in items]
        if k == "int":
            if isinstance(value, bool) or not isinstance(value, int):
                raise ConfigError(f"key {name!r} must be an integer, "
                                  f"got {value!r}")
            return value
        if k == "float":
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"key {name!r} must be a number, "
                                  f"got {value!r}")
            return float(value)
        if k == "bool":
            if not isinstance(value, bool):
                raise ConfigError(f"key {name!r} must be true/false, "
                                  f"got {value!r}")
            return value
        if k == "str":
            if not isinstance(value, str):
                raise ConfigError(f"key {name!r} must be a string, "
                                  f"got {value!r}")
            return value
        raise AssertionError(k)


PHYSICS = {
    "h": _Key("float"),
    "K": _Key("float"),
    "tau": _Key("float"),
    "phi": _Key("float"),
    "two_l": _Key("int"),
    "N": _Key("int"),
    "J": _Key("float", 1.0),
}

DTWA_KEYS = {
    "n_r": _Key("int", 800),
    "seed": _Key("int", 1),
    "workers": _Key("int", 1),
    "steps_per_period": _Key("int", 100),
    "include_self_field": _Key("bool", False),
    "sampling": _Key("str", "paired"),
    "engine": _Key("str", "reduced"),
}


def _validate(cfg: dict[str, Any], schema: dict[str, _Key],
              command: str) -> dict[str, Any]:
    out: dict[str, Any] = {}
    unknown = sorted(set(cfg) - set(schema))
    if unknown:
        raise ConfigError(f"unknown key(s) for {command}: "
                          f"{', '.join(unknown)}")
    for name, key in schema.items():
        if name in cfg:
            out[name] = key.coerce(name, cfg[name])
        elif key.default is ...:
            raise ConfigError(f"{command} requires key {name!r}")
        else:
            out[name] = key.default
    return out


def _model(cfg: dict[str, Any], **replace: Any) -> ModelParams:
    d = {k: cfg[k] for k in ("h", "K", "tau", "phi", "two_l", "N", "J")}
    d.update(replace)
    return ModelParams(**d)


def _schema(*extra: dict[str, _Key],
            lists: Sequence[str] = ()) -> dict[str, _Key]:
    schema = dict(PHYSICS)
    for name in lists:
        schema[name] = _Key("list:" + schema[name].kind,
                            schema[name].default)
    for e in extra:
        schema.update(e)
    return schema


def _trajectory_rows(record) -> tuple[list[str], list[tuple]]:
    cols = ["n", "time", "order_over_l"]
    n = np.arange(len(record.times))
    if record.errors is None:
        rows = list(zip(n, record.times, record.values))
    else:
        cols.append("error")
        rows = list(zip(n, record.times, record.values, record.errors))
    return cols, rows


# ---------------------------------------------------------------- commands

def cmd_ed_evolve(cfg, out_dir):
    cfg = _validate(cfg, _schema({"n_periods": _Key("int"),
                                  "max_dim": _Key("int", 200_000)}),
                    "ed-evolve")
    params = _model(cfg)
    basis = enumerate_basis(params.N, params.two_l, max_dim=cfg["max_dim"])
    record = evolve_stroboscopic(build_floquet(basis, params), None,
                                 cfg["n_periods"])
    record.values = record.values / params.l
    cols, rows = _trajectory_rows(record)
    return cfg, "sector_floquet", None, cols, rows


def cmd_ed_tstar_scan(cfg, out_dir):
    cfg = _validate(cfg, _schema({"n_periods": _Key("int"),
                                  "max_dim": _Key("int", 4000)},
                                 lists=("two_l", "N")),
                    "ed-tstar-scan")
    rows = []
    for two_l in cfg["two_l"]:
        for n_sites in cfg["N"]:
            dim = math.comb(n_sites + two_l, two_l)
            if dim > cfg["max_dim"]:
                print(f"ed-tstar-scan: skipping two_l={two_l} N={n_sites} "
                      f"(sector dim {dim} > max_dim {cfg['max_dim']})",
                      file=sys.stderr)
                continue
            params = _model(cfg, two_l=two_l, N=n_sites)
            basis = enumerate_basis(n_sites, two_l, max_dim=cfg["max_dim"])
            record = evolve_stroboscopic(build_floquet(basis, params), None,
                                         cfg["n_periods"])
            t_star = first_zero(record)
            rows.append((two_l, n_sites, dim,
                         float("nan") if t_star is None else t_star,
                         float("nan") if t_star is None
                         else t_star * params.tau))
    cols = ["two_l", "N", "dim", "t_star_periods", "t_star_time"]
    return cfg, "sector_floquet", None, cols, rows


def cmd_ed_rstat(cfg, out_dir):
    cfg = _validate(cfg, _schema({"max_dim": _Key("int", 200_000)},
                                 lists=("K",)),
                    "ed-rstat")
    basis = enumerate_basis(cfg["N"], cfg["two_l"], max_dim=cfg["max_dim"])
    dim_even = even_sector_basis(basis).shape[1]
    rows = []
    for k_val in cfg["K"]:
        params = _model(cfg, K=k_val)
        r = level_spacing_ratio(build_floquet(basis, params))
        rows.append((cfg["two_l"], cfg["N"], k_val, basis.dim, dim_even, r))
    cols = ["two_l", "N", "K", "dim", "dim_even", "r_mean"]
    return cfg, "sector_floquet", None, cols, rows


def cmd_oracle_compare(cfg, out_dir):
    cfg = _validate(cfg, _schema({"n_periods": _Key("int")}),
                    "oracle-compare")
    params = _model(cfg)
    basis = enumerate_basis(params.N, params.two_l)
    ed = evolve_stroboscopic(build_floquet(basis, params), None,
                             cfg["n_periods"])
    oracle = full_floquet_evolve(params, cfg["n_periods"])
    v_ed = ed.values / params.l
    v_or = oracle.values / params.l
    n = np.arange(len(v_ed))
    rows = list(zip(n, ed.times, v_ed, v_or, np.abs(v_ed - v_or)))
    cols = ["n", "time", "order_over_l_ed", "order_over_l_oracle",
            "abs_diff"]
    return cfg, "sector_floquet+brute_oracle", None, cols, rows


def cmd_gpe_evolve(cfg, out_dir):
    cfg = _validate(cfg, _schema({"n_periods": _Key("int"),
                                  "integrator": _Key("str", "spectral"),
                                  "initial": _Key("str", "polarized"),
                                  "epsilon": _Key("float", 0.1)}),
                    "gpe-evolve")
    params = _model(cfg)
    if cfg["initial"] not in ("polarized", "perturbed", "both"):
        raise ConfigError("initial must be polarized, perturbed, or both")
    starts = []
    if cfg["initial"] in ("polarized", "both"):
        starts.append(("polarized", initial_state(params.two_l)))
    if cfg["initial"] in ("perturbed", "both"):
        starts.append(("perturbed",
                       perturbed_initial_state(params.two_l,
                                               cfg["epsilon"])))
    records = [(label, gpe_trajectory(params, cfg["n_periods"], beta0=b0,
                                      integrator=cfg["integrator"])[0])
               for label, b0 in starts]
    times = records[0][1].times
    cols = ["n", "time"]
    series = []
    for label, rec in records:
        suffix = "" if len(records) == 1 else f"_{label}"
        cols.append("order_over_l" + suffix)
        series.append(rec.values / params.l)
    rows = list(zip(np.arange(len(times)), times, *series))
    return cfg, f"gpe_{cfg['integrator']}", None, cols, rows


def cmd_gpe_rabi_scan(cfg, out_dir):
    cfg = _validate(cfg, _schema({"n_periods": _Key("int", 8192)},
                                 lists=("two_l", "K")),
                    "gpe-rabi-scan")
    rows = []
    for two_l in cfg["two_l"]:
        for k_val in cfg["K"]:
            params = _model(cfg, two_l=two_l, K=k_val)
            _, sz = gpe_trajectory(params, cfg["n_periods"])
            diag = rabi_analysis(sz)
            rows.append((two_l, k_val, diag.omega_rabi, diag.omega_peak,
                         diag.delta_o / params.l))
    cols = ["two_l", "K", "omega_rabi", "omega_peak", "delta_o_over_l"]
    return cfg, "gpe_spectral", None, cols, rows


def cmd_gpe_lyapunov_scan(cfg, out_dir):
    cfg = _validate(cfg, _schema({"T": _Key("int"),
                                  "d0": _Key("float", 1e-10)},
                                 lists=("two_l", "K")),
                    "gpe-lyapunov-scan")
    rows = []
    for two_l in cfg["two_l"]:
        for k_val in cfg["K"]:
            params = _model(cfg, two_l=two_l, K=k_val)
            res = lyapunov(params, cfg["T"], d0=cfg["d0"])
            rows.append((two_l, k_val, res.per_period, res.per_time))
    cols = ["two_l", "K", "lambda_per_period", "lambda_per_time"]
    return cfg, "gpe_spectral", None, cols, rows


def cmd_dtwa_evolve(cfg, out_dir):
    cfg = _validate(cfg, _schema({"n_periods": _Key("int")}, DTWA_KEYS,
                                 lists=("two_l",)),
                    "dtwa-evolve")
    records = []
    for two_l in cfg["two_l"]:
        params = _model(cfg, two_l=two_l)
        records.append((two_l, dtwa_order_parameter(
            params, cfg["n_periods"], n_r=cfg["n_r"], seed=cfg["seed"],
            workers=cfg["workers"],
            steps_per_period=cfg["steps_per_period"],
            include_self_field=cfg["include_self_field"],
            engine=cfg["engine"], sampling=cfg["sampling"])))
    times = records[0][1].times
    cols = ["n", "time"]
    series = []
    for two_l, rec in records:
        suffix = "" if len(records) == 1 else f"_2l{two_l}"
        cols += ["order_over_l" + suffix, "error" + suffix]
        series += [rec.values, rec.errors]
    rows = list(zip(np.arange(len(times)), times, *series))
    return cfg, f"dtwa_{cfg['engine']}", cfg["seed"], cols, rows


def cmd_dtwa_decay_scan(cfg, out_dir):
    cfg = _validate(cfg, _schema({"n_periods": _Key("int"),
                                  "n_r": _Key("list:int", [800])},
                                 {k: v for k, v in DTWA_KEYS.items()
                                  if k != "n_r"},
                                 lists=("two_l", "N")),
                    "dtwa-decay-scan")
    rows = []
    for two_l in cfg["two_l"]:
        for n_sites in cfg["N"]:
            for n_r in cfg["n_r"]:
                params = _model(cfg, two_l=two_l, N=n_sites)
                rec = dtwa_order_parameter(
                    params, cfg["n_periods"], n_r=n_r, seed=cfg["seed"],
                    workers=cfg["workers"],
                    steps_per_period=cfg["steps_per_period"],
                    include_self_field=cfg["include_self_field"],
                    engine=cfg["engine"], sampling=cfg["sampling"])
                try:
                    fit = fit_exponential_decay(rec)
                    delta, derr, r2 = fit.delta, fit.delta_err, \
                        fit.r_squared
                except FitWindowError as exc:
                    print(f"dtwa-decay-scan: two_l={two_l} N={n_sites} "
                          f"n_r={n_r}: {exc}", file=sys.stderr)
                    delta = derr = r2 = float("nan")
                t_star = first_zero(rec)
                if t_star is None:
                    td = td_err = float("nan")
                else:
                    td, td_err = decay_time(rec)
                rows.append((two_l, n_sites, n_r, decay_window(rec),
                             delta, derr, r2,
                             float("nan") if t_star is None else t_star,
                             td, td_err))
    cols = ["two_l", "N", "n_r", "window_end", "delta", "delta_err",
            "fit_r_squared", "t_star_periods", "t_d", "t_d_err"]
    return cfg, f"dtwa_{cfg['engine']}", cfg["seed"], cols, rows


def cmd_classical_evolve(cfg, out_dir):
    cfg = _validate(cfg, _schema({"n_periods": _Key("int"),
                                  "steps_per_period":
                                      _Key("int", CLASSICAL_STEPS)}),
                    "classical-evolve")
    params = _model(cfg)
    record = classical_trajectory(params, cfg["n_periods"],
                                  steps_per_period=cfg["steps_per_period"])
    cols, rows = _trajectory_rows(record)
    return cfg, "classical", None, cols, rows


def _resolve_input(cfg: dict[str, Any], out_dir: Path) -> Path:
    raw = Path(cfg["input"])
    if raw.exists():
        return raw
    fallback = out_dir / raw
    if fallback.exists():
        return fallback
    raise ConfigError(f"input table {raw} not found (also tried "
                      f"{fallback})")


def cmd_fit(cfg, out_dir):
    schema = {
        "input": _Key("str"),
        "kind": _Key("str"),
        "x": _Key("str", "time"),
        "y": _Key("str", "order_over_l"),
        "err": _Key("str", ""),
    }
    cfg = _validate(cfg, schema, "fit")
    table = load_table(_resolve_input(cfg, out_dir))
    for col in (cfg["x"], cfg["y"]) + ((cfg["err"],) if cfg["err"] else ()):
        if col not in table:
            raise ConfigError(f"input table has no column {col!r}; "
                              f"columns: {', '.join(table)}")
    x, y = table[cfg["x"]], table[cfg["y"]]
    if cfg["kind"] == "exponential":
        record = TrajectoryRecord(
            times=x, values=y,
            errors=table[cfg["err"]] if cfg["err"] else None)
        fit = fit_exponential_decay(record)
    elif cfg["kind"] == "power":
        fit = fit_power_law(x, y)
    elif cfg["kind"] == "line":
        fit = fit_line(x, y)
    else:
        raise ConfigError("kind must be exponential, power, or line")
    cols = ["kind", "n_points", "slope", "intercept", "slope_err",
            "intercept_err", "r_squared", "delta", "decay_exponent",
            "amplitude"]
    rows = [(cfg["kind"], fit.n_points, fit.slope, fit.intercept,
             fit.slope_err, fit.intercept_err, fit.r_squared, fit.delta,
             fit.decay_exponent, fit.amplitude)]
    return cfg, "analysis", None, cols, rows


def cmd_crossings(cfg, out_dir):
    schema = {
        "input": _Key("str"),
        "x": _Key("str", "K"),
        "group": _Key("str", "two_l"),
        "y": _Key("list:str", ...),
    }
    cfg = _validate(cfg, schema, "crossings")
    table = load_table(_resolve_input(cfg, out_dir))
    needed = [cfg["x"], cfg["group"]] + cfg["y"]
    for col in needed:
        if col not in table:
            raise ConfigError(f"input table has no column {col!r}; "
                              f"columns: {', '.join(table)}")
    rows = []
    for quantity in cfg["y"]:
        curves = {}
        for g in np.unique(table[cfg["group"]]):
            mask = table[cfg["group"]] == g
            order = np.argsort(table[cfg["x"]][mask])
            curves[float(g)] = (table[cfg["x"]][mask][order],
                                table[quantity][mask][order])
        for (ga, gb), k_star in adjacent_crossings(curves).items():
            rows.append((quantity, ga, gb,
                         float("nan") if k_star is None else k_star))
    cols = ["quantity", "group_lo", "group_hi", "k_star"]
    return cfg, "analysis", None, cols, rows


COMMANDS: dict[str, Callable] = {
    "ed-evolve": cmd_ed_evolve,
    "ed-tstar-scan": cmd_ed_tstar_scan,
    "ed-rstat": cmd_ed_rstat,
    "oracle-compare": cmd_oracle_compare,
    "gpe-evolve": cmd_gpe_evolve,
    "gpe-rabi-scan": cmd_gpe_rabi_scan,
    "gpe-lyapunov-scan": cmd_gpe_lyapunov_scan,
    "dtwa-evolve": cmd_dtwa_evolve,
    "dtwa-decay-scan": cmd_dtwa_decay_scan,
    "classical-evolve": cmd_classical_evolve,
    "fit": cmd_fit,
    "crossings": cmd_crossings,
}


def run(config_path: str, overrides: Sequence[str] = ()) -> int:
    cfg = apply_overrides(load_config(config_path), overrides)
    command = cfg.pop("command", None)
    if command is None:
        raise ConfigError("config must set command = <engine command>")
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}; choose from "
                          f"{', '.join(sorted(COMMANDS))}")
    out_dir = resolve_output_dir(cfg)
    cfg.pop("out_dir", None)
    name = str(cfg.pop("output", command))

    start = time.monotonic()
    resolved, engine, seed, cols, rows = COMMANDS[command](cfg, out_dir)
    wall = time.monotonic() - start

    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"{name}.csv"
    write_csv(csv_path, cols, rows)
    manifest = RunManifest(command=command, engine=engine, params=resolved,
                           seed=seed, version=__version__,
                           wall_time_s=wall,
                           outputs={csv_path.name: sha256_file(csv_path)})
    manifest_path = out_dir / f"{name}.manifest.json"
    manifest.write(manifest_path)
    print(f"wrote {csv_path} ({len(rows)} rows) and {manifest_path.name}")
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    args = list(sys.argv[1:] if argv is None else argv)
    if not args or args[0] in ("-h", "--help"):
        print(__doc__)
        print("commands:", ", ".join(sorted(COMMANDS)))
        return 0 if args else 2
    try:
        return run(args[0], args[1:])
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericalAbort as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
