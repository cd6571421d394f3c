"""Command-line front end and artifact formats.

Configs are YAML with five sections (model, grid, initial, run, output);
unknown keys are rejected and every error names the offending key path.
Artifacts are plain CSV with fixed headers plus one metadata JSON per run:

    snapshot_XXX.csv   x,n,p,sigma
    series.csv         t,dt,mass,mass_bound,max_n,max_p,front,min_dndt
    sweep_summary.csv  k,graph_residual,compl_residual,sigma_l2,dist_prev_n,dist_prev_p

Floats are written with repr precision so files round-trip bit-exactly.
The metadata JSON is the only place timestamps and wall times appear, so
identical configs produce identical CSV bytes.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field

import numpy as np
import yaml

from . import __version__, diagnostics, experiments, model, solver
from .grid import Field, Grid, make_grid, mass
from .solver import BumpSpec, RunConfig

__all__ = [
    "ConfigError",
    "ResolvedConfig",
    "parse_config",
    "write_snapshot",
    "read_snapshot",
    "write_series",
    "read_series",
    "write_sweep_summary",
    "read_sweep_summary",
    "main",
]

OUTPUT_ROOT_ENV = "MUSHY_OUT"

SNAPSHOT_HEADER = ["x", "n", "p", "sigma"]
SERIES_HEADER = ["t", "dt", "mass", "mass_bound", "max_n", "max_p", "front", "min_dndt"]
SWEEP_HEADER = ["k", "graph_residual", "compl_residual", "sigma_l2",
                "dist_prev_n", "dist_prev_p"]
COMPARE_HEADER = ["nu", "front", "speed", "speed_stderr"]


class ConfigError(ValueError):
    """Bad configuration; the message starts with the offending key path."""


# ---------------------------------------------------------------- config

_SCHEMA = {
    "model": {"k", "nu", "growth"},
    "grid": {"geometry", "dim", "L", "m"},
    "initial": {"amplitude", "center", "width", "file"},
    "run": {"t_final", "snapshot_times", "cfl_safety", "front_threshold", "collar"},
    "output": {"directory", "formats"},
}
_GROWTH_KEYS = {"type", "P_M", "G0", "pressures", "rates"}


def _need(section: dict, sec_name: str, key: str):
    if key not in section:
        raise ConfigError(f"{sec_name}.{key}: required key missing")
    return section[key]


def _number(value, path: str, *, minimum=None, strict_min=None) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}: expected a number, got {value!r}")
    v = float(value)
    if not math.isfinite(v):
        raise ConfigError(f"{path}: must be finite")
    if minimum is not None and v < minimum:
        raise ConfigError(f"{path}: must be >= {minimum}, got {value}")
    if strict_min is not None and v <= strict_min:
        raise ConfigError(f"{path}: must be > {strict_min}, got {value}")
    return v


@dataclass(frozen=True)
class ResolvedConfig:
    """A fully validated configuration plus its plain-dict form."""

    params: model.ModelParams
    grid: Grid
    initial: BumpSpec | str
    t_final: float
    snapshot_times: tuple
    cfl_safety: float
    front_threshold: float
    collar: float
    out_directory: str
    formats: tuple
    resolved: dict = field(repr=False)

    def run_config(self) -> RunConfig:
        initial = self.initial
        if isinstance(initial, str):
            data = read_snapshot(initial)
            x = data["x"]
            if x.size != self.grid.m or not np.allclose(x, self.grid.centers,
                                                        rtol=1e-9, atol=1e-12):
                raise ConfigError(
                    "initial.file: snapshot cell centers do not match the grid")
            initial = Field(self.grid, data["n"])
        return RunConfig(
            params=self.params,
            initial=initial,
            grid=self.grid,
            t_final=self.t_final,
            snapshot_times=self.snapshot_times,
            cfl_safety=self.cfl_safety,
            front_threshold=self.front_threshold,
        )


def _parse_growth(section, path: str) -> model.GrowthLaw:
    if section is None:
        section = {}
    if not isinstance(section, dict):
        raise ConfigError(f"{path}: expected a mapping")
    unknown = set(section) - _GROWTH_KEYS
    if unknown:
        raise ConfigError(f"{path}.{sorted(unknown)[0]}: unknown key")
    kind = section.get("type", "linear")
    if kind == "linear":
        pm = _number(section.get("P_M", 1.0), f"{path}.P_M", strict_min=0.0)
        g0 = _number(section.get("G0", 1.0), f"{path}.G0", strict_min=0.0)
        try:
            return model.LinearGrowth(pm=pm, g0=g0)
        except ValueError as e:
            raise ConfigError(f"{path}: {e}") from e
    if kind == "tabulated":
        ps = section.get("pressures")
        gs = section.get("rates")
        if not isinstance(ps, list) or not isinstance(gs, list):
            raise ConfigError(f"{path}.pressures: tabulated laws need "
                              "'pressures' and 'rates' lists")
        try:
            return model.TabulatedGrowth(np.asarray(ps, float), np.asarray(gs, float))
        except ValueError as e:
            raise ConfigError(f"{path}: {e}") from e
    raise ConfigError(f"{path}.type: must be 'linear' or 'tabulated', got {kind!r}")


def parse_config(path: str | None = None, text: str | None = None,
                 overrides=()) -> ResolvedConfig:
    """Read, override, validate.  Raises ConfigError naming the key path.

    Args:
        path: YAML file to read (exclusive with text).
        text: YAML source directly.
        overrides: iterable of "section.key=value" strings applied before
            validation; values are parsed as YAML scalars.
    """
    if (path is None) == (text is None):
        raise ValueError("pass exactly one of path or text")
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as e:
            raise ConfigError(f"cannot read config {path}: {e}") from e
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ConfigError(f"config is not valid YAML: {e}") from e
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a mapping of sections")

    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form section.key=value")
        target, value = item.split("=", 1)
        parts = target.strip().split(".")
        if len(parts) < 2:
            raise ConfigError(f"override {item!r} must address section.key")
        node = raw
        for part in parts[:-1]:
            nxt = node.setdefault(part, {})
            if not isinstance(nxt, dict):
                raise ConfigError(f"{target}: cannot override inside a scalar")
            node = nxt
        try:
            node[parts[-1]] = yaml.safe_load(value)
        except yaml.YAMLError as e:
            raise ConfigError(f"{target}: bad override value {value!r}: {e}") from e

    for sec_name, sec in raw.items():
        if sec_name not in _SCHEMA:
            raise ConfigError(f"{sec_name}: unknown section")
        if sec is None:
            continue
        if not isinstance(sec, dict):
            raise ConfigError(f"{sec_name}: expected a mapping")
        for key in sec:
            if key not in _SCHEMA[sec_name] and not (
                    sec_name == "model" and key == "growth"):
                raise ConfigError(f"{sec_name}.{key}: unknown key")

    msec = raw.get("model") or {}
    gsec = raw.get("grid") or {}
    isec = raw.get("initial") or {}
    rsec = raw.get("run") or {}
    osec = raw.get("output") or {}

    k = _number(_need(msec, "model", "k"), "model.k")
    if k < 2.0:
        raise ConfigError(f"model.k: must be >= 2, got {k}")
    nu = _number(msec.get("nu", 0.0), "model.nu", minimum=0.0)
    growth = _parse_growth(msec.get("growth"), "model.growth")
    try:
        params = model.ModelParams(k=k, nu=nu, growth=growth)
    except ValueError as e:
        raise ConfigError(f"model: {e}") from e

    geometry = gsec.get("geometry", "line")
    if geometry not in ("line", "radial"):
        raise ConfigError(f"grid.geometry: must be 'line' or 'radial', got {geometry!r}")
    length = _number(_need(gsec, "grid", "L"), "grid.L", strict_min=0.0)
    m_raw = _need(gsec, "grid", "m")
    if isinstance(m_raw, bool) or not isinstance(m_raw, int):
        raise ConfigError(f"grid.m: expected an integer, got {m_raw!r}")
    dim = gsec.get("dim")
    if geometry == "radial" and dim is None:
        raise ConfigError("grid.dim: required for radial grids")
    if dim is not None and (isinstance(dim, bool) or not isinstance(dim, int)):
        raise ConfigError(f"grid.dim: expected an integer, got {dim!r}")
    try:
        g = make_grid(geometry, length, m_raw, dim)
    except ValueError as e:
        raise ConfigError(f"grid: {e}") from e

    if "file" in isec:
        if set(isec) != {"file"}:
            raise ConfigError("initial.file: excludes bump keys")
        if not isinstance(isec["file"], str):
            raise ConfigError("initial.file: expected a path string")
        initial: BumpSpec | str = isec["file"]
    else:
        amplitude = _number(isec.get("amplitude", 0.5), "initial.amplitude",
                            strict_min=0.0)
        if amplitude > model.max_density(params):
            raise ConfigError(
                f"initial.amplitude: {amplitude} exceeds max density "
                f"{model.max_density(params):.6g} at k={k:g}")
        center = _number(isec.get("center", length / 4.0), "initial.center")
        width = _number(isec.get("width", length / 10.0), "initial.width",
                        strict_min=0.0)
        initial = BumpSpec(amplitude, center, width)

    t_final = _number(_need(rsec, "run", "t_final"), "run.t_final", minimum=0.0)
    snaps = rsec.get("snapshot_times", [])
    if not isinstance(snaps, list):
        raise ConfigError("run.snapshot_times: expected a list")
    snap_times = tuple(_number(tv, f"run.snapshot_times[{i}]")
                       for i, tv in enumerate(snaps))
    if list(snap_times) != sorted(snap_times):
        raise ConfigError("run.snapshot_times: must be sorted")
    if snap_times and (snap_times[0] < 0.0 or snap_times[-1] > t_final):
        raise ConfigError("run.snapshot_times: must lie within [0, t_final]")
    cfl = _number(rsec.get("cfl_safety", 0.9), "run.cfl_safety")
    if not 0.0 < cfl < 1.0:
        raise ConfigError(f"run.cfl_safety: must lie in (0, 1), got {cfl}")
    threshold = _number(rsec.get("front_threshold", 0.5), "run.front_threshold")
    if not 0.0 < threshold < 1.0:
        raise ConfigError(f"run.front_threshold: must lie in (0, 1), got {threshold}")
    collar = rsec.get("collar")
    if collar is None:
        collar_v = diagnostics.COLLAR_FRACTION * growth.pm
    else:
        collar_v = _number(collar, "run.collar", strict_min=0.0)

    out_dir = osec.get("directory", "out")
    if not isinstance(out_dir, str) or not out_dir:
        raise ConfigError("output.directory: expected a nonempty string")
    formats = osec.get("formats", ["csv", "json"])
    if not isinstance(formats, list) or not formats:
        raise ConfigError("output.formats: expected a nonempty list")
    for f in formats:
        if f not in ("csv", "json"):
            raise ConfigError(f"output.formats: unknown format {f!r}")

    resolved = {
        "model": {"k": k, "nu": nu, "growth": _growth_dict(growth)},
        "grid": {"geometry": geometry, "L": length, "m": int(m_raw),
                 "dim": g.dim},
        "initial": ({"file": initial} if isinstance(initial, str) else
                    {"amplitude": initial.amplitude, "center": initial.center,
                     "width": initial.width}),
        "run": {"t_final": t_final, "snapshot_times": list(snap_times),
                "cfl_safety": cfl, "front_threshold": threshold,
                "collar": collar_v},
        "output": {"directory": out_dir, "formats": list(formats)},
    }
    return ResolvedConfig(params, g, initial, t_final, snap_times, cfl,
                          threshold, collar_v, out_dir, tuple(formats), resolved)


def _growth_dict(growth: model.GrowthLaw) -> dict:
    if isinstance(growth, model.TabulatedGrowth):
        return {"type": "tabulated",
                "pressures": [float(v) for v in growth.pressures],
                "rates": [float(v) for v in growth.rates]}
    return {"type": "linear", "P_M": growth.pm, "G0": growth.g0}


# ---------------------------------------------------------------- artifacts

def _fmt(x: float) -> str:
    return repr(float(x))


def write_snapshot(path: str, snap: solver.Snapshot) -> None:
    g = snap.n.grid
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(SNAPSHOT_HEADER)
        for i in range(g.m):
            w.writerow([_fmt(g.centers[i]), _fmt(snap.n.values[i]),
                        _fmt(snap.p.values[i]), _fmt(snap.sigma.values[i])])


def _read_csv(path: str, header: list) -> dict:
    with open(path, "r", newline="", encoding="utf-8") as fh:
        r = csv.reader(fh)
        got = next(r, None)
        if got != header:
            raise ValueError(f"{path}: expected header {','.join(header)}, "
                             f"got {got}")
        cols = {h: [] for h in header}
        for row in r:
            if len(row) != len(header):
                raise ValueError(f"{path}: malformed row {row}")
            for h, v in zip(header, row):
                cols[h].append(float(v) if v != "" else math.nan)
    return {h: np.array(v) for h, v in cols.items()}


def read_snapshot(path: str) -> dict:
    """Snapshot CSV as a dict of numpy columns, keys x, n, p, sigma."""
    return _read_csv(path, SNAPSHOT_HEADER)


def write_series(path: str, result: solver.RunResult) -> None:
    s = result.series
    g0 = result.config.params.growth.g0
    mass0 = mass(result.snapshots[0].n)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(SERIES_HEADER)
        for j in range(len(s)):
            bound = mass0 * math.exp(g0 * s.t[j])
            w.writerow([_fmt(s.t[j]), _fmt(s.dt[j]), _fmt(s.mass[j]), _fmt(bound),
                        _fmt(s.max_n[j]), _fmt(s.max_p[j]), _fmt(s.front[j]),
                        _fmt(s.min_dndt[j])])


def read_series(path: str) -> dict:
    return _read_csv(path, SERIES_HEADER)


def write_sweep_summary(path: str, sweep: experiments.SweepResult) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(SWEEP_HEADER)
        for row in sweep.rows:
            w.writerow([_fmt(row.k), _fmt(row.graph_residual),
                        _fmt(row.compl_residual), _fmt(row.sigma_l2),
                        "" if row.dist_prev_n is None else _fmt(row.dist_prev_n),
                        "" if row.dist_prev_p is None else _fmt(row.dist_prev_p)])


def read_sweep_summary(path: str) -> dict:
    """Sweep summary columns; absent distances come back as nan."""
    return _read_csv(path, SWEEP_HEADER)


def _write_run_artifacts(out_dir: str, result: solver.RunResult,
                         cfg: ResolvedConfig, extra: dict | None = None) -> dict:
    os.makedirs(out_dir, exist_ok=True)
    wrote_csv = "csv" in cfg.formats
    snap_list = []
    for i, snap in enumerate(result.snapshots):
        name = f"snapshot_{i:03d}.csv"
        if wrote_csv:
            write_snapshot(os.path.join(out_dir, name), snap)
        snap_list.append({"file": name, "t": snap.t})
    if wrote_csv:
        write_series(os.path.join(out_dir, "series.csv"), result)

    report = None
    if len(result.snapshots) > 1:
        report = diagnostics.lemma_bounds_report(result, collar=cfg.collar)
    meta = {
        "version": __version__,
        "config": cfg.resolved,
        "wall_time": result.wall_time,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        "step_count": result.final.step_count,
        "boundary_contact": result.boundary_contact,
        "snapshots": snap_list,
        "series": "series.csv" if wrote_csv else None,
        "diagnostics": report.to_dict() if report is not None else None,
    }
    if extra:
        meta.update(extra)
    if "json" in cfg.formats:
        with open(os.path.join(out_dir, "metadata.json"), "w", encoding="utf-8") as fh:
            json.dump(meta, fh, indent=2)
            fh.write("\n")
    return meta


# ---------------------------------------------------------------- commands

def _out_dir(args, cfg: ResolvedConfig) -> str:
    if args.out:
        return args.out
    root = os.environ.get(OUTPUT_ROOT_ENV, ".")
    return os.path.join(root, cfg.out_directory)


def _load(args) -> tuple:
    cfg = parse_config(path=args.config, overrides=args.set or ())
    return cfg, _out_dir(args, cfg)


def cmd_run(args) -> int:
    cfg, out = _load(args)
    result = solver.run(cfg.run_config())
    meta = _write_run_artifacts(out, result, cfg)
    ok = meta["diagnostics"] is None or meta["diagnostics"]["all_passed"]
    print(f"run: {result.final.step_count} steps to t={result.final.t:g}, "
          f"{len(result.snapshots)} snapshots -> {out} "
          f"(bounds {'ok' if ok else 'VIOLATED'})")
    return 0


def cmd_check(args) -> int:
    cfg, out = _load(args)
    run_cfg = cfg.run_config()
    report = solver.validate_initial(run_cfg.initial_field(), cfg.params)
    payload = {
        "monotone_admissible": report.admissible,
        "min_rate": report.min_rate,
        "argmin_x": report.argmin_x,
        "tol": report.tol,
    }
    print(json.dumps(payload, indent=2))
    if args.out:
        os.makedirs(out, exist_ok=True)
        with open(os.path.join(out, "check.json"), "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
    return 0 if report.admissible else 1


def _parse_float_list(text: str, what: str) -> list:
    try:
        return [float(v) for v in text.split(",") if v.strip() != ""]
    except ValueError as e:
        raise ConfigError(f"{what}: expected comma-separated numbers, "
                          f"got {text!r}") from e


def cmd_sweep(args) -> int:
    cfg, out = _load(args)
    ks = _parse_float_list(args.ks, "--ks")
    sweep = experiments.k_sweep(cfg.run_config(), ks, collar=cfg.collar)
    os.makedirs(out, exist_ok=True)
    write_sweep_summary(os.path.join(out, "sweep_summary.csv"), sweep)
    rows_meta = []
    for row in sweep.rows:
        sub = parse_config(text=yaml.safe_dump(cfg.resolved),
                           overrides=(f"model.k={row.k:g}",))
        _write_run_artifacts(os.path.join(out, f"k_{row.k:g}"), row.result, sub)
        rows_meta.append({"k": row.k, "graph_residual": row.graph_residual,
                          "compl_residual": row.compl_residual,
                          "sigma_l2": row.sigma_l2, "runtime": row.runtime})
    with open(os.path.join(out, "sweep.json"), "w", encoding="utf-8") as fh:
        json.dump({"version": __version__, "collar": sweep.collar,
                   "rows": rows_meta}, fh, indent=2)
        fh.write("\n")
    print(f"sweep: {len(ks)} stiffness values -> {out}")
    return 0


def cmd_wave(args) -> int:
    cfg, out = _load(args)
    study = experiments.wave_speed_check(cfg.run_config())
    _write_run_artifacts(out, study.result, cfg)
    payload = {
        "nu": study.nu, "k": study.k,
        "speed": study.speed, "speed_stderr": study.speed_stderr,
        "sigma0": study.sigma0, "formula_rhs": study.formula_rhs,
        "traveled_widths": study.traveled_widths,
        "faster_than_passive": study.faster_than_passive,
        "front_sensitivity": {str(k): v for k, v in study.front_sensitivity.items()},
        "trajectory_t": [float(v) for v in study.trajectory_t],
        "trajectory_r": [float(v) for v in study.trajectory_r],
    }
    with open(os.path.join(out, "wave.json"), "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    print(f"wave: speed {study.speed:.6g} (sigma0 {study.sigma0:.6g}, "
          f"relation {study.formula_rhs:.6g}) -> {out}")
    return 0


def cmd_compare(args) -> int:
    cfg, out = _load(args)
    nus = _parse_float_list(args.nus, "--nus")
    comparison = experiments.nu_compare(cfg.run_config(), nus)
    os.makedirs(out, exist_ok=True)
    with open(os.path.join(out, "compare_summary.csv"), "w", newline="",
              encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(COMPARE_HEADER)
        for row in comparison.rows:
            w.writerow([_fmt(row.nu), _fmt(row.front), _fmt(row.speed),
                        _fmt(row.speed_stderr)])
    for row in comparison.rows:
        sub = parse_config(text=yaml.safe_dump(cfg.resolved),
                           overrides=(f"model.nu={row.nu:g}",))
        _write_run_artifacts(os.path.join(out, f"nu_{row.nu:g}"), row.result, sub)
    print(f"compare: {len(nus)} motilities -> {out}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mushy",
        description="Finite-volume runs and stiff-limit diagnostics for "
                    "congestion-limited growth.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="YAML config path")
        p.add_argument("--set", action="append", metavar="SEC.KEY=VAL",
                       help="override a config value (repeatable)")
        p.add_argument("--out", help=f"output directory (default: config "
                                     f"output.directory under ${OUTPUT_ROOT_ENV} or .)")

    p = sub.add_parser("run", help="single run with artifacts")
    common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="stiffness sweep")
    common(p)
    p.add_argument("--ks", default="25,50,100,200",
                   help="comma-separated stiffness values")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("wave", help="front speed study")
    common(p)
    p.set_defaults(func=cmd_wave)

    p = sub.add_parser("compare", help="motility comparison")
    common(p)
    p.add_argument("--nus", default="0,0.5", help="comma-separated motilities")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("check", help="initial-data admissibility check")
    common(p)
    p.set_defaults(func=cmd_check)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError, OSError, solver.SimulationError) as e:
        payload = {"error": type(e).__name__, "message": str(e)}
        if isinstance(e, solver.SimulationError):
            payload["payload"] = e.payload
        print(json.dumps(payload), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
