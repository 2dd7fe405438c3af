"""Command-line sweeps.

    nlsetransport --config sweep.json [--out DIR] [--workers N] [--validate-only]

The config is JSON (schema in ``config_schema.json``, copied to ``docs/``).
Every run writes its CSV tables into the output directory and finally a
``manifest.json`` with the resolved config, code version and per-point
status.  Exit codes: 0 success, 2 config error, 3 some points failed,
4 every point failed.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from importlib import resources
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np
from jsonschema import Draft202012Validator

from . import __version__
from .bethe import BetheError, ModeRoot, bound_state_spectrum, resonance_kappas, write_modes_csv
from .fields import Grid, save_state
from .linear_solver import SolverError, transmission_spectrum, write_spectrum_csv
from .nlse2 import evolve_time_domain, solve_steady_state
from .observables import (ScanPoint, bunching_peaks, g2_zero, scan_point, write_peaks_csv,
                          write_scan_csv)
from .params import (EffectiveParams, ParameterError, PhysicalParams, derive_effective_params,
                     first_resonance, make_effective)

log = logging.getLogger("nlsetransport")

EXIT_OK, EXIT_CONFIG, EXIT_PARTIAL, EXIT_FAILED = 0, 2, 3, 4

DEFAULT_N = 300
DEFAULT_ALPHA0 = 1e-4
DEFAULT_T_FINAL = 30000.0
DEFAULT_DT = 0.3

AXES = {
    "spectrum": {"delta", "delta_over_resonance"},
    "g2scan": {"kappa", "kappa_d"},
    "modes": {"kappa", "kappa_d"},
    "resonances": {"kappa", "kappa_d"},
    "fieldmap": {"kappa", "kappa_d"},
    "crosscheck": {"kappa", "kappa_d"},
}


class ConfigError(ValueError):
    pass


def load_schema() -> dict:
    return json.loads(resources.files("nlsetransport").joinpath("config_schema.json").read_text())


def _complex(v) -> complex:
    return complex(v[0], v[1]) if isinstance(v, list) else complex(v)


def parse_config(text: str, source: str = "<config>") -> dict:
    """Parse and validate; raises :class:`ConfigError` with line or field locations."""
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    errors = sorted(Draft202012Validator(load_schema()).iter_errors(cfg),
                    key=lambda e: list(e.absolute_path))
    if errors:
        lines = [f"{source}: {'.'.join(map(str, e.absolute_path)) or '<root>'}: {e.message}"
                 for e in errors]
        raise ConfigError("\n".join(lines))
    mode, axis = cfg["mode"], cfg["sweep"]["axis"]
    if axis not in AXES[mode]:
        raise ConfigError(f"{source}: sweep.axis: '{axis}' is not a valid axis for mode "
                          f"'{mode}' (use one of {sorted(AXES[mode])})")
    eff = cfg["params"].get("effective", {})
    if "kappa" in eff and "kappa_d" in eff:
        raise ConfigError(f"{source}: params.effective: give kappa or kappa_d, not both")
    return cfg


def load_config(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    return parse_config(text, str(path))


def base_params(cfg: dict) -> EffectiveParams:
    block = cfg["params"]
    alpha0 = block.get("alpha0")
    if "physical" in block:
        phys = PhysicalParams(**block["physical"])
        return derive_effective_params(phys, DEFAULT_ALPHA0 if alpha0 is None else alpha0)
    e = block["effective"]
    d = float(e["d"])
    delta = e.get("delta", "resonance")
    delta = first_resonance(d) if delta == "resonance" else float(delta)
    kappa = e["kappa_d"] / d if "kappa_d" in e else e.get("kappa", 0.0)
    a0 = e.get("alpha0", alpha0 if alpha0 is not None else DEFAULT_ALPHA0)
    return make_effective(_complex(e["mass"]), kappa, d, delta, a0)


def sweep_values(cfg: dict) -> list[float]:
    s = cfg["sweep"]
    if "values" in s:
        return [float(v) for v in s["values"]]
    if s["count"] == 0:
        return []
    return [float(v) for v in np.linspace(s["start"], s["stop"], s["count"])]


def _kappas(cfg: dict, p: EffectiveParams) -> list[float]:
    vals = sweep_values(cfg)
    return [v / p.d for v in vals] if cfg["sweep"]["axis"] == "kappa_d" else vals


def params_record(p: EffectiveParams) -> dict:
    out = {}
    for k, v in dataclasses.asdict(p).items():
        out[k] = [v.real, v.imag] if isinstance(v, complex) else v
    return out


# -- per-point workers (module level so they pickle) ------------------------------

def _g2_point(args) -> ScanPoint:
    p, n = args
    return scan_point(p, Grid(n, p.d))


def _modes_point(args):
    d, kappa, n_max = args
    if n_max == 0:
        return [], None
    if not kappa < 0:
        return [], f"kappa={kappa} is not attractive; no bound states"
    roots = bound_state_spectrum(d, kappa, n_max)
    err = None if len(roots) == n_max else f"only {len(roots)} of {n_max} branches followed"
    return roots, err


def _resonance_point(args):
    d, delta_res, n, window = args
    return resonance_kappas(d, delta_res, [n], window)


def _fieldmap_point(args):
    p, n = args
    grid = Grid(n, p.d)
    st = solve_steady_state(p, grid)
    return st, g2_zero(st)


def _crosscheck_point(args):
    p, n, t_final, dt = args
    grid = Grid(n, p.d)
    steady = g2_zero(solve_steady_state(p, grid))
    ev = evolve_time_domain(p, grid, t_final, dt)
    return steady, float(ev.g2[-1]), ev.converged, ev.t_final


def _map(fn: Callable, jobs: list, workers: int) -> list:
    """Ordered map; each result is ``(value, None)`` or ``(None, error)``."""

    def safe(job):
        try:
            return fn(job), None
        except (SolverError, BetheError, ValueError, ArithmeticError, ParameterError) as exc:
            return None, str(exc)

    if workers <= 1 or len(jobs) < 2:
        return [safe(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(fn, j) for j in jobs]
        out = []
        for f in futures:
            try:
                out.append((f.result(), None))
            except (SolverError, BetheError, ValueError, ArithmeticError, ParameterError) as exc:
                out.append((None, str(exc)))
        return out


# -- modes ----------------------------------------------------------------------

def run_mode(cfg: dict, out: Path, workers: int) -> tuple[list[dict], list[str]]:
    """Execute the sweep; returns per-point records and output file names."""
    mode = cfg["mode"]
    p = base_params(cfg)
    n = cfg.get("grid", {}).get("n", 400 if mode == "spectrum" else DEFAULT_N)
    points: list[dict] = []
    files: list[str] = []

    if mode == "spectrum":
        vals = sweep_values(cfg)
        if cfg["sweep"]["axis"] == "delta_over_resonance":
            vals = [v * first_resonance(p.d) for v in vals]
        rows = transmission_spectrum(p, vals, n=n)
        write_spectrum_csv(out / "spectrum.csv", rows)
        files.append("spectrum.csv")
        points = [{"delta": r.delta, "status": "ok" if r.error is None else "failed",
                   "error": r.error} for r in rows]

    elif mode == "g2scan":
        kappas = _kappas(cfg, p)
        res = _map(_g2_point, [(p.with_(kappa=k), n) for k in kappas], workers)
        scan = [r if r is not None else ScanPoint(k, k * p.d, math.nan, math.nan, math.nan, e)
                for (r, e), k in zip(res, kappas)]
        write_scan_csv(out / "g2_scan.csv", scan)
        peaks = bunching_peaks([s.kappa_d for s in scan], [s.g2 for s in scan])
        write_peaks_csv(out / "peaks.csv", peaks)
        files += ["g2_scan.csv", "peaks.csv"]
        points = [{"kappa_d": s.kappa_d, "status": "ok" if s.error is None else "failed",
                   "error": s.error} for s in scan]

    elif mode == "modes":
        n_max = cfg.get("modes", {}).get("n_max", 3)
        kappas = _kappas(cfg, p)
        res = _map(_modes_point, [(p.d, k, n_max) for k in kappas], workers)
        roots: list[ModeRoot] = []
        for (r, e), k in zip(res, kappas):
            found, err = r if r is not None else ([], e)
            roots += found
            points.append({"kappa_d": k * p.d, "roots": len(found),
                           "status": "ok" if err is None else "failed", "error": err})
        write_modes_csv(out / "modes.csv", roots)
        files.append("modes.csv")

    elif mode == "resonances":
        kappas = _kappas(cfg, p)
        n_range = cfg.get("modes", {}).get("n_range", [1, 2, 3])
        if not kappas:
            window = None
        else:
            window = (min(kappas), max(kappas))
        rows = []
        if window is not None and window[1] >= 0:
            raise ConfigError("sweep: the resonance window must be attractive (all kappa < 0)")
        res = _map(_resonance_point, [(p.d, p.delta, k, window) for k in n_range]
                   if window else [], workers)
        for (r, e), k in zip(res, n_range):
            rows += r or []
            points.append({"n": k, "crossings": len(r or []),
                           "status": "ok" if e is None else "failed", "error": e})
        with open(out / "resonances.csv", "w") as fh:
            fh.write("n,kappa,kappa_d\n")
            for nn, kap in rows:
                fh.write(f"{nn},{kap:.12e},{kap * p.d:.12e}\n")
        files.append("resonances.csv")

    elif mode == "fieldmap":
        kappas = _kappas(cfg, p)
        res = _map(_fieldmap_point, [(p.with_(kappa=k), n) for k in kappas], workers)
        (out / "fields").mkdir(exist_ok=True)
        with open(out / "fieldmap.csv", "w") as fh:
            fh.write("index,kappa_d,g2,stem\n")
            for i, ((r, e), k) in enumerate(zip(res, kappas)):
                stem = f"point_{i:04d}"
                if r is not None:
                    st, g2 = r
                    save_state(st, out / "fields", stem, params_record(p.with_(kappa=k)))
                    files += [f"fields/{stem}{s}" for s in
                              (".json", "_theta.csv", "_phi_abs.csv", "_phi_arg.csv")]
                else:
                    g2 = math.nan
                fh.write(f"{i},{k * p.d:.12e},{g2:.12e},{stem if r is not None else ''}\n")
                points.append({"kappa_d": k * p.d, "status": "ok" if e is None else "failed",
                               "error": e})
        files.insert(0, "fieldmap.csv")

    elif mode == "crosscheck":
        td = cfg.get("time_domain", {})
        t_final, dt = td.get("t_final", DEFAULT_T_FINAL), td.get("dt", DEFAULT_DT)
        kappas = _kappas(cfg, p)
        res = _map(_crosscheck_point, [(p.with_(kappa=k), n, t_final, dt) for k in kappas],
                   workers)
        with open(out / "crosscheck.csv", "w") as fh:
            fh.write("kappa_d,g2_steady,g2_time,rel_diff,converged,t_final\n")
            for (r, e), k in zip(res, kappas):
                if r is not None:
                    gs, gt, conv, tf = r
                    fh.write(f"{k * p.d:.12e},{gs:.12e},{gt:.12e},{abs(gt - gs) / gs:.12e},"
                             f"{int(conv)},{tf:.12e}\n")
                points.append({"kappa_d": k * p.d, "status": "ok" if e is None else "failed",
                               "error": e})
        files.append("crosscheck.csv")

    return points, files


def run(cfg: dict, out, workers: int = 1) -> int:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        points, files = run_mode(cfg, out, workers)
    except (ConfigError, ParameterError) as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    failed = sum(pt["status"] != "ok" for pt in points)
    if points and failed == len(points):
        status, code = "failed", EXIT_FAILED
    elif failed:
        status, code = "partial", EXIT_PARTIAL
    else:
        status, code = "ok", EXIT_OK
    p = base_params(cfg)
    manifest = {
        "version": __version__,
        "config": cfg,
        "resolved_params": params_record(p),
        "grid": {"n": cfg.get("grid", {}).get("n", 400 if cfg["mode"] == "spectrum" else DEFAULT_N),
                 "d": p.d},
        "workers": workers,
        "status": status,
        "points": points,
        "files": files,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return code


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = argparse.ArgumentParser(prog="nlsetransport", description=__doc__.split("\n\n")[0])
    ap.add_argument("--config", required=True, help="JSON sweep configuration")
    ap.add_argument("--out", help="output directory (overrides the config)")
    ap.add_argument("--workers", type=int, help="parallel worker processes")
    ap.add_argument("--validate-only", action="store_true", help="check the config and exit")
    ap.add_argument("-v", "--verbose", action="store_true")
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        base_params(cfg)
    except (ConfigError, ParameterError, TypeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.validate_only:
        print("config ok")
        return EXIT_OK
    workers = args.workers if args.workers is not None else cfg.get("workers", 1)
    if workers < 1:
        print("config error: --workers must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    out = args.out or cfg.get("output")
    if not out:
        print("config error: no output directory (set 'output' or pass --out)", file=sys.stderr)
        return EXIT_CONFIG
    return run(cfg, out, workers)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
