"""Output observables: transmission, reflection and zero-delay ``g2``.

``g2(0) = 4 |phi(d,d)|^2 / (|theta(d)|^2 + 4 int_0^d |phi(z,d)|^2 dz)^2``, with the
integral taken by the trapezoid rule on the solver grid.
"""
from __future__ import annotations

import csv
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .fields import FieldState, Grid
from .linear_solver import SolverError, solve_single_photon
from .nlse2 import solve_two_photon_steady
from .params import EffectiveParams

log = logging.getLogger(__name__)


class UndefinedCorrelation(ArithmeticError):
    """The normalization of ``g2`` vanishes (no transmitted light)."""


def g2_zero(state: FieldState, grid: Optional[Grid] = None) -> float:
    grid = grid or state.grid
    w = grid.trapezoid_weights()
    denom = abs(state.theta[-1]) ** 2 + 4 * float(np.sum(w * np.abs(state.phi[:, -1]) ** 2))
    if denom == 0:
        raise UndefinedCorrelation("|theta(d)|^2 + 4 int |phi(z,d)|^2 dz vanishes")
    return 4 * abs(state.phi[-1, -1]) ** 2 / denom**2


@dataclass
class Observables:
    g2_zero: float
    T: Optional[float]
    R: Optional[float]
    diag_density: np.ndarray
    output_joint: float


def observables(state: FieldState, params: EffectiveParams) -> Observables:
    from .linear_solver import boundary_fields

    _, psi_m0, psi_pd, _ = boundary_fields(state.theta, state.grid.h)
    a2 = params.alpha0**2
    return Observables(
        g2_zero=g2_zero(state),
        T=abs(psi_pd) ** 2 / a2 if a2 else None,
        R=abs(psi_m0) ** 2 / a2 if a2 else None,
        diag_density=np.abs(np.diagonal(state.phi)).copy(),
        output_joint=float(abs(state.phi[-1, -1])),
    )


# -- sweeps -------------------------------------------------------------------

@dataclass
class ScanPoint:
    kappa: float
    kappa_d: float
    g2: float
    T: float
    R: float
    error: Optional[str] = None


def scan_point(params: EffectiveParams, grid: Grid) -> ScanPoint:
    """Single-photon solve, two-photon solve and ``g2`` for one parameter set."""
    kappa = complex(params.kappa).real
    try:
        lin = solve_single_photon(params, grid)
        two = solve_two_photon_steady(params, grid, lin.theta)
        st = FieldState(grid=grid, theta=lin.theta, phi=two.phi)
        return ScanPoint(kappa, kappa * params.d, g2_zero(st), lin.transmission, lin.reflection)
    except (SolverError, ValueError, UndefinedCorrelation) as exc:
        log.warning("scan point kappa=%g failed: %s", kappa, exc)
        return ScanPoint(kappa, kappa * params.d, math.nan, math.nan, math.nan, error=str(exc))


def _scan_job(args):
    return scan_point(*args)


def g2_scan(params_base: EffectiveParams, kappas: Sequence[float], grid: Grid,
            workers: int = 1) -> list[ScanPoint]:
    """``g2`` and ``(T, R)`` across interaction strengths.

    Every point is an independent solve, so the result does not depend on the
    order of ``kappas`` or the number of workers.  Failed points carry NaNs
    and the error text.
    """
    jobs = [(params_base.with_(kappa=float(k)), grid) for k in kappas]
    if workers <= 1 or len(jobs) < 2:
        return [scan_point(*j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_scan_job, jobs))


@dataclass
class Peak:
    kappa_d: float
    g2: float
    n_guess: Optional[int] = None


def _refine(x: np.ndarray, y: np.ndarray, i: int) -> tuple[float, float]:
    """Vertex of the parabola through points ``i-1, i, i+1``."""
    c = np.polyfit(x[i - 1:i + 2] - x[i], y[i - 1:i + 2], 2)
    if c[0] >= 0:
        return float(x[i]), float(y[i])
    s = -c[1] / (2 * c[0])
    s = min(max(s, x[i - 1] - x[i]), x[i + 1] - x[i])
    return float(x[i] + s), float(np.polyval(c, s))


def local_maxima(kappa_d: Sequence[float], g2: Sequence[float]) -> list[Peak]:
    """All interior local maxima (NaN points are dropped), refined parabolically."""
    x = np.asarray(kappa_d, dtype=float)
    y = np.asarray(g2, dtype=float)
    keep = np.isfinite(x) & np.isfinite(y)
    x, y = x[keep], y[keep]
    order = np.argsort(x)
    x, y = x[order], y[order]
    peaks = []
    for i in range(1, len(x) - 1):
        if y[i] > y[i - 1] and y[i] >= y[i + 1]:
            peaks.append(Peak(*_refine(x, y, i)))
    return peaks


def bunching_peaks(kappa_d: Sequence[float], g2: Sequence[float],
                   resonances: Optional[Sequence[tuple[int, float]]] = None) -> list[Peak]:
    """Local maxima of the scan with ``g2 > 1``.

    ``n_guess`` is the branch of the nearest entry of ``resonances`` (pairs
    ``(n, kappa_d)``) when given, otherwise the ordinal counted from
    ``kappa_d = 0`` outwards.
    """
    peaks = [p for p in local_maxima(kappa_d, g2) if p.g2 > 1]
    peaks.sort(key=lambda p: abs(p.kappa_d))
    for i, p in enumerate(peaks, start=1):
        if resonances:
            p.n_guess = min(resonances, key=lambda r: abs(r[1] - p.kappa_d))[0]
        else:
            p.n_guess = i
    return peaks


def sub_threshold_maxima(kappa_d, g2) -> list[Peak]:
    """Diagnostic: local maxima that stay at or below ``g2 = 1``."""
    return [p for p in local_maxima(kappa_d, g2) if p.g2 <= 1]


SCAN_HEADER = ["kappa_d", "g2", "T", "R"]
PEAK_HEADER = ["n_guess", "kappa_d_peak", "g2_peak"]


def write_scan_csv(path, points: Sequence[ScanPoint]) -> None:
    with open(Path(path), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SCAN_HEADER)
        for p in points:
            w.writerow([f"{v:.12e}" for v in (p.kappa_d, p.g2, p.T, p.R)])


def write_peaks_csv(path, peaks: Sequence[Peak]) -> None:
    with open(Path(path), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(PEAK_HEADER)
        for p in peaks:
            w.writerow([p.n_guess, f"{p.kappa_d:.12e}", f"{p.g2:.12e}"])
