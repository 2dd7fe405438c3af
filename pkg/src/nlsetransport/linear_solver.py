"""Single-photon (linear) steady state of the driven waveguide.

Inside the medium the one-photon envelope obeys ``theta'' + 2 m delta theta = 0``.
The ends are open: the forward field ``Psi_+ = (theta - i theta')/sqrt(2)`` is
fixed to the drive at the input and the incoming combination vanishes at the
output.  :func:`solve_single_photon` discretizes this on a grid and
:func:`analytic_single_photon` gives the closed form used to check it.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .fields import Grid
from .params import EffectiveParams

SQRT2 = math.sqrt(2.0)

#: Largest ``h |Re k|`` accepted by the finite-difference solver.
MAX_PHASE_PER_CELL = 0.2


class SolverError(RuntimeError):
    """A linear solve failed; the message carries a conditioning diagnostic."""


@dataclass
class LinearSolution:
    theta: Optional[np.ndarray]
    transmission: Optional[float]
    reflection: Optional[float]
    psi_plus_out: complex
    psi_minus_out: complex
    grid: Optional[Grid] = None
    drive: str = "left"
    k: Optional[complex] = None


def one_sided_derivative(h: float) -> tuple[np.ndarray, np.ndarray]:
    """Second-order one-sided first-derivative weights at ``z=0`` (on nodes
    0, 1, 2) and at ``z=d`` (on nodes n-1, n-2, n-3)."""
    left = np.array([-3.0, 4.0, -1.0]) / (2 * h)
    return left, -left


def second_difference(n: int, h: float) -> sp.csr_matrix:
    """Three-point second derivative; first and last rows are left empty."""
    off = np.ones(n - 1)
    off[0] = 0.0
    lower = np.ones(n - 1)
    lower[-1] = 0.0
    main = np.full(n, -2.0)
    main[0] = main[-1] = 0.0
    return sp.diags([lower, main, off], [-1, 0, 1], format="csr") / h**2


def robin_rows(n: int, h: float) -> sp.csr_matrix:
    """Boundary operator: row 0 is ``f - i f'`` at ``z=0``, row ``n-1`` is
    ``f + i f'`` at ``z=d``; all other rows are zero."""
    dl, dr = one_sided_derivative(h)
    rows = [0, 0, 0, n - 1, n - 1, n - 1]
    cols = [0, 1, 2, n - 1, n - 2, n - 3]
    vals = np.concatenate([-1j * dl, 1j * dr])
    vals[0] += 1.0
    vals[3] += 1.0
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))


def boundary_fields(theta: np.ndarray, h: float) -> tuple[complex, complex, complex, complex]:
    """``(Psi_+(0), Psi_-(0), Psi_+(d), Psi_-(d))`` from a gridded envelope."""
    dl, dr = one_sided_derivative(h)
    d0 = dl @ theta[:3]
    dd = dr @ theta[::-1][:3]
    return (
        (theta[0] - 1j * d0) / SQRT2,
        (theta[0] + 1j * d0) / SQRT2,
        (theta[-1] - 1j * dd) / SQRT2,
        (theta[-1] + 1j * dd) / SQRT2,
    )


def single_photon_matrix(params: EffectiveParams, grid: Grid) -> sp.csc_matrix:
    n, h = grid.n, grid.h
    m = complex(params.mass)
    bulk = -(1 / (2 * m)) * second_difference(n, h)
    interior = np.ones(n)
    interior[0] = interior[-1] = 0.0
    bulk = bulk - params.delta * sp.diags(interior)
    return (bulk + robin_rows(n, h)).tocsc()


def _smallest_singular_value(a) -> float:
    dense = a.toarray() if sp.issparse(a) else np.asarray(a)
    return float(sla.svdvals(dense)[-1])


def _check_resolution(params: EffectiveParams, grid: Grid) -> None:
    k = np.sqrt(2 * complex(params.mass) * params.delta + 0j)
    if grid.h * abs(k.real) >= MAX_PHASE_PER_CELL:
        raise ValueError(
            f"grid too coarse: h*|Re k| = {grid.h * abs(k.real):.3f} >= {MAX_PHASE_PER_CELL}"
        )


def _outputs(psi_p0, psi_m0, psi_pd, psi_md, alpha0, drive):
    if drive == "left":
        out_t, out_r = psi_pd, psi_m0
    else:
        out_t, out_r = psi_m0, psi_pd
    if alpha0 == 0:
        return None, None
    return abs(out_t) ** 2 / alpha0**2, abs(out_r) ** 2 / alpha0**2


def solve_single_photon(params: EffectiveParams, grid: Grid, drive: str = "left",
                        epsilon: complex = 1.0) -> LinearSolution:
    """Finite-difference steady state; ``drive='right'`` injects at ``z=d``."""
    if drive not in ("left", "right"):
        raise ValueError("drive must be 'left' or 'right'")
    if abs(grid.d - params.d) > 1e-12 * params.d:
        raise ValueError(f"grid length {grid.d} differs from params.d={params.d}")
    _check_resolution(params, grid)
    n = grid.n
    a = single_photon_matrix(params, grid)
    b = np.zeros(n, dtype=complex)
    b[0 if drive == "left" else -1] = SQRT2 * params.alpha0 * epsilon
    try:
        theta = spla.splu(a).solve(b)
    except RuntimeError as exc:
        raise SolverError(
            f"single-photon system is singular ({exc}); smallest singular value "
            f"{_smallest_singular_value(a):.3e}"
        ) from exc
    if not np.all(np.isfinite(theta)):
        raise SolverError(
            f"non-finite solution; smallest singular value {_smallest_singular_value(a):.3e}"
        )
    psi = boundary_fields(theta, grid.h)
    t, r = _outputs(*psi, params.alpha0, drive)
    return LinearSolution(theta=theta, transmission=t, reflection=r,
                          psi_plus_out=psi[2], psi_minus_out=psi[1], grid=grid, drive=drive)


def analytic_single_photon(params: EffectiveParams, grid: Optional[Grid] = None,
                           drive: str = "left") -> LinearSolution:
    """Closed form ``theta = A e^{ikz} + B e^{-ik(z-d)}``, ``k = sqrt(2 m delta)``.

    At ``delta = 0`` the profile is linear, ``theta = a + b z``.
    """
    if drive not in ("left", "right"):
        raise ValueError("drive must be 'left' or 'right'")
    d, a0 = params.d, params.alpha0
    k = complex(np.sqrt(2 * complex(params.mass) * params.delta + 0j))
    src = np.array([SQRT2 * a0, 0.0]) if drive == "left" else np.array([0.0, SQRT2 * a0])

    if k == 0:
        # basis 1, z
        f = lambda z: np.stack([np.ones_like(z), z])
        fp = lambda z: np.stack([np.zeros_like(z), np.ones_like(z)])
    else:
        f = lambda z: np.stack([np.exp(1j * k * z), np.exp(-1j * k * (z - d))])
        fp = lambda z: np.stack([1j * k * np.exp(1j * k * z), -1j * k * np.exp(-1j * k * (z - d))])

    ends = np.array([0.0, d])
    fv, fd = f(ends), fp(ends)
    # rows: (f - i f')(0), (f + i f')(d)
    mat = np.array([fv[:, 0] - 1j * fd[:, 0], fv[:, 1] + 1j * fd[:, 1]])
    coef = np.linalg.solve(mat, src.astype(complex))

    th0, thd = coef @ fv[:, 0], coef @ fv[:, 1]
    dth0, dthd = coef @ fd[:, 0], coef @ fd[:, 1]
    psi_p0, psi_m0 = (th0 - 1j * dth0) / SQRT2, (th0 + 1j * dth0) / SQRT2
    psi_pd, psi_md = (thd - 1j * dthd) / SQRT2, (thd + 1j * dthd) / SQRT2
    t, r = _outputs(psi_p0, psi_m0, psi_pd, psi_md, a0, drive)
    theta = coef @ f(grid.z) if grid is not None else None
    return LinearSolution(theta=theta, transmission=t, reflection=r, psi_plus_out=psi_pd,
                          psi_minus_out=psi_m0, grid=grid, drive=drive, k=k)


@dataclass
class SpectrumRow:
    delta: float
    T_analytic: float
    R_analytic: float
    T_numeric: float
    R_numeric: float
    error: Optional[str] = None


def transmission_spectrum(params: EffectiveParams, deltas: Sequence[float],
                          n: int = 400) -> list[SpectrumRow]:
    """Analytic and finite-difference ``(T, R)`` for each detuning.

    A failing point is recorded with NaNs and its error message; the sweep
    carries on.
    """
    deltas = [float(x) for x in deltas]
    if any(not math.isfinite(x) for x in deltas):
        raise ValueError("detunings must be finite")
    if any(b < a for a, b in zip(deltas, deltas[1:])):
        raise ValueError("detunings must be sorted")
    grid = Grid(n=n, d=params.d)
    rows = []
    for delta in deltas:
        p = params.with_(delta=delta)
        row = SpectrumRow(delta, math.nan, math.nan, math.nan, math.nan)
        try:
            ana = analytic_single_photon(p)
            row.T_analytic, row.R_analytic = ana.transmission, ana.reflection
            num = solve_single_photon(p, grid)
            row.T_numeric, row.R_numeric = num.transmission, num.reflection
        except (SolverError, ValueError, np.linalg.LinAlgError) as exc:
            row.error = str(exc)
        rows.append(row)
    return rows


SPECTRUM_HEADER = ["delta", "T_analytic", "R_analytic", "T_numeric", "R_numeric"]


def write_spectrum_csv(path, rows: Sequence[SpectrumRow]) -> None:
    with open(Path(path), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SPECTRUM_HEADER)
        for r in rows:
            w.writerow([f"{getattr(r, c):.12e}" for c in SPECTRUM_HEADER])
