"""Truncated photon state on a uniform grid over ``[0, d]``.

A state holds the vacuum amplitude, the one-photon envelope ``theta(z)`` and
the symmetric two-photon envelope ``phi(z1, z2)``.  Envelopes are the
steady-state amplitudes with the drive phase stripped, i.e. the full fields
are ``theta * exp(-i delta t)`` and ``phi * exp(-2 i delta t)``.

On disk a state is a JSON header plus three CSV tables (``theta``, ``|phi|``
and ``arg(phi)``); see :func:`save_state`.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

MIN_POINTS = 16


@dataclass(frozen=True)
class Grid:
    n: int
    d: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < MIN_POINTS:
            raise ValueError(f"grid needs an integer n >= {MIN_POINTS}, got {self.n}")
        if not self.d > 0:
            raise ValueError("grid length must be positive")

    @property
    def h(self) -> float:
        return self.d / (self.n - 1)

    @property
    def z(self) -> np.ndarray:
        z = np.arange(self.n) * self.h
        z[-1] = self.d
        return z

    def trapezoid_weights(self) -> np.ndarray:
        w = np.full(self.n, self.h)
        w[0] = w[-1] = self.h / 2
        return w


@dataclass
class FieldState:
    grid: Grid
    theta: np.ndarray
    phi: np.ndarray
    epsilon: complex = 1.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        n = self.grid.n
        self.theta = np.asarray(self.theta, dtype=complex)
        self.phi = np.asarray(self.phi, dtype=complex)
        if self.theta.shape != (n,) or self.phi.shape != (n, n):
            raise ValueError(
                f"field shapes {self.theta.shape}, {self.phi.shape} do not match grid n={n}"
            )

    def symmetry_residual(self) -> float:
        """``max|phi - phi^T| / max|phi|`` (0 for the vacuum)."""
        scale = np.max(np.abs(self.phi))
        if scale == 0:
            return 0.0
        return float(np.max(np.abs(self.phi - self.phi.T)) / scale)


def symmetrize(phi: np.ndarray) -> np.ndarray:
    return 0.5 * (phi + phi.T)


def coherent_factorized(theta, grid: Grid) -> FieldState:
    """State whose two-photon part is the coherent-state product ``theta x theta / 2``."""
    theta = np.asarray(theta, dtype=complex)
    return FieldState(grid=grid, theta=theta, phi=np.outer(theta, theta) / 2, epsilon=1.0)


# -- serialization -----------------------------------------------------------

def _fmt(x: float) -> str:
    return f"{x:.12e}"


def _write_table(path: Path, rows, header=None) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if header:
            w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def write_phi_abs(path, phi: np.ndarray) -> None:
    """``|phi|`` as an ``n x n`` row-major table (row index is ``z1``)."""
    _write_table(Path(path), np.abs(phi))


def save_state(state: FieldState, directory, stem: str = "state", params: Optional[dict] = None) -> Path:
    """Write ``<stem>.json`` plus ``<stem>_theta.csv``, ``<stem>_phi_abs.csv``
    and ``<stem>_phi_arg.csv`` into ``directory``; returns the header path."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    files = {
        "theta": f"{stem}_theta.csv",
        "phi_abs": f"{stem}_phi_abs.csv",
        "phi_arg": f"{stem}_phi_arg.csv",
    }
    header = {
        "format": "nlsetransport.fieldstate/1",
        "grid": {"n": state.grid.n, "d": state.grid.d, "h": state.grid.h},
        "epsilon": [float(np.real(state.epsilon)), float(np.imag(state.epsilon))],
        "params": params or {},
        "meta": state.meta,
        "files": files,
        "theta_columns": ["z", "re_theta", "im_theta"],
        "phi_layout": "row i = z1 index, column j = z2 index",
    }
    z = state.grid.z
    _write_table(directory / files["theta"],
                 zip(z, state.theta.real, state.theta.imag),
                 header=header["theta_columns"])
    _write_table(directory / files["phi_abs"], np.abs(state.phi))
    _write_table(directory / files["phi_arg"], np.angle(state.phi))
    path = directory / f"{stem}.json"
    path.write_text(json.dumps(header, indent=2, sort_keys=True) + "\n")
    return path


def load_state(path) -> FieldState:
    path = Path(path)
    header = json.loads(path.read_text())
    grid = Grid(n=header["grid"]["n"], d=header["grid"]["d"])
    base = path.parent
    th = np.loadtxt(base / header["files"]["theta"], delimiter=",", skiprows=1, ndmin=2)
    mag = np.loadtxt(base / header["files"]["phi_abs"], delimiter=",", ndmin=2)
    arg = np.loadtxt(base / header["files"]["phi_arg"], delimiter=",", ndmin=2)
    eps = complex(*header["epsilon"])
    return FieldState(grid=grid, theta=th[:, 1] + 1j * th[:, 2], phi=mag * np.exp(1j * arg),
                      epsilon=eps, meta=header.get("meta", {}))
