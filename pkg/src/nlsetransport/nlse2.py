"""Two-photon sector: driven steady state, time-domain integration, binding.

The two-photon envelope obeys

    2 delta phi = -(1/2m) (d^2/dz1^2 + d^2/dz2^2) phi + 2 kappa delta(z1 - z2) phi

with open ends.  At ``z1 = 0`` the forward field of one photon is tied to the
one-photon envelope of the other, ``phi - i d_z1 phi = (alpha0/sqrt 2) theta(z2)``,
and the incoming combination vanishes at ``z1 = d``; the same holds in ``z2``.
The contact interaction sits on the diagonal nodes as ``2 kappa / h``.

Two independent constructions are provided: :func:`solve_two_photon_steady`
assembles the steady operator node by node and solves it directly, while
:func:`evolve_time_domain` builds the propagator from Kronecker products of
the 1D operators and integrates from the vacuum with the implicit midpoint rule.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.linalg import eigh_tridiagonal

from .fields import FieldState, Grid, symmetrize
from .linear_solver import (SQRT2, SolverError, boundary_fields, robin_rows, second_difference,
                            solve_single_photon)
from .params import EffectiveParams, WEAK_DRIVE_LIMIT

log = logging.getLogger(__name__)

#: Post-solve tolerance on ``max|phi - phi^T| / max|phi|``.
SYMMETRY_TOL = 1e-8


@dataclass
class TwoPhotonSystem:
    operator: sp.csc_matrix
    rhs: np.ndarray


@dataclass
class TwoPhotonSolution:
    phi: np.ndarray
    symmetry_residual: float


def two_photon_system(params: EffectiveParams, grid: Grid, theta: np.ndarray) -> TwoPhotonSystem:
    """Sparse steady-state operator over the ``n*n`` nodes (row-major, ``z1`` major).

    Nodes on one boundary carry that boundary's Robin row.  Corner nodes
    carry the sum of the ``z1`` and ``z2`` rows, which keeps the discrete
    system exactly exchange symmetric.
    """
    n, h = grid.n, grid.h
    m = complex(params.mass)
    kappa = complex(params.kappa)
    t = 1.0 / (2 * m * h**2)
    idx = np.arange(n * n).reshape(n, n)

    ii, jj = np.meshgrid(np.arange(1, n - 1), np.arange(1, n - 1), indexing="ij")
    ii, jj = ii.ravel(), jj.ravel()
    centre = idx[ii, jj]
    diag = np.full(centre.size, 4 * t - 2 * params.delta, dtype=complex)
    diag[ii == jj] += 2 * kappa / h
    rows = [centre]
    cols = [centre]
    vals = [diag]
    for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        rows.append(centre)
        cols.append(idx[ii + di, jj + dj])
        vals.append(np.full(centre.size, -t, dtype=complex))

    # Robin rows: 1 - i f'(0) and 1 + i f'(d) share the same node weights
    w = np.array([1 + 1.5j / h, -2j / h, 0.5j / h])
    line = np.arange(n)
    rhs = np.zeros(n * n, dtype=complex)
    src = params.alpha0 / SQRT2 * np.asarray(theta, dtype=complex)
    for edge, inward in ((0, 1), (n - 1, -1)):
        for q in range(3):
            # condition in z1 on the row z1 = edge
            rows.append(idx[edge, line])
            cols.append(idx[edge + inward * q, line])
            vals.append(np.full(n, w[q]))
            # condition in z2 on the column z2 = edge
            rows.append(idx[line, edge])
            cols.append(idx[line, edge + inward * q])
            vals.append(np.full(n, w[q]))
    rhs[idx[0, line]] += src
    rhs[idx[line, 0]] += src

    a = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n * n, n * n)
    ).tocsc()
    return TwoPhotonSystem(operator=a, rhs=rhs)


def _factorize(a: sp.spmatrix, what: str):
    try:
        return spla.splu(a.tocsc())
    except RuntimeError as exc:
        norm1 = spla.norm(a, 1)
        raise SolverError(
            f"{what}: LU factorization failed ({exc}); ||A||_1 = {norm1:.3e}, "
            "condition number estimate is infinite"
        ) from exc


def solve_two_photon_steady(params: EffectiveParams, grid: Grid, theta: np.ndarray) -> TwoPhotonSolution:
    if not params.weak_drive:
        raise ValueError(
            f"(alpha0 d)^2 = {params.drive_strength:.3g} exceeds {WEAK_DRIVE_LIMIT}; "
            "two-photon truncation invalid"
        )
    system = two_photon_system(params, grid, theta)
    lu = _factorize(system.operator, "two-photon steady state")
    phi = lu.solve(system.rhs).reshape(grid.n, grid.n)
    if not np.all(np.isfinite(phi)):
        est = spla.onenormest(system.operator) * spla.onenormest(spla.LinearOperator(
            system.operator.shape, matvec=lu.solve, rmatvec=lambda x: lu.solve(x, trans="H"),
            dtype=complex))
        raise SolverError(f"two-photon solve produced non-finite values; cond_1 ~ {est:.3e}")
    scale = np.max(np.abs(phi))
    resid = float(np.max(np.abs(phi - phi.T)) / scale) if scale > 0 else 0.0
    if resid > SYMMETRY_TOL:
        raise SolverError(f"two-photon solution not exchange symmetric: residual {resid:.3e}")
    log.debug("two-photon solve n=%d symmetry residual %.2e", grid.n, resid)
    return TwoPhotonSolution(phi=symmetrize(phi), symmetry_residual=resid)


def solve_steady_state(params: EffectiveParams, grid: Grid) -> FieldState:
    """One- then two-photon steady solve (the weak-drive hierarchy)."""
    lin = solve_single_photon(params, grid)
    two = solve_two_photon_steady(params, grid, lin.theta)
    return FieldState(grid=grid, theta=lin.theta, phi=two.phi, epsilon=1.0,
                      meta={"transmission": lin.transmission, "reflection": lin.reflection,
                            "symmetry_residual": two.symmetry_residual})


# -- time domain --------------------------------------------------------------

@dataclass
class TimeEvolution:
    state: FieldState
    times: np.ndarray
    g2: np.ndarray
    transmission: np.ndarray
    converged: bool
    t_final: float
    dt: float


def _kinetic_1d(params: EffectiveParams, grid: Grid) -> sp.csr_matrix:
    return (-(1 / (2 * complex(params.mass))) * second_difference(grid.n, grid.h)).tocsr()


def _interior_projector(n: int) -> sp.dia_matrix:
    p = np.ones(n)
    p[0] = p[-1] = 0.0
    return sp.diags(p)


def _drive_sample_interval(delta: float) -> float:
    return 2 * math.pi / abs(delta) if delta != 0 else 2 * math.pi


def evolve_time_domain(params: EffectiveParams, grid: Grid, t_final: float, dt: float,
                       rtol: float = 1e-4, min_periods: int = 3) -> TimeEvolution:
    """Integrate both envelopes from the vacuum under the explicitly
    time-dependent drive ``alpha0 exp(-i delta t)``.

    Boundary nodes are algebraic constraints enforced at the new time level;
    interior nodes use the implicit midpoint rule.  ``g2`` and ``T`` are
    sampled once per drive period; the run stops once both change by less
    than ``rtol`` between periods.  The returned state has the drive phase
    removed so it is directly comparable with the steady solver.
    """
    delta = params.delta
    limit = 0.05 * 2 * math.pi / max(abs(delta), 1.0)
    if not dt < limit:
        raise ValueError(f"dt={dt} does not resolve the drive period (need dt < {limit:.4g})")
    n, h = grid.n, grid.h
    kin = _kinetic_1d(params, grid)
    pin = _interior_projector(n)
    eye = sp.identity(n, format="csr")
    bz = robin_rows(n, h)

    p2 = sp.kron(pin, pin)
    h2 = sp.kron(kin, eye) + sp.kron(eye, kin)
    diag_nodes = np.zeros(n * n)
    diag_nodes[np.arange(1, n - 1) * (n + 1)] = 1.0
    h2 = h2 + (2 * complex(params.kappa) / h) * sp.diags(diag_nodes)
    b2 = sp.kron(bz, eye) + sp.kron(eye, bz)

    interval = _drive_sample_interval(delta)
    steps = max(1, math.ceil(interval / dt))
    dt_eff = interval / steps
    lu1 = _factorize(pin + 0.5j * dt_eff * pin @ kin + bz, "one-photon propagator")
    rhs1 = (pin - 0.5j * dt_eff * pin @ kin).tocsr()
    lu2 = _factorize(p2 + 0.5j * dt_eff * p2 @ h2 + b2, "two-photon propagator")
    rhs2 = (p2 - 0.5j * dt_eff * p2 @ h2).tocsr()

    e0 = np.zeros(n)
    e0[0] = 1.0
    theta = np.zeros(n, dtype=complex)
    phi = np.zeros(n * n, dtype=complex)
    times, g2s, ts = [], [], []
    t = 0.0
    k = 0
    converged = False
    w = grid.trapezoid_weights()
    while t < t_final - 1e-12:
        for _ in range(steps):
            k += 1
            t = k * dt_eff
            drive = params.alpha0 * np.exp(-1j * delta * t)
            b1 = rhs1 @ theta
            b1[0] += SQRT2 * drive
            theta = lu1.solve(b1)
            b = rhs2 @ phi
            b += drive / SQRT2 * (np.kron(e0, theta) + np.kron(theta, e0))
            phi = lu2.solve(b)
        ph = phi.reshape(n, n)
        denom = abs(theta[-1]) ** 2 + 4 * np.sum(w * np.abs(ph[:, -1]) ** 2)
        g2 = 4 * abs(ph[-1, -1]) ** 2 / denom**2 if denom > 0 else math.nan
        tr = abs(boundary_fields(theta, h)[2]) ** 2 / params.alpha0**2 if params.alpha0 else math.nan
        times.append(t)
        g2s.append(g2)
        ts.append(tr)
        if len(g2s) > min_periods:
            dg = abs(g2s[-1] - g2s[-2]) / max(abs(g2s[-1]), 1e-300)
            dtr = abs(ts[-1] - ts[-2]) / max(abs(ts[-1]), 1e-300)
            if dg < rtol and dtr < rtol:
                converged = True
                break
    phase = np.exp(1j * delta * t)
    state = FieldState(grid=grid, theta=theta * phase, phi=symmetrize(phi.reshape(n, n)) * phase**2,
                       epsilon=1.0, meta={"t": t, "converged": converged})
    if not converged:
        log.warning("time-domain run not converged by t=%.1f (last g2 change above %g)", t, rtol)
    return TimeEvolution(state=state, times=np.array(times), g2=np.array(g2s),
                         transmission=np.array(ts), converged=converged, t_final=t, dt=dt_eff)


@dataclass
class ClosedBoxRun:
    times: np.ndarray
    norms: np.ndarray
    phi: np.ndarray


def evolve_closed_box(params: EffectiveParams, grid: Grid, phi0: np.ndarray, t_final: float,
                      dt: float) -> ClosedBoxRun:
    """Undriven two-photon evolution between hard walls (``phi = 0`` on the edges).

    With real mass and interaction the implicit midpoint rule is a Cayley
    transform of a Hermitian matrix, so ``int |phi|^2`` is conserved.
    """
    n, h = grid.n, grid.h
    ni = n - 2
    m = complex(params.mass)
    lap = sp.diags([np.ones(ni - 1), np.full(ni, -2.0), np.ones(ni - 1)], [-1, 0, 1]) / h**2
    kin = -(1 / (2 * m)) * lap
    eye = sp.identity(ni)
    ham = sp.kron(kin, eye) + sp.kron(eye, kin) + (2 * complex(params.kappa) / h) * sp.diags(
        np.eye(ni).ravel())
    lhs = (sp.identity(ni * ni) + 0.5j * dt * ham).tocsc()
    rhs = (sp.identity(ni * ni) - 0.5j * dt * ham).tocsr()
    lu = _factorize(lhs, "closed-box propagator")
    psi = np.asarray(phi0, dtype=complex)[1:-1, 1:-1].ravel().copy()
    nsteps = int(round(t_final / dt))
    times = [0.0]
    norms = [float(np.sum(np.abs(psi) ** 2) * h**2)]
    for k in range(1, nsteps + 1):
        psi = lu.solve(rhs @ psi)
        times.append(k * dt)
        norms.append(float(np.sum(np.abs(psi) ** 2) * h**2))
    out = np.zeros((n, n), dtype=complex)
    out[1:-1, 1:-1] = psi.reshape(ni, ni)
    return ClosedBoxRun(times=np.array(times), norms=np.array(norms), phi=out)


# -- binding energy -----------------------------------------------------------

#: Largest normalized tail density tolerated at the box walls.
TAIL_TOL = 1e-6


def bound_state_binding_check(kappa: float, m: float = 0.5, box: float = 80.0,
                              n: int = 1600) -> float:
    """Lowest eigenvalue of the two-body operator in the relative coordinate.

    Two particles on ``[0, box]`` with spacing ``h = box/(n-1)``; for a
    function of ``r = z1 - z2`` the five-point two-body operator reduces
    exactly to ``-(1/m) f''(r) + (2 kappa / h) [r = 0]`` on ``|r| < box``,
    with hard walls at ``|r| = box``.  For ``kappa < 0`` the result approaches
    ``-m kappa**2`` (``-kappa**2 / 2`` at ``m = 1/2``).
    """
    if m <= 0:
        raise ValueError("mass must be positive and real here")
    h = box / (n - 1)
    j = np.arange(-(n - 2), n - 1)
    diag = np.full(j.size, 2 / (m * h**2))
    diag[j == 0] += 2 * kappa / h
    off = np.full(j.size - 1, -1 / (m * h**2))
    w, v = eigh_tridiagonal(diag, off, select="i", select_range=(0, 0))
    energy = float(w[0])
    if energy < 0:
        dens = np.abs(v[:, 0]) ** 2
        dens /= dens.max()
        tail = max(dens[0], dens[-1])
        if tail > TAIL_TOL:
            raise ValueError(
                f"box too small: normalized density {tail:.2e} at the walls (need < {TAIL_TOL})"
            )
    return energy
