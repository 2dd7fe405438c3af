"""Open-boundary Bethe ansatz for two photons.

A two-photon eigenmode of the open medium is a pair of complex wavevectors
satisfying, for ``(i, j) = (1, 2)`` and ``(2, 1)``,

    exp(2 i k_i d) = (k_i + 1)^2 / (k_i - 1)^2
                     * (k_i - k_j + i kappa)(k_i + k_j + i kappa)
                     / ((k_i - k_j - i kappa)(k_i + k_j - i kappa))

with energy ``E = k1^2 + k2^2``.  Newton iterates on the logarithm of the
ratio of the two sides (imaginary part wrapped into ``(-pi, pi]``), which keeps
the Jacobian well scaled when ``d`` is large.

Bound branches are labelled by ``n = n1 + n2 - 1`` where ``(n1, n2)`` is the
free pair they connect to as ``kappa -> 0-``: ``n = 1, 2, 3, ...`` come from
``(1, 1), (1, 2), (2, 2), ...``.
"""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import numpy as np
from scipy.optimize import brentq

log = logging.getLogger(__name__)

#: A root is converged when its relative residual is below this.
RESIDUAL_TOL = 1e-10
#: Bound pairs have ``|Im(k1 - k2)|`` above this fraction of ``|kappa|``.
BOUND_THRESHOLD = 0.25
#: Roots closer than this (in either ordering) are the same root.
DUPLICATE_TOL = 1e-6
#: Starting point of continuations, in units of ``1/d``.
KAPPA_D_START = 1e-3


class BetheError(RuntimeError):
    """Newton or continuation failure; ``last`` holds the final iterate."""

    def __init__(self, message: str, last: Optional["ModeRoot"] = None):
        super().__init__(message)
        self.last = last


Label = Union[int, tuple]


@dataclass(frozen=True)
class ModeRoot:
    k1: complex
    k2: complex
    kappa: float
    d: float
    branch: str  # "free" or "bound"
    label: Label  # n for bound, (n1, n2) for free
    residual: float = math.inf
    converged: bool = False
    duplicate: bool = False

    @property
    def energy(self) -> complex:
        return self.k1**2 + self.k2**2

    @property
    def k(self) -> np.ndarray:
        return np.array([self.k1, self.k2], dtype=complex)

    @property
    def n(self) -> Optional[int]:
        return self.label if self.branch == "bound" else None


# -- single particle ----------------------------------------------------------

def _sp_residual(k: complex, d: float) -> complex:
    return np.exp(2j * k * d) * (k - 1) ** 2 - (k + 1) ** 2


def single_particle_roots(d: float, n_max: int, tol: float = 1e-12) -> list[complex]:
    """Roots of ``exp(2ikd) = (k+1)^2/(k-1)^2`` near ``n pi/d``, ``n = 1..n_max``."""
    if not d > 0:
        raise ValueError("d must be positive")
    roots = []
    for n in range(1, n_max + 1):
        k = complex(n * math.pi / d)
        ok = False
        for _ in range(100):
            e = np.exp(2j * k * d)
            f = e * (k - 1) ** 2 - (k + 1) ** 2
            fp = 2j * d * e * (k - 1) ** 2 + 2 * e * (k - 1) - 2 * (k + 1)
            step = -f / fp
            if abs(step) > math.pi / (4 * d):
                step *= math.pi / (4 * d) / abs(step)
            k += step
            scale = max(1.0, abs((k + 1) ** 2))
            if abs(_sp_residual(k, d)) / scale < tol and abs(step) < 1e-14 * max(1, abs(k)):
                ok = True
                break
        if not ok and abs(_sp_residual(k, d)) / max(1.0, abs((k + 1) ** 2)) < tol:
            ok = True
        if ok and abs(k) > 1e-8:
            roots.append(complex(k))
        else:
            log.warning("single-particle Newton failed for n=%d (last k=%s)", n, k)
    return roots


# -- two particles ------------------------------------------------------------

def _wrap(v: np.ndarray) -> np.ndarray:
    return v.real + 1j * ((v.imag + math.pi) % (2 * math.pi) - math.pi)


def _log_residual(k: np.ndarray, kappa: float, d: float) -> np.ndarray:
    out = np.empty(2, dtype=complex)
    ik = 1j * kappa
    for i, (a, b) in enumerate(((k[0], k[1]), (k[1], k[0]))):
        v = (2j * a * d + 2 * np.log(a - 1) + np.log(a - b - ik) + np.log(a + b - ik)
             - 2 * np.log(a + 1) - np.log(a - b + ik) - np.log(a + b + ik))
        out[i] = v
    return _wrap(out)


def _log_jacobian(k: np.ndarray, kappa: float, d: float) -> np.ndarray:
    ik = 1j * kappa

    def parts(a, b):
        da = (2j * d + 2 / (a - 1) + 1 / (a - b - ik) + 1 / (a + b - ik)
              - 2 / (a + 1) - 1 / (a - b + ik) - 1 / (a + b + ik))
        db = -1 / (a - b - ik) + 1 / (a + b - ik) + 1 / (a - b + ik) - 1 / (a + b + ik)
        return da, db

    a11, a12 = parts(k[0], k[1])
    a22, a21 = parts(k[1], k[0])
    return np.array([[a11, a12], [a21, a22]])


def bethe_residual(k1: complex, k2: complex, kappa: float, d: float) -> float:
    """``max_i |LHS_i - RHS_i| / max(1, |LHS_i|, |RHS_i|)`` in the exponential form.

    Computed directly from the products, independently of the Newton loop.
    """
    worst = 0.0
    ik = 1j * kappa
    for a, b in ((k1, k2), (k2, k1)):
        lhs = np.exp(2j * a * d)
        rhs = ((a + 1) ** 2 / (a - 1) ** 2) * ((a - b + ik) * (a + b + ik)) / (
            (a - b - ik) * (a + b - ik))
        worst = max(worst, abs(lhs - rhs) / max(1.0, abs(lhs), abs(rhs)))
    return float(worst)


def _spurious(k: np.ndarray, d: float) -> Optional[str]:
    tiny = 1e-6 / d
    if min(abs(k[0]), abs(k[1])) < tiny:
        return "k = 0"
    if abs(k[0] - k[1]) < tiny:
        return "k1 = k2"
    if abs(k[0] + k[1]) < tiny:
        return "k1 = -k2"
    return None


def classify(k1: complex, k2: complex, kappa: float) -> str:
    """Bound pairs straddle the real axis with a splitting of order ``|kappa|``.

    The sign condition keeps weakly interacting free pairs, whose common
    radiative ``Im k < 0`` can exceed ``|kappa|/4``, out of the bound class.
    """
    split = abs((k1 - k2).imag) > BOUND_THRESHOLD * abs(kappa)
    return "bound" if split and k1.imag * k2.imag < 0 else "free"


def _canonical(k: np.ndarray) -> np.ndarray:
    k1, k2 = k
    if abs(k1.real - k2.real) <= 1e-9 * max(1.0, abs(k1.real)):
        return k if k1.imag >= k2.imag else k[::-1]
    return k if k1.real <= k2.real else k[::-1]


def _newton(k: np.ndarray, kappa: float, d: float, max_iter: int = 60,
            tol: float = 1e-13) -> tuple[np.ndarray, float]:
    trust = math.pi / (4 * d)
    k = np.array(k, dtype=complex)
    f = _log_residual(k, kappa, d)
    for _ in range(max_iter):
        fn = np.max(np.abs(f))
        if fn < tol:
            break
        try:
            step = np.linalg.solve(_log_jacobian(k, kappa, d), -f)
        except np.linalg.LinAlgError:
            break
        size = np.max(np.abs(step))
        if size > trust:
            step *= trust / size
        lam = 1.0
        while True:
            trial = k + lam * step
            ft = _log_residual(trial, kappa, d)
            if np.max(np.abs(ft)) < fn or lam < 1e-6:
                break
            lam /= 2
        k, f = trial, ft
    return k, float(np.max(np.abs(f)))


def seed_free(d: float, n1: int, n2: int, kappa: float = 0.0) -> ModeRoot:
    """Pair built from single-particle roots ``n1 <= n2``.

    Equal indices are split by ``sqrt(2 kappa / d) / 2``, the leading
    small-``kappa`` behaviour: real for repulsion, imaginary for attraction.
    """
    if not 1 <= n1 <= n2:
        raise ValueError("pairs need 1 <= n1 <= n2")
    roots = single_particle_roots(d, n2)
    if n1 == n2:
        if kappa == 0:
            raise ValueError("an equal pair needs kappa != 0 to be seeded")
        split = 0.5 * np.sqrt(2 * kappa / d + 0j)
        return ModeRoot(roots[n1 - 1] + split, roots[n1 - 1] - split, kappa, d, "free", (n1, n2))
    return ModeRoot(roots[n1 - 1], roots[n2 - 1], kappa, d, "free", (n1, n2))


def bound_parents(n: int) -> tuple[int, int]:
    """Free pair that the bound branch ``n`` joins as ``kappa -> 0-``."""
    if n < 1:
        raise ValueError("bound branches start at n = 1")
    return (n + 1) // 2, (n + 2) // 2


def seed_bound(d: float, n: int, kappa: float) -> ModeRoot:
    """Starting guess for bound branch ``n`` at small attractive ``kappa``."""
    if not kappa < 0:
        raise ValueError("bound seeds need kappa < 0")
    return replace(seed_free(d, *bound_parents(n), kappa), branch="bound", label=n)


def _is_duplicate(k: np.ndarray, known: Iterable[ModeRoot]) -> bool:
    for r in known:
        other = r.k
        if (np.max(np.abs(k - other)) < DUPLICATE_TOL
                or np.max(np.abs(k - other[::-1])) < DUPLICATE_TOL):
            return True
    return False


def two_particle_roots(d: float, kappa: float, seed: ModeRoot,
                       known: Sequence[ModeRoot] = (), validate: bool = True) -> ModeRoot:
    """Damped Newton from ``seed`` at interaction ``kappa``.

    The branch name is checked against the splitting criterion when
    ``validate`` is set; bound branches born from unequal parents are free
    like until the pair collides, so continuation validates only at its end.
    """
    k, _ = _newton(seed.k, kappa, d)
    res = bethe_residual(k[0], k[1], kappa, d)
    k = _canonical(k)
    root = ModeRoot(complex(k[0]), complex(k[1]), kappa, d, seed.branch, seed.label,
                    residual=res, converged=res < RESIDUAL_TOL)
    why = _spurious(k, d)
    if why is not None:
        raise BetheError(f"Newton collapsed onto the spurious family {why}", root)
    if not root.converged:
        raise BetheError(f"Newton did not converge: residual {res:.3e}", root)
    if validate and kappa != 0 and classify(root.k1, root.k2, kappa) != seed.branch:
        raise BetheError(
            f"root classified as {classify(root.k1, root.k2, kappa)}, seed was {seed.branch}", root)
    if _is_duplicate(k, known):
        root = replace(root, duplicate=True)
    return root


def continue_root(root: ModeRoot, kappa_target: float, max_step_d: float = 0.2,
                  min_step_d: float = 1e-9) -> ModeRoot:
    """Follow a converged root in ``kappa`` with an adaptive secant predictor.

    A step is accepted when Newton converges and moves the root by less than
    ``pi/(8d)`` from the prediction; otherwise the step is halved.
    """
    d = root.d
    k, kap = root.k, root.kappa
    prev = None
    step = math.copysign(0.02 / d, kappa_target - kap) if kappa_target != kap else 0.0
    jump = math.pi / (8 * d)
    while kap != kappa_target:
        nk = kap + step
        if (step > 0 and nk > kappa_target) or (step < 0 and nk < kappa_target):
            nk = kappa_target
        if prev is None:
            guess = k
        else:
            guess = k + (k - prev[0]) * (nk - kap) / (kap - prev[1])
        trial, _ = _newton(guess, nk, d, max_iter=25)
        res = bethe_residual(trial[0], trial[1], nk, d)
        ok = (res < RESIDUAL_TOL and np.max(np.abs(trial - guess)) < jump
              and _spurious(trial, d) is None)
        if ok:
            prev = (k, kap)
            k, kap = trial, nk
            step = math.copysign(min(abs(step) * 1.5, max_step_d / d), step)
        else:
            step /= 2
            if abs(step) < min_step_d / d:
                last = ModeRoot(complex(k[0]), complex(k[1]), kap, d, root.branch, root.label,
                                residual=bethe_residual(k[0], k[1], kap, d), converged=True)
                raise BetheError(
                    f"continuation of {root.branch} {root.label} stalled at kappa*d={kap * d:.6g}",
                    last)
    k = _canonical(k)
    res = bethe_residual(k[0], k[1], kap, d)
    return ModeRoot(complex(k[0]), complex(k[1]), kap, d, root.branch, root.label,
                    residual=res, converged=res < RESIDUAL_TOL)


def _branch_start(d: float, n: int, kappa: float = -math.inf) -> ModeRoot:
    kappa0 = max(-KAPPA_D_START / d, kappa)
    return two_particle_roots(d, kappa0, seed_bound(d, n, kappa0), validate=False)


def bound_state_spectrum(d: float, kappa: float, n_max: int) -> list[ModeRoot]:
    """Bound branches ``n = 1..n_max`` followed from ``kappa -> 0-`` to ``kappa``.

    Stops at the first branch that cannot be followed and returns what was
    found before it.
    """
    if not kappa < 0:
        raise ValueError("bound states need attractive kappa < 0")
    out: list[ModeRoot] = []
    for n in range(1, n_max + 1):
        try:
            root = continue_root(_branch_start(d, n, kappa), kappa)
        except BetheError as exc:
            log.warning("bound branch n=%d lost: %s; spectrum truncated", n, exc)
            break
        if classify(root.k1, root.k2, kappa) != "bound":
            log.warning("branch n=%d is not yet bound at kappa*d=%.4g (|Im dk|=%.3g)",
                        n, kappa * d, abs((root.k1 - root.k2).imag))
        if _is_duplicate(root.k, out):
            root = replace(root, duplicate=True)
        out.append(root)
    return out


def free_state(d: float, n1: int, n2: int, kappa: float) -> ModeRoot:
    """Pair ``(n1, n2)`` continued from ``kappa -> 0`` (on the side of ``kappa``)."""
    kappa0 = math.copysign(KAPPA_D_START / d, kappa if kappa != 0 else 1.0)
    start = seed_free(d, n1, n2, kappa0)
    root = two_particle_roots(d, kappa0, start, validate=False)
    return continue_root(root, kappa)


def resonance_kappas(d: float, delta_res: float, n_range: Iterable[int],
                     kappa_window: tuple[float, float], sample_d: float = 0.05,
                     xtol: float = 1e-12) -> list[tuple[int, float]]:
    """Attractive ``kappa`` where ``Re E_n(kappa) = 2 delta_res`` inside the window.

    Each branch is followed from ``kappa -> 0-`` across the window on a
    ``sample_d / d`` lattice; every sign change is refined with Brent's method,
    re-solving Newton from the nearest sampled root.
    """
    lo, hi = sorted(kappa_window)
    if not delta_res > 0:
        raise ValueError("delta_res must be positive")
    if hi >= 0:
        raise ValueError("the window must lie in attractive kappa < 0")
    target = 2 * delta_res
    out = []
    for n in n_range:
        try:
            root = _branch_start(d, n)
        except BetheError as exc:
            log.warning("n=%d: no starting root (%s)", n, exc)
            continue
        kappas = np.arange(hi, lo - 0.5 * sample_d / d, -sample_d / d)
        samples = []
        try:
            root = continue_root(root, kappas[0])
            samples.append(root)
            for kap in kappas[1:]:
                root = continue_root(root, float(kap))
                samples.append(root)
        except BetheError as exc:
            log.warning("n=%d: branch lost (%s); searching the followed part only", n, exc)
        for a, b in zip(samples, samples[1:]):
            fa, fb = a.energy.real - target, b.energy.real - target
            if fa == 0:
                out.append((n, a.kappa))
                continue
            if fa * fb > 0:
                continue

            def f(kap, a=a, b=b):
                near = a if abs(kap - a.kappa) <= abs(kap - b.kappa) else b
                return continue_root(near, kap).energy.real - target

            out.append((n, float(brentq(f, b.kappa, a.kappa, xtol=xtol))))
    return out


# -- output -------------------------------------------------------------------

MODE_HEADER = ["n", "kappa", "re_k1", "im_k1", "re_k2", "im_k2", "re_E", "im_E", "branch",
               "residual"]


def _label_text(root: ModeRoot) -> str:
    if root.branch == "bound":
        return str(root.label)
    return "-".join(str(x) for x in root.label)


def write_modes_csv(path, roots: Sequence[ModeRoot]) -> None:
    with open(Path(path), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(MODE_HEADER)
        for r in roots:
            e = r.energy
            w.writerow([_label_text(r)] + [f"{x:.12e}" for x in (
                r.kappa, r.k1.real, r.k1.imag, r.k2.real, r.k2.imag, e.real, e.imag)]
                + [r.branch, f"{r.residual:.3e}"])
