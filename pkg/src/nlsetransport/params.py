"""Physical and dimensionless parameters of the driven nonlinear waveguide.

The field equation is written in units where lengths are measured in the
coherence length ``l_coh`` and times in the coherence time ``t_coh``.  All
solvers in this package work with :class:`EffectiveParams`; the atomic-level
description in :class:`PhysicalParams` only exists to produce those.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import Optional

#: ``(alpha0 * d)**2`` must stay below this for the two-photon truncation.
WEAK_DRIVE_LIMIT = 0.1


class ParameterError(ValueError):
    """Raised when a parameter set violates a physical precondition."""


class WeakDriveWarning(UserWarning):
    """Emitted when the drive is too strong for the two-photon truncation."""


@dataclass(frozen=True)
class PhysicalParams:
    """Atomic-ensemble quantities, all rates and detunings in one unit."""

    gamma: float
    gamma_1d: float
    delta1: float
    delta2: float
    delta3: float
    rabi: float
    density: float
    length: float

    def __post_init__(self):
        for name in ("gamma", "rabi", "density", "length"):
            if not getattr(self, name) > 0:
                raise ParameterError(f"{name} must be positive, got {getattr(self, name)!r}")
        if self.gamma_1d < 0:
            raise ParameterError("gamma_1d must be non-negative")
        if self.gamma_1d > self.gamma:
            raise ParameterError(
                f"gamma_1d={self.gamma_1d} exceeds total emission rate gamma={self.gamma}"
            )

    @property
    def optical_depth(self) -> float:
        return self.density * self.length * self.gamma_1d / self.gamma


@dataclass(frozen=True)
class EffectiveParams:
    """Dimensionless parameters of the field equation.

    ``od``, ``l_coh`` and ``t_coh`` are ``None`` when the parameters were
    entered directly rather than derived from a :class:`PhysicalParams`.
    """

    mass: complex
    kappa: complex
    d: float
    delta: float
    alpha0: float
    l_coh: Optional[float] = None
    t_coh: Optional[float] = None
    od: Optional[float] = None
    kappa_raw: Optional[complex] = None

    def __post_init__(self):
        object.__setattr__(self, "mass", complex(self.mass))
        object.__setattr__(self, "kappa", complex(self.kappa))
        m = self.mass
        if not m.real > 0:
            raise ParameterError(f"Re(mass) must be positive, got {m}")
        if m.imag < 0:
            raise ParameterError(f"Im(mass) < 0 describes gain, which is unsupported (mass={m})")
        if not self.d > 0:
            raise ParameterError(f"system length d must be positive, got {self.d}")
        if not math.isfinite(self.delta):
            raise ParameterError("delta must be finite")
        if self.alpha0 < 0:
            raise ParameterError("alpha0 must be non-negative")

    @property
    def drive_strength(self) -> float:
        """``(alpha0 d)**2``, the small parameter of the truncation."""
        return (self.alpha0 * self.d) ** 2

    @property
    def weak_drive(self) -> bool:
        return self.drive_strength < WEAK_DRIVE_LIMIT

    @property
    def kappa_d(self) -> float:
        return complex(self.kappa).real * self.d

    @property
    def lossless(self) -> bool:
        return complex(self.mass).imag == 0

    def with_(self, **changes) -> "EffectiveParams":
        """Copy with fields replaced (``kappa_d`` is accepted as a shortcut)."""
        if "kappa_d" in changes:
            kd = changes.pop("kappa_d")
            changes["kappa"] = kd / changes.get("d", self.d)
        return replace(self, **changes)


def first_resonance(d: float) -> float:
    """Detuning of the lowest linear transmission resonance, ``(pi/d)**2``."""
    return (math.pi / d) ** 2


def _warn_if_strong(p: EffectiveParams) -> None:
    if not p.weak_drive:
        warnings.warn(
            f"(alpha0*d)^2 = {p.drive_strength:.3g} is not small; the truncation to "
            "two photons is unreliable",
            WeakDriveWarning,
            stacklevel=3,
        )


def derive_effective_params(p: PhysicalParams, alpha0: float) -> EffectiveParams:
    """Map atomic parameters onto the dimensionless field equation.

    The interaction strength ``Gamma_1d / (4 (Delta_2 + i Gamma / 2))`` is a
    ratio of rates and therefore already dimensionless; it is stored both as
    ``kappa`` and ``kappa_raw`` so that a different normalization can be
    introduced in one place.
    """
    if p.delta1 == 0:
        raise ParameterError("delta1 = 0 leaves the effective mass undefined")
    if p.gamma_1d == 0:
        raise ParameterError("gamma_1d = 0 decouples the medium (coherence length is infinite)")
    a1 = abs(p.delta1)
    mass = 0.5 * (1 + 1j * p.gamma / (2 * a1))
    kappa_raw = p.gamma_1d / (4 * (p.delta2 + 0.5j * p.gamma))
    l_coh = 2 * (p.delta1**2 + p.gamma**2 / 4) / (p.gamma_1d * p.density * a1)
    t_coh = a1 / (2 * p.rabi**2)
    eff = EffectiveParams(
        mass=mass,
        kappa=kappa_raw,
        d=p.length / l_coh,
        delta=p.delta3 * t_coh,
        alpha0=alpha0,
        l_coh=l_coh,
        t_coh=t_coh,
        od=p.optical_depth,
        kappa_raw=kappa_raw,
    )
    _warn_if_strong(eff)
    return eff


def make_effective(
    m: complex, kappa: complex, d: float, delta: float, alpha0: float
) -> EffectiveParams:
    """Direct entry of the dimensionless parameters (no atomic model)."""
    eff = EffectiveParams(mass=complex(m), kappa=kappa, d=float(d), delta=float(delta),
                          alpha0=float(alpha0))
    _warn_if_strong(eff)
    return eff


def od_ratio(p: EffectiveParams, delta1_over_gamma: float) -> float:
    """Diagnostic: ``od / (d |Delta_1| / Gamma)``.

    The approximate relation ``OD ~ d |Delta_1|/Gamma`` gives 1 here; the
    exact coherence-length formula gives close to 2 when ``|Delta_1| >> Gamma``.
    """
    if p.od is None:
        raise ParameterError("optical depth is unset for directly entered parameters")
    return p.od / (p.d * abs(delta1_over_gamma))
