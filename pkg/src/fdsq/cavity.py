"""Detuned two-mirror cavity: complex reflectance and squeezing-ellipse rotation.

The reflectance of a cavity with round-trip length 2L, input coupler r1 and
back mirror r2 at sideband frequency f (Hz, signed, relative to the carrier)
is

    rho(f) = (r1 - r2 e^{i delta}) / (1 - r1 r2 e^{i delta}),
    delta  = 2 (2 pi f - 2 pi f_d) L / c,

with f_d the (signed) detuning of the cavity resonance from the carrier.
For an over-coupled cavity (r2 > r1) the reflection phase winds through a
full 2 pi per free spectral range; reflecting a squeezed beam then rotates
its squeezing ellipse by half the sideband phase shift.

Two rotation models are provided: the single-sideband approximation
(rotation_angle_approx, valid for linewidth much smaller than detuning) and
the exact two-sideband quadrature transfer referenced to the reflected
carrier phase (quadrature_transfer).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
import scipy.constants

from .states import QuadratureState, apply_loss, rotate_state

C_LIGHT = scipy.constants.c  # 299 792 458 m/s

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class CavityParams:
    """Mirror amplitude reflectivities, length and signed detuning of a linear cavity."""

    r1: float
    r2: float
    length_m: float
    detuning_hz: float = 0.0

    c: float = C_LIGHT  # class-level constant, not an instrument parameter

    def __post_init__(self):
        if not 0.0 <= self.r1 < 1.0:
            raise ValueError(f"input coupler reflectivity must be in [0, 1), got {self.r1}")
        if not 0.0 <= self.r2 <= 1.0:
            raise ValueError(f"back mirror reflectivity must be in [0, 1], got {self.r2}")
        if not self.length_m > 0.0:
            raise ValueError(f"cavity length must be > 0, got {self.length_m}")


@dataclass(frozen=True)
class CavityFigures:
    """Derived cavity figures: free spectral range, finesse, linewidth (all Hz where applicable)."""

    fsr_hz: float
    finesse: float
    fwhm_hz: float


def round_trip_phase(cav: CavityParams, f_hz: float) -> float:
    """Raw (unwrapped) round-trip phase detuning delta at sideband frequency f."""
    return 2.0 * _TWO_PI * (f_hz - cav.detuning_hz) * cav.length_m / cav.c


def reflectance(cav: CavityParams, f_hz: float) -> complex:
    """Complex amplitude reflectance rho at signed sideband frequency f (Hz)."""
    z = np.exp(1j * round_trip_phase(cav, f_hz))
    return complex((cav.r1 - cav.r2 * z) / (1.0 - cav.r1 * cav.r2 * z))


def cavity_figures(cav: CavityParams) -> CavityFigures:
    """FSR = c / 2L, finesse = pi sqrt(r1 r2) / (1 - r1 r2), FWHM = FSR / finesse."""
    r1r2 = cav.r1 * cav.r2
    if r1r2 <= 0.0:
        raise ValueError("finesse undefined for r1 * r2 = 0")
    fsr = cav.c / (2.0 * cav.length_m)
    finesse = math.pi * math.sqrt(r1r2) / (1.0 - r1r2)
    return CavityFigures(fsr_hz=fsr, finesse=finesse, fwhm_hz=fsr / finesse)


def half_arg_rotation(phi: float) -> float:
    """Quadrature rotation caused by phase phi on a single sideband: phi / 2."""
    return 0.5 * phi


def _branch_arg(cav: CavityParams, f_hz: float) -> float:
    """arg(rho) on the branch that is continuous across one FSR around resonance.

    Anchored to 0 at the anti-resonance below resonance (f -> detuning - FSR/2
    from above).  For an over-coupled cavity (r2 > r1) the phase then sweeps
    0 -> pi -> 2 pi through resonance; otherwise there is no winding and the
    principal value is already continuous.
    """
    delta = math.remainder(round_trip_phase(cav, f_hz), _TWO_PI)
    zr, zi = math.cos(delta), math.sin(delta)
    a_num = math.atan2(-cav.r2 * zi, cav.r1 - cav.r2 * zr)
    a_den = math.atan2(-cav.r1 * cav.r2 * zi, 1.0 - cav.r1 * cav.r2 * zr)
    if cav.r2 > cav.r1 and a_num < 0.0:
        a_num += _TWO_PI
    return a_num - a_den


def rotation_angle_approx(cav: CavityParams, f_hz: float, theta_opa: float = 0.0) -> float:
    """Squeezing angle after reflection, single-sideband approximation.

    theta_s(f) = theta_opa + arg(rho)/2 evaluated at the sideband the cavity
    is near-resonant with: the upper sideband for positive detuning, the
    lower one (with the opposite rotation sense) for negative detuning.  The
    two signs make the rotations of oppositely detuned cavities cancel
    exactly.  Phase unwrapping is anchored at the anti-resonance, so for a
    strongly over-coupled cavity the rotation sweeps 0 -> 90 deg -> 180 deg
    through resonance (sign-flipped for negative detuning).
    """
    if cav.detuning_hz < 0.0:
        mirrored = replace(cav, detuning_hz=-cav.detuning_hz)
        return theta_opa - rotation_angle_approx(mirrored, f_hz, 0.0)
    return theta_opa + 0.5 * _branch_arg(cav, f_hz)


@dataclass(frozen=True)
class QuadratureTransfer:
    """Exact two-sideband reflection figures at one measurement frequency."""

    rotation: float  # quadrature rotation referenced to the reflected carrier
    common_phase: float  # time-shift phase, variance-neutral
    magnitude_pair: tuple[float, float]  # (|rho(+f)|, |rho(-f)|)


def quadrature_transfer(cav: CavityParams, f_hz: float) -> QuadratureTransfer:
    """Exact quadrature rotation from both sidebands, carrier-referenced.

    rotation = (arg rho(+f) + arg rho(-f))/2 - arg rho(0).  The carrier term
    appears because the homodyne phase reference is the reflected carrier;
    the single-sideband approximation silently drops it together with the
    slowly varying far-sideband phase.
    """
    if f_hz < 0.0:
        raise ValueError("measurement frequency must be >= 0")
    a_plus = _branch_arg(cav, f_hz)
    a_minus = _branch_arg(cav, -f_hz)
    a_carrier = _branch_arg(cav, 0.0)
    return QuadratureTransfer(
        rotation=0.5 * (a_plus + a_minus) - a_carrier,
        common_phase=0.5 * (a_plus - a_minus),
        magnitude_pair=(abs(reflectance(cav, f_hz)), abs(reflectance(cav, -f_hz))),
    )


def reflect_state(
    s: QuadratureState, cav: CavityParams, f_hz: float, exact: bool = False
) -> QuadratureState:
    """Reflect a Gaussian state off the cavity at measurement frequency |f|.

    Exact mode rotates by the two-sideband carrier-referenced angle and
    attenuates by the geometric-mean power loss of the sideband pair,
    eta = |rho(+f)| |rho(-f)|.  Approximate mode uses rotation_angle_approx
    and the power reflectance of the near-resonant sideband alone.
    """
    f = abs(f_hz)
    if exact:
        qt = quadrature_transfer(cav, f)
        rot = qt.rotation
        eta = qt.magnitude_pair[0] * qt.magnitude_pair[1]
    else:
        rot = rotation_angle_approx(cav, f, 0.0)
        f_near = f if cav.detuning_hz >= 0.0 else -f
        eta = abs(reflectance(cav, f_near)) ** 2
    return apply_loss(rotate_state(s, rot), min(eta, 1.0))


def cascade_rotation(cavs: list[CavityParams], f_hz: float, theta_opa: float = 0.0) -> float:
    """Total approximate squeezing angle after reflecting off each cavity in turn."""
    return theta_opa + sum(rotation_angle_approx(c, f_hz, 0.0) for c in cavs)
