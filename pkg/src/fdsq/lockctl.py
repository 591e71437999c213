"""Homodyne-angle lock control: combined DC/RF error signal and lock plans.

The homodyne phase phi is locked on a zero of the combined error signal

    S_err(phi) = b * i_dc * DC(phi) + (1 - b) * i_rf * RF(phi),
    DC(phi) = a_dc * cos(phi + off_dc),   RF(phi) = a_rf * sin(phi + off_rf),

where the computer-controlled mixing parameter b runs over [0, 1] within
each quadrant [n pi/2, (n+1) pi/2) and the signal inversions i_dc, i_rf
extend the bijective b <-> phi mapping to the full circle.  RF-only (b = 0)
locks the amplitude quadrature, DC-only (b = 1) the phase quadrature.

Inversions are chosen per quadrant so that the error-signal slope at every
lock point is negative (fixed negative-feedback convention).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import NumericalError

_HALF_PI = 0.5 * math.pi

# (invert_dc, invert_rf) per quadrant; keeps d S_err / d phi < 0 at the lock
# point everywhere on the circle.
_QUADRANT_INVERSIONS = ((1, -1), (1, 1), (-1, 1), (-1, -1))


@dataclass(frozen=True)
class ErrorSignalModel:
    """Amplitudes and phase offsets of the DC and RF homodyne error signals."""

    a_dc: float = 1.0
    a_rf: float = 1.0
    phase_offset_dc: float = 0.0
    phase_offset_rf: float = 0.0

    def __post_init__(self):
        if self.a_dc <= 0.0 or self.a_rf <= 0.0:
            raise ValueError("signal amplitudes must be > 0")
        if abs(self.phase_offset_dc) >= 0.25 * math.pi or abs(self.phase_offset_rf) >= 0.25 * math.pi:
            raise ValueError("phase offsets must satisfy |offset| < pi/4")


DEFAULT_MODEL = ErrorSignalModel()


@dataclass(frozen=True)
class LockPlan:
    """Mixing parameter, signal inversions and the quadrature angle they realize."""

    b: float
    invert_dc: int = 1
    invert_rf: int = 1
    target_theta: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.b <= 1.0:
            raise ValueError(f"mixing parameter must be in [0, 1], got {self.b}")
        if self.invert_dc not in (-1, 1) or self.invert_rf not in (-1, 1):
            raise ValueError("inversions must be +1 or -1")


def dc_signal(m: ErrorSignalModel, phi: float) -> float:
    return m.a_dc * math.cos(phi + m.phase_offset_dc)


def rf_signal(m: ErrorSignalModel, phi: float) -> float:
    return m.a_rf * math.sin(phi + m.phase_offset_rf)


def error_signal(m: ErrorSignalModel, p: LockPlan, phi: float) -> float:
    """Combined error signal b*DC + (1-b)*RF with the plan's inversions applied."""
    return p.b * p.invert_dc * dc_signal(m, phi) + (1.0 - p.b) * p.invert_rf * rf_signal(m, phi)


def plan_for_angle(theta: float, model: ErrorSignalModel = DEFAULT_MODEL) -> LockPlan:
    """Lock plan realizing quadrature angle theta (wrapped into [0, 2 pi)).

    The amplitude-aware solve places the in-quadrant zero of S_err at theta
    assuming offset-free signals; b grows monotonically from 0 to 1 across
    each quadrant.  Signal phase offsets are imperfections unknown to the
    controller, so they are deliberately not compensated here.
    """
    theta = theta % (2.0 * math.pi)
    quadrant = min(int(theta // _HALF_PI), 3)
    i_dc, i_rf = _QUADRANT_INVERSIONS[quadrant]
    # zero condition b*i_dc*DC(theta) + (1-b)*i_rf*RF(theta) = 0, solved for b
    num = -i_rf * model.a_rf * math.sin(theta)
    den = i_dc * model.a_dc * math.cos(theta) - i_rf * model.a_rf * math.sin(theta)
    b = min(max(num / den, 0.0), 1.0)
    return LockPlan(b=b, invert_dc=i_dc, invert_rf=i_rf, target_theta=theta)


def lock_point(p: LockPlan, m: ErrorSignalModel = DEFAULT_MODEL) -> float:
    """Phase the servo settles to: the error-signal zero in the plan's quadrant.

    Found by bracketed root finding on a quadrant padded by pi/8 on both
    sides (signal offsets can push the zero slightly past the quadrant
    edge); tolerance 1e-10 rad.
    """
    quadrant = min(int((p.target_theta % (2.0 * math.pi)) // _HALF_PI), 3)
    pad = math.pi / 8.0
    lo = quadrant * _HALF_PI - pad
    hi = (quadrant + 1) * _HALF_PI + pad

    def f(phi):
        return error_signal(m, p, phi)

    f_lo, f_hi = f(lo), f(hi)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if f_lo * f_hi > 0.0:
        raise NumericalError("error signal has no zero crossing in the lock bracket")
    return float(brentq(f, lo, hi, xtol=1e-10))


def sample_lock_errors(
    n: int,
    rng: np.random.Generator,
    sigma_rad: float = math.radians(0.5),
    bound_rad: float = math.radians(1.0),
) -> np.ndarray:
    """Per-angle lock errors: Gaussian jitter truncated at the stated precision bound."""
    if sigma_rad == 0.0:
        return np.zeros(n)
    out = np.empty(n)
    for i in range(n):
        while True:
            e = sigma_rad * rng.standard_normal()
            if abs(e) <= bound_rad:
                out[i] = e
                break
    return out
