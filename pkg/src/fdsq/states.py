"""Single-mode Gaussian quadrature states and their elementary transforms.

Quadratures are normalized so that the vacuum covariance is the identity
(shot-noise variance = 1).  All squeezing figures elsewhere in the package
are quoted relative to that level; converting to the hbar/2 convention
amounts to dividing every covariance by 4.

Angle convention: positive squeeze factor squeezes the quadrature at the
stored angle, i.e. variance_at_angle(squeezed_state(r, theta), theta)
equals exp(-2 r).  Angles are radians throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

# numerical slack allowed on the uncertainty bound det(cov) >= 1
DET_TOLERANCE = 1e-9


def rotation_matrix(delta: float) -> np.ndarray:
    """Counter-clockwise rotation of phase space by `delta` radians."""
    c, s = math.cos(delta), math.sin(delta)
    return np.array([[c, -s], [s, c]])


@dataclass(frozen=True, eq=False)
class QuadratureState:
    """Gaussian state of one sideband mode: 2-vector mean, 2x2 covariance.

    The covariance is stored exactly symmetric (the off-diagonal element is
    stored once) and must be positive definite.  States produced by the
    transforms in this module additionally satisfy det(cov) >= 1 up to
    DET_TOLERANCE; estimators fed with finite statistics may return states
    slightly below that bound, so the bound is not enforced here.
    """

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.array(self.mean, dtype=float).reshape(2)
        cov = np.array(self.cov, dtype=float).reshape(2, 2)
        c01 = 0.5 * (cov[0, 1] + cov[1, 0])
        cov[0, 1] = c01
        cov[1, 0] = c01
        if not np.all(np.isfinite(mean)) or not np.all(np.isfinite(cov)):
            raise ValueError("state moments must be finite")
        if cov[0, 0] <= 0.0 or cov[0, 0] * cov[1, 1] - c01 * c01 <= 0.0:
            raise ValueError("covariance must be positive definite")
        mean.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def det_cov(self) -> float:
        return float(self.cov[0, 0] * self.cov[1, 1] - self.cov[0, 1] ** 2)

    def is_physical(self, tol: float = DET_TOLERANCE) -> bool:
        """Uncertainty relation in shot-noise units: det(cov) >= 1 - tol."""
        return self.det_cov >= 1.0 - tol


@dataclass(frozen=True)
class SqueezeParams:
    """Squeeze factor r_s >= 0 and squeeze-quadrature angle (mod pi)."""

    r_s: float
    theta: float = 0.0

    def __post_init__(self):
        if not (self.r_s >= 0.0):
            raise ValueError(f"squeeze factor must be >= 0, got {self.r_s}")


class EllipseParams(NamedTuple):
    """1-sigma noise-ellipse geometry of a Gaussian state."""

    theta_major: float  # orientation of the major (anti-squeezed) axis, [0, pi)
    sd_major: float
    sd_minor: float
    area_norm: float  # sqrt(det cov); 1 for the vacuum and any pure state


def vacuum_state() -> QuadratureState:
    """Reference vacuum: zero mean, identity covariance (shot noise = 1)."""
    return QuadratureState(np.zeros(2), np.eye(2))


def squeezed_state(p: SqueezeParams, mean=(0.0, 0.0)) -> QuadratureState:
    """Pure squeezed state: variance exp(-2 r_s) at angle theta, exp(+2 r_s) orthogonal."""
    r = rotation_matrix(p.theta)
    cov = r @ np.diag([math.exp(-2.0 * p.r_s), math.exp(2.0 * p.r_s)]) @ r.T
    return QuadratureState(np.asarray(mean, dtype=float), cov)


def rotate_state(s: QuadratureState, delta: float) -> QuadratureState:
    """Rotate the phase-space distribution by `delta`; det(cov) is preserved."""
    r = rotation_matrix(delta)
    return QuadratureState(r @ s.mean, r @ s.cov @ r.T)


def apply_loss(s: QuadratureState, eta: float) -> QuadratureState:
    """Beam-splitter loss with power efficiency eta: vacuum replaces the lost fraction."""
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"efficiency must be in [0, 1], got {eta}")
    cov = eta * s.cov + (1.0 - eta) * np.eye(2)
    return QuadratureState(math.sqrt(eta) * s.mean, cov)


def variance_at_angle(s: QuadratureState, theta: float) -> float:
    """Noise variance of the quadrature at angle theta (mean contributes nothing)."""
    u = np.array([math.cos(theta), math.sin(theta)])
    return float(u @ s.cov @ u)


def mix_incoherent(a: QuadratureState, b: QuadratureState, w: float) -> QuadratureState:
    """Incoherent power-weighted mixture: w of `a` plus (1 - w) of `b`.

    Covariances add with the power weights, means with the field amplitudes;
    no cross terms (the two contributions are assumed mutually incoherent).
    """
    if not 0.0 <= w <= 1.0:
        raise ValueError(f"mixing weight must be in [0, 1], got {w}")
    cov = w * a.cov + (1.0 - w) * b.cov
    mean = math.sqrt(w) * a.mean + math.sqrt(1.0 - w) * b.mean
    return QuadratureState(mean, cov)


def ellipse_params(s: QuadratureState) -> EllipseParams:
    """Eigen-geometry of the noise ellipse.

    sd_major/sd_minor are the standard deviations along the principal axes,
    theta_major the major-axis direction folded into [0, pi), and area_norm
    the ellipse area relative to the vacuum circle, sqrt(det cov).
    """
    w, v = np.linalg.eigh(s.cov)
    if w[0] <= 0.0:
        raise ValueError("covariance must be positive definite")
    theta_major = math.atan2(v[1, 1], v[0, 1]) % math.pi
    return EllipseParams(
        theta_major=theta_major,
        sd_major=math.sqrt(w[1]),
        sd_minor=math.sqrt(w[0]),
        area_norm=math.sqrt(w[0] * w[1]),
    )


def angle_jitter_average(s: QuadratureState, sigma_rad: float) -> QuadratureState:
    """Covariance averaged over Gaussian jitter of the quadrature angle.

    For delta ~ N(0, sigma^2) the traceless part of the covariance rotates at
    2*delta, so E[cos 2delta] = exp(-2 sigma^2) shrinks it toward a round
    state while the trace is conserved; the mean shrinks by E[cos delta].
    Closed form, no Monte Carlo.
    """
    if sigma_rad < 0.0:
        raise ValueError("jitter RMS must be >= 0")
    if sigma_rad == 0.0:
        return s
    c0 = 0.5 * (s.cov[0, 0] + s.cov[1, 1])
    a = 0.5 * (s.cov[0, 0] - s.cov[1, 1])
    b = s.cov[0, 1]
    shrink2 = math.exp(-2.0 * sigma_rad**2)
    cov = np.array(
        [[c0 + shrink2 * a, shrink2 * b], [shrink2 * b, c0 - shrink2 * a]]
    )
    return QuadratureState(math.exp(-0.5 * sigma_rad**2) * s.mean, cov)
