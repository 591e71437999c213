"""Figure rendering for the CLI report path (PNG files next to the CSV output)."""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .states import EllipseParams
from .tomography import WignerGrid


def save_spectrum_png(path: str, f_hz: np.ndarray, angles_deg, table_db: np.ndarray) -> None:
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for j, g in enumerate(angles_deg):
        ax.plot(f_hz / 1e6, table_db[:, j], lw=1.2, label=f"{g:g}\N{DEGREE SIGN}")
    ax.axhline(0.0, color="0.5", lw=1.0)
    ax.set_xlabel("sideband frequency (MHz)")
    ax.set_ylabel("noise power rel. shot noise (dB)")
    ax.legend(fontsize=8, ncol=2, title="homodyne angle")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_rotation_png(path: str, f_hz: np.ndarray, columns: dict[str, np.ndarray]) -> None:
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for name, vals in columns.items():
        style = "--" if name == "sum_deg" else "-"
        ax.plot(f_hz / 1e6, vals, style, lw=1.4, label=name)
    ax.set_xlabel("sideband frequency (MHz)")
    ax.set_ylabel("ellipse rotation (deg)")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_wigner_png(path: str, grid: WignerGrid, ellipse: EllipseParams | None = None) -> None:
    """Contour map of the Wigner function, with the 1-sigma noise ellipse and
    the unit vacuum circle overlaid when an ellipse fit is supplied."""
    fig, ax = plt.subplots(figsize=(5.2, 4.6))
    mesh = ax.pcolormesh(grid.axis, grid.axis, grid.values.T, cmap="RdBu_r", shading="auto")
    fig.colorbar(mesh, ax=ax, label="W(a1, a2)")
    phi = np.linspace(0.0, 2.0 * math.pi, 256)
    ax.plot(np.cos(phi), np.sin(phi), "w--", lw=1.0)
    if ellipse is not None:
        c, s = math.cos(ellipse.theta_major), math.sin(ellipse.theta_major)
        ex = ellipse.sd_major * np.cos(phi)
        ey = ellipse.sd_minor * np.sin(phi)
        ax.plot(c * ex - s * ey, s * ex + c * ey, "w-", lw=1.4)
    ax.set_xlabel("amplitude quadrature a1")
    ax.set_ylabel("phase quadrature a2")
    ax.set_aspect("equal")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
