"""Persistent formats: JSON configs and manifests, CSV tables and grids.

CSV files carry '#'-prefixed comment lines, one header row, and values
serialized with 17 significant digits so that write-then-read round-trips
float64 exactly.  Angles are degrees at every file boundary and radians
internally.
"""

from __future__ import annotations

import datetime
import json
import math
import os
from dataclasses import replace

import numpy as np

from . import __version__
from .cavity import CavityParams
from .chain import ChainConfig, OpaParams
from .errors import ConfigIOError
from .tomography import GridSpec, Sinogram, StateEstimate, WignerGrid


def fmt(x: float) -> str:
    """Shortest decimal form that round-trips float64: 17 significant digits."""
    return f"{float(x):.17g}"


# --- chain configuration ------------------------------------------------------


def config_to_dict(cfg: ChainConfig) -> dict:
    return {
        "opa": {
            "gamma_hz": cfg.opa.gamma_hz,
            "x": cfg.opa.x,
            "eta_escape": cfg.opa.eta_escape,
            "theta_opa_deg": math.degrees(cfg.opa.theta_opa),
        },
        "coupler_loss": cfg.coupler_loss,
        "cavity": {
            "r1": cfg.cavity.r1,
            "r2": cfg.cavity.r2,
            "length_m": cfg.cavity.length_m,
            "detuning_hz": cfg.cavity.detuning_hz,
        },
        "eta_mm": cfg.eta_mm,
        "eta_det": cfg.eta_det,
        "cavity_enabled": cfg.cavity_enabled,
        "exact_mode": cfg.exact_mode,
        "phase_noise_rad": cfg.phase_noise_rad,
    }


def config_from_dict(d: dict) -> ChainConfig:
    try:
        opa_d = dict(d.get("opa", {}))
        cav_d = dict(d.get("cavity", {}))
    except (TypeError, AttributeError) as exc:
        raise ValueError(f"malformed config structure: {exc}") from exc
    opa_defaults = OpaParams()
    opa = OpaParams(
        gamma_hz=float(opa_d.get("gamma_hz", opa_defaults.gamma_hz)),
        x=float(opa_d.get("x", opa_defaults.x)),
        eta_escape=float(opa_d.get("eta_escape", opa_defaults.eta_escape)),
        theta_opa=math.radians(float(opa_d.get("theta_opa_deg", 0.0))),
    )
    base = ChainConfig()
    cavity = CavityParams(
        r1=float(cav_d.get("r1", base.cavity.r1)),
        r2=float(cav_d.get("r2", base.cavity.r2)),
        length_m=float(cav_d.get("length_m", base.cavity.length_m)),
        detuning_hz=float(cav_d.get("detuning_hz", base.cavity.detuning_hz)),
    )
    return ChainConfig(
        opa=opa,
        coupler_loss=float(d.get("coupler_loss", base.coupler_loss)),
        cavity=cavity,
        eta_mm=float(d.get("eta_mm", base.eta_mm)),
        eta_det=float(d.get("eta_det", base.eta_det)),
        cavity_enabled=bool(d.get("cavity_enabled", True)),
        exact_mode=bool(d.get("exact_mode", False)),
        phase_noise_rad=float(d.get("phase_noise_rad", 0.0)),
    )


def load_config(path: str | None) -> ChainConfig:
    """Config from a JSON file; package defaults when no path is given."""
    if path is None:
        return ChainConfig()
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigIOError(f"cannot read config {path}: {exc}") from exc
    return config_from_dict(data)


def write_json(path: str, obj: dict) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(obj, fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise ConfigIOError(f"cannot write {path}: {exc}") from exc


def read_json(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigIOError(f"cannot read {path}: {exc}") from exc


# --- CSV tables ---------------------------------------------------------------


def _write_lines(path: str, lines: list[str]) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise ConfigIOError(f"cannot write {path}: {exc}") from exc


def _read_lines(path: str) -> list[str]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read().splitlines()
    except OSError as exc:
        raise ConfigIOError(f"cannot read {path}: {exc}") from exc


def write_table_csv(path: str, comment: str, header: str, rows: list[str]) -> None:
    _write_lines(path, [f"# {comment}", header] + rows)


def write_spectrum_csv(path: str, f_hz: np.ndarray, angles_deg, table_db: np.ndarray) -> None:
    """Frequency column plus one dB column per homodyne angle (named in degrees)."""
    header = "frequency_hz," + ",".join(f"db_at_{g:g}deg" for g in angles_deg)
    lines = ["# homodyne noise relative to shot noise (0 dB)", header]
    for i, f in enumerate(f_hz):
        lines.append(",".join([fmt(f)] + [fmt(v) for v in table_db[i]]))
    _write_lines(path, lines)


def read_spectrum_csv(path: str) -> tuple[np.ndarray, list[float], np.ndarray]:
    rows = [ln for ln in _read_lines(path) if ln and not ln.startswith("#")]
    head = rows[0].split(",")
    angles = [float(c.removeprefix("db_at_").removesuffix("deg")) for c in head[1:]]
    data = np.array([[float(v) for v in ln.split(",")] for ln in rows[1:]])
    return data[:, 0], angles, data[:, 1:]


def write_rotation_csv(path: str, f_hz: np.ndarray, columns: dict[str, np.ndarray]) -> None:
    """Rotation curves in degrees versus frequency; column order is preserved."""
    names = list(columns)
    lines = ["# squeezing-ellipse rotation curves (degrees)", "frequency_hz," + ",".join(names)]
    for i, f in enumerate(f_hz):
        lines.append(",".join([fmt(f)] + [fmt(columns[n][i]) for n in names]))
    _write_lines(path, lines)


def read_rotation_csv(path: str) -> tuple[np.ndarray, dict[str, np.ndarray]]:
    rows = [ln for ln in _read_lines(path) if ln and not ln.startswith("#")]
    names = rows[0].split(",")[1:]
    data = np.array([[float(v) for v in ln.split(",")] for ln in rows[1:]])
    return data[:, 0], {n: data[:, 1 + j] for j, n in enumerate(names)}


def write_sinogram_csv(path: str, sg: Sinogram) -> None:
    lines = [
        f"# sinogram n_angles={sg.angles.size} n_bins={sg.bin_centers.size}",
        "angle_rad,bin_center,density",
    ]
    for i, th in enumerate(sg.angles):
        for j, x in enumerate(sg.bin_centers):
            lines.append(f"{fmt(th)},{fmt(x)},{fmt(sg.densities[i, j])}")
    _write_lines(path, lines)


def read_sinogram_csv(path: str) -> Sinogram:
    lines = _read_lines(path)
    shape = None
    for ln in lines:
        if ln.startswith("# sinogram"):
            parts = dict(p.split("=") for p in ln[2:].split()[1:])
            shape = (int(parts["n_angles"]), int(parts["n_bins"]))
    rows = [ln for ln in lines if ln and not ln.startswith("#")][1:]
    data = np.array([[float(v) for v in ln.split(",")] for ln in rows])
    if shape is None:
        raise ConfigIOError(f"{path} is missing the sinogram shape header")
    n_a, n_b = shape
    return Sinogram(
        angles=data[::n_b, 0],
        bin_centers=data[:n_b, 1],
        densities=data[:, 2].reshape(n_a, n_b),
    )


def write_wigner_csv(path: str, grid: WignerGrid) -> None:
    lines = [
        f"# wigner n={grid.spec.n} extent={fmt(grid.spec.extent)}",
        "a1,a2,value",
    ]
    ax = grid.axis
    for i in range(grid.spec.n):
        for j in range(grid.spec.n):
            lines.append(f"{fmt(ax[i])},{fmt(ax[j])},{fmt(grid.values[i, j])}")
    _write_lines(path, lines)


def read_wigner_csv(path: str) -> WignerGrid:
    lines = _read_lines(path)
    n, extent = None, None
    for ln in lines:
        if ln.startswith("# wigner"):
            parts = dict(p.split("=") for p in ln[2:].split()[1:])
            n, extent = int(parts["n"]), float(parts["extent"])
    if n is None:
        raise ConfigIOError(f"{path} is missing the wigner grid header")
    rows = [ln for ln in lines if ln and not ln.startswith("#")][1:]
    values = np.array([float(ln.split(",")[2]) for ln in rows]).reshape(n, n)
    return WignerGrid(spec=GridSpec(n=n, extent=extent), values=values)


# --- estimates and manifests --------------------------------------------------


def estimate_to_dict(est: StateEstimate) -> dict:
    return {
        "orientation_deg": math.degrees(est.theta_squeeze),
        "theta_major_deg": math.degrees(est.ellipse.theta_major),
        "sd_major": est.ellipse.sd_major,
        "sd_minor": est.ellipse.sd_minor,
        "area_norm": est.ellipse.area_norm,
        "mean": est.state.mean.tolist(),
        "cov": est.state.cov.tolist(),
    }


def build_manifest(command: str, args: dict, cfg: ChainConfig, outputs: list[str], extra: dict | None = None) -> dict:
    manifest = {
        "version": __version__,
        "command": command,
        "args": args,
        "config": config_to_dict(cfg),
        "outputs": outputs,
        "created_utc": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }
    if extra:
        manifest["run"] = extra
    return manifest


def output_path(out_dir: str, name: str) -> str:
    os.makedirs(out_dir, exist_ok=True)
    return os.path.join(out_dir, name)
