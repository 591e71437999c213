"""Command-line interface.

Subcommands: spectrum, rotation, tomo, wigner-analytic, lock-plan, replay.
Every command writes delimited data plus a JSON manifest into --out; the
manifest snapshot (config, seeds, arguments) suffices to replay the command
bit-identically with `fdsq replay`.  With --plot, matplotlib figures are
rendered next to the data files.

Exit codes: 0 success, 2 unreadable input, 3 invalid parameters,
4 numerical failure.  Angles and frequencies are degrees and Hz at this
boundary; FDSQ_THREADS caps internal parallelism.
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import io, lockctl
from .cavity import quadrature_transfer, rotation_angle_approx
from .chain import ChainConfig, chain_state, noise_spectrum
from .errors import ConfigIOError, NumericalError
from .tomography import GridSpec, TomoRunSpec, analytic_wigner, tomography_run


def _parse_angles(spec: str) -> list[float]:
    try:
        return [float(tok) for tok in spec.split(",") if tok.strip() != ""]
    except ValueError as exc:
        raise ValueError(f"cannot parse angle list {spec!r}: {exc}") from exc


def _freq_grid(start: float, stop: float, points: int) -> np.ndarray:
    if points < 1 or stop <= start:
        raise ValueError("need freq-stop > freq-start and at least one point")
    return np.linspace(start, stop, points)


def _resolve_exact(cfg: ChainConfig, args: dict) -> ChainConfig:
    exact = args.get("exact")
    if exact is None or exact == cfg.exact_mode:
        return cfg
    d = io.config_to_dict(cfg)
    d["exact_mode"] = bool(exact)
    return io.config_from_dict(d)


def run_spectrum(cfg: ChainConfig, args: dict, out_dir: str, plot: bool) -> list[str]:
    cfg = _resolve_exact(cfg, args)
    f_grid = _freq_grid(args["freq_start"], args["freq_stop"], args["freq_points"])
    angles_deg = args["angles_deg"]
    table = np.column_stack(
        [noise_spectrum(cfg, math.radians(g), f_grid) for g in angles_deg]
    )
    csv_path = io.output_path(out_dir, "spectrum.csv")
    io.write_spectrum_csv(csv_path, f_grid, angles_deg, table)
    outputs = ["spectrum.csv"]
    if plot:
        from . import plotting

        plotting.save_spectrum_png(io.output_path(out_dir, "spectrum.png"), f_grid, angles_deg, table)
        outputs.append("spectrum.png")
    io.write_json(
        io.output_path(out_dir, "manifest_spectrum.json"),
        io.build_manifest("spectrum", args, cfg, outputs),
    )
    return outputs


def run_rotation(cfg: ChainConfig, args: dict, out_dir: str, plot: bool) -> list[str]:
    from dataclasses import replace

    f_grid = _freq_grid(args["freq_start"], args["freq_stop"], args["freq_points"])
    d = abs(cfg.cavity.detuning_hz)
    cav_pos = replace(cfg.cavity, detuning_hz=d)
    cav_neg = replace(cfg.cavity, detuning_hz=-d)
    approx_pos = np.array([rotation_angle_approx(cav_pos, f) for f in f_grid])
    approx_neg = np.array([rotation_angle_approx(cav_neg, f) for f in f_grid])
    exact_pos = np.array([quadrature_transfer(cav_pos, f).rotation for f in f_grid])
    columns = {
        "theta_approx_pos_deg": np.degrees(approx_pos),
        "theta_approx_neg_deg": np.degrees(approx_neg),
        "theta_exact_pos_deg": np.degrees(exact_pos),
        "sum_deg": np.degrees(approx_pos + approx_neg),
    }
    csv_path = io.output_path(out_dir, "rotation.csv")
    io.write_rotation_csv(csv_path, f_grid, columns)
    outputs = ["rotation.csv"]
    if plot:
        from . import plotting

        plotting.save_rotation_png(io.output_path(out_dir, "rotation.png"), f_grid, columns)
        outputs.append("rotation.png")
    io.write_json(
        io.output_path(out_dir, "manifest_rotation.json"),
        io.build_manifest("rotation", args, cfg, outputs),
    )
    return outputs


def run_tomo(cfg: ChainConfig, args: dict, out_dir: str, plot: bool) -> list[str]:
    cfg = _resolve_exact(cfg, args)
    spec = TomoRunSpec(
        n_angles=args["n_angles"],
        n_per_angle=args["n_samples"],
        bins=args["bins"],
        bin_range=args["bin_range"],
        grid=GridSpec(n=args["grid_n"], extent=args["extent"]),
        seed=args["seed"],
        lock_jitter=args["lock_jitter"],
    )
    result = tomography_run(cfg, args["f_hz"], spec)
    io.write_sinogram_csv(io.output_path(out_dir, "sinogram.csv"), result.sinogram)
    io.write_wigner_csv(io.output_path(out_dir, "wigner.csv"), result.wigner)
    io.write_json(io.output_path(out_dir, "estimate.json"), io.estimate_to_dict(result.estimate))
    outputs = ["sinogram.csv", "wigner.csv", "estimate.json"]
    if plot:
        from . import plotting

        plotting.save_wigner_png(
            io.output_path(out_dir, "wigner.png"), result.wigner, result.estimate.ellipse
        )
        outputs.append("wigner.png")
    io.write_json(
        io.output_path(out_dir, "manifest_tomo.json"),
        io.build_manifest("tomo", args, cfg, outputs, extra=result.manifest),
    )
    return outputs


def run_wigner_analytic(cfg: ChainConfig, args: dict, out_dir: str, plot: bool) -> list[str]:
    cfg = _resolve_exact(cfg, args)
    state = chain_state(cfg, args["f_hz"])
    grid = analytic_wigner(state, GridSpec(n=args["grid_n"], extent=args["extent"]))
    io.write_wigner_csv(io.output_path(out_dir, "wigner_analytic.csv"), grid)
    outputs = ["wigner_analytic.csv"]
    if plot:
        from . import plotting
        from .states import ellipse_params

        plotting.save_wigner_png(
            io.output_path(out_dir, "wigner_analytic.png"), grid, ellipse_params(state)
        )
        outputs.append("wigner_analytic.png")
    io.write_json(
        io.output_path(out_dir, "manifest_wigner_analytic.json"),
        io.build_manifest("wigner-analytic", args, cfg, outputs),
    )
    return outputs


def run_lock_plan(cfg: ChainConfig, args: dict, out_dir: str, plot: bool) -> list[str]:
    rows = []
    for g in args["angles_deg"]:
        plan = lockctl.plan_for_angle(math.radians(g))
        phi = lockctl.lock_point(plan)
        rows.append((g, plan.b, plan.invert_dc, plan.invert_rf, math.degrees(phi)))
    print("theta_deg,b,invert_dc,invert_rf,lock_point_deg")
    for r in rows:
        print(f"{r[0]:g},{io.fmt(r[1])},{r[2]:+d},{r[3]:+d},{io.fmt(r[4])}")
    outputs = []
    if out_dir is not None:
        io.write_table_csv(
            io.output_path(out_dir, "lock_plan.csv"),
            "lock plans for the requested quadrature angles",
            "theta_deg,b,invert_dc,invert_rf,lock_point_deg",
            [f"{io.fmt(r[0])},{io.fmt(r[1])},{r[2]:d},{r[3]:d},{io.fmt(r[4])}" for r in rows],
        )
        outputs = ["lock_plan.csv"]
        io.write_json(
            io.output_path(out_dir, "manifest_lock_plan.json"),
            io.build_manifest("lock-plan", args, cfg, outputs),
        )
    return outputs


_RUNNERS = {
    "spectrum": run_spectrum,
    "rotation": run_rotation,
    "tomo": run_tomo,
    "wigner-analytic": run_wigner_analytic,
    "lock-plan": run_lock_plan,
}


def run_replay(manifest_path: str, out_dir: str) -> list[str]:
    manifest = io.read_json(manifest_path)
    command = manifest.get("command")
    if command not in _RUNNERS:
        raise ValueError(f"manifest names unknown command {command!r}")
    cfg = io.config_from_dict(manifest["config"])
    args = manifest["args"]
    plot = bool(args.get("plot", False))
    return _RUNNERS[command](cfg, args, out_dir, plot)


def _add_common(p: argparse.ArgumentParser, freq_range: bool = False) -> None:
    p.add_argument("--config", default=None, help="JSON chain config (package defaults if omitted)")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--plot", action="store_true", help="render figures next to the data files")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--exact", dest="exact", action="store_true", default=None,
                      help="two-sideband cavity transfer")
    mode.add_argument("--approx", dest="exact", action="store_false",
                      help="single-sideband rotation approximation")
    if freq_range:
        p.add_argument("--freq-start", type=float, default=12e6)
        p.add_argument("--freq-stop", type=float, default=18e6)
        p.add_argument("--freq-points", type=int, default=601)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fdsq", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="homodyne noise spectra (dB re shot noise)")
    _add_common(p, freq_range=True)
    p.add_argument("--angles", default="0,10,20,30,40,50,60,70,80,90",
                   help="homodyne angles in degrees, comma separated")

    p = sub.add_parser("rotation", help="ellipse rotation curves for +/- detuning")
    _add_common(p, freq_range=True)

    p = sub.add_parser("tomo", help="simulated locked tomography run")
    _add_common(p)
    p.add_argument("--freq-hz", type=float, default=14.1e6)
    p.add_argument("--n-angles", type=int, default=100)
    p.add_argument("--n-samples", type=int, default=1000)
    p.add_argument("--bins", type=int, default=101)
    p.add_argument("--bin-range", type=float, default=6.0)
    p.add_argument("--grid-n", type=int, default=201)
    p.add_argument("--extent", type=float, default=5.0)
    p.add_argument("--no-lock-jitter", action="store_true")

    p = sub.add_parser("wigner-analytic", help="closed-form Wigner grid of the chain state")
    _add_common(p)
    p.add_argument("--freq-hz", type=float, default=14.1e6)
    p.add_argument("--grid-n", type=int, default=201)
    p.add_argument("--extent", type=float, default=5.0)

    p = sub.add_parser("lock-plan", help="print b / inversion lock plans for angles")
    _add_common(p)
    p.add_argument("--angles", default="0,45,90,135,180,225,270,315",
                   help="quadrature angles in degrees, comma separated")

    p = sub.add_parser("replay", help="re-run a command from its manifest")
    p.add_argument("manifest")
    p.add_argument("--out", default=".", help="output directory")
    return parser


def _args_dict(ns: argparse.Namespace) -> dict:
    args = {"seed": ns.seed, "exact": ns.exact, "plot": bool(ns.plot)}
    if hasattr(ns, "freq_start"):
        args.update(freq_start=ns.freq_start, freq_stop=ns.freq_stop, freq_points=ns.freq_points)
    if hasattr(ns, "freq_hz"):
        args["f_hz"] = ns.freq_hz
    if hasattr(ns, "angles"):
        args["angles_deg"] = _parse_angles(ns.angles)
    if ns.command == "tomo":
        args.update(
            n_angles=ns.n_angles, n_samples=ns.n_samples, bins=ns.bins,
            bin_range=ns.bin_range, grid_n=ns.grid_n, extent=ns.extent,
            lock_jitter=not ns.no_lock_jitter,
        )
    if ns.command == "wigner-analytic":
        args.update(grid_n=ns.grid_n, extent=ns.extent)
    return args


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        if ns.command == "replay":
            run_replay(ns.manifest, ns.out)
        else:
            cfg = io.load_config(ns.config)
            _RUNNERS[ns.command](cfg, _args_dict(ns), ns.out, bool(ns.plot))
    except ConfigIOError as exc:
        print(f"fdsq: input error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"fdsq: invalid parameters: {exc}", file=sys.stderr)
        return 3
    except NumericalError as exc:
        print(f"fdsq: numerical failure: {exc}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
