import filecmp
import json
import math
import os

import numpy as np
import pytest

from fdsq import io as fio
from fdsq.chain import ChainConfig, default_config
from fdsq.cli import main
from fdsq.states import SqueezeParams, squeezed_state
from fdsq.tomography import GridSpec, analytic_sinogram, analytic_wigner


def test_config_round_trip():
    cfg = default_config(detuning_hz=-15.15e6, phase_noise_rad=0.01)
    d = fio.config_to_dict(cfg)
    back = fio.config_from_dict(d)
    assert back == cfg
    assert fio.config_from_dict({}) == ChainConfig()


def test_fmt_round_trips_float64():
    rng = np.random.default_rng(0)
    for x in rng.standard_normal(200) * 10.0 ** rng.integers(-12, 12, 200):
        assert float(fio.fmt(x)) == x


def test_spectrum_csv_round_trip(tmp_path):
    path = str(tmp_path / "spectrum.csv")
    f = np.linspace(12e6, 18e6, 7)
    rng = np.random.default_rng(1)
    table = rng.standard_normal((7, 3))
    fio.write_spectrum_csv(path, f, [0.0, 45.0, 90.0], table)
    f2, angles, table2 = fio.read_spectrum_csv(path)
    assert angles == [0.0, 45.0, 90.0]
    np.testing.assert_array_equal(f, f2)
    np.testing.assert_array_equal(table, table2)


def test_sinogram_and_wigner_csv_round_trip(tmp_path):
    sg = analytic_sinogram(squeezed_state(SqueezeParams(0.4, 0.9)), n_angles=12, bins=21)
    p = str(tmp_path / "sino.csv")
    fio.write_sinogram_csv(p, sg)
    back = fio.read_sinogram_csv(p)
    np.testing.assert_array_equal(sg.densities, back.densities)
    np.testing.assert_array_equal(sg.angles, back.angles)
    np.testing.assert_array_equal(sg.bin_centers, back.bin_centers)

    w = analytic_wigner(squeezed_state(SqueezeParams(0.4, 0.9)), GridSpec(41, 5.0))
    pw = str(tmp_path / "wig.csv")
    fio.write_wigner_csv(pw, w)
    back_w = fio.read_wigner_csv(pw)
    assert back_w.spec == w.spec
    np.testing.assert_array_equal(w.values, back_w.values)


def test_rotation_csv_round_trip(tmp_path):
    path = str(tmp_path / "rot.csv")
    f = np.linspace(12e6, 18e6, 5)
    cols = {"a_deg": np.linspace(0, 180, 5), "b_deg": np.linspace(0, -180, 5)}
    fio.write_rotation_csv(path, f, cols)
    f2, cols2 = fio.read_rotation_csv(path)
    np.testing.assert_array_equal(f, f2)
    assert list(cols2) == ["a_deg", "b_deg"]
    np.testing.assert_array_equal(cols["a_deg"], cols2["a_deg"])


def test_cli_spectrum_shape_and_zero_pump(tmp_path):
    out = str(tmp_path / "run")
    assert main(["spectrum", "--out", out, "--freq-points", "25"]) == 0
    f, angles, table = fio.read_spectrum_csv(os.path.join(out, "spectrum.csv"))
    assert table.shape == (25, 10)  # 11 columns including frequency
    assert len(angles) == 10

    cfg_path = str(tmp_path / "quiet.json")
    d = fio.config_to_dict(default_config())
    d["opa"]["x"] = 0.0
    with open(cfg_path, "w") as fh:
        json.dump(d, fh)
    out2 = str(tmp_path / "quiet")
    assert main(["spectrum", "--config", cfg_path, "--out", out2, "--freq-points", "11"]) == 0
    _, _, table2 = fio.read_spectrum_csv(os.path.join(out2, "spectrum.csv"))
    assert np.max(np.abs(table2)) < 1e-12


def test_cli_spectrum_detuning_mirror(tmp_path):
    out_pos = str(tmp_path / "pos")
    out_neg = str(tmp_path / "neg")
    cfg_neg = str(tmp_path / "neg.json")
    d = fio.config_to_dict(default_config(detuning_hz=-15.15e6))
    with open(cfg_neg, "w") as fh:
        json.dump(d, fh)
    args = ["--freq-points", "41", "--angles", "10,170"]
    assert main(["spectrum", "--out", out_pos] + args) == 0
    assert main(["spectrum", "--config", cfg_neg, "--out", out_neg] + args) == 0
    _, _, pos = fio.read_spectrum_csv(os.path.join(out_pos, "spectrum.csv"))
    _, _, neg = fio.read_spectrum_csv(os.path.join(out_neg, "spectrum.csv"))
    # -15.15 MHz at angle theta mirrors +15.15 MHz at -theta (= 180 - theta)
    np.testing.assert_allclose(neg[:, 0], pos[:, 1], atol=1e-12)
    np.testing.assert_allclose(neg[:, 1], pos[:, 0], atol=1e-12)


def test_cli_rotation_curves(tmp_path):
    out = str(tmp_path / "rot")
    assert main(["rotation", "--out", out]) == 0
    f, cols = fio.read_rotation_csv(os.path.join(out, "rotation.csv"))
    assert np.max(np.abs(cols["sum_deg"])) < math.degrees(1e-9)
    i = np.argmin(np.abs(f - 15.15e6))
    assert cols["theta_approx_pos_deg"][i] == pytest.approx(90.0, abs=1e-9)
    assert cols["theta_approx_pos_deg"][0] == pytest.approx(12.985, abs=0.01)  # small positive at 12 MHz
    assert 0 < cols["theta_approx_pos_deg"][0] < 20


def test_cli_tomo_outputs(tmp_path):
    out = str(tmp_path / "tomo")
    args = ["tomo", "--out", out, "--n-angles", "24", "--n-samples", "300",
            "--grid-n", "81", "--seed", "7"]
    assert main(args) == 0
    for name in ("sinogram.csv", "wigner.csv", "estimate.json", "manifest_tomo.json"):
        assert os.path.exists(os.path.join(out, name))
    w = fio.read_wigner_csv(os.path.join(out, "wigner.csv"))
    assert w.integral() == pytest.approx(1.0, abs=0.02)
    est = fio.read_json(os.path.join(out, "estimate.json"))
    for key in ("orientation_deg", "sd_major", "sd_minor", "area_norm", "cov"):
        assert key in est
    manifest = fio.read_json(os.path.join(out, "manifest_tomo.json"))
    assert len(manifest["run"]["b_values"]) == 24

    # same seed twice: byte-identical data files
    out2 = str(tmp_path / "tomo2")
    assert main(["tomo", "--out", out2, "--n-angles", "24", "--n-samples", "300",
                 "--grid-n", "81", "--seed", "7"]) == 0
    for name in ("sinogram.csv", "wigner.csv", "estimate.json"):
        assert filecmp.cmp(os.path.join(out, name), os.path.join(out2, name), shallow=False)


def test_cli_replay_byte_identical(tmp_path):
    jobs = [
        (["spectrum", "--freq-points", "31"], "manifest_spectrum.json", ["spectrum.csv"]),
        (["rotation", "--freq-points", "31"], "manifest_rotation.json", ["rotation.csv"]),
        (["tomo", "--n-angles", "16", "--n-samples", "200", "--grid-n", "61", "--seed", "3"],
         "manifest_tomo.json", ["sinogram.csv", "wigner.csv", "estimate.json"]),
        (["wigner-analytic", "--grid-n", "61"], "manifest_wigner_analytic.json",
         ["wigner_analytic.csv"]),
        (["lock-plan", "--angles", "0,30,60,200"], "manifest_lock_plan.json", ["lock_plan.csv"]),
    ]
    for args, manifest_name, outputs in jobs:
        first = str(tmp_path / (args[0] + "_a"))
        second = str(tmp_path / (args[0] + "_b"))
        assert main(args + ["--out", first]) == 0
        assert main(["replay", os.path.join(first, manifest_name), "--out", second]) == 0
        for name in outputs:
            assert filecmp.cmp(os.path.join(first, name), os.path.join(second, name), shallow=False), name


def test_cli_exit_codes(tmp_path):
    assert main(["spectrum", "--config", str(tmp_path / "missing.json"),
                 "--out", str(tmp_path)]) == 2

    bad = str(tmp_path / "bad.json")
    d = fio.config_to_dict(default_config())
    d["opa"]["x"] = 1.5
    with open(bad, "w") as fh:
        json.dump(d, fh)
    assert main(["spectrum", "--config", bad, "--out", str(tmp_path)]) == 3

    notjson = str(tmp_path / "notjson.json")
    with open(notjson, "w") as fh:
        fh.write("{broken")
    assert main(["spectrum", "--config", notjson, "--out", str(tmp_path)]) == 2


def test_cli_lock_plan_prints_table(tmp_path, capsys):
    assert main(["lock-plan", "--angles", "0,45,90", "--out", str(tmp_path / "lp")]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0].startswith("theta_deg,b,invert_dc,invert_rf")
    assert len(lines) == 4
    row45 = lines[2].split(",")
    assert float(row45[1]) == pytest.approx(0.5, abs=1e-12)


def test_cli_plot_renders_files(tmp_path):
    out = str(tmp_path / "figs")
    assert main(["spectrum", "--out", out, "--freq-points", "31", "--plot"]) == 0
    assert os.path.exists(os.path.join(out, "spectrum.png"))
    assert main(["tomo", "--out", out, "--n-angles", "12", "--n-samples", "200",
                 "--grid-n", "61", "--plot"]) == 0
    assert os.path.exists(os.path.join(out, "wigner.png"))
    assert main(["rotation", "--out", out, "--freq-points", "31", "--plot"]) == 0
    assert os.path.exists(os.path.join(out, "rotation.png"))


def test_threads_env_gives_identical_spectra(tmp_path, monkeypatch):
    out1 = str(tmp_path / "serial")
    assert main(["spectrum", "--out", out1, "--freq-points", "41"]) == 0
    monkeypatch.setenv("FDSQ_THREADS", "4")
    out2 = str(tmp_path / "threaded")
    assert main(["spectrum", "--out", out2, "--freq-points", "41"]) == 0
    assert filecmp.cmp(os.path.join(out1, "spectrum.csv"),
                       os.path.join(out2, "spectrum.csv"), shallow=False)
