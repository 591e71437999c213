import math
from dataclasses import replace

import numpy as np
import pytest

from fdsq.cavity import cavity_figures, reflect_state
from fdsq.chain import (
    ChainConfig,
    OpaParams,
    chain_state,
    default_config,
    gain_from_pump,
    noise_spectrum,
    opa_quadrature_variances,
    opa_state,
    pump_from_gain,
)
from fdsq.states import mix_incoherent, variance_at_angle, vacuum_state


def test_gain_pump_relations():
    assert gain_from_pump(0.0) == 1.0
    assert gain_from_pump(0.5) == pytest.approx(4.0, rel=1e-12)
    x5 = pump_from_gain(5.0)
    assert x5 == pytest.approx(1.0 - 1.0 / math.sqrt(5.0), rel=1e-12)  # 0.55279
    assert gain_from_pump(x5) == pytest.approx(5.0, rel=1e-12)
    with pytest.raises(ValueError):
        pump_from_gain(0.9)
    with pytest.raises(ValueError):
        gain_from_pump(1.0)


def test_opa_state_examples():
    quiet = OpaParams(gamma_hz=15e6, x=0.0)
    for f in (0.0, 5e6, 40e6):
        assert np.allclose(opa_state(quiet, f).cov, np.eye(2), atol=1e-15)

    opa = OpaParams(gamma_hz=15e6, x=pump_from_gain(5.0))
    v_sq, v_anti = opa_quadrature_variances(opa, 0.0)
    x = opa.x
    assert v_sq == pytest.approx(1.0 - 4 * x / (1 + x) ** 2, rel=1e-12)  # 0.08295, -10.8 dB
    assert v_sq == pytest.approx(0.08295, abs=2e-5)
    assert 10 * math.log10(v_sq) == pytest.approx(-10.81, abs=0.01)
    # squeezing vanishes far outside the OPA bandwidth
    v_hi, v_hi_anti = opa_quadrature_variances(opa, 100 * opa.gamma_hz)
    assert v_hi == pytest.approx(1.0, abs=1e-3)
    assert v_hi_anti == pytest.approx(1.0, abs=1e-3)


def test_opa_purity_and_escape():
    opa = OpaParams(gamma_hz=15e6, x=0.4)
    for f in np.linspace(0, 60e6, 25):
        v_sq, v_anti = opa_quadrature_variances(opa, f)
        assert v_sq > 0.0
        assert v_sq * v_anti == pytest.approx(1.0, abs=1e-12)
    lossy = replace(opa, eta_escape=0.8)
    for f in (0.0, 9e6):
        s = opa_state(lossy, f)
        assert s.det_cov >= 1.0 - 1e-12


def test_opa_theta_sets_squeezed_direction():
    opa = OpaParams(gamma_hz=15e6, x=0.4, theta_opa=0.7)
    s = opa_state(opa, 4e6)
    v_sq, _ = opa_quadrature_variances(opa, 4e6)
    assert variance_at_angle(s, 0.7) == pytest.approx(v_sq, rel=1e-12)


def test_chain_trivial_vacuum():
    cfg = ChainConfig(
        opa=OpaParams(x=0.0), coupler_loss=0.0, eta_mm=1.0, eta_det=1.0,
        cavity_enabled=False,
    )
    for f in (0.0, 14e6):
        s = chain_state(cfg, f)
        assert np.allclose(s.cov, np.eye(2), atol=1e-15)


def test_chain_beam_dump_loss_budget():
    # pure input at -4.393 dB through 42 % total loss comes out at -2.00 dB
    v_in = (10 ** -0.2 - 0.42) / 0.58
    assert 10 * math.log10(v_in) == pytest.approx(-4.393, abs=1e-3)
    x = (1.0 - math.sqrt(v_in)) / (1.0 + math.sqrt(v_in))  # flat-band pump for V-(0)=v_in
    cfg = ChainConfig(
        opa=OpaParams(gamma_hz=1e12, x=x),
        coupler_loss=0.03,
        eta_det=0.58 / 0.97,
        cavity_enabled=False,
    )
    out_db = 10 * math.log10(variance_at_angle(chain_state(cfg, 5e6), 0.0))
    assert out_db == pytest.approx(-2.0, abs=1e-9)


def test_chain_cavity_mix_matches_manual_pipeline():
    cfg = default_config(detuning_hz=15.15e6)
    f = 14.2e6
    s0 = opa_state(cfg.opa, f)
    from fdsq.states import apply_loss

    pre = apply_loss(s0, 1.0 - cfg.coupler_loss)
    manual = mix_incoherent(reflect_state(pre, cfg.cavity, f), pre, cfg.eta_mm)
    manual = apply_loss(manual, cfg.eta_det)
    assert np.allclose(chain_state(cfg, f).cov, manual.cov, atol=1e-14)


def test_chain_state_stays_physical():
    cfg = default_config(detuning_hz=15.15e6)
    for f in np.linspace(0.0, 30e6, 31):
        s = chain_state(cfg, f)
        assert s.det_cov >= 1.0 - 1e-9
        for th in np.linspace(0, math.pi, 13):
            assert variance_at_angle(s, th) > 0.0


def test_mode_mismatch_degrades_rotated_squeezing():
    # the unmatched fraction stays anti-squeezed where the matched part has
    # rotated, spoiling the squeezing seen near the detuning frequency
    matched = default_config(detuning_hz=15.15e6, eta_mm=1.0)
    mismatched = default_config(detuning_hz=15.15e6, eta_mm=0.94)
    v_matched = variance_at_angle(chain_state(matched, 15.15e6), math.pi / 2)
    v_mis = variance_at_angle(chain_state(mismatched, 15.15e6), math.pi / 2)
    assert v_mis > v_matched


def test_chain_rotated_squeezing_at_detuning():
    cfg = default_config(
        detuning_hz=15.15e6, coupler_loss=0.0, eta_mm=1.0, eta_det=1.0,
    )
    cfg = replace(cfg, cavity=replace(cfg.cavity, r2=1.0))
    s = chain_state(cfg, 15.15e6)
    v_sq, v_anti = opa_quadrature_variances(cfg.opa, 15.15e6)
    assert variance_at_angle(s, math.pi / 2) == pytest.approx(v_sq, rel=1e-9)
    assert variance_at_angle(s, 0.0) == pytest.approx(v_anti, rel=1e-9)


def test_phase_noise_grows_area():
    cfg = default_config(detuning_hz=-15.15e6)
    noisy = replace(cfg, phase_noise_rad=math.radians(2.0))
    s0 = chain_state(cfg, 14.1e6)
    s1 = chain_state(noisy, 14.1e6)
    assert s1.det_cov > s0.det_cov
    assert np.trace(s1.cov) == pytest.approx(np.trace(s0.cov), rel=1e-12)


def test_spectrum_flat_for_zero_pump():
    cfg = default_config(detuning_hz=15.15e6, opa=OpaParams(x=0.0))
    f = np.linspace(12e6, 18e6, 11)
    assert np.max(np.abs(noise_spectrum(cfg, 0.0, f))) < 1e-12


def test_spectrum_shape_and_inversion():
    cfg = default_config(detuning_hz=15.15e6)
    f = np.linspace(12e6, 18e6, 601)
    s0 = noise_spectrum(cfg, 0.0, f)
    s90 = noise_spectrum(cfg, math.pi / 2, f)
    fwhm = cavity_figures(cfg.cavity).fwhm_hz
    band = np.abs(f - 15.15e6) <= 2 * fwhm

    assert s0[0] < 0 and s0[-1] < 0  # squeezed at 12 and 18 MHz
    assert s0[np.argmin(np.abs(f - 15.15e6))] > 0
    assert np.all(f[s0 > 0] - 15.15e6 <= 2 * fwhm) and np.all(15.15e6 - f[s0 > 0] <= 2 * fwhm)

    assert s90[0] > 0 and s90[-1] > 0  # inverted pattern
    assert s90[np.argmin(np.abs(f - 15.15e6))] < 0
    assert np.all(np.abs(f[s90 < 0] - 15.15e6) <= 2 * fwhm)
    assert np.any(band & (s0 > 0)) and np.any(band & (s90 < 0))


def test_spectrum_continuity():
    cfg = default_config(detuning_hz=15.15e6)
    f = np.linspace(12e6, 18e6, 601)
    for theta in (0.0, math.radians(30), math.radians(90)):
        s = noise_spectrum(cfg, theta, f)
        assert np.max(np.abs(np.diff(s))) < 3.0  # no unwrapping glitches


def test_orthogonal_quadrature_uncertainty_product():
    cfg = default_config(detuning_hz=15.15e6)
    f = np.linspace(12e6, 18e6, 61)
    for theta in (0.0, 0.5, 1.1):
        a = noise_spectrum(cfg, theta, f)
        b = noise_spectrum(cfg, theta + math.pi / 2, f)
        product = 10 ** (a / 10) * 10 ** (b / 10)
        assert np.all(product >= 1.0 - 1e-9)


def test_detuning_mirror_symmetry():
    f = np.linspace(12e6, 18e6, 121)
    pos = default_config(detuning_hz=15.15e6)
    neg = default_config(detuning_hz=-15.15e6)
    for theta_deg in (0.0, 10.0, 35.0, 90.0):
        th = math.radians(theta_deg)
        np.testing.assert_allclose(
            noise_spectrum(neg, th, f), noise_spectrum(pos, -th, f), atol=1e-12
        )


def test_two_cavity_restoration():
    # lossless cavities, perfect matching: a second, oppositely detuned cavity
    # undoes the rotation, leaving the source spectrum at theta_opa untouched
    base = default_config(detuning_hz=15.15e6, coupler_loss=0.0, eta_mm=1.0, eta_det=1.0)
    for exact in (False, True):
        cfg = replace(base, cavity=replace(base.cavity, r2=1.0), exact_mode=exact)
        cav_neg = replace(cfg.cavity, detuning_hz=-15.15e6)
        for f in np.linspace(12e6, 18e6, 41):
            out = reflect_state(chain_state(cfg, f), cav_neg, f, exact=exact)
            v_src = variance_at_angle(opa_state(cfg.opa, f), cfg.opa.theta_opa)
            v_out = variance_at_angle(out, cfg.opa.theta_opa)
            assert abs(10 * math.log10(v_out) - 10 * math.log10(v_src)) < 0.05


def test_config_validation():
    with pytest.raises(ValueError):
        OpaParams(gamma_hz=-1.0)
    with pytest.raises(ValueError):
        OpaParams(x=1.0)
    with pytest.raises(ValueError):
        ChainConfig(eta_det=1.3)
    with pytest.raises(ValueError):
        noise_spectrum(default_config(), 0.0, [])
    with pytest.raises(ValueError):
        noise_spectrum(default_config(), 0.0, [2e6, 1e6])
