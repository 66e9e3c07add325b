import numpy as np
import pytest

from mmwsync.arrays import ArrayGeometry
from mmwsync.channel import draw_single_path
from mmwsync.frontend import (FrontendSpec, SlotObservation, adc_power,
                              effective_snr_after_quantization, observe_slot,
                              optimal_uniform_step, quantize, relative_quant_error)
from mmwsync.pss import build_config, generate_waveforms
from mmwsync.streams import complex_normal, substream

BS = ArrayGeometry(4, 2)
UE = ArrayGeometry(2, 2)


@pytest.fixture(scope="module")
def setup():
    cfg = build_config(n_dim=64, n_slot=3, n_sig=2, n_pss=2, w_sig=1e6, t_sig=3e-5)
    wfs = generate_waveforms(cfg)
    rng = substream(20)
    chan = draw_single_path(BS, UE, cfg.n_sub, rng, n_sig=cfg.n_sig)
    w_tx = np.zeros(BS.n_elements, dtype=complex)
    w_tx[0] = 1.0
    return cfg, wfs, chan, w_tx


def test_noiseless_digital_matched_filter(setup):
    cfg, wfs, chan, w_tx = setup
    rng = substream(21)
    obs = observe_slot(FrontendSpec("digital"), wfs[0], 2, chan, w_tx, 1.5, 0.0, rng)
    assert obs.data.shape == (4, 64)
    for b in range(cfg.n_sig):
        ell = 1 * cfg.n_sig + b          # slot 2, 0-based sub-signal index
        got = obs.data @ wfs[0].coeffs[b]
        alpha = chan.g[ell] * np.vdot(chan.v, w_tx)
        assert np.allclose(got, 1.5 * alpha * chan.u, atol=1e-12)


def test_h0_energy_moment():
    # noise-only slots carry n_rx * n_dim * nu energy on average
    rng = substream(22)
    nu = 0.7
    n_rx, n_dim, n_slots = 4, 128, 10000
    total = np.sum(np.abs(complex_normal(rng, (n_slots, n_rx, n_dim), nu)) ** 2)
    assert total / n_slots / (n_rx * n_dim * nu) == pytest.approx(1.0, abs=0.02)


def test_noiseless_analog_aligned(setup):
    cfg, wfs, chan, w_tx = setup
    rng = substream(23)
    w_rx = chan.u[None, :].copy()
    obs = observe_slot(FrontendSpec("analog"), wfs[0], 1, chan, chan.v.copy(),
                       1.0, 0.0, rng, rx_weights=w_rx)
    # perfect alignment: correlation against each sub-signal returns g_ell
    for b in range(cfg.n_sig):
        got = obs.data[0] @ wfs[0].coeffs[b]
        assert abs(got - chan.g[b]) < 1e-12


def test_analog_rx_weights_unit_modulus(setup):
    cfg, wfs, chan, w_tx = setup
    obs = observe_slot(FrontendSpec("analog"), wfs[0], 1, chan, w_tx, 1.0, 1.0,
                       substream(24))
    assert obs.rx_weights.shape == (1, 4)
    assert np.allclose(np.abs(obs.rx_weights), 0.5, atol=1e-13)


def test_hybrid_streams_differ(setup):
    cfg, wfs, chan, w_tx = setup
    obs = observe_slot(FrontendSpec("hybrid", n_streams=3), wfs[0], 1, chan, w_tx,
                       1.0, 1.0, substream(25))
    assert obs.data.shape == (3, 64)
    assert not np.allclose(obs.rx_weights[0], obs.rx_weights[1])
    assert not np.allclose(obs.rx_weights[1], obs.rx_weights[2])


def test_frontend_spec_validation():
    with pytest.raises(ValueError):
        FrontendSpec("fm-radio")
    with pytest.raises(ValueError):
        FrontendSpec("digital", bits=0)
    assert FrontendSpec("analog", n_streams=9).streams(16) == 1
    assert FrontendSpec("digital").streams(16) == 16
    with pytest.raises(ValueError):
        FrontendSpec("hybrid", n_streams=32).streams(16)


def test_coding_gain_table():
    assert relative_quant_error(3) == pytest.approx(10 ** (-1.45), rel=1e-12)
    assert relative_quant_error(3) == pytest.approx(0.0355, abs=5e-4)
    assert relative_quant_error(1) == pytest.approx(10 ** (-0.44), rel=1e-12)
    assert relative_quant_error(1) == pytest.approx(0.363, abs=5e-4)


def test_physical_quantizer_error_matches_table():
    # the numerically optimized uniform quantizer should land within 10% of
    # the tabulated relative error for Gaussian input
    rng = substream(26)
    x = complex_normal(rng, (200_000,), 2.0)
    obs = SlotObservation("digital", 1, x[None, :])
    for bits in (1, 2, 3):
        q = quantize(obs, bits, mode="physical")
        alpha_meas = np.mean(np.abs(q.data - obs.data) ** 2) / np.mean(np.abs(obs.data) ** 2)
        assert alpha_meas == pytest.approx(relative_quant_error(bits), rel=0.10)


def test_surrogate_quantizer_moment():
    rng = substream(27)
    x = complex_normal(rng, (400_000,), 1.3)
    obs = SlotObservation("digital", 1, x[None, :])
    alpha = relative_quant_error(3)
    q = quantize(obs, 3, mode="surrogate", rng=rng)
    ratio = np.mean(np.abs(q.data) ** 2) / ((1 - alpha) * np.mean(np.abs(x) ** 2))
    assert ratio == pytest.approx(1.0, abs=0.01)


def test_surrogate_noise_uncorrelated():
    rng = substream(28)
    x = complex_normal(rng, (400_000,), 1.0)
    obs = SlotObservation("digital", 1, x[None, :])
    alpha = relative_quant_error(3)
    q = quantize(obs, 3, mode="surrogate", rng=rng)
    v = q.data - (1 - alpha) * obs.data
    corr = abs(np.vdot(v.ravel(), x) / len(x))
    assert corr < 0.005


def test_quantize_needs_rng_in_surrogate_mode():
    obs = SlotObservation("digital", 1, np.ones((1, 8), dtype=complex))
    with pytest.raises(ValueError):
        quantize(obs, 3, mode="surrogate")


def test_optimal_step_one_bit():
    # closed form for one bit: levels at +-sqrt(2/pi), error 1 - 2/pi
    step, err = optimal_uniform_step(1)
    assert step / 2 == pytest.approx(np.sqrt(2 / np.pi), abs=2e-3)
    assert err == pytest.approx(1 - 2 / np.pi, abs=1e-4)


def test_effective_snr_formula():
    assert effective_snr_after_quantization(0.5, 0.0) == 0.5
    # saturation limit (1 - alpha) / alpha as gamma0 grows
    alpha = 0.0355
    g = effective_snr_after_quantization(1e9, alpha)
    assert g == pytest.approx((1 - alpha) / alpha, rel=1e-6)
    # the operating-point gap: 0.16 dB at the 10 Mbps target SNR
    g0 = 0.01748
    gap_db = 10 * np.log10(g0 / effective_snr_after_quantization(g0, alpha))
    assert gap_db == pytest.approx(0.16, abs=0.02)


def test_adc_power_values():
    assert adc_power(16, 59.4e-15, 1e9, 3) == pytest.approx(15.2064e-3, rel=1e-12)
    assert adc_power(16, 59.4e-15, 1e9, 0) == pytest.approx(1.9008e-3, rel=1e-12)
    assert adc_power(16, 59.4e-15, 1e9, 6) == pytest.approx(121.6512e-3, rel=1e-12)
    with pytest.raises(ValueError):
        adc_power(0, 59.4e-15, 1e9, 3)
