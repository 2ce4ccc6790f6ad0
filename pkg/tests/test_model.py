import numpy as np
import pytest

from pilotveil import (MultipathChannel, NoiseModel, PilotConfig,
                       channel_frequency_response, draw_noise, los_gain,
                       synthesize_received, synthesize_time_pilot,
                       zf_channel_estimate)
from oracles import dft_channel_oracle, idft_oracle


# ---------------------------------------------------------------------------
# PilotConfig


def test_derived_symbol_time_consistency(config64):
    assert abs(config64.t_symbol_s * config64.subcarrier_spacing_hz - 1.0) <= 1e-12


def test_config_defaults(config64):
    assert config64.power_budget == 64.0
    assert np.all(config64.pilots == 1.0)
    assert config64.t_cp_s == 0.0


def test_config_rejects_non_unit_pilots():
    with pytest.raises(ValueError, match="unit modulus"):
        PilotConfig(4, 120e3, pilots=np.array([1, 1, 0.5, 1], dtype=complex))


def test_config_rejects_bad_numerology():
    with pytest.raises(ValueError):
        PilotConfig(0, 120e3)
    with pytest.raises(ValueError):
        PilotConfig(8, -1.0)
    with pytest.raises(ValueError):
        PilotConfig(8, 120e3, n_cp=9)
    with pytest.raises(ValueError):
        PilotConfig(8, 120e3, power_budget=0.0)


# ---------------------------------------------------------------------------
# channel response


def test_channel_zero_delay_identity(config64):
    ch = MultipathChannel.single_path(1.0 + 0j, 0.0)
    h = channel_frequency_response(ch, config64)
    assert np.allclose(h, 1.0, atol=1e-15)


def test_channel_single_path_flat_magnitude(config64):
    gain = 0.3 - 1.2j
    ch = MultipathChannel.single_path(gain, 1.7e-6)
    h = channel_frequency_response(ch, config64)
    mags = np.abs(h)
    assert mags.max() - mags.min() <= 1e-12 * abs(gain)


def test_channel_two_paths_matches_direct_sum(rng):
    cfg = PilotConfig(4, 120e3)
    gains = rng.normal(size=2) + 1j * rng.normal(size=2)
    delays = rng.uniform(0, cfg.t_symbol_s, size=2)
    ch = MultipathChannel(gains=gains, delays_s=delays)
    h = channel_frequency_response(ch, cfg)
    h_ref = dft_channel_oracle(gains, delays, 4, cfg.subcarrier_spacing_hz)
    assert np.allclose(h, h_ref, rtol=1e-12, atol=1e-12)


def test_channel_validation():
    with pytest.raises(ValueError):
        MultipathChannel(gains=np.array([], dtype=complex), delays_s=np.array([]))
    with pytest.raises(ValueError):
        MultipathChannel(gains=np.array([1.0 + 0j]), delays_s=np.array([-1e-9]))


def test_channel_from_polar():
    ch = MultipathChannel.from_polar([2.0], [np.pi / 2], [1e-6])
    assert np.allclose(ch.gains, [2j])


# ---------------------------------------------------------------------------
# noise


def test_noise_mean_power_law_of_large_numbers():
    noise = NoiseModel(sigma=1.0, seed=99)
    w = draw_noise(noise, 100_000, stream_index=0)
    assert 0.99 <= np.mean(np.abs(w) ** 2) <= 1.01


def test_noise_energy_matches_variance(config64):
    noise = NoiseModel(sigma=0.37, seed=5)
    total = 0.0
    n_draws = 2000
    for t in range(n_draws):
        total += np.sum(np.abs(draw_noise(noise, 64, stream_index=t)) ** 2)
    expected = n_draws * 64 * noise.sigma**2
    assert abs(total - expected) <= 0.02 * expected


def test_noise_deterministic_per_stream():
    noise = NoiseModel(sigma=2.0, seed=123)
    a = draw_noise(noise, 256, stream_index=7)
    b = draw_noise(noise, 256, stream_index=7)
    assert np.array_equal(a, b)


def test_noise_streams_differ():
    noise = NoiseModel(sigma=2.0, seed=123)
    a = draw_noise(noise, 256, stream_index=0)
    b = draw_noise(noise, 256, stream_index=1)
    assert not np.allclose(a, b)


def test_noise_validation():
    with pytest.raises(ValueError):
        NoiseModel(sigma=0.0)
    with pytest.raises(ValueError):
        draw_noise(NoiseModel(sigma=1.0), 0)


# ---------------------------------------------------------------------------
# received signal and ZF estimate


def test_received_identity_channel(config64):
    n = config64.n_subcarriers
    y = synthesize_received(config64, np.ones(n), np.ones(n), np.zeros(n))
    assert np.array_equal(y, config64.pilots)


def test_received_passes_channel_through(config64):
    n = config64.n_subcarriers
    h = np.exp(1j * np.linspace(0, 3, n))
    y = synthesize_received(config64, np.ones(n), h, np.zeros(n))
    assert np.allclose(y, h, atol=1e-15)


def test_received_elementwise_oracle(rng):
    cfg = PilotConfig(4, 120e3, pilots=np.exp(1j * rng.uniform(0, 2 * np.pi, 4)))
    z = rng.normal(size=4) + 1j * rng.normal(size=4)
    h = rng.normal(size=4) + 1j * rng.normal(size=4)
    w = rng.normal(size=4) + 1j * rng.normal(size=4)
    y = synthesize_received(cfg, z, h, w)
    for i in range(4):
        assert abs(y[i] - (cfg.pilots[i] * z[i] * h[i] + w[i])) <= 1e-15


def test_received_length_mismatch(config64):
    with pytest.raises(ValueError, match="shape"):
        synthesize_received(config64, np.ones(63), np.ones(64), np.zeros(64))


def test_zf_noiseless_recovers_channel(config64, rng):
    n = config64.n_subcarriers
    h = rng.normal(size=n) + 1j * rng.normal(size=n)
    y = synthesize_received(config64, np.ones(n), h, np.zeros(n))
    assert np.allclose(zf_channel_estimate(y, config64.pilots), h, rtol=1e-12)


def test_zf_with_distortion_returns_h_times_z(config64, rng):
    # the mismatch the capacity bound is built on: hhat = h * z when w = 0
    n = config64.n_subcarriers
    for _ in range(20):
        z = rng.normal(size=n) + 1j * rng.normal(size=n)
        h = rng.normal(size=n) + 1j * rng.normal(size=n)
        y = synthesize_received(config64, z, h, np.zeros(n))
        hhat = zf_channel_estimate(y, config64.pilots)
        assert np.allclose(hhat, h * z, rtol=1e-12, atol=1e-14)


def test_zf_identity_pilots(config64):
    assert np.allclose(zf_channel_estimate(config64.pilots, config64.pilots), 1.0)


def test_zf_degenerate_pilot_error():
    with pytest.raises(ValueError, match="degenerate"):
        zf_channel_estimate(np.ones(4), np.array([1, 1, 1e-13, 1], dtype=complex))


# ---------------------------------------------------------------------------
# time-domain synthesis


def test_time_pilot_unit_impulse(config64):
    s = synthesize_time_pilot(config64, np.ones(64))
    assert abs(s[0] - 1.0) <= 1e-12
    assert np.max(np.abs(s[1:])) <= 1e-12


def test_time_pilot_matches_idft_sum(rng):
    cfg = PilotConfig(8, 120e3)
    z = rng.normal(size=8) + 1j * rng.normal(size=8)
    s = synthesize_time_pilot(cfg, z)
    assert np.allclose(s, idft_oracle(cfg.pilots * z), rtol=1e-12, atol=1e-12)


def test_time_pilot_cyclic_prefix(rng):
    cfg = PilotConfig(16, 120e3, n_cp=4)
    z = rng.normal(size=16) + 1j * rng.normal(size=16)
    s = synthesize_time_pilot(cfg, z)
    assert s.size == 20
    assert np.array_equal(s[:4], s[16:])


def test_time_pilot_parseval(rng):
    cfg = PilotConfig(32, 120e3)
    z = rng.normal(size=32) + 1j * rng.normal(size=32)
    s = synthesize_time_pilot(cfg, z)
    lhs = np.sum(np.abs(s) ** 2)
    rhs = np.sum(np.abs(cfg.pilots * z) ** 2) / 32
    assert abs(lhs - rhs) <= 1e-12 * rhs


# ---------------------------------------------------------------------------
# line-of-sight gain


def test_los_gain_zero_db_unit_sigma():
    assert los_gain(0.0, 1.0) == pytest.approx(np.exp(1j * np.pi / 4))


def test_los_gain_twenty_db_is_ten_x():
    assert los_gain(20.0, 1.0) == pytest.approx(10 * np.exp(1j * np.pi / 4))


def test_los_gain_reference_magnitude():
    # -10 dB at the reference sigma = 8.8e-7
    assert abs(los_gain(-10.0, 8.8e-7)) == pytest.approx(2.783e-7, rel=1e-3)
