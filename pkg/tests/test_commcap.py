import numpy as np
import pytest

from pilotveil import (NoiseModel, PilotConfig, capacity_lower_bound, draw_noise,
                       f_com, lmmse_diag_exact, los_gain, psi,
                       synthesize_received)

SIGMA = 8.8e-7
SIGMA2 = SIGMA**2


# ---------------------------------------------------------------------------
# psi


def test_psi_no_distortion_closed_form(rng):
    # z = 1 collapses psi to sigma^2 / (|h|^2 + sigma^2)
    for _ in range(50):
        h = rng.normal() + 1j * rng.normal()
        got = psi(1.0 + 0j, h, SIGMA2)
        want = SIGMA2 / (abs(h) ** 2 + SIGMA2)
        assert got == pytest.approx(want, rel=1e-12)


def test_psi_zero_distortion_is_one():
    assert psi(0.0 + 0j, 1.3 - 0.4j, SIGMA2) == pytest.approx(1.0)


def test_psi_dead_subcarrier_is_one(rng):
    z = rng.normal() + 1j * rng.normal()
    assert psi(z, 0.0 + 0j, SIGMA2) == pytest.approx(1.0)


def test_psi_requires_positive_sigma2():
    with pytest.raises(ValueError):
        psi(1.0, 1.0, 0.0)


def test_psi_depends_on_phase_max_at_zero(rng):
    # unit-modulus distortions: the bound peaks at theta = 0, so capacity is
    # genuinely phase sensitive, not a |z| story
    h = los_gain(5.0, SIGMA)
    thetas = np.linspace(-np.pi, np.pi, 721)
    vals = [-np.log(psi(np.exp(1j * t), h, SIGMA2)) for t in thetas]
    assert int(np.argmax(vals)) == 360  # theta = 0
    assert vals[100] < vals[360]


# ---------------------------------------------------------------------------
# f_com


def test_f_com_single_path_snr0_is_ln2(config64):
    h = np.full(64, los_gain(0.0, SIGMA))
    report = f_com(np.ones(64), h, SIGMA2)
    assert report.normalized == pytest.approx(np.log(2.0), abs=1e-12)


def test_f_com_single_path_snr15(config64):
    h = np.full(64, los_gain(15.0, SIGMA))
    report = f_com(np.ones(64), h, SIGMA2)
    assert report.normalized == pytest.approx(np.log(1 + 10**1.5), abs=1e-9)
    assert report.normalized == pytest.approx(3.485011, abs=1e-5)


def test_f_com_no_distortion_matches_log_identity(rng):
    # f_com(1, h) = sum ln(1 + |h_i|^2/sigma^2) for any channel
    for _ in range(100):
        h = SIGMA * (rng.normal(size=64) + 1j * rng.normal(size=64))
        report = f_com(np.ones(64), h, SIGMA2)
        want = np.sum(np.log1p(np.abs(h) ** 2 / SIGMA2))
        assert report.total == pytest.approx(want, rel=1e-12)


def test_f_com_aggregates_consistent(rng):
    z = 1.0 + 0.3 * (rng.normal(size=64) + 1j * rng.normal(size=64))
    h = SIGMA * (rng.normal(size=64) + 1j * rng.normal(size=64))
    report = f_com(z, h, SIGMA2)
    assert report.total == pytest.approx(np.sum(report.per_subcarrier_terms), abs=1e-12)
    assert report.normalized * 64 == pytest.approx(report.total, abs=1e-12)


def test_f_com_length_mismatch():
    with pytest.raises(ValueError):
        f_com(np.ones(4), np.ones(5), SIGMA2)


def test_f_com_finite_at_cancellation_corner():
    # psi -> 0+ as |z| -> 0 with |h|^2/sigma^2 ~ 1/|z|; the guard keeps the
    # log finite and, since psi stays positive even here, never fires
    z = np.array([1e-16 + 0j])
    h = np.array([1e8 + 0j])
    report = f_com(z, h, 1.0)
    assert np.isfinite(report.total)
    assert report.n_clamped == 0
    assert np.all(psi(z, h, 1.0) > 0)


# ---------------------------------------------------------------------------
# exact LMMSE diagonal


def test_lmmse_noiseless_equals_psi(config64, rng):
    n = 64
    for _ in range(20):
        z = rng.normal(size=n) + 1j * rng.normal(size=n)
        h = SIGMA * (rng.normal(size=n) + 1j * rng.normal(size=n))
        y = synthesize_received(config64, z, h, np.zeros(n))
        r = lmmse_diag_exact(y, config64.pilots, h, SIGMA2)
        ref = psi(z, h, SIGMA2)
        assert np.allclose(r, ref, rtol=1e-12, atol=1e-15)


def test_lmmse_perfect_estimate_matches_psi_at_one(config64, rng):
    n = 64
    h = SIGMA * (rng.normal(size=n) + 1j * rng.normal(size=n))
    y = synthesize_received(config64, np.ones(n), h, np.zeros(n))
    r = lmmse_diag_exact(y, config64.pilots, h, SIGMA2)
    assert np.allclose(r, SIGMA2 / (np.abs(h) ** 2 + SIGMA2), rtol=1e-12)


def test_lmmse_pure_noise_nonnegative(config64):
    noise = NoiseModel(sigma=SIGMA, seed=11)
    h = np.zeros(64, dtype=complex)
    for t in range(1000):
        y = draw_noise(noise, 64, stream_index=t)
        r = lmmse_diag_exact(y, config64.pilots, h, SIGMA2)
        assert np.all(r >= 0)


# ---------------------------------------------------------------------------
# capacity lower bound


def test_capacity_bound_all_ones_is_zero():
    assert capacity_lower_bound(np.ones(16)) == 0.0


def test_capacity_bound_log_identity(rng):
    h = rng.normal(size=32) + 1j * rng.normal(size=32)
    r = 1.0 / (1.0 + np.abs(h) ** 2)  # sigma2 = 1
    want = np.sum(np.log1p(np.abs(h) ** 2))
    assert capacity_lower_bound(r) == pytest.approx(want, rel=1e-12)


def test_capacity_bound_single_half_entry():
    r = np.array([0.5, 1.0, 1.0, 1.0])
    assert capacity_lower_bound(r) == pytest.approx(np.log(2.0))


def test_capacity_bound_clamps_and_warns():
    with pytest.warns(RuntimeWarning, match="clamped"):
        val = capacity_lower_bound(np.array([1.0, -0.5]))
    assert np.isfinite(val)
