"""Frequency-domain model of a distorted-pilot OFDM uplink.

One OFDM symbol, ``n`` subcarriers at spacing ``df``, unit-modulus pilots
``x``.  The transmitter multiplies each pilot by a complex per-subcarrier
distortion ``z`` before sending; the receiver observes

    y = (x * z) * h + w

and forms the zero-forcing channel estimate ``y / x``.  Everything here is
a pure function of its inputs; distortion vectors are plain complex numpy
arrays of length ``n``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SPEED_OF_LIGHT_M_S = 299_792_458.0


def meters_to_seconds(range_m):
    """Propagation delay of a one-way range in meters."""
    return range_m / SPEED_OF_LIGHT_M_S


def seconds_to_meters(delay_s):
    """Range equivalent of a one-way propagation delay."""
    return delay_s * SPEED_OF_LIGHT_M_S


@dataclass(frozen=True)
class PilotConfig:
    """OFDM numerology, pilot symbols and transmit power budget.

    ``power_budget`` defaults to ``n_subcarriers`` (the uniform-allocation
    budget) and ``pilots`` to the all-ones sequence.  Pilots must be unit
    modulus; the correlation and capacity metrics are then independent of
    the particular pilot sequence.
    """

    n_subcarriers: int
    subcarrier_spacing_hz: float
    n_cp: int = 0
    power_budget: float | None = None
    pilots: np.ndarray | None = None

    def __post_init__(self):
        n = int(self.n_subcarriers)
        if n < 1:
            raise ValueError("n_subcarriers must be a positive integer")
        if not self.subcarrier_spacing_hz > 0:
            raise ValueError("subcarrier_spacing_hz must be positive")
        if not 0 <= int(self.n_cp) <= n:
            raise ValueError("n_cp must lie in [0, n_subcarriers]")
        budget = float(n) if self.power_budget is None else float(self.power_budget)
        if not budget > 0:
            raise ValueError("power_budget must be positive")
        pilots = (np.ones(n, dtype=complex) if self.pilots is None
                  else np.asarray(self.pilots, dtype=complex).copy())
        if pilots.shape != (n,):
            raise ValueError(f"pilots must have shape ({n},)")
        if np.max(np.abs(np.abs(pilots) - 1.0)) > 1e-9:
            raise ValueError("pilots must be unit modulus")
        pilots.flags.writeable = False
        object.__setattr__(self, "n_subcarriers", n)
        object.__setattr__(self, "n_cp", int(self.n_cp))
        object.__setattr__(self, "power_budget", budget)
        object.__setattr__(self, "pilots", pilots)

    @property
    def t_symbol_s(self) -> float:
        """Elementary symbol duration 1/df (also the delay period of the MAF)."""
        return 1.0 / self.subcarrier_spacing_hz

    @property
    def t_sample_s(self) -> float:
        return self.t_symbol_s / self.n_subcarriers

    @property
    def t_cp_s(self) -> float:
        return self.n_cp * self.t_sample_s


@dataclass(frozen=True)
class MultipathChannel:
    """Discrete multipath channel: complex gain and delay per path."""

    gains: np.ndarray
    delays_s: np.ndarray

    def __post_init__(self):
        gains = np.atleast_1d(np.asarray(self.gains, dtype=complex)).copy()
        delays = np.atleast_1d(np.asarray(self.delays_s, dtype=float)).copy()
        if gains.ndim != 1 or gains.shape != delays.shape:
            raise ValueError("gains and delays_s must be 1-d and equal length")
        if gains.size < 1:
            raise ValueError("channel needs at least one path")
        if not np.all(np.isfinite(delays)) or np.any(delays < 0):
            raise ValueError("delays must be finite and non-negative")
        gains.flags.writeable = False
        delays.flags.writeable = False
        object.__setattr__(self, "gains", gains)
        object.__setattr__(self, "delays_s", delays)

    @property
    def n_paths(self) -> int:
        return self.gains.size

    @classmethod
    def single_path(cls, gain: complex, delay_s: float) -> "MultipathChannel":
        return cls(gains=np.array([gain]), delays_s=np.array([delay_s]))

    @classmethod
    def from_polar(cls, magnitudes, phases_rad, delays_s) -> "MultipathChannel":
        """Build from (magnitude, phase) pairs, the form channel gains are
        usually quoted in."""
        mags = np.asarray(magnitudes, dtype=float)
        return cls(gains=mags * np.exp(1j * np.asarray(phases_rad, dtype=float)),
                   delays_s=delays_s)


@dataclass(frozen=True)
class NoiseModel:
    """Circularly symmetric complex Gaussian noise, sigma^2 per subcarrier."""

    sigma: float
    seed: int = 0

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")
        object.__setattr__(self, "seed", int(self.seed))


def channel_frequency_response(channel: MultipathChannel, config: PilotConfig) -> np.ndarray:
    """Per-subcarrier response h_i = sum_l a_l exp(-j 2 pi i df tau_l)."""
    i = np.arange(config.n_subcarriers)
    phases = np.exp(-2j * np.pi * config.subcarrier_spacing_hz
                    * np.outer(i, channel.delays_s))
    return phases @ channel.gains


def draw_noise(noise: NoiseModel, n: int, stream_index: int = 0) -> np.ndarray:
    """Draw ``n`` i.i.d. CN(0, sigma^2) samples.

    Streams are keyed by ``(seed, stream_index)`` through a counter-based
    Philox generator, so any stream can be regenerated independently of
    execution order (parallel Monte Carlo stays reproducible).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    ss = np.random.SeedSequence(entropy=(noise.seed, int(stream_index)))
    rng = np.random.Generator(np.random.Philox(ss))
    raw = rng.standard_normal(2 * n)
    return (raw[0::2] + 1j * raw[1::2]) * (noise.sigma / np.sqrt(2.0))


def synthesize_received(config: PilotConfig, z: np.ndarray, h: np.ndarray,
                        w: np.ndarray) -> np.ndarray:
    """Received pilot vector y = (x * z) * h + w (all elementwise)."""
    n = config.n_subcarriers
    z = np.asarray(z, dtype=complex)
    h = np.asarray(h, dtype=complex)
    w = np.asarray(w, dtype=complex)
    for name, v in (("z", z), ("h", h), ("w", w)):
        if v.shape != (n,):
            raise ValueError(f"{name} must have shape ({n},), got {v.shape}")
    return config.pilots * z * h + w


def zf_channel_estimate(y: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Zero-forcing channel estimate: elementwise division y / x."""
    y = np.asarray(y, dtype=complex)
    x = np.asarray(x, dtype=complex)
    if y.shape != x.shape:
        raise ValueError("y and x must have the same shape")
    if np.min(np.abs(x)) < 1e-12:
        raise ValueError("degenerate pilot: |x_i| below 1e-12")
    return y / x


def synthesize_time_pilot(config: PilotConfig, z: np.ndarray) -> np.ndarray:
    """Discrete-time pilot with cyclic prefix.

    Body samples are s[k] = (1/n) sum_i x_i z_i exp(j 2 pi k i / n); the
    last ``n_cp`` body samples are repeated at the front.
    """
    z = np.asarray(z, dtype=complex)
    if z.shape != (config.n_subcarriers,):
        raise ValueError("z length must match n_subcarriers")
    body = np.fft.ifft(config.pilots * z)
    if config.n_cp == 0:
        return body
    return np.concatenate([body[-config.n_cp:], body])


def los_gain(snr_db: float, sigma: float) -> complex:
    """Line-of-sight gain giving |a|^2 / sigma^2 = 10^(snr_db/10), with the
    conventional pi/4 phase."""
    return np.sqrt(10.0 ** (snr_db / 10.0)) * sigma * np.exp(1j * np.pi / 4)
