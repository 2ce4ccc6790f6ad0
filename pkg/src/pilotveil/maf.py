"""Mismatched ambiguity function (MAF) machinery.

The receiver correlates what it actually got (pilots times the secret
distortion ``z``) against the undistorted pilot it assumes, so the delay
profile it sees is the squared magnitude of

    chi(tau) = sum_k z_k exp(j 2 pi k df tau) = d(tau)^H z,

periodic with period ``1/df``.  Writing |chi(tau)|^2 = z^H Q(tau) z with the
rank-one Q(tau) = d(tau) d(tau)^H turns both sidelobe metrics into
generalized Rayleigh quotients z^H A z / z^H B z:

  * SLPR: A = Q(tau*) at the dominant sidelobe offset tau*, B = Q(0);
  * ISL:  A = integral of Q over the sidelobe band, B = Q(0).
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.linalg import toeplitz

from .model import PilotConfig


class MetricKind(enum.Enum):
    SLPR = "slpr"
    ISL = "isl"


def steering(tau_s: float, config: PilotConfig) -> np.ndarray:
    """Delay steering vector d_k = exp(-j 2 pi k df tau)."""
    k = np.arange(config.n_subcarriers)
    return np.exp(-2j * np.pi * k * config.subcarrier_spacing_hz * tau_s)


def maf_value(z: np.ndarray, tau_s, config: PilotConfig):
    """chi(tau) = d(tau)^H z, for scalar or array tau (vectorized)."""
    z = np.asarray(z, dtype=complex)
    tau = np.asarray(tau_s, dtype=float)
    k = np.arange(config.n_subcarriers)
    phases = np.exp(2j * np.pi * config.subcarrier_spacing_hz
                    * np.multiply.outer(tau, k))
    out = phases @ z
    return out[()] if tau.ndim == 0 else out


def rank_one_q(tau_s: float, config: PilotConfig) -> np.ndarray:
    """Rank-one correlation-power matrix Q(tau) = d(tau) d(tau)^H."""
    d = steering(tau_s, config)
    return np.outer(d, d.conj())


@dataclass(frozen=True)
class SidelobeRegion:
    """Symmetric delay band {tau : tau_null_s <= |tau| <= tau_max_s}."""

    tau_null_s: float
    tau_max_s: float

    def __post_init__(self):
        if not 0 < self.tau_null_s < self.tau_max_s:
            raise ValueError("need 0 < tau_null_s < tau_max_s")


def default_sidelobe_region(config: PilotConfig,
                            tau_max_s: float | None = None) -> SidelobeRegion:
    """Sidelobe band from the undistorted first null out to half the period.

    The Dirichlet mainlobe of the all-ones distortion first vanishes at
    1/(n df); half the period is the farthest unambiguous offset.
    """
    tau_null = 1.0 / (config.n_subcarriers * config.subcarrier_spacing_hz)
    half_period = 0.5 * config.t_symbol_s
    if tau_max_s is None:
        tau_max_s = half_period
    if not tau_null < tau_max_s <= half_period * (1 + 1e-12):
        raise ValueError("tau_max_s must lie in (tau_null_s, T/2]")
    return SidelobeRegion(tau_null_s=tau_null, tau_max_s=float(tau_max_s))


def _parabolic_offset(y_left: float, y_mid: float, y_right: float) -> float:
    """Vertex offset (in grid cells, clamped to [-1, 1]) of the parabola
    through three equally spaced samples."""
    denom = y_left - 2.0 * y_mid + y_right
    if denom >= 0:  # not a local max (flat or concave-up); stay on the grid
        return 0.0
    off = 0.5 * (y_left - y_right) / denom
    return float(np.clip(off, -1.0, 1.0))


def _branch_grid(region: SidelobeRegion, config: PilotConfig, oversample: int) -> np.ndarray:
    step = config.t_symbol_s / (config.n_subcarriers * oversample)
    n_pts = int(np.floor((region.tau_max_s - region.tau_null_s) / step + 1e-12)) + 1
    return region.tau_null_s + step * np.arange(n_pts)


def dominant_sidelobe(z: np.ndarray, region: SidelobeRegion,
                      config: PilotConfig, oversample: int = 64) -> float:
    """Offset tau* of the strongest sidelobe of |chi|^2 within the region.

    Uniform grid search at spacing T/(n * oversample) over both halves of
    the symmetric region, then 3-point parabolic interpolation on log power
    around the winner.  When the two halves tie exactly (real z, e.g. the
    all-ones reference) the positive offset is returned.
    """
    if oversample < 8:
        raise ValueError("oversample must be >= 8")
    taus_pos = _branch_grid(region, config, oversample)
    if taus_pos.size == 0:
        raise ValueError("sidelobe region contains no grid point")
    taus_neg = -taus_pos
    pow_pos = np.abs(maf_value(z, taus_pos, config)) ** 2
    pow_neg = np.abs(maf_value(z, taus_neg, config)) ** 2
    if pow_pos.max() >= pow_neg.max():
        taus, power = taus_pos, pow_pos
    else:
        taus, power = taus_neg, pow_neg
    i = int(np.argmax(power))
    tau_hat = taus[i]
    if 0 < i < taus.size - 1:
        logp = np.log10(np.maximum(power[i - 1:i + 2], 1e-300))
        step = taus[1] - taus[0]
        tau_hat = tau_hat + _parabolic_offset(*logp) * step
    lo, hi = sorted((taus[0], taus[-1]))
    return float(np.clip(tau_hat, lo, hi))


def isl_matrix(region: SidelobeRegion, config: PilotConfig) -> np.ndarray:
    """Closed form of the sidelobe-band integral of Q(tau).

    Entry (k, l) integrates exp(j 2 pi m df tau) with m = l - k over the
    symmetric band, giving a real symmetric Toeplitz matrix:
    2 (tau_max - tau_null) on the diagonal and
    [sin(2 pi m df tau_max) - sin(2 pi m df tau_null)] / (pi m df) off it.
    """
    df = config.subcarrier_spacing_hz
    m = np.arange(config.n_subcarriers)
    col = np.empty(config.n_subcarriers)
    col[0] = 2.0 * (region.tau_max_s - region.tau_null_s)
    mm = m[1:]
    col[1:] = (np.sin(2 * np.pi * mm * df * region.tau_max_s)
               - np.sin(2 * np.pi * mm * df * region.tau_null_s)) / (np.pi * mm * df)
    return toeplitz(col)


@dataclass(frozen=True)
class MetricQuadratics:
    """Hermitian pair (A, B) defining a sidelobe metric as z^H A z / z^H B z."""

    kind: MetricKind
    a: np.ndarray
    b: np.ndarray
    region: SidelobeRegion
    tau_star_s: float | None = None


def metric_pair(kind, z_ref: np.ndarray, region: SidelobeRegion,
                config: PilotConfig, oversample: int = 64) -> MetricQuadratics:
    """Build the (A, B) pair for SLPR or ISL.

    B is always the mainlobe matrix Q(0).  For SLPR, tau* is located at the
    reference distortion ``z_ref`` and frozen: the optimizer stays in a small
    ball around the reference, where the dominant-sidelobe position barely
    moves.  For ISL, A depends only on the region.
    """
    kind = MetricKind(kind)
    b = rank_one_q(0.0, config)
    if kind is MetricKind.SLPR:
        tau_star = dominant_sidelobe(z_ref, region, config, oversample=oversample)
        a = rank_one_q(tau_star, config)
        return MetricQuadratics(kind=kind, a=a, b=b, region=region, tau_star_s=tau_star)
    return MetricQuadratics(kind=kind, a=isl_matrix(region, config), b=b, region=region)


def rayleigh_ratio(z: np.ndarray, q: MetricQuadratics) -> float:
    """Generalized Rayleigh quotient z^H A z / z^H B z of the metric pair."""
    z = np.asarray(z, dtype=complex)
    num = float(np.real(z.conj() @ (q.a @ z)))
    den = float(np.real(z.conj() @ (q.b @ z)))
    if den <= 1e-14 * z.size * float(np.vdot(z, z).real):
        raise ValueError("degenerate mainlobe: z^H B z vanishes (sum of z is ~0)")
    return num / den
