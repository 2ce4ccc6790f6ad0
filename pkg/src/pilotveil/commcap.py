"""Capacity-motivated communication metric.

The achievable rate is lower-bounded through the diagonal LMMSE error
covariance of a data symbol decoded with the (mismatched) zero-forcing
channel estimate.  Dropping the noise from the estimate leaves the
distortion-only surrogate psi_i(z_i, h_i), and the bound

    f_com(z) = -sum_i log psi_i(z_i, h_i)     (natural log throughout).

For z = 1 this collapses to the familiar sum of log(1 + |h_i|^2/sigma^2).
The bound is a sum of per-subcarrier terms that can go negative (psi_i > 1)
once z_i strays far from 1, which is exactly the high-SNR capacity dip the
heavier distortions exhibit.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .model import zf_channel_estimate

# Floor for psi/r before taking logs. psi <= 0 is unreachable for z_i on the
# positive real axis but possible for general complex distortions; instead of
# crashing, terms are clamped and counted.
PSI_FLOOR = 1e-300


@dataclass(frozen=True)
class CapacityReport:
    """Per-subcarrier capacity terms -log(psi_i) and their aggregates."""

    per_subcarrier_terms: np.ndarray
    total: float
    normalized: float
    n_clamped: int = 0


def psi(z_i, h_i, sigma2: float):
    """Distortion-only LMMSE error surrogate (vectorized over inputs).

    psi = |h|^2 |z|^2 (|h|^2 + s2) / (|h|^2 |z|^2 + s2)^2
          - 2 |h|^2 Re{z} / (|h|^2 |z|^2 + s2) + 1

    All denominators are >= sigma2^2 > 0, so the value is always finite.
    """
    if not sigma2 > 0:
        raise ValueError("sigma2 must be positive")
    az2 = np.abs(np.asarray(z_i)) ** 2
    ah2 = np.abs(np.asarray(h_i)) ** 2
    den = ah2 * az2 + sigma2
    return ah2 * az2 * (ah2 + sigma2) / den**2 - 2.0 * ah2 * np.real(z_i) / den + 1.0


def f_com(z: np.ndarray, h: np.ndarray, sigma2: float) -> CapacityReport:
    """Capacity lower bound -sum_i ln psi_i as a CapacityReport."""
    z = np.asarray(z, dtype=complex)
    h = np.asarray(h, dtype=complex)
    if z.shape != h.shape:
        raise ValueError("z and h must have the same length")
    values = np.asarray(psi(z, h, sigma2), dtype=float)
    clamped = values <= PSI_FLOOR
    terms = -np.log(np.where(clamped, PSI_FLOOR, values))
    total = float(terms.sum())
    return CapacityReport(per_subcarrier_terms=terms, total=total,
                          normalized=total / z.size, n_clamped=int(clamped.sum()))


def lmmse_diag_exact(y: np.ndarray, x: np.ndarray, h: np.ndarray,
                     sigma2: float) -> np.ndarray:
    """Diagonal of the LMMSE error covariance with the actual noisy estimate.

    r_i = |hh_i|^2 (|h_i|^2 + s2) / (|hh_i|^2 + s2)^2
          - 2 Re{hh_i^* h_i} / (|hh_i|^2 + s2) + 1,   hh = y / x.

    On noiseless observations this equals psi(z_i, h_i) exactly.
    """
    if not sigma2 > 0:
        raise ValueError("sigma2 must be positive")
    h = np.asarray(h, dtype=complex)
    hh = zf_channel_estimate(y, x)
    ahh2 = np.abs(hh) ** 2
    ah2 = np.abs(h) ** 2
    den = ahh2 + sigma2
    return ahh2 * (ah2 + sigma2) / den**2 - 2.0 * np.real(hh.conj() * h) / den + 1.0


def capacity_lower_bound(r: np.ndarray) -> float:
    """-sum_i ln r_i, the log-det bound for a diagonal error covariance.

    Non-positive entries (the bound can misbehave for strong distortion) are
    clamped to a tiny floor and reported through a warning.
    """
    r = np.asarray(r, dtype=float)
    bad = r <= PSI_FLOOR
    if bad.any():
        warnings.warn(f"clamped {int(bad.sum())} non-positive LMMSE diagonal "
                      "entries before taking logs", RuntimeWarning, stacklevel=2)
    return float(-np.log(np.where(bad, PSI_FLOOR, r)).sum())
