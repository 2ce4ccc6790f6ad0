"""Mismatched maximum-likelihood delay estimation.

The receiver assumes undistorted pilots, so its ML delay estimate reduces to
the peak of the matched-correlation power

    tau_hat = argmax_tau |(d(tau) * x)^H y|^2.

On noiseless single-path observations this objective is |a|^2 |chi(tau -
tau_bar)|^2, which is what ties the sidelobe metrics to actual estimation
outliers.  The complex path gain never needs to be estimated; the modulus
absorbs it.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .maf import _parabolic_offset
from .model import PilotConfig


@dataclass(frozen=True)
class DelaySearchGrid:
    """Uniform delay search window: center, half width, grid density.

    Grid spacing is T / (n * oversample); ``refine`` enables 3-point
    parabolic interpolation around the grid peak.
    """

    center_s: float
    half_width_s: float
    oversample: int = 32
    refine: bool = True

    def __post_init__(self):
        if not self.half_width_s > 0:
            raise ValueError("half_width_s must be positive")
        if self.oversample < 8:
            raise ValueError("oversample must be >= 8")


def mml_objective(y: np.ndarray, x: np.ndarray, tau_s, config: PilotConfig):
    """Correlation power |(d(tau) * x)^H y|^2 (vectorized over tau)."""
    y = np.asarray(y, dtype=complex)
    x = np.asarray(x, dtype=complex)
    if np.min(np.abs(x)) < 1 - 1e-9 or np.max(np.abs(x)) > 1 + 1e-9:
        raise ValueError("pilots must be unit modulus")
    tau = np.asarray(tau_s, dtype=float)
    k = np.arange(config.n_subcarriers)
    # conj(d_k x_k) y_k summed over k; rows of the phase matrix are taus
    phases = np.exp(2j * np.pi * config.subcarrier_spacing_hz
                    * np.multiply.outer(tau, k))
    out = np.abs(phases @ (x.conj() * y)) ** 2
    return out[()] if tau.ndim == 0 else out


def _grid_taus(grid: DelaySearchGrid, config: PilotConfig) -> np.ndarray:
    half_period = 0.5 * config.t_symbol_s
    if grid.half_width_s > half_period * (1 + 1e-12):
        raise ValueError("half_width_s exceeds the unambiguous window T/2")
    step = config.t_symbol_s / (config.n_subcarriers * grid.oversample)
    m = int(np.floor(grid.half_width_s / step + 1e-9))
    return grid.center_s + step * np.arange(-m, m + 1)


def mml_estimate(y: np.ndarray, x: np.ndarray, grid: DelaySearchGrid,
                 config: PilotConfig) -> float:
    """Grid argmax of the MML objective, optionally parabolically refined.

    Ties break toward the smaller delay; refinement never moves the
    estimate by more than one grid cell.
    """
    taus = _grid_taus(grid, config)
    obj = mml_objective(y, x, taus, config)
    i = int(np.argmax(obj))
    tau_hat = taus[i]
    if grid.refine and 0 < i < taus.size - 1:
        step = taus[1] - taus[0]
        tau_hat = tau_hat + _parabolic_offset(obj[i - 1], obj[i], obj[i + 1]) * step
    return float(tau_hat)


def mml_estimate_many(ys: np.ndarray, x: np.ndarray, grid: DelaySearchGrid,
                      config: PilotConfig) -> np.ndarray:
    """Vectorized `mml_estimate` over the rows of ``ys`` (trials, n).

    Identical results to looping mml_estimate; one steering-matrix build and
    one matrix product instead of per-trial ones.
    """
    ys = np.asarray(ys, dtype=complex)
    x = np.asarray(x, dtype=complex)
    taus = _grid_taus(grid, config)
    k = np.arange(config.n_subcarriers)
    phases = np.exp(2j * np.pi * config.subcarrier_spacing_hz
                    * np.multiply.outer(taus, k))
    obj = np.abs(phases @ (x.conj() * ys).T) ** 2  # (n_tau, trials)
    idx = np.argmax(obj, axis=0)
    tau_hat = taus[idx]
    if grid.refine:
        step = taus[1] - taus[0] if taus.size > 1 else 0.0
        interior = (idx > 0) & (idx < taus.size - 1)
        cols = np.nonzero(interior)[0]
        for t in cols:
            i = idx[t]
            tau_hat[t] += _parabolic_offset(obj[i - 1, t], obj[i, t],
                                            obj[i + 1, t]) * step
    return tau_hat
