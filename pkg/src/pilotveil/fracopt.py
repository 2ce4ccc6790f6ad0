"""Sidelobe-ratio maximization near the communication-optimal pilot.

Maximizes the generalized Rayleigh quotient z^H A z / z^H B z over the
proximity ball ||z - 1||^2 <= eps * P_t (for P_t >= n the
communication-optimal distortion is z = 1 and the ball is the only active
constraint; the power sphere is checked afterwards and any exceedance is
reported, never silently projected away).

Outer loop: Dinkelbach's transform — maximize z^H A z - beta z^H B z with
beta reset to the current ratio, which makes the ratio sequence
non-decreasing as long as each inner solve starts from the previous iterate.

Inner loop: difference-of-convex ascent.  Linearizing the convex numerator
at z_t leaves the ball-constrained convex QCQP

    min_z  beta z^H B z - 2 Re{b^H z},    b = A z_t,

whose KKT stationarity reads (beta B + lambda I) z = b + lambda 1.  With the
rank-one B = 1 1^T the Sherman-Morrison identity gives z(lambda) in closed
form, and the single multiplier lambda is pinned by the active-ball equation
||z(lambda) - 1||^2 = eps P_t, a strictly decreasing scalar root problem.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .maf import (MetricKind, MetricQuadratics, default_sidelobe_region,
                  dominant_sidelobe, metric_pair, rank_one_q, rayleigh_ratio)
from .model import PilotConfig

# b counts as parallel to the ones vector when its orthogonal part is below
# this fraction of its norm; beyond that the lambda > 0 branch applies.
_SPAN_ONE_RTOL = 1e-14


class SolverConsistencyError(RuntimeError):
    """The ascent property the solver is built on was violated numerically."""


@dataclass(frozen=True)
class OptimizerOptions:
    """Tolerances and caps for the Dinkelbach / DoC solver.

    ``epsilon`` is the normalized proximity radius: ||z - 1||^2 <= eps P_t.
    ``real_z`` switches to the real-distortion variant (the linearized term
    uses Re{b}, keeping every iterate real).  ``taustar_refresh`` re-locates
    the SLPR sidelobe at the optimum and re-optimizes, at most 3 rounds;
    off by default since the frozen tau* assumption holds for small eps.
    """

    epsilon: float
    outer_tol: float = 1e-8
    outer_max_iters: int = 100
    inner_tol: float = 1e-9
    inner_max_iters: int = 200
    lambda_tol: float = 1e-12
    real_z: bool = False
    taustar_refresh: int = 0

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        for name in ("outer_tol", "inner_tol", "lambda_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        for name in ("outer_max_iters", "inner_max_iters"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if not 0 <= self.taustar_refresh <= 3:
            raise ValueError("taustar_refresh must lie in [0, 3]")


@dataclass(frozen=True)
class OptimizationReport:
    """Converged distortion plus the optimizer's audit trail.

    ``power_residual`` = ||z||^2 - P_t and ``proximity_residual`` =
    ||z - 1||^2 - eps P_t; positive values mean the constraint is violated
    (reported, not repaired).
    """

    z_opt: np.ndarray
    beta_trajectory: np.ndarray
    final_ratio: float
    outer_iters: int
    total_inner_iters: int
    power_residual: float
    proximity_residual: float
    lambda_final: float


class InnerSolve(NamedTuple):
    z: np.ndarray
    n_iters: int
    lambda_final: float


def comm_optimal(config: PilotConfig) -> np.ndarray:
    """Communication-optimal distortion z = 1 (valid for P_t >= n).

    Below the uniform budget the all-ones point is infeasible and the
    optimum has a different structure; that regime is not supported here.
    """
    if config.power_budget < config.n_subcarriers:
        raise ValueError("comm_optimal requires power_budget >= n_subcarriers")
    return np.ones(config.n_subcarriers, dtype=complex)


def solve_lambda(beta: float, b: np.ndarray, epsilon_ball: float,
                 tol: float = 1e-12) -> float:
    """Root of the active-ball equation ||z(lambda) - 1||^2 = epsilon_ball.

    Splitting b = (s/n) 1 + b_perp (s = 1^T b), the Sherman-Morrison form of
    z(lambda) gives

        phi(lambda) = ||b_perp||^2 / lambda^2
                      + n |s/n - beta n|^2 / (lambda + beta n)^2
                      - epsilon_ball,

    strictly decreasing on lambda > 0 with phi(0+) = +inf and
    phi(inf) = -epsilon_ball, so a geometric bracket expansion followed by
    bisection finds the unique positive root.
    """
    b = np.asarray(b, dtype=complex)
    if not epsilon_ball > 0:
        raise ValueError("epsilon_ball must be positive")
    n = b.size
    s = b.sum()
    b_perp = b - s / n
    norm_perp2 = float(np.vdot(b_perp, b_perp).real)
    if np.sqrt(norm_perp2) < _SPAN_ONE_RTOL * np.linalg.norm(b):
        raise ValueError("b is (numerically) parallel to the ones vector; "
                         "the lambda = 0 branch applies")
    t = n * abs(s / n - beta * n) ** 2

    def phi(lam):
        return norm_perp2 / lam**2 + t / (lam + beta * n) ** 2 - epsilon_ball

    lam0 = np.sqrt(norm_perp2 / epsilon_ball)
    lo, hi = lam0 / 16.0, lam0 * 16.0
    for _ in range(200):
        if phi(lo) > 0:
            break
        lo /= 16.0
    else:
        raise SolverConsistencyError("failed to bracket lambda from below")
    for _ in range(200):
        if phi(hi) < 0:
            break
        hi *= 16.0
    else:
        raise SolverConsistencyError("failed to bracket lambda from above")
    while hi - lo > tol * lo:
        mid = 0.5 * (lo + hi)
        if phi(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def doc_kkt_step(beta: float, b: np.ndarray, epsilon_ball: float,
                 lambda_tol: float = 1e-12) -> tuple[np.ndarray, float]:
    """Exact solution of min ||z-1||^2 <= eps_ball of beta z^H 1 1^T z - 2 Re{b^H z}.

    Complementary slackness leaves two cases.  If b is parallel to 1, the
    pseudo-inverse candidate z = (s / (beta n^2)) 1 solves the unconstrained
    stationarity; it is returned with lambda = 0 when inside the ball, else
    the reduced one-dimensional active-ball equation gives lambda
    analytically.  Otherwise lambda > 0 is found by `solve_lambda` and

        z(lambda) = 1 + b_perp / lambda + (s - beta n^2) / (n (lambda + beta n)) 1.

    Returns (z, lambda).
    """
    b = np.asarray(b, dtype=complex)
    if not epsilon_ball > 0:
        raise ValueError("epsilon_ball must be positive")
    if not beta > 0:
        raise ValueError("beta must be positive")
    if not np.all(np.isfinite(b.view(float))):
        raise ValueError("b must be finite")
    n = b.size
    ones = np.ones(n, dtype=complex)
    s = b.sum()
    b_perp = b - s / n
    if np.linalg.norm(b_perp) < _SPAN_ONE_RTOL * max(np.linalg.norm(b), 1e-300):
        mean_z = s / (beta * n * n)
        if n * abs(mean_z - 1.0) ** 2 <= epsilon_ball * (1 + 1e-12):
            return mean_z * ones, 0.0
        lam = abs(s - beta * n * n) / np.sqrt(n * epsilon_ball) - beta * n
    else:
        lam = solve_lambda(beta, b, epsilon_ball, tol=lambda_tol)
    coef = (s - beta * n * n) / (n * (lam + beta * n))
    return (1.0 + coef) * ones + b_perp / lam, float(lam)


def doc_inner(q: MetricQuadratics, beta: float, z_init: np.ndarray,
              epsilon_ball: float, opts: OptimizerOptions) -> InnerSolve:
    """DoC ascent on the Dinkelbach surrogate z^H A z - beta z^H B z.

    Each step relinearizes the numerator at the current iterate and applies
    the closed-form KKT step.  The surrogate is guaranteed non-decreasing;
    a numerical decrease beyond 1e-9 n aborts with SolverConsistencyError.
    """
    z = np.asarray(z_init, dtype=complex)
    n = z.size
    if float(np.vdot(z - 1.0, z - 1.0).real) > epsilon_ball * (1 + 1e-9):
        raise ValueError("z_init is infeasible for the proximity ball")

    def surrogate(v):
        return float(np.real(v.conj() @ (q.a @ v)) - beta * np.real(v.conj() @ (q.b @ v)))

    surr = surrogate(z)
    lam = 0.0
    iters = 0
    for iters in range(1, opts.inner_max_iters + 1):
        b = q.a @ z
        if opts.real_z:
            b = b.real.astype(complex)
        z_new, lam = doc_kkt_step(beta, b, epsilon_ball, lambda_tol=opts.lambda_tol)
        new_surr = surrogate(z_new)
        if new_surr < surr - 1e-9 * n:
            raise SolverConsistencyError(
                f"DoC surrogate decreased by {surr - new_surr:.3e} at inner "
                f"iteration {iters}")
        step = float(np.linalg.norm(z_new - z))
        z, surr = z_new, new_surr
        if step <= opts.inner_tol * np.sqrt(n):
            break
    return InnerSolve(z=z, n_iters=iters, lambda_final=lam)


def dinkelbach_maximize(q: MetricQuadratics, config: PilotConfig,
                        opts: OptimizerOptions) -> OptimizationReport:
    """Maximize the metric ratio within the proximity ball around z = 1.

    Starts at the communication-optimal point, alternates ratio updates
    (beta) with warm-started DoC inner solves, and stops once beta moves by
    less than outer_tol (relative) or the iteration cap is hit.
    """
    z = comm_optimal(config)
    eps_ball = opts.epsilon * config.power_budget
    beta = rayleigh_ratio(z, q)
    if not np.isfinite(beta):
        raise ValueError("metric ratio is not finite at the starting point")
    betas = [beta]
    total_inner = 0
    lam_final = 0.0
    outer = 0
    for outer in range(1, opts.outer_max_iters + 1):
        inner = doc_inner(q, beta, z, eps_ball, opts)
        z = inner.z
        total_inner += inner.n_iters
        lam_final = inner.lambda_final
        new_beta = rayleigh_ratio(z, q)
        betas.append(new_beta)
        converged = abs(new_beta - beta) <= opts.outer_tol * max(1.0, abs(beta))
        beta = new_beta
        if converged:
            break
    z = z.copy()
    z.flags.writeable = False
    return OptimizationReport(
        z_opt=z,
        beta_trajectory=np.asarray(betas),
        final_ratio=beta,
        outer_iters=outer,
        total_inner_iters=total_inner,
        power_residual=float(np.vdot(z, z).real - config.power_budget),
        proximity_residual=float(np.vdot(z - 1.0, z - 1.0).real - eps_ball),
        lambda_final=lam_final,
    )


def optimize_metric(kind, config: PilotConfig, opts: OptimizerOptions,
                    region=None, oversample: int = 64
                    ) -> tuple[OptimizationReport, MetricQuadratics]:
    """Build the metric pair for ``kind`` and run the full optimizer.

    With ``opts.taustar_refresh`` > 0 and the SLPR metric, the dominant
    sidelobe is re-located at the converged distortion and the optimization
    repeated until tau* stops moving (at most the requested number of
    rounds).  Returns (report, metric pair actually used).
    """
    kind = MetricKind(kind)
    if region is None:
        region = default_sidelobe_region(config)
    z_ref = comm_optimal(config)
    q = metric_pair(kind, z_ref, region, config, oversample=oversample)
    report = dinkelbach_maximize(q, config, opts)
    if kind is MetricKind.SLPR:
        cell = config.t_symbol_s / (config.n_subcarriers * oversample)
        for _ in range(opts.taustar_refresh):
            tau_new = dominant_sidelobe(report.z_opt, region, config,
                                        oversample=oversample)
            if abs(tau_new - q.tau_star_s) <= cell:
                break
            q = MetricQuadratics(kind=kind, a=rank_one_q(tau_new, config),
                                 b=q.b, region=region, tau_star_s=tau_new)
            report = dinkelbach_maximize(q, config, opts)
    return report, q
