"""Command-line front end.

Subcommands: ``optimize``, ``range-profile``, ``rmse-sweep``,
``capacity-sweep``, ``tradeoff``.  A JSON config file supplies any field of
the reference scenario; command-line flags override file values; defaults
reproduce the reference scenario exactly.  Sweeps serialize to CSV with 9
significant digits in deterministic ascending key order, optimization runs
to a JSON report (schema_version 1).

Exit codes: 0 success, 2 configuration error, 3 solver error, 4 I/O error.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
from dataclasses import dataclass, field

import numpy as np

from .fracopt import OptimizerOptions, SolverConsistencyError, optimize_metric
from .harness import (ScenarioSpec, SweepRecord, capacity_sweep,
                      default_scenario, design_distortion, range_profile,
                      rmse_sweep, tradeoff_sweep)
from .maf import MetricKind, SidelobeRegion, default_sidelobe_region
from .model import NoiseModel, PilotConfig, meters_to_seconds

REPORT_SCHEMA_VERSION = 1


# ---------------------------------------------------------------------------
# configuration file


@dataclass
class ScenarioSection:
    n_subcarriers: int = 64
    subcarrier_spacing_hz: float = 120e3
    n_cp: int = 0
    power_budget: float | None = None  # default: n_subcarriers
    pilots: list | None = None  # complex entries; None = all-ones
    path_delay_m: float = 500.0
    sigma: float = 8.8e-7
    seed: int = 0
    snr_db: str = "-10:0.5:5"
    trials: int = 2000
    epsilon_list: list = field(default_factory=lambda: [0.0, 0.1, 0.25])
    metric_list: list = field(default_factory=lambda: ["slpr", "isl"])
    profile_window_m: list = field(default_factory=lambda: [250.0, 750.0])


@dataclass
class OptimizerSection:
    metric: str = "slpr"
    epsilon: float = 0.0
    outer_tol: float = 1e-8
    outer_max_iters: int = 100
    inner_tol: float = 1e-9
    inner_max_iters: int = 200
    lambda_tol: float = 1e-12
    real_z: bool = False
    refresh_taustar: int = 0


@dataclass
class RegionSection:
    tau_null_m: float | None = None  # default: first null of the all-ones MAF
    tau_max_m: float | None = None  # default: half the MAF period


@dataclass
class MmlSection:
    oversample: int = 32
    refine: bool = True
    n_bootstrap: int = 500


@dataclass
class OutputSection:
    format: str = "csv"  # csv | json (sweep commands only)


@dataclass
class RunConfig:
    scenario: ScenarioSection = field(default_factory=ScenarioSection)
    optimizer: OptimizerSection = field(default_factory=OptimizerSection)
    region: RegionSection = field(default_factory=RegionSection)
    mml: MmlSection = field(default_factory=MmlSection)
    output: OutputSection = field(default_factory=OutputSection)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        cfg = cls()
        sections = {f.name: getattr(cfg, f.name) for f in dataclasses.fields(cls)}
        for section_name, values in data.items():
            if section_name not in sections:
                raise ValueError(f"unknown config section {section_name!r}")
            section = sections[section_name]
            known = {f.name for f in dataclasses.fields(section)}
            for key, value in values.items():
                if key not in known:
                    raise ValueError(
                        f"unknown key {key!r} in config section {section_name!r}")
                setattr(section, key, value)
        return cfg

    @classmethod
    def from_file(cls, path: str) -> "RunConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")


def parse_complex(entry) -> complex:
    """Complex config entry: [re, im], {"re","im"} or {"mag","phase_rad"}."""
    if isinstance(entry, (int, float)):
        return complex(entry)
    if isinstance(entry, (list, tuple)) and len(entry) == 2:
        return complex(entry[0], entry[1])
    if isinstance(entry, dict):
        if set(entry) == {"re", "im"}:
            return complex(entry["re"], entry["im"])
        if set(entry) == {"mag", "phase_rad"}:
            return entry["mag"] * np.exp(1j * entry["phase_rad"])
    raise ValueError(f"cannot parse complex value from {entry!r}")


def parse_snr_spec(spec: str) -> tuple[float, ...]:
    """SNR grid from 'lo:step:hi' (both endpoints included)."""
    parts = spec.split(":")
    if len(parts) != 3:
        raise ValueError("--snr expects lo:step:hi")
    lo, step, hi = (float(p) for p in parts)
    if step <= 0 or hi < lo:
        raise ValueError("--snr needs step > 0 and hi >= lo")
    return tuple(np.arange(lo, hi + step / 2, step))


# ---------------------------------------------------------------------------
# config -> domain objects


def build_scenario(cfg: RunConfig) -> ScenarioSpec:
    sc = cfg.scenario
    pilots = None
    if sc.pilots is not None:
        pilots = np.array([parse_complex(p) for p in sc.pilots])
    config = PilotConfig(n_subcarriers=sc.n_subcarriers,
                         subcarrier_spacing_hz=sc.subcarrier_spacing_hz,
                         n_cp=sc.n_cp, power_budget=sc.power_budget,
                         pilots=pilots)
    noise = NoiseModel(sigma=sc.sigma, seed=sc.seed)
    return ScenarioSpec(config=config, noise=noise,
                        path_delay_m=sc.path_delay_m,
                        snr_grid_db=parse_snr_spec(sc.snr_db),
                        epsilon_list=tuple(sc.epsilon_list),
                        metric_list=tuple(sc.metric_list),
                        trials=sc.trials,
                        profile_window_m=tuple(sc.profile_window_m),
                        mml_oversample=cfg.mml.oversample,
                        n_bootstrap=cfg.mml.n_bootstrap)


def build_optimizer_options(cfg: RunConfig,
                            epsilon: float | None = None) -> OptimizerOptions:
    op = cfg.optimizer
    return OptimizerOptions(epsilon=op.epsilon if epsilon is None else epsilon,
                            outer_tol=op.outer_tol,
                            outer_max_iters=op.outer_max_iters,
                            inner_tol=op.inner_tol,
                            inner_max_iters=op.inner_max_iters,
                            lambda_tol=op.lambda_tol, real_z=op.real_z,
                            taustar_refresh=op.refresh_taustar)


def build_region(cfg: RunConfig, config: PilotConfig) -> SidelobeRegion:
    rg = cfg.region
    region = default_sidelobe_region(
        config, tau_max_s=None if rg.tau_max_m is None
        else meters_to_seconds(rg.tau_max_m))
    if rg.tau_null_m is not None:
        region = SidelobeRegion(tau_null_s=meters_to_seconds(rg.tau_null_m),
                                tau_max_s=region.tau_max_s)
    return region


# ---------------------------------------------------------------------------
# serialization


def _fmt(value) -> str:
    if value is None:
        return ""
    return format(float(value), ".9g")


def _write_csv(path: str, header: list[str], rows: list[list]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _write_json_rows(path: str, header: list[str], rows: list[list]) -> None:
    payload = [dict(zip(header, row)) for row in rows]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def _emit(cfg: RunConfig, path: str, header: list[str], rows: list[list]) -> None:
    fmt = cfg.output.format
    if fmt == "csv":
        _write_csv(path, header, rows)
    elif fmt == "json":
        _write_json_rows(path, header, rows)
    else:
        raise ValueError(f"unknown output format {fmt!r}")


def _record_sort_key(rec: SweepRecord):
    return (rec.metric, rec.epsilon, rec.value_kind, rec.snr_db)


# ---------------------------------------------------------------------------
# commands


def _designed_z(cfg: RunConfig, spec: ScenarioSpec):
    op = cfg.optimizer
    if op.epsilon < 0:
        raise ValueError("epsilon must be non-negative")
    if op.epsilon > 0:
        opts = build_optimizer_options(cfg)
        region = build_region(cfg, spec.config)
        report, _ = optimize_metric(op.metric, spec.config, opts, region=region)
        return report.z_opt, op.metric
    return np.ones(spec.config.n_subcarriers, dtype=complex), "none"


def cmd_optimize(cfg: RunConfig, args) -> None:
    if cfg.optimizer.epsilon <= 0:
        raise ValueError("epsilon must be positive")
    spec = build_scenario(cfg)
    opts = build_optimizer_options(cfg)
    region = build_region(cfg, spec.config)
    report, q = optimize_metric(cfg.optimizer.metric, spec.config, opts,
                                region=region)
    payload = {
        "schema_version": REPORT_SCHEMA_VERSION,
        "metric": MetricKind(cfg.optimizer.metric).value,
        "epsilon": cfg.optimizer.epsilon,
        "n_subcarriers": spec.config.n_subcarriers,
        "subcarrier_spacing_hz": spec.config.subcarrier_spacing_hz,
        "power_budget": spec.config.power_budget,
        "z_re": list(report.z_opt.real),
        "z_im": list(report.z_opt.imag),
        "beta_trajectory": list(report.beta_trajectory),
        "final_ratio": report.final_ratio,
        "outer_iters": report.outer_iters,
        "total_inner_iters": report.total_inner_iters,
        "power_residual": report.power_residual,
        "proximity_residual": report.proximity_residual,
        "lambda_final": report.lambda_final,
        "tau_star_s": q.tau_star_s,
        "region": {"tau_null_s": q.region.tau_null_s,
                   "tau_max_s": q.region.tau_max_s},
        "real_z": cfg.optimizer.real_z,
    }
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def cmd_range_profile(cfg: RunConfig, args) -> None:
    spec = build_scenario(cfg)
    z, _ = _designed_z(cfg, spec)
    delays_m, power_db = range_profile(z, spec, n_points=args.points)
    rows = [[_fmt(d), _fmt(p)] for d, p in zip(delays_m, power_db)]
    _emit(cfg, args.out, ["delay_m", "power_db"], rows)


def cmd_rmse_sweep(cfg: RunConfig, args) -> None:
    spec = build_scenario(cfg)
    z, label = _designed_z(cfg, spec)
    records = sorted(rmse_sweep(spec, z, metric=label,
                                epsilon=cfg.optimizer.epsilon),
                     key=_record_sort_key)
    rows = [[r.metric, _fmt(r.epsilon), _fmt(r.snr_db), _fmt(r.value),
             str(r.trials_used), _fmt(r.ci_lo_m), _fmt(r.ci_hi_m)]
            for r in records]
    _emit(cfg, args.out,
          ["metric", "epsilon", "snr_db", "rmse_m", "trials", "ci_lo_m", "ci_hi_m"],
          rows)


def cmd_capacity_sweep(cfg: RunConfig, args) -> None:
    spec = build_scenario(cfg)
    z, label = _designed_z(cfg, spec)
    records = sorted(capacity_sweep(spec, z, metric=label,
                                    epsilon=cfg.optimizer.epsilon),
                     key=_record_sort_key)
    rows = [[r.metric, _fmt(r.epsilon), _fmt(r.snr_db), _fmt(r.value)]
            for r in records]
    _emit(cfg, args.out,
          ["metric", "epsilon", "snr_db", "capacity_nats_per_sc"], rows)


def cmd_tradeoff(cfg: RunConfig, args) -> None:
    spec = build_scenario(cfg)
    positive = [e for e in spec.epsilon_list if e > 0]
    # per-cell epsilon is substituted in by the harness; the base options
    # only carry the tolerances
    opts = build_optimizer_options(cfg, epsilon=positive[0]) if positive else None
    records = sorted(tradeoff_sweep(spec, opts), key=_record_sort_key)
    rows = [[r.metric, _fmt(r.epsilon), _fmt(r.snr_db), r.value_kind,
             _fmt(r.value), str(r.trials_used), _fmt(r.ci_lo_m), _fmt(r.ci_hi_m)]
            for r in records]
    _emit(cfg, args.out,
          ["metric", "epsilon", "snr_db", "value_kind", "value", "trials",
           "ci_lo_m", "ci_hi_m"],
          rows)


# ---------------------------------------------------------------------------
# argument wiring


def _apply_overrides(cfg: RunConfig, args) -> None:
    if getattr(args, "seed", None) is not None:
        cfg.scenario.seed = args.seed
    if getattr(args, "trials", None) is not None:
        cfg.scenario.trials = args.trials
    if getattr(args, "snr", None) is not None:
        cfg.scenario.snr_db = args.snr
    if getattr(args, "metric", None) is not None:
        cfg.optimizer.metric = args.metric
    if getattr(args, "epsilon", None) is not None:
        cfg.optimizer.epsilon = args.epsilon
    if getattr(args, "real_z", False):
        cfg.optimizer.real_z = True
    if getattr(args, "refresh_taustar", None) is not None:
        cfg.optimizer.refresh_taustar = args.refresh_taustar
    if getattr(args, "format", None) is not None:
        cfg.output.format = args.format


def _add_common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file (defaults: reference scenario)")
    p.add_argument("--out", required=True, help="output path")
    p.add_argument("--seed", type=int, help="noise/bootstrap seed")
    p.add_argument("--metric", choices=["slpr", "isl"], help="sidelobe metric")
    p.add_argument("--epsilon", type=float, help="proximity radius (0 = undistorted)")
    p.add_argument("--real-z", dest="real_z", action="store_true", default=False,
                   help="restrict the distortion to real values")
    p.add_argument("--refresh-taustar", dest="refresh_taustar", type=int,
                   help="SLPR sidelobe re-location rounds (0-3)")
    p.add_argument("--format", choices=["csv", "json"], help="sweep output format")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pilotveil",
        description="Design and evaluate ToA-obfuscating OFDM pilot distortions.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("optimize", help="run the distortion optimizer")
    _add_common_flags(p)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("range-profile", help="delay profile of a distortion")
    _add_common_flags(p)
    p.add_argument("--points", type=int, default=2048, help="profile samples")
    p.set_defaults(func=cmd_range_profile)

    p = sub.add_parser("rmse-sweep", help="MML range RMSE versus SNR")
    _add_common_flags(p)
    p.add_argument("--snr", help="SNR grid as lo:step:hi (dB)")
    p.add_argument("--trials", type=int, help="Monte Carlo trials per SNR")
    p.set_defaults(func=cmd_rmse_sweep)

    p = sub.add_parser("capacity-sweep", help="capacity bound versus SNR")
    _add_common_flags(p)
    p.add_argument("--snr", help="SNR grid as lo:step:hi (dB)")
    p.set_defaults(func=cmd_capacity_sweep)

    p = sub.add_parser("tradeoff", help="capacity and RMSE over all (metric, eps)")
    _add_common_flags(p)
    p.add_argument("--snr", help="SNR grid as lo:step:hi (dB)")
    p.add_argument("--trials", type=int, help="Monte Carlo trials per SNR")
    p.set_defaults(func=cmd_tradeoff)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig.from_file(args.config) if args.config else RunConfig()
        _apply_overrides(cfg, args)
        args.func(cfg, args)
    except SolverConsistencyError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 3
    except (ValueError, KeyError, TypeError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
