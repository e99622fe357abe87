"""Command line interface tying the virtual bench to the analysis pipeline.

Subcommands: simulate-static, simulate-dynamic, analyze, fit-weibull,
degradation, report.  Exit codes: 0 success, 2 usage/config/data error,
3 I/O error.  Simulation commands require a seed; reruns with identical
inputs produce byte-identical outputs.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    DegradationReport,
    FleetSummary,
    degradation_report,
    fleet_summary,
    overload_factors,
)
from .bench import (
    DynamicProtocol,
    FleetParams,
    RigConfig,
    StaticProtocol,
    run_dynamic,
    run_fleet,
    sample_specimen,
)
from .errors import ForceBenchError
from .fileio import (
    config_hash,
    read_cycle_log_csv,
    read_force_column_csv,
    read_load_curve_csv,
    write_cycle_log_csv,
    write_json,
    write_load_curve_csv,
)
from .sensor import SensorSpec
from .weibull import WeibullFit, fit_weibull, invert_failure_probability

CONFIG_DEFAULTS = {
    "seed": None,
    "side": "front",
    "fleet": 20,
    "dz_max_um": 200.0,
    "step_um": 0.5,
    "v_ges": 1.0,
    "f_min_n": 0.01,
    "f_max_n": 0.5,
    "frequency_hz": 2.0,
    "n_cycles": 50_000,
    "record_interval": 500,
    "drift_mv": 0.0,
    "drop_fraction": 0.10,
    "drop_floor_n": 0.05,
    "sigma_multiple": 3.0,
    "f0_front_n": 1.22,
    "beta_front": 10.69,
    "f0_back_n": 0.77,
    "beta_back": 7.21,
}


class ConfigError(ForceBenchError):
    pass


def load_config(args: argparse.Namespace) -> dict:
    """Merge defaults, an optional config file and flags; flags win."""
    config = dict(CONFIG_DEFAULTS)
    if getattr(args, "config", None):
        path = Path(args.config)
        try:
            loaded = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
        unknown = set(loaded) - set(config)
        if unknown:
            raise ConfigError(f"{path}: unknown config keys: {sorted(unknown)}")
        config.update(loaded)
    for flag, key in [
        ("seed", "seed"),
        ("side", "side"),
        ("fleet", "fleet"),
        ("drift", "drift_mv"),
        ("cycles", "n_cycles"),
    ]:
        value = getattr(args, flag, None)
        if value is not None:
            config[key] = value
    return config


def require_seed(config: dict) -> int:
    if config["seed"] is None:
        raise ConfigError("a seed is required (--seed or config file)")
    return int(config["seed"])


def _fleet_params(config: dict, seed: int) -> FleetParams:
    return FleetParams(
        f0_front_n=config["f0_front_n"],
        beta_front=config["beta_front"],
        f0_back_n=config["f0_back_n"],
        beta_back=config["beta_back"],
        count=int(config["fleet"]),
        master_seed=seed,
    )


def _static_protocol(config: dict) -> StaticProtocol:
    return StaticProtocol(
        side=config["side"],
        dz_max_um=float(config["dz_max_um"]),
        step_um=float(config["step_um"]),
        v_ges=float(config["v_ges"]),
    )


def _dynamic_protocol(config: dict) -> DynamicProtocol:
    return DynamicProtocol(
        side=config["side"],
        f_min_n=float(config["f_min_n"]),
        f_max_n=float(config["f_max_n"]),
        frequency_hz=float(config["frequency_hz"]),
        n_cycles=int(config["n_cycles"]),
        record_interval=int(config["record_interval"]),
        v_ges=float(config["v_ges"]),
        drift_mv=float(config["drift_mv"]),
    )


def _out_dir(args: argparse.Namespace) -> Path:
    if not getattr(args, "out", None):
        raise ConfigError("an output directory is required (--out)")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _fit_payload(fit: WeibullFit | None) -> dict | None:
    if fit is None:
        return None
    r = None if np.isnan(fit.r) else fit.r
    return {"f0_n": fit.f0, "beta": fit.beta, "r": r}


def _summary_payload(summary: FleetSummary) -> dict:
    return {
        "side": summary.side,
        "n_curves": summary.n_curves,
        "fracture_force_mean_n": summary.fracture_force_mean_n,
        "fracture_force_std_n": summary.fracture_force_std_n,
        "fracture_dz_mean_um": summary.fracture_dz_mean_um,
        "fracture_dz_std_um": summary.fracture_dz_std_um,
        "hinge_counts": dict(summary.hinge_counts),
        "weibull": _fit_payload(summary.fit),
        "budget": [
            {
                "probability_ppm": row["probability_ppm"],
                "f_max_N": row["f_max_n"],
                "dz_max_um": row["dz_max_um"],
            }
            for row in summary.budget
        ],
    }


def _degradation_payload(report: DegradationReport) -> dict:
    return {
        "total_cycles": report.total_cycles,
        "sigma_multiple": report.sigma_multiple,
        "verdict": report.verdict,
        "channels": {
            name: {
                "mean": stats.mean,
                "std": stats.std,
                "rel_std_pct": stats.rel_std_pct,
                "slope_per_cycle": stats.slope_per_cycle,
            }
            for name, stats in report.channels.items()
        },
    }


def _print_summary_table(summary: FleetSummary) -> None:
    print(f"Fleet of {summary.n_curves} specimens, {summary.side} loading")
    print(
        f"  fracture force [N]  : {summary.fracture_force_mean_n:.2f}"
        f" +- {summary.fracture_force_std_n:.2f}"
    )
    print(
        f"  fracture disp. [um] : {summary.fracture_dz_mean_um:.2f}"
        f" +- {summary.fracture_dz_std_um:.2f}"
    )
    print(f"  failed hinges       : {summary.hinge_counts}")
    if summary.fit is not None:
        print(
            f"  Weibull fit         : F0 = {summary.fit.f0:.2f} N,"
            f" beta = {summary.fit.beta:.2f}, R = {summary.fit.r:.4f}"
        )
        print("  probability [ppm]   F_max [N]   dz_max [um]")
        for row in summary.budget:
            print(
                f"  {row['probability_ppm']:>17.0f}   {row['f_max_n']:>9.2f}"
                f"   {row['dz_max_um']:>11.2f}"
            )


def _print_degradation_table(report: DegradationReport) -> None:
    print(f"Cycle log over {report.total_cycles} cycles: verdict {report.verdict}")
    print("  channel          mean        std   rel.std[%]")
    for name, stats in report.channels.items():
        print(
            f"  {name:<12} {stats.mean:>10.5f} {stats.std:>10.5f}"
            f" {stats.rel_std_pct:>11.4f}"
        )


def cmd_simulate_static(args: argparse.Namespace) -> int:
    config = load_config(args)
    seed = require_seed(config)
    out = _out_dir(args)
    protocol = _static_protocol(config)
    rig = RigConfig()
    params = _fleet_params(config, seed)
    curves = run_fleet(params, SensorSpec(), protocol, rig)
    files = []
    for i, curve in enumerate(curves):
        name = f"specimen_{i:03d}.csv"
        write_load_curve_csv(out / name, curve)
        files.append(name)
    manifest = {
        "kind": "static-fleet",
        "version": __version__,
        "seed": seed,
        "side": protocol.side,
        "fleet": params.count,
        "protocol": dataclasses.asdict(protocol),
        "rig": dataclasses.asdict(rig),
        "config_sha256": config_hash(config),
        "files": files,
    }
    write_json(out / "manifest.json", manifest)
    print(f"wrote {len(files)} curves and manifest.json to {out}")
    return 0


def cmd_simulate_dynamic(args: argparse.Namespace) -> int:
    config = load_config(args)
    seed = require_seed(config)
    out = _out_dir(args)
    protocol = _dynamic_protocol(config)
    rig = RigConfig()
    params = _fleet_params(config, seed)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    state = sample_specimen(params, protocol.side, rng)
    log = run_dynamic(state, SensorSpec(), protocol, rig, rng)
    write_cycle_log_csv(out / "cycles.csv", log)
    manifest = {
        "kind": "cycle-log",
        "version": __version__,
        "seed": seed,
        "side": protocol.side,
        "protocol": dataclasses.asdict(protocol),
        "rig": dataclasses.asdict(rig),
        "config_sha256": config_hash(config),
        "files": ["cycles.csv"],
    }
    write_json(out / "manifest.json", manifest)
    print(f"wrote cycles.csv ({len(log)} records) and manifest.json to {out}")
    return 0


def _collect_curve_paths(inputs: list[str]) -> tuple[list[Path], str | None]:
    """Expand files/directories; a manifest supplies file list and side."""
    paths: list[Path] = []
    side = None
    for item in inputs:
        p = Path(item)
        if p.is_dir():
            manifest = p / "manifest.json"
            if manifest.exists():
                meta = json.loads(manifest.read_text())
                side = meta.get("side", side)
                paths.extend(p / name for name in meta.get("files", []))
            else:
                paths.extend(sorted(p.glob("*.csv")))
        else:
            paths.append(p)
    return paths, side


def cmd_analyze(args: argparse.Namespace) -> int:
    config = load_config(args)
    paths, manifest_side = _collect_curve_paths(args.inputs)
    side = args.side or manifest_side or config["side"]
    curves = [read_load_curve_csv(p, side) for p in paths]
    if len(curves) < 3:
        raise ConfigError(f"need at least 3 curves to analyze, got {len(curves)}")
    spec = SensorSpec()
    summary = fleet_summary(
        curves,
        spec,
        drop_fraction=float(config["drop_fraction"]),
        drop_floor_n=float(config["drop_floor_n"]),
    )
    payload = _summary_payload(summary)
    if summary.fit is not None:
        disp_factor, force_factor = overload_factors(summary, spec)
        payload["overload"] = {
            "displacement_factor": disp_factor,
            "force_factor": force_factor,
        }
    _print_summary_table(summary)
    if getattr(args, "out", None):
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_json(out / "analysis.json", payload)
    else:
        print(json.dumps(payload, indent=2, sort_keys=True))
    return 0


def cmd_fit_weibull(args: argparse.Namespace) -> int:
    if args.params:
        try:
            f0, beta = (float(tok) for tok in args.params.split(","))
        except ValueError as exc:
            raise ConfigError("--params expects 'f0,beta'") from exc
        fit = WeibullFit(f0=f0, beta=beta)
    elif args.input:
        forces = read_force_column_csv(Path(args.input))
        if np.any(forces <= 0):
            raise ConfigError("fracture forces must be positive")
        fit = fit_weibull(forces)
    else:
        raise ConfigError("provide an input CSV or --params f0,beta")
    payload = {"fit": _fit_payload(fit)}
    if args.invert:
        try:
            probabilities = [float(tok) for tok in args.invert.split(",")]
        except ValueError as exc:
            raise ConfigError("--invert expects comma-separated probabilities") from exc
        payload["inversions"] = [
            {"probability": p, "f_max_N": invert_failure_probability(fit, p)}
            for p in probabilities
        ]
    print(json.dumps(payload, indent=2, sort_keys=True))
    return 0


def cmd_degradation(args: argparse.Namespace) -> int:
    config = load_config(args)
    log = read_cycle_log_csv(Path(args.input), v_ges=float(config["v_ges"]))
    report = degradation_report(log, sigma_multiple=float(config["sigma_multiple"]))
    payload = _degradation_payload(report)
    print(json.dumps(payload, indent=2, sort_keys=True))
    if getattr(args, "out", None):
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_json(out / "degradation.json", payload)
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    """End-to-end chain: fleets on both sides, cycling run, one report."""
    config = load_config(args)
    seed = require_seed(config)
    out = _out_dir(args)
    spec = SensorSpec()
    rig = RigConfig()
    sub_seeds = np.random.SeedSequence(seed).generate_state(3)
    sides_payload = {}
    for side, side_seed in zip(("front", "back"), sub_seeds[:2]):
        side_config = dict(config, side=side)
        params = _fleet_params(side_config, int(side_seed))
        protocol = _static_protocol(side_config)
        curves = run_fleet(params, spec, protocol, rig)
        summary = fleet_summary(
            curves,
            spec,
            drop_fraction=float(config["drop_fraction"]),
            drop_floor_n=float(config["drop_floor_n"]),
        )
        payload = _summary_payload(summary)
        if summary.fit is not None:
            disp_factor, force_factor = overload_factors(summary, spec)
            payload["overload"] = {
                "displacement_factor": disp_factor,
                "force_factor": force_factor,
            }
        sides_payload[side] = payload
        _print_summary_table(summary)
        print()
    dyn_rng = np.random.default_rng(np.random.SeedSequence(int(sub_seeds[2])))
    dyn_protocol = _dynamic_protocol(dict(config, side="front"))
    params = _fleet_params(config, seed)
    state = sample_specimen(params, "front", dyn_rng)
    log = run_dynamic(state, spec, dyn_protocol, rig, dyn_rng)
    degradation = degradation_report(log, sigma_multiple=float(config["sigma_multiple"]))
    _print_degradation_table(degradation)
    report = {
        "version": __version__,
        "seed": seed,
        "config_sha256": config_hash(config),
        "sides": sides_payload,
        "dynamic": _degradation_payload(degradation),
    }
    write_json(out / "report.json", report)
    print(f"\nwrote report.json to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="forcebench",
        description="Virtual electromechanical test bench for a three-axial "
        "silicon force sensor, with fracture statistics and degradation analysis.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser, seed: bool = False) -> None:
        p.add_argument("--config", help="JSON config file; flags override it")
        p.add_argument("--side", choices=("front", "back"), default=None)
        p.add_argument("--out", help="output directory")
        if seed:
            p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("simulate-static", help="destructive ramp on a seeded fleet")
    add_common(p, seed=True)
    p.add_argument("--fleet", type=int, default=None, help="number of specimens")

    p = sub.add_parser("simulate-dynamic", help="long-term cycling run")
    add_common(p, seed=True)
    p.add_argument("--cycles", type=int, default=None, help="total load cycles")
    p.add_argument("--drift", type=float, default=None, help="injected drift [mV] over the run")

    p = sub.add_parser("analyze", help="fleet statistics from load-curve CSVs")
    add_common(p)
    p.add_argument("inputs", nargs="+", help="curve CSVs, or a directory with a manifest")

    p = sub.add_parser("fit-weibull", help="fit fracture forces, optionally invert")
    p.add_argument("input", nargs="?", help="one-column CSV of fracture forces")
    p.add_argument("--params", help="skip fitting, use 'f0,beta'")
    p.add_argument("--invert", help="comma-separated probabilities to invert")

    p = sub.add_parser("degradation", help="degradation verdict from a cycle-log CSV")
    add_common(p)
    p.add_argument("input", help="cycle-log CSV")

    p = sub.add_parser("report", help="full simulate-and-analyze chain, both sides")
    add_common(p, seed=True)
    p.add_argument("--fleet", type=int, default=None)
    p.add_argument("--cycles", type=int, default=None)
    p.add_argument("--drift", type=float, default=None)

    return parser


COMMANDS = {
    "simulate-static": cmd_simulate_static,
    "simulate-dynamic": cmd_simulate_dynamic,
    "analyze": cmd_analyze,
    "fit-weibull": cmd_fit_weibull,
    "degradation": cmd_degradation,
    "report": cmd_report,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ForceBenchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
