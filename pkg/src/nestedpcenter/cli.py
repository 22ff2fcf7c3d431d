"""Command-line front end: preprocessing, exact solves, model export, oracle
checks and batch runs with paper-table-shaped CSV output."""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence

from .bounds import build_bounds
from .instances import Instance, Schedule, load_instance
from .milp import FORMULATIONS, ModelSpec, emit_model
from .oracle import enumerate_nested
from .pcenter import solve_pcenter_sequence
from .solver import SolveOptions, SolveReport, solve_absolute, solve_relative

CSV_HEADER = ["id", "|V|", "p", "t_s", "UB", "gap_pct", "nodes", "status", "rc", "ri"]
TIME_LIMIT_ENV = "NESTEDPC_TIME_LIMIT"


@dataclass
class RunConfig:
    instance_path: str
    format: str  # "pmed" | "tsplib"
    schedule_spec: str = "file+2"
    objective: str = "absolute"  # "absolute" | "relative"
    setting: str = "PH"  # "B" | "P" | "PH"
    time_limit_s: Optional[float] = None
    constrained_depth: int = 3
    csv_path: Optional[str] = None
    json_path: Optional[str] = None

    @staticmethod
    def from_dict(raw: dict) -> "RunConfig":
        known = {f for f in RunConfig.__dataclass_fields__}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return RunConfig(**raw)


def _default_time_limit() -> float:
    raw = os.environ.get(TIME_LIMIT_ENV)
    return float(raw) if raw else 3600.0


def _schedule_for(config: RunConfig, p_file: Optional[int]) -> Schedule:
    if config.schedule_spec == "file+2" and config.format != "pmed":
        raise ValueError("'file+2' schedules are only defined for pmed instances")
    return Schedule.from_spec(config.schedule_spec, p_file)


def _format_ub(report: SolveReport, objective: str) -> str:
    if report.chain is None:
        return ""
    if objective == "absolute":
        return str(int(report.objective))
    return f"{report.objective:.2f}"


def _row_for(inst: Instance, schedule: Schedule, config: RunConfig, report: SolveReport) -> List[str]:
    return [
        inst.name,
        str(inst.n),
        "-".join(str(q) for q in schedule.p),
        f"{report.time_s:.2f}",
        _format_ub(report, config.objective),
        f"{report.gap_percent:.2f}",
        str(report.nodes),
        report.status,
        "" if report.rc is None else f"{report.rc:.4f}",
        "" if report.ri is None else f"{report.ri:.4f}",
    ]


def _error_row(config: RunConfig, message: str) -> List[str]:
    name = os.path.basename(config.instance_path).rsplit(".", 1)[0]
    return [name, "", config.schedule_spec, "", "", "", "", f"error: {message}", "", ""]


def _write_csv(path: Optional[str], rows: Sequence[Sequence[str]]) -> None:
    out = open(path, "w", newline="") if path else sys.stdout
    try:
        writer = csv.writer(out)
        writer.writerow(CSV_HEADER)
        writer.writerows(rows)
    finally:
        if path:
            out.close()


def _json_report(inst: Instance, schedule: Schedule, config: RunConfig, report: SolveReport) -> dict:
    doc = {
        "instance": inst.name,
        "n": inst.n,
        "schedule": list(schedule.p),
        "objective_kind": config.objective,
        "setting": config.setting,
        "objective": report.objective,
        "dual_bound": report.dual_bound,
        "gap_percent": report.gap_percent,
        "nodes": report.nodes,
        "expanded": report.expanded,
        "time_s": report.time_s,
        "status": report.status,
        "rc": report.rc,
        "ri": report.ri,
        "d_star": list(report.d_star) if report.d_star else None,
    }
    if report.chain is not None:
        doc["chain"] = [list(s) for s in report.chain.sets]
        doc["radii"] = list(report.chain.radii)
        if report.d_star:
            doc["abs_regrets"] = [
                r - d for r, d in zip(report.chain.radii, report.d_star)
            ]
    return doc


def run_solve(config: RunConfig) -> int:
    """Full pipeline for one instance; returns the process exit code."""
    try:
        inst, p_file = load_instance(config.instance_path, config.format)
        schedule = _schedule_for(config, p_file)
        limit = config.time_limit_s if config.time_limit_s is not None else _default_time_limit()
        opts = SolveOptions(
            setting=config.setting,
            time_limit_s=limit,
            constrained_depth=config.constrained_depth,
        )
        solve = solve_absolute if config.objective == "absolute" else solve_relative
        report = solve(inst, schedule, opts)
    except Exception as exc:  # pragma: no cover - exercised via CLI tests
        print(f"error: {exc}", file=sys.stderr)
        return 1
    _write_csv(config.csv_path, [_row_for(inst, schedule, config, report)])
    if config.json_path:
        with open(config.json_path, "w") as fh:
            json.dump(_json_report(inst, schedule, config, report), fh, indent=2)
            fh.write("\n")
    return 0 if report.status == "optimal" else 2


def run_batch(manifest_path: str, csv_path: Optional[str]) -> int:
    """Run every config in the manifest; failures become error rows."""
    with open(manifest_path) as fh:
        raw = json.load(fh)
    if not isinstance(raw, list):
        raise ValueError("manifest must be a JSON list of run configs")
    rows: List[List[str]] = []
    worst = 0
    for entry in raw:
        config = RunConfig.from_dict(entry)
        try:
            inst, p_file = load_instance(config.instance_path, config.format)
            schedule = _schedule_for(config, p_file)
            limit = (
                config.time_limit_s
                if config.time_limit_s is not None
                else _default_time_limit()
            )
            opts = SolveOptions(
                setting=config.setting,
                time_limit_s=limit,
                constrained_depth=config.constrained_depth,
            )
            solve = solve_absolute if config.objective == "absolute" else solve_relative
            report = solve(inst, schedule, opts)
            rows.append(_row_for(inst, schedule, config, report))
            worst = max(worst, 0 if report.status == "optimal" else 2)
        except Exception as exc:
            rows.append(_error_row(config, str(exc)))
    _write_csv(csv_path, rows)
    return worst


def run_export(
    config: RunConfig,
    formulation: str,
    lift: bool,
    fix: bool,
    out_dir: str,
) -> int:
    try:
        inst, p_file = load_instance(config.instance_path, config.format)
        schedule = _schedule_for(config, p_file)
        bounds = None
        if lift or fix or formulation in ("R1", "R2"):
            bounds = build_bounds(inst, schedule)
        spec = ModelSpec(formulation=formulation, lift=lift, fix=fix, bounds=bounds)
        doc, text = emit_model(inst, schedule, spec)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, doc.name + ".lp")
    with open(path, "w") as fh:
        fh.write(text)
    print(f"{path}: {len(doc.variables)} variables, {len(doc.constraints)} constraints")
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="nestedpcenter",
        description="Exact solvers for nested p-center problems with regret objectives",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_instance_args(p):
        p.add_argument("instance", help="instance file path")
        p.add_argument("--format", choices=["pmed", "tsplib"], required=True)
        p.add_argument(
            "--schedule",
            default="file+2",
            help="comma-separated facility counts, or 'file+2' for pmed",
        )

    p_solve = sub.add_parser("solve", help="exact nested solve")
    add_instance_args(p_solve)
    p_solve.add_argument("--objective", choices=["absolute", "relative"], default="absolute")
    p_solve.add_argument("--setting", choices=["B", "P", "PH"], default="PH")
    p_solve.add_argument("--time-limit", type=float, default=None)
    p_solve.add_argument("--constrained-depth", type=int, default=3)
    p_solve.add_argument("--csv", default=None, help="write the CSV row here instead of stdout")
    p_solve.add_argument("--json", default=None, help="write a full JSON report here")

    p_pc = sub.add_parser("pcenter", help="per-period p-center preprocessing")
    add_instance_args(p_pc)

    p_exp = sub.add_parser("export", help="write an LP model file")
    add_instance_args(p_exp)
    p_exp.add_argument("--formulation", choices=list(FORMULATIONS), required=True)
    p_exp.add_argument("--lift", action="store_true")
    p_exp.add_argument("--fix", action="store_true")
    p_exp.add_argument("--out-dir", default=".")

    p_or = sub.add_parser("oracle", help="exhaustive check on tiny instances")
    add_instance_args(p_or)

    p_batch = sub.add_parser("batch", help="run a JSON manifest of solves")
    p_batch.add_argument("manifest")
    p_batch.add_argument("--csv", default=None)

    args = parser.parse_args(argv)

    if args.command == "batch":
        try:
            return run_batch(args.manifest, args.csv)
        except Exception as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1

    config = RunConfig(
        instance_path=args.instance,
        format=args.format,
        schedule_spec=args.schedule,
    )

    if args.command == "solve":
        config.objective = args.objective
        config.setting = args.setting
        config.time_limit_s = args.time_limit
        config.constrained_depth = args.constrained_depth
        config.csv_path = args.csv
        config.json_path = args.json
        return run_solve(config)

    if args.command == "pcenter":
        try:
            inst, p_file = load_instance(config.instance_path, config.format)
            schedule = _schedule_for(config, p_file)
            seq = solve_pcenter_sequence(inst, schedule)
        except Exception as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
        for h, (d, witness) in enumerate(seq):
            print(f"p={schedule.p[h]}: optimum {d}, witness {sorted(witness)}")
        return 0

    if args.command == "export":
        return run_export(config, args.formulation, args.lift, args.fix, args.out_dir)

    if args.command == "oracle":
        try:
            inst, p_file = load_instance(config.instance_path, config.format)
            schedule = _schedule_for(config, p_file)
            result = enumerate_nested(inst, schedule)
        except Exception as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
        rel = "undefined" if result.optimum_rel is None else f"{float(result.optimum_rel):.4f}"
        print(
            f"chains: {result.chain_count}, optimum_abs: {result.optimum_abs}, "
            f"optimum_rel: {rel}, optimal_chains_abs: {len(result.all_optimal_chains_abs)}"
        )
        return 0

    parser.error(f"unknown command {args.command!r}")
    return 1


if __name__ == "__main__":
    sys.exit(main())
