"""Command-line front-end: validation, runs, sweeps, layer analysis, costs.

Exit codes: 0 success, 1 validation failure, 2 unreadable or malformed
input, 3 simulation error (deadlock).  All outputs are deterministic and no
files are written on failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, replace
from pathlib import Path

from . import cost as costmod
from .config import (
    ConfigError,
    HierarchyConfig,
    RuntimeInputs,
    config_from_dict,
    load_json,
    plan_runtime,
    runtime_from_dict,
    validate_config,
    validate_runtime,
)
from .loopnest import LayerError, analyze, best_unrolling, input_trace, load_network, weight_trace
from .patterns import UNCLASSIFIED
from .sim import DeadlockError, SimInitError, init_sim, preload, run


EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2
EXIT_SIM = 3


@dataclass(frozen=True)
class PatternSettings:
    start_address: int = 0
    cycle_length: int = 1
    inter_cycle_shift: int = 0
    skip_shift: int = 0
    shift_select: int = 0

    def runtime(self, config: HierarchyConfig) -> RuntimeInputs:
        return plan_runtime(
            config,
            self.start_address,
            self.cycle_length,
            self.inter_cycle_shift,
            self.skip_shift,
            shift_select=self.shift_select,
        )


@dataclass(frozen=True)
class ExperimentVariant:
    name: str
    config: HierarchyConfig
    pattern: PatternSettings
    preload_budget: int
    values: tuple[int, ...]


@dataclass(frozen=True)
class ExperimentSpec:
    name: str
    parameter: str
    outputs: int
    variants: tuple[ExperimentVariant, ...]


_PATTERN_KEYS = {"start_address", "cycle_length", "inter_cycle_shift", "skip_shift", "shift_select"}
_SWEEPABLE = {"cycle_length", "inter_cycle_shift", "skip_shift", "start_address"}


def _pattern_from_dict(data: dict, base: PatternSettings | None = None) -> PatternSettings:
    if not isinstance(data, dict):
        raise ConfigError("pattern: expected a JSON object")
    unknown = set(data) - _PATTERN_KEYS
    if unknown:
        raise ConfigError(f"pattern: unknown fields {sorted(unknown)}")
    merged = base or PatternSettings()
    return replace(merged, **{k: int(v) for k, v in data.items()})


def experiment_from_dict(data: dict, base_dir: Path) -> ExperimentSpec:
    if not isinstance(data, dict):
        raise ConfigError("experiment: expected a JSON object")
    allowed = {"name", "config", "pattern", "outputs", "preload", "sweep", "variants"}
    unknown = set(data) - allowed
    if unknown:
        raise ConfigError(f"experiment: unknown fields {sorted(unknown)}")
    for key in ("sweep", "outputs"):
        if key not in data:
            raise ConfigError(f"experiment: missing field {key!r}")
    sweep = data["sweep"]
    if not isinstance(sweep, dict) or set(sweep) - {"parameter", "values"}:
        raise ConfigError("experiment: sweep needs 'parameter' and 'values'")
    parameter = sweep["parameter"]
    if parameter not in _SWEEPABLE:
        raise ConfigError(f"experiment: cannot sweep {parameter!r}")
    base_values = tuple(int(v) for v in sweep.get("values", ()))

    def resolve_config(spec) -> HierarchyConfig | None:
        if spec is None:
            return None
        if isinstance(spec, str):
            return config_from_dict(load_json(base_dir / spec))
        return config_from_dict(spec)

    base_config = resolve_config(data.get("config"))
    base_pattern = _pattern_from_dict(data.get("pattern", {}))
    base_preload = int(data.get("preload", 0))

    variants = []
    raw_variants = data.get("variants") or [{"name": "default"}]
    for i, rv in enumerate(raw_variants):
        if not isinstance(rv, dict):
            raise ConfigError(f"variants[{i}]: expected a JSON object")
        unknown = set(rv) - {"name", "config", "pattern", "preload", "values"}
        if unknown:
            raise ConfigError(f"variants[{i}]: unknown fields {sorted(unknown)}")
        cfg = resolve_config(rv.get("config")) or base_config
        if cfg is None:
            raise ConfigError(f"variants[{i}]: no config given here or at the top level")
        pattern = _pattern_from_dict(rv.get("pattern", {}), base_pattern)
        values = tuple(int(v) for v in rv.get("values", base_values))
        if not values:
            raise ConfigError(f"variants[{i}]: no sweep values")
        variants.append(
            ExperimentVariant(
                name=str(rv.get("name", f"variant{i}")),
                config=cfg,
                pattern=pattern,
                preload_budget=int(rv.get("preload", base_preload)),
                values=values,
            )
        )
    return ExperimentSpec(
        name=str(data.get("name", "experiment")),
        parameter=parameter,
        outputs=int(data["outputs"]),
        variants=tuple(variants),
    )


def load_experiment(path: str | Path) -> ExperimentSpec:
    p = Path(path)
    return experiment_from_dict(load_json(p), p.parent)


def run_sweep_point(variant: ExperimentVariant, parameter: str, value: int, n_outputs: int):
    pattern = replace(variant.pattern, **{parameter: value})
    runtime = pattern.runtime(variant.config)
    state = init_sim(variant.config, runtime)
    if variant.preload_budget:
        preload(state, variant.preload_budget)
    return run(state, n_outputs=n_outputs)


# --- commands ---------------------------------------------------------------


def cmd_validate(args) -> int:
    try:
        config = config_from_dict(load_json(args.config))
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    violations = validate_config(config)
    for v in violations:
        print(v)
    if violations:
        return EXIT_VALIDATION
    print("ok")
    return EXIT_OK


def _events_csv(events) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["cycle", "event_kind", "level", "address", "value"])
    for cycle, kind, level, address, value in events:
        w.writerow([cycle, kind, level, address, value])
    return out.getvalue()


def cmd_run(args) -> int:
    try:
        config = config_from_dict(load_json(args.config))
        runtime = runtime_from_dict(load_json(args.runtime))
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    table = None
    try:
        if args.cost_table:
            table = costmod.load_cost_table(args.cost_table)
    except costmod.CostError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    try:
        state = init_sim(config, runtime, record_events=True)
    except SimInitError as e:
        for v in e.violations:
            print(v, file=sys.stderr)
        return EXIT_VALIDATION
    try:
        if args.preload:
            preload(state, args.preload)
        report = run(state, n_outputs=args.outputs)
    except DeadlockError as e:
        print(f"simulation deadlock: {e}", file=sys.stderr)
        return EXIT_SIM
    summary = report.summary_dict()
    summary["seed"] = args.seed
    summary["preload_budget"] = args.preload
    if table is not None:
        try:
            summary["cost"] = costmod.run_power(config, report, table, args.clock_hz).summary_dict()
        except costmod.CostError as e:
            print(f"error: {e}", file=sys.stderr)
            return EXIT_IO
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "events.csv").write_text(_events_csv(state.events))
    (out_dir / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    print(json.dumps(summary, indent=2, sort_keys=True))
    return EXIT_OK


def cmd_sweep(args) -> int:
    try:
        experiment = load_experiment(args.experiment)
        table = costmod.load_cost_table(args.cost_table) if args.cost_table else None
    except (ConfigError, costmod.CostError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    rows = []
    for variant in experiment.variants:
        bad = validate_config(variant.config)
        if bad:
            print(f"error: variant {variant.name}: {'; '.join(bad)}", file=sys.stderr)
            return EXIT_VALIDATION
        for value in variant.values:
            try:
                report = run_sweep_point(variant, experiment.parameter, value, experiment.outputs)
            except SimInitError as e:
                print(
                    f"error: variant {variant.name} {experiment.parameter}={value}: {e}",
                    file=sys.stderr,
                )
                return EXIT_VALIDATION
            except DeadlockError as e:
                print(
                    f"simulation deadlock: variant {variant.name}"
                    f" {experiment.parameter}={value}: {e}",
                    file=sys.stderr,
                )
                return EXIT_SIM
            row = {
                "experiment": experiment.name,
                "variant": variant.name,
                "parameter": experiment.parameter,
                "value": value,
                "outputs": len(report.outputs),
                "total_cycles": report.total_internal_cycles,
                "offchip_requests": len(report.offchip_requests),
            }
            if table is not None:
                c = costmod.run_power(variant.config, report, table, args.clock_hz)
                row["area_um2"] = c.total_area_um2
                row["static_power_mw"] = round(c.static_power_mw, 9)
                row["dynamic_energy_nj"] = round(c.dynamic_energy_nj, 6)
                row["average_power_mw"] = round(c.average_power_mw, 9)
            rows.append(row)
    fields = list(rows[0].keys())
    out = io.StringIO()
    w = csv.DictWriter(out, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    if args.out:
        Path(args.out).write_text(out.getvalue())
    else:
        sys.stdout.write(out.getvalue())
    return EXIT_OK


def cmd_analyze(args) -> int:
    try:
        layers = load_network(args.network)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    rows = []
    for idx, layer in enumerate(layers):
        u = best_unrolling(layer, args.pe)
        try:
            trace = weight_trace(layer, u) if args.dataset == "weights" else input_trace(layer, u)
        except LayerError as e:
            print(f"error: layer {idx}: {e}", file=sys.stderr)
            return EXIT_VALIDATION
        a = analyze(trace, layer.word_width)
        pattern = a.pattern
        rows.append(
            {
                "layer": idx,
                "type": layer.layer_type.value,
                "unrolling": "x".join(str(d) for d in u.degrees),
                "unique_addresses": a.unique_addresses,
                "cycle_length": a.cycle_length,
                "words_per_step": a.words_per_step,
                "required_port_width": a.required_port_width,
                "pattern": "unclassified" if pattern is UNCLASSIFIED else pattern.kind.value,
            }
        )
    out = io.StringIO()
    w = csv.DictWriter(out, fieldnames=list(rows[0].keys()), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    if args.out:
        Path(args.out).write_text(out.getvalue())
    else:
        sys.stdout.write(out.getvalue())
    return EXIT_OK


def cmd_cost(args) -> int:
    try:
        config = config_from_dict(load_json(args.config))
        table = (
            costmod.load_cost_table(args.cost_table)
            if args.cost_table
            else costmod.default_cost_table()
        )
    except (ConfigError, costmod.CostError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    violations = validate_config(config)
    if violations:
        for v in violations:
            print(v, file=sys.stderr)
        return EXIT_VALIDATION
    try:
        result = {
            "total_area_um2": costmod.config_area(config, table),
            "static_power_mw": round(costmod.config_static_power(config, table), 9),
        }
        if args.run_summary:
            summary = load_json(args.run_summary)
            report = _report_from_summary(summary)
            result = costmod.run_power(config, report, table, args.clock_hz).summary_dict()
    except (costmod.CostError, ConfigError, KeyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    print(json.dumps(result, indent=2, sort_keys=True))
    return EXIT_OK


def _report_from_summary(summary: dict):
    from .sim import SimReport

    return SimReport(
        total_internal_cycles=int(summary["total_cycles"]),
        outputs=((0,),) * int(summary["outputs"]),
        level_reads=tuple(summary["level_reads"]),
        level_writes=tuple(summary["level_writes"]),
        offchip_requests=(),
        stalls_by_cause={},
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="memhier",
        description="Simulate and explore pattern-driven accelerator memory hierarchies.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a hierarchy configuration file")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("run", help="run one simulation and write events + summary")
    p.add_argument("--config", required=True)
    p.add_argument("--runtime", required=True)
    p.add_argument("--outputs", type=int, required=True)
    p.add_argument("--preload", type=int, default=0)
    p.add_argument("--cost-table", default=None)
    p.add_argument("--clock-hz", type=float, default=250e3)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="run an experiment file and emit a CSV")
    p.add_argument("--experiment", required=True)
    p.add_argument("--cost-table", default=None)
    p.add_argument("--clock-hz", type=float, default=250e3)
    p.add_argument("--out", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("analyze", help="per-layer access analysis for a network file")
    p.add_argument("--network", required=True)
    p.add_argument("--pe", type=int, default=64)
    p.add_argument("--dataset", choices=["weights", "inputs"], default="weights")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("cost", help="area/power estimate for a configuration")
    p.add_argument("--config", required=True)
    p.add_argument("--cost-table", default=None)
    p.add_argument("--run-summary", default=None)
    p.add_argument("--clock-hz", type=float, default=250e3)
    p.set_defaults(func=cmd_cost)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


def entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
