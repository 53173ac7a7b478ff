"""Command line entry point: ``pmsched run`` and ``pmsched analyze``.

Exit codes: 0 success, 2 unreadable or unparsable scenario, 3 invalid
scenario, 4 graph too large for an exact computation.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from collections.abc import Iterator
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .engine import ReplicationReport, SimConfig, replicate
from .errors import ConfigError, SizeLimitError
from .graph import is_acyclic
from .priority import assign_priorities, minmax_objective, tree_priority
from .regions import (
    delta_sp,
    delta_sp_greedy,
    in_lambda_p,
    in_lambda_sp_oracle,
    in_lambda_wc,
    interference_degree,
)
from .scenarios import Scenario, SchedulerSpec, load_raw, parse_scenario

log = logging.getLogger("pmsched")

METRIC_COLUMNS = ["scenario", "sweep", "scheduler", "metric", "mean", "ci95", "runs"]
HISTORY_COLUMNS = ["scenario", "sweep", "scheduler", "run", "frame", "priority"]


@dataclass(frozen=True)
class MetricsRow:
    scenario: str
    sweep: str
    scheduler: str
    metric: str
    mean: float
    ci95: float
    runs: int

    def as_list(self) -> list[str]:
        return [self.scenario, self.sweep, self.scheduler, self.metric, fmt(self.mean), fmt(self.ci95), str(self.runs)]


def fmt(x: float) -> str:
    return f"{x:.12g}"


def _relabel(metric: str, scenario: Scenario) -> str:
    # engine metrics use 0-based ids in brackets
    if "[" in metric:
        head, idx = metric.rstrip("]").split("[")
        return f"{head}[{scenario.label(int(idx))}]"
    return metric


def replicate_scenario(scenario: Scenario, only: str | None = None) -> Iterator[tuple[str, SchedulerSpec, SimConfig, ReplicationReport]]:
    """Yield ``(sweep, scheduler spec, config, report)`` per sweep point and scheduler, in file order."""
    for value in scenario.sweep or [None]:
        for spec, cfg in scenario.sim_configs(value):
            if only is not None and only not in (spec.name, spec.kind):
                continue
            log.info("%s sweep=%s scheduler=%s", scenario.name, value, spec.name)
            yield (value if value is not None else ""), spec, cfg, replicate(cfg, scenario.runs)


def metric_rows(scenario: Scenario, sweep: str, spec: SchedulerSpec, report: ReplicationReport) -> list[MetricsRow]:
    return [
        MetricsRow(scenario.name, sweep, spec.name, _relabel(metric, scenario), s.mean, s.ci95, report.runs)
        for metric, s in report.metrics.items()
    ]


def history_rows(scenario: Scenario, sweep: str, spec: SchedulerSpec, report: ReplicationReport) -> list[list[str]]:
    return [
        [scenario.name, sweep, spec.name, str(run), str(frame), " ".join(map(str, p))]
        for run, res in enumerate(report.results)
        for frame, p in res.priority_history
    ]


def write_outputs(scenario: Scenario, out_dir: Path, rows: list[MetricsRow], history: list[list[str]]) -> list[Path]:
    """Write ``<name>_metrics.csv`` and, when there is online history, ``<name>_priorities.csv``."""
    out_dir.mkdir(parents=True, exist_ok=True)
    written = [out_dir / f"{scenario.name}_metrics.csv"]
    _write_csv(written[0], METRIC_COLUMNS, [r.as_list() for r in rows])
    if history:
        written.append(out_dir / f"{scenario.name}_priorities.csv")
        _write_csv(written[1], HISTORY_COLUMNS, history)
    return written


def run_scenario(scenario: Scenario, out_dir: Path, only: str | None = None) -> list[Path]:
    """Replicate every scheduler at every sweep point; write metric and priority-history CSVs."""
    rows: list[MetricsRow] = []
    history: list[list[str]] = []
    for sweep, spec, cfg, report in replicate_scenario(scenario, only):
        rows += metric_rows(scenario, sweep, spec, report)
        if cfg.online:
            history += history_rows(scenario, sweep, spec, report)
    if not rows:
        raise ConfigError(f"no scheduler matches {only!r}")
    return write_outputs(scenario, out_dir, rows, history)


def _write_csv(path: Path, header: list[str], rows: list[list[str]]) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _rate_text(rates) -> str:
    return " ".join(str(Fraction(r)) for r in rates)


def analyze(scenario: Scenario, out_dir: Path) -> tuple[list[str], Path]:
    """Interference degrees, acyclicity and region membership for the scenario's rates.

    Quantities whose exact search exceeds its size limit are reported as such;
    the remaining ones are still computed.
    """
    g = scenario.graph
    label = scenario.label
    lines: list[str] = []
    table: list[list[str]] = []

    def emit(metric: str, value: str) -> None:
        lines.append(f"{metric}: {value}")
        table.append([scenario.name, metric, value])

    def labelled(p) -> str:
        return " ".join(f"{label(i)}:{v}" for i, v in enumerate(p))

    emit("n_links", str(g.n_links))
    emit("edges", " ".join(f"{label(i)}-{label(j)}" for i, j in g.edge_list()))
    acyclic = is_acyclic(g)
    emit("acyclic", str(acyclic).lower())
    try:
        report = interference_degree(g)
        emit("delta_wc", str(report.overall))
        emit("delta_i", labelled(report.per_link))
    except SizeLimitError as exc:
        emit("delta_wc", f"size limit: {exc}")
    try:
        value, witness = delta_sp(g)
        emit("delta_sp", str(value))
        emit("delta_sp_priority", labelled(witness))
    except SizeLimitError as exc:
        emit("delta_sp", f"size limit: {exc}")
        try:
            emit("delta_sp_greedy_upper_bound", str(delta_sp_greedy(g)[0]))
        except SizeLimitError:
            pass
    if acyclic:
        emit("tree_priority", labelled(tree_priority(g)))

    named = [s for s in scenario.schedulers if s.kind == "priority"]
    for value in scenario.sweep or [None]:
        rates = scenario.rates(value)
        if not rates:
            continue
        tag = f"[{value}]" if value is not None else ""
        emit(f"rates{tag}", _rate_text(rates))
        wc = in_lambda_wc(g, rates)
        emit(f"in_lambda_wc{tag}", _membership_text(wc, label))
        for s in named:
            p = scenario.named_priority(s.priority, rates)
            emit(f"in_lambda_p{tag}[{s.name}]", _membership_text(in_lambda_p(g, p, rates), label))
        p_alg, _ = assign_priorities(g, rates)
        emit(f"assigned_priority{tag}", labelled(p_alg))
        emit(f"assigned_minmax{tag}", str(minmax_objective(g, p_alg, rates)))
        emit(f"in_lambda_p{tag}[assigned]", _membership_text(in_lambda_p(g, p_alg, rates), label))
        try:
            emit(f"in_lambda_sp{tag}", _membership_text(in_lambda_sp_oracle(g, rates), label))
        except SizeLimitError as exc:
            emit(f"in_lambda_sp{tag}", f"size limit: {exc}")

    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{scenario.name}_analysis.csv"
    _write_csv(path, ["scenario", "metric", "value"], table)
    return lines, path


def _membership_text(m, label) -> str:
    if m:
        if m.witness is not None:
            return "true (priority " + " ".join(f"{label(i)}:{v}" for i, v in enumerate(m.witness)) + ")"
        return "true"
    if m.violated:
        return "false (violated at " + " ".join(str(label(i)) for i in m.violated) + ")"
    return "false"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pmsched", description="Prioritized maximal scheduling simulator.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (("run", "simulate a scenario"), ("analyze", "compute region and degree metrics")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("config", help="scenario JSON file or built-in name (two-clique, star, random8, starvation-star)")
        p.add_argument("--seed", type=int)
        p.add_argument("--runs", type=int)
        p.add_argument("--horizon", type=int)
        p.add_argument("--out", help="output directory (default: the scenario's 'output' key)")
        p.add_argument("--scheduler", help="only run the scheduler with this name or kind")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        raw = load_raw(args.config)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot read scenario: {exc}", file=sys.stderr)
        return 2
    except ConfigError as exc:
        print(f"error: invalid scenario: {exc}", file=sys.stderr)
        return 3
    for key in ("seed", "runs", "horizon"):
        if getattr(args, key) is not None:
            raw[key] = getattr(args, key)
    try:
        scenario = parse_scenario(raw)
        out_dir = Path(args.out if args.out else scenario.output)
        if args.command == "run":
            for path in run_scenario(scenario, out_dir, args.scheduler):
                print(path)
        else:
            lines, path = analyze(scenario, out_dir)
            print("\n".join(lines))
            print(path)
    except SizeLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except ConfigError as exc:
        print(f"error: invalid scenario: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
