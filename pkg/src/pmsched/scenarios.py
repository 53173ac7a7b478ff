"""Scenario files: parsing, validation and the built-in experiments.

A scenario is a JSON object. Link references (edge lists, bottleneck links,
fixed scan orders) use 1-based labels when ``"one_based": true``, which is the
default for the built-ins so labels start at 1. Rates are
read as exact decimals (``"0.99"`` becomes ``Fraction(99, 100)``).

Example::

    {
      "name": "two-clique",
      "topology": {"kind": "clique_intersection", "cliques": 2, "size": 6},
      "arrivals": {"process": "bernoulli", "profile": "bottleneck",
                   "link": 1, "total": "0.99", "share": 5},
      "sweep": ["0.1", "0.5", "0.9"],
      "schedulers": [
        {"name": "bad-priority", "kind": "priority", "priority": "worst"},
        {"name": "online-priority", "kind": "online", "initial": "worst"},
        {"name": "lqf", "kind": "lqf"}
      ],
      "horizon": 100000, "frame_length": 100, "runs": 30, "seed": 2012
    }
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any

from .engine import SimConfig
from .errors import ConfigError
from .graph import InterferenceGraph, build_graph, generate_topology
from .priority import assign_priorities, identity_priority, priority_from_order, tree_priority
from .traffic import BatchArrivals, BernoulliArrivals, make_starvation_arrivals

SCHEDULER_KINDS = ("priority", "online", "fixed", "lqf", "max_weight")

_TENTHS = [f"0.{k}" for k in range(1, 10)]

BUILTIN: dict[str, dict[str, Any]] = {
    "two-clique": {
        "name": "two-clique",
        "one_based": True,
        "topology": {"kind": "clique_intersection", "cliques": 2, "size": 6},
        "arrivals": {"process": "bernoulli", "profile": "bottleneck", "link": 1, "total": "0.99", "share": 5},
        "sweep": _TENTHS,
        "schedulers": [
            {"name": "bad-priority", "kind": "priority", "priority": "worst"},
            {"name": "online-priority", "kind": "online", "initial": "worst"},
            {"name": "lqf", "kind": "lqf"},
        ],
        "horizon": 100_000,
        "frame_length": 100,
        "runs": 30,
        "seed": 2012,
    },
    "star": {
        "name": "star",
        "one_based": True,
        "topology": {"kind": "star", "k": 8},
        "arrivals": {"process": "bernoulli", "profile": "uniform"},
        "sweep": ["0.05", "0.1", "0.15", "0.2", "0.25", "0.3", "0.35", "0.4", "0.45"],
        "schedulers": [
            {"name": "center-highest", "kind": "priority", "priority": "best-degree"},
            {"name": "center-lowest", "kind": "priority", "priority": "worst"},
            {"name": "online-priority", "kind": "online", "initial": "worst"},
            {"name": "lqf", "kind": "lqf"},
        ],
        "horizon": 100_000,
        "frame_length": 100,
        "runs": 30,
        "seed": 2012,
    },
    "random8": {
        "name": "random8",
        "one_based": True,
        "topology": {"kind": "guard_zone", "n": 8, "area": [1.0, 1.0], "radius": 0.35, "seed": 7},
        "arrivals": {"process": "bernoulli", "profile": "uniform"},
        "sweep": ["0.05", "0.1", "0.15", "0.2", "0.25", "0.3", "0.35", "0.4"],
        "schedulers": [
            {"name": "bad-priority", "kind": "priority", "priority": "worst"},
            {"name": "online-priority", "kind": "online", "initial": "identity"},
            {"name": "lqf", "kind": "lqf"},
            {"name": "max-weight", "kind": "max_weight"},
        ],
        "horizon": 100_000,
        "frame_length": 100,
        "runs": 30,
        "seed": 2012,
    },
    "starvation-star": {
        "name": "starvation-star",
        "one_based": True,
        "topology": {"kind": "star", "k": 8},
        "arrivals": {"process": "adversarial", "epsilon": "0.1", "against": "center-lowest"},
        "schedulers": [{"name": "center-lowest", "kind": "priority", "priority": "worst"}],
        "horizon": 100_000,
        "runs": 30,
        "seed": 2012,
    },
}


def parse_rate(value: Any) -> Fraction:
    """Exact rational from a JSON number or decimal string."""
    try:
        if isinstance(value, bool):
            raise TypeError
        if isinstance(value, float):
            value = repr(value)
        rate = Fraction(value)
    except (TypeError, ValueError, ZeroDivisionError):
        raise ConfigError(f"not a rate: {value!r}") from None
    if not 0 <= rate <= 1:
        raise ConfigError(f"rate {value!r} outside [0, 1]")
    return rate


@dataclass(frozen=True)
class SchedulerSpec:
    name: str
    kind: str
    priority: tuple[int, ...] | None = None
    order: tuple[int, ...] | None = None
    initial: str | list | None = None


@dataclass
class Scenario:
    name: str
    graph: InterferenceGraph
    one_based: bool
    arrivals: dict[str, Any]
    sweep: list[str]
    schedulers: list[SchedulerSpec]
    horizon: int
    frame_length: int
    runs: int
    seed: int
    output: str
    raw: dict[str, Any] = field(repr=False, default_factory=dict)

    def label(self, i: int) -> int:
        return i + 1 if self.one_based else i

    def link(self, label: Any) -> int:
        i = int(label) - (1 if self.one_based else 0)
        if not 0 <= i < self.graph.n_links:
            raise ConfigError(f"link {label!r} does not exist")
        return i

    def rates(self, sweep_value: str | None) -> tuple[Fraction, ...]:
        """Per-link mean rates for one sweep point."""
        spec = self.arrivals
        n = self.graph.n_links
        profile = spec.get("profile", "explicit")
        if not spec or spec.get("process") == "adversarial":
            return ()
        if profile == "explicit":
            rates = tuple(parse_rate(r) for r in spec.get("rates", ()))
            if len(rates) != n:
                raise ConfigError(f"explicit rates need {n} entries")
            return rates
        x = parse_rate(sweep_value if sweep_value is not None else spec.get("rate"))
        if profile == "uniform":
            return (x,) * n
        if profile == "bottleneck":
            b = self.link(spec["link"])
            other = (parse_rate(spec.get("total", 1)) - x) / int(spec.get("share", n - 1))
            if other < 0:
                raise ConfigError(f"sweep value {sweep_value} exceeds the bottleneck total")
            return tuple(x if i == b else other for i in range(n))
        raise ConfigError(f"unknown rate profile {profile!r}")

    def named_priority(self, spec: Any, rates: tuple[Fraction, ...] = ()) -> tuple[int, ...]:
        g = self.graph
        if isinstance(spec, list):
            return tuple(int(v) for v in spec)
        if spec == "identity":
            return identity_priority(g.n_links)
        if spec == "worst":
            # highest-degree links last: the bottleneck gets the lowest priority
            return priority_from_order(sorted(g.links, key=lambda i: (g.degree(i), i)))
        if spec == "best-degree":
            return priority_from_order(sorted(g.links, key=lambda i: (-g.degree(i), i)))
        if spec == "tree":
            try:
                return tree_priority(g)
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
        if spec == "assigned":
            if not rates:
                raise ConfigError("'assigned' priority needs rates")
            return assign_priorities(g, rates)[0]
        raise ConfigError(f"unknown priority {spec!r}")

    def sim_configs(self, sweep_value: str | None) -> list[tuple[SchedulerSpec, SimConfig]]:
        rates = self.rates(sweep_value)
        out = []
        for s in self.schedulers:
            common = dict(horizon=self.horizon, frame_length=self.frame_length, seed=self.seed)
            priority = order = None
            if s.kind in ("priority", "online"):
                priority = self.named_priority(s.priority if s.kind == "priority" else (s.initial or "identity"), rates)
            if s.kind == "fixed":
                order = tuple(self.link(x) for x in s.order)
            out.append(
                (
                    s,
                    SimConfig(
                        self.graph,
                        self._process(rates),
                        scheduler={"online": "priority"}.get(s.kind, s.kind),
                        priority=priority,
                        order=order,
                        online=s.kind == "online",
                        **common,
                    ),
                )
            )
        for _, cfg in out:
            cfg.validate()
        return out

    def _process(self, rates: tuple[Fraction, ...]):
        spec = self.arrivals
        process = spec.get("process", "bernoulli")
        if process == "bernoulli":
            return BernoulliArrivals(rates)
        if process == "batch":
            return BatchArrivals(rates, int(spec.get("a_max", 1)))
        if process == "adversarial":
            target = next((s for s in self.schedulers if s.name == spec.get("against")), None)
            if target is None or target.kind != "priority":
                raise ConfigError("adversarial arrivals need 'against' naming a fixed-priority scheduler")
            p = self.named_priority(target.priority)
            try:
                return make_starvation_arrivals(self.graph, p, float(parse_rate(spec.get("epsilon", "0.1"))))
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
        raise ConfigError(f"unknown arrival process {process!r}")


def _merge(base: dict[str, Any], override: dict[str, Any]) -> dict[str, Any]:
    out = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def load_raw(source: str) -> dict[str, Any]:
    """Read a scenario file, or return a built-in scenario by name.

    A file may set ``"base": "<built-in name>"`` and override any of its keys.
    Raises ``json.JSONDecodeError`` or ``OSError`` when the file cannot be read.
    """
    path = Path(source)
    if not path.exists() and source in BUILTIN:
        return copy.deepcopy(BUILTIN[source])
    raw = json.loads(path.read_text(encoding="utf-8"))
    if not isinstance(raw, dict):
        raise ConfigError("scenario must be a JSON object")
    base = raw.pop("base", None)
    if base is not None:
        if base not in BUILTIN:
            raise ConfigError(f"unknown base scenario {base!r}")
        raw = _merge(BUILTIN[base], raw)
    return raw


def parse_scenario(raw: dict[str, Any]) -> Scenario:
    one_based = bool(raw.get("one_based", False))
    topo = raw.get("topology")
    if not isinstance(topo, dict):
        raise ConfigError("scenario needs a topology object")
    if "edges" in topo:
        if "kind" in topo:
            raise ConfigError("topology must give either 'kind' or 'edges', not both")
        shift = 1 if one_based else 0
        try:
            graph = build_graph(int(topo["n_links"]), [(int(a) - shift, int(b) - shift) for a, b in topo["edges"]])
        except (KeyError, ValueError, TypeError) as exc:
            raise ConfigError(f"bad edge list: {exc}") from None
    else:
        graph = generate_topology(topo)

    schedulers = []
    for entry in raw.get("schedulers", []):
        kind = entry.get("kind")
        if kind not in SCHEDULER_KINDS:
            raise ConfigError(f"unknown scheduler kind {kind!r}")
        order = entry.get("order")
        schedulers.append(
            SchedulerSpec(
                name=str(entry.get("name", kind)),
                kind=kind,
                priority=entry.get("priority", "identity") if kind == "priority" else None,
                order=tuple(order) if order is not None else None,
                initial=entry.get("initial") if kind == "online" else None,
            )
        )
    if not schedulers:
        raise ConfigError("scenario needs at least one scheduler")
    if len({s.name for s in schedulers}) != len(schedulers):
        raise ConfigError("scheduler names must be unique")
    if any(s.kind == "fixed" and s.order is None for s in schedulers):
        raise ConfigError("fixed scheduler needs an 'order'")

    sweep = [str(v) for v in raw.get("sweep", [])]
    if "sweep" in raw and not sweep:
        raise ConfigError("sweep grid must not be empty")
    try:
        scenario = Scenario(
            name=str(raw.get("name", "scenario")),
            graph=graph,
            one_based=one_based,
            arrivals=dict(raw.get("arrivals", {})),
            sweep=sweep,
            schedulers=schedulers,
            horizon=int(raw.get("horizon", 100_000)),
            frame_length=int(raw.get("frame_length", 100)),
            runs=int(raw.get("runs", 30)),
            seed=int(raw.get("seed", 0)),
            output=str(raw.get("output", "results")),
            raw=raw,
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    if scenario.runs < 2:
        raise ConfigError("runs must be at least 2")
    # resolve every sweep point once so bad rates fail before any simulation;
    # a topology-only scenario is still valid for analysis
    if scenario.arrivals:
        for value in scenario.sweep or [None]:
            scenario.sim_configs(value)
    return scenario
