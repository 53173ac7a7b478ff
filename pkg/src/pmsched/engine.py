"""Slotted queueing simulation with optional frame-based online priorities.

Each slot: the scheduler looks at the current queues, every scheduled link
sends one packet, then the end-of-slot arrivals are added. A packet therefore
waits at least one slot before it can be served.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import stats

from . import _kernel
from .errors import ConfigError, SizeLimitError
from .graph import ENUMERATION_LIMIT, InterferenceGraph, independent_sets
from .priority import assign_priorities, identity_priority, scan_order, validate_priority
from .regions import in_lambda_p
from .sched import _greedy_scan, departure_violations, lqf_order, schedule_max_weight
from .traffic import ArrivalProcess, estimate_rates

log = logging.getLogger(__name__)

SCHEDULERS = ("priority", "fixed", "lqf", "max_weight")
MAX_SAMPLES = 10_000
CHUNK = 10_000
KERNEL_LIMIT = 62


@dataclass(frozen=True)
class SimConfig:
    """One simulation run.

    ``scheduler`` is one of ``priority`` (scan by ``priority`` values), ``fixed``
    (scan in ``order``), ``lqf`` or ``max_weight``. With ``online=True`` the
    priority scheduler starts from ``priority`` (identity when omitted) and
    re-assigns priorities at frame boundaries.
    """

    graph: InterferenceGraph
    arrivals: ArrivalProcess
    horizon: int
    scheduler: str = "priority"
    priority: tuple[int, ...] | None = None
    order: tuple[int, ...] | None = None
    online: bool = False
    frame_length: int = 100
    initial_queues: tuple[int, ...] | None = None
    seed: int = 0

    def validate(self) -> None:
        n = self.graph.n_links
        if self.scheduler not in SCHEDULERS:
            raise ConfigError(f"unknown scheduler {self.scheduler!r}")
        if self.horizon < 1:
            raise ConfigError("horizon must be at least one slot")
        if self.arrivals.n_links != n:
            raise ConfigError(f"arrival process covers {self.arrivals.n_links} links, graph has {n}")
        if self.online and (self.scheduler != "priority" or self.frame_length < 1):
            raise ConfigError("online assignment needs the priority scheduler and frame_length >= 1")
        if self.scheduler == "priority" and self.priority is not None:
            try:
                validate_priority(self.graph, self.priority)
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
        if self.scheduler == "fixed" and (self.order is None or sorted(self.order) != list(range(n))):
            raise ConfigError("fixed scheduler needs an order that permutes the link ids")
        if n > KERNEL_LIMIT:
            raise SizeLimitError(f"simulation is limited to {KERNEL_LIMIT} links (64-bit link masks)")
        if self.scheduler == "max_weight" and n > ENUMERATION_LIMIT:
            raise SizeLimitError(f"max_weight is limited to {ENUMERATION_LIMIT} links")
        if self.initial_queues is not None and (
            len(self.initial_queues) != n or min(self.initial_queues, default=0) < 0
        ):
            raise ConfigError("initial_queues must give a non-negative length per link")


@dataclass
class SimResult:
    horizon: int
    initial_queues: np.ndarray
    final_queues: np.ndarray
    max_queues: np.ndarray
    arrived: np.ndarray
    departed: np.ndarray
    sample_times: np.ndarray
    samples: np.ndarray
    priority_history: list[tuple[int, tuple[int, ...]]] = field(default_factory=list)
    departure_violations: int = 0

    @property
    def gaps(self) -> np.ndarray:
        return rate_stability_diagnostic(self)

    @property
    def convergence_frame(self) -> int:
        """Frame from which the priority vector never changed again (1 if it never did)."""
        return self.priority_history[-1][0] if self.priority_history else 1


def online_priority_update(
    p: Sequence[int],
    arrivals: Sequence[int],
    frame: int,
    frame_length: int,
    g: InterferenceGraph,
) -> tuple[int, ...]:
    """Priority for ``frame``: keep ``p`` if the rate estimate lies in its region, else re-assign.

    ``arrivals`` are the cumulative counts at the end of slot ``(frame-1) * frame_length``.
    """
    estimate = estimate_rates(arrivals, frame, frame_length)
    if in_lambda_p(g, p, estimate):
        return tuple(p)
    return assign_priorities(g, estimate)[0]


def rate_stability_diagnostic(res: SimResult) -> np.ndarray:
    """Per link ``|A(t)/t - D(t)/t|`` at the horizon."""
    return np.abs(res.arrived - res.departed) / res.horizon


class _State:
    def __init__(self, cfg: SimConfig):
        n = cfg.graph.n_links
        q0 = cfg.initial_queues or (0,) * n
        self.queues = np.array(q0, dtype=np.int64)
        self.initial = self.queues.copy()
        self.arrived = np.zeros(n, dtype=np.int64)
        self.departed = np.zeros(n, dtype=np.int64)
        self.qmax = self.queues.copy()
        self.every = max(1, math.ceil(cfg.horizon / MAX_SAMPLES))
        count = cfg.horizon // self.every
        self.traj_t = np.zeros(count, dtype=np.int64)
        self.traj_q = np.zeros((count, n), dtype=np.int64)
        self.n_traj = 0
        self.t = 0
        self.violations = 0


def _advance_python(g: InterferenceGraph, kind: str, order, candidates, state: _State, arrivals: np.ndarray, check: bool):
    """Reference slot loop built on the scheduler functions in :mod:`pmsched.sched`."""
    for row in arrivals:
        q = state.queues.tolist()
        if kind == "ordered":
            scan = order
        elif kind == "lqf":
            scan = lqf_order(q)
        else:
            scan = None
        if scan is not None:
            chosen = _greedy_scan(g, scan, q)
            if check:
                state.violations += len(departure_violations(g, scan, q, chosen))
        else:
            chosen = schedule_max_weight(g, q, candidates)
        for i in chosen:
            state.queues[i] -= 1
            state.departed[i] += 1
        state.queues += row
        state.arrived += row
        np.maximum(state.qmax, state.queues, out=state.qmax)
        state.t += 1
        if state.t % state.every == 0:
            state.traj_t[state.n_traj] = state.t
            state.traj_q[state.n_traj] = state.queues
            state.n_traj += 1


def run_simulation(cfg: SimConfig, backend: str = "compiled", check_departures: bool = False) -> SimResult:
    """Simulate ``cfg.horizon`` slots.

    ``backend="python"`` runs the reference loop on the scheduler functions;
    ``check_departures`` (python backend only) counts, per slot, backlogged links
    with no departure among themselves and their earlier-scanned neighbors.
    """
    cfg.validate()
    if check_departures:
        backend = "python"
    g = cfg.graph
    n = g.n_links
    rng = np.random.default_rng(cfg.seed)
    state = _State(cfg)

    candidates = np.zeros(0, dtype=np.int64)
    if cfg.scheduler == "max_weight":
        candidates = np.array(independent_sets(g, maximal_only=True), dtype=np.int64)
    nbr = np.array(g.masks, dtype=np.int64)
    lex = np.array([1 << (n - 1 - i) for i in range(n)], dtype=np.int64)

    p = None
    if cfg.scheduler == "priority":
        p = tuple(cfg.priority) if cfg.priority is not None else identity_priority(n)
    history: list[tuple[int, tuple[int, ...]]] = [(1, p)] if cfg.online else []

    def run_block(length: int) -> None:
        block = cfg.arrivals.block(state.t + 1, length, rng)
        if cfg.scheduler == "lqf":
            kind, order = "lqf", None
        elif cfg.scheduler == "max_weight":
            kind, order = "max_weight", None
        else:
            kind = "ordered"
            order = scan_order(p) if cfg.scheduler == "priority" else list(cfg.order)
        if backend == "python":
            _advance_python(g, kind, order, candidates.tolist(), state, block, check_departures)
            return
        code = {"ordered": _kernel.ORDERED, "lqf": _kernel.LQF, "max_weight": _kernel.MAX_WEIGHT}[kind]
        order_arr = np.array(order if order is not None else range(n), dtype=np.int64)
        state.n_traj = _kernel.advance(
            code, nbr, order_arr, candidates, lex, state.queues, state.arrived, state.departed,
            state.qmax, block, state.t, state.every, state.traj_t, state.traj_q, state.n_traj,
        )
        state.t += length

    if cfg.online:
        frame = 1
        while state.t < cfg.horizon:
            if frame >= 2:
                new_p = online_priority_update(p, state.arrived, frame, cfg.frame_length, g)
                if new_p != p:
                    log.debug("frame %d: priority %s -> %s", frame, p, new_p)
                    p = new_p
                    history.append((frame, p))
            run_block(min(cfg.frame_length, cfg.horizon - state.t))
            frame += 1
    else:
        while state.t < cfg.horizon:
            run_block(min(CHUNK, cfg.horizon - state.t))

    k = state.n_traj
    return SimResult(
        horizon=cfg.horizon,
        initial_queues=state.initial,
        final_queues=state.queues.copy(),
        max_queues=state.qmax.copy(),
        arrived=state.arrived.copy(),
        departed=state.departed.copy(),
        sample_times=np.concatenate([[0], state.traj_t[:k]]),
        samples=np.vstack([state.initial[None, :], state.traj_q[:k]]),
        priority_history=history,
        departure_violations=state.violations,
    )


# -- replication -----------------------------------------------------------


def run_seed(base: int, run: int) -> int:
    """Independent seed for replicate ``run`` derived from the base seed."""
    return int(np.random.SeedSequence([base, run]).generate_state(1, dtype=np.uint64)[0] >> 1)


def run_metrics(res: SimResult, online: bool = False) -> dict[str, float]:
    gaps = res.gaps
    metrics = {
        "max_queue": float(res.max_queues.max(initial=0)),
        "final_queue": float(res.final_queues.max(initial=0)),
        "total_final_queue": float(res.final_queues.sum()),
        "max_gap": float(gaps.max(initial=0.0)),
    }
    for i, (m, f, gap) in enumerate(zip(res.max_queues, res.final_queues, gaps)):
        metrics[f"max_queue[{i}]"] = float(m)
        metrics[f"final_queue[{i}]"] = float(f)
        metrics[f"gap[{i}]"] = float(gap)
    if online:
        metrics["convergence_frame"] = float(res.convergence_frame)
        metrics["priority_changes"] = float(len(res.priority_history) - 1)
    return metrics


@dataclass(frozen=True)
class MetricSummary:
    mean: float
    ci95: float
    values: tuple[float, ...]


@dataclass
class ReplicationReport:
    runs: int
    metrics: dict[str, MetricSummary]
    results: list[SimResult]

    def __getitem__(self, name: str) -> MetricSummary:
        return self.metrics[name]


def confidence_half_width(values: Sequence[float], level: float = 0.95) -> float:
    """Normal-approximation half width; Student t quantile below 30 samples."""
    n = len(values)
    if n < 2:
        raise ValueError("a confidence interval needs at least two values")
    s = float(np.std(values, ddof=1))
    if s == 0.0:
        return 0.0
    q = stats.t.ppf(0.5 + level / 2, n - 1) if n < 30 else stats.norm.ppf(0.5 + level / 2)
    return float(q * s / math.sqrt(n))


def replicate(cfg: SimConfig, runs: int, backend: str = "compiled") -> ReplicationReport:
    """Run ``runs`` independently seeded copies of ``cfg`` and summarize every metric."""
    if runs < 2:
        raise ConfigError("replicate needs at least two runs")
    results = [run_simulation(replace(cfg, seed=run_seed(cfg.seed, r)), backend=backend) for r in range(runs)]
    per_run = [run_metrics(res, cfg.online) for res in results]
    summary = {}
    for name in per_run[0]:
        values = tuple(m[name] for m in per_run)
        # fsum then clamp: the mean of identical values must equal them exactly
        mean = min(max(math.fsum(values) / runs, min(values)), max(values))
        summary[name] = MetricSummary(mean, confidence_half_width(values), values)
    return ReplicationReport(runs, summary, results)
