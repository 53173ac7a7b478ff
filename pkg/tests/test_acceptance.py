"""Acceptance suite. Each test prints one PASS/FAIL line for its criterion.

Run with ``pytest tests/test_acceptance.py -v``; the verdict lines are printed
even when output capture is on. The simulation criteria share one pass over
the built-in two-clique and starvation-star scenarios.
"""

from __future__ import annotations

import time
from dataclasses import replace
from fractions import Fraction

import numpy as np
import pytest

from conftest import random_graph
from oracles import minmax_brute
from pmsched.cli import history_rows, main, metric_rows, replicate_scenario, write_outputs
from pmsched.engine import SimConfig, replicate, run_simulation
from pmsched.graph import independent_sets, random_tree, star
from pmsched.priority import (
    assign_priorities,
    brute_force_optimal_priority,
    minmax_objective,
    priority_from_order,
    tree_priority,
)
from pmsched.regions import (
    convex_combination,
    delta_sp,
    in_lambda_p,
    in_lambda_sp_oracle,
    interference_degree,
    prioritized_interference_degree,
    sample_lambda_opt,
)
from pmsched.scenarios import load_raw, parse_scenario
from pmsched.traffic import BernoulliArrivals

pytestmark = pytest.mark.slow

STABLE_QUEUE = 2000
UNSTABLE_QUEUE = 10_000
GAP = 0.01
SHORT_HORIZON = 10_000


@pytest.fixture
def verdict(capsys):
    def emit(number: int, title: str, ok: bool, detail: str) -> None:
        with capsys.disabled():
            print(f"\ncriterion {number} [{title}]: {'PASS' if ok else 'FAIL'} ({detail})")
        assert ok, detail

    return emit


def _collect(name: str, out_dir, short_for: str | None = None):
    """Replicate a built-in scenario, write its CSVs and keep compact per-run data."""
    scenario = parse_scenario(load_raw(name))
    rows, history, data = [], [], {}
    for sweep, spec, cfg, report in replicate_scenario(scenario):
        rows += metric_rows(scenario, sweep, spec, report)
        if cfg.online:
            history += history_rows(scenario, sweep, spec, report)
        entry = {
            "rates": cfg.arrivals.mean_rates(),
            "max_queue": report["max_queue"].mean,
            "final_queue": report["final_queue"].mean,
            "gaps": np.array([res.gaps for res in report.results]),
            "departed": np.array([res.departed for res in report.results]),
            "final": np.array([res.final_queues for res in report.results]),
            "histories": [res.priority_history for res in report.results],
        }
        if spec.name == short_for:
            entry["short_final_queue"] = replicate(replace(cfg, horizon=SHORT_HORIZON), scenario.runs)["final_queue"].mean
        data[(sweep, spec.name)] = entry
    paths = write_outputs(scenario, out_dir, rows, history)
    return scenario, data, paths


@pytest.fixture(scope="module")
def two_clique(tmp_path_factory):
    start = time.perf_counter()
    scenario, data, paths = _collect("two-clique", tmp_path_factory.mktemp("two-clique"), short_for="bad-priority")
    return scenario, data, paths, time.perf_counter() - start


@pytest.fixture(scope="module")
def starvation(tmp_path_factory):
    return _collect("starvation-star", tmp_path_factory.mktemp("starvation"))


def test_criterion_1_departures(verdict):
    start = time.perf_counter()
    rng = np.random.default_rng(101)
    slots_each = 50
    violations = {"priority": 0, "fixed": 0, "lqf": 0}
    for _ in range(200):
        n = int(rng.integers(1, 13))
        g = random_graph(rng, n)
        order = tuple(int(i) for i in rng.permutation(n))
        base = SimConfig(
            g,
            BernoulliArrivals(tuple(rng.uniform(0, 0.6, n))),
            horizon=slots_each,
            initial_queues=tuple(int(q) for q in rng.integers(0, 4, n)),
            seed=int(rng.integers(2**31)),
        )
        variants = {
            "priority": replace(base, priority=priority_from_order(order)),
            "fixed": replace(base, scheduler="fixed", order=tuple(int(i) for i in rng.permutation(n))),
            "lqf": replace(base, scheduler="lqf"),
        }
        for name, cfg in variants.items():
            violations[name] += run_simulation(cfg, check_departures=True).departure_violations
    elapsed = time.perf_counter() - start
    ok = sum(violations.values()) == 0 and elapsed < 60
    verdict(1, "local departure guarantee", ok, f"violations {violations} over {200 * slots_each} slots each, {elapsed:.1f}s")


def test_criterion_2_minmax_oracle(verdict):
    start = time.perf_counter()
    rng = np.random.default_rng(202)
    mismatches = 0
    for _ in range(100):
        n = int(rng.integers(2, 9))
        g = random_graph(rng, n)
        rates = [Fraction(int(k), 60) for k in rng.integers(0, 40, n)]
        p, _ = assign_priorities(g, rates)
        value = minmax_objective(g, p, rates)
        if value != minmax_brute(g, rates) or value != brute_force_optimal_priority(g, rates)[1]:
            mismatches += 1
    elapsed = time.perf_counter() - start
    ok = mismatches == 0 and elapsed < 120
    verdict(2, "assignment solves the min-max problem", ok, f"{mismatches} mismatches in 100 instances, {elapsed:.1f}s")


def test_criterion_3_assignment_reaches_sp(verdict):
    rng = np.random.default_rng(303)
    accepted = failures = tried = tight = 0
    while accepted < 100:
        tried += 1
        n = int(rng.integers(4, 9))
        g = random_graph(rng, n)
        # two maximal sets mixed, then scaled across the boundary of the union region
        sets = independent_sets(g, maximal_only=True)
        pair = [sets[int(k)] for k in rng.integers(0, len(sets), 2)]
        w = Fraction(int(rng.integers(0, 11)), 10)
        scale = Fraction(int(rng.integers(5, 21)), 10)
        rates = [scale * x for x in convex_combination(g, pair, [w, 1 - w])]
        if max(rates) > 1 or not in_lambda_sp_oracle(g, rates):
            continue
        accepted += 1
        p, _ = assign_priorities(g, rates)
        failures += not in_lambda_p(g, p, rates)
        tight += minmax_objective(g, p, rates) == 1
    verdict(
        3, "assignment lands in the priority region", failures == 0,
        f"{failures} failures; 100 accepted of {tried} drawn, {tight} on the boundary",
    )


def test_criterion_4_scaled_regions(verdict):
    rng = np.random.default_rng(404)
    p_fail = sp_fail = 0
    for _ in range(20):
        n = int(rng.integers(4, 11))
        g = random_graph(rng, n)
        dsp, _ = delta_sp(g)
        priorities = [priority_from_order(rng.permutation(n).tolist()) for _ in range(5)]
        degrees = [prioritized_interference_degree(g, p).overall for p in priorities]
        for _ in range(1000):
            lam = sample_lambda_opt(g, rng)
            for p, d in zip(priorities, degrees):
                p_fail += not in_lambda_p(g, p, lam / d)
            sp_fail += not in_lambda_sp_oracle(g, lam / dsp)
    ok = p_fail == 0 and sp_fail == 0
    verdict(4, "scaled optimal region fits", ok, f"{p_fail} priority-region and {sp_fail} union-region failures")


def test_criterion_5_star_and_trees(verdict):
    g = star(8)
    wc = interference_degree(g).overall
    sp, _ = delta_sp(g)
    rng = np.random.default_rng(505)
    bad_tree = bad_sp = checked_sp = 0
    for k in range(50):
        t = random_tree(int(rng.integers(2, 21)), seed=k)
        bad_tree += prioritized_interference_degree(t, tree_priority(t)).overall != 1
        if t.n_links <= 12:
            checked_sp += 1
            bad_sp += delta_sp(t)[0] != 1
    ok = wc == 8 and sp == 1 and bad_tree == 0 and bad_sp == 0
    verdict(
        5, "star degrees and tree priorities", ok,
        f"star delta_wc={wc} delta_sp={sp}; tree failures {bad_tree}/50, delta_sp failures {bad_sp}/{checked_sp}",
    )


def test_criterion_6_two_clique(two_clique, verdict):
    scenario, data, _, elapsed = two_clique
    stable = {
        (sweep, name): d["max_queue"]
        for (sweep, name), d in data.items()
        if name in ("online-priority", "lqf")
    }
    worst_stable = max(stable.values())
    bad = {sweep: d for (sweep, name), d in data.items() if name == "bad-priority"}
    growth = {
        sweep: d["final_queue"] / d["short_final_queue"]
        for sweep, d in bad.items()
        if d["max_queue"] > UNSTABLE_QUEUE and d["short_final_queue"] > 0
    }
    # superlinear relative to a 10x longer horizon means the ratio exceeds 10
    horizon_ratio = scenario.horizon / SHORT_HORIZON
    unstable = [s for s, r in growth.items() if r > horizon_ratio]
    ok = worst_stable < STABLE_QUEUE and bool(unstable) and elapsed < 600
    ratios = " ".join(f"{s}:{r:.3f}" for s, r in growth.items())
    verdict(
        6, "two-clique stability separation", ok,
        f"stable max queue {worst_stable:.0f}; bad-priority max queue up to {max(d['max_queue'] for d in bad.values()):.0f}; "
        f"final-queue growth 1e4->1e5 {ratios}; {elapsed:.0f}s",
    )


def test_criterion_7_starvation(starvation, verdict):
    scenario, data, _ = starvation
    (entry,) = data.values()
    adversary = parse_scenario(load_raw("starvation-star")).sim_configs(None)[0][1].arrivals
    target, feeders, eps = adversary.target, adversary.feeders, adversary.epsilon
    center_departures = int(entry["departed"][:, target].max())
    ratio = entry["final"][:, target] / scenario.horizon
    within = np.abs(ratio - eps) <= 0.1 * eps
    feeder_gap = float(entry["gaps"][:, list(feeders)].max())
    ok = center_departures == 0 and within.all() and feeder_gap < GAP
    verdict(
        7, "adversarial starvation", ok,
        f"center departures {center_departures}; center queue/t in [{ratio.min():.4f}, {ratio.max():.4f}] vs eps {eps}; "
        f"feeder gap {feeder_gap:.5f}; {scenario.runs} runs",
    )


def test_criterion_8_online_convergence(two_clique, verdict):
    scenario, data, _, _ = two_clique
    entry = data[("0.5", "online-priority")]
    frames = [h[-1][0] for h in entry["histories"]]
    converged = sum(f <= 50 for f in frames)
    outside = sum(not in_lambda_p(scenario.graph, h[-1][1], entry["rates"]) for h in entry["histories"])
    ok = converged >= 0.95 * len(frames) and outside == 0
    verdict(
        8, "online priorities converge", ok,
        f"{converged}/{len(frames)} runs fixed by frame 50 (latest change at frame {max(frames)}); "
        f"{outside} final priorities outside the region",
    )


def test_criterion_9_rate_stability(two_clique, starvation, verdict):
    _, data, _, _ = two_clique
    gaps = [d["gaps"].max() for (_, name), d in data.items() if name in ("online-priority", "lqf")]
    _, starve, _ = starvation
    (entry,) = starve.values()
    # every star link except the starved center is stable
    gaps.append(entry["gaps"][:, 1:].max())
    worst = float(max(gaps))
    verdict(9, "rate stability of stable configurations", worst < GAP, f"largest per-link gap {worst:.5f}")


def test_criterion_10_determinism(two_clique, starvation, tmp_path, verdict):
    _, _, first_paths, _ = two_clique
    _, _, starvation_paths = starvation
    out = tmp_path / "again"
    codes = [main(["run", "two-clique", "--out", str(out)]), main(["run", "starvation-star", "--out", str(out)])]
    same = [p.read_bytes() == (out / p.name).read_bytes() for p in [*first_paths, *starvation_paths]]
    codes += [main(["analyze", "star", "--out", str(tmp_path / "a")]), main(["analyze", "star", "--out", str(tmp_path / "b")])]
    same.append((tmp_path / "a" / "star_analysis.csv").read_bytes() == (tmp_path / "b" / "star_analysis.csv").read_bytes())
    ok = all(c == 0 for c in codes) and all(same)
    verdict(10, "byte-identical CSV output", ok, f"{sum(same)}/{len(same)} files identical")
