"""Run orchestration: single runs, batches, beta tuning, SIR comparison.

A batch executes runs on independent workers (each owns its entire run
state); summaries are merged afterwards in seed order, so shuffling the
seed list changes nothing but the order of the merge inputs.
"""

from __future__ import annotations

import copy
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from plaguesim import events as ev_mod
from plaguesim.engine import RunResult, Simulation
from plaguesim.macro_sir import (
    DivergenceReport,
    SirParams,
    SirTrajectory,
    compare_macro_micro,
    integrate_sir,
)
from plaguesim.metrics import (
    RunSummary,
    estimate_r0,
    r0_by_zone,
    snapshots_to_csv,
)
from plaguesim.scenario import ScenarioConfig


class TuneError(ValueError):
    pass


def run(
    config: ScenarioConfig,
    seed_override: Optional[int] = None,
    collect_events: bool = False,
) -> RunResult:
    """Execute one scenario run to horizon or extinction."""
    sim = Simulation(config, seed=seed_override, collect_events=collect_events)
    return sim.run()


def _summary_for_seed(config: ScenarioConfig, seed: int) -> RunSummary:
    return Simulation(config, seed=seed).run().summary


@dataclass
class BatchSummary:
    seeds: list[int]
    summaries: list[RunSummary]
    epidemic_fraction: float
    aggregate: dict[str, dict[str, float]] = field(default_factory=dict)

    def to_text(self) -> str:
        lines = [f"runs: {len(self.seeds)}", f"epidemic_fraction: {self.epidemic_fraction:.4f}"]
        for key, stats in self.aggregate.items():
            lines.append(f"{key}: mean={stats['mean']:.6g} std={stats['std']:.6g}")
        return "\n".join(lines) + "\n"


def run_batch(config: ScenarioConfig, seeds: list[int], workers: int = 1) -> BatchSummary:
    """Independent runs over a seed list, with aggregate statistics."""
    if not seeds:
        raise ValueError("run_batch needs at least one seed")
    if workers > 1 and len(seeds) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            summaries = list(pool.map(_summary_for_seed, [config] * len(seeds), seeds))
    else:
        summaries = [_summary_for_seed(config, s) for s in seeds]
    aggregate: dict[str, dict[str, float]] = {}
    for key in ("attack_rate", "peak_prevalence", "peak_tick", "deaths", "duration_ticks"):
        values = [float(getattr(s, key)) for s in summaries]
        aggregate[key] = {
            "mean": statistics.fmean(values),
            "std": statistics.pstdev(values) if len(values) > 1 else 0.0,
        }
    epidemic_fraction = sum(1 for s in summaries if s.epidemic_occurred) / len(summaries)
    return BatchSummary(
        seeds=list(seeds),
        summaries=summaries,
        epidemic_fraction=epidemic_fraction,
        aggregate=aggregate,
    )


@dataclass
class TuneResult:
    beta: float
    achieved: float
    converged: bool
    iterations: int
    channel: str
    target: float
    tolerance: float
    evaluations: list[tuple[float, float]] = field(default_factory=list)


def _mean_first_generation_r0(config: ScenarioConfig, seeds: list[int]) -> float:
    values = []
    for seed in seeds:
        sim = Simulation(config, seed=seed)
        result = sim.run()
        estimate = estimate_r0(result.tree)
        if estimate.first_generation is not None:
            values.append(estimate.first_generation)
    if not values:
        raise TuneError("no completed index cases; horizon too short to estimate R0")
    return statistics.fmean(values)


def tune_beta_for_target_r0(
    config: ScenarioConfig,
    channel: str,
    target: float,
    tolerance: float,
    runs_per_eval: int,
    max_iterations: int = 20,
) -> TuneResult:
    """Bisect the channel beta until mean first-generation R0 hits the target.

    The objective is evaluated over `runs_per_eval` seeded runs with the
    horizon clipped to the disease's maximum course length (index cases have
    completed by then, which is all first-generation R0 needs).
    """
    if target < 0:
        raise TuneError("target must be nonnegative")
    if channel not in config.disease.beta_by_channel:
        raise TuneError(f"disease does not use channel {channel!r}")
    if all(s.infectiousness_multiplier <= 0 for s in config.disease.stages):
        raise TuneError("disease has no infectious stage; channel unusable")

    work = copy.deepcopy(config)
    work.horizon_ticks = min(config.horizon_ticks, config.disease.max_total_duration() + 1)
    work.schedule = []
    seeds = [config.seed + 7919 * i for i in range(runs_per_eval)]

    def evaluate(beta: float) -> float:
        work.disease.beta_by_channel[channel] = beta
        return _mean_first_generation_r0(work, seeds)

    evaluations: list[tuple[float, float]] = []
    if target == 0.0:
        return TuneResult(
            beta=0.0, achieved=0.0, converged=True, iterations=0,
            channel=channel, target=target, tolerance=tolerance,
        )
    lo, hi = 0.0, 1.0
    best = (math.inf, 0.0, 0.0)  # (|gap|, beta, achieved)
    achieved_hi = evaluate(hi)
    evaluations.append((hi, achieved_hi))
    iterations = 1
    if abs(achieved_hi - target) <= tolerance:
        return TuneResult(
            beta=hi, achieved=achieved_hi, converged=True, iterations=iterations,
            channel=channel, target=target, tolerance=tolerance, evaluations=evaluations,
        )
    if achieved_hi < target:
        return TuneResult(
            beta=hi, achieved=achieved_hi, converged=False, iterations=iterations,
            channel=channel, target=target, tolerance=tolerance, evaluations=evaluations,
        )
    while iterations < max_iterations:
        mid = (lo + hi) / 2.0
        achieved = evaluate(mid)
        iterations += 1
        evaluations.append((mid, achieved))
        gap = abs(achieved - target)
        if gap < best[0]:
            best = (gap, mid, achieved)
        if gap <= tolerance:
            return TuneResult(
                beta=mid, achieved=achieved, converged=True, iterations=iterations,
                channel=channel, target=target, tolerance=tolerance, evaluations=evaluations,
            )
        if achieved < target:
            lo = mid
        else:
            hi = mid
    return TuneResult(
        beta=best[1], achieved=best[2], converged=False, iterations=iterations,
        channel=channel, target=target, tolerance=tolerance, evaluations=evaluations,
    )


@dataclass
class SirComparison:
    report: DivergenceReport
    trajectory: SirTrajectory
    micro_ticks: list[int]
    micro_mean_infected: list[float]


def compare_scenario_to_sir(
    config: ScenarioConfig,
    beta_macro: float,
    gamma: float,
    seeds: list[int],
    dt: float = 0.05,
) -> SirComparison:
    """Run the scenario over seeds and compare its mean I curve to RK4 SIR.

    The macro model starts from the same population split (index cases as
    I0) and integrates over the scenario horizon; micro runs that stop early
    (extinction) are padded with their final state.
    """
    n = config.population.count
    i0 = min(config.index_count, n)
    params = SirParams(
        beta_macro=beta_macro, gamma=gamma, population_n=float(n),
        s0=float(n - i0), i0=float(i0),
    )
    horizon_days = config.horizon_ticks * config.tick_length_days
    trajectory = integrate_sir(params, dt=dt, horizon=horizon_days)
    series: list[list[float]] = []
    final_sizes: list[float] = []
    for seed in seeds:
        result = Simulation(config, seed=seed).run()
        infected = [snap.totals().infected for snap in result.snapshots]
        infected += [infected[-1]] * (config.horizon_ticks + 1 - len(infected))
        series.append([float(x) for x in infected])
        final_sizes.append(float(result.summary.ever_infected))
    ticks = list(range(config.horizon_ticks + 1))
    mean_infected = [statistics.fmean(run[t] for run in series) for t in ticks]
    report = compare_macro_micro(
        trajectory,
        ticks,
        mean_infected,
        micro_final_size=statistics.fmean(final_sizes),
        tick_length_days=config.tick_length_days,
    )
    return SirComparison(
        report=report,
        trajectory=trajectory,
        micro_ticks=ticks,
        micro_mean_infected=mean_infected,
    )


def record_to_dict(record) -> dict:
    data = {
        "infectee": record.infectee,
        "episode": record.episode,
        "channel": record.channel,
        "tick": record.tick,
        "generation": record.generation,
        "zone": record.zone,
        "variant": record.variant,
        "infector": None,
    }
    if record.infector is not None:
        data["infector"] = {
            "kind": record.infector.kind,
            "avatar": record.infector.avatar,
            "pet": record.infector.pet,
            "owner": record.infector.owner,
            "source_case": record.infector.source_case,
            "source_episode": record.infector.source_episode,
        }
    return data


def summary_report(result: RunResult) -> str:
    """The structured text report written to summary.txt."""
    s = result.summary
    estimate = estimate_r0(result.tree)
    zones = r0_by_zone(result.tree, result.snapshots)
    lines = [
        f"scenario: {result.scenario}",
        f"seed: {result.seed}",
        f"population: {s.population}",
        f"duration_ticks: {s.duration_ticks}",
        f"attack_rate: {s.attack_rate:.6g}",
        f"peak_prevalence: {s.peak_prevalence:.6g}",
        f"peak_tick: {s.peak_tick}",
        f"deaths: {s.deaths}",
        f"ever_infected: {s.ever_infected}",
        f"total_episodes: {s.total_episodes}",
        f"epidemic_occurred: {s.epidemic_occurred} (threshold {s.epidemic_threshold})",
        "",
        "ex-post R0 (completed cases only):",
        f"  first_generation: {_fmt(estimate.first_generation)}",
        f"  weighted_all: {_fmt(estimate.weighted_all)}",
        f"  per_generation: [{', '.join(_fmt(v) for v in estimate.per_generation)}]",
        f"  completed_by_generation: {estimate.completed_by_generation}",
        "",
        "R0 by zone of infection:",
    ]
    for zone, value in sorted(zones.by_zone.items()):
        lines.append(f"  {zone}: {value:.4g}")
    lines.append(f"  density-normalized dispersion (CV): {_fmt(zones.dispersion)}")
    return "\n".join(lines) + "\n"


def _fmt(value: Optional[float]) -> str:
    return "undefined" if value is None else f"{value:.4g}"


def write_outputs(result: RunResult, out_dir: str | Path) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "summary.txt").write_text(summary_report(result))
    (out / "snapshots.csv").write_text(snapshots_to_csv(result.snapshots))
    with open(out / "tree.ndjson", "w", encoding="utf-8") as fh:
        for record in result.tree.records:
            case = result.tree.cases[(record.infectee, record.episode)]
            data = record_to_dict(record)
            data["end_tick"] = case.end_tick
            data["outcome"] = case.outcome
            data["offspring"] = result.tree.offspring_count(record.infectee, record.episode)
            fh.write(ev_mod.event_line(data))
    if result.events is not None:
        ev_mod.write_ndjson(result.events, str(out / "events.ndjson"))
