"""Observability: per-tick snapshots, the transmission tree, and ex-post R0.

The basic reproductive rate of a run is never set up front; it is measured
after the fact from who-infected-whom.  Only cases whose infectious period
has ended are averaged, which avoids right-censoring bias in mid-run
estimates.  The weighted-average variant weights each generation's mean
offspring count by the number of completed cases in that generation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

from plaguesim.channels import CHANNEL_NAMES, ChannelKind
from plaguesim.transmission import InfectionRecord

NONSPATIAL_ZONE = "nonspatial"

_NONSPATIAL_CHANNELS = {ChannelKind.GLOBAL_CHAT.value, ChannelKind.DIRECT_MESSAGE.value}


@dataclass(slots=True)
class ZoneCounts:
    susceptible: int = 0
    infected: int = 0
    recovered: int = 0
    dead: int = 0
    immune: int = 0

    def total(self) -> int:
        return self.susceptible + self.infected + self.recovered + self.dead


@dataclass
class TickSnapshot:
    tick: int
    zones: dict[str, ZoneCounts] = field(default_factory=dict)
    unaware: int = 0
    rumor_aware: int = 0
    informed: int = 0
    epicenter: Optional[str] = None
    infections_by_channel: dict[str, int] = field(default_factory=dict)
    restricted_zones: tuple[str, ...] = ()

    def totals(self) -> ZoneCounts:
        out = ZoneCounts()
        for z in self.zones.values():
            out.susceptible += z.susceptible
            out.infected += z.infected
            out.recovered += z.recovered
            out.dead += z.dead
            out.immune += z.immune
        return out

    def population(self) -> int:
        return self.totals().total()

    def to_dict(self) -> dict:
        t = self.totals()
        return {
            "tick": self.tick,
            "zones": {
                zid: {
                    "susceptible": z.susceptible,
                    "infected": z.infected,
                    "recovered": z.recovered,
                    "dead": z.dead,
                    "immune": z.immune,
                }
                for zid, z in sorted(self.zones.items())
            },
            "totals": {
                "susceptible": t.susceptible,
                "infected": t.infected,
                "recovered": t.recovered,
                "dead": t.dead,
                "immune": t.immune,
            },
            "awareness": {
                "unaware": self.unaware,
                "rumor": self.rumor_aware,
                "informed": self.informed,
            },
            "epicenter": self.epicenter,
            "infections_by_channel": dict(sorted(self.infections_by_channel.items())),
            "restricted_zones": sorted(self.restricted_zones),
        }


@dataclass(slots=True)
class CaseRecord:
    """One infection episode of one avatar, as a node of the tree."""

    avatar: int
    episode: int
    generation: int
    start_tick: int
    zone: str
    channel: Optional[str]
    variant: str
    end_tick: Optional[int] = None
    outcome: Optional[str] = None  # recovered | died | cured | temp_cured

    @property
    def completed(self) -> bool:
        return self.end_tick is not None

    @property
    def attribution_zone(self) -> str:
        if self.channel in _NONSPATIAL_CHANNELS:
            return NONSPATIAL_ZONE
        return self.zone


class TransmissionTree:
    """Every infection record of a run, indexable by infector and generation."""

    def __init__(self) -> None:
        self.records: list[InfectionRecord] = []
        self.cases: dict[tuple[int, int], CaseRecord] = {}
        self._offspring: dict[tuple[int, int], int] = {}

    def add_record(self, record: InfectionRecord) -> None:
        key = (record.infectee, record.episode)
        if key in self.cases:
            raise ValueError(f"duplicate infection record for avatar {record.infectee} episode {record.episode}")
        self.records.append(record)
        self.cases[key] = CaseRecord(
            avatar=record.infectee,
            episode=record.episode,
            generation=record.generation,
            start_tick=record.tick,
            zone=record.zone,
            channel=record.channel,
            variant=record.variant,
        )
        if record.infector is not None:
            src = (record.infector.source_case, record.infector.source_episode)
            self._offspring[src] = self._offspring.get(src, 0) + 1

    def complete_case(self, avatar: int, episode: int, tick: int, outcome: str) -> None:
        case = self.cases[(avatar, episode)]
        case.end_tick = tick
        case.outcome = outcome

    def offspring_count(self, avatar: int, episode: int) -> int:
        return self._offspring.get((avatar, episode), 0)

    def index_cases(self) -> list[CaseRecord]:
        return [c for c in self.cases.values() if c.generation == 0]

    def ever_infected(self) -> int:
        return len({c.avatar for c in self.cases.values()})

    def max_generation(self) -> int:
        return max((c.generation for c in self.cases.values()), default=-1)


@dataclass
class R0Estimate:
    first_generation: Optional[float]
    weighted_all: Optional[float]
    per_generation: list[Optional[float]]
    completed_by_generation: list[int]

    @property
    def defined(self) -> bool:
        return self.weighted_all is not None


def estimate_r0(tree: TransmissionTree, up_to_generation: Optional[int] = None) -> R0Estimate:
    """Mean offspring counts from the tree, gated on completed cases.

    first_generation averages over generation-0 cases only; weighted_all is
    the case-count-weighted average across generations.  With no completed
    cases at all the estimate is explicitly undefined (None), not zero.
    """
    max_gen = tree.max_generation()
    if up_to_generation is not None:
        max_gen = min(max_gen, up_to_generation)
    sums = [0 for _ in range(max_gen + 1)]
    counts = [0 for _ in range(max_gen + 1)]
    for case in tree.cases.values():
        if not case.completed or case.generation > max_gen:
            continue
        g = case.generation
        sums[g] += tree.offspring_count(case.avatar, case.episode)
        counts[g] += 1
    per_generation: list[Optional[float]] = [
        (sums[g] / counts[g]) if counts[g] else None for g in range(max_gen + 1)
    ]
    total_cases = sum(counts)
    weighted = (sum(sums) / total_cases) if total_cases else None
    first = per_generation[0] if per_generation else None
    return R0Estimate(
        first_generation=first,
        weighted_all=weighted,
        per_generation=per_generation,
        completed_by_generation=counts,
    )


@dataclass
class ZoneR0Report:
    by_zone: dict[str, float]
    dispersion: Optional[float]  # CV of density-normalized zone R0


def r0_by_zone(tree: TransmissionTree, population_history: list[TickSnapshot]) -> ZoneR0Report:
    """Per-zone mean offspring of completed cases infected in that zone.

    Global-chat and direct-message infections are attributed to a
    "nonspatial" pseudo-zone.  The dispersion statistic is the coefficient
    of variation of zone R0 divided by the zone's mean living occupancy
    over the run (the density proxy); it covers spatial zones only.
    """
    sums: dict[str, float] = {}
    counts: dict[str, int] = {}
    for case in tree.cases.values():
        if not case.completed:
            continue
        zone = case.attribution_zone
        sums[zone] = sums.get(zone, 0.0) + tree.offspring_count(case.avatar, case.episode)
        counts[zone] = counts.get(zone, 0) + 1
    by_zone = {z: sums[z] / counts[z] for z in sums}

    density: dict[str, float] = {}
    if population_history:
        for snap in population_history:
            for zid, zc in snap.zones.items():
                living = zc.susceptible + zc.infected + zc.recovered
                density[zid] = density.get(zid, 0.0) + living
        for zid in density:
            density[zid] /= len(population_history)

    normalized = [
        by_zone[z] / density[z]
        for z in sorted(by_zone)
        if z != NONSPATIAL_ZONE and density.get(z, 0.0) > 0
    ]
    dispersion: Optional[float] = None
    if len(normalized) >= 2:
        mean = sum(normalized) / len(normalized)
        if mean > 0:
            var = sum((x - mean) ** 2 for x in normalized) / len(normalized)
            dispersion = math.sqrt(var) / mean
        else:
            dispersion = 0.0
    elif normalized:
        dispersion = 0.0
    return ZoneR0Report(by_zone=by_zone, dispersion=dispersion)


@dataclass
class RunSummary:
    population: int
    attack_rate: float
    peak_prevalence: float
    peak_tick: int
    deaths: int
    duration_ticks: int
    epidemic_occurred: bool
    epidemic_threshold: float
    ever_infected: int
    total_episodes: int
    r0_first_generation: Optional[float]
    r0_weighted: Optional[float]

    def to_dict(self) -> dict:
        return {
            "population": self.population,
            "attack_rate": self.attack_rate,
            "peak_prevalence": self.peak_prevalence,
            "peak_tick": self.peak_tick,
            "deaths": self.deaths,
            "duration_ticks": self.duration_ticks,
            "epidemic_occurred": self.epidemic_occurred,
            "epidemic_threshold": self.epidemic_threshold,
            "ever_infected": self.ever_infected,
            "total_episodes": self.total_episodes,
            "r0_first_generation": self.r0_first_generation,
            "r0_weighted": self.r0_weighted,
        }


def run_summary(
    snapshots: list[TickSnapshot],
    tree: TransmissionTree,
    epidemic_threshold: float = 0.05,
) -> RunSummary:
    """Headline numbers of a completed run."""
    if not snapshots:
        raise ValueError("run produced no snapshots")
    population = snapshots[0].population()
    peak_prev = 0.0
    peak_tick = 0
    for snap in snapshots:
        prev = snap.totals().infected / population if population else 0.0
        if prev > peak_prev:
            peak_prev = prev
            peak_tick = snap.tick
    ever = tree.ever_infected()
    attack = ever / population if population else 0.0
    estimate = estimate_r0(tree)
    return RunSummary(
        population=population,
        attack_rate=attack,
        peak_prevalence=peak_prev,
        peak_tick=peak_tick,
        deaths=snapshots[-1].totals().dead,
        duration_ticks=snapshots[-1].tick,
        epidemic_occurred=attack >= epidemic_threshold,
        epidemic_threshold=epidemic_threshold,
        ever_infected=ever,
        total_episodes=len(tree.cases),
        r0_first_generation=estimate.first_generation,
        r0_weighted=estimate.weighted_all,
    )


def snapshots_to_csv(snapshots: list[TickSnapshot]) -> str:
    """One row per tick: totals, awareness, epicenter, then per-zone counts."""
    if not snapshots:
        return ""
    zone_ids = sorted(snapshots[0].zones)
    header = [
        "tick",
        "susceptible",
        "infected",
        "recovered",
        "dead",
        "immune",
        "unaware",
        "rumor_aware",
        "informed",
        "epicenter",
    ]
    header += [f"infections_{c}" for c in CHANNEL_NAMES]
    for zid in zone_ids:
        header += [f"{zid}_{f}" for f in ("susceptible", "infected", "recovered", "dead")]
    lines = [",".join(header)]
    for snap in snapshots:
        t = snap.totals()
        row = [
            str(snap.tick),
            str(t.susceptible),
            str(t.infected),
            str(t.recovered),
            str(t.dead),
            str(t.immune),
            str(snap.unaware),
            str(snap.rumor_aware),
            str(snap.informed),
            snap.epicenter or "",
        ]
        row += [str(snap.infections_by_channel.get(c, 0)) for c in CHANNEL_NAMES]
        for zid in zone_ids:
            z = snap.zones[zid]
            row += [str(z.susceptible), str(z.infected), str(z.recovered), str(z.dead)]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def replay_snapshots(events: Iterable[dict]) -> list[TickSnapshot]:
    """Rebuild the per-tick snapshot series from an event log alone.

    The engine's log carries every state transition (spawns, moves,
    infections, recoveries, cures, deaths, awareness changes, restriction
    flips, the per-tick epicenter); folding it forward must reproduce the
    recorded snapshots exactly, which pins the log as a complete record.
    """
    zone_of: dict[int, str] = {}
    state_of: dict[int, str] = {}  # susceptible | infected | recovered | dead
    immune: set[int] = set()
    awareness: dict[int, str] = {}
    restricted: set[str] = set()
    zone_ids: set[str] = set()
    channel_cum: dict[str, int] = {}
    epicenter: Optional[str] = None

    snapshots: list[TickSnapshot] = []

    def emit(tick: int) -> None:
        zones = {zid: ZoneCounts() for zid in zone_ids}
        for avatar, zid in zone_of.items():
            z = zones[zid]
            state = state_of[avatar]
            if state == "susceptible":
                z.susceptible += 1
            elif state == "infected":
                z.infected += 1
            elif state == "recovered":
                z.recovered += 1
            else:
                z.dead += 1
            if avatar in immune and state != "dead":
                z.immune += 1
        unaware = sum(1 for a, s in state_of.items() if s != "dead" and awareness.get(a, "unaware") == "unaware")
        rumor = sum(1 for a, s in state_of.items() if s != "dead" and awareness.get(a) == "rumor")
        informed = sum(1 for a, s in state_of.items() if s != "dead" and awareness.get(a) == "informed")
        snapshots.append(
            TickSnapshot(
                tick=tick,
                zones=zones,
                unaware=unaware,
                rumor_aware=rumor,
                informed=informed,
                epicenter=epicenter,
                infections_by_channel=dict(channel_cum),
                restricted_zones=tuple(sorted(restricted)),
            )
        )

    current_tick: Optional[int] = None
    for ev in events:
        tick = ev.get("tick", 0)
        if current_tick is None:
            current_tick = tick
        elif tick != current_tick:
            emit(current_tick)
            current_tick = tick
        etype = ev["type"]
        if etype == "run_start":
            zone_ids.update(ev.get("zones", []))
        elif etype == "spawn":
            zone_of[ev["avatar"]] = ev["zone"]
            state_of[ev["avatar"]] = "susceptible"
            zone_ids.add(ev["zone"])
        elif etype == "move":
            zone_of[ev["avatar"]] = ev["dst"]
        elif etype == "infect":
            state_of[ev["avatar"]] = "infected"
            immune.discard(ev["avatar"])
            if ev.get("channel"):
                channel_cum[ev["channel"]] = channel_cum.get(ev["channel"], 0) + 1
        elif etype == "recover":
            state_of[ev["avatar"]] = "recovered"
            if ev.get("immune"):
                immune.add(ev["avatar"])
        elif etype == "cure":
            state_of[ev["avatar"]] = "recovered"
            if ev.get("immune"):
                immune.add(ev["avatar"])
        elif etype == "temp_cure":
            state_of[ev["avatar"]] = "recovered"
            immune.discard(ev["avatar"])
        elif etype == "death":
            state_of[ev["avatar"]] = "dead"
            immune.discard(ev["avatar"])
        elif etype == "immunity_lapse":
            immune.discard(ev["avatar"])
        elif etype == "awareness":
            awareness[ev["avatar"]] = ev["kind"]
        elif etype == "restriction":
            if ev["active"]:
                restricted.add(ev["zone"])
            else:
                restricted.discard(ev["zone"])
        elif etype == "epicenter":
            epicenter = ev["zone"]
    if current_tick is not None:
        emit(current_tick)
    return snapshots
