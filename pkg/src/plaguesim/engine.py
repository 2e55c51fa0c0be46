"""The deterministic tick loop.

Phase order within a tick is fixed and test-pinned:

    drain interventions -> information diffusion -> movement ->
    contact enumeration -> exposure resolution -> stage progression
    and mutation -> snapshot

One seeded stream drives a run, consumed only in this order, in avatar-id
order within each phase; identical config and seed therefore reproduce the
run byte for byte.  Intervention programs (cure quests, masks, temporary
cures) draw their uptake coins from per-program streams derived from the
run seed and the program's activation serial, so a purely observational
intervention like a symptom mask cannot perturb the epidemic's randomness,
nor the lottery of any other program.

Interventions submitted from outside (the control service) land on a queue
and are drained at the next tick boundary, never retroactively; the loop is
the only thing that mutates run state.
"""

from __future__ import annotations

import random
import threading
import zlib
from dataclasses import dataclass
from typing import Callable, Optional

from plaguesim import behavior as behavior_mod
from plaguesim import intervention as iv_mod
from plaguesim import transmission as tx
from plaguesim.disease import (
    DIED,
    RECOVERED,
    DiseaseDefinition,
    InfectionState,
    advance_infection,
    begin_infection,
    effective_infectiousness,
    mutate_disease,
)
from plaguesim.channels import ChannelKind
from plaguesim.metrics import (
    RunSummary,
    TickSnapshot,
    TransmissionTree,
    ZoneCounts,
    run_summary,
)
from plaguesim.scenario import ScenarioConfig
from plaguesim.transmission import InfectionRecord
from plaguesim.world import (
    AwarenessState,
    Population,
    WorldMap,
    build_world,
    generate_population,
)

_INTERVENTION_STREAM_SALT = 0x9E3779B97F4A7C15


@dataclass
class RunResult:
    seed: int
    scenario: str
    snapshots: list[TickSnapshot]
    tree: TransmissionTree
    summary: RunSummary
    events: Optional[list[dict]] = None


@dataclass
class _Program:
    """An ongoing intervention process (cure quest, mask, temporary cure).

    Each program owns an RNG stream derived from the run seed and its
    activation serial: adding or removing one program never shifts the
    coins of another, or of the epidemic itself.
    """

    intervention: iv_mod.Intervention
    activated_tick: int
    serial: int
    rng: random.Random


class Simulation:
    """One live run of a scenario; step() advances exactly one tick."""

    def __init__(
        self,
        config: ScenarioConfig,
        seed: Optional[int] = None,
        collect_events: bool = False,
        event_sink: Optional[Callable[[dict], None]] = None,
        record_exposure: bool = False,
    ) -> None:
        self.config = config
        self.seed = config.seed if seed is None else seed
        self.rng = random.Random(self.seed)
        self.world: WorldMap = build_world(config.zones)
        self.population: Population = generate_population(config.population, self.world, self.seed)
        base = config.disease
        self.diseases: dict[str, DiseaseDefinition] = {base.name: base}
        self.active_variant = base.name
        self.tick = 0
        self.finished = False
        self.tree = TransmissionTree()
        self.snapshots: list[TickSnapshot] = []
        self.epicenter: Optional[str] = None
        self.restrictions: dict[str, frozenset[int]] = {}
        self.infections_by_channel: dict[str, int] = {}
        self.contact_counts: dict[str, int] = {}
        self.programs: list[_Program] = []
        self._program_serial = 0
        self._schedule: dict[int, list[iv_mod.Intervention]] = {}
        for tick, iv in config.schedule:
            self._schedule.setdefault(tick, []).append(iv)
        self._pending_scheduled = sum(len(v) for v in self._schedule.values())
        self._queue: list[iv_mod.Intervention] = []
        self._queue_lock = threading.Lock()
        self._events: Optional[list[dict]] = [] if collect_events else None
        self._event_sink = event_sink
        self.exposure_trace: Optional[dict[int, list[tuple[int, float]]]] = (
            {} if record_exposure else None
        )
        self._infected_this_tick: set[int] = set()
        self._tick_infectious: list = []
        self._carriers: dict[int, InfectionState] = {}  # recovered-but-transmitting
        self._seed_run()

    # -- events ----------------------------------------------------------

    def _emit(self, event: dict) -> None:
        if self._events is not None:
            self._events.append(event)
        if self._event_sink is not None:
            self._event_sink(event)

    @property
    def events(self) -> Optional[list[dict]]:
        return self._events

    # -- setup -----------------------------------------------------------

    def _seed_run(self) -> None:
        self._emit(
            {
                "type": "run_start",
                "tick": 0,
                "scenario": self.config.name,
                "seed": self.seed,
                "population": len(self.population),
                "zones": self.world.zone_ids,
            }
        )
        for a in self.population.avatars:
            self._emit({"type": "spawn", "tick": 0, "avatar": a.id, "zone": a.zone})
        candidates = [a for a in self.population.avatars if a.alive]
        if self.config.index_zone is not None:
            candidates = [a for a in candidates if a.zone == self.config.index_zone]
        count = min(self.config.index_count, len(candidates))
        chosen = sorted(self.rng.sample([a.id for a in candidates], count)) if count else []
        definition = self.diseases[self.active_variant]
        for aid in chosen:
            avatar = self.population.avatars[aid]
            avatar.episodes += 1
            avatar.ever_infected = True
            avatar.infection = begin_infection(definition, self.rng, 0)
            record = InfectionRecord(
                infectee=aid,
                episode=avatar.episodes,
                channel=None,
                tick=0,
                generation=0,
                zone=avatar.zone,
                variant=definition.name,
                infector=None,
            )
            self.tree.add_record(record)
            self._emit_infect(record)
        self.epicenter = behavior_mod.epicenter_estimate(self.population, self.diseases)
        self._emit({"type": "epicenter", "tick": 0, "zone": self.epicenter})
        self._snapshot()
        self._check_finished()

    def _emit_infect(self, record: InfectionRecord) -> None:
        infector = None
        if record.infector is not None:
            infector = {
                "kind": record.infector.kind,
                "avatar": record.infector.avatar,
                "pet": record.infector.pet,
                "owner": record.infector.owner,
                "source_case": record.infector.source_case,
                "source_episode": record.infector.source_episode,
            }
        self._emit(
            {
                "type": "infect",
                "tick": record.tick,
                "avatar": record.infectee,
                "episode": record.episode,
                "zone": record.zone,
                "channel": record.channel,
                "generation": record.generation,
                "variant": record.variant,
                "infector": infector,
            }
        )

    # -- external control --------------------------------------------------

    def submit_intervention(self, intervention: iv_mod.Intervention) -> None:
        """Queue a command for the next tick boundary (thread-safe)."""
        errors = iv_mod.validate_intervention(intervention, self.world)
        if errors:
            raise iv_mod.InterventionError("; ".join(errors))
        with self._queue_lock:
            self._queue.append(intervention)

    # -- tick phases -------------------------------------------------------

    def step(self) -> Optional[TickSnapshot]:
        """Advance one tick; returns its snapshot, or None if finished."""
        if self.finished or self.tick >= self.config.horizon_ticks:
            self.finished = True
            return None
        self.tick += 1
        self._phase_interventions()
        self._phase_information()
        self._phase_movement()
        contacts = self._phase_contacts()
        self._phase_exposures(contacts)
        self._phase_progression()
        snap = self._snapshot()
        self._check_finished()
        return snap

    def run(self) -> RunResult:
        while not self.finished:
            self.step()
        return RunResult(
            seed=self.seed,
            scenario=self.config.name,
            snapshots=self.snapshots,
            tree=self.tree,
            summary=run_summary(self.snapshots, self.tree, self.config.epidemic_threshold),
            events=self._events,
        )

    def _check_finished(self) -> None:
        if self.tick >= self.config.horizon_ticks:
            self.finished = True
            return
        infections_alive = any(
            a.infection is not None for a in self.population.avatars if a.alive
        )
        pets_carrying = any(p.carrying() for p in self.population.pets.values())
        scheduled_left = any(t > self.tick and ivs for t, ivs in self._schedule.items())
        with self._queue_lock:
            queued = bool(self._queue)
        if not (infections_alive or pets_carrying or scheduled_left or queued or self._carriers):
            self.finished = True

    # Phase 1: drain commands, then run ongoing intervention programs.

    def _phase_interventions(self) -> None:
        batch = list(self._schedule.pop(self.tick, []))
        with self._queue_lock:
            batch.extend(self._queue)
            self._queue.clear()
        for iv in batch:
            self._apply_intervention(iv)
        for program in self.programs:
            self._run_program(program)

    def _apply_intervention(self, iv: iv_mod.Intervention) -> None:
        errors = iv_mod.validate_intervention(iv, self.world)
        if errors:
            self._emit(
                {
                    "type": "intervention_rejected",
                    "tick": self.tick,
                    "intervention": iv_mod.intervention_to_dict(iv),
                    "errors": errors,
                }
            )
            return
        detail: dict = {}
        if isinstance(iv, iv_mod.Warning_):
            informed = 0
            audience_zones = None if iv.audience == iv_mod.GLOBAL_AUDIENCE else set(iv.audience)
            for a in self.population.avatars:
                if not a.alive:
                    continue
                if audience_zones is not None and a.zone not in audience_zones:
                    continue
                if behavior_mod.set_informed(a, self.tick):
                    informed += 1
                    self._emit(
                        {"type": "awareness", "tick": self.tick, "avatar": a.id, "kind": "informed", "accuracy": 1.0}
                    )
            detail["informed"] = informed
        elif isinstance(iv, iv_mod.AreaRestriction):
            for z in iv.zones:
                self.world.zones[z].restricted = True
                residents = frozenset(a.id for a in self.population.avatars if a.alive and a.zone == z)
                self.restrictions[z] = residents
                self._emit({"type": "restriction", "tick": self.tick, "zone": z, "active": True})
        elif isinstance(iv, iv_mod.LiftRestriction):
            for z in iv.zones:
                self.world.zones[z].restricted = False
                self.restrictions.pop(z, None)
                self._emit({"type": "restriction", "tick": self.tick, "zone": z, "active": False})
        elif isinstance(iv, iv_mod.Hotfix):
            for definition in self.diseases.values():
                definition.beta_by_channel[iv.channel] = iv.new_beta
            detail["channel"] = iv.channel
            detail["new_beta"] = iv.new_beta
        elif isinstance(iv, (iv_mod.CureQuest, iv_mod.SymptomMask, iv_mod.TemporaryCure)):
            # Stable stream identity: kind + activation tick + occurrence, so
            # adding or dropping an unrelated program never reseeds this one.
            occurrence = sum(
                1 for p in self.programs
                if p.intervention.kind == iv.kind and p.activated_tick == self.tick
            )
            tag = f"{iv.kind}:{self.tick}:{occurrence}"
            program_seed = (self.seed ^ _INTERVENTION_STREAM_SALT) ^ zlib.crc32(tag.encode())
            self._program_serial += 1
            self.programs.append(
                _Program(
                    intervention=iv,
                    activated_tick=self.tick,
                    serial=self._program_serial,
                    rng=random.Random(program_seed),
                )
            )
            detail["prevalence_at_activation"] = sum(
                1 for a in self.population.avatars if a.alive and a.infection is not None
            )
        self._emit(
            {
                "type": "intervention_applied",
                "tick": self.tick,
                "intervention": iv_mod.intervention_to_dict(iv),
                "detail": detail,
            }
        )

    def _run_program(self, program: _Program) -> None:
        iv = program.intervention
        rng = program.rng
        if isinstance(iv, iv_mod.CureQuest):
            if iv.start_tick is not None and self.tick < iv.start_tick:
                return
            for a in self.population.avatars:
                if not a.alive or a.infection is None:
                    continue
                if rng.random() >= iv.uptake_probability_per_tick:
                    continue
                definition = self.diseases[a.infection.variant]
                stage = definition.stages[a.infection.stage_index]
                if iv.requires_cure_sensitive_stage and not stage.cure_sensitive:
                    continue
                if rng.random() < iv.efficacy:
                    self._end_infection(a, outcome="cured", immune=iv.grants_immunity, immune_until=None)
                    self._emit(
                        {"type": "cure", "tick": self.tick, "avatar": a.id, "immune": iv.grants_immunity}
                    )
        elif isinstance(iv, iv_mod.SymptomMask):
            for a in self.population.avatars:
                if not a.alive or a.infection is None or a.masked:
                    continue
                stage = self.diseases[a.infection.variant].stages[a.infection.stage_index]
                if not stage.symptoms_visible:
                    continue
                if rng.random() < iv.uptake_probability_per_tick:
                    a.masked = True
                    self._emit({"type": "mask", "tick": self.tick, "avatar": a.id})
        elif isinstance(iv, iv_mod.TemporaryCure):
            for a in self.population.avatars:
                if not a.alive or a.infection is None:
                    continue
                if rng.random() >= iv.uptake_probability_per_tick:
                    continue
                if rng.random() < iv.efficacy:
                    self._end_infection(a, outcome="temp_cured", immune=False, immune_until=None)
                    self._emit({"type": "temp_cure", "tick": self.tick, "avatar": a.id})

    def _end_infection(
        self, avatar, outcome: str, immune: bool, immune_until: Optional[int]
    ) -> None:
        self.tree.complete_case(avatar.id, avatar.episodes, self.tick, outcome)
        avatar.infection = None
        avatar.masked = False
        avatar.immune = immune
        avatar.immune_until = immune_until

    # Phase 2: epicenter estimate, self-awareness, rumor diffusion.

    def _phase_information(self) -> None:
        self.epicenter = behavior_mod.epicenter_estimate(self.population, self.diseases)
        self._emit({"type": "epicenter", "tick": self.tick, "zone": self.epicenter})
        for ev in behavior_mod.spread_information(
            self.population,
            self.config.channels,
            self.config.info,
            self.diseases,
            self.rng,
            self.tick,
        ):
            self._emit(ev)

    # Phase 3: withdrawal coins, pet dismiss/resummon, one-hop moves.

    def _phase_movement(self) -> None:
        params = self.config.channels
        pets = self.population.pets
        for a in self.population.avatars:
            if not a.alive:
                continue
            a.withdrawn = False
            mobility = 1.0
            if a.infection is not None:
                stage = self.diseases[a.infection.variant].stages[a.infection.stage_index]
                wd = stage.withdrawal_probability(a.infection.ticks_in_stage)
                if wd > 0 and self.rng.random() < wd:
                    a.withdrawn = True
                mobility = stage.mobility_modifier
            for pid in a.pets:
                pet = pets[pid]
                if pet.status == "summoned":
                    if params.pet_dismiss_probability > 0 and self.rng.random() < params.pet_dismiss_probability:
                        tx.pet_dismiss(pet)
                        self._emit({"type": "pet_dismiss", "tick": self.tick, "pet": pid, "owner": a.id, "zone": a.zone})
                else:
                    if params.pet_resummon_probability > 0 and self.rng.random() < params.pet_resummon_probability:
                        tx.pet_resummon(pet, a.zone, self.tick, params.pet_shedding_ticks)
                        self._emit(
                            {
                                "type": "pet_resummon",
                                "tick": self.tick,
                                "pet": pid,
                                "owner": a.id,
                                "zone": a.zone,
                                "carrying": pet.carrying(),
                            }
                        )
            if a.withdrawn:
                continue
            dest = behavior_mod.decide_move(a, self.world, self.epicenter, mobility, self.rng)
            if dest is not None and dest != a.zone:
                src = a.zone
                a.zone = dest
                for pid in a.pets:
                    if pets[pid].status == "summoned":
                        pets[pid].zone = dest
                self._emit({"type": "move", "tick": self.tick, "avatar": a.id, "src": src, "dst": dest})

    # Phase 4: participation coins, then pure contact enumeration.

    def _infectious_entities(self):
        out = []
        for a in self.population.avatars:
            if not a.alive:
                continue
            if a.infection is not None:
                definition = self.diseases[a.infection.variant]
                if definition.stages[a.infection.stage_index].infectiousness_multiplier > 0:
                    out.append((a, a.infection, definition))
            elif a.id in self._carriers:
                state = self._carriers[a.id]
                out.append((a, state, self.diseases[state.variant]))
        return out

    def _phase_contacts(self) -> tx.Contacts:
        infectious = self._infectious_entities()
        self._tick_infectious = infectious
        zone_chat_live = any(
            effective_infectiousness(s, d, ChannelKind.ZONE_CHAT.value) > 0 for _, s, d in infectious
        )
        global_chat_live = any(
            effective_infectiousness(s, d, ChannelKind.GLOBAL_CHAT.value) > 0 for _, s, d in infectious
        )
        dm_sources = [
            a.id
            for a, s, d in infectious
            if effective_infectiousness(s, d, ChannelKind.DIRECT_MESSAGE.value) > 0
        ]
        participation = tx.draw_participation(
            self.population,
            self.config.channels,
            self.rng,
            zone_chat_live=zone_chat_live,
            global_chat_live=global_chat_live,
            dm_sources=dm_sources,
        )
        contacts = tx.enumerate_contacts(
            self.world,
            self.population,
            self.tick,
            infectious=infectious,
            participation=participation,
            restrictions=self.restrictions,
            diseases=self.diseases,
        )
        self.contact_counts = contacts.count_by_channel()
        self._emit({"type": "contact_counts", "tick": self.tick, "counts": self.contact_counts})
        return contacts

    # Phase 5: exposure resolution, then pet acquisition.

    def _phase_exposures(self, contacts: tx.Contacts) -> None:
        trace = None
        if self.exposure_trace is not None:
            trace = []
            self.exposure_trace[self.tick] = trace
        records = tx.resolve_exposures(
            contacts, self.population, self.diseases, self.rng, self.tick, trace=trace
        )
        self._infected_this_tick = set()
        for record in records:
            self.tree.add_record(record)
            self.infections_by_channel[record.channel] = (
                self.infections_by_channel.get(record.channel, 0) + 1
            )
            self._infected_this_tick.add(record.infectee)
            self._emit_infect(record)
        for ev in tx.expose_pets(self.population, self._tick_infectious, self.rng, self.tick):
            self._emit(ev)

    # Phase 6: stage progression, deaths, immunity bookkeeping, mutation.

    def _phase_progression(self) -> None:
        for a in self.population.avatars:
            if not a.alive or a.infection is None or a.id in self._infected_this_tick:
                continue
            definition = self.diseases[a.infection.variant]
            outcome = advance_infection(a.infection, definition, self.rng)
            if outcome == DIED:
                self.tree.complete_case(a.id, a.episodes, self.tick, "died")
                a.infection = None
                a.masked = False
                a.alive = False
                a.withdrawn = False
                for pid in a.pets:
                    pet = self.population.pets[pid]
                    if pet.status == "summoned":
                        tx.pet_dismiss(pet)
                self._emit({"type": "death", "tick": self.tick, "avatar": a.id, "zone": a.zone})
            elif outcome == RECOVERED:
                immune = definition.grants_immunity_on_recovery
                immune_until = None
                if immune and definition.immunity_duration_ticks is not None:
                    immune_until = self.tick + definition.immunity_duration_ticks
                if immune and definition.immune_can_transmit:
                    carrier = a.infection.copy()
                    carrier.stage_index = len(definition.stages) - 1
                    self._carriers[a.id] = carrier
                self.tree.complete_case(a.id, a.episodes, self.tick, "recovered")
                a.infection = None
                a.masked = False
                a.immune = immune
                a.immune_until = immune_until
                self._emit({"type": "recover", "tick": self.tick, "avatar": a.id, "immune": immune})
        for a in self.population.avatars:
            if a.alive and a.immune and a.immune_until is not None and self.tick >= a.immune_until:
                a.immune = False
                a.immune_until = None
                self._carriers.pop(a.id, None)
                self._emit({"type": "immunity_lapse", "tick": self.tick, "avatar": a.id})
        for ev in tx.clear_expired_pet_infections(self.population, self.tick):
            self._emit(ev)
        base = self.diseases[self.active_variant]
        if base.mutation is not None:
            host = next(
                (a for a in self.population.avatars if a.alive and a.infection is not None),
                None,
            )
            if host is not None:
                parent = self.diseases[host.infection.variant]
                variant = mutate_disease(parent, self.rng)
                if variant is not parent:
                    self.diseases[variant.name] = variant
                    host.infection.variant = variant.name
                    self._emit(
                        {
                            "type": "mutation",
                            "tick": self.tick,
                            "variant": variant.name,
                            "parent": parent.name,
                            "host": host.id,
                        }
                    )

    # Phase 7: snapshot.

    def _snapshot(self) -> TickSnapshot:
        zones = {zid: ZoneCounts() for zid in self.world.zone_ids}
        unaware = rumor = informed = 0
        for a in self.population.avatars:
            z = zones[a.zone]
            if not a.alive:
                z.dead += 1
                continue
            if a.infection is not None:
                z.infected += 1
            elif a.ever_infected:
                z.recovered += 1
            else:
                z.susceptible += 1
            if a.immune:
                z.immune += 1
            kind = a.awareness.kind
            if kind == AwarenessState.UNAWARE:
                unaware += 1
            elif kind == AwarenessState.RUMOR:
                rumor += 1
            else:
                informed += 1
        snap = TickSnapshot(
            tick=self.tick,
            zones=zones,
            unaware=unaware,
            rumor_aware=rumor,
            informed=informed,
            epicenter=self.epicenter,
            infections_by_channel=dict(self.infections_by_channel),
            restricted_zones=tuple(sorted(self.restrictions)),
        )
        self.snapshots.append(snap)
        return snap
