"""Staged disease definitions and per-agent infection progression.

A disease is an ordered chain of stages; each infected avatar walks the
chain as a little Markov process: a duration is drawn uniformly at stage
entry, a mortality hazard applies every tick, and completing the final
stage means recovery (with immunity per the definition).  The terminal
recovered/removed state is implicit rather than a stage.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from typing import Optional

from plaguesim.channels import CHANNEL_NAMES

ACTIVE = "active"
RECOVERED = "recovered"
DIED = "died"


@dataclass(frozen=True)
class StageSpec:
    name: str
    duration_min_days: int
    duration_max_days: int
    infectiousness_multiplier: float = 0.0
    symptoms_visible: bool = False
    mobility_modifier: float = 1.0
    withdrawal_probability_per_tick: float = 0.0
    mortality_hazard_per_tick: float = 0.0
    cure_sensitive: bool = False
    # Elevated withdrawal during the first N ticks of the stage (models
    # staged models where most withdrawal happens right after symptom onset).
    early_withdrawal_ticks: int = 0
    early_withdrawal_probability: Optional[float] = None

    def withdrawal_probability(self, ticks_in_stage: int) -> float:
        if (
            self.early_withdrawal_probability is not None
            and ticks_in_stage < self.early_withdrawal_ticks
        ):
            return self.early_withdrawal_probability
        return self.withdrawal_probability_per_tick


@dataclass(frozen=True)
class MutationPolicy:
    per_tick_probability: float = 0.0
    beta_perturbation_fraction: float = 0.0
    severity_perturbation_fraction: float = 0.0


@dataclass
class DiseaseDefinition:
    name: str
    stages: list[StageSpec]
    beta_by_channel: dict[str, float] = field(default_factory=dict)
    grants_immunity_on_recovery: bool = True
    immunity_duration_ticks: Optional[int] = None
    immune_can_transmit: bool = False
    mutation: Optional[MutationPolicy] = None

    def max_total_duration(self) -> int:
        return sum(s.duration_max_days for s in self.stages)


@dataclass(slots=True)
class InfectionState:
    stage_index: int = 0
    ticks_in_stage: int = 0
    scheduled_stage_duration: int = 1
    generation: int = 0
    infector: Optional[int] = None
    channel_of_infection: Optional[str] = None
    tick_of_infection: int = 0
    variant: str = ""

    def copy(self) -> "InfectionState":
        return InfectionState(
            stage_index=self.stage_index,
            ticks_in_stage=self.ticks_in_stage,
            scheduled_stage_duration=self.scheduled_stage_duration,
            generation=self.generation,
            infector=self.infector,
            channel_of_infection=self.channel_of_infection,
            tick_of_infection=self.tick_of_infection,
            variant=self.variant,
        )


def validate_disease(definition: DiseaseDefinition) -> list[str]:
    """Collect every invariant violation; an empty list means valid."""
    errors: list[str] = []
    if not definition.stages:
        errors.append("disease has no stages")
    for s in definition.stages:
        if s.duration_max_days < 1:
            errors.append(f"stage {s.name!r}: duration_max_days must be positive")
        if s.duration_min_days < 0:
            errors.append(f"stage {s.name!r}: duration_min_days must be nonnegative")
        if s.duration_min_days > s.duration_max_days:
            errors.append(
                f"stage {s.name!r}: duration_min {s.duration_min_days} exceeds max {s.duration_max_days}"
            )
        if s.infectiousness_multiplier < 0:
            errors.append(f"stage {s.name!r}: infectiousness_multiplier must be nonnegative")
        for label, p in [
            ("mobility_modifier", s.mobility_modifier),
            ("withdrawal_probability_per_tick", s.withdrawal_probability_per_tick),
            ("mortality_hazard_per_tick", s.mortality_hazard_per_tick),
        ]:
            if not 0.0 <= p <= 1.0:
                errors.append(f"stage {s.name!r}: {label} {p} outside [0, 1]")
        if s.early_withdrawal_probability is not None and not 0.0 <= s.early_withdrawal_probability <= 1.0:
            errors.append(
                f"stage {s.name!r}: early_withdrawal_probability {s.early_withdrawal_probability} outside [0, 1]"
            )
    for channel, beta in sorted(definition.beta_by_channel.items()):
        if channel not in CHANNEL_NAMES:
            errors.append(f"unknown channel {channel!r}")
        if not 0.0 <= beta <= 1.0:
            errors.append(f"beta for channel {channel!r} is {beta}, outside [0, 1]")
    if definition.immunity_duration_ticks is not None and definition.immunity_duration_ticks < 1:
        errors.append("immunity_duration_ticks must be positive when present")
    if definition.mutation is not None:
        m = definition.mutation
        for label, p in [
            ("per_tick_probability", m.per_tick_probability),
            ("beta_perturbation_fraction", m.beta_perturbation_fraction),
            ("severity_perturbation_fraction", m.severity_perturbation_fraction),
        ]:
            if not 0.0 <= p <= 1.0:
                errors.append(f"mutation {label} {p} outside [0, 1]")
    return errors


def draw_stage_duration(stage: StageSpec, rng: random.Random) -> int:
    """Uniform integer duration in [min, max]; zero-length stages last 0 ticks."""
    return rng.randint(stage.duration_min_days, stage.duration_max_days)


def begin_infection(
    definition: DiseaseDefinition,
    rng: random.Random,
    tick: int,
    generation: int = 0,
    infector: Optional[int] = None,
    channel: Optional[str] = None,
) -> InfectionState:
    """Fresh infection entering stage 0 with a drawn duration."""
    return InfectionState(
        stage_index=0,
        ticks_in_stage=0,
        scheduled_stage_duration=draw_stage_duration(definition.stages[0], rng),
        generation=generation,
        infector=infector,
        channel_of_infection=channel,
        tick_of_infection=tick,
        variant=definition.name,
    )


def advance_infection(
    state: InfectionState, definition: DiseaseDefinition, rng: random.Random
) -> str:
    """Advance one tick: apply mortality, then progress the stage clock.

    Returns ACTIVE, RECOVERED, or DIED.  The state is mutated in place;
    after RECOVERED or DIED it must not be advanced again.
    """
    stage = definition.stages[state.stage_index]
    if stage.mortality_hazard_per_tick > 0 and rng.random() < stage.mortality_hazard_per_tick:
        return DIED
    state.ticks_in_stage += 1
    while state.ticks_in_stage >= state.scheduled_stage_duration:
        if state.stage_index + 1 >= len(definition.stages):
            return RECOVERED
        state.stage_index += 1
        state.ticks_in_stage = 0
        state.scheduled_stage_duration = draw_stage_duration(
            definition.stages[state.stage_index], rng
        )
        if state.scheduled_stage_duration > 0:
            break
    return ACTIVE


def effective_infectiousness(
    state: InfectionState, definition: DiseaseDefinition, channel: str
) -> float:
    """Channel beta scaled by the current stage multiplier, clamped to [0, 1].

    A channel the disease does not use contributes zero.
    """
    beta = definition.beta_by_channel.get(channel, 0.0)
    if beta <= 0.0:
        return 0.0
    stage = definition.stages[state.stage_index]
    return min(1.0, max(0.0, beta * stage.infectiousness_multiplier))


def _lineage_name(name: str) -> str:
    base, sep, suffix = name.rpartition(".m")
    if sep and suffix.isdigit():
        return f"{base}.m{int(suffix) + 1}"
    return f"{name}.m1"


def mutate_disease(definition: DiseaseDefinition, rng: random.Random) -> DiseaseDefinition:
    """Possibly spawn a perturbed variant.

    With the policy's per-tick probability, every channel beta is multiplied
    by a factor drawn uniformly from [1-f, 1+f] and clamped to [0, 1], and
    mortality hazards are perturbed the same way with the severity fraction.
    Otherwise the definition is returned unchanged.
    """
    policy = definition.mutation
    if policy is None or rng.random() >= policy.per_tick_probability:
        return definition
    f_beta = policy.beta_perturbation_fraction
    f_sev = policy.severity_perturbation_fraction
    new_betas = {}
    for channel in sorted(definition.beta_by_channel):
        factor = rng.uniform(1.0 - f_beta, 1.0 + f_beta)
        new_betas[channel] = min(1.0, max(0.0, definition.beta_by_channel[channel] * factor))
    new_stages = []
    for stage in definition.stages:
        factor = rng.uniform(1.0 - f_sev, 1.0 + f_sev)
        hazard = min(1.0, max(0.0, stage.mortality_hazard_per_tick * factor))
        new_stages.append(replace(stage, mortality_hazard_per_tick=hazard))
    return DiseaseDefinition(
        name=_lineage_name(definition.name),
        stages=new_stages,
        beta_by_channel=new_betas,
        grants_immunity_on_recovery=definition.grants_immunity_on_recovery,
        immunity_duration_ticks=definition.immunity_duration_ticks,
        immune_can_transmit=definition.immune_can_transmit,
        mutation=policy,
    )


def smallpox_default(beta_proximity: float = 0.0015) -> DiseaseDefinition:
    """Five-stage smallpox-style disease used as the staged-model default.

    Incubation is split into a cure-sensitive first window (exactly 3 ticks)
    and an insensitive remainder (7-11); the prodromal stage is the peak of
    infectiousness, and the long symptomatic stage transmits at a tenth of
    prodromal while most avatars withdraw during its first 3 ticks.
    """
    return DiseaseDefinition(
        name="smallpox",
        stages=[
            StageSpec(
                name="incubating-sensitive",
                duration_min_days=3,
                duration_max_days=3,
                infectiousness_multiplier=0.0,
                cure_sensitive=True,
            ),
            StageSpec(
                name="incubating-insensitive",
                duration_min_days=7,
                duration_max_days=11,
                infectiousness_multiplier=0.0,
            ),
            StageSpec(
                name="prodromal",
                duration_min_days=3,
                duration_max_days=5,
                infectiousness_multiplier=1.0,
            ),
            StageSpec(
                name="symptomatic",
                duration_min_days=14,
                duration_max_days=17,
                infectiousness_multiplier=0.1,
                symptoms_visible=True,
                mobility_modifier=0.5,
                withdrawal_probability_per_tick=0.1,
                mortality_hazard_per_tick=0.05,
                early_withdrawal_ticks=3,
                early_withdrawal_probability=0.5,
            ),
        ],
        beta_by_channel={"proximity": beta_proximity},
        grants_immunity_on_recovery=True,
    )
