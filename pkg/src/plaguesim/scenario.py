"""Scenario files: one JSON document describing a reproducible experiment.

Top-level sections: run, world, population, disease, behavior, channels,
schedule.  Loading validates everything at once and reports every violation
rather than stopping at the first.  The three bundled scenarios (gray-plague,
corrupted-blood, homogeneous-baseline) resolve by name.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional, Union

from plaguesim.behavior import InfoParams
from plaguesim.disease import (
    DiseaseDefinition,
    MutationPolicy,
    StageSpec,
    validate_disease,
)
from plaguesim.intervention import (
    Intervention,
    InterventionError,
    intervention_from_dict,
    validate_intervention,
)
from plaguesim.transmission import ChannelParams
from plaguesim.world import Distribution, PopulationSpec, WorldValidationError, Zone, build_world

BUNDLED = ("gray-plague", "corrupted-blood", "homogeneous-baseline")


class ScenarioError(ValueError):
    """Raised with the full list of semantic violations, newline-joined."""


@dataclass
class ScenarioConfig:
    name: str
    zones: list[Zone]
    population: PopulationSpec
    disease: DiseaseDefinition
    info: InfoParams = field(default_factory=InfoParams)
    channels: ChannelParams = field(default_factory=ChannelParams)
    schedule: list[tuple[int, Intervention]] = field(default_factory=list)
    tick_length_days: float = 1.0
    horizon_ticks: int = 100
    seed: int = 0
    epidemic_threshold: float = 0.05
    index_count: int = 1
    index_zone: Optional[str] = None  # None = density-weighted random placement
    comment: str = ""

    def validate(self) -> list[str]:
        errors: list[str] = []
        try:
            world = build_world(self.zones)
        except WorldValidationError as exc:
            errors.append(f"world: {exc}")
            world = None
        errors.extend(f"population: {e}" for e in self.population.validate())
        errors.extend(f"disease: {e}" for e in validate_disease(self.disease))
        errors.extend(f"behavior: {e}" for e in self.info.validate())
        errors.extend(f"channels: {e}" for e in self.channels.validate())
        if self.tick_length_days <= 0:
            errors.append("run: tick_length_days must be positive")
        if self.horizon_ticks < 0:
            errors.append("run: horizon_ticks must be nonnegative")
        if not 0.0 <= self.epidemic_threshold <= 1.0:
            errors.append("run: epidemic_threshold outside [0, 1]")
        if self.index_count < 0:
            errors.append("run: index_cases count must be nonnegative")
        if self.index_zone is not None and world is not None and self.index_zone not in world.zones:
            errors.append(f"run: index placement zone {self.index_zone!r} unknown")
        for tick, iv in self.schedule:
            if not 0 <= tick <= self.horizon_ticks:
                errors.append(f"schedule: tick {tick} outside run horizon 0..{self.horizon_ticks}")
            for msg in validate_intervention(iv, world):
                errors.append(f"schedule: tick {tick}: {msg}")
        return errors


def _parse_distribution(data: Union[dict, None], fallback: Distribution) -> Distribution:
    if data is None:
        return fallback
    return Distribution(
        kind=data.get("kind", "uniform"),
        low=data.get("low", 0.0),
        high=data.get("high", 1.0),
        mean=data.get("mean", 0.5),
        std=data.get("std", 0.15),
        value=data.get("value", 0.5),
    )


def _parse_zones(data: list[dict]) -> list[Zone]:
    zones = []
    for z in data:
        zones.append(
            Zone(
                id=str(z["id"]),
                name=z.get("name", str(z["id"])),
                density_weight=float(z.get("density_weight", 1.0)),
                adjacent=set(map(str, z.get("adjacent", []))),
                teleport_links=set(map(str, z.get("teleport_links", []))),
                restricted=bool(z.get("restricted", False)),
                is_city=bool(z.get("is_city", False)),
            )
        )
    return zones


def _parse_population(data: dict) -> PopulationSpec:
    spec = PopulationSpec()
    spec.count = int(data.get("count", spec.count))
    if "vocation_mix" in data:
        spec.vocation_mix = {str(k): float(v) for k, v in data["vocation_mix"].items()}
    if "level_range" in data:
        lo, hi = data["level_range"]
        spec.level_range = (int(lo), int(hi))
    spec.heal_capability = _parse_distribution(data.get("heal_capability"), spec.heal_capability)
    for voc, d in data.get("heal_capability_by_vocation", {}).items():
        spec.heal_capability_by_vocation[str(voc)] = _parse_distribution(d, spec.heal_capability)
    spec.social_degree_mean = float(data.get("social_degree_mean", spec.social_degree_mean))
    spec.pets_per_avatar_mean = float(data.get("pets_per_avatar_mean", spec.pets_per_avatar_mean))
    spec.curiosity = _parse_distribution(data.get("curiosity"), spec.curiosity)
    spec.risk_aversion = _parse_distribution(data.get("risk_aversion"), spec.risk_aversion)
    spec.move_probability = _parse_distribution(data.get("move_probability"), spec.move_probability)
    return spec


def _parse_disease(data: dict) -> DiseaseDefinition:
    stages = []
    for s in data.get("stages", []):
        stages.append(
            StageSpec(
                name=str(s.get("name", f"stage-{len(stages)}")),
                duration_min_days=int(s.get("duration_min_days", 1)),
                duration_max_days=int(s.get("duration_max_days", 1)),
                infectiousness_multiplier=float(s.get("infectiousness_multiplier", 0.0)),
                symptoms_visible=bool(s.get("symptoms_visible", False)),
                mobility_modifier=float(s.get("mobility_modifier", 1.0)),
                withdrawal_probability_per_tick=float(s.get("withdrawal_probability_per_tick", 0.0)),
                mortality_hazard_per_tick=float(s.get("mortality_hazard_per_tick", 0.0)),
                cure_sensitive=bool(s.get("cure_sensitive", False)),
                early_withdrawal_ticks=int(s.get("early_withdrawal_ticks", 0)),
                early_withdrawal_probability=(
                    float(s["early_withdrawal_probability"])
                    if s.get("early_withdrawal_probability") is not None
                    else None
                ),
            )
        )
    mutation = None
    if data.get("mutation"):
        m = data["mutation"]
        mutation = MutationPolicy(
            per_tick_probability=float(m.get("per_tick_probability", 0.0)),
            beta_perturbation_fraction=float(m.get("beta_perturbation_fraction", 0.0)),
            severity_perturbation_fraction=float(m.get("severity_perturbation_fraction", 0.0)),
        )
    return DiseaseDefinition(
        name=str(data.get("name", "disease")),
        stages=stages,
        beta_by_channel={str(k): float(v) for k, v in data.get("beta_by_channel", {}).items()},
        grants_immunity_on_recovery=bool(data.get("grants_immunity_on_recovery", True)),
        immunity_duration_ticks=(
            int(data["immunity_duration_ticks"])
            if data.get("immunity_duration_ticks") is not None
            else None
        ),
        immune_can_transmit=bool(data.get("immune_can_transmit", False)),
        mutation=mutation,
    )


def scenario_from_dict(data: dict) -> ScenarioConfig:
    """Build a config from parsed JSON; raises ScenarioError listing every problem."""
    problems: list[str] = []
    run = data.get("run", {})
    behavior = data.get("behavior", {})
    channels = data.get("channels", {})

    index = run.get("index_cases", {})
    index_zone = None
    placement = index.get("placement", "random")
    if isinstance(placement, dict):
        index_zone = str(placement.get("zone"))
    elif placement != "random":
        index_zone = str(placement)

    schedule: list[tuple[int, Intervention]] = []
    for i, entry in enumerate(data.get("schedule", [])):
        try:
            tick = int(entry["tick"])
            schedule.append((tick, intervention_from_dict(entry["intervention"])))
        except (KeyError, TypeError, ValueError, InterventionError) as exc:
            problems.append(f"schedule entry {i}: {exc}")

    config = ScenarioConfig(
        name=str(data.get("name", "scenario")),
        zones=_parse_zones(data.get("world", {}).get("zones", [])),
        population=_parse_population(data.get("population", {})),
        disease=_parse_disease(data.get("disease", {})),
        info=InfoParams(
            beta_zone_chat=float(behavior.get("info_beta", {}).get("zone_chat", 0.0)),
            beta_global_chat=float(behavior.get("info_beta", {}).get("global_chat", 0.0)),
            beta_direct_message=float(behavior.get("info_beta", {}).get("direct_message", 0.0)),
            rumor_decay=float(behavior.get("rumor_decay", 0.8)),
        ),
        channels=ChannelParams(
            zone_chat_participation=float(channels.get("zone_chat_participation", 0.8)),
            global_chat_participation=float(channels.get("global_chat_participation", 0.2)),
            dm_send_probability=float(channels.get("dm_send_probability", 0.5)),
            pet_dismiss_probability=float(channels.get("pet_dismiss_probability", 0.0)),
            pet_resummon_probability=float(channels.get("pet_resummon_probability", 0.0)),
            pet_shedding_ticks=int(channels.get("pet_shedding_ticks", 3)),
        ),
        schedule=sorted(schedule, key=lambda e: e[0]),
        tick_length_days=float(run.get("tick_length_days", 1.0)),
        horizon_ticks=int(run.get("horizon_ticks", 100)),
        seed=int(run.get("seed", 0)),
        epidemic_threshold=float(run.get("epidemic_threshold", 0.05)),
        index_count=int(index.get("count", 1)),
        index_zone=index_zone,
        comment=str(data.get("comment", "")),
    )
    # Behavior distributions ride in the behavior section when present.
    if "curiosity" in behavior:
        config.population.curiosity = _parse_distribution(behavior["curiosity"], config.population.curiosity)
    if "risk_aversion" in behavior:
        config.population.risk_aversion = _parse_distribution(
            behavior["risk_aversion"], config.population.risk_aversion
        )
    if "move_probability" in behavior:
        config.population.move_probability = _parse_distribution(
            behavior["move_probability"], config.population.move_probability
        )
    problems.extend(config.validate())
    if problems:
        raise ScenarioError("\n".join(problems))
    return config


def load_scenario(path_or_name: Union[str, Path]) -> ScenarioConfig:
    """Load a scenario file by path, or a bundled scenario by name."""
    path = Path(path_or_name)
    if not path.exists() and str(path_or_name) in BUNDLED:
        name = str(path_or_name).replace("-", "_")
        text = resources.files("plaguesim.scenarios").joinpath(f"{name}.json").read_text()
    else:
        if not path.exists():
            raise ScenarioError(f"scenario file {path_or_name!r} not found (bundled: {', '.join(BUNDLED)})")
        text = path.read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(
            f"parse error in {path_or_name}: line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from None
    return scenario_from_dict(data)
