"""The control playbook: timestamped commands a developer applies to a run.

Seven kinds cover the three phases of an outbreak: warnings preempt rumors,
area restrictions and hotfixes contain the epidemic phase, and cure quests,
symptom masks, and temporary cures play out the recovery phase.  Commands
arrive either from the scenario schedule or live over the control service;
either way they are drained once per tick boundary by the simulation loop,
which is the only thing allowed to mutate run state.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from plaguesim.channels import CHANNEL_NAMES
from plaguesim.world import WorldMap

GLOBAL_AUDIENCE = "global"


class InterventionError(ValueError):
    """Raised when an intervention is malformed or references unknown zones."""


@dataclass(frozen=True)
class Warning_:
    """Broadcast correct information to an audience (zones or everyone)."""

    audience: Union[str, tuple[str, ...]] = GLOBAL_AUDIENCE
    accuracy_hint: float = 1.0
    kind: str = field(default="warning", init=False)


@dataclass(frozen=True)
class AreaRestriction:
    zones: tuple[str, ...] = ()
    kind: str = field(default="area_restriction", init=False)


@dataclass(frozen=True)
class LiftRestriction:
    zones: tuple[str, ...] = ()
    kind: str = field(default="lift_restriction", init=False)


@dataclass(frozen=True)
class CureQuest:
    uptake_probability_per_tick: float = 0.5
    efficacy: float = 1.0
    grants_immunity: bool = True
    requires_cure_sensitive_stage: bool = False
    start_tick: Optional[int] = None
    kind: str = field(default="cure_quest", init=False)


@dataclass(frozen=True)
class SymptomMask:
    uptake_probability_per_tick: float = 0.5
    kind: str = field(default="symptom_mask", init=False)


@dataclass(frozen=True)
class TemporaryCure:
    uptake_probability_per_tick: float = 0.5
    efficacy: float = 1.0
    kind: str = field(default="temporary_cure", init=False)


@dataclass(frozen=True)
class Hotfix:
    channel: str = "proximity"
    new_beta: float = 0.0
    kind: str = field(default="hotfix", init=False)


Intervention = Union[
    Warning_, AreaRestriction, LiftRestriction, CureQuest, SymptomMask, TemporaryCure, Hotfix
]

_KINDS = {
    "warning": Warning_,
    "area_restriction": AreaRestriction,
    "lift_restriction": LiftRestriction,
    "cure_quest": CureQuest,
    "symptom_mask": SymptomMask,
    "temporary_cure": TemporaryCure,
    "hotfix": Hotfix,
}


def validate_intervention(iv: Intervention, world: Optional[WorldMap] = None) -> list[str]:
    """Collect every violation; an empty list means the command is applicable."""
    errors: list[str] = []

    def check_prob(label: str, p: float) -> None:
        if not 0.0 <= p <= 1.0:
            errors.append(f"{iv.kind}: {label} {p} outside [0, 1]")

    if isinstance(iv, Warning_):
        check_prob("accuracy_hint", iv.accuracy_hint)
        if iv.audience != GLOBAL_AUDIENCE:
            if not iv.audience:
                errors.append("warning: audience must be 'global' or a nonempty zone set")
            elif world is not None:
                for z in iv.audience:
                    if z not in world.zones:
                        errors.append(f"warning: unknown zone {z!r}")
    elif isinstance(iv, (AreaRestriction, LiftRestriction)):
        if not iv.zones:
            errors.append(f"{iv.kind}: zone set must not be empty")
        elif world is not None:
            for z in iv.zones:
                if z not in world.zones:
                    errors.append(f"{iv.kind}: unknown zone {z!r}")
    elif isinstance(iv, CureQuest):
        check_prob("uptake_probability_per_tick", iv.uptake_probability_per_tick)
        check_prob("efficacy", iv.efficacy)
        if iv.start_tick is not None and iv.start_tick < 0:
            errors.append("cure_quest: start_tick must be nonnegative")
    elif isinstance(iv, SymptomMask):
        check_prob("uptake_probability_per_tick", iv.uptake_probability_per_tick)
    elif isinstance(iv, TemporaryCure):
        check_prob("uptake_probability_per_tick", iv.uptake_probability_per_tick)
        check_prob("efficacy", iv.efficacy)
    elif isinstance(iv, Hotfix):
        if iv.channel not in CHANNEL_NAMES:
            errors.append(f"hotfix: unknown channel {iv.channel!r}")
        check_prob("new_beta", iv.new_beta)
    else:
        errors.append(f"unknown intervention type {type(iv).__name__}")
    return errors


def intervention_from_dict(data: dict) -> Intervention:
    """Parse the wire/scenario representation of an intervention."""
    if not isinstance(data, dict) or "kind" not in data:
        raise InterventionError("intervention must be an object with a 'kind' field")
    kind = data["kind"]
    cls = _KINDS.get(kind)
    if cls is None:
        raise InterventionError(f"unknown intervention kind {kind!r}")
    params = {k: v for k, v in data.items() if k != "kind"}
    if cls is Warning_ and isinstance(params.get("audience"), list):
        params["audience"] = tuple(params["audience"])
    if cls in (AreaRestriction, LiftRestriction) and isinstance(params.get("zones"), list):
        params["zones"] = tuple(params["zones"])
    try:
        return cls(**params)
    except TypeError as exc:
        raise InterventionError(f"bad parameters for {kind!r}: {exc}") from None


def intervention_to_dict(iv: Intervention) -> dict:
    data: dict = {"kind": iv.kind}
    if isinstance(iv, Warning_):
        data["audience"] = (
            iv.audience if iv.audience == GLOBAL_AUDIENCE else list(iv.audience)
        )
        data["accuracy_hint"] = iv.accuracy_hint
    elif isinstance(iv, (AreaRestriction, LiftRestriction)):
        data["zones"] = list(iv.zones)
    elif isinstance(iv, CureQuest):
        data.update(
            uptake_probability_per_tick=iv.uptake_probability_per_tick,
            efficacy=iv.efficacy,
            grants_immunity=iv.grants_immunity,
            requires_cure_sensitive_stage=iv.requires_cure_sensitive_stage,
        )
        if iv.start_tick is not None:
            data["start_tick"] = iv.start_tick
    elif isinstance(iv, SymptomMask):
        data["uptake_probability_per_tick"] = iv.uptake_probability_per_tick
    elif isinstance(iv, TemporaryCure):
        data.update(
            uptake_probability_per_tick=iv.uptake_probability_per_tick,
            efficacy=iv.efficacy,
        )
    elif isinstance(iv, Hotfix):
        data.update(channel=iv.channel, new_beta=iv.new_beta)
    return data
