"""Shared builders for small, fully controlled test worlds."""

from __future__ import annotations

import random

import pytest

from plaguesim.disease import DiseaseDefinition, StageSpec, begin_infection
from plaguesim.world import (
    Avatar,
    AwarenessState,
    BehaviorProfile,
    Population,
    SocialGraph,
    Zone,
    build_world,
)


def make_world(n_zones: int = 3, line: bool = True):
    """A line of zones z0 - z1 - ... - z{n-1}."""
    zones = []
    for i in range(n_zones):
        adjacent = set()
        if line and i + 1 < n_zones:
            adjacent.add(f"z{i + 1}")
        zones.append(Zone(id=f"z{i}", adjacent=adjacent))
    return build_world(zones)


def make_avatar(aid: int, zone: str = "z0", move_probability: float = 0.0) -> Avatar:
    return Avatar(
        id=aid,
        zone=zone,
        vocation="test",
        level=1,
        heal_capability=0.5,
        behavior=BehaviorProfile(curiosity=0.5, risk_aversion=0.5, move_probability_per_tick=move_probability),
        awareness=AwarenessState(),
    )


def make_population(count: int, zone: str = "z0") -> Population:
    avatars = [make_avatar(i, zone) for i in range(count)]
    return Population(avatars=avatars, pets={}, social=SocialGraph())


def single_stage_disease(
    beta_by_channel: dict[str, float],
    duration: tuple[int, int] = (3, 3),
    name: str = "testpox",
    **stage_kwargs,
) -> DiseaseDefinition:
    return DiseaseDefinition(
        name=name,
        stages=[
            StageSpec(
                name="ill",
                duration_min_days=duration[0],
                duration_max_days=duration[1],
                infectiousness_multiplier=1.0,
                **stage_kwargs,
            )
        ],
        beta_by_channel=dict(beta_by_channel),
    )


def infect(avatar: Avatar, disease: DiseaseDefinition, rng=None, tick: int = 0, generation: int = 0):
    rng = rng or random.Random(0)
    avatar.episodes += 1
    avatar.ever_infected = True
    avatar.infection = begin_infection(disease, rng, tick, generation=generation)
    return avatar.infection


@pytest.fixture
def rng():
    return random.Random(12345)
