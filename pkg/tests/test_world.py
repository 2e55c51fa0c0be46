from __future__ import annotations

from collections import deque

import pytest

from plaguesim.world import (
    Distribution,
    PopulationSpec,
    PopulationValidationError,
    WorldValidationError,
    Zone,
    build_world,
    generate_population,
)


def bfs_distance(world, start: str, goal: str) -> int:
    """Independent oracle: plain breadth-first search over both edge kinds."""
    seen = {start: 0}
    queue = deque([start])
    while queue:
        zid = queue.popleft()
        if zid == goal:
            return seen[zid]
        z = world.zones[zid]
        for other in z.adjacent | z.teleport_links:
            if other not in seen:
                seen[other] = seen[zid] + 1
                queue.append(other)
    return -1


def test_single_zone_world():
    world = build_world([Zone(id="only")])
    assert world.zone_ids == ["only"]
    assert world.neighbors("only") == []
    assert world.distance("only", "only") == 0


def test_teleport_shortcut_beats_the_line():
    zones = [Zone(id=f"z{i}", adjacent={f"z{i+1}"} if i < 4 else set()) for i in range(5)]
    zones[0].teleport_links.add("z4")
    world = build_world(zones)
    assert world.distance("z0", "z4") == 1
    assert world.distance("z0", "z4") == bfs_distance(world, "z0", "z4")
    assert world.distance("z1", "z4") == bfs_distance(world, "z1", "z4") == 2  # via z0's teleport


def test_asymmetric_adjacency_is_symmetrized():
    world = build_world([Zone(id="a", adjacent={"b"}), Zone(id="b")])
    assert "a" in world.zones["b"].adjacent
    assert world.neighbors("b") == ["a"]


def test_dangling_reference_names_the_zone():
    with pytest.raises(WorldValidationError, match="ghost"):
        build_world([Zone(id="a", adjacent={"ghost"})])


def test_empty_world_rejected():
    with pytest.raises(WorldValidationError):
        build_world([])


def test_restricted_zone_stays_in_graph():
    world = build_world([Zone(id="a", adjacent={"b"}), Zone(id="b", restricted=True)])
    assert "b" in world.zones
    assert world.distance("a", "b") == 1
    assert world.restricted_zones() == {"b"}


@pytest.fixture
def two_zone_world():
    return build_world([Zone(id="big", density_weight=3.0, adjacent={"small"}), Zone(id="small", density_weight=1.0)])


def test_population_count_and_initial_state(two_zone_world):
    spec = PopulationSpec(count=2000)
    pop = generate_population(spec, two_zone_world, seed=7)
    assert len(pop) == 2000
    assert all(a.alive and a.infection is None and not a.immune for a in pop.avatars)
    assert all(a.awareness.kind == "unaware" for a in pop.avatars)
    assert sum(pop.by_zone().values()) == 2000


def test_empty_population(two_zone_world):
    pop = generate_population(PopulationSpec(count=0), two_zone_world, seed=7)
    assert len(pop) == 0
    assert pop.social.edges() == []


def test_density_proportional_placement(two_zone_world):
    # Law of large numbers against the 3:1 weights.
    pop = generate_population(PopulationSpec(count=100_000, social_degree_mean=0.0), two_zone_world, seed=11)
    counts = pop.by_zone()
    ratio = counts["big"] / counts["small"]
    assert abs(ratio - 3.0) / 3.0 < 0.02


def test_same_seed_same_population(two_zone_world):
    spec = PopulationSpec(count=500, pets_per_avatar_mean=0.5)
    a = generate_population(spec, two_zone_world, seed=3)
    b = generate_population(spec, two_zone_world, seed=3)
    assert [(x.zone, x.vocation, x.level, x.heal_capability) for x in a.avatars] == [
        (x.zone, x.vocation, x.level, x.heal_capability) for x in b.avatars
    ]
    assert a.social.out_edges == b.social.out_edges
    assert {p.id: (p.owner, p.zone) for p in a.pets.values()} == {
        p.id: (p.owner, p.zone) for p in b.pets.values()
    }


def test_pets_and_edges_reference_existing_avatars(two_zone_world):
    spec = PopulationSpec(count=300, pets_per_avatar_mean=0.8, social_degree_mean=5.0)
    pop = generate_population(spec, two_zone_world, seed=9)
    ids = {a.id for a in pop.avatars}
    for pet in pop.pets.values():
        assert pet.owner in ids
        assert pet.id in pop.avatars[pet.owner].pets
    for src, dst in pop.social.edges():
        assert src in ids and dst in ids
        assert src != dst


def test_social_mean_degree(two_zone_world):
    spec = PopulationSpec(count=5000, social_degree_mean=4.0)
    pop = generate_population(spec, two_zone_world, seed=13)
    degree = sum(len(v) for v in pop.social.out_edges.values()) / 5000
    assert abs(degree - 4.0) < 0.2


def test_heal_capability_within_bounds(two_zone_world):
    spec = PopulationSpec(
        count=2000,
        heal_capability=Distribution(kind="normal", mean=0.8, std=0.5),
    )
    pop = generate_population(spec, two_zone_world, seed=21)
    assert all(0.0 <= a.heal_capability <= 1.0 for a in pop.avatars)


def test_invalid_spec_collects_errors(two_zone_world):
    spec = PopulationSpec(count=-5, social_degree_mean=-1.0)
    spec.vocation_mix = {}
    errors = spec.validate()
    assert len(errors) >= 3
    with pytest.raises(PopulationValidationError):
        generate_population(spec, two_zone_world, seed=0)


def test_vocation_gates_heal_distribution(two_zone_world):
    spec = PopulationSpec(
        count=2000,
        vocation_mix={"healer": 0.5, "brute": 0.5},
        heal_capability_by_vocation={
            "healer": Distribution(kind="uniform", low=0.8, high=1.0),
            "brute": Distribution(kind="uniform", low=0.0, high=0.2),
        },
    )
    pop = generate_population(spec, two_zone_world, seed=31)
    healers = [a.heal_capability for a in pop.avatars if a.vocation == "healer"]
    brutes = [a.heal_capability for a in pop.avatars if a.vocation == "brute"]
    assert min(healers) >= 0.8
    assert max(brutes) <= 0.2
