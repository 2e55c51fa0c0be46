"""World map and population synthesis.

The world is a small graph of zones (adjacency plus teleport links) with
relative density weights that steer where avatars spawn.  The population is
a set of heterogeneous avatars with a directed social graph (who messages
whom) and optional pets.  Everything here is pure construction: given the
same spec and seed, the output is bit-identical.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional

from plaguesim.disease import InfectionState


class WorldValidationError(ValueError):
    """Raised when a world layout references unknown zones or is empty."""


class PopulationValidationError(ValueError):
    """Raised when a population spec has invalid distribution parameters."""


@dataclass
class Zone:
    id: str
    name: str = ""
    density_weight: float = 1.0
    adjacent: set[str] = field(default_factory=set)
    teleport_links: set[str] = field(default_factory=set)
    restricted: bool = False
    is_city: bool = False

    def __post_init__(self):
        if not self.name:
            self.name = self.id


@dataclass
class WorldMap:
    """Validated zone graph with precomputed hop distances.

    Hop distance treats adjacency and teleport links identically (one hop
    each); teleports are just extra edges.
    """

    zones: dict[str, Zone]
    _distances: dict[str, dict[str, int]] = field(default_factory=dict, repr=False)

    @property
    def zone_ids(self) -> list[str]:
        return sorted(self.zones)

    def neighbors(self, zone_id: str) -> list[str]:
        z = self.zones[zone_id]
        return sorted(z.adjacent | z.teleport_links)

    def distance(self, a: str, b: str) -> int:
        """Shortest hop count between two zones; -1 if unreachable."""
        return self._distances[a].get(b, -1)

    def restricted_zones(self) -> set[str]:
        return {zid for zid, z in self.zones.items() if z.restricted}


def _bfs_distances(zones: dict[str, Zone], start: str) -> dict[str, int]:
    dist = {start: 0}
    frontier = [start]
    while frontier:
        nxt = []
        for zid in frontier:
            z = zones[zid]
            for other in sorted(z.adjacent | z.teleport_links):
                if other not in dist:
                    dist[other] = dist[zid] + 1
                    nxt.append(other)
        frontier = nxt
    return dist


def build_world(zone_specs: list[Zone]) -> WorldMap:
    """Validate a zone list into a WorldMap.

    Adjacency is symmetrized: an edge declared on either endpoint holds for
    both.  A dangling reference (adjacency or teleport naming an unknown
    zone) fails validation naming the offending zone.
    """
    if not zone_specs:
        raise WorldValidationError("world must contain at least one zone")
    zones: dict[str, Zone] = {}
    for z in zone_specs:
        if z.id in zones:
            raise WorldValidationError(f"duplicate zone id {z.id!r}")
        if z.density_weight < 0:
            raise WorldValidationError(f"zone {z.id!r} has negative density weight")
        zones[z.id] = Zone(
            id=z.id,
            name=z.name,
            density_weight=z.density_weight,
            adjacent=set(z.adjacent),
            teleport_links=set(z.teleport_links),
            restricted=z.restricted,
            is_city=z.is_city,
        )
    if sum(z.density_weight for z in zones.values()) <= 0:
        raise WorldValidationError("density weights must sum to a positive value")
    for z in zones.values():
        for ref in sorted(z.adjacent | z.teleport_links):
            if ref not in zones:
                raise WorldValidationError(
                    f"zone {z.id!r} references unknown zone {ref!r}"
                )
            if ref == z.id:
                raise WorldValidationError(f"zone {z.id!r} links to itself")
    # Symmetrize both edge kinds.
    for z in zones.values():
        for ref in list(z.adjacent):
            zones[ref].adjacent.add(z.id)
        for ref in list(z.teleport_links):
            zones[ref].teleport_links.add(z.id)
    world = WorldMap(zones=zones)
    for zid in zones:
        world._distances[zid] = _bfs_distances(zones, zid)
    return world


@dataclass(slots=True)
class BehaviorProfile:
    curiosity: float = 0.5
    risk_aversion: float = 0.5
    move_probability_per_tick: float = 0.3


@dataclass(slots=True)
class AwarenessState:
    """What an avatar believes about the outbreak.

    Unaware avatars carry no accuracy.  Informed (a developer warning) is
    absorbing and always has accuracy 1; rumor accuracy decays by hop.
    """

    UNAWARE = "unaware"
    RUMOR = "rumor"
    INFORMED = "informed"

    kind: str = UNAWARE
    accuracy: float = 0.0
    acquired_tick: int = -1


@dataclass(slots=True)
class Avatar:
    id: int
    zone: str
    vocation: str
    level: int
    heal_capability: float
    behavior: BehaviorProfile
    awareness: AwarenessState
    infection: Optional[InfectionState] = None
    immune: bool = False
    immune_until: Optional[int] = None
    alive: bool = True
    pets: list[int] = field(default_factory=list)
    masked: bool = False
    withdrawn: bool = False
    episodes: int = 0
    ever_infected: bool = False

    def is_susceptible(self) -> bool:
        return self.alive and self.infection is None and not self.immune


PET_SUMMONED = "summoned"
PET_DISMISSED = "dismissed"


@dataclass(slots=True)
class Pet:
    id: int
    owner: int
    zone: str
    status: str = PET_SUMMONED
    carried_infection: Optional[InfectionState] = None
    carried_source: Optional[int] = None
    carried_source_episode: int = 0
    shedding_until: int = -1

    def carrying(self) -> bool:
        return self.carried_infection is not None


@dataclass
class SocialGraph:
    """Directed messaging relationships, kept as sorted out-adjacency lists."""

    out_edges: dict[int, list[int]] = field(default_factory=dict)

    def edges(self) -> list[tuple[int, int]]:
        return [(a, b) for a in sorted(self.out_edges) for b in self.out_edges[a]]

    def out_neighbors(self, avatar_id: int) -> list[int]:
        return self.out_edges.get(avatar_id, [])


@dataclass
class Distribution:
    """A parametrized distribution truncated to [0, 1].

    kinds: uniform(low, high), normal(mean, std) clamped to the interval,
    constant(value).
    """

    kind: str = "uniform"
    low: float = 0.0
    high: float = 1.0
    mean: float = 0.5
    std: float = 0.15
    value: float = 0.5

    def validate(self) -> list[str]:
        errors = []
        if self.kind not in ("uniform", "normal", "constant"):
            errors.append(f"unknown distribution kind {self.kind!r}")
        if self.kind == "uniform" and not (0.0 <= self.low <= self.high <= 1.0):
            errors.append(f"uniform bounds [{self.low}, {self.high}] invalid")
        if self.kind == "normal" and self.std < 0:
            errors.append("normal std must be nonnegative")
        if self.kind == "constant" and not 0.0 <= self.value <= 1.0:
            errors.append(f"constant value {self.value} outside [0, 1]")
        return errors

    def sample(self, rng: random.Random) -> float:
        if self.kind == "uniform":
            return rng.uniform(self.low, self.high)
        if self.kind == "normal":
            return min(1.0, max(0.0, rng.gauss(self.mean, self.std)))
        return self.value


@dataclass
class PopulationSpec:
    count: int = 2000
    vocation_mix: dict[str, float] = field(
        default_factory=lambda: {"knight": 0.3, "sorcerer": 0.25, "druid": 0.25, "paladin": 0.2}
    )
    level_range: tuple[int, int] = (1, 60)
    heal_capability: Distribution = field(default_factory=Distribution)
    heal_capability_by_vocation: dict[str, Distribution] = field(default_factory=dict)
    social_degree_mean: float = 4.0
    pets_per_avatar_mean: float = 0.0
    curiosity: Distribution = field(
        default_factory=lambda: Distribution(kind="normal", mean=0.7, std=0.15)
    )
    risk_aversion: Distribution = field(
        default_factory=lambda: Distribution(kind="normal", mean=0.3, std=0.15)
    )
    move_probability: Distribution = field(
        default_factory=lambda: Distribution(kind="constant", value=0.3)
    )

    def validate(self) -> list[str]:
        errors = []
        if self.count < 0:
            errors.append("population count must be nonnegative")
        if not self.vocation_mix:
            errors.append("vocation_mix must not be empty")
        elif any(w < 0 for w in self.vocation_mix.values()):
            errors.append("vocation_mix weights must be nonnegative")
        elif sum(self.vocation_mix.values()) <= 0:
            errors.append("vocation_mix weights must sum to a positive value")
        if self.level_range[0] > self.level_range[1] or self.level_range[0] < 1:
            errors.append(f"level_range {self.level_range} is empty or below 1")
        if self.social_degree_mean < 0:
            errors.append("social_degree_mean must be nonnegative")
        if self.pets_per_avatar_mean < 0:
            errors.append("pets_per_avatar_mean must be nonnegative")
        for label, dist in [
            ("heal_capability", self.heal_capability),
            ("curiosity", self.curiosity),
            ("risk_aversion", self.risk_aversion),
            ("move_probability", self.move_probability),
            *((f"heal_capability[{v}]", d) for v, d in sorted(self.heal_capability_by_vocation.items())),
        ]:
            errors.extend(f"{label}: {e}" for e in dist.validate())
        return errors


@dataclass
class Population:
    avatars: list[Avatar]
    pets: dict[int, Pet]
    social: SocialGraph

    def __len__(self) -> int:
        return len(self.avatars)

    def by_zone(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for a in self.avatars:
            counts[a.zone] = counts.get(a.zone, 0) + 1
        return counts


def _weighted_pick(rng: random.Random, items: list[str], weights: list[float]) -> str:
    total = sum(weights)
    x = rng.random() * total
    acc = 0.0
    for item, w in zip(items, weights):
        acc += w
        if x < acc:
            return item
    return items[-1]


def _poisson(rng: random.Random, mean: float) -> int:
    # Knuth's method; means here are small (pets per avatar).
    if mean <= 0:
        return 0
    import math

    limit = math.exp(-mean)
    k = 0
    p = 1.0
    while True:
        p *= rng.random()
        if p <= limit:
            return k
        k += 1


def generate_population(spec: PopulationSpec, world: WorldMap, seed: int) -> Population:
    """Stochastically generate the avatar population for a world.

    Zone placement is proportional to density weight; the social graph has
    independent edges with the requested mean out-degree; all avatars start
    alive, susceptible, and unaware.
    """
    errors = spec.validate()
    if errors:
        raise PopulationValidationError("; ".join(errors))
    rng = random.Random(seed)
    zone_ids = world.zone_ids
    zone_weights = [world.zones[z].density_weight for z in zone_ids]
    vocations = sorted(spec.vocation_mix)
    voc_weights = [spec.vocation_mix[v] for v in vocations]
    lo, hi = spec.level_range

    avatars: list[Avatar] = []
    pets: dict[int, Pet] = {}
    next_pet_id = 0
    for i in range(spec.count):
        zone = _weighted_pick(rng, zone_ids, zone_weights)
        vocation = _weighted_pick(rng, vocations, voc_weights)
        level = rng.randint(lo, hi)
        heal_dist = spec.heal_capability_by_vocation.get(vocation, spec.heal_capability)
        avatar = Avatar(
            id=i,
            zone=zone,
            vocation=vocation,
            level=level,
            heal_capability=heal_dist.sample(rng),
            behavior=BehaviorProfile(
                curiosity=spec.curiosity.sample(rng),
                risk_aversion=spec.risk_aversion.sample(rng),
                move_probability_per_tick=spec.move_probability.sample(rng),
            ),
            awareness=AwarenessState(),
        )
        for _ in range(_poisson(rng, spec.pets_per_avatar_mean)):
            pets[next_pet_id] = Pet(id=next_pet_id, owner=i, zone=zone)
            avatar.pets.append(next_pet_id)
            next_pet_id += 1
        avatars.append(avatar)

    social = SocialGraph()
    n = spec.count
    if n > 1 and spec.social_degree_mean > 0:
        p_edge = min(1.0, spec.social_degree_mean / (n - 1))
        for a in range(n):
            # Binomial out-degree, then distinct targets: row-wise G(n, p).
            degree = sum(1 for _ in range(n - 1) if rng.random() < p_edge) if n <= 64 else _binomial(rng, n - 1, p_edge)
            degree = min(degree, n - 1)
            if degree:
                targets = rng.sample(range(n - 1), degree)
                social.out_edges[a] = sorted(t if t < a else t + 1 for t in targets)
    return Population(avatars=avatars, pets=pets, social=social)


def _binomial(rng: random.Random, n: int, p: float) -> int:
    # Inverse-transform on a normal approximation is biased for tiny p; the
    # waiting-time (geometric skip) method is exact and O(n*p).
    if p <= 0:
        return 0
    if p >= 1:
        return n
    import math

    log_q = math.log(1.0 - p)
    count = 0
    pos = 0
    while True:
        u = rng.random()
        skip = int(math.log(u) / log_q) + 1
        pos += skip
        if pos > n:
            return count
        count += 1
