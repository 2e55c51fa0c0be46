"""Per-tick contact enumeration and exposure resolution on every channel.

Channels:

- proximity: every (infectious, susceptible) pair co-located in a zone.
- zone_chat: infectious chat participants x susceptible participants in the
  same zone (participation is a per-tick coin flip per avatar).
- global_chat: as zone chat, world-wide, ignoring location.
- direct_message: social-graph edges from infectious senders, gated by a
  per-tick send probability per edge.
- pet_vector: pets that acquired a frozen infection snapshot shed it onto
  susceptibles in their zone for a few ticks after being re-summoned.

Contacts are held group-wise (a source set crossed with a target set) so a
dense zone does not materialize every pair; `Contacts.to_events()` expands
the same information into individual ContactEvent records.  Enumeration is
pure and consumes no randomness: participation coins are flipped beforehand
(see `draw_participation`) and only resolution draws from the run stream.

An AreaRestriction suppresses proximity and zone-chat contacts of avatars
inside the zone that are not registered residents (whoever was in the zone
when the restriction landed); global chat and direct messages are never
suppressed.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional

from plaguesim.channels import CHANNEL_ORDER, ChannelKind
from plaguesim.disease import (
    DiseaseDefinition,
    InfectionState,
    begin_infection,
    effective_infectiousness,
)
from plaguesim.world import Avatar, Pet, Population, WorldMap


@dataclass
class ChannelParams:
    zone_chat_participation: float = 0.8
    global_chat_participation: float = 0.2
    dm_send_probability: float = 0.5
    pet_dismiss_probability: float = 0.0
    pet_resummon_probability: float = 0.0
    pet_shedding_ticks: int = 3

    def validate(self) -> list[str]:
        errors = []
        for label, p in [
            ("zone_chat_participation", self.zone_chat_participation),
            ("global_chat_participation", self.global_chat_participation),
            ("dm_send_probability", self.dm_send_probability),
            ("pet_dismiss_probability", self.pet_dismiss_probability),
            ("pet_resummon_probability", self.pet_resummon_probability),
        ]:
            if not 0.0 <= p <= 1.0:
                errors.append(f"{label} {p} outside [0, 1]")
        if self.pet_shedding_ticks < 0:
            errors.append("pet_shedding_ticks must be nonnegative")
        return errors


@dataclass(frozen=True, slots=True)
class SourceRef:
    """Origin of a contact: an infectious avatar or a shedding pet."""

    kind: str  # "avatar" | "pet" | "carrier"
    avatar: Optional[int] = None
    pet: Optional[int] = None
    owner: Optional[int] = None
    source_case: int = -1  # avatar whose case is credited in the tree
    source_episode: int = 0
    generation: int = 0
    variant: str = ""


@dataclass(frozen=True, slots=True)
class ContactEvent:
    source: SourceRef
    target: int
    channel: ChannelKind
    tick: int


@dataclass
class ContactGroup:
    """A dense block of contacts: every source reaches every target.

    Targets must be unique and sorted by avatar id; resolution relies on
    that to keep its RNG consumption order canonical.
    """

    channel: ChannelKind
    zone: Optional[str]
    sources: list[SourceRef]
    effectiveness: list[float]  # per source, on this channel
    targets: list[int]

    def pair_count(self) -> int:
        return len(self.sources) * len(self.targets)


@dataclass
class Contacts:
    tick: int
    groups: list[ContactGroup] = field(default_factory=list)

    def count_by_channel(self) -> dict[str, int]:
        counts = {c.value: 0 for c in CHANNEL_ORDER}
        for g in self.groups:
            counts[g.channel.value] += g.pair_count()
        return counts

    def to_events(self) -> list[ContactEvent]:
        events = []
        for g in self.groups:
            for src in g.sources:
                for tgt in g.targets:
                    events.append(ContactEvent(source=src, target=tgt, channel=g.channel, tick=self.tick))
        return events

    def contacts_per_target(self) -> dict[int, list[int]]:
        """Target avatar id -> indices of groups exposing it."""
        per_target: dict[int, list[int]] = {}
        for idx, g in enumerate(self.groups):
            for tgt in g.targets:
                per_target.setdefault(tgt, []).append(idx)
        return per_target


@dataclass(frozen=True, slots=True)
class InfectorRef:
    kind: str  # "avatar" | "pet" | "carrier"
    avatar: Optional[int] = None
    pet: Optional[int] = None
    owner: Optional[int] = None
    source_case: int = -1
    source_episode: int = 0


@dataclass(frozen=True, slots=True)
class InfectionRecord:
    infectee: int
    episode: int
    channel: Optional[str]
    tick: int
    generation: int
    zone: str
    variant: str
    infector: Optional[InfectorRef] = None


@dataclass
class Participation:
    """Pre-drawn per-tick coin flips, so enumeration itself is pure."""

    zone_chat: set[int] = field(default_factory=set)
    global_chat: set[int] = field(default_factory=set)
    dm_sends: dict[int, list[int]] = field(default_factory=dict)


def everyone_participates(population: Population, dm_sources: Optional[list[int]] = None) -> Participation:
    """Participation masks with probability 1 on every channel (test helper).

    Mirrors draw_participation's eligibility: withdrawn avatars are out of chat.
    """
    ids = {a.id for a in population.avatars if a.alive and not a.withdrawn}
    part = Participation(zone_chat=set(ids), global_chat=set(ids))
    if dm_sources is not None:
        for src in dm_sources:
            part.dm_sends[src] = list(population.social.out_neighbors(src))
    return part


def draw_participation(
    population: Population,
    params: ChannelParams,
    rng: random.Random,
    *,
    zone_chat_live: bool,
    global_chat_live: bool,
    dm_sources: list[int],
) -> Participation:
    """Flip the tick's participation coins in canonical (avatar id) order.

    Chat coins are flipped only for avatars that could matter this tick
    (alive, not withdrawn) and only when the channel can transmit at all;
    message-send coins are flipped per out-edge of each sending avatar.
    """
    part = Participation()
    if zone_chat_live or global_chat_live:
        for a in population.avatars:
            if not a.alive or a.withdrawn:
                continue
            if zone_chat_live and rng.random() < params.zone_chat_participation:
                part.zone_chat.add(a.id)
            if global_chat_live and rng.random() < params.global_chat_participation:
                part.global_chat.add(a.id)
    for src in sorted(dm_sources):
        sent = [
            tgt
            for tgt in population.social.out_neighbors(src)
            if rng.random() < params.dm_send_probability
        ]
        if sent:
            part.dm_sends[src] = sent
    return part


def _source_ref_for_avatar(avatar: Avatar, state: InfectionState) -> SourceRef:
    return SourceRef(
        kind="avatar",
        avatar=avatar.id,
        source_case=avatar.id,
        source_episode=avatar.episodes,
        generation=state.generation,
        variant=state.variant,
    )


def _source_ref_for_pet(pet: Pet) -> SourceRef:
    state = pet.carried_infection
    return SourceRef(
        kind="pet",
        pet=pet.id,
        owner=pet.owner,
        source_case=pet.carried_source if pet.carried_source is not None else -1,
        source_episode=pet.carried_source_episode,
        generation=state.generation,
        variant=state.variant,
    )


def _restriction_filter(
    zone_id: str,
    restrictions: dict[str, frozenset[int]],
    ids: list[int],
) -> list[int]:
    residents = restrictions.get(zone_id)
    if residents is None:
        return ids
    return [i for i in ids if i in residents]


def enumerate_contacts(
    world: WorldMap,
    population: Population,
    tick: int,
    *,
    infectious: list[tuple[Avatar, InfectionState, DiseaseDefinition]],
    participation: Participation,
    restrictions: Optional[dict[str, frozenset[int]]] = None,
    diseases: Optional[dict[str, DiseaseDefinition]] = None,
) -> Contacts:
    """Enumerate the tick's contacts on every channel, group-wise.

    `infectious` lists every transmitting entity's avatar with its live
    infection state and the definition of its variant; withdrawn avatars
    must already be flagged on the Avatar.  Shedding pets are picked up from
    the population directly, with `diseases` mapping variant names to
    definitions for their frozen snapshots.
    """
    restrictions = restrictions or {}
    diseases = diseases or {}
    contacts = Contacts(tick=tick)

    susceptible_by_zone: dict[str, list[int]] = {}
    for a in population.avatars:
        if a.is_susceptible():
            susceptible_by_zone.setdefault(a.zone, []).append(a.id)
    for ids in susceptible_by_zone.values():
        ids.sort()

    def channel_sources(channel: ChannelKind):
        out = []
        for avatar, state, definition in infectious:
            e = effective_infectiousness(state, definition, channel.value)
            if e > 0.0:
                out.append((avatar, state, e))
        return out

    # Proximity: co-located pairs, withdrawn avatars fully out.
    prox = [
        (a, s, e)
        for a, s, e in channel_sources(ChannelKind.PROXIMITY)
        if not a.withdrawn
    ]
    by_zone: dict[str, list[tuple[Avatar, InfectionState, float]]] = {}
    for a, s, e in prox:
        by_zone.setdefault(a.zone, []).append((a, s, e))
    for zone_id in sorted(by_zone):
        sources = by_zone[zone_id]
        source_ids = [a.id for a, _, _ in sources]
        allowed_sources = set(_restriction_filter(zone_id, restrictions, source_ids))
        sources = [t for t in sources if t[0].id in allowed_sources]
        targets = _restriction_filter(
            zone_id, restrictions, susceptible_by_zone.get(zone_id, [])
        )
        targets = [t for t in targets if not population.avatars[t].withdrawn]
        if sources and targets:
            contacts.groups.append(
                ContactGroup(
                    channel=ChannelKind.PROXIMITY,
                    zone=zone_id,
                    sources=[_source_ref_for_avatar(a, s) for a, s, _ in sources],
                    effectiveness=[e for _, _, e in sources],
                    targets=targets,
                )
            )

    # Zone chat: participating pairs within a zone.
    zc = [
        (a, s, e)
        for a, s, e in channel_sources(ChannelKind.ZONE_CHAT)
        if a.id in participation.zone_chat
    ]
    by_zone = {}
    for a, s, e in zc:
        by_zone.setdefault(a.zone, []).append((a, s, e))
    for zone_id in sorted(by_zone):
        sources = by_zone[zone_id]
        source_ids = [a.id for a, _, _ in sources]
        allowed_sources = set(_restriction_filter(zone_id, restrictions, source_ids))
        sources = [t for t in sources if t[0].id in allowed_sources]
        targets = [
            t
            for t in _restriction_filter(
                zone_id, restrictions, susceptible_by_zone.get(zone_id, [])
            )
            if t in participation.zone_chat
        ]
        if sources and targets:
            contacts.groups.append(
                ContactGroup(
                    channel=ChannelKind.ZONE_CHAT,
                    zone=zone_id,
                    sources=[_source_ref_for_avatar(a, s) for a, s, _ in sources],
                    effectiveness=[e for _, _, e in sources],
                    targets=targets,
                )
            )

    # Global chat: one world-wide group, location and restriction ignored.
    gc = [
        (a, s, e)
        for a, s, e in channel_sources(ChannelKind.GLOBAL_CHAT)
        if a.id in participation.global_chat
    ]
    if gc:
        targets = sorted(
            t
            for ids in susceptible_by_zone.values()
            for t in ids
            if t in participation.global_chat
        )
        if targets:
            contacts.groups.append(
                ContactGroup(
                    channel=ChannelKind.GLOBAL_CHAT,
                    zone=None,
                    sources=[_source_ref_for_avatar(a, s) for a, s, _ in gc],
                    effectiveness=[e for _, _, e in gc],
                    targets=targets,
                )
            )

    # Direct messages: per-sender groups along the tick's sent edges.
    for a, s, e in channel_sources(ChannelKind.DIRECT_MESSAGE):
        sent = participation.dm_sends.get(a.id)
        if not sent:
            continue
        targets = [t for t in sent if population.avatars[t].is_susceptible()]
        if targets:
            contacts.groups.append(
                ContactGroup(
                    channel=ChannelKind.DIRECT_MESSAGE,
                    zone=None,
                    sources=[_source_ref_for_avatar(a, s)],
                    effectiveness=[e],
                    targets=sorted(targets),
                )
            )

    # Pet vector: re-summoned carriers shed onto their zone.
    for pet_id in sorted(population.pets):
        pet = population.pets[pet_id]
        if pet.status != "summoned" or not pet.carrying() or tick > pet.shedding_until:
            continue
        definition = diseases.get(pet.carried_infection.variant)
        e = effective_infectiousness(
            pet.carried_infection, definition, ChannelKind.PET_VECTOR.value
        ) if definition is not None else 0.0
        if e <= 0.0:
            continue
        targets = [
            t
            for t in susceptible_by_zone.get(pet.zone, [])
            if not population.avatars[t].withdrawn
        ]
        if targets:
            contacts.groups.append(
                ContactGroup(
                    channel=ChannelKind.PET_VECTOR,
                    zone=pet.zone,
                    sources=[_source_ref_for_pet(pet)],
                    effectiveness=[e],
                    targets=targets,
                )
            )

    order = {c: i for i, c in enumerate(CHANNEL_ORDER)}
    contacts.groups.sort(key=lambda g: (order[g.channel], g.zone or "", g.sources[0].source_case))
    return contacts


def exposure_probability(effectiveness: list[float]) -> float:
    """Compose independent per-contact infection chances: 1 - prod(1 - e)."""
    p_escape = 1.0
    for e in effectiveness:
        p_escape *= 1.0 - e
    return 1.0 - p_escape


def resolve_exposures(
    contacts: Contacts,
    population: Population,
    diseases: dict[str, DiseaseDefinition],
    rng: random.Random,
    tick: int,
    trace: Optional[list[tuple[int, float]]] = None,
) -> list[InfectionRecord]:
    """Resolve the tick's contacts into new infections, in avatar-id order.

    Each exposed target is infected independently with its composed
    probability; on infection one contributing contact is credited as the
    infector, chosen proportionally to its effective infectiousness.  The
    infectee enters stage 0 of the credited source's variant with
    generation = source generation + 1.  When `trace` is given the composed
    probability of every exposed target is appended to it (diagnostics).
    """
    records: list[InfectionRecord] = []
    group_escape = [
        1.0 - exposure_probability(g.effectiveness) for g in contacts.groups
    ]
    single = len(contacts.groups) == 1
    if single:
        # Dominant case (one live channel in one zone): group targets are
        # already sorted and unique, so the dict indirection can be skipped.
        ordered = contacts.groups[0].targets
        per_target: dict[int, list[int]] = {}
    else:
        per_target = contacts.contacts_per_target()
        ordered = sorted(per_target)
    single_idx = [0]
    for target_id in ordered:
        avatar = population.avatars[target_id]
        if not avatar.is_susceptible():
            continue
        group_idxs = single_idx if single else per_target[target_id]
        p_escape = 1.0
        for gi in group_idxs:
            p_escape *= group_escape[gi]
        p = 1.0 - p_escape
        if trace is not None:
            trace.append((target_id, p))
        if p <= 0.0 or rng.random() >= p:
            continue
        # Attribute one contact, weight = effective infectiousness.
        total = 0.0
        for gi in group_idxs:
            total += sum(contacts.groups[gi].effectiveness)
        x = rng.random() * total
        chosen: Optional[tuple[SourceRef, ChannelKind]] = None
        acc = 0.0
        for gi in group_idxs:
            g = contacts.groups[gi]
            for src, e in zip(g.sources, g.effectiveness):
                acc += e
                if x < acc:
                    chosen = (src, g.channel)
                    break
            if chosen:
                break
        if chosen is None:  # float edge: credit the last contact
            g = contacts.groups[group_idxs[-1]]
            chosen = (g.sources[-1], g.channel)
        src, channel = chosen
        definition = diseases[src.variant]
        avatar.episodes += 1
        avatar.ever_infected = True
        avatar.infection = begin_infection(
            definition,
            rng,
            tick,
            generation=src.generation + 1,
            infector=src.source_case if src.source_case >= 0 else None,
            channel=channel.value,
        )
        records.append(
            InfectionRecord(
                infectee=target_id,
                episode=avatar.episodes,
                channel=channel.value,
                tick=tick,
                generation=src.generation + 1,
                zone=avatar.zone,
                variant=definition.name,
                infector=InfectorRef(
                    kind=src.kind,
                    avatar=src.avatar,
                    pet=src.pet,
                    owner=src.owner,
                    source_case=src.source_case,
                    source_episode=src.source_episode,
                ),
            )
        )
    return records


def expose_pets(
    population: Population,
    infectious: list[tuple[Avatar, InfectionState, DiseaseDefinition]],
    rng: random.Random,
    tick: int,
) -> list[dict]:
    """Let summoned pets acquire a frozen snapshot from co-located infectious.

    A summoned, not-yet-carrying pet composes the pet-vector effectiveness of
    the infectious avatars in its zone; on acquisition the credited avatar's
    infection state is copied verbatim and frozen on the pet.  Returns event
    payloads for the log.
    """
    by_zone: dict[str, list[tuple[Avatar, InfectionState, DiseaseDefinition, float]]] = {}
    for avatar, state, definition in infectious:
        e = effective_infectiousness(state, definition, ChannelKind.PET_VECTOR.value)
        if e > 0.0:
            by_zone.setdefault(avatar.zone, []).append((avatar, state, definition, e))
    events = []
    for pet_id in sorted(population.pets):
        pet = population.pets[pet_id]
        if pet.status != "summoned" or pet.carrying():
            continue
        sources = by_zone.get(pet.zone)
        if not sources:
            continue
        p = exposure_probability([e for _, _, _, e in sources])
        if rng.random() >= p:
            continue
        total = sum(e for _, _, _, e in sources)
        x = rng.random() * total
        acc = 0.0
        credited = sources[-1]
        for entry in sources:
            acc += entry[3]
            if x < acc:
                credited = entry
                break
        avatar, state, _, _ = credited
        pet.carried_infection = state.copy()
        pet.carried_source = avatar.id
        pet.carried_source_episode = avatar.episodes
        events.append(
            {
                "type": "pet_infected",
                "tick": tick,
                "pet": pet.id,
                "owner": pet.owner,
                "source": avatar.id,
                "zone": pet.zone,
            }
        )
    return events


def pet_dismiss(pet: Pet) -> None:
    """Dismiss a pet: its carried snapshot is frozen and stops shedding."""
    pet.status = "dismissed"
    pet.shedding_until = -1


def pet_resummon(pet: Pet, zone: str, tick: int, shedding_ticks: int) -> None:
    """Re-summon a pet; a carried snapshot sheds for the next few ticks."""
    pet.status = "summoned"
    pet.zone = zone
    if pet.carrying() and shedding_ticks > 0:
        pet.shedding_until = tick + shedding_ticks - 1
    else:
        pet.shedding_until = -1


def clear_expired_pet_infections(population: Population, tick: int) -> list[dict]:
    """Drop pet snapshots whose shedding window has closed."""
    events = []
    for pet_id in sorted(population.pets):
        pet = population.pets[pet_id]
        if (
            pet.carrying()
            and pet.status == "summoned"
            and 0 <= pet.shedding_until < tick
        ):
            pet.carried_infection = None
            pet.carried_source = None
            events.append({"type": "pet_cleared", "tick": tick, "pet": pet.id})
    return events
