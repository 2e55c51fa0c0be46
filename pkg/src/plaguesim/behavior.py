"""The second diffusion process: information, rumors, and movement.

Awareness spreads over the same chat/message structure the disease uses,
with its own per-channel probabilities.  Rumor accuracy decays by a fixed
factor per hop; a developer Warning short-circuits the whole process by
setting Informed (accuracy 1), which is absorbing.  Movement couples
awareness back into the spatial process: curious avatars walk toward the
believed epicenter, risk-averse ones away from it, unaware ones wander.

Update order within a tick is one-directional and pinned by the engine:
information first, then movement, then contacts.  A withdrawing avatar
skips its move and drops zone- and global-chat participation for the tick;
it can still send and receive direct messages.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional

from plaguesim.disease import DiseaseDefinition
from plaguesim.transmission import ChannelParams
from plaguesim.world import Avatar, AwarenessState, Population, WorldMap

# Re-exported for API completeness: the types live next to Avatar.
from plaguesim.world import BehaviorProfile  # noqa: F401


@dataclass
class InfoParams:
    """Per-channel information-transmission probabilities and rumor decay."""

    beta_zone_chat: float = 0.3
    beta_global_chat: float = 0.1
    beta_direct_message: float = 0.4
    rumor_decay: float = 0.8

    def validate(self) -> list[str]:
        errors = []
        for label, p in [
            ("beta_zone_chat", self.beta_zone_chat),
            ("beta_global_chat", self.beta_global_chat),
            ("beta_direct_message", self.beta_direct_message),
            ("rumor_decay", self.rumor_decay),
        ]:
            if not 0.0 <= p <= 1.0:
                errors.append(f"info {label} {p} outside [0, 1]")
        return errors

    def live(self) -> bool:
        return (
            self.beta_zone_chat > 0
            or self.beta_global_chat > 0
            or self.beta_direct_message > 0
        )


def epicenter_estimate(
    population: Population, diseases: dict[str, DiseaseDefinition]
) -> Optional[str]:
    """Zone with the most visibly symptomatic avatars; None when there are none.

    Masked avatars do not count: agents react to what they can observe, not
    to server truth.  Ties break toward the lowest zone id.
    """
    counts: dict[str, int] = {}
    for a in population.avatars:
        if not a.alive or a.infection is None or a.masked:
            continue
        stage = diseases[a.infection.variant].stages[a.infection.stage_index]
        if stage.symptoms_visible:
            counts[a.zone] = counts.get(a.zone, 0) + 1
    if not counts:
        return None
    best = max(counts.values())
    return min(z for z, c in counts.items() if c == best)


def set_informed(avatar: Avatar, tick: int) -> bool:
    """Promote to Informed (accuracy 1); returns False if already there."""
    if avatar.awareness.kind == AwarenessState.INFORMED:
        return False
    avatar.awareness = AwarenessState(kind=AwarenessState.INFORMED, accuracy=1.0, acquired_tick=tick)
    return True


def spread_information(
    population: Population,
    channel_params: ChannelParams,
    info: InfoParams,
    diseases: dict[str, DiseaseDefinition],
    rng: random.Random,
    tick: int,
) -> list[dict]:
    """One tick of rumor diffusion; returns awareness-transition events.

    Visibly symptomatic avatars first notice their own condition (rumor,
    accuracy 1).  Aware avatars then reach others over zone chat, global
    chat, and direct messages; a receiver that is reached adopts the most
    accurate contributing rumor, decayed one hop.  Informed receivers are
    never downgraded, and a rumor never lowers an avatar's accuracy.
    """
    events: list[dict] = []

    # A symptomatic avatar knows it is sick even under a symptom mask (it
    # sought the mask); masking only hides it from observers.
    for a in population.avatars:
        if not a.alive or a.infection is None or a.awareness.kind != AwarenessState.UNAWARE:
            continue
        stage = diseases[a.infection.variant].stages[a.infection.stage_index]
        if stage.symptoms_visible:
            a.awareness = AwarenessState(kind=AwarenessState.RUMOR, accuracy=1.0, acquired_tick=tick)
            events.append(
                {"type": "awareness", "tick": tick, "avatar": a.id, "kind": "rumor", "accuracy": 1.0}
            )

    if not info.live():
        return events
    senders = [a for a in population.avatars if a.alive and a.awareness.kind != AwarenessState.UNAWARE]
    if not senders:
        return events

    # Participation coins, avatar-id order; withdrawn avatars are out of chat.
    zone_part: set[int] = set()
    global_part: set[int] = set()
    for a in population.avatars:
        if not a.alive or a.withdrawn:
            continue
        if info.beta_zone_chat > 0 and rng.random() < channel_params.zone_chat_participation:
            zone_part.add(a.id)
        if info.beta_global_chat > 0 and rng.random() < channel_params.global_chat_participation:
            global_part.add(a.id)

    # Per group keep the count and the two best accuracies with the best
    # sender's id, so a receiver that is itself a sender can be excluded.
    class _Group:
        __slots__ = ("count", "best", "best_id", "second")

        def __init__(self):
            self.count = 0
            self.best = 0.0
            self.best_id = -1
            self.second = 0.0

        def add(self, sender_id: int, accuracy: float) -> None:
            self.count += 1
            if accuracy > self.best:
                self.second = self.best
                self.best = accuracy
                self.best_id = sender_id
            elif accuracy > self.second:
                self.second = accuracy

        def excluding(self, receiver_id: int, member: bool) -> tuple[int, float]:
            if not member:
                return self.count, self.best
            best = self.second if receiver_id == self.best_id else self.best
            return self.count - 1, best

    zone_senders: dict[str, _Group] = {}
    global_group = _Group()
    sender_ids = set()
    for s in senders:
        sender_ids.add(s.id)
        acc = s.awareness.accuracy
        if s.id in zone_part:
            zone_senders.setdefault(s.zone, _Group()).add(s.id, acc)
        if s.id in global_part:
            global_group.add(s.id, acc)

    # Direct-message sends, sender-id order, per sorted out-edge.
    dm_hits: dict[int, tuple[int, float]] = {}  # receiver -> (count, best accuracy)
    if info.beta_direct_message > 0:
        for s in sorted(senders, key=lambda a: a.id):
            for tgt in population.social.out_neighbors(s.id):
                if rng.random() < channel_params.dm_send_probability:
                    count, best = dm_hits.get(tgt, (0, 0.0))
                    dm_hits[tgt] = (count + 1, max(best, s.awareness.accuracy))

    for a in population.avatars:
        if not a.alive or a.awareness.kind == AwarenessState.INFORMED:
            continue
        is_sender = a.id in sender_ids
        escape = 1.0
        best_acc = 0.0
        if a.id in zone_part and a.zone in zone_senders:
            count, best = zone_senders[a.zone].excluding(a.id, is_sender)
            if count:
                escape *= (1.0 - info.beta_zone_chat) ** count
                best_acc = max(best_acc, best)
        if a.id in global_part:
            count, best = global_group.excluding(a.id, is_sender)
            if count:
                escape *= (1.0 - info.beta_global_chat) ** count
                best_acc = max(best_acc, best)
        if a.id in dm_hits:
            count, best = dm_hits[a.id]
            escape *= (1.0 - info.beta_direct_message) ** count
            best_acc = max(best_acc, best)
        p = 1.0 - escape
        if p <= 0.0:
            continue
        offered = best_acc * info.rumor_decay
        if rng.random() >= p:
            continue
        if a.awareness.kind == AwarenessState.UNAWARE or offered > a.awareness.accuracy:
            a.awareness = AwarenessState(kind=AwarenessState.RUMOR, accuracy=offered, acquired_tick=tick)
            events.append(
                {"type": "awareness", "tick": tick, "avatar": a.id, "kind": "rumor", "accuracy": round(offered, 9)}
            )
    return events


def decide_move(
    avatar: Avatar,
    world: WorldMap,
    epicenter: Optional[str],
    mobility_modifier: float,
    rng: random.Random,
) -> Optional[str]:
    """Pick this tick's destination, or None to stay.

    The move coin is move_probability x the current stage's mobility
    modifier.  Aware avatars with curiosity above risk aversion walk the
    hop-distance gradient toward the believed epicenter (ties to the lowest
    zone id), the risk-averse walk away from it, and the unaware wander
    uniformly.  A restricted pick overflows to an unrestricted zone adjacent
    to it; with none available the avatar stays put.
    """
    p_move = avatar.behavior.move_probability_per_tick * mobility_modifier
    if p_move <= 0.0 or rng.random() >= p_move:
        return None
    candidates = world.neighbors(avatar.zone)
    if not candidates:
        return None

    aware = avatar.awareness.kind != AwarenessState.UNAWARE
    chosen: Optional[str] = None
    if aware and epicenter is not None:
        believed = epicenter
        if avatar.awareness.kind == AwarenessState.RUMOR and avatar.awareness.accuracy < 1.0:
            if rng.random() >= avatar.awareness.accuracy:
                others = [z for z in world.zone_ids if z != epicenter]
                if others:
                    believed = others[rng.randrange(len(others))]
        attracted = avatar.behavior.curiosity > avatar.behavior.risk_aversion
        # Staying is a legitimate best response once at (or fleeing) the target.
        scored = [(world.distance(z, believed), z) for z in candidates]
        scored.append((world.distance(avatar.zone, believed), avatar.zone))
        reachable = [(d, z) for d, z in scored if d >= 0]
        if not reachable:
            return None
        if attracted:
            best = min(d for d, _ in reachable)
        else:
            best = max(d for d, _ in reachable)
        chosen = min(z for d, z in reachable if d == best)
        if chosen == avatar.zone:
            return None
    else:
        chosen = candidates[rng.randrange(len(candidates))]

    if world.zones[chosen].restricted:
        overflow = [
            z for z in world.neighbors(chosen) if not world.zones[z].restricted
        ]
        if not overflow:
            return None
        chosen = min(overflow)
        if chosen == avatar.zone:
            return None
    return chosen
