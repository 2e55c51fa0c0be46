from __future__ import annotations

import random
import statistics

import pytest

from plaguesim.behavior import (
    InfoParams,
    decide_move,
    epicenter_estimate,
    set_informed,
    spread_information,
)
from plaguesim.transmission import ChannelParams
from plaguesim.world import AwarenessState, SocialGraph, Zone, build_world

from conftest import infect, make_avatar, make_population, make_world, single_stage_disease


def aware(avatar, accuracy: float, tick: int = 0):
    avatar.awareness = AwarenessState(kind=AwarenessState.RUMOR, accuracy=accuracy, acquired_tick=tick)
    return avatar


def test_nobody_aware_without_infection_or_warning(rng):
    pop = make_population(20)
    disease = single_stage_disease({"zone_chat": 0.1})
    info = InfoParams(beta_zone_chat=0.5, beta_global_chat=0.5, beta_direct_message=0.5)
    for tick in range(1, 20):
        spread_information(pop, ChannelParams(), info, {disease.name: disease}, rng, tick)
    assert all(a.awareness.kind == AwarenessState.UNAWARE for a in pop.avatars)


def test_visible_symptoms_seed_a_rumor(rng):
    pop = make_population(5)
    disease = single_stage_disease({"zone_chat": 0.1}, symptoms_visible=True)
    infect(pop.avatars[2], disease)
    spread_information(pop, ChannelParams(), InfoParams(), {disease.name: disease}, rng, 1)
    assert pop.avatars[2].awareness.kind == AwarenessState.RUMOR
    assert pop.avatars[2].awareness.accuracy == 1.0


def test_rumor_chain_decays_three_hops():
    # Hops over direct messages with certain delivery: 0.8^3 = 0.512.
    pop = make_population(4)
    pop.social = SocialGraph(out_edges={0: [1], 1: [2], 2: [3]})
    disease = single_stage_disease({"zone_chat": 0.1})
    info = InfoParams(beta_zone_chat=0.0, beta_global_chat=0.0, beta_direct_message=1.0, rumor_decay=0.8)
    params = ChannelParams(dm_send_probability=1.0)
    aware(pop.avatars[0], 1.0)
    rng = random.Random(1)
    for tick in range(1, 4):
        spread_information(pop, params, info, {disease.name: disease}, rng, tick)
    assert pop.avatars[1].awareness.accuracy == pytest.approx(0.8)
    assert pop.avatars[2].awareness.accuracy == pytest.approx(0.64)
    assert pop.avatars[3].awareness.accuracy == pytest.approx(0.512)


def test_accuracy_never_increases_along_a_chain(rng):
    pop = make_population(30)
    pop.social = SocialGraph(out_edges={i: [i + 1] for i in range(29)})
    disease = single_stage_disease({"zone_chat": 0.1})
    info = InfoParams(beta_zone_chat=0.2, beta_global_chat=0.1, beta_direct_message=0.9, rumor_decay=0.8)
    aware(pop.avatars[0], 1.0)
    for tick in range(1, 40):
        spread_information(pop, ChannelParams(), info, {disease.name: disease}, rng, tick)
    for a in pop.avatars:
        assert a.awareness.accuracy <= 1.0


def test_informed_is_absorbing(rng):
    pop = make_population(3)
    disease = single_stage_disease({"zone_chat": 0.1})
    set_informed(pop.avatars[1], tick=0)
    aware(pop.avatars[0], 1.0)
    info = InfoParams(beta_zone_chat=1.0, rumor_decay=0.5)
    for tick in range(1, 10):
        spread_information(pop, ChannelParams(zone_chat_participation=1.0), info, {disease.name: disease}, rng, tick)
    assert pop.avatars[1].awareness.kind == AwarenessState.INFORMED
    assert pop.avatars[1].awareness.accuracy == 1.0


def test_epicenter_is_max_visible_zone_lowest_id_ties():
    pop = make_population(6)
    disease = single_stage_disease({"proximity": 0.1}, symptoms_visible=True)
    for aid, zone in [(0, "z2"), (1, "z2"), (2, "z1"), (3, "z1"), (4, "z0")]:
        pop.avatars[aid].zone = zone
        infect(pop.avatars[aid], disease)
    # z1 and z2 tie with 2 visible each -> lowest zone id wins
    assert epicenter_estimate(pop, {disease.name: disease}) == "z1"


def test_epicenter_ignores_masked_and_invisible():
    pop = make_population(4)
    visible = single_stage_disease({"proximity": 0.1}, symptoms_visible=True)
    infect(pop.avatars[0], visible)
    pop.avatars[0].masked = True
    assert epicenter_estimate(pop, {visible.name: visible}) is None
    latent = single_stage_disease({"proximity": 0.1}, symptoms_visible=False, name="latentpox")
    infect(pop.avatars[1], latent)
    assert epicenter_estimate(pop, {visible.name: visible, "latentpox": latent}) is None


def test_zero_mobility_never_moves():
    world = make_world(3)
    avatar = make_avatar(0, "z1", move_probability=1.0)
    rng = random.Random(2)
    for _ in range(200):
        assert decide_move(avatar, world, None, mobility_modifier=0.0, rng=rng) is None


def test_curious_informed_walks_down_the_gradient():
    # Line world, epicenter at the far end: hop distance strictly decreases.
    world = make_world(6)
    avatar = make_avatar(0, "z5", move_probability=1.0)
    avatar.behavior.curiosity = 1.0
    avatar.behavior.risk_aversion = 0.0
    set_informed(avatar, 0)
    rng = random.Random(3)
    distances = [world.distance(avatar.zone, "z0")]
    for _ in range(10):
        dest = decide_move(avatar, world, "z0", 1.0, rng)
        if dest is not None:
            avatar.zone = dest
        distances.append(world.distance(avatar.zone, "z0"))
    assert distances[:6] == [5, 4, 3, 2, 1, 0]
    assert all(d == 0 for d in distances[6:])  # stays on arrival


def test_risk_averse_informed_flees():
    world = make_world(6)
    avatar = make_avatar(0, "z2", move_probability=1.0)
    avatar.behavior.curiosity = 0.0
    avatar.behavior.risk_aversion = 1.0
    set_informed(avatar, 0)
    rng = random.Random(4)
    for _ in range(10):
        dest = decide_move(avatar, world, "z0", 1.0, rng)
        if dest is not None:
            avatar.zone = dest
    assert world.distance(avatar.zone, "z0") == 5


def test_restricted_pick_overflows_to_adjacent_zone():
    # Hub world: curious avatar wants the restricted epicenter, lands next to it.
    zones = [
        Zone(id="epi", adjacent={"gate1", "gate2"}, restricted=True),
        Zone(id="gate1", adjacent={"far"}),
        Zone(id="gate2"),
        Zone(id="far"),
    ]
    world = build_world(zones)
    avatar = make_avatar(0, "far", move_probability=1.0)
    avatar.behavior.curiosity = 1.0
    avatar.behavior.risk_aversion = 0.0
    set_informed(avatar, 0)
    rng = random.Random(5)
    avatar.zone = "gate1"  # adjacent to epi; best pick would be epi itself
    dest = decide_move(avatar, world, "epi", 1.0, rng)
    assert dest == "gate1" or dest is None or dest != "epi"
    # Run many decisions: the avatar never enters the restricted zone.
    for _ in range(100):
        dest = decide_move(avatar, world, "epi", 1.0, rng)
        if dest is not None:
            avatar.zone = dest
        assert avatar.zone != "epi"


def test_restriction_crowds_adjacent_zones():
    # Statistical check over 50 seeded walks: with the epicenter restricted,
    # occupancy of its neighbors ends above the unrestricted baseline.
    zones = [
        Zone(id="epi", adjacent={"gateA", "gateB"}),
        Zone(id="gateA", adjacent={"rim1"}),
        Zone(id="gateB", adjacent={"rim2"}),
        Zone(id="rim1", adjacent={"rim3"}),
        Zone(id="rim2", adjacent={"rim3"}),
        Zone(id="rim3"),
    ]

    def final_gate_occupancy(restricted: bool, seed: int) -> int:
        world = build_world([Zone(id=z.id, adjacent=set(z.adjacent)) for z in zones])
        world.zones["epi"].restricted = restricted
        rng = random.Random(seed)
        avatars = []
        for i in range(40):
            a = make_avatar(i, "rim3", move_probability=1.0)
            a.behavior.curiosity = 1.0
            a.behavior.risk_aversion = 0.0
            set_informed(a, 0)
            avatars.append(a)
        for _ in range(12):
            for a in avatars:
                dest = decide_move(a, world, "epi", 1.0, rng)
                if dest is not None:
                    a.zone = dest
        return sum(1 for a in avatars if a.zone in ("gateA", "gateB"))

    with_restriction = [final_gate_occupancy(True, s) for s in range(50)]
    baseline = [final_gate_occupancy(False, s) for s in range(50)]
    assert statistics.fmean(with_restriction) > statistics.fmean(baseline)


def test_unaware_wanders_uniformly():
    world = make_world(3)
    avatar = make_avatar(0, "z1", move_probability=1.0)
    rng = random.Random(6)
    seen = {decide_move(avatar, world, None, 1.0, rng) for _ in range(200)}
    assert seen == {"z0", "z2"}


def test_rumor_accuracy_misleads_movement():
    # accuracy 0: the believed epicenter is always wrong, so over many draws
    # the avatar does not deterministically walk to the true one.
    world = make_world(5)
    rng = random.Random(7)
    hits = 0
    for _ in range(100):
        avatar = make_avatar(0, "z4", move_probability=1.0)
        avatar.behavior.curiosity = 1.0
        avatar.behavior.risk_aversion = 0.0
        aware(avatar, accuracy=0.0)
        for _ in range(8):
            dest = decide_move(avatar, world, "z0", 1.0, rng)
            if dest is not None:
                avatar.zone = dest
        if avatar.zone == "z0":
            hits += 1
    assert hits < 60
