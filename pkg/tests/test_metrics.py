from __future__ import annotations

import pytest

from plaguesim.metrics import (
    NONSPATIAL_ZONE,
    TickSnapshot,
    TransmissionTree,
    ZoneCounts,
    estimate_r0,
    r0_by_zone,
    replay_snapshots,
    run_summary,
    snapshots_to_csv,
)
from plaguesim.transmission import InfectionRecord, InfectorRef


def record(infectee, tick, generation, infector=None, channel="proximity", zone="z0", episode=1):
    ref = None
    if infector is not None:
        ref = InfectorRef(kind="avatar", avatar=infector, source_case=infector, source_episode=1)
    return InfectionRecord(
        infectee=infectee,
        episode=episode,
        channel=channel if infector is not None else None,
        tick=tick,
        generation=generation,
        zone=zone,
        variant="v",
        infector=ref,
    )


def completed_tree(records, end_tick=99):
    tree = TransmissionTree()
    for r in records:
        tree.add_record(r)
    for r in records:
        tree.complete_case(r.infectee, r.episode, end_tick, "recovered")
    return tree


def offspring_by_traversal(tree: TransmissionTree) -> dict[tuple[int, int], int]:
    """Second, independent traversal: count records naming each case as source."""
    counts: dict[tuple[int, int], int] = {}
    for r in tree.records:
        if r.infector is not None:
            key = (r.infector.source_case, r.infector.source_episode)
            counts[key] = counts.get(key, 0) + 1
    return counts


def test_index_case_with_three_children():
    # 1 index infecting 3, none further: first-gen 3, weighted (1*3 + 3*0)/4.
    records = [record(0, 0, 0)] + [record(i, 2, 1, infector=0) for i in (1, 2, 3)]
    tree = completed_tree(records)
    est = estimate_r0(tree)
    assert est.first_generation == pytest.approx(3.0)
    assert est.per_generation == [3.0, 0.0]
    assert est.weighted_all == pytest.approx(0.75)
    assert est.completed_by_generation == [1, 3]


def test_lone_index_case_scores_zero():
    tree = completed_tree([record(0, 0, 0)])
    est = estimate_r0(tree)
    assert est.first_generation == 0.0
    assert est.weighted_all == 0.0


def test_three_generation_tree_arithmetic():
    # gen0: 1 case -> 2; gen1: 2 cases -> 3 total; gen2: 3 cases -> 0.
    records = [record(0, 0, 0)]
    records += [record(i, 1, 1, infector=0) for i in (1, 2)]
    records += [record(3, 2, 2, infector=1), record(4, 2, 2, infector=1), record(5, 2, 2, infector=2)]
    tree = completed_tree(records)
    est = estimate_r0(tree)
    assert est.per_generation == [2.0, 1.5, 0.0]
    assert est.weighted_all == pytest.approx(5.0 / 6.0)
    assert est.first_generation == pytest.approx(2.0)


def test_incomplete_cases_are_excluded():
    tree = TransmissionTree()
    tree.add_record(record(0, 0, 0))
    tree.add_record(record(1, 1, 1, infector=0))
    # nobody completed yet: undefined, not zero
    est = estimate_r0(tree)
    assert est.first_generation is None
    assert est.weighted_all is None
    assert not est.defined
    tree.complete_case(0, 1, 5, "recovered")
    est = estimate_r0(tree)
    assert est.first_generation == 1.0
    assert est.weighted_all == 1.0  # gen-1 case still running, only gen 0 counts


def test_up_to_generation_filter():
    records = [record(0, 0, 0), record(1, 1, 1, infector=0), record(2, 2, 2, infector=1)]
    tree = completed_tree(records)
    est = estimate_r0(tree, up_to_generation=0)
    assert est.per_generation == [1.0]
    assert est.weighted_all == 1.0


def test_offspring_counts_match_independent_traversal():
    records = [record(0, 0, 0)]
    records += [record(i, 1, 1, infector=0) for i in (1, 2, 3)]
    records += [record(4, 2, 2, infector=2), record(5, 2, 2, infector=2)]
    tree = completed_tree(records)
    oracle = offspring_by_traversal(tree)
    for (avatar, episode), count in oracle.items():
        assert tree.offspring_count(avatar, episode) == count
    total_offspring = sum(oracle.values())
    assert total_offspring == len(records) - 1  # every non-index record credited once


def test_duplicate_episode_record_rejected():
    tree = TransmissionTree()
    tree.add_record(record(0, 0, 0))
    with pytest.raises(ValueError, match="duplicate"):
        tree.add_record(record(0, 1, 1, infector=0))  # same (avatar, episode)


def test_r0_by_zone_attribution():
    records = [
        record(0, 0, 0, zone="za"),
        record(1, 1, 1, infector=0, zone="za"),
        record(2, 1, 1, infector=0, channel="global_chat", zone="zb"),
        record(3, 2, 2, infector=1, zone="zb"),
    ]
    tree = completed_tree(records)
    report = r0_by_zone(tree, population_history=[])
    # case 2 was infected over global chat -> nonspatial pseudo-zone
    assert NONSPATIAL_ZONE in report.by_zone
    assert report.by_zone["za"] == pytest.approx((2 + 1) / 2)  # cases 0 (2 kids) and 1 (1 kid)
    assert report.by_zone["zb"] == 0.0  # case 3, no offspring
    assert report.by_zone[NONSPATIAL_ZONE] == 0.0


def test_r0_by_zone_global_only_disease():
    records = [record(0, 0, 0, zone="za")]
    records += [record(i, 1, 1, infector=0, channel="global_chat", zone="zb") for i in (1, 2)]
    tree = completed_tree(records)
    report = r0_by_zone(tree, population_history=[])
    assert set(report.by_zone) == {"za", NONSPATIAL_ZONE}


def test_r0_symmetric_zones_agree_within_ten_percent():
    # Two zones with equal density and a symmetric setup: mean per-zone R0
    # over 100 runs differs by < 10%.
    from plaguesim.engine import Simulation
    from plaguesim.scenario import scenario_from_dict

    config = scenario_from_dict({
        "name": "mirror",
        "run": {"horizon_ticks": 40, "seed": 0, "index_cases": {"count": 2}},
        "world": {"zones": [{"id": "za", "adjacent": ["zb"]}, {"id": "zb"}]},
        "population": {"count": 200, "social_degree_mean": 0.0},
        "behavior": {"move_probability": {"kind": "constant", "value": 0.3}, "info_beta": {}},
        "channels": {},
        "disease": {
            "name": "mirrorpox",
            "stages": [{"name": "ill", "duration_min_days": 2, "duration_max_days": 4,
                        "infectiousness_multiplier": 1.0}],
            "beta_by_channel": {"proximity": 0.01},
        },
        "schedule": [],
    })
    totals = {"za": 0.0, "zb": 0.0}
    counts = {"za": 0, "zb": 0}
    for seed in range(100):
        result = Simulation(config, seed=seed).run()
        report = r0_by_zone(result.tree, result.snapshots)
        for zone in ("za", "zb"):
            if zone in report.by_zone:
                totals[zone] += report.by_zone[zone]
                counts[zone] += 1
    means = {z: totals[z] / counts[z] for z in totals}
    gap = abs(means["za"] - means["zb"]) / max(means.values())
    assert gap < 0.10, means


def snapshot(tick, infected=0, susceptible=10, recovered=0, dead=0):
    return TickSnapshot(
        tick=tick,
        zones={"z0": ZoneCounts(susceptible=susceptible, infected=infected, recovered=recovered, dead=dead)},
    )


def test_run_summary_attack_and_peak():
    snapshots = [snapshot(0, infected=1, susceptible=9), snapshot(1, infected=4, susceptible=6),
                 snapshot(2, infected=2, susceptible=6, recovered=2)]
    tree = completed_tree([record(0, 0, 0)] + [record(i, 1, 1, infector=0) for i in (1, 2, 3)])
    s = run_summary(snapshots, tree, epidemic_threshold=0.05)
    assert s.population == 10
    assert s.attack_rate == pytest.approx(0.4)
    assert s.peak_prevalence == pytest.approx(0.4)
    assert s.peak_tick == 1
    assert s.epidemic_occurred


def test_run_summary_below_threshold():
    snapshots = [snapshot(0, infected=1, susceptible=1999)]
    tree = TransmissionTree()
    tree.add_record(record(0, 0, 0))
    s = run_summary(snapshots, tree, epidemic_threshold=0.05)
    assert s.attack_rate == pytest.approx(1 / 2000)
    assert not s.epidemic_occurred


def test_everyone_infected_attack_rate_one():
    snapshots = [snapshot(0, infected=3, susceptible=0)]
    tree = completed_tree([record(0, 0, 0), record(1, 0, 1, infector=0), record(2, 0, 1, infector=0)])
    s = run_summary(snapshots, tree)
    assert s.attack_rate == pytest.approx(1.0)


def test_snapshot_counts_sum_to_population():
    snap = snapshot(0, infected=2, susceptible=5, recovered=2, dead=1)
    assert snap.population() == 10
    csv = snapshots_to_csv([snap])
    assert csv.splitlines()[0].startswith("tick,susceptible,infected")


def test_replay_matches_a_hand_built_log():
    events = [
        {"type": "run_start", "tick": 0, "zones": ["z0", "z1"]},
        {"type": "spawn", "tick": 0, "avatar": 0, "zone": "z0"},
        {"type": "spawn", "tick": 0, "avatar": 1, "zone": "z1"},
        {"type": "infect", "tick": 0, "avatar": 0, "zone": "z0", "channel": None},
        {"type": "epicenter", "tick": 0, "zone": None},
        {"type": "epicenter", "tick": 1, "zone": "z0"},
        {"type": "move", "tick": 1, "avatar": 1, "src": "z1", "dst": "z0"},
        {"type": "infect", "tick": 1, "avatar": 1, "zone": "z0", "channel": "proximity"},
        {"type": "epicenter", "tick": 2, "zone": "z0"},
        {"type": "recover", "tick": 2, "avatar": 0, "immune": True},
        {"type": "awareness", "tick": 2, "avatar": 1, "kind": "rumor"},
        {"type": "epicenter", "tick": 3, "zone": "z0"},
        {"type": "death", "tick": 3, "avatar": 1, "zone": "z0"},
    ]
    snaps = replay_snapshots(events)
    assert len(snaps) == 4
    assert snaps[0].zones["z0"].infected == 1
    assert snaps[1].zones["z0"].infected == 2
    assert snaps[1].zones["z1"].susceptible == 0
    assert snaps[2].zones["z0"].recovered == 1
    assert snaps[2].zones["z0"].immune == 1
    assert snaps[2].rumor_aware == 1
    assert snaps[3].zones["z0"].dead == 1
    assert snaps[3].infections_by_channel == {"proximity": 1}
