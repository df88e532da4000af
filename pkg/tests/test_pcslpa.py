"""Constrained propagation and repair tests.

Repair examples pin exact memory states before and after each rule, since
the rules are defined on label multisets and are easy to get subtly wrong
(count raising, direction blocking, deletion side choice, emptiness guard).
"""

from __future__ import annotations

import random

import pytest

from pcslpa.constrained import (
    PcSlpaParams,
    RepairReport,
    constrained_evaluation_pass,
    constrained_speaker_set,
    init_constrained,
    repair_cannot_link,
    repair_must_link,
    run_pcslpa,
    run_pcslpa_report,
)
from pcslpa.constraints import Budget, ConstraintStore, GroundTruthOracle, select_constraints
from pcslpa.graph import build_graph
from pcslpa.planted import gen_planted_overlap
from pcslpa.slpa import LabelMemory, SlpaParams, init_memories, run_slpa


def mem(counts: dict[int, int]) -> LabelMemory:
    m = LabelMemory()
    for label, k in counts.items():
        m.add(label, k)
    return m


def cover_key(cover):
    return {frozenset(c) for c in cover.communities}


def test_init_exchanges_labels_across_must_link_pairs():
    g = build_graph(2, [(0, 1)])
    store = ConstraintStore()
    store.add_must_link(0, 1)
    mems = init_constrained(g, store)
    assert mems[0].counts == {0: 1, 1: 1}
    assert mems[1].counts == {1: 1, 0: 1}
    assert mems[0].total == mems[1].total == 2


def test_init_without_constraints_matches_plain_init():
    g = build_graph(3, [(0, 1), (1, 2)])
    a = init_constrained(g, ConstraintStore())
    b = init_memories(g)
    assert [m.counts for m in a] == [m.counts for m in b]


def test_init_accumulates_multiple_partners():
    g = build_graph(3, [(0, 1), (0, 2)])
    store = ConstraintStore()
    store.add_must_link(0, 1)
    store.add_must_link(0, 2)
    mems = init_constrained(g, store)
    assert mems[0].counts == {0: 1, 1: 1, 2: 1}
    assert mems[0].total == 3


def test_speaker_set_adds_ml_and_removes_cl():
    g = build_graph(6, [(0, 1), (0, 2)])
    store = ConstraintStore()
    store.add_must_link(0, 5)
    store.add_cannot_link(0, 2)
    assert constrained_speaker_set(g, store, 0) == [1, 5]


def test_speaker_set_unconstrained_is_the_adjacency_list_itself():
    # identity matters: the unsupervised rng stream must be byte-for-byte
    # preserved when the store is empty
    g = build_graph(3, [(0, 1), (0, 2)])
    assert constrained_speaker_set(g, ConstraintStore(), 0) is g.adjacency[0]


def test_speaker_set_can_empty_out():
    g = build_graph(2, [(0, 1)])
    store = ConstraintStore()
    store.add_cannot_link(0, 1)
    assert constrained_speaker_set(g, store, 0) == []


def test_listener_rejects_labels_of_cannot_link_partners():
    g = build_graph(8, [(0, 1), (0, 2), (0, 3)])
    store = ConstraintStore()
    store.add_cannot_link(0, 7)
    mems = [LabelMemory(v) for v in range(8)]
    mems[1] = mem({7: 1})
    mems[2] = mem({7: 1})
    mems[3] = mem({8: 1})
    # seed 3 puts node 0 first in the sweep, so its speakers are still
    # pristine: labels 7,7,8 arrive and 7 is rejected
    constrained_evaluation_pass(g, store, mems, random.Random(3))
    assert mems[0].counts == {0: 1, 8: 1}


def test_listener_unchanged_when_every_label_is_rejected():
    g = build_graph(8, [(0, 1), (0, 2)])
    store = ConstraintStore()
    store.add_cannot_link(0, 7)
    mems = [LabelMemory(v) for v in range(8)]
    mems[1] = mem({7: 1})
    mems[2] = mem({7: 1})
    constrained_evaluation_pass(g, store, mems, random.Random(3))
    assert mems[0].counts == {0: 1}


def test_ml_repair_exchanges_tops_at_receiver_max():
    store = ConstraintStore()
    store.add_must_link(0, 1)
    mems = [mem({100: 5, 101: 1}), mem({102: 4})]
    report = repair_must_link(mems, store)
    assert mems[0].counts == {100: 5, 101: 1, 102: 5}
    assert mems[1].counts == {102: 4, 100: 4}
    assert report.ml_exchanges == 1
    assert report.ml_blocked_transfers == 0
    # both tops now agree
    assert mems[0].top() == mems[1].top() == 100


def test_ml_repair_skips_pairs_already_aligned():
    store = ConstraintStore()
    store.add_must_link(0, 1)
    mems = [mem({9: 3}), mem({9: 2, 4: 1})]
    report = repair_must_link(mems, store)
    assert report.ml_exchanges == 0
    assert mems[0].counts == {9: 3}
    assert mems[1].counts == {9: 2, 4: 1}


def test_ml_repair_blocks_direction_via_cl_partner_top():
    # 1 may not receive 0's top label 100 because 1's cannot-link partner 2
    # tops on it; the other direction still transfers
    store = ConstraintStore()
    store.add_must_link(0, 1)
    store.add_cannot_link(1, 2)
    mems = [mem({100: 5}), mem({102: 4}), mem({100: 7, 5: 1})]
    report = repair_must_link(mems, store)
    assert mems[0].counts == {100: 5, 102: 5}
    assert mems[1].counts == {102: 4}
    assert report.ml_exchanges == 1
    assert report.ml_blocked_transfers == 1


def test_ml_repair_strict_block_widens_to_contained_labels():
    store = ConstraintStore()
    store.add_must_link(0, 1)
    store.add_cannot_link(1, 2)
    # partner 2 holds 100 but tops on 7: lax mode transfers, strict blocks
    mems_lax = [mem({100: 5}), mem({102: 4}), mem({7: 9, 100: 1})]
    repair_must_link(mems_lax, store)
    assert 100 in mems_lax[1].counts
    mems_strict = [mem({100: 5}), mem({102: 4}), mem({7: 9, 100: 1})]
    report = repair_must_link(mems_strict, store, strict_block=True)
    assert 100 not in mems_strict[1].counts
    assert report.ml_blocked_transfers == 1


def test_cl_repair_deletes_common_label_from_smaller_holder():
    store = ConstraintStore()
    store.add_cannot_link(0, 1)
    mems = [mem({100: 3, 101: 1}), mem({100: 2, 102: 2})]
    report = repair_cannot_link(mems, store, random.Random(0))
    assert mems[0].counts == {100: 3, 101: 1}
    assert mems[1].counts == {102: 2}
    assert report.cl_deletions == 1
    assert report.cl_guard_exceptions == 0


def test_cl_repair_deletion_falls_to_partner_when_loser_is_single_label():
    store = ConstraintStore()
    store.add_cannot_link(0, 1)
    # 0 holds the smaller count but only that one label; 1 absorbs the loss
    mems = [mem({100: 2}), mem({100: 3, 103: 1})]
    report = repair_cannot_link(mems, store, random.Random(0))
    assert mems[0].counts == {100: 2}
    assert mems[1].counts == {103: 1}
    assert report.cl_deletions == 1
    assert set(mems[0].counts).isdisjoint(mems[1].counts)


def test_cl_repair_guard_when_both_sides_would_empty():
    store = ConstraintStore()
    store.add_cannot_link(0, 1)
    mems = [mem({100: 2}), mem({100: 2})]
    report = repair_cannot_link(mems, store, random.Random(0))
    assert mems[0].counts == {100: 2}
    assert mems[1].counts == {100: 2}
    assert report.cl_deletions == 0
    assert report.cl_guard_exceptions == 1


def test_cl_repair_handles_multiple_common_labels():
    store = ConstraintStore()
    store.add_cannot_link(0, 1)
    mems = [mem({100: 2, 101: 3, 104: 9}), mem({100: 5, 101: 1, 105: 4})]
    report = repair_cannot_link(mems, store, random.Random(0))
    assert set(mems[0].counts).isdisjoint(mems[1].counts)
    assert report.cl_deletions == 2
    assert mems[0].counts == {101: 3, 104: 9}
    assert mems[1].counts == {100: 5, 105: 4}


def test_cl_repair_ignores_disjoint_pairs():
    store = ConstraintStore()
    store.add_cannot_link(0, 1)
    mems = [mem({1: 4}), mem({2: 6})]
    report = repair_cannot_link(mems, store, random.Random(0))
    assert report.cl_deletions == 0
    assert mems[0].counts == {1: 4}


def test_cl_repair_tie_side_is_random_but_seeded():
    store = ConstraintStore()
    store.add_cannot_link(0, 1)
    outcomes = set()
    for seed in range(20):
        mems = [mem({100: 2, 101: 1}), mem({100: 2, 102: 1})]
        repair_cannot_link(mems, store, random.Random(seed))
        outcomes.add(100 in mems[0].counts)
    # over 20 seeds both sides must lose at least once
    assert outcomes == {True, False}


def test_empty_store_reduces_to_unsupervised_run():
    g, _ = gen_planted_overlap(2, 10, 3, 1.0, 0.0, seed=0)
    for seed in range(5):
        base = SlpaParams(iterations=40, threshold=0.1, seed=seed)
        plain = run_slpa(g, base)
        constrained = run_pcslpa(g, ConstraintStore(), PcSlpaParams(base=base))
        assert cover_key(plain) == cover_key(constrained)


def test_output_communities_respect_cannot_links():
    g, truth = gen_planted_overlap(2, 10, 3, 1.0, 0.0, seed=0)
    for seed in range(3):
        store = select_constraints(g, GroundTruthOracle(truth),
                                   Budget.from_fraction(0.05, g.n),
                                   rng=random.Random(seed))
        base = SlpaParams(iterations=50, threshold=0.1, seed=seed)
        cover, report = run_pcslpa_report(g, store, PcSlpaParams(base=base))
        for u, v in store.cl:
            for comm in cover.communities:
                assert not (u in comm and v in comm)
        assert report.cl_guard_exceptions == 0


def test_periodic_repair_schedule_also_ends_clean():
    g, truth = gen_planted_overlap(2, 10, 3, 1.0, 0.0, seed=0)
    store = select_constraints(g, GroundTruthOracle(truth),
                               Budget.from_fraction(0.05, g.n),
                               rng=random.Random(1))
    base = SlpaParams(iterations=30, threshold=0.1, seed=1)
    cover, _ = run_pcslpa_report(g, store, PcSlpaParams(base=base, repair_every=5))
    for u, v in store.cl:
        for comm in cover.communities:
            assert not (u in comm and v in comm)


def test_constrained_run_is_deterministic():
    g, truth = gen_planted_overlap(2, 10, 3, 1.0, 0.0, seed=2)
    store = select_constraints(g, GroundTruthOracle(truth),
                               Budget.from_fraction(0.05, g.n),
                               rng=random.Random(3))
    params = PcSlpaParams(base=SlpaParams(iterations=30, seed=7))
    c1, r1 = run_pcslpa_report(g, store, params)
    c2, r2 = run_pcslpa_report(g, store, params)
    assert cover_key(c1) == cover_key(c2)
    assert r1 == r2


def test_params_validation_and_report_text():
    with pytest.raises(ValueError):
        PcSlpaParams(repair_every=0)
    text = RepairReport(1, 2, 3, 4).as_text()
    assert "ml_exchanges 1" in text
    assert "cl_guard_exceptions 4" in text
