"""Pairwise-constrained speaker-listener label propagation.

Constraints act at four points: must-link pairs exchange labels at
initialization; must-link partners join and cannot-link partners leave each
listener's speaker set; labels originated by a cannot-link partner are
rejected on arrival; and a repair step after propagation aligns must-link
memories on a shared top label and strips labels shared across cannot-link
pairs. With an empty constraint store every step reduces exactly to the
unsupervised algorithm, including the random stream it consumes.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .constraints import ConstraintStore
from .graph import Cover, Graph
from .slpa import LabelMemory, SlpaParams, listen, listener_order, post_process, speak


@dataclass(frozen=True)
class PcSlpaParams:
    """base: propagation parameters shared with the unsupervised algorithm.
    repair_every: None runs the repair step once after all passes (the
    default); k runs it after every k-th pass and once more after the final
    pass, so cannot-link satisfaction holds at output either way.
    strict_block: widen the must-link repair block from "a cannot-link
    partner's top label is L" to "a cannot-link partner's memory contains L".
    """

    base: SlpaParams = field(default_factory=SlpaParams)
    repair_every: int | None = None
    strict_block: bool = False

    def __post_init__(self):
        if self.repair_every is not None and self.repair_every < 1:
            raise ValueError("repair_every must be >= 1 when set")


@dataclass
class RepairReport:
    """Counters from the constraint-processing step, summed over repair runs."""

    ml_exchanges: int = 0
    ml_blocked_transfers: int = 0
    cl_deletions: int = 0
    cl_guard_exceptions: int = 0

    def as_text(self) -> str:
        return (
            f"ml_exchanges {self.ml_exchanges}\n"
            f"ml_blocked_transfers {self.ml_blocked_transfers}\n"
            f"cl_deletions {self.cl_deletions}\n"
            f"cl_guard_exceptions {self.cl_guard_exceptions}\n"
        )


def init_constrained(g: Graph, store: ConstraintStore) -> list[LabelMemory]:
    """Unique label per node, then each must-link pair exchanges labels: both
    nodes gain the partner's label with count 1."""
    memories = [LabelMemory(v) for v in range(g.n)]
    for u, v in sorted(store.ml):
        memories[u].add(v)
        memories[v].add(u)
    return memories


def constrained_speaker_set(g: Graph, store: ConstraintStore, listener: int) -> list[int]:
    """(neighbors ∪ must-link partners) − cannot-link partners − listener.

    Returns the adjacency list itself when the listener is unconstrained, so
    the unsupervised code path is preserved exactly; callers must not mutate.
    """
    ml = store.ml_partners(listener)
    cl = store.cl_partners(listener)
    if not ml and not cl:
        return g.adjacency[listener]
    speakers = set(g.adjacency[listener])
    speakers |= ml
    speakers -= cl
    speakers.discard(listener)
    return sorted(speakers)


def constrained_evaluation_pass(g: Graph, store: ConstraintStore,
                                memories: list[LabelMemory], rng: random.Random,
                                schedule: str = "sweep") -> None:
    """Evaluation pass with constrained speaker sets and listener-side
    rejection of labels originated by cannot-link partners. A listener whose
    received labels are all rejected (or who has no speakers) is unchanged."""
    cl_partners = store._cl_partners
    for v in listener_order(g.n, schedule, rng):
        speakers = constrained_speaker_set(g, store, v)
        if not speakers:
            continue
        received = [speak(memories[u], rng) for u in speakers]
        blocked = cl_partners.get(v)
        if blocked:
            received = [label for label in received if label not in blocked]
            if not received:
                continue
        memories[v].add(listen(received, rng))


def _transfer_blocked(label: int, receiver: int, store: ConstraintStore,
                      memories: list[LabelMemory], strict: bool) -> bool:
    """Is giving `label` to `receiver` forbidden by its cannot-link partners?"""
    for partner in store.cl_partners(receiver):
        partner_memory = memories[partner]
        if strict:
            if label in partner_memory.counts:
                return True
        elif partner_memory.counts and partner_memory.top() == label:
            return True
    return False


def repair_must_link(memories: list[LabelMemory], store: ConstraintStore,
                     report: RepairReport | None = None,
                     strict_block: bool = False) -> RepairReport:
    """Align each must-link pair on a shared top label.

    For pairs whose top labels differ, the nodes exchange tops: each receives
    the partner's top label raised to its own current maximum count, so the
    received label ties for top. A transfer to a node is blocked when one of
    that node's cannot-link partners holds the label as its top (or at all,
    with strict_block)."""
    if report is None:
        report = RepairReport()
    for u, v in sorted(store.ml):
        mu, mv = memories[u], memories[v]
        top_u, top_v = mu.top(), mv.top()
        if top_u == top_v:
            continue
        report.ml_exchanges += 1
        max_u = max(mu.counts.values())
        max_v = max(mv.counts.values())
        if _transfer_blocked(top_v, u, store, memories, strict_block):
            report.ml_blocked_transfers += 1
        else:
            mu.set_count(top_v, max_u)
        if _transfer_blocked(top_u, v, store, memories, strict_block):
            report.ml_blocked_transfers += 1
        else:
            mv.set_count(top_u, max_v)
    return report


def repair_cannot_link(memories: list[LabelMemory], store: ConstraintStore,
                       rng: random.Random, report: RepairReport | None = None) -> RepairReport:
    """Strip labels shared across each cannot-link pair.

    Each common label is deleted entirely from the node holding it with the
    smaller count (ties resolved uniformly at random). A node holding only
    that one label keeps it and the deletion falls to the partner; if both
    would be emptied the pair stays in violation and the guard counter
    increments."""
    if report is None:
        report = RepairReport()
    for u, v in sorted(store.cl):
        mu, mv = memories[u], memories[v]
        common = sorted(set(mu.counts) & set(mv.counts))
        for label in common:
            cu, cv = mu.counts[label], mv.counts[label]
            if cu < cv:
                loser, other = mu, mv
            elif cv < cu:
                loser, other = mv, mu
            elif rng.randrange(2) == 0:
                loser, other = mu, mv
            else:
                loser, other = mv, mu
            if len(loser.counts) > 1:
                loser.remove(label)
                report.cl_deletions += 1
            elif len(other.counts) > 1:
                other.remove(label)
                report.cl_deletions += 1
            else:
                report.cl_guard_exceptions += 1
    return report


def run_pcslpa_report(g: Graph, store: ConstraintStore,
                      params: PcSlpaParams) -> tuple[Cover, RepairReport]:
    """Constrained pipeline returning the cover plus repair counters.

    init → `iterations` constrained passes → must-link then cannot-link
    repair (per repair_every) → shared post-processing. Deterministic for
    fixed inputs and seed."""
    base = params.base
    rng = random.Random(base.seed)
    memories = init_constrained(g, store)
    report = RepairReport()

    def repair() -> None:
        repair_must_link(memories, store, report, params.strict_block)
        repair_cannot_link(memories, store, rng, report)

    repaired_last = False
    for i in range(1, base.iterations + 1):
        constrained_evaluation_pass(g, store, memories, rng, base.listener_schedule)
        repaired_last = False
        if params.repair_every is not None and i % params.repair_every == 0:
            repair()
            repaired_last = True
    if not repaired_last:
        repair()
    return post_process(memories, base.threshold), report


def run_pcslpa(g: Graph, store: ConstraintStore, params: PcSlpaParams) -> Cover:
    """Constrained pipeline; see run_pcslpa_report for the repair counters."""
    cover, _ = run_pcslpa_report(g, store, params)
    return cover
