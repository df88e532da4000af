"""Unsupervised speaker-listener label propagation.

Every node keeps a memory of label occurrence counts, seeded with its own
unique label (its node id). Each pass, every node listens once: its neighbors
each speak one label drawn proportionally to their memory frequencies, and the
listener adds the most popular received label to its memory. Thresholding the
final per-node label distributions yields an overlapping cover.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .graph import Cover, Graph

SCHEDULE_SWEEP = "sweep"
SCHEDULE_UNIFORM = "uniform_draws"


class LabelMemory:
    """Multiset of labels with occurrence counts; total tracks the sum."""

    __slots__ = ("counts", "total")

    def __init__(self, label: int | None = None):
        self.counts: dict[int, int] = {}
        self.total = 0
        if label is not None:
            self.counts[label] = 1
            self.total = 1

    def add(self, label: int, k: int = 1) -> None:
        self.counts[label] = self.counts.get(label, 0) + k
        self.total += k

    def set_count(self, label: int, count: int) -> None:
        if count < 1:
            raise ValueError("label counts must stay positive")
        self.total += count - self.counts.get(label, 0)
        self.counts[label] = count

    def remove(self, label: int) -> None:
        """Delete all occurrences of label."""
        self.total -= self.counts.pop(label)

    def top(self) -> int:
        """Label with the maximal count; ties go to the lowest label id."""
        if not self.counts:
            raise ValueError("empty label memory")
        best_label = -1
        best_count = 0
        for label, count in self.counts.items():
            if count > best_count or (count == best_count and label < best_label):
                best_label, best_count = label, count
        return best_label

    def probabilities(self) -> dict[int, float]:
        return {label: count / self.total for label, count in self.counts.items()}

    def copy(self) -> "LabelMemory":
        m = LabelMemory()
        m.counts = dict(self.counts)
        m.total = self.total
        return m

    def __repr__(self) -> str:
        return f"LabelMemory({self.counts!r})"


@dataclass(frozen=True)
class SlpaParams:
    """iterations: number of evaluation passes; threshold: minimum label
    probability that survives post-processing; listener_schedule: 'sweep'
    (every node listens once per pass, shuffled) or 'uniform_draws'
    (n independent uniform listener draws per pass)."""

    iterations: int = 100
    threshold: float = 0.1
    seed: int = 0
    listener_schedule: str = SCHEDULE_SWEEP

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError("threshold must lie in [0, 1]")
        if self.listener_schedule not in (SCHEDULE_SWEEP, SCHEDULE_UNIFORM):
            raise ValueError(f"unknown listener schedule {self.listener_schedule!r}")


def init_memories(g: Graph) -> list[LabelMemory]:
    """One memory per node, holding its own unique label with count 1."""
    return [LabelMemory(v) for v in range(g.n)]


def speak(memory: LabelMemory, rng: random.Random) -> int:
    """Draw a label with probability proportional to its occurrence count."""
    if memory.total <= 0:
        raise ValueError("cannot speak from an empty memory")
    x = rng.randrange(memory.total)
    for label, count in memory.counts.items():
        x -= count
        if x < 0:
            return label
    raise AssertionError("memory total inconsistent with counts")


def listen(received: list[int], rng: random.Random) -> int:
    """Most popular label among received; ties broken uniformly at random."""
    if not received:
        raise ValueError("listen requires at least one received label")
    counts: dict[int, int] = {}
    for label in received:
        counts[label] = counts.get(label, 0) + 1
    best = max(counts.values())
    top = [label for label, c in counts.items() if c == best]
    if len(top) == 1:
        return top[0]
    return top[rng.randrange(len(top))]


def listener_order(n: int, schedule: str, rng: random.Random) -> list[int]:
    if schedule == SCHEDULE_SWEEP:
        order = list(range(n))
        rng.shuffle(order)
        return order
    return [rng.randrange(n) for _ in range(n)]


def evaluation_pass(g: Graph, memories: list[LabelMemory], rng: random.Random,
                    schedule: str = SCHEDULE_SWEEP) -> None:
    """One pass: each listener collects one spoken label per neighbor and adds
    the winner to its memory. Listeners with no neighbors are skipped."""
    for v in listener_order(g.n, schedule, rng):
        speakers = g.adjacency[v]
        if not speakers:
            continue
        received = [speak(memories[u], rng) for u in speakers]
        memories[v].add(listen(received, rng))


def post_process(memories: list[LabelMemory], threshold: float) -> Cover:
    """Threshold label distributions and group nodes by retained label.

    A label survives at a node iff count/total >= threshold. A node whose
    labels would all be deleted keeps its single top label instead, so every
    node lands in at least one community.
    """
    if not 0.0 <= threshold <= 1.0:
        raise ValueError("threshold must lie in [0, 1]")
    groups: dict[int, set[int]] = {}
    for v, memory in enumerate(memories):
        total = memory.total
        kept = [label for label, count in memory.counts.items() if count / total >= threshold]
        if not kept:
            kept = [memory.top()]
        for label in kept:
            groups.setdefault(label, set()).add(v)
    return Cover(groups[label] for label in sorted(groups))


def run_slpa(g: Graph, params: SlpaParams) -> Cover:
    """Full pipeline: init, `iterations` evaluation passes, post-process.

    Deterministic for a fixed graph and params (seed included).
    """
    rng = random.Random(params.seed)
    memories = init_memories(g)
    for _ in range(params.iterations):
        evaluation_pass(g, memories, rng, params.listener_schedule)
    return post_process(memories, params.threshold)
