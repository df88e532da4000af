"""Pairwise constraints: storage, ground-truth oracles, and budgeted selection.

Selection interleaves random pair queries with forbidden-triad closure: once
two must-link pairs (a,b) and (a,c) exist, the unresolved pair (b,c) is an
open triad that must itself be put to the oracle, because must-link is not
transitive when communities overlap.
"""

from __future__ import annotations

import enum
import logging
import random
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .graph import Cover, Graph, IdMap, ParseError, _iter_lines

logger = logging.getLogger(__name__)


class Relation(enum.Enum):
    MUST_LINK = "ML"
    CANNOT_LINK = "CL"


def canonical_pair(u: int, v: int) -> tuple[int, int]:
    if u == v:
        raise ValueError(f"constraint pair must join distinct nodes, got ({u},{v})")
    return (u, v) if u < v else (v, u)


class ConstraintStore:
    """Symmetric must-link / cannot-link pair sets plus a query ledger.

    Pairs are stored canonically (low id first). A pair can carry only one
    relation; inserting the opposite relation raises. Every insertion counts
    one oracle query against queries_used.
    """

    def __init__(self) -> None:
        self.ml: set[tuple[int, int]] = set()
        self.cl: set[tuple[int, int]] = set()
        self.queries_used = 0
        self._ml_partners: dict[int, set[int]] = {}
        self._cl_partners: dict[int, set[int]] = {}

    def add(self, u: int, v: int, relation: Relation) -> None:
        pair = canonical_pair(u, v)
        target, opposite = (self.ml, self.cl) if relation is Relation.MUST_LINK else (self.cl, self.ml)
        if pair in opposite:
            raise ValueError(f"pair {pair} already holds the opposite relation")
        if pair in target:
            raise ValueError(f"pair {pair} already stored")
        target.add(pair)
        partners = self._ml_partners if relation is Relation.MUST_LINK else self._cl_partners
        partners.setdefault(pair[0], set()).add(pair[1])
        partners.setdefault(pair[1], set()).add(pair[0])
        self.queries_used += 1

    def add_must_link(self, u: int, v: int) -> None:
        self.add(u, v, Relation.MUST_LINK)

    def add_cannot_link(self, u: int, v: int) -> None:
        self.add(u, v, Relation.CANNOT_LINK)

    def has_pair(self, u: int, v: int) -> bool:
        pair = canonical_pair(u, v)
        return pair in self.ml or pair in self.cl

    def ml_partners(self, v: int) -> set[int]:
        return self._ml_partners.get(v, set())

    def cl_partners(self, v: int) -> set[int]:
        return self._cl_partners.get(v, set())

    def __len__(self) -> int:
        return len(self.ml) + len(self.cl)

    def __repr__(self) -> str:
        return f"ConstraintStore(ml={len(self.ml)}, cl={len(self.cl)}, queries={self.queries_used})"


class Oracle:
    """Supervision source answering pairwise queries.

    covered_nodes() bounds which nodes may be queried; None means every node
    is eligible.
    """

    def answer(self, u: int, v: int) -> Relation:
        raise NotImplementedError

    def covered_nodes(self) -> frozenset[int] | None:
        return None


class GroundTruthOracle(Oracle):
    """Noiseless oracle simulated from a ground-truth cover: must-link iff the
    two nodes share at least one community."""

    def __init__(self, truth: Cover):
        self._truth = truth
        self._covered = frozenset(truth.nodes())

    def answer(self, u: int, v: int) -> Relation:
        if u == v:
            raise ValueError("oracle queries require two distinct nodes")
        mu = self._truth.memberships(u)
        mv = self._truth.memberships(v)
        if not mu:
            raise ValueError(f"node {u} belongs to no ground-truth community")
        if not mv:
            raise ValueError(f"node {v} belongs to no ground-truth community")
        common = set(mu) & set(mv)
        return Relation.MUST_LINK if common else Relation.CANNOT_LINK

    def covered_nodes(self) -> frozenset[int]:
        return self._covered


@dataclass(frozen=True)
class Budget:
    """Query budget as a fraction of all n·(n−1)/2 node pairs."""

    pct: float
    max_queries: int

    def __post_init__(self):
        if not 0.0 <= self.pct <= 1.0:
            raise ValueError("budget fraction must lie in [0, 1]")
        if self.max_queries < 0:
            raise ValueError("max_queries must be non-negative")

    @classmethod
    def from_fraction(cls, pct: float, n_nodes: int) -> "Budget":
        """floor(pct * n(n-1)/2), with pct read at decimal precision so that
        e.g. pct=0.01, n=1000 gives exactly 4995 (float multiply can round
        an integral product below its true value)."""
        if n_nodes < 0:
            raise ValueError("node count must be non-negative")
        total = n_nodes * (n_nodes - 1) // 2
        max_q = int(Fraction(str(pct)) * total)
        return cls(pct=pct, max_queries=max_q)


def find_forbidden_triads(store: ConstraintStore) -> list[tuple[int, int]]:
    """All open pairs (b,c): some a is must-linked to both b and c, and (b,c)
    carries no stored relation. Sorted canonical pairs, no duplicates."""
    open_pairs: set[tuple[int, int]] = set()
    for partners in store._ml_partners.values():
        ps = sorted(partners)
        for i, b in enumerate(ps):
            for c in ps[i + 1:]:
                pair = (b, c)
                if pair not in store.ml and pair not in store.cl:
                    open_pairs.add(pair)
    return sorted(open_pairs)


def _sample_unqueried_pairs(eligible: list[int], count: int,
                            queried: set[tuple[int, int]], rng: random.Random) -> list[tuple[int, int]]:
    """Up to count distinct eligible pairs not yet queried, drawn uniformly."""
    n = len(eligible)
    total = n * (n - 1) // 2
    remaining = total - len(queried)
    count = min(count, remaining)
    if count <= 0:
        return []
    if count * 2 >= remaining:
        # dense request: materialize the leftover pool
        pool = [(eligible[i], eligible[j])
                for i in range(n) for j in range(i + 1, n)
                if (eligible[i], eligible[j]) not in queried]
        return rng.sample(pool, count)
    picked: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    while len(picked) < count:
        i = rng.randrange(n)
        j = rng.randrange(n)
        if i == j:
            continue
        pair = canonical_pair(eligible[i], eligible[j])
        if pair in queried or pair in seen:
            continue
        seen.add(pair)
        picked.append(pair)
    return picked


def select_constraints(g: Graph, oracle: Oracle, budget: Budget,
                       init_fraction: float = 0.5,
                       rng: random.Random | None = None) -> ConstraintStore:
    """Budgeted constraint selection: random seeding plus triad closure.

    Rounds alternate until the budget or the eligible pair pool runs out:
    (1) query up to floor(init_fraction * max_queries) fresh random pairs
    among oracle-covered nodes; (2) repeatedly query all open forbidden
    triads until closure. Every oracle call, closure included, costs budget.
    No pair is ever queried twice.
    """
    if not 0.0 < init_fraction <= 1.0:
        raise ValueError("init_fraction must lie in (0, 1]")
    if rng is None:
        rng = random.Random()
    store = ConstraintStore()
    covered = oracle.covered_nodes()
    eligible = sorted(range(g.n)) if covered is None else sorted(v for v in covered if 0 <= v < g.n)
    max_q = budget.max_queries
    if max_q == 0 or len(eligible) < 2:
        return store
    total_pairs = len(eligible) * (len(eligible) - 1) // 2
    chunk = max(1, int(init_fraction * max_q))
    queried: set[tuple[int, int]] = set()

    def query(pair: tuple[int, int]) -> None:
        store.add(pair[0], pair[1], oracle.answer(*pair))
        queried.add(pair)

    while store.queries_used < max_q and len(queried) < total_pairs:
        for pair in _sample_unqueried_pairs(eligible, min(chunk, max_q - store.queries_used), queried, rng):
            query(pair)
        while store.queries_used < max_q:
            open_triads = find_forbidden_triads(store)
            if not open_triads:
                break
            for pair in open_triads:
                if store.queries_used >= max_q:
                    break
                query(pair)
    return store


def write_constraints(store: ConstraintStore, sink, id_map: IdMap) -> None:
    """One "u v ML|CL" triple per line, sorted by canonical internal pair."""
    close = False
    if isinstance(sink, (str, Path)):
        sink = open(sink, "w", encoding="utf-8")
        close = True
    try:
        rows = [(pair, "ML") for pair in store.ml] + [(pair, "CL") for pair in store.cl]
        for (u, v), tag in sorted(rows):
            sink.write(f"{id_map.external(u)} {id_map.external(v)} {tag}\n")
    finally:
        if close:
            sink.close()


def load_constraints(source, id_map: IdMap) -> ConstraintStore:
    store = ConstraintStore()
    for line_no, raw in enumerate(_iter_lines(source), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if len(tokens) != 3:
            raise ParseError(f"expected 'u v ML|CL', got {line!r}", line_no)
        tu, tv, tag = tokens
        if tag not in ("ML", "CL"):
            raise ParseError(f"unknown relation tag {tag!r}", line_no)
        if tu not in id_map or tv not in id_map:
            missing = tu if tu not in id_map else tv
            raise ParseError(f"unknown node token {missing!r}", line_no)
        store.add(id_map.internal(tu), id_map.internal(tv),
                  Relation.MUST_LINK if tag == "ML" else Relation.CANNOT_LINK)
    return store
