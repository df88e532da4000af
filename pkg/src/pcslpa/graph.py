"""Undirected graphs and overlapping covers: loading, validation, file formats.

Edge-list format: one "u v" pair per line, whitespace-separated, '#' starts a
comment line. Cover format: one community per line, whitespace-separated member
tokens. Node tokens are remapped to dense internal ids 0..n-1 in order of first
appearance; the original tokens are kept in a bidirectional map.
"""

from __future__ import annotations

import logging
from bisect import bisect_left
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

logger = logging.getLogger(__name__)


class ParseError(ValueError):
    """Malformed input line, with 1-based line number context."""

    def __init__(self, message: str, line_no: int | None = None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


class IdMap:
    """Bijection between external node tokens and dense internal indices."""

    def __init__(self) -> None:
        self._to_internal: dict[str, int] = {}
        self._to_external: list[str] = []

    def intern(self, token: str) -> int:
        """Return the internal id for token, assigning the next index if new."""
        idx = self._to_internal.get(token)
        if idx is None:
            idx = len(self._to_external)
            self._to_internal[token] = idx
            self._to_external.append(token)
        return idx

    def internal(self, token: str) -> int:
        try:
            return self._to_internal[token]
        except KeyError:
            raise KeyError(f"unknown node token {token!r}") from None

    def external(self, index: int) -> str:
        return self._to_external[index]

    def __len__(self) -> int:
        return len(self._to_external)

    def __contains__(self, token: str) -> bool:
        return token in self._to_internal

    @classmethod
    def identity(cls, n: int) -> "IdMap":
        """Id map whose external tokens are the decimal indices themselves."""
        m = cls()
        for i in range(n):
            m.intern(str(i))
        return m


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph over dense internal node ids.

    Immutable after construction; safe to share read-only across runs.
    adjacency lists are sorted ascending.
    """

    n: int
    adjacency: list[list[int]] = field(repr=False)
    m: int
    ids: IdMap = field(repr=False)

    def degree(self, v: int) -> int:
        if not 0 <= v < self.n:
            raise IndexError(f"node {v} out of range for graph with n={self.n}")
        return len(self.adjacency[v])

    def has_edge(self, u: int, v: int) -> bool:
        adj = self.adjacency[u]
        i = bisect_left(adj, v)
        return i < len(adj) and adj[i] == v

    def edges(self) -> Iterator[tuple[int, int]]:
        """Each undirected edge once, as (u, v) with u < v, sorted."""
        for u in range(self.n):
            for v in self.adjacency[u]:
                if u < v:
                    yield (u, v)


def build_graph(n: int, edges: Iterable[tuple[int, int]], ids: IdMap | None = None) -> Graph:
    """Assemble a Graph from internal-id edges, dropping self-loops/duplicates.

    Nodes 0..n-1 exist even when isolated. ids defaults to the identity map.
    """
    if n < 0:
        raise ValueError("node count must be non-negative")
    seen: set[tuple[int, int]] = set()
    for u, v in edges:
        if not (0 <= u < n and 0 <= v < n):
            raise ValueError(f"edge ({u},{v}) out of range for n={n}")
        if u == v:
            continue
        seen.add((u, v) if u < v else (v, u))
    adjacency: list[list[int]] = [[] for _ in range(n)]
    for u, v in seen:
        adjacency[u].append(v)
        adjacency[v].append(u)
    for a in adjacency:
        a.sort()
    if ids is None:
        ids = IdMap.identity(n)
    elif len(ids) != n:
        raise ValueError(f"id map covers {len(ids)} tokens, graph has {n} nodes")
    return Graph(n=n, adjacency=adjacency, m=len(seen), ids=ids)


def _iter_lines(source) -> Iterator[str]:
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as f:
            yield from f
    elif hasattr(source, "read"):
        yield from source
    else:
        yield from source


def load_edge_list(source) -> Graph:
    """Load an undirected simple graph from edge-list text.

    source may be a path, an open text file, or an iterable of lines. Comment
    lines ('#') and blank lines are skipped. Self-loops and duplicate edges are
    dropped and their counts logged. Node ids are remapped densely in
    first-appearance order.
    """
    ids = IdMap()
    pairs: set[tuple[int, int]] = set()
    self_loops = 0
    duplicates = 0
    saw_data = False
    for line_no, raw in enumerate(_iter_lines(source), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if len(tokens) != 2:
            raise ParseError(f"expected 2 node tokens, got {len(tokens)}: {line!r}", line_no)
        saw_data = True
        u = ids.intern(tokens[0])
        v = ids.intern(tokens[1])
        if u == v:
            self_loops += 1
            continue
        p = (u, v) if u < v else (v, u)
        if p in pairs:
            duplicates += 1
        else:
            pairs.add(p)
    if not saw_data:
        raise ParseError("empty edge list: no edges found")
    if self_loops or duplicates:
        logger.warning("dropped %d self-loop(s) and %d duplicate edge(s)", self_loops, duplicates)
    return build_graph(len(ids), pairs, ids)


def write_edge_list(g: Graph, sink) -> None:
    """Write g as edge-list text (external tokens, one edge per line).

    Isolated nodes cannot be represented in this format and are not written.
    """
    close = False
    if isinstance(sink, (str, Path)):
        sink = open(sink, "w", encoding="utf-8")
        close = True
    try:
        for u, v in g.edges():
            sink.write(f"{g.ids.external(u)} {g.ids.external(v)}\n")
    finally:
        if close:
            sink.close()


class Cover:
    """A set of possibly-overlapping communities (node sets) over internal ids.

    Duplicate communities are collapsed on construction; empty communities are
    rejected. Immutable by convention after construction.
    """

    def __init__(self, communities: Iterable[Iterable[int]]):
        seen: set[frozenset[int]] = set()
        comms: list[frozenset[int]] = []
        for c in communities:
            fs = frozenset(c)
            if not fs:
                raise ValueError("cover contains an empty community")
            if fs not in seen:
                seen.add(fs)
                comms.append(fs)
        self.communities: list[frozenset[int]] = comms
        membership: dict[int, list[int]] = {}
        for idx, c in enumerate(comms):
            for v in c:
                membership.setdefault(v, []).append(idx)
        self._membership = membership

    def memberships(self, v: int) -> list[int]:
        """Indices of the communities containing v (empty list if uncovered)."""
        return self._membership.get(v, [])

    def nodes(self) -> set[int]:
        return set(self._membership)

    def restrict(self, universe: set[int]) -> "Cover":
        """Cover intersected with universe; emptied communities are dropped."""
        kept = [c & universe for c in self.communities]
        return Cover(c for c in kept if c)

    def __len__(self) -> int:
        return len(self.communities)

    def __iter__(self) -> Iterator[frozenset[int]]:
        return iter(self.communities)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Cover):
            return NotImplemented
        return set(self.communities) == set(other.communities)

    def __repr__(self) -> str:
        return f"Cover({len(self.communities)} communities, {len(self._membership)} nodes)"


def load_cover(source, id_map: IdMap, min_size: int = 1, strict: bool = True) -> Cover:
    """Load a cover: one community per line, whitespace-separated member tokens.

    Communities smaller than min_size (after in-line de-duplication) are
    dropped. Tokens absent from id_map raise ParseError when strict, otherwise
    they are skipped with a warning.
    """
    comms: list[set[int]] = []
    for line_no, raw in enumerate(_iter_lines(source), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        members: set[int] = set()
        for token in line.split():
            if token in id_map:
                members.add(id_map.internal(token))
            elif strict:
                raise ParseError(f"unknown node token {token!r}", line_no)
            else:
                logger.warning("line %d: skipping unknown node token %r", line_no, token)
        if len(members) >= min_size and members:
            comms.append(members)
    return Cover(comms)


def write_cover(cover: Cover, sink, id_map: IdMap) -> None:
    """Write a cover as one community per line, members as external tokens."""
    close = False
    if isinstance(sink, (str, Path)):
        sink = open(sink, "w", encoding="utf-8")
        close = True
    try:
        for c in cover.communities:
            sink.write(" ".join(id_map.external(v) for v in sorted(c)) + "\n")
    finally:
        if close:
            sink.close()
