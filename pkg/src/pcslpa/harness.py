"""Experiment orchestration: seeded repeated runs, budget sweeps, NMI
aggregation, CSV reports, win-loss tables, and ground-truth preprocessing."""

from __future__ import annotations

import hashlib
import io
import random
import statistics
import time
from dataclasses import dataclass
from pathlib import Path

from .constrained import PcSlpaParams, run_pcslpa_report
from .constraints import Budget, GroundTruthOracle, select_constraints
from .graph import Cover, Graph, IdMap, load_cover, load_edge_list
from .nmi import overlapping_nmi
from .slpa import SlpaParams, run_slpa

ALGO_SLPA = "slpa"
ALGO_PCSLPA = "pcslpa"


def mix_seed(base: int, *tokens: str) -> int:
    """Stable 64-bit seed derivation: base XOR blake2b over the tokens."""
    digest = hashlib.blake2b(":".join(tokens).encode(), digest_size=8).digest()
    return (base ^ int.from_bytes(digest, "big")) & 0xFFFFFFFFFFFFFFFF


def derive_seed(base: int, pct: float, run: int) -> int:
    """Per-(budget, run) seed; independent of execution order."""
    return mix_seed(base, f"{pct:.10g}", str(run))


@dataclass(frozen=True)
class ExperimentConfig:
    edges: Path
    truth: Path
    algorithm: str = ALGO_SLPA
    budget_pcts: tuple[float, ...] = ()
    iterations: int = 100
    threshold: float = 0.1
    runs: int = 20
    seed: int = 12345
    min_comm_size: int = 1
    universe: str = "covered"  # or "all"
    init_fraction: float = 0.5
    repair_every: int | None = None
    listener_schedule: str = "sweep"
    network_id: str = ""

    def __post_init__(self):
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if self.algorithm not in (ALGO_SLPA, ALGO_PCSLPA):
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if self.universe not in ("covered", "all"):
            raise ValueError(f"unknown universe mode {self.universe!r}")
        if any(not 0.0 <= p <= 1.0 for p in self.budget_pcts):
            raise ValueError("budget fractions must lie in [0, 1]")
        if self.algorithm == ALGO_PCSLPA and not self.budget_pcts:
            raise ValueError("pcslpa experiments need at least one budget fraction")
        if not self.network_id:
            object.__setattr__(self, "network_id", Path(self.edges).stem)


@dataclass(frozen=True)
class RunResult:
    network: str
    algo: str
    pct: float
    seed: int
    nmi: float
    ms: float
    ml_exchanges: int = 0
    ml_blocked_transfers: int = 0
    cl_deletions: int = 0
    cl_guard_exceptions: int = 0


@dataclass(frozen=True)
class LfrMeta:
    """Descriptive generation tags attached to an ingested benchmark network."""

    n: int
    avg_degree: float
    max_degree: int
    min_comm: int
    max_comm: int
    degree_exp: float
    comm_exp: float
    mixing: float
    comms_per_node: int

    def in_benchmark_ranges(self) -> bool:
        """Whether the tags sit inside the customary benchmark sweep: 1000-5000
        nodes, avg degree 10, max degree 50, community sizes 10-50 or 20-100,
        exponents 2 and 1, mixing 0.1-0.3, 1-8 communities per node."""
        return (
            1000 <= self.n <= 5000
            and self.avg_degree == 10
            and self.max_degree == 50
            and (self.min_comm, self.max_comm) in ((10, 50), (20, 100))
            and self.degree_exp == 2
            and self.comm_exp == 1
            and 0.1 <= self.mixing <= 0.3
            and 1 <= self.comms_per_node <= 8
        )


def load_experiment_inputs(cfg: ExperimentConfig) -> tuple[Graph, Cover]:
    try:
        g = load_edge_list(cfg.edges)
    except OSError as e:
        raise RuntimeError(f"cannot load network {cfg.edges}: {e}") from e
    try:
        truth = load_cover(cfg.truth, g.ids, min_size=cfg.min_comm_size)
    except OSError as e:
        raise RuntimeError(f"cannot load ground truth {cfg.truth}: {e}") from e
    return g, truth


def experiment_cells(cfg: ExperimentConfig) -> list[tuple[str, float]]:
    """(algorithm, pct) cells in deterministic sweep order."""
    if cfg.algorithm == ALGO_SLPA:
        return [(ALGO_SLPA, 0.0)]
    return [(ALGO_PCSLPA, pct) for pct in sorted(cfg.budget_pcts)]


def run_cell(g: Graph, truth: Cover, cfg: ExperimentConfig, algo: str,
             pct: float, run_index: int):
    """One (algorithm, budget, run) cell; returns (RunResult, Cover, store).

    The store is None for the unsupervised algorithm. Seeds are derived per
    cell, never shared.
    """
    seed = derive_seed(cfg.seed, pct, run_index)
    universe = truth.nodes() if cfg.universe == "covered" else set(range(g.n))
    base = SlpaParams(iterations=cfg.iterations, threshold=cfg.threshold,
                      seed=seed, listener_schedule=cfg.listener_schedule)
    started = time.perf_counter()
    if algo == ALGO_SLPA:
        store = None
        cover = run_slpa(g, base)
        counters = (0, 0, 0, 0)
    else:
        oracle = GroundTruthOracle(truth)
        budget = Budget.from_fraction(pct, g.n)
        select_rng = random.Random(mix_seed(seed, "select"))
        store = select_constraints(g, oracle, budget, cfg.init_fraction, select_rng)
        cover, report = run_pcslpa_report(g, store, PcSlpaParams(base=base, repair_every=cfg.repair_every))
        counters = (report.ml_exchanges, report.ml_blocked_transfers,
                    report.cl_deletions, report.cl_guard_exceptions)
    ms = (time.perf_counter() - started) * 1000.0
    score = overlapping_nmi(truth, cover, universe)
    return RunResult(cfg.network_id, algo, pct, seed, score, ms, *counters), cover, store


def run_single(g: Graph, truth: Cover, cfg: ExperimentConfig,
               algo: str, pct: float, run_index: int) -> RunResult:
    """Execute one (algorithm, budget, run) cell; seed derived, not shared."""
    result, _, _ = run_cell(g, truth, cfg, algo, pct, run_index)
    return result


def run_experiment(cfg: ExperimentConfig) -> list[RunResult]:
    """All (cell, run) results for a config, in deterministic order.

    Each result depends only on its derived seed, so the list is invariant
    under any execution order.
    """
    g, truth = load_experiment_inputs(cfg)
    results = []
    for algo, pct in experiment_cells(cfg):
        for run_index in range(cfg.runs):
            results.append(run_single(g, truth, cfg, algo, pct, run_index))
    return results


def _cell_label(algo: str, pct: float) -> str:
    return algo if algo == ALGO_SLPA else f"{algo}@{pct:g}"


@dataclass(frozen=True)
class CellSummary:
    network: str
    algo: str
    pct: float
    mean_nmi: float
    std_nmi: float
    runs: int


def summarize(results: list[RunResult]) -> list[CellSummary]:
    """Mean and sample standard deviation of NMI per (network, algo, pct)."""
    groups: dict[tuple[str, str, float], list[float]] = {}
    for r in results:
        groups.setdefault((r.network, r.algo, r.pct), []).append(r.nmi)
    out = []
    for (network, algo, pct), scores in sorted(groups.items()):
        std = statistics.stdev(scores) if len(scores) > 1 else 0.0
        out.append(CellSummary(network, algo, pct, statistics.fmean(scores), std, len(scores)))
    return out


def results_csv(results: list[RunResult], include_timing: bool = True) -> str:
    """Raw per-run CSV. Timing can be dropped for byte-stable comparisons."""
    buf = io.StringIO()
    headers = ["network", "algo", "pct", "seed", "nmi"]
    if include_timing:
        headers.append("ms")
    headers += ["ml_exchanges", "ml_blocked_transfers", "cl_deletions", "cl_guard_exceptions"]
    buf.write(",".join(headers) + "\n")
    for r in results:
        row = [r.network, r.algo, f"{r.pct:g}", str(r.seed), f"{r.nmi:.6f}"]
        if include_timing:
            row.append(f"{r.ms:.3f}")
        row += [str(r.ml_exchanges), str(r.ml_blocked_transfers),
                str(r.cl_deletions), str(r.cl_guard_exceptions)]
        buf.write(",".join(row) + "\n")
    return buf.getvalue()


def sweep_report(results: list[RunResult]) -> str:
    """Aggregated CSV: one row per network, one column per algorithm/budget
    cell (unsupervised first, then budgets ascending), mean NMI to 4 decimals.
    Byte-stable for identical inputs."""
    summaries = summarize(results)
    cells = sorted({(s.algo, s.pct) for s in summaries},
                   key=lambda c: (0, 0.0) if c[0] == ALGO_SLPA else (1, c[1]))
    networks = sorted({s.network for s in summaries})
    by_key = {(s.network, s.algo, s.pct): s for s in summaries}
    buf = io.StringIO()
    buf.write(",".join(["network"] + [_cell_label(a, p) for a, p in cells]) + "\n")
    for network in networks:
        row = [network]
        for algo, pct in cells:
            s = by_key.get((network, algo, pct))
            row.append(f"{s.mean_nmi:.4f}" if s is not None else "")
        buf.write(",".join(row) + "\n")
    return buf.getvalue()


@dataclass(frozen=True)
class WinLossTable:
    algorithms: list[str]          # ordered by descending total wins
    wins: list[list[int]]          # wins[i][j]: networks where algo i beats algo j
    ties: list[list[int]]
    total_wins: list[int]
    rank_scores: list[float]       # total wins / (networks * (algorithms - 1))
    ranks: list[int]
    networks: int

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(",".join(["algorithm"] + self.algorithms + ["total_wins", "rank_score", "rank"]) + "\n")
        denom = self.networks * (len(self.algorithms) - 1)
        for i, name in enumerate(self.algorithms):
            row = [name] + [str(w) for w in self.wins[i]]
            row.append(f"{self.total_wins[i]}/{denom}")
            row.append(f"{self.rank_scores[i]:.4f}")
            row.append(str(self.ranks[i]))
            buf.write(",".join(row) + "\n")
        return buf.getvalue()

    def to_text(self) -> str:
        denom = self.networks * (len(self.algorithms) - 1)
        width = max(len(a) for a in self.algorithms) + 2
        cols = max(6, max(len(a) for a in self.algorithms) + 1)
        lines = ["".ljust(width) + "".join(a.rjust(cols) for a in self.algorithms)
                 + "total wins".rjust(14) + "rank".rjust(6)]
        for i, name in enumerate(self.algorithms):
            cells = "".join(str(w).rjust(cols) for w in self.wins[i])
            lines.append(name.ljust(width) + cells
                         + f"{self.total_wins[i]}/{denom}".rjust(14) + str(self.ranks[i]).rjust(6))
        return "\n".join(lines) + "\n"


def win_loss_table(scores: dict[str, list[float]]) -> WinLossTable:
    """Pairwise win counts over networks from mean NMI per algorithm.

    scores maps algorithm name to its per-network mean NMI (all lists aligned
    and of equal length). Strictly greater counts a win; ties credit neither.
    """
    names = list(scores)
    if len(names) < 2:
        raise ValueError("win-loss comparison needs at least two algorithms")
    lengths = {len(v) for v in scores.values()}
    if len(lengths) != 1:
        raise ValueError("all algorithms must cover the same networks")
    n_networks = lengths.pop()
    if n_networks < 1:
        raise ValueError("win-loss comparison needs at least one network")

    wins = {a: {b: 0 for b in names} for a in names}
    ties = {a: {b: 0 for b in names} for a in names}
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            for sa, sb in zip(scores[a], scores[b]):
                if sa > sb:
                    wins[a][b] += 1
                elif sb > sa:
                    wins[b][a] += 1
                else:
                    ties[a][b] += 1
                    ties[b][a] += 1
    totals = {a: sum(wins[a][b] for b in names if b != a) for a in names}
    ordered = sorted(names, key=lambda a: (-totals[a], names.index(a)))
    denom = n_networks * (len(names) - 1)
    total_list = [totals[a] for a in ordered]
    ranks = [1 + sum(1 for t in total_list if t > total_list[i]) for i in range(len(ordered))]
    return WinLossTable(
        algorithms=ordered,
        wins=[[wins[a][b] for b in ordered] for a in ordered],
        ties=[[ties[a][b] for b in ordered] for a in ordered],
        total_wins=total_list,
        rank_scores=[totals[a] / denom for a in ordered],
        ranks=ranks,
        networks=n_networks,
    )


def internal_density(g: Graph, community: frozenset[int]) -> float:
    """Edges inside the community divided by its possible pair count."""
    members = sorted(community)
    size = len(members)
    if size < 2:
        return 0.0
    edges = 0
    for i, u in enumerate(members):
        for v in members[i + 1:]:
            if g.has_edge(u, v):
                edges += 1
    return edges / (size * (size - 1) // 2)


def filter_truth(g: Graph, cover: Cover, keep_largest: int = 5000,
                 drop_density_quartile: bool = True, min_size: int = 5) -> Cover:
    """Ground-truth preprocessing for raw community files.

    Keeps the keep_largest biggest communities, optionally discards the bottom
    quartile by internal density, collapses duplicates, and drops communities
    below min_size.
    """
    comms = sorted(cover.communities, key=lambda c: (-len(c), sorted(c)))[:keep_largest]
    if drop_density_quartile and comms:
        ranked = sorted(comms, key=lambda c: (internal_density(g, c), sorted(c)))
        comms = ranked[len(ranked) // 4:]
    comms = [c for c in comms if len(c) >= min_size]
    return Cover(sorted(comms, key=lambda c: (-len(c), sorted(c))))


def ingest_external_cover(path, id_map: IdMap, strict: bool = True) -> Cover:
    """Load a cover produced by an external algorithm, for scoring."""
    try:
        cover = load_cover(path, id_map, min_size=1, strict=strict)
    except OSError as e:
        raise RuntimeError(f"cannot load cover {path}: {e}") from e
    if len(cover) == 0:
        raise ValueError(f"no communities found in {path}")
    return cover
