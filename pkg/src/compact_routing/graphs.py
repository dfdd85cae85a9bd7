"""Labeled graphs on nodes 1..n, uniform sampling, BFS and the structural checkers."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from . import bitcodec, kernels
from .bitcodec import BitString


@dataclass(frozen=True, eq=False)
class LabeledGraph:
    """Simple undirected graph on nodes ``1..n``.

    ``adj`` is a read-only boolean matrix indexed by ``label - 1``.
    """

    n: int
    adj: np.ndarray = field(repr=False)

    def __post_init__(self):
        a = self.adj
        if a.shape != (self.n, self.n):
            raise ValueError(f"adjacency shape {a.shape} does not match n={self.n}")
        if a.diagonal().any():
            raise ValueError("self-loops are not allowed")
        if not np.array_equal(a, a.T):
            raise ValueError("adjacency must be symmetric")
        a.setflags(write=False)

    @classmethod
    def from_adjacency(cls, adj) -> "LabeledGraph":
        a = np.array(adj, dtype=bool)
        return cls(a.shape[0], a)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "LabeledGraph":
        a = np.zeros((n, n), dtype=bool)
        for u, v in edges:
            if u == v:
                raise ValueError(f"self-loop at {u}")
            a[u - 1, v - 1] = a[v - 1, u - 1] = True
        return cls(n, a)

    def __eq__(self, other):
        if not isinstance(other, LabeledGraph):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.adj, other.adj)

    def __hash__(self):
        return hash((self.n, self.encoding))

    @cached_property
    def encoding(self) -> BitString:
        return bitcodec.encode_graph(self)

    @cached_property
    def _neighbors(self) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(int(x) + 1 for x in np.flatnonzero(row)) for row in self.adj)

    def nodes(self) -> range:
        return range(1, self.n + 1)

    def neighbors(self, v: int) -> tuple[int, ...]:
        """Neighbours of ``v`` in ascending label order."""
        return self._neighbors[v - 1]

    def degree(self, v: int) -> int:
        return len(self._neighbors[v - 1])

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.adj[u - 1, v - 1])

    def edges(self) -> list[tuple[int, int]]:
        us, vs = np.nonzero(np.triu(self.adj, k=1))
        return [(int(u) + 1, int(v) + 1) for u, v in zip(us, vs)]

    @property
    def edge_count(self) -> int:
        return int(self.adj.sum()) // 2

    @cached_property
    def distances(self) -> np.ndarray:
        """All-pairs hop distances indexed by ``label - 1``; -1 where unreachable."""
        d = kernels.all_pairs_bfs(self.adj)
        d.setflags(write=False)
        return d

    def distance(self, u: int, v: int) -> int:
        return int(self.distances[u - 1, v - 1])


@dataclass(frozen=True)
class PortAssignment:
    """``ports[v-1][i]`` is the neighbour reached over port ``i+1`` of node ``v``."""

    ports: tuple[tuple[int, ...], ...]

    @classmethod
    def by_rank(cls, g: LabeledGraph) -> "PortAssignment":
        """Port i leads to the i-th smallest neighbour."""
        return cls(tuple(g.neighbors(v) for v in g.nodes()))

    @classmethod
    def random(cls, g: LabeledGraph, seed: int) -> "PortAssignment":
        rng = np.random.default_rng(seed)
        return cls(tuple(tuple(int(x) for x in rng.permutation(g.neighbors(v))) for v in g.nodes()))

    def validate(self, g: LabeledGraph) -> None:
        if len(self.ports) != g.n:
            raise ValueError("port assignment has the wrong number of nodes")
        for v in g.nodes():
            if sorted(self.ports[v - 1]) != list(g.neighbors(v)):
                raise ValueError(f"ports of node {v} are not a bijection onto its incident edges")

    def neighbor(self, v: int, port: int) -> int:
        p = self.ports[v - 1]
        if not 1 <= port <= len(p):
            raise IndexError(f"node {v} has no port {port}")
        return p[port - 1]

    def port(self, v: int, neighbor: int) -> int:
        return self.ports[v - 1].index(neighbor) + 1

    def rank_permutation(self, v: int) -> tuple[int, ...]:
        """Rank (0-based, among sorted neighbours) of the neighbour behind each port."""
        p = self.ports[v - 1]
        rank = {x: i for i, x in enumerate(sorted(p))}
        return tuple(rank[x] for x in p)


@dataclass(frozen=True)
class CoverageSet:
    center: int
    members: tuple[int, ...]
    c: float


@dataclass
class CheckReport:
    """Outcome of a structural check; violations are data, not errors."""

    name: str
    passed: bool
    violations: list = field(default_factory=list)
    stats: dict = field(default_factory=dict)


# ------------------------------------------------------------------ sampling

def generate_uniform(n: int, seed: int) -> LabeledGraph:
    """Each of the n(n-1)/2 edges present independently with probability 1/2."""
    if n < 2:
        raise ValueError("need at least two nodes")
    rng = np.random.default_rng(seed)
    bits = rng.integers(0, 2, size=bitcodec.edge_count(n), dtype=np.uint8)
    return bitcodec.decode_graph(BitString.from_array(bits), n)


def derived_seed(seed: int, attempt: int) -> int:
    """Seed for resampling attempt ``attempt`` of a seed slot; attempt 0 is ``seed`` itself."""
    if attempt == 0:
        return seed
    return int(np.random.SeedSequence([seed, attempt]).generate_state(1, dtype=np.uint32)[0])


def complete_graph(n: int) -> LabeledGraph:
    return LabeledGraph.from_adjacency(~np.eye(n, dtype=bool))


def empty_graph(n: int) -> LabeledGraph:
    return LabeledGraph.from_adjacency(np.zeros((n, n), dtype=bool))


def path_graph(n: int) -> LabeledGraph:
    return LabeledGraph.from_edges(n, [(i, i + 1) for i in range(1, n)])


def star_graph(n: int, center: int = 1) -> LabeledGraph:
    return LabeledGraph.from_edges(n, [(center, v) for v in range(1, n + 1) if v != center])


def build_gk(k: int, top_labels: Sequence[int] | None = None) -> LabeledGraph:
    """Three-row gadget on 3k nodes.

    Middle node v_i (k < i <= 2k) is joined to every bottom node v_1..v_k and to
    the top node v_{i+k}. ``top_labels[a]`` relabels top node v_{2k+1+a}; by
    default v_j carries label j.
    """
    if k < 1:
        raise ValueError("k must be positive")
    top = list(range(2 * k + 1, 3 * k + 1)) if top_labels is None else [int(x) for x in top_labels]
    if sorted(top) != list(range(2 * k + 1, 3 * k + 1)):
        raise ValueError("top labels must be a permutation of 2k+1..3k")
    edges = []
    for i in range(k + 1, 2 * k + 1):
        edges.append((i, top[i - k - 1]))
        edges.extend((i, j) for j in range(1, k + 1))
    return LabeledGraph.from_edges(3 * k, edges)


# ------------------------------------------------------------- distances

def bfs_distances(g: LabeledGraph, src: int) -> list[int]:
    """Hop distances from ``src``; entry ``v-1`` is for node v, -1 if unreachable."""
    if not 1 <= src <= g.n:
        raise ValueError(f"node {src} not in 1..{g.n}")
    return [int(x) for x in g.distances[src - 1]]


def diameter(g: LabeledGraph) -> float:
    d = g.distances
    return math.inf if (d < 0).any() else int(d.max())


# --------------------------------------------------------------- checkers

def coverage_size(n: int, c: float) -> int:
    """``ceil((c + 3) * log2 n)``."""
    return math.ceil((c + 3) * math.log2(n) - 1e-12)


def degree_bound(n: int, c: float, k: float = 2.0) -> float:
    return k * math.sqrt((c + 1) * n * math.log2(n))


def check_degree_lemma(g: LabeledGraph, c: float = 3, k: float = 2.0) -> CheckReport:
    """Every degree within ``k * sqrt((c+1) n log n)`` of (n-1)/2."""
    deg = g.adj.sum(axis=1)
    dev = np.abs(deg - (g.n - 1) / 2)
    bound = degree_bound(g.n, c, k)
    bad = [int(v) + 1 for v in np.flatnonzero(dev > bound)]
    return CheckReport(
        "degree",
        not bad,
        bad,
        {"bound": bound, "max_deviation": float(dev.max()), "per_node_pass": (dev <= bound).tolist()},
    )


def check_diameter_two(g: LabeledGraph) -> bool:
    return diameter(g) == 2


def coverage_set(g: LabeledGraph, u: int, c: float = 3) -> CoverageSet:
    """The least-labeled ``min(deg(u), ceil((c+3) log n))`` neighbours of ``u``."""
    return CoverageSet(u, g.neighbors(u)[: coverage_size(g.n, c)], c)


def coverage_members(g: LabeledGraph, c: float) -> np.ndarray:
    """Coverage sets of all nodes as a 0-based index matrix padded with -1."""
    m = coverage_size(g.n, c)
    out = np.full((g.n, max(m, 1)), -1, dtype=np.int32)
    for v in g.nodes():
        members = g.neighbors(v)[:m]
        out[v - 1, : len(members)] = np.asarray(members, dtype=np.int32) - 1
    return out


def check_coverage_lemma(g: LabeledGraph, c: float = 3) -> CheckReport:
    """Every w is u, a neighbour of u, or adjacent to a member of u's coverage set."""
    mask = kernels.uncovered_pairs(g.adj, coverage_members(g, c))
    us, ws = np.nonzero(mask)
    bad = [(int(u) + 1, int(w) + 1) for u, w in zip(us, ws)]
    return CheckReport("coverage", not bad, bad, {"c": c, "coverage_size": coverage_size(g.n, c)})


def lemma_summary(g: LabeledGraph, c: float = 3, k: float = 2.0) -> dict[str, bool]:
    return {
        "diameter_two": check_diameter_two(g),
        "degree": check_degree_lemma(g, c, k).passed,
        "coverage": check_coverage_lemma(g, c).passed,
    }
