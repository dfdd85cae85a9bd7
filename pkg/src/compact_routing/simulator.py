"""Hop-by-hop execution of routing schemes and route-quality checks."""

from __future__ import annotations

import json
import weakref
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Iterable

import numpy as np

from . import kernels
from .errors import (
    CompactRoutingError,
    HopCapExceededError,
    IllegalActionError,
    InvalidLabelError,
    RoutingError,
)
from .graphs import CheckReport, LabeledGraph
from .schemes.model import (
    Address,
    Deliver,
    ForwardNeighbor,
    ForwardPort,
    Header,
    Info,
    ProbeNext,
    RoutingScheme,
)

EXHAUSTIVE_LIMIT = 256
SAMPLE_PAIRS = 100_000


@dataclass(frozen=True)
class Message:
    destination: Address
    header: Header | None = None


@dataclass(frozen=True)
class TraceStep:
    node: int
    action: str
    header: Header | None

    def line(self) -> str:
        h = "-" if self.header is None else f"probe={self.header.probe},failed={int(self.header.failed)}"
        return f"node={self.node}\taction={self.action}\theader={h}"


@dataclass
class RouteResult:
    """Outcome of one message.

    ``walk`` lists every node visited, bounces included; ``path`` is the walk
    with bounced probes removed.
    """

    src: int
    dst: int
    path: tuple[int, ...]
    walk: tuple[int, ...]
    edge_traversals: int
    delivered: bool
    shortest: int
    trace: tuple[TraceStep, ...] = field(default=(), repr=False)

    @property
    def hops(self) -> int:
        return len(self.path) - 1

    @property
    def stretch(self) -> Fraction | None:
        return Fraction(self.hops, self.shortest) if self.shortest > 0 else None

    @property
    def traversal_stretch(self) -> Fraction | None:
        return Fraction(self.edge_traversals, self.shortest) if self.shortest > 0 else None

    def summary(self) -> str:
        d = {
            "src": self.src,
            "dst": self.dst,
            "delivered": self.delivered,
            "path": list(self.path),
            "hops": self.hops,
            "edge_traversals": self.edge_traversals,
            "shortest": self.shortest,
            "stretch": _fmt_fraction(self.stretch),
            "traversal_stretch": _fmt_fraction(self.traversal_stretch),
        }
        return json.dumps(d, sort_keys=True)


def _fmt_fraction(x: Fraction | None) -> str | None:
    if x is None:
        return None
    return f"{x.numerator}/{x.denominator}"


def _describe(action) -> str:
    if isinstance(action, Deliver):
        return "deliver"
    if isinstance(action, ProbeNext):
        return "bounce"
    if isinstance(action, ForwardPort):
        return f"port:{action.port}"
    return f"neighbor:{action.label}"


class Network:
    """A scheme installed on a graph; nodes only consult their own function and incident edges."""

    def __init__(self, g: LabeledGraph, s: RoutingScheme):
        if g.n != s.n:
            raise ValueError(f"scheme built for n={s.n}, graph has n={g.n}")
        self.g = g
        self.s = s
        self.cap = 4 * g.n
        # each node's incident edges, keyed by the label the edge carries
        self.edge_to = [
            {s.address(x): x for x in g.neighbors(v)} for v in g.nodes()
        ]

    def next_node(self, cur: int, action) -> int:
        if isinstance(action, ForwardNeighbor):
            if self.s.model.info is not Info.II:
                raise IllegalActionError(f"neighbour-label forwarding under {self.s.model}")
            nxt = self.edge_to[cur - 1].get(action.label)
            if nxt is None:
                raise IllegalActionError(f"node {cur} has no incident edge labeled {action.label}")
            return nxt
        if isinstance(action, ForwardPort):
            if self.s.model.info is Info.II:
                raise IllegalActionError("port forwarding under model II")
            try:
                return self.s.ports.neighbor(cur, action.port)
            except IndexError as exc:
                raise IllegalActionError(str(exc)) from exc
        raise IllegalActionError(f"unexpected action {action!r}")

    def route(self, src: int, dst: int, trace: bool = False) -> RouteResult:
        n = self.g.n
        if not (1 <= src <= n and 1 <= dst <= n):
            raise InvalidLabelError(f"nodes must be in 1..{n}, got {src}->{dst}")
        if src == dst:
            raise ValueError("source and destination coincide")
        msg = Message(self.s.address(dst))
        cur, prev = src, None
        walk, path, steps = [src], [src], []
        traversals = 0
        while True:
            action = self.s.function(cur).evaluate(msg.destination, msg.header)
            if trace:
                steps.append(TraceStep(cur, _describe(action), msg.header))
            if isinstance(action, Deliver):
                if cur != dst:
                    raise RoutingError(f"node {cur} accepted a message addressed to {dst}")
                break
            if traversals >= self.cap:
                raise HopCapExceededError(f"{src}->{dst} exceeded {self.cap} edge traversals")
            if isinstance(action, ProbeNext):
                if prev is None or msg.header is None:
                    raise IllegalActionError("bounce without an incoming probe")
                nxt = prev
                msg = Message(msg.destination, Header(msg.header.probe, failed=True))
                path.pop()
            else:
                nxt = self.next_node(cur, action)
                if trace and isinstance(action, ForwardNeighbor) and not isinstance(action.label, int):
                    steps[-1] = TraceStep(cur, f"neighbor:{nxt}", msg.header)
                if action.header is not None:
                    msg = Message(msg.destination, action.header)
                path.append(nxt)
            prev, cur = cur, nxt
            walk.append(cur)
            traversals += 1
        return RouteResult(src, dst, tuple(path), tuple(walk), traversals, True,
                           self.g.distance(src, dst), tuple(steps))

    def next_hop_table(self) -> np.ndarray:
        """``table[x-1, w-1]``: where x sends a message for w (0-based), -1 if it cannot."""
        n = self.g.n
        table = np.full((n, n), -1, dtype=np.int32)
        for x in self.g.nodes():
            f = self.s.function(x)
            for w in self.g.nodes():
                if w == x:
                    table[x - 1, w - 1] = x - 1
                    continue
                try:
                    action = f.evaluate(self.s.address(w))
                    if isinstance(action, (Deliver, ProbeNext)):
                        continue
                    table[x - 1, w - 1] = self.next_node(x, action) - 1
                except CompactRoutingError:
                    pass
        return table


_networks: "weakref.WeakKeyDictionary[RoutingScheme, Network]" = weakref.WeakKeyDictionary()


def network(g: LabeledGraph, s: RoutingScheme) -> Network:
    net = _networks.get(s)
    if net is None or net.g is not g:
        net = Network(g, s)
        _networks[s] = net
    return net


def route(g: LabeledGraph, s: RoutingScheme, src: int, dst: int, trace: bool = False) -> RouteResult:
    """Deliver one message from ``src`` to ``dst`` (node ids; addressed by the scheme's labels)."""
    return network(g, s).route(src, dst, trace)


@dataclass
class AllPairs:
    """Per-pair route statistics indexed by ``label - 1``; -1 marks undelivered pairs."""

    hops: np.ndarray
    traversals: np.ndarray
    errors: dict = field(default_factory=dict)

    @property
    def delivered(self) -> np.ndarray:
        return self.hops >= 0


def simulate_all_pairs(g: LabeledGraph, s: RoutingScheme) -> AllPairs:
    """Route every ordered pair.

    Header-free schemes are tabulated into a next-hop table and walked by the
    compiled kernel; probe schemes run message by message.
    """
    net = network(g, s)
    n = g.n
    if not s.uses_header:
        hops = kernels.follow_next_hops(net.next_hop_table(), net.cap)
        return AllPairs(hops, hops.copy())
    hops = np.zeros((n, n), dtype=np.int32)
    trav = np.zeros((n, n), dtype=np.int32)
    errors = {}
    for u in g.nodes():
        for w in g.nodes():
            if u == w:
                continue
            try:
                r = net.route(u, w)
                hops[u - 1, w - 1] = r.hops
                trav[u - 1, w - 1] = r.edge_traversals
            except CompactRoutingError as exc:
                hops[u - 1, w - 1] = trav[u - 1, w - 1] = -1
                errors[(u, w)] = str(exc)
    return AllPairs(hops, trav, errors)


def all_pairs(n: int) -> list[tuple[int, int]]:
    return [(u, w) for u in range(1, n + 1) for w in range(1, n + 1) if u != w]


def sample_pairs(n: int, k: int, seed: int = 0) -> list[tuple[int, int]]:
    rng = np.random.default_rng(seed)
    u = rng.integers(1, n + 1, size=k)
    w = (u - 1 + rng.integers(1, n, size=k)) % n + 1
    return list(zip(u.tolist(), w.tolist()))


@dataclass
class RouteStats:
    """Route measurements over a set of pairs; undelivered pairs are counted, not raised."""

    pairs: int
    undelivered: list[tuple[int, int]]
    shortest_violations: list[tuple[int, int, int, int]]
    max_stretch: Fraction
    max_traversal_stretch: Fraction
    max_hops: int
    max_traversals: int
    errors: dict = field(default_factory=dict)


def route_stats(g: LabeledGraph, s: RoutingScheme, pairs: Iterable[tuple[int, int]] | None = None) -> RouteStats:
    """Exhaustive for n <= 256 when ``pairs`` is None, otherwise over 10^5 sampled pairs."""
    if pairs is None and g.n <= EXHAUSTIVE_LIMIT:
        res = simulate_all_pairs(g, s)
        us, ws = np.nonzero(~np.eye(g.n, dtype=bool))
        hops, trav, errors = res.hops[us, ws], res.traversals[us, ws], res.errors
    else:
        if pairs is None:
            pairs = sample_pairs(g.n, SAMPLE_PAIRS)
        pairs = list(pairs)
        us = np.array([p[0] - 1 for p in pairs], dtype=int)
        ws = np.array([p[1] - 1 for p in pairs], dtype=int)
        hops = np.empty(len(pairs), dtype=np.int64)
        trav = np.empty(len(pairs), dtype=np.int64)
        errors = {}
        net = network(g, s)
        for i, (u, w) in enumerate(pairs):
            try:
                r = net.route(u, w)
                hops[i], trav[i] = r.hops, r.edge_traversals
            except CompactRoutingError as exc:
                hops[i] = trav[i] = -1
                errors[(u, w)] = str(exc)
    dist = g.distances[us, ws]
    ok = hops >= 0
    undelivered = [(int(u) + 1, int(w) + 1) for u, w in zip(us[~ok], ws[~ok])]
    wrong = np.flatnonzero(hops != dist)
    violations = [(int(us[i]) + 1, int(ws[i]) + 1, int(hops[i]), int(dist[i])) for i in wrong]
    return RouteStats(
        len(us), undelivered, violations,
        _max_ratio(hops[ok], dist[ok]), _max_ratio(trav[ok], dist[ok]),
        int(hops[ok].max(initial=0)), int(trav[ok].max(initial=0)), errors,
    )


def _max_ratio(num: np.ndarray, den: np.ndarray) -> Fraction:
    best = Fraction(0)
    for d in np.unique(den):
        if d > 0:
            best = max(best, Fraction(int(num[den == d].max()), int(d)))
    return best


def max_stretch(g: LabeledGraph, s: RoutingScheme, pairs: Iterable[tuple[int, int]] | None = None,
                measure: str = "hops") -> Fraction:
    """Largest route length over shortest distance; route errors propagate.

    Exhaustive for n <= 256 when ``pairs`` is None, otherwise 10^5 sampled pairs.
    ``measure="traversals"`` counts every edge crossing, bounces included.
    """
    if measure not in ("hops", "traversals"):
        raise ValueError(f"unknown measure {measure!r}")
    stats = route_stats(g, s, pairs)
    if stats.undelivered:
        u, w = stats.undelivered[0]
        route(g, s, u, w)  # re-raise the underlying error
        raise RoutingError(f"{u}->{w} was not delivered")
    return stats.max_stretch if measure == "hops" else stats.max_traversal_stretch


def verify_shortest(g: LabeledGraph, s: RoutingScheme) -> CheckReport:
    """Compare every route against the BFS distance; lists ``(src, dst, hops, shortest)`` mismatches.

    Undelivered pairs appear with ``hops == -1``.
    """
    stats = route_stats(g, s)
    return CheckReport("shortest", not stats.shortest_violations, stats.shortest_violations,
                       {"pairs": stats.pairs, "errors": stats.errors})


def expected_first_hops(g: LabeledGraph, u: int, w: int) -> set[int]:
    """Neighbours of u that lie on some shortest path to w."""
    dist = g.distances
    duw = dist[u - 1, w - 1]
    return {v for v in g.neighbors(u) if dist[v - 1, w - 1] + 1 == duw}


def verify_full_info(g: LabeledGraph, s: RoutingScheme) -> CheckReport:
    """Every returned port set must equal the ports towards all shortest-path first hops."""
    if s.ports is None:
        raise IllegalActionError("full-information schemes route over ports")
    dist = g.distances
    violations = []
    for u in g.nodes():
        f = s.function(u)
        nbrs = g.neighbors(u)
        port = np.array([s.ports.port(u, v) for v in nbrs], dtype=int)
        on_path = dist[np.asarray(nbrs, dtype=int) - 1, :] + 1 == dist[u - 1, :]
        for w in g.nodes():
            if w == u:
                continue
            want = frozenset(port[on_path[:, w - 1]].tolist())
            try:
                got = f.port_set(s.address(w))
            except CompactRoutingError as exc:
                got = str(exc)
            if got != want:
                violations.append((u, w))
    return CheckReport("full_info", not violations, violations, {"pairs": g.n * (g.n - 1)})


def trace_lines(r: RouteResult) -> list[str]:
    return [step.line() for step in r.trace]


def result_dict(r: RouteResult) -> dict:
    d = asdict(r)
    d.pop("trace")
    return d
