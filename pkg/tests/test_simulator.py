from fractions import Fraction

import numpy as np
import pytest

from compact_routing.bitcodec import ceil_log2
from compact_routing.errors import CompactRoutingError, HopCapExceededError, IllegalActionError, InvalidLabelError, RoutingError
from compact_routing.graphs import PortAssignment, build_gk, complete_graph, coverage_size, generate_uniform
from compact_routing.schemes import (
    BUILDERS,
    IB_ALPHA,
    ForwardNeighbor,
    ForwardPort,
    build,
    build_canonical_shortest,
    build_full_info,
    build_sp_neighbor_known,
    build_sp_relabel,
    build_stretch15,
    build_stretch2_hub,
    build_stretch_logn,
)
from compact_routing.schemes.model import LocalRoutingFunction, RoutingScheme
from compact_routing.schemes.tables import build_stage_table, non_neighbors
from compact_routing.simulator import (
    Network,
    max_stretch,
    route,
    route_stats,
    sample_pairs,
    simulate_all_pairs,
    trace_lines,
    verify_full_info,
    verify_shortest,
)


def scheme(name, g, seed=1):
    ports = PortAssignment.random(g, seed) if name in ("sp_fixed_port", "full_info") else None
    return build(name, g, 3, None, ports)


@pytest.fixture(scope="module")
def g7():
    return generate_uniform(256, 7)


# ------------------------------------------------------------ single routes

def test_adjacent_pair_is_one_hop(g64):
    u = 1
    v = g64.neighbors(u)[0]
    for name in BUILDERS:
        r = route(g64, scheme(name, g64), u, v)
        assert r.path == (u, v) and r.stretch == 1 and r.delivered


def test_gk_canonical_route():
    g = build_gk(2)
    r = route(g, build_canonical_shortest(g), 1, 5)
    assert r.path == (1, 3, 5)


def test_route_invariants(g64):
    for name in BUILDERS:
        s = scheme(name, g64)
        for u, w in sample_pairs(64, 200, seed=3):
            r = route(g64, s, u, w)
            assert r.delivered and r.path[-1] == w and r.path[0] == u
            assert r.edge_traversals >= len(r.path) - 1
            assert r.shortest == g64.distance(u, w)
            assert route(g64, s, u, w) == r  # deterministic


def test_route_rejects_bad_input(g64):
    s = build_sp_neighbor_known(g64)
    with pytest.raises(InvalidLabelError):
        route(g64, s, 0, 3)
    with pytest.raises(InvalidLabelError):
        route(g64, s, 1, 65)
    with pytest.raises(ValueError):
        route(g64, s, 4, 4)


def test_relabel_routes_by_new_labels(g64):
    s = build_sp_relabel(g64)
    net = Network(g64, s)
    assert all(isinstance(k, type(s.address(1))) for k in net.edge_to[0])
    r = route(g64, s, 1, 40)
    assert r.hops == g64.distance(1, 40)


# ----------------------------------------------------------- knowledge rules

def _swap_model(s, model, ports=None, rewritten=False):
    return RoutingScheme(s.name, model, s.n, s.c, s.functions, s.labels, ports, rewritten)


def test_forward_neighbor_illegal_under_ib(g64):
    s = build_sp_neighbor_known(g64)  # emits ForwardNeighbor
    bad = _swap_model(s, IB_ALPHA, PortAssignment.by_rank(g64), True)
    w = next(x for x in g64.nodes() if x != 1 and not g64.has_edge(1, x))
    with pytest.raises(IllegalActionError):
        route(g64, bad, 1, w)


def test_forward_port_illegal_under_ii(g64):
    s = build_sp_neighbor_known(g64, model=IB_ALPHA)  # emits ForwardPort
    from compact_routing.schemes import II_ALPHA

    bad = _swap_model(s, II_ALPHA)
    with pytest.raises(IllegalActionError):
        route(g64, bad, 1, 2)


def test_forward_to_non_neighbor_illegal(g64):
    class Liar:
        uses_header = False

        def evaluate(self, dst, header=None):
            return ForwardNeighbor(dst)

    s = build_sp_neighbor_known(g64)
    f = s.function(1)
    fake = LocalRoutingFunction(1, f.encoding, f.knowledge, f.components)
    fake.__dict__["program"] = Liar()  # pre-fill the cached decoder
    s2 = s.replace_function(1, fake)
    w = next(x for x in g64.nodes() if x != 1 and not g64.has_edge(1, x))
    with pytest.raises(IllegalActionError):
        route(g64, s2, 1, w)


def test_hop_cap(g64):
    # two nodes that bounce every message for w between them
    s = build_sp_neighbor_known(g64)
    a = 1
    b = g64.neighbors(a)[0]
    w = next(x for x in g64.nodes() if x not in (a, b) and not g64.has_edge(a, x) and not g64.has_edge(b, x))

    class PingPong:
        uses_header = False

        def __init__(self, other):
            self.other = other

        def evaluate(self, dst, header=None):
            return ForwardNeighbor(self.other)

    for v, other in ((a, b), (b, a)):
        f = s.function(v)
        fake = LocalRoutingFunction(v, f.encoding, f.knowledge, f.components)
        fake.__dict__["program"] = PingPong(other)
        s = s.replace_function(v, fake)
    with pytest.raises(HopCapExceededError):
        route(g64, s, a, w)
    stats = route_stats(g64, s)
    assert (a, w) in stats.undelivered
    rep = verify_shortest(g64, s)
    assert not rep.passed


# ------------------------------------------------------------ probe scheme

def test_probe_traversal_count(g64):
    s = build_stretch_logn(g64)
    cov_n = coverage_size(64, 3)
    checked = 0
    for u in (1, 2, 3, 10):
        cov = g64.neighbors(u)[:cov_n]
        for w in non_neighbors(g64, u):
            j = next(i + 1 for i, v in enumerate(cov) if g64.has_edge(v, w))
            r = route(g64, s, u, w, trace=True)
            assert r.edge_traversals == 2 * (j - 1) + 2
            assert r.path == (u, cov[j - 1], w)
            assert len(r.walk) == r.edge_traversals + 1
            assert r.hops == 2
            assert r.traversal_stretch == Fraction(r.edge_traversals, 2)
            bounces = [line for line in trace_lines(r) if "action=bounce" in line]
            assert len(bounces) == j - 1
            checked += 1
    assert checked > 20


def test_probe_bound_all_pairs(g7):
    s = build_stretch_logn(g7)
    stats = route_stats(g7, s)
    assert not stats.undelivered
    assert stats.max_traversals <= 2 * 48
    assert stats.max_stretch == 1  # net path is always a shortest path


def test_trace_is_parseable(g64):
    s = build_stretch_logn(g64)
    w = next(x for x in g64.nodes() if x != 1 and not g64.has_edge(1, x))
    r = route(g64, s, 1, w, trace=True)
    for line in trace_lines(r):
        fields = dict(part.split("=", 1) for part in line.split("\t"))
        assert set(fields) == {"node", "action", "header"}
    assert trace_lines(r)[-1].split("\t")[1] == "action=deliver"
    assert '"delivered": true' in r.summary()


# ---------------------------------------------------------------- stretch

def test_stretch_values(g7):
    assert max_stretch(g7, build_stretch15(g7)) == Fraction(3, 2)
    assert max_stretch(g7, build_stretch2_hub(g7)) <= 2
    assert max_stretch(g7, build_sp_neighbor_known(g7)) == 1
    stats = route_stats(g7, build_stretch2_hub(g7))
    assert not stats.undelivered and stats.max_hops <= 4


def test_max_stretch_measure(g64):
    s = build_stretch_logn(g64)
    assert max_stretch(g64, s, measure="hops") == 1
    assert max_stretch(g64, s, measure="traversals") > 1
    with pytest.raises(ValueError):
        max_stretch(g64, s, measure="miles")


def test_max_stretch_propagates_errors(g64):
    s = build_sp_neighbor_known(g64)
    f = s.function(1)
    s2 = s.replace_function(1, f.with_encoding(f.encoding[:8]))
    with pytest.raises(CompactRoutingError):
        max_stretch(g64, s2)


def test_verify_shortest_examples(g7):
    k4 = complete_graph(4)
    rep = verify_shortest(k4, build_canonical_shortest(k4))
    assert rep.passed and rep.stats["pairs"] == 12
    assert verify_shortest(g7, build_sp_neighbor_known(g7)).passed


# ------------------------------------------------------------- fast path

@pytest.mark.parametrize("name", sorted(BUILDERS))
def test_fast_path_matches_per_message_routing(name, g64):
    s = scheme(name, g64)
    res = simulate_all_pairs(g64, s)
    for u in g64.nodes():
        for w in g64.nodes():
            if u == w:
                continue
            r = route(g64, s, u, w)
            assert res.hops[u - 1, w - 1] == r.hops
            assert res.traversals[u - 1, w - 1] == r.edge_traversals


def test_sampled_pairs_match_exhaustive(g64):
    s = build_stretch15(g64)
    full = route_stats(g64, s)
    some = route_stats(g64, s, sample_pairs(64, 3000, seed=1))
    assert some.max_stretch <= full.max_stretch
    assert some.pairs == 3000 and full.pairs == 64 * 63


def test_sample_pairs_valid():
    ps = sample_pairs(10, 500, seed=2)
    assert all(1 <= u <= 10 and 1 <= w <= 10 and u != w for u, w in ps)
    assert sample_pairs(10, 500, seed=2) == ps


# -------------------------------------------------------- mutation tests

def test_table2_mutation_flags_exactly_affected_pair(g7):
    s = build_sp_neighbor_known(g7)
    cov_n = coverage_size(256, 3)
    width = ceil_log2(cov_n)
    for u in g7.nodes():
        st_ = build_stage_table(g7, u, 3)
        if len(st_.table2):
            break
    cov = g7.neighbors(u)[:cov_n]
    targets = non_neighbors(g7, u)
    stage = [next(i for i, v in enumerate(cov) if g7.has_edge(v, w)) for w in targets]
    deferred = [w for w, t in zip(targets, stage) if t + 1 > st_.cutoff]
    f = s.function(u)
    start, length = f.section("explicit_table")
    tried = 0
    for k, w in enumerate(deferred):
        for bit in range(width):
            old = int(st_.table2.bits[k * width:(k + 1) * width], 2)
            new = old ^ (1 << (width - 1 - bit))
            if new >= len(cov):
                continue
            mutated = s.replace_function(u, f.with_encoding(f.encoding.flip(start + k * width + bit)))
            rep = verify_shortest(g7, mutated)
            expect = [] if g7.has_edge(cov[new], w) else [(u, w)]
            assert [(a, b) for a, b, _, _ in rep.violations] == expect
            tried += 1
            if tried >= 6:
                return
    assert tried


def test_full_info_oracle_and_mutation(g128):
    ports = PortAssignment.random(g128, 5)
    s = build_full_info(g128, ports)
    assert verify_full_info(g128, s).passed
    u = 17
    f = s.function(u)
    start, _ = f.section("first_hop_bitmaps")
    d = g128.degree(u)
    targets = non_neighbors(g128, u)
    for i, r in [(0, 0), (5, d - 1), (len(targets) - 1, d // 2)]:
        mutated = s.replace_function(u, f.with_encoding(f.encoding.flip(start + i * d + r)))
        rep = verify_full_info(g128, mutated)
        assert rep.violations == [(u, targets[i])]
