"""Constructions of routing schemes for random graphs of diameter two."""

from __future__ import annotations

import math

import numpy as np

from ..bitcodec import BitString, ceil_log2, encode_permutation
from ..errors import CenterUncoveredError, ConstructionError, LemmaViolationError, ModelError
from ..graphs import (
    LabeledGraph,
    PortAssignment,
    check_coverage_lemma,
    check_degree_lemma,
    check_diameter_two,
    coverage_size,
)
from .model import (
    IA_ALPHA,
    IB_ALPHA,
    II_ALPHA,
    II_GAMMA,
    Info,
    LocalRoutingFunction,
    ModelSpec,
    NodeKnowledge,
    RoutingScheme,
    require_model,
)
from .programs import Tag, assemble
from .tables import build_stage_table, non_neighbors


def require_lemmas(g: LabeledGraph, c: float, *, diameter=True, coverage=True, degree=False) -> None:
    if diameter and not check_diameter_two(g):
        raise LemmaViolationError("diameter-two")
    if degree:
        rep = check_degree_lemma(g, c)
        if not rep.passed:
            raise LemmaViolationError("degree", f"{len(rep.violations)} nodes out of range")
    if coverage:
        rep = check_coverage_lemma(g, c)
        if not rep.passed:
            u, w = rep.violations[0]
            raise LemmaViolationError("coverage", f"{len(rep.violations)} pairs uncovered, e.g. {u}->{w}")


def knowledge(g: LabeledGraph, v: int, model: ModelSpec, c: float, labels=None) -> NodeKnowledge:
    addr = (lambda x: x) if labels is None else (lambda x: labels[x - 1])
    nbrs = tuple(addr(x) for x in g.neighbors(v)) if model.info is Info.II else None
    return NodeKnowledge(addr(v), g.n, c, g.degree(v), nbrs)


def _function(g, v, model, c, tag, *parts, labels=None) -> LocalRoutingFunction:
    enc, comps = assemble(tag, *parts)
    return LocalRoutingFunction(v, enc, knowledge(g, v, model, c, labels), comps)


def neighbor_bitmap(g: LabeledGraph, u: int) -> BitString:
    row = np.delete(g.adj[u - 1], u - 1)
    return BitString.from_array(row)


def _staged_parts(g, u, c, diag) -> list[tuple[str, BitString]]:
    st = build_stage_table(g, u, c)
    if st.claim_violations:
        diag["claim_violations"][u] = st.claim_violations
    diag["cutoffs"][u] = st.cutoff
    return [("unary_table", st.table1), ("explicit_table", st.table2)]


def _new_diag() -> dict:
    return {"claim_violations": {}, "cutoffs": {}}


# --------------------------------------------------------------- builders

def build_canonical_shortest(g: LabeledGraph) -> RoutingScheme:
    """Plain shortest-path tables for any connected graph (model II, alpha).

    Each non-neighbour destination stores the ``ceil(log deg)``-bit index of the
    least-labeled neighbour on a shortest path.
    """
    dist = g.distances
    if (dist < 0).any():
        raise ConstructionError("graph is disconnected")
    fs = []
    for u in g.nodes():
        nbrs = g.neighbors(u)
        width = ceil_log2(len(nbrs)) if nbrs else 0
        idx = np.asarray(nbrs) - 1
        entries = []
        for w in non_neighbors(g, u):
            onward = np.flatnonzero(dist[idx, w - 1] == dist[u - 1, w - 1] - 1)
            entries.append(format(int(onward[0]), "b").zfill(width) if width else "")
        fs.append(_function(g, u, II_ALPHA, 0, Tag.CANONICAL, ("explicit_table", BitString("".join(entries)))))
    return RoutingScheme("canonical", II_ALPHA, g.n, 0, tuple(fs))


def build_sp_neighbor_known(g: LabeledGraph, c: float = 3, model: ModelSpec = II_ALPHA) -> RoutingScheme:
    """Shortest-path routing with staged intermediate tables (model II, or IB with rank ports).

    Under IB the node does not know its neighbours, so the (n-1)-bit neighbour
    bitmap is stored too and ports are rewritten to neighbour-rank order.
    """
    require_model(model, [II_ALPHA, IB_ALPHA], "sp_neighbor_known")
    require_lemmas(g, c)
    diag = _new_diag()
    fs = []
    for u in g.nodes():
        parts = _staged_parts(g, u, c, diag)
        if model.info is Info.II:
            fs.append(_function(g, u, model, c, Tag.STAGED, *parts))
        else:
            fs.append(_function(g, u, model, c, Tag.STAGED_BITMAP, ("neighbor_bitmap", neighbor_bitmap(g, u)), *parts))
    if model.info is Info.II:
        return RoutingScheme("sp_neighbor_known", model, g.n, c, tuple(fs), diagnostics=diag)
    return RoutingScheme(
        "sp_neighbor_known", model, g.n, c, tuple(fs),
        ports=PortAssignment.by_rank(g), ports_rewritten=True, diagnostics=diag,
    )


def relabel_labels(g: LabeledGraph, c: float) -> tuple[tuple[BitString, ...], list[int]]:
    """Own label then the labels of the coverage neighbours, each in ``ceil(log n)`` bits.

    Short coverage sets are padded by repeating the node's own label; the padded
    nodes are returned alongside.
    """
    width = ceil_log2(g.n)
    m = coverage_size(g.n, c)
    labels, short = [], []
    for u in g.nodes():
        cov = list(g.neighbors(u)[:m])
        if len(cov) < m:
            short.append(u)
            cov += [u] * (m - len(cov))
        labels.append(BitString.join([BitString.from_int(x - 1, width) for x in [u] + cov]))
    return tuple(labels), short


def build_sp_relabel(g: LabeledGraph, c: float = 3) -> RoutingScheme:
    """Shortest-path routing where each label carries the node's coverage neighbours (II, gamma)."""
    require_lemmas(g, c)
    labels, short = relabel_labels(g, c)
    fs = tuple(_function(g, u, II_GAMMA, c, Tag.RELABEL, labels=labels) for u in g.nodes())
    return RoutingScheme("sp_relabel", II_GAMMA, g.n, c, fs, labels=labels, diagnostics={"label_overflow": short})


def build_stretch15(g: LabeledGraph, c: float = 3, center: int = 1) -> RoutingScheme:
    """Routing centers B = {center} + its coverage set keep full tables; others point at a center."""
    require_lemmas(g, c)
    centers = {center, *g.neighbors(center)[: coverage_size(g.n, c)]}
    width = ceil_log2(g.n + 1)
    diag = _new_diag()
    diag["centers"] = sorted(centers)
    pointer = {}
    for u in g.nodes():
        if u not in centers:
            pointer[u] = next((x for x in g.neighbors(u) if x in centers), None)
            if pointer[u] is None:
                raise CenterUncoveredError(f"node {u} has no neighbour among the routing centers")
    fs = []
    for u in g.nodes():
        if u in centers:
            fs.append(_function(g, u, II_ALPHA, c, Tag.STAGED, *_staged_parts(g, u, c, diag)))
        else:
            field = BitString.from_int(pointer[u], width)
            fs.append(_function(g, u, II_ALPHA, c, Tag.CENTER_POINTER, ("center_label", field)))
    return RoutingScheme("stretch15", II_ALPHA, g.n, c, tuple(fs), diagnostics=diag)


def build_stretch2_hub(g: LabeledGraph, c: float = 3) -> RoutingScheme:
    """Node 1 keeps a full table; everyone else only knows a way to node 1."""
    require_lemmas(g, c)
    hub = 1
    diag = _new_diag()
    far = {}
    for u in g.nodes():
        if u != hub and not g.has_edge(u, hub):
            cov = g.neighbors(u)[: coverage_size(g.n, c)]
            idx = next((i for i, v in enumerate(cov) if g.has_edge(v, hub)), None)
            if idx is None:
                raise CenterUncoveredError(f"no coverage neighbour of {u} is adjacent to the hub")
            far[u] = BitString.from_int(idx, ceil_log2(len(cov)))
    fs = []
    for u in g.nodes():
        if u == hub:
            fs.append(_function(g, u, II_ALPHA, c, Tag.STAGED, *_staged_parts(g, u, c, diag)))
        elif u in far:
            fs.append(_function(g, u, II_ALPHA, c, Tag.HUB_FAR, ("hub_pointer", far[u])))
        else:
            fs.append(_function(g, u, II_ALPHA, c, Tag.HUB_NEIGHBOR))
    return RoutingScheme("stretch2_hub", II_ALPHA, g.n, c, tuple(fs), diagnostics=diag)


def build_stretch_logn(g: LabeledGraph, c: float = 3) -> RoutingScheme:
    """No tables: probe coverage neighbours one by one, bouncing on failure."""
    require_lemmas(g, c)
    fs = tuple(_function(g, u, II_ALPHA, c, Tag.PROBE) for u in g.nodes())
    return RoutingScheme("stretch_logn", II_ALPHA, g.n, c, fs)


def build_sp_fixed_port(g: LabeledGraph, ports: PortAssignment, c: float = 3) -> RoutingScheme:
    """Shortest-path routing over a fixed, arbitrary port assignment (IA, alpha).

    Per node: neighbour bitmap, the port permutation as a Lehmer rank, staged tables.
    """
    ports.validate(g)
    require_lemmas(g, c)
    diag = _new_diag()
    fs = []
    for u in g.nodes():
        fs.append(_function(
            g, u, IA_ALPHA, c, Tag.FIXED_PORT,
            ("neighbor_bitmap", neighbor_bitmap(g, u)),
            ("port_permutation", encode_permutation(ports.rank_permutation(u))),
            *_staged_parts(g, u, c, diag),
        ))
    return RoutingScheme("sp_fixed_port", IA_ALPHA, g.n, c, tuple(fs), ports=ports, diagnostics=diag)


def build_full_info(g: LabeledGraph, ports: PortAssignment, c: float = 3) -> RoutingScheme:
    """Full-information shortest paths (IA, alpha): every shortest first hop, per destination.

    ``c`` only parameterises the degree check.
    """
    ports.validate(g)
    require_lemmas(g, c, coverage=False, degree=True)
    fs = []
    for u in g.nodes():
        nbrs = np.asarray(g.neighbors(u)) - 1
        targets = np.asarray(non_neighbors(g, u), dtype=int) - 1
        # diameter two: a neighbour v is a first hop to w exactly when v ~ w
        block = g.adj[np.ix_(targets, nbrs)] if len(targets) and len(nbrs) else np.zeros(0, dtype=bool)
        fs.append(_function(
            g, u, IA_ALPHA, c, Tag.FULL_INFO,
            ("neighbor_bitmap", neighbor_bitmap(g, u)),
            ("port_permutation", encode_permutation(ports.rank_permutation(u))),
            ("first_hop_bitmaps", BitString.from_array(block.ravel())),
        ))
    return RoutingScheme("full_info", IA_ALPHA, g.n, c, tuple(fs), ports=ports)


BUILDERS = {
    "sp_neighbor_known": build_sp_neighbor_known,
    "sp_relabel": build_sp_relabel,
    "stretch15": build_stretch15,
    "stretch2_hub": build_stretch2_hub,
    "stretch_logn": build_stretch_logn,
    "sp_fixed_port": build_sp_fixed_port,
    "full_info": build_full_info,
}

DEFAULT_MODELS = {
    "sp_neighbor_known": II_ALPHA,
    "sp_relabel": II_GAMMA,
    "stretch15": II_ALPHA,
    "stretch2_hub": II_ALPHA,
    "stretch_logn": II_ALPHA,
    "sp_fixed_port": IA_ALPHA,
    "full_info": IA_ALPHA,
}

LEGAL_MODELS = {name: [m] for name, m in DEFAULT_MODELS.items()}
LEGAL_MODELS["sp_neighbor_known"] = [II_ALPHA, IB_ALPHA]

NEEDS_PORTS = {"sp_fixed_port", "full_info"}


def build(name: str, g: LabeledGraph, c: float = 3, model: ModelSpec | None = None,
          ports: PortAssignment | None = None) -> RoutingScheme:
    """Dispatch by scheme name."""
    if name not in BUILDERS:
        raise ModelError(f"unknown scheme {name!r}; choose from {', '.join(BUILDERS)}")
    model = model or DEFAULT_MODELS[name]
    require_model(model, LEGAL_MODELS[name], name)
    if name in NEEDS_PORTS:
        if ports is None:
            raise ModelError(f"{name} needs a port assignment")
        return BUILDERS[name](g, ports, c)
    if name == "sp_neighbor_known":
        return build_sp_neighbor_known(g, c, model)
    return BUILDERS[name](g, c)
