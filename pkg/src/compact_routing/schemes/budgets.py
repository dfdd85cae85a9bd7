"""Bit budgets checked against measured sizes, and the asymptotic headline totals."""

from __future__ import annotations

import math

from ..bitcodec import ceil_log2
from ..graphs import coverage_size
from .model import Info, RoutingScheme, SizeReport
from .programs import TAG_BITS, Tag, tag_bits

_POINTER = tag_bits(Tag.CENTER_POINTER).bits


def headline_bits(name: str, n: int, c: float) -> float:
    """Leading-order total size quoted for each construction (lower-order terms dropped)."""
    lg = math.log2(n)
    return {
        "sp_neighbor_known": 3 * n * n,
        "sp_relabel": (c + 3) * n * lg * lg + n * lg,
        "stretch15": (3 * c + 20) * n * lg,
        "stretch2_hub": n * math.log2(lg) + 3 * n,
        "stretch_logn": n,
        "sp_fixed_port": n * n / 2 * lg,
        "full_info": n ** 3 / 4,
    }.get(name, math.nan)


def budget_violations(s: RoutingScheme, report: SizeReport) -> list[str]:
    """Measured sizes that exceed the proof-level budgets; empty when all hold."""
    n, c = s.n, s.c
    lg = math.log2(n)
    out = []

    def per_node(limit: float, nodes=None, what: str = "per-node"):
        for v in nodes or range(1, n + 1):
            bits = report.per_node_bits[v - 1]
            if bits > limit:
                out.append(f"node {v}: {what} {bits} > {limit:g}")

    if s.name == "sp_neighbor_known":
        per_node(6 * n if s.model.info is Info.II else 7 * n)
    elif s.name == "sp_relabel":
        limit = (c + 3) * n * lg * lg + n * lg + 64 * n
        if report.total_bits > limit:
            out.append(f"total {report.total_bits} > {limit:g}")
        per_node(TAG_BITS)
    elif s.name == "stretch15":
        centers = {f.owner for f in s.functions if f.encoding.bits[:TAG_BITS] != _POINTER}
        per_node(6 * n, sorted(centers), "center")
        per_node(ceil_log2(n + 1) + TAG_BITS, [v for v in range(1, n + 1) if v not in centers])
    elif s.name == "stretch2_hub":
        per_node(6 * n, [1], "hub")
        per_node(ceil_log2(coverage_size(n, c)) + TAG_BITS, range(2, n + 1))
    elif s.name == "stretch_logn":
        per_node(TAG_BITS)
    elif s.name == "sp_fixed_port":
        per_node(n / 2 * lg * 1.2 + 7 * n)
    elif s.name == "full_info":
        per_node(n * n / 4 + n * lg + 2 * n)
    return out
