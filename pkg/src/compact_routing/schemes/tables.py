"""Staged intermediate-node tables for shortest-path routing on diameter-2 graphs.

For a source u with coverage neighbours v_1..v_m, every non-neighbour w is
assigned the stage t of its least covering intermediate v_t. The first table
lists, for each non-neighbour in ascending order, ``1^t 0`` when t is at most
the cutoff stage and a lone ``0`` otherwise. The cutoff is the first stage at
which fewer than n / log n destinations remain unassigned. Deferred
destinations get a ``ceil(log m)``-bit index of their intermediate in the
second table, in ascending order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..bitcodec import BitString, ceil_log2
from ..errors import ConstructionError, MalformedCodeError
from ..graphs import LabeledGraph, coverage_size


@dataclass
class StageTable:
    table1: BitString
    table2: BitString
    cutoff: int
    stage_sizes: list[int]  # |A_t| for t = 1..m (index 0 unused)
    remaining: list[int]  # m_t for t = 0..m
    claim_violations: list[int] = field(default_factory=list)

    @property
    def bits(self) -> BitString:
        return self.table1 + self.table2


def non_neighbors(g: LabeledGraph, u: int) -> list[int]:
    row = g.adj[u - 1]
    return [w for w in range(1, g.n + 1) if w != u and not row[w - 1]]


def build_stage_table(g: LabeledGraph, u: int, c: float) -> StageTable:
    cov = g.neighbors(u)[: coverage_size(g.n, c)]
    a0 = non_neighbors(g, u)
    m = len(cov)
    if not a0:
        return StageTable(BitString(), BitString(), 0, [0] * (m + 1), [0] * (m + 1))
    if not cov:
        raise ConstructionError(f"node {u} has no neighbours but must reach {len(a0)} nodes")
    sub = g.adj[np.ix_(np.asarray(cov) - 1, np.asarray(a0) - 1)]
    covered = sub.any(axis=0)
    if not covered.all():
        w = a0[int(np.flatnonzero(~covered)[0])]
        raise ConstructionError(f"no coverage neighbour of {u} is adjacent to {w}")
    stage = sub.argmax(axis=0) + 1

    sizes = np.bincount(stage, minlength=m + 1).tolist()
    remaining = [len(a0)]
    for t in range(1, m + 1):
        remaining.append(remaining[-1] - sizes[t])
    threshold = g.n / math.log2(g.n)
    cutoff = next(t for t in range(m + 1) if remaining[t] < threshold)
    violations = [t for t in range(1, cutoff + 1) if not sizes[t] > remaining[t - 1] / 3]

    width = ceil_log2(m)
    t1 = []
    t2 = []
    for s in stage.tolist():
        if s <= cutoff:
            t1.append("1" * s + "0")
        else:
            t1.append("0")
            t2.append(format(s - 1, "b").zfill(width) if width else "")
    return StageTable(BitString("".join(t1)), BitString("".join(t2)), cutoff, sizes, remaining, violations)


def parse_stage_table(bits: str, pos: int, targets: list[int], cov: tuple) -> tuple[dict, int]:
    """Decode tables starting at ``pos``; returns ``{w: intermediate}`` and the end offset.

    ``targets`` are the non-neighbours in ascending order, ``cov`` the coverage
    neighbours (any address type) in ascending label order.
    """
    via = {}
    deferred = []
    m = len(cov)
    for w in targets:
        k = bits.find("0", pos)
        if k < 0:
            raise MalformedCodeError("first table ends inside a unary entry")
        t = k - pos
        pos = k + 1
        if t == 0:
            deferred.append(w)
        elif t > m:
            raise MalformedCodeError(f"stage {t} exceeds the {m} coverage neighbours")
        else:
            via[w] = cov[t - 1]
    if deferred and not m:
        raise MalformedCodeError("deferred destinations but no coverage neighbours")
    width = ceil_log2(m) if m else 0
    for w in deferred:
        chunk = bits[pos:pos + width]
        if len(chunk) < width:
            raise MalformedCodeError("second table is truncated")
        idx = int(chunk, 2) if width else 0
        if idx >= m:
            raise MalformedCodeError(f"intermediate index {idx} out of range")
        via[w] = cov[idx]
        pos += width
    return via, pos
