"""Decoders that turn a node's encoding back into a routing decision.

Every encoding starts with an 8-bit program tag naming the decoder; the rest
is the data that decoder reads. Evaluation only ever uses the encoding and the
node's free knowledge.
"""

from __future__ import annotations

import enum

import numpy as np

from ..bitcodec import BitString, ceil_log2, decode_permutation, permutation_code_length
from ..errors import MalformedCodeError, ModelError, RoutingError, ProbeExhaustedError
from ..graphs import coverage_size
from .model import Deliver, ForwardNeighbor, ForwardPort, Header, NodeKnowledge, ProbeNext
from .tables import parse_stage_table

TAG_BITS = 8


class Tag(enum.IntEnum):
    CANONICAL = 1
    STAGED = 2
    STAGED_BITMAP = 3
    FIXED_PORT = 4
    FULL_INFO = 5
    RELABEL = 6
    CENTER_POINTER = 7
    HUB_NEIGHBOR = 8
    HUB_FAR = 9
    PROBE = 10


def tag_bits(tag: Tag) -> BitString:
    return BitString.from_int(int(tag), TAG_BITS)


def assemble(tag: Tag, *parts: tuple[str, BitString]) -> tuple[BitString, tuple[tuple[str, int], ...]]:
    """Tagged encoding plus its component breakdown; empty parts are dropped from the breakdown."""
    enc = BitString.join([tag_bits(tag)] + [p for _, p in parts])
    comps = (("program_tag", TAG_BITS),) + tuple((name, len(p)) for name, p in parts if len(p))
    return enc, comps


class Program:
    uses_header = False

    def __init__(self, k: NodeKnowledge):
        self.k = k

    def evaluate(self, dst, header=None):
        raise NotImplementedError

    def port_set(self, dst) -> frozenset[int]:
        raise ModelError(f"{type(self).__name__} does not return full port sets")


# ----------------------------------------------------- neighbour-aware (II)

class _KnowsNeighbors(Program):
    def __init__(self, k: NodeKnowledge):
        super().__init__(k)
        if k.neighbors is None:
            raise ModelError("this program needs neighbour labels (model II)")
        self.nbrs = k.neighbors
        self.nset = frozenset(k.neighbors)

    def direct(self, dst):
        if dst == self.k.own:
            return Deliver()
        if dst in self.nset:
            return ForwardNeighbor(dst)
        return None

    def targets(self) -> list[int]:
        own = self.k.own
        return [w for w in range(1, self.k.n + 1) if w != own and w not in self.nset]

    def coverage(self) -> tuple:
        return self.nbrs[: coverage_size(self.k.n, self.k.c)]

    def _check_dst(self, dst):
        if not isinstance(dst, int) or not 1 <= dst <= self.k.n:
            raise RoutingError(f"invalid destination label {dst!r}")


class CanonicalProgram(_KnowsNeighbors):
    """Explicit table: for each non-neighbour, the index of the least neighbour on a shortest path."""

    def __init__(self, data: str, k: NodeKnowledge):
        super().__init__(k)
        width = ceil_log2(len(self.nbrs)) if self.nbrs else 0
        targets = self.targets()
        if len(data) != width * len(targets):
            raise MalformedCodeError(f"expected {width * len(targets)} table bits, got {len(data)}")
        self.via = {}
        for i, w in enumerate(targets):
            idx = int(data[i * width:(i + 1) * width], 2) if width else 0
            if idx >= len(self.nbrs):
                raise MalformedCodeError(f"neighbour index {idx} out of range")
            self.via[w] = self.nbrs[idx]

    def evaluate(self, dst, header=None):
        a = self.direct(dst)
        if a is not None:
            return a
        self._check_dst(dst)
        if dst not in self.via:
            raise RoutingError(f"no table entry for {dst}")
        return ForwardNeighbor(self.via[dst])


class StagedProgram(_KnowsNeighbors):
    def __init__(self, data: str, k: NodeKnowledge):
        super().__init__(k)
        self.via, end = parse_stage_table(data, 0, self.targets(), self.coverage())
        if end != len(data):
            raise MalformedCodeError(f"{len(data) - end} trailing bits after the tables")

    def evaluate(self, dst, header=None):
        a = self.direct(dst)
        if a is not None:
            return a
        self._check_dst(dst)
        return ForwardNeighbor(self.via[dst])


class CenterPointerProgram(_KnowsNeighbors):
    def __init__(self, data: str, k: NodeKnowledge):
        super().__init__(k)
        if len(data) != ceil_log2(k.n + 1):
            raise MalformedCodeError("center label has the wrong width")
        self.center = int(data, 2)

    def evaluate(self, dst, header=None):
        a = self.direct(dst)
        if a is not None:
            return a
        self._check_dst(dst)
        return ForwardNeighbor(self.center)


HUB = 1


class HubNeighborProgram(_KnowsNeighbors):
    def __init__(self, data: str, k: NodeKnowledge):
        super().__init__(k)
        if data:
            raise MalformedCodeError("hub-neighbour program takes no data")
        if HUB not in self.nset:
            raise MalformedCodeError(f"node {k.own} is not adjacent to the hub")

    def evaluate(self, dst, header=None):
        a = self.direct(dst)
        if a is not None:
            return a
        self._check_dst(dst)
        return ForwardNeighbor(HUB)


class HubFarProgram(_KnowsNeighbors):
    def __init__(self, data: str, k: NodeKnowledge):
        super().__init__(k)
        cov = self.coverage()
        width = ceil_log2(len(cov)) if cov else 0
        if not cov or len(data) != width:
            raise MalformedCodeError("hub pointer has the wrong width")
        idx = int(data, 2) if width else 0
        if idx >= len(cov):
            raise MalformedCodeError(f"coverage index {idx} out of range")
        self.toward_hub = cov[idx]

    def evaluate(self, dst, header=None):
        a = self.direct(dst)
        if a is not None:
            return a
        self._check_dst(dst)
        return ForwardNeighbor(self.toward_hub)


class ProbeProgram(_KnowsNeighbors):
    """Try coverage neighbours in order; a neighbour that cannot deliver bounces the message."""

    uses_header = True

    def __init__(self, data: str, k: NodeKnowledge):
        super().__init__(k)
        if data:
            raise MalformedCodeError("probe program takes no data")
        self.cov = self.coverage()

    def evaluate(self, dst, header=None):
        a = self.direct(dst)
        if a is not None:
            return a
        self._check_dst(dst)
        if header is None:
            j = 0
        elif header.failed:
            j = header.probe + 1
        else:
            return ProbeNext()
        if j >= len(self.cov):
            raise ProbeExhaustedError(f"all {len(self.cov)} probes from {self.k.own} failed for {dst}")
        return ForwardNeighbor(self.cov[j], Header(j))


class RelabelProgram(_KnowsNeighbors):
    """Destination labels carry their own coverage list; forward to a neighbour found in it."""

    def __init__(self, data: str, k: NodeKnowledge):
        super().__init__(k)
        if data:
            raise MalformedCodeError("relabel program takes no data")
        self.width = ceil_log2(k.n)
        self.slots = 1 + coverage_size(k.n, k.c)
        self.by_original = {}
        for lab in self.nbrs:
            self.by_original.setdefault(lab.bits[: self.width], lab)

    def evaluate(self, dst, header=None):
        if not isinstance(dst, BitString) or len(dst) != self.slots * self.width:
            raise RoutingError(f"invalid destination label {dst!r}")
        a = self.direct(dst)
        if a is not None:
            return a
        b = dst.bits
        w = self.width
        for i in range(1, self.slots):
            hit = self.by_original.get(b[i * w:(i + 1) * w])
            if hit is not None:
                return ForwardNeighbor(hit)
        raise RoutingError(f"no neighbour of {self.k.own} occurs in the destination's coverage list")


# --------------------------------------------------------- port-based (IA/IB)

class _Bitmap(Program):
    """Reads the (n-1)-bit neighbour bitmap that opens IA/IB encodings."""

    def __init__(self, data: str, k: NodeKnowledge):
        super().__init__(k)
        n, own = k.n, k.own
        if len(data) < n - 1:
            raise MalformedCodeError("neighbour bitmap is truncated")
        others = [x for x in range(1, n + 1) if x != own]
        self.nbrs = tuple(x for x, bit in zip(others, data[: n - 1]) if bit == "1")
        if len(self.nbrs) != k.degree:
            raise MalformedCodeError(f"bitmap lists {len(self.nbrs)} neighbours but node has {k.degree} ports")
        self.rank = {x: i for i, x in enumerate(self.nbrs)}
        self.targets = [x for x in others if x not in self.rank]
        self.pos = n - 1
        self.port_of_rank = list(range(1, len(self.nbrs) + 1))

    def read_permutation(self, data: str) -> None:
        d = len(self.nbrs)
        width = permutation_code_length(d)
        perm = decode_permutation(BitString(data[self.pos:self.pos + width]), d)
        for port0, r in enumerate(perm):
            self.port_of_rank[r] = port0 + 1
        self.pos += width

    def port(self, v: int) -> int:
        return self.port_of_rank[self.rank[v]]

    def finish(self, data: str) -> None:
        if self.pos != len(data):
            raise MalformedCodeError(f"{len(data) - self.pos} trailing bits")

    def check_dst(self, dst):
        if not isinstance(dst, int) or not 1 <= dst <= self.k.n:
            raise RoutingError(f"invalid destination label {dst!r}")


class StagedBitmapProgram(_Bitmap):
    """Neighbour bitmap + staged tables; ports are in neighbour-rank order."""

    def __init__(self, data: str, k: NodeKnowledge, with_permutation: bool = False):
        super().__init__(data, k)
        if with_permutation:
            self.read_permutation(data)
        cov = self.nbrs[: coverage_size(k.n, k.c)]
        self.via, self.pos = parse_stage_table(data, self.pos, self.targets, cov)
        self.finish(data)

    def evaluate(self, dst, header=None):
        if dst == self.k.own:
            return Deliver()
        self.check_dst(dst)
        if dst in self.rank:
            return ForwardPort(self.port(dst))
        return ForwardPort(self.port(self.via[dst]))


class FullInfoProgram(_Bitmap):
    def __init__(self, data: str, k: NodeKnowledge):
        super().__init__(data, k)
        self.read_permutation(data)
        d = len(self.nbrs)
        need = d * len(self.targets)
        block = data[self.pos:self.pos + need]
        if len(block) != need:
            raise MalformedCodeError("first-hop bitmaps are truncated")
        # rows stay packed until asked for
        self.rows = np.frombuffer(block.encode("ascii"), dtype=np.uint8).reshape(len(self.targets), d) == 49
        self.row_of = {w: i for i, w in enumerate(self.targets)}
        self.ports = np.asarray(self.port_of_rank, dtype=np.int64)
        self.pos += need
        self.finish(data)

    def port_set(self, dst) -> frozenset[int]:
        self.check_dst(dst)
        if dst == self.k.own:
            return frozenset()
        if dst in self.rank:
            return frozenset((self.port(dst),))
        return frozenset(self.ports[self.rows[self.row_of[dst]]].tolist())

    def evaluate(self, dst, header=None):
        if dst == self.k.own:
            return Deliver()
        ports = self.port_set(dst)
        if not ports:
            raise RoutingError(f"no outgoing port recorded for {dst}")
        return ForwardPort(min(ports))


_DECODERS = {
    Tag.CANONICAL: CanonicalProgram,
    Tag.STAGED: StagedProgram,
    Tag.STAGED_BITMAP: StagedBitmapProgram,
    Tag.FIXED_PORT: lambda data, k: StagedBitmapProgram(data, k, with_permutation=True),
    Tag.FULL_INFO: FullInfoProgram,
    Tag.RELABEL: RelabelProgram,
    Tag.CENTER_POINTER: CenterPointerProgram,
    Tag.HUB_NEIGHBOR: HubNeighborProgram,
    Tag.HUB_FAR: HubFarProgram,
    Tag.PROBE: ProbeProgram,
}


def decode_program(encoding: BitString, k: NodeKnowledge) -> Program:
    bits = encoding.bits
    if len(bits) < TAG_BITS:
        raise MalformedCodeError("encoding shorter than its program tag")
    try:
        tag = Tag(int(bits[:TAG_BITS], 2))
    except ValueError as exc:
        raise MalformedCodeError(f"unknown program tag {bits[:TAG_BITS]}") from exc
    return _DECODERS[tag](bits[TAG_BITS:], k)
