"""Knowledge/relabeling models, routing actions, local routing functions and size accounting."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Sequence, Union

from ..bitcodec import BitString
from ..errors import CompactRoutingError, ModelError
from ..graphs import PortAssignment

Address = Union[int, BitString]


class Info(str, enum.Enum):
    IA = "IA"  # ports fixed, neighbour labels unknown
    IB = "IB"  # ports may be reassigned, neighbour labels unknown
    II = "II"  # neighbour labels known


class Relabel(str, enum.Enum):
    ALPHA = "alpha"  # original labels 1..n
    BETA = "beta"  # a permutation of 1..n
    GAMMA = "gamma"  # arbitrary bit-string labels, charged


@dataclass(frozen=True)
class ModelSpec:
    info: Info
    relabel: Relabel = Relabel.ALPHA

    def __post_init__(self):
        object.__setattr__(self, "info", Info(self.info))
        object.__setattr__(self, "relabel", Relabel(self.relabel))

    @classmethod
    def parse(cls, text: str) -> "ModelSpec":
        """``"II,gamma"``, ``"IA/alpha"`` or ``"IB"`` (alpha implied)."""
        parts = [p for p in text.replace("/", ",").replace("+", ",").split(",") if p]
        if not 1 <= len(parts) <= 2:
            raise ModelError(f"cannot parse model {text!r}")
        try:
            info = Info(parts[0].upper())
            relabel = Relabel(parts[1].lower()) if len(parts) == 2 else Relabel.ALPHA
        except ValueError as exc:
            raise ModelError(f"unknown model {text!r}") from exc
        return cls(info, relabel)

    def __str__(self) -> str:
        return f"{self.info.value},{self.relabel.value}"

    @property
    def knows_neighbors(self) -> bool:
        return self.info is Info.II


II_ALPHA = ModelSpec(Info.II, Relabel.ALPHA)
II_GAMMA = ModelSpec(Info.II, Relabel.GAMMA)
IA_ALPHA = ModelSpec(Info.IA, Relabel.ALPHA)
IB_ALPHA = ModelSpec(Info.IB, Relabel.ALPHA)


# ------------------------------------------------------------------ actions

@dataclass(frozen=True)
class Header:
    """Probe bookkeeping carried by a message: which coverage neighbour is being tried."""

    probe: int
    failed: bool = False


@dataclass(frozen=True)
class Deliver:
    pass


@dataclass(frozen=True)
class ForwardPort:
    port: int
    header: Header | None = None


@dataclass(frozen=True)
class ForwardNeighbor:
    label: Address
    header: Header | None = None


@dataclass(frozen=True)
class ProbeNext:
    """Send the message back over the edge it arrived on, tagged as failed."""


Action = Union[Deliver, ForwardPort, ForwardNeighbor, ProbeNext]


# ------------------------------------------------------- local functions

@dataclass(frozen=True)
class NodeKnowledge:
    """What a node knows without paying for it under its model.

    ``neighbors`` holds the neighbours' addresses (ascending by original label)
    under model II and is ``None`` otherwise.
    """

    own: Address
    n: int
    c: float
    degree: int
    neighbors: tuple | None = None


@dataclass(frozen=True, eq=False)
class LocalRoutingFunction:
    """A node's charged encoding plus the free knowledge needed to evaluate it.

    ``components`` splits ``encoding`` into named consecutive sections.
    """

    owner: int
    encoding: BitString
    knowledge: NodeKnowledge
    components: tuple[tuple[str, int], ...] = ()

    def __post_init__(self):
        if self.components and sum(b for _, b in self.components) != len(self.encoding):
            raise ValueError("components do not add up to the encoding length")

    @cached_property
    def program(self):
        from .programs import decode_program

        return decode_program(self.encoding, self.knowledge)

    def evaluate(self, dst: Address, header: Header | None = None) -> Action:
        return self.program.evaluate(dst, header)

    def port_set(self, dst: Address) -> frozenset[int]:
        """All shortest-path ports towards ``dst`` (full-information programs only)."""
        return self.program.port_set(dst)

    @property
    def uses_header(self) -> bool:
        # an undecodable function cannot route at all; evaluate() reports that per message
        try:
            return self.program.uses_header
        except CompactRoutingError:
            return False

    def section(self, name: str) -> tuple[int, int]:
        """Start offset and length of a named component."""
        start = 0
        for comp, bits in self.components:
            if comp == name:
                return start, bits
            start += bits
        raise KeyError(name)

    def with_encoding(self, encoding: BitString) -> "LocalRoutingFunction":
        """Same node and knowledge, different bits; the breakdown is kept only if lengths still match."""
        same = sum(b for _, b in self.components) == len(encoding)
        return LocalRoutingFunction(self.owner, encoding, self.knowledge, self.components if same else ())


@dataclass(frozen=True, eq=False)
class RoutingScheme:
    name: str
    model: ModelSpec
    n: int
    c: float
    functions: tuple[LocalRoutingFunction, ...]
    labels: tuple | None = None
    ports: PortAssignment | None = None
    ports_rewritten: bool = False
    diagnostics: dict[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.model.info is Info.II and self.ports_rewritten:
            raise ModelError("port reassignment is not allowed when neighbours are known (II)")
        if self.model.info is not Info.II and self.ports is None:
            raise ModelError(f"model {self.model} routes over ports but no port assignment was given")
        if len(self.functions) != self.n:
            raise ValueError("need exactly one local routing function per node")
        if self.labels is not None:
            if len(self.labels) != self.n or len(set(self.labels)) != self.n:
                raise ModelError("labels must be distinct, one per node")
            if self.model.relabel is Relabel.BETA and sorted(self.labels) != list(range(1, self.n + 1)):
                raise ModelError("a permutation relabeling must use exactly 1..n")
            if self.model.relabel is Relabel.ALPHA:
                raise ModelError("relabeling is not allowed under alpha")

    def function(self, v: int) -> LocalRoutingFunction:
        return self.functions[v - 1]

    def address(self, v: int) -> Address:
        """The label messages for node ``v`` are addressed with."""
        return v if self.labels is None else self.labels[v - 1]

    @cached_property
    def uses_header(self) -> bool:
        return any(f.uses_header for f in self.functions)

    def replace_function(self, v: int, f: LocalRoutingFunction) -> "RoutingScheme":
        fs = list(self.functions)
        fs[v - 1] = f
        return RoutingScheme(
            self.name, self.model, self.n, self.c, tuple(fs), self.labels, self.ports,
            self.ports_rewritten, dict(self.diagnostics),
        )


@dataclass(frozen=True)
class SizeReport:
    per_node_bits: tuple[int, ...]
    label_bits: tuple[int, ...]
    total_bits: int
    breakdown: dict[str, int]

    @property
    def max_node_bits(self) -> int:
        return max(self.per_node_bits, default=0)


def label_length(label: Address) -> int:
    return len(label) if isinstance(label, BitString) else 0


def measure_size(s: RoutingScheme) -> SizeReport:
    """Charged bits: every encoding, plus every label under gamma."""
    per_node = tuple(len(f.encoding) for f in s.functions)
    if s.model.relabel is Relabel.GAMMA and s.labels is not None:
        labels = tuple(label_length(x) if isinstance(x, BitString) else int(x).bit_length() for x in s.labels)
    else:
        labels = (0,) * s.n
    breakdown: dict[str, int] = {}
    for f in s.functions:
        for name, bits in f.components:
            breakdown[name] = breakdown.get(name, 0) + bits
    if any(labels):
        breakdown["labels"] = sum(labels)
    return SizeReport(per_node, labels, sum(per_node) + sum(labels), dict(sorted(breakdown.items())))


def require_model(model: ModelSpec, allowed: Sequence[ModelSpec], scheme: str) -> None:
    if model not in allowed:
        legal = ", ".join(str(m) for m in allowed)
        raise ModelError(f"{scheme} is not defined under {model}; legal models: {legal}")
