"""Bit-exact scheme files.

Layout (text)::

    compact-routing-scheme 1
    scheme=<name>
    model=<info>,<relabel>
    n=<n>
    c=<c>
    ports=<json list of per-node port lists | rank | none>
    bits=<bit length of the body>
    <hex of the body, last byte zero-padded>

The body is, node by node, ``prime(label)`` (gamma only) followed by
``prime(encoding)``. Free knowledge is not stored; it is recomputed from the
graph when the file is read.
"""

from __future__ import annotations

import json
from pathlib import Path

from ..bitcodec import BitString, sd_decode_prime, sd_encode_prime
from ..errors import MalformedCodeError
from ..graphs import LabeledGraph, PortAssignment
from .builders import knowledge
from .model import Info, LocalRoutingFunction, ModelSpec, Relabel, RoutingScheme

MAGIC = "compact-routing-scheme 1"


def _fmt_c(c: float) -> str:
    return format(c, "g")


def _parse_c(text: str) -> float:
    x = float(text)
    return int(x) if x.is_integer() else x


def write_scheme(s: RoutingScheme) -> str:
    gamma = s.model.relabel is Relabel.GAMMA
    parts = []
    for v in range(1, s.n + 1):
        if gamma:
            parts.append(sd_encode_prime(s.address(v)))
        parts.append(sd_encode_prime(s.function(v).encoding))
    body = BitString.join(parts)
    if s.ports is None:
        ports = "none"
    elif s.ports_rewritten:
        ports = "rank"
    else:
        ports = json.dumps([list(p) for p in s.ports.ports], separators=(",", ":"))
    return "\n".join([
        MAGIC,
        f"scheme={s.name}",
        f"model={s.model}",
        f"n={s.n}",
        f"c={_fmt_c(s.c)}",
        f"ports={ports}",
        f"bits={len(body)}",
        body.to_hex(),
        "",
    ])


def read_scheme(text: str, g: LabeledGraph) -> RoutingScheme:
    lines = text.split("\n")
    if not lines or lines[0].strip() != MAGIC:
        raise MalformedCodeError("not a scheme file")
    fields = {}
    for line in lines[1:7]:
        key, sep, value = line.partition("=")
        if not sep:
            raise MalformedCodeError(f"bad header line {line!r}")
        fields[key.strip()] = value.strip()
    model = ModelSpec.parse(fields["model"])
    n, c = int(fields["n"]), _parse_c(fields["c"])
    if n != g.n:
        raise MalformedCodeError(f"scheme is for n={n} but the graph has {g.n} nodes")
    body = BitString.from_hex(lines[7] if len(lines) > 7 else "", int(fields["bits"]))

    gamma = model.relabel is Relabel.GAMMA
    labels, encodings = [], []
    rest = body
    for _ in range(n):
        if gamma:
            lab, rest = sd_decode_prime(rest)
            labels.append(lab)
        enc, rest = sd_decode_prime(rest)
        encodings.append(enc)
    if len(rest):
        raise MalformedCodeError(f"{len(rest)} trailing bits in scheme body")

    labels_t = tuple(labels) if gamma else None
    fs = tuple(
        LocalRoutingFunction(v, encodings[v - 1], knowledge(g, v, model, c, labels_t))
        for v in g.nodes()
    )
    ports_field = fields["ports"]
    rewritten = ports_field == "rank"
    if ports_field == "none":
        ports = None
    elif rewritten:
        ports = PortAssignment.by_rank(g)
    else:
        ports = PortAssignment(tuple(tuple(p) for p in json.loads(ports_field)))
        ports.validate(g)
    if model.info is Info.II and ports is not None:
        raise MalformedCodeError("model II schemes carry no port assignment")
    return RoutingScheme(fields["scheme"], model, n, c, fs, labels_t, ports, rewritten)


def save_scheme(path, s: RoutingScheme) -> None:
    Path(path).write_text(write_scheme(s))


def load_scheme(path, g: LabeledGraph) -> RoutingScheme:
    return read_scheme(Path(path).read_text(), g)
