"""Routing-scheme constructions, their decoders and size accounting."""

from .budgets import budget_violations, headline_bits
from .builders import (
    BUILDERS,
    DEFAULT_MODELS,
    LEGAL_MODELS,
    NEEDS_PORTS,
    build,
    build_canonical_shortest,
    build_full_info,
    build_sp_fixed_port,
    build_sp_neighbor_known,
    build_sp_relabel,
    build_stretch15,
    build_stretch2_hub,
    build_stretch_logn,
    require_lemmas,
)
from .gk import gk_scheme, reconstruct_permutation
from .model import (
    IA_ALPHA,
    IB_ALPHA,
    II_ALPHA,
    II_GAMMA,
    Action,
    Deliver,
    ForwardNeighbor,
    ForwardPort,
    Header,
    Info,
    LocalRoutingFunction,
    ModelSpec,
    NodeKnowledge,
    ProbeNext,
    Relabel,
    RoutingScheme,
    SizeReport,
    measure_size,
)
from .serialize import load_scheme, read_scheme, save_scheme, write_scheme
