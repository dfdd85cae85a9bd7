"""Compact routing schemes for random graphs.

Builders for shortest-path and stretch-bounded routing schemes with exact bit
accounting under each knowledge/relabeling model, a hop-by-hop simulator
checked against BFS, and empirical checkers for the structural properties the
constructions rely on.
"""

from .bitcodec import BitString, decode_graph, encode_graph, sd_decode_bar, sd_encode_bar, sd_encode_prime
from .graphs import (
    CoverageSet,
    LabeledGraph,
    PortAssignment,
    bfs_distances,
    build_gk,
    check_coverage_lemma,
    check_degree_lemma,
    check_diameter_two,
    coverage_set,
    generate_uniform,
)
from .kernels import BACKEND

__version__ = "0.1.0"
