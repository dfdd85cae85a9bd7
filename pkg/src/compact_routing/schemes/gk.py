"""Recovering the top-row labeling of G_k from bottom-row routing functions.

With stretch below 2, a bottom node must send traffic for top node v_j over the
edge to v_{j-k}, the same edge it uses for v_{j-k} itself. Grouping destinations
by the edge they leave on therefore pairs every middle label with one top label.
"""

from __future__ import annotations

from typing import Sequence

from ..errors import InconsistentFunctionError
from ..graphs import build_gk
from .builders import build_canonical_shortest
from .model import LocalRoutingFunction, RoutingScheme


def gk_scheme(k: int, top_labels: Sequence[int] | None = None) -> RoutingScheme:
    """Canonical shortest-path scheme on G_k with the given top-row labels."""
    return build_canonical_shortest(build_gk(k, top_labels))


def permutation_from_function(f: LocalRoutingFunction, k: int) -> tuple[int, ...]:
    groups: dict = {}
    for label in range(k + 1, 3 * k + 1):
        groups.setdefault(f.evaluate(label), []).append(label)
    top: list[int | None] = [None] * k
    for action, labels in groups.items():
        middle = [x for x in labels if x <= 2 * k]
        upper = [x for x in labels if x > 2 * k]
        if len(middle) != 1 or len(upper) != 1:
            raise InconsistentFunctionError(
                f"node {f.owner}: edge {action} carries {labels}; expected one middle and one top node"
            )
        top[middle[0] - k - 1] = upper[0]
    return tuple(top)


def reconstruct_permutation(fs: Sequence[LocalRoutingFunction], k: int) -> tuple[int, ...]:
    """Labels of v_{2k+1}..v_{3k}, read off each of the k bottom-row functions.

    Raises ``InconsistentFunctionError`` if the functions disagree.
    """
    if len(fs) != k:
        raise ValueError(f"expected {k} functions, got {len(fs)}")
    perms = [permutation_from_function(f, k) for f in fs]
    for f, p in zip(fs, perms):
        if p != perms[0]:
            raise InconsistentFunctionError(f"node {f.owner} implies {p}, node {fs[0].owner} implies {perms[0]}")
    return perms[0]
