"""Backend selection for the hot loops.

The compiled ``_ckernels`` extension is used when it imports; otherwise the
numpy versions in ``_pykernels`` are used. Set ``COMPACT_ROUTING_PURE=1`` to
force the fallback.
"""

import os

import numpy as np

from . import _pykernels

_compiled = None
if not os.environ.get("COMPACT_ROUTING_PURE"):
    try:
        from . import _ckernels as _compiled
    except ImportError:
        _compiled = None

BACKEND = "cython" if _compiled is not None else "numpy"


def _impl(name: str, backend: str | None):
    if backend == "numpy" or (backend is None and _compiled is None):
        return getattr(_pykernels, name)
    if _compiled is None:
        raise RuntimeError("compiled kernels are not available")
    return getattr(_compiled, name)


def available_backends() -> list[str]:
    return ["cython", "numpy"] if _compiled is not None else ["numpy"]


def all_pairs_bfs(adj: np.ndarray, backend: str | None = None) -> np.ndarray:
    """Hop distances between all node pairs (0-based); -1 where unreachable."""
    return _impl("all_pairs_bfs", backend)(np.ascontiguousarray(adj, dtype=np.uint8))


def follow_next_hops(next_hop: np.ndarray, cap: int, backend: str | None = None) -> np.ndarray:
    """Walk a next-hop table from every source to every destination.

    ``next_hop[x, w]`` is the node a message for ``w`` leaves ``x`` towards, or
    -1 if ``x`` cannot forward it. Returns hop counts, -1 for pairs that hit a
    dead end or exceed ``cap`` hops.
    """
    return _impl("follow_next_hops", backend)(np.ascontiguousarray(next_hop, dtype=np.int32), int(cap))


def uncovered_pairs(adj: np.ndarray, members: np.ndarray, backend: str | None = None) -> np.ndarray:
    """Mask of (u, w) with w neither u, a neighbour of u, nor adjacent to a member of u's row.

    ``members`` rows are padded with -1.
    """
    return _impl("uncovered_pairs", backend)(
        np.ascontiguousarray(adj, dtype=np.uint8), np.ascontiguousarray(members, dtype=np.int32)
    )


def lehmer_digits(perm, backend: str | None = None) -> np.ndarray:
    """Lehmer digits: for each position, how many later entries are smaller."""
    return _impl("lehmer_digits", backend)(np.ascontiguousarray(perm, dtype=np.int64))
