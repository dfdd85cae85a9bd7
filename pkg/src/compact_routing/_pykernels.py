"""numpy implementations of the hot loops, used when the extension is absent."""

import numpy as np


def all_pairs_bfs(adj: np.ndarray) -> np.ndarray:
    """Level-synchronous BFS from every source at once; -1 marks unreachable."""
    n = adj.shape[0]
    a = adj.astype(np.float32)
    dist = np.full((n, n), -1, dtype=np.int32)
    frontier = np.eye(n, dtype=bool)
    seen = frontier.copy()
    np.fill_diagonal(dist, 0)
    level = 0
    while frontier.any():
        level += 1
        reached = (frontier.astype(np.float32) @ a) > 0
        frontier = reached & ~seen
        seen |= frontier
        dist[frontier] = level
    return dist


def follow_next_hops(next_hop: np.ndarray, cap: int) -> np.ndarray:
    n = next_hop.shape[0]
    dst = np.broadcast_to(np.arange(n), (n, n))
    cur = np.broadcast_to(np.arange(n)[:, None], (n, n)).copy()
    hops = np.full((n, n), -1, dtype=np.int32)
    hops[cur == dst] = 0
    active = cur != dst
    for step in range(1, cap + 1):
        if not active.any():
            break
        cur[active] = next_hop[cur[active], dst[active]]
        dead = active & (cur < 0)
        active &= ~dead
        arrived = active & (cur == dst)
        hops[arrived] = step
        active &= ~arrived
    return hops


def uncovered_pairs(adj: np.ndarray, members: np.ndarray) -> np.ndarray:
    n = adj.shape[0]
    cover = np.zeros((n, n), dtype=np.float32)
    rows, cols = np.nonzero(members >= 0)
    cover[rows, members[rows, cols]] = 1.0
    reach = (cover @ adj.astype(np.float32)) > 0
    reach |= adj.astype(bool)
    np.fill_diagonal(reach, True)
    return (~reach).astype(np.uint8)


def lehmer_digits(perm: np.ndarray) -> np.ndarray:
    p = np.asarray(perm, dtype=np.int64)
    smaller_later = np.triu(p[None, :] < p[:, None], k=1)
    return smaller_later.sum(axis=1).astype(np.int64)
