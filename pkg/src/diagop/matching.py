"""Bottleneck (minimax) assignment.

``bottleneck_assignment`` works for any square cost matrix: binary search over
the distinct costs with a Hopcroft-Karp perfect-matching test. For scalar
sequences ``bottleneck_match`` exploits that the threshold graph of
|a_j - b_n| <= c is convex, so feasibility reduces to comparing sorted lists.
Both return the lexicographically smallest optimal assignment.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Sequence

import numpy as np

def hopcroft_karp(adj: list[list[int]], n_right: int) -> tuple[int, list[int]]:
    """Maximum matching; returns (size, match_left) with -1 for unmatched."""
    n_left = len(adj)
    match_l = [-1] * n_left
    match_r = [-1] * n_right
    dist = [0] * n_left

    def bfs() -> bool:
        queue = deque()
        found = False
        for u in range(n_left):
            if match_l[u] == -1:
                dist[u] = 0
                queue.append(u)
            else:
                dist[u] = -1
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                w = match_r[v]
                if w == -1:
                    found = True
                elif dist[w] == -1:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        return found

    def dfs(u: int) -> bool:
        for v in adj[u]:
            w = match_r[v]
            if w == -1 or (dist[w] == dist[u] + 1 and dfs(w)):
                match_l[u] = v
                match_r[v] = u
                return True
        dist[u] = -1
        return False

    size = 0
    while bfs():
        for u in range(n_left):
            if match_l[u] == -1 and dfs(u):
                size += 1
    return size, match_l


def _threshold_adj(cost: np.ndarray, c: float) -> list[list[int]]:
    return [list(np.nonzero(row <= c)[0]) for row in cost]


def has_perfect_matching(cost: np.ndarray, c: float) -> bool:
    n = cost.shape[0]
    size, _ = hopcroft_karp(_threshold_adj(cost, c), cost.shape[1])
    return size == n


def bottleneck_assignment(cost) -> tuple[float, list[int]]:
    """Minimise max_i cost[i, p(i)] over permutations p; lexicographically smallest p."""
    cost = np.asarray(cost, dtype=np.float64)
    n = cost.shape[0]
    if cost.shape != (n, n) or n == 0:
        raise ValueError("cost matrix must be square and non-empty")
    candidates = np.unique(cost)
    lo, hi = 0, candidates.size - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if has_perfect_matching(cost, candidates[mid]):
            hi = mid
        else:
            lo = mid + 1
    best = float(candidates[lo])
    allowed = cost <= best
    perm: list[int] = []
    taken = np.zeros(n, dtype=bool)
    for i in range(n):
        for j in np.nonzero(allowed[i] & ~taken)[0]:
            rest_rows = list(range(i + 1, n))
            rest_cols = [c for c in range(n) if not taken[c] and c != j]
            sub = cost[np.ix_(rest_rows, rest_cols)] if rest_rows else np.zeros((0, 0))
            if not rest_rows or has_perfect_matching(sub, best):
                perm.append(int(j))
                taken[j] = True
                break
    return best, perm


@dataclass(frozen=True)
class PermutationPlan:
    """Pairing of b-indices with a-indices (1-based): b_n is paired with a_{mapping[n-1]}."""

    size: int
    mapping: tuple[int, ...]
    bottleneck_cost: float
    tail_rule: str = "none"

    def __post_init__(self):
        if len(self.mapping) != self.size or sorted(self.mapping) != list(range(1, self.size + 1)):
            raise ValueError("mapping is not a bijection of 1..size")

    def recompute_cost(self, a: Sequence[float], b: Sequence[float]) -> float:
        a = np.asarray(a, dtype=np.float64)
        b = np.asarray(b, dtype=np.float64)
        idx = np.asarray(self.mapping, dtype=np.int64) - 1
        if self.size == 0:
            return 0.0
        return float(np.max(np.abs(a[idx] - b[: self.size])))

    def to_json(self) -> dict:
        return {
            "size": self.size,
            "mapping": list(self.mapping),
            "bottleneck_cost": self.bottleneck_cost,
            "tail_rule": self.tail_rule,
        }


def bottleneck_match(a: Sequence[float], b: Sequence[float]) -> PermutationPlan:
    """Optimal minimax pairing of two equal-length real lists."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    n = a.size
    if b.size != n:
        raise ValueError(f"size mismatch: {n} vs {b.size}")
    if n == 0:
        raise ValueError("need at least one entry")
    order_a = np.argsort(a, kind="stable")
    order_b = np.argsort(b, kind="stable")
    best = float(np.max(np.abs(a[order_a] - b[order_b])))

    # position of each element inside the live sorted arrays
    sa = list(a[order_a])
    sb = list(b[order_b])
    ia = list(order_a)
    ib = list(order_b)
    used = np.zeros(n, dtype=bool)
    mapping = [0] * n
    for nb in range(n):
        pb = ib.index(nb)
        sa_arr = np.asarray(sa)
        sb_arr = np.asarray(sb)
        cands = np.nonzero(~used & (np.abs(a - b[nb]) <= best))[0]
        chosen = -1
        for ja in cands:
            pa = ia.index(ja)
            if pa < pb:
                ok = bool(np.all(np.abs(sa_arr[pa + 1: pb + 1] - sb_arr[pa:pb]) <= best))
            elif pa > pb:
                ok = bool(np.all(np.abs(sa_arr[pb:pa] - sb_arr[pb + 1: pa + 1]) <= best))
            else:
                ok = True
            if ok:
                chosen = int(ja)
                break
        if chosen < 0:  # pragma: no cover - impossible when best is the sorted cost
            raise RuntimeError("matching feasibility lost")
        pa = ia.index(chosen)
        del sa[pa], ia[pa], sb[pb], ib[pb]
        used[chosen] = True
        mapping[nb] = chosen + 1
    return PermutationPlan(n, tuple(mapping), best, "identity")
