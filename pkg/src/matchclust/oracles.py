"""Small-instance brute-force oracles used by tests and the selftest suite.

These deliberately avoid the engines and evaluators they are checked
against: matchings are enumerated by plain recursion (no bitmask DP) and
tree objectives are computed from nested-tuple trees.  The optimal-revenue
search runs over every binary tree shape, either literally (generator, fine
up to ~7 leaves) or through an equivalent subset recursion for n = 8.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np


def count_binary_trees(n: int) -> int:
    """Number of rooted binary trees on n labelled leaves: (2n-3)!!."""
    if n < 2:
        return 1
    out = 1
    for odd in range(1, 2 * n - 2, 2):
        out *= odd
    return out


def all_binary_trees(leaves: tuple[int, ...]):
    """Yield every rooted binary tree over the leaf set as nested pairs."""
    if len(leaves) == 1:
        yield leaves[0]
        return
    first, rest = leaves[0], leaves[1:]
    m = len(rest)
    for pick in range((1 << m) - 1):  # anchor the first leaf left, right non-empty
        left = (first,) + tuple(rest[i] for i in range(m) if (pick >> i) & 1)
        right = tuple(rest[i] for i in range(m) if not (pick >> i) & 1)
        for lt in all_binary_trees(left):
            for rt in all_binary_trees(right):
                yield (lt, rt)


def _tree_members(tree) -> list[int]:
    if isinstance(tree, int):
        return [tree]
    return _tree_members(tree[0]) + _tree_members(tree[1])


def tree_cost_and_revenue(weights: np.ndarray, tree) -> tuple[float, float]:
    """(cost, revenue) of a nested-pair tree; value equals the cost number."""
    n = weights.shape[0]
    cost = 0.0
    rev = 0.0

    def walk(t) -> list[int]:
        nonlocal cost, rev
        if isinstance(t, int):
            return [t]
        left = walk(t[0])
        right = walk(t[1])
        cross = float(weights[np.ix_(left, right)].sum())
        size = len(left) + len(right)
        cost += cross * size
        rev += cross * (n - size)
        return left + right

    walk(tree)
    return cost, rev


def best_tree_revenue(weights: np.ndarray) -> float:
    """Maximum revenue over all binary trees, by exhaustive subset recursion."""
    n = weights.shape[0]
    full = (1 << n) - 1
    inside = np.zeros(1 << n, dtype=np.float64)
    for mask in range(1, 1 << n):
        i = (mask & -mask).bit_length() - 1
        rest = mask ^ (1 << i)
        inside[mask] = inside[rest] + sum(
            weights[i, j] for j in range(n) if (rest >> j) & 1
        )

    @lru_cache(maxsize=None)
    def best(mask: int) -> float:
        bits = [i for i in range(n) if (mask >> i) & 1]
        if len(bits) <= 1:
            return 0.0
        anchor = 1 << bits[0]
        rest = mask ^ anchor
        outside = n - len(bits)
        top = -1.0
        sub = rest
        while True:
            left = anchor | sub
            right = mask ^ left
            if right:
                cross = inside[mask] - inside[left] - inside[right]
                cand = best(left) + best(right) + outside * cross
                if cand > top:
                    top = cand
            if sub == 0:
                break
            sub = (sub - 1) & rest
        return top

    out = best(full)
    best.cache_clear()
    return out


def brute_force_max_matching(weights: np.ndarray, k_edges: int | None = None):
    """(weight, pairs) of an optimal matching by recursive enumeration."""
    n = weights.shape[0]

    def rec(vertices: tuple[int, ...], budget: int) -> tuple[float, tuple]:
        if len(vertices) < 2 or budget == 0:
            return 0.0, ()
        head, rest = vertices[0], vertices[1:]
        best_w, best_p = rec(rest, budget)  # leave head unmatched
        for idx, partner in enumerate(rest):
            tail = rest[:idx] + rest[idx + 1:]
            w, p = rec(tail, budget - 1)
            w += weights[head, partner]
            if w > best_w:
                best_w, best_p = w, ((head, partner),) + p
        return best_w, best_p

    budget = n // 2 if k_edges is None else k_edges
    return rec(tuple(range(n)), budget)


def brute_force_min_perfect(weights: np.ndarray) -> tuple[float, tuple]:
    """(weight, pairs) of the minimum perfect matching, by enumeration."""
    n = weights.shape[0]
    if n % 2:
        raise ValueError("perfect matching needs an even vertex count")

    def rec(vertices: tuple[int, ...]) -> tuple[float, tuple]:
        if not vertices:
            return 0.0, ()
        head, rest = vertices[0], vertices[1:]
        best_w, best_p = None, ()
        for idx, partner in enumerate(rest):
            tail = rest[:idx] + rest[idx + 1:]
            w, p = rec(tail)
            w += weights[head, partner]
            if best_w is None or w < best_w:
                best_w, best_p = w, ((head, partner),) + p
        return best_w, best_p

    return rec(tuple(range(n)))


def brute_force_min_k_matching(weights: np.ndarray, k_edges: int) -> tuple[float, tuple]:
    """(weight, pairs) minimizing total weight over exactly k disjoint pairs."""

    def rec(vertices: tuple[int, ...], budget: int):
        if budget == 0:
            return 0.0, ()
        if len(vertices) < 2 * budget:
            return None, ()
        head, rest = vertices[0], vertices[1:]
        best_w, best_p = rec(rest, budget)  # head unmatched
        for idx, partner in enumerate(rest):
            tail = rest[:idx] + rest[idx + 1:]
            w, p = rec(tail, budget - 1)
            if w is None:
                continue
            w += weights[head, partner]
            if best_w is None or w < best_w:
                best_w, best_p = w, ((head, partner),) + p
        return best_w, best_p

    w, p = rec(tuple(range(weights.shape[0])), k_edges)
    if w is None:
        raise ValueError(f"no matching with exactly {k_edges} edges")
    return w, p
