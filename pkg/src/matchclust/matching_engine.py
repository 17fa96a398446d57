"""Maximum/minimum weight matching engines and the k-sized reduction.

Three interchangeable engines are provided for every matching task:

* ``exact_bruteforce`` -- bitmask dynamic programming over vertex subsets
  (exponential; rejected above a configurable size cap, default 22).
* ``greedy`` -- heaviest-edge-first scan, a 1/2-approximation.
* ``local_search`` -- greedy start plus short augmenting improvements until
  no move gains more than a relative ``epsilon``.

``k_sized_max_matching`` reduces the budgeted problem to plain maximum
matching: add ``n - 2k`` dummy vertices connected to every original vertex
at weight ``Q`` and binary-search the smallest integer ``Q`` in ``[0, nW]``
whose stripped matching has at most ``k`` edges and average pair weight (up
to a slack ``delta``) at most ``Q``.

All engines are deterministic: ties resolve to the lexicographically
smallest pair set (exactly so for integer-valued weights, where float sums
are exact).  Zero-weight edges are matchable; weight tables are assumed
complete, symmetric and non-negative.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np
from numba import njit

DEFAULT_SIZE_CAP = 22
_COUNT_DP_CAP = 20  # edge-count DP carries a (k+1) factor in memory

EXACT = "exact_bruteforce"
GREEDY = "greedy"
LOCAL_SEARCH = "local_search"
ENGINE_KINDS = (EXACT, GREEDY, LOCAL_SEARCH)

_NEG = -1e100


class EngineInfeasibleError(ValueError):
    """The requested engine cannot handle this instance."""


class MatchingError(ValueError):
    """Invalid matching-problem input."""


def size_cap() -> int:
    """Exact-engine vertex cap; override with MATCHCLUST_SIZE_CAP."""
    raw = os.environ.get("MATCHCLUST_SIZE_CAP")
    return int(raw) if raw else DEFAULT_SIZE_CAP


@dataclass(frozen=True)
class Matching:
    """A set of disjoint vertex pairs plus its total weight."""

    pairs: tuple[tuple[int, int], ...]
    total_weight: float
    note: str = ""

    def __post_init__(self):
        norm = tuple(sorted((min(u, v), max(u, v)) for u, v in self.pairs))
        object.__setattr__(self, "pairs", norm)
        flat = [v for p in norm for v in p]
        if len(flat) != len(set(flat)):
            raise MatchingError("matching pairs must be vertex-disjoint")

    @classmethod
    def from_pairs(cls, weights: np.ndarray, pairs, note: str = "") -> "Matching":
        pairs = tuple(pairs)
        total = float(sum(weights[u, v] for u, v in pairs))
        return cls(pairs=pairs, total_weight=total, note=note)

    @property
    def size(self) -> int:
        return len(self.pairs)

    def vertices(self) -> set[int]:
        return {v for p in self.pairs for v in p}


@dataclass(frozen=True)
class EngineChoice:
    """Which matching engine to run, with its accuracy knob."""

    kind: str = EXACT
    epsilon: float = 0.05

    def __post_init__(self):
        if self.kind not in ENGINE_KINDS:
            raise MatchingError(f"unknown engine kind {self.kind!r}")
        if not (0.0 < self.epsilon < 1.0):
            raise MatchingError("epsilon must lie in (0, 1)")

    @classmethod
    def parse(cls, name: str, epsilon: float = 0.05) -> "EngineChoice":
        aliases = {"exact": EXACT, "exact_bruteforce": EXACT, "greedy": GREEDY,
                   "local": LOCAL_SEARCH, "local_search": LOCAL_SEARCH,
                   "local-search": LOCAL_SEARCH}
        if name not in aliases:
            raise MatchingError(f"unknown engine {name!r}")
        return cls(kind=aliases[name], epsilon=epsilon)


def _check_table(weights: np.ndarray) -> np.ndarray:
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise MatchingError("weight table must be square")
    return w


def _require_cap(n: int, cap: int | None = None) -> None:
    limit = cap if cap is not None else size_cap()
    if n > limit:
        raise EngineInfeasibleError(
            f"exact engine capped at {limit} vertices (got {n}); "
            "use the greedy or local_search engine"
        )


# ---------------------------------------------------------------------------
# exact bitmask DP kernels
# ---------------------------------------------------------------------------

@njit(cache=True)
def _dp_free_max(w):
    """dp[mask] = max matching weight inside mask, any number of edges."""
    n = w.shape[0]
    full = 1 << n
    dp = np.zeros(full, dtype=np.float64)
    for mask in range(1, full):
        i = 0
        while not (mask >> i) & 1:
            i += 1
        best = dp[mask ^ (1 << i)]
        for j in range(i + 1, n):
            if (mask >> j) & 1:
                c = dp[mask ^ (1 << i) ^ (1 << j)] + w[i, j]
                if c > best:
                    best = c
        dp[mask] = best
    return dp


@njit(cache=True)
def _dp_perfect_max(w):
    """dp[mask] = max weight pairing every vertex of mask (-inf when odd)."""
    n = w.shape[0]
    full = 1 << n
    dp = np.full(full, _NEG, dtype=np.float64)
    dp[0] = 0.0
    for mask in range(1, full):
        i = 0
        while not (mask >> i) & 1:
            i += 1
        if mask == (1 << i):
            continue
        best = _NEG
        for j in range(i + 1, n):
            if (mask >> j) & 1:
                v = dp[mask ^ (1 << i) ^ (1 << j)]
                if v > _NEG / 2:
                    c = v + w[i, j]
                    if c > best:
                        best = c
        dp[mask] = best
    return dp


@njit(cache=True)
def _dp_count_max(w, k):
    """dp[r, mask] = max weight of a matching with exactly r edges in mask."""
    n = w.shape[0]
    full = 1 << n
    dp = np.full((k + 1, full), _NEG, dtype=np.float64)
    for mask in range(full):
        dp[0, mask] = 0.0
    for r in range(1, k + 1):
        for mask in range(1, full):
            i = 0
            while not (mask >> i) & 1:
                i += 1
            best = dp[r, mask ^ (1 << i)]
            for j in range(i + 1, n):
                if (mask >> j) & 1:
                    v = dp[r - 1, mask ^ (1 << i) ^ (1 << j)]
                    if v > _NEG / 2:
                        c = v + w[i, j]
                        if c > best:
                            best = c
            dp[r, mask] = best
    return dp


def _lowest_bit(mask: int) -> int:
    return (mask & -mask).bit_length() - 1


def _extract_free_max(w: np.ndarray, dp: np.ndarray) -> list[tuple[int, int]]:
    n = w.shape[0]
    mask = (1 << n) - 1
    pairs: list[tuple[int, int]] = []
    while mask:
        if dp[mask] <= 0.0:
            break  # remaining optimum is zero: the empty tail is lex-smallest
        i = _lowest_bit(mask)
        matched = False
        for j in range(i + 1, n):
            if (mask >> j) & 1 and dp[mask ^ (1 << i) ^ (1 << j)] + w[i, j] == dp[mask]:
                pairs.append((i, j))
                mask ^= (1 << i) | (1 << j)
                matched = True
                break
        if not matched:
            mask ^= 1 << i
    return pairs


def _extract_perfect_max(w: np.ndarray, dp: np.ndarray) -> list[tuple[int, int]]:
    n = w.shape[0]
    mask = (1 << n) - 1
    pairs: list[tuple[int, int]] = []
    while mask:
        i = _lowest_bit(mask)
        for j in range(i + 1, n):
            sub = mask ^ (1 << i) ^ (1 << j)
            if (mask >> j) & 1 and dp[sub] > _NEG / 2 and dp[sub] + w[i, j] == dp[mask]:
                pairs.append((i, j))
                mask = sub
                break
        else:
            raise AssertionError("perfect matching reconstruction failed")
    return pairs


def _extract_upto_k(w: np.ndarray, dp: np.ndarray, k: int) -> list[tuple[int, int]]:
    n = w.shape[0]
    mask = (1 << n) - 1
    left = k
    pairs: list[tuple[int, int]] = []
    while mask:
        cur = max(dp[r, mask] for r in range(left + 1))
        if cur <= 0.0:
            break
        i = _lowest_bit(mask)
        matched = False
        if left > 0:
            for j in range(i + 1, n):
                if not (mask >> j) & 1:
                    continue
                sub = mask ^ (1 << i) ^ (1 << j)
                prev = max(dp[r, sub] for r in range(left))
                if prev > _NEG / 2 and prev + w[i, j] == cur:
                    pairs.append((i, j))
                    mask = sub
                    left -= 1
                    matched = True
                    break
        if not matched:
            mask ^= 1 << i
    return pairs


def _extract_exact_k(w: np.ndarray, dp: np.ndarray, k: int) -> list[tuple[int, int]]:
    n = w.shape[0]
    mask = (1 << n) - 1
    r = k
    pairs: list[tuple[int, int]] = []
    while r > 0:
        if not mask:
            raise AssertionError("exact-k reconstruction exhausted vertices")
        cur = dp[r, mask]
        i = _lowest_bit(mask)
        matched = False
        for j in range(i + 1, n):
            if not (mask >> j) & 1:
                continue
            sub = mask ^ (1 << i) ^ (1 << j)
            if dp[r - 1, sub] > _NEG / 2 and dp[r - 1, sub] + w[i, j] == cur:
                pairs.append((i, j))
                mask = sub
                r -= 1
                matched = True
                break
        if not matched:
            mask ^= 1 << i
    return pairs


# ---------------------------------------------------------------------------
# public engines
# ---------------------------------------------------------------------------

def exact_max_matching(weights: np.ndarray, k_edges: int | None = None,
                       cap: int | None = None) -> Matching:
    """Optimal maximum-weight matching, optionally with at most k_edges pairs.

    Deterministic tie-break: lexicographically smallest pair set (and the
    empty tail whenever the remaining optimum is zero).
    """
    w = _check_table(weights)
    n = w.shape[0]
    _require_cap(n, cap)
    if k_edges is None:
        dp = _dp_free_max(w)
        pairs = _extract_free_max(w, dp)
    else:
        if not (1 <= k_edges <= n // 2):
            raise MatchingError(f"k_edges must lie in [1, n//2], got {k_edges}")
        _require_cap(n, min(cap if cap is not None else size_cap(), _COUNT_DP_CAP))
        dp = _dp_count_max(w, k_edges)
        pairs = _extract_upto_k(w, dp, k_edges)
    return Matching.from_pairs(w, pairs)


def greedy_matching(weights: np.ndarray) -> Matching:
    """Half-approximate matching: scan edges by descending weight.

    Ties break on the lexicographic pair order.  Zero-weight edges are
    scanned too, so complete graphs always end up perfectly matched.
    """
    w = _check_table(weights)
    n = w.shape[0]
    iu, ju = np.triu_indices(n, k=1)
    order = np.lexsort((ju, iu, -w[iu, ju]))
    used = np.zeros(n, dtype=bool)
    pairs = []
    for idx in order:
        u, v = int(iu[idx]), int(ju[idx])
        if not used[u] and not used[v]:
            used[u] = used[v] = True
            pairs.append((u, v))
    return Matching.from_pairs(w, pairs)


def _improvement_moves(w: np.ndarray, pairs: list[tuple[int, int]], free: list[int],
                       keep_perfect: bool):
    """Yield (gain, description, new_pairs) for short augmenting moves."""
    if not keep_perfect:
        for x in range(len(free)):
            for y in range(x + 1, len(free)):
                u, v = free[x], free[y]
                if w[u, v] > 0:
                    yield w[u, v], pairs + [(u, v)]
        for t, (a, b) in enumerate(pairs):
            rest = pairs[:t] + pairs[t + 1:]
            for c in free:
                # one endpoint rewired to a free vertex
                if w[a, c] > w[a, b]:
                    yield w[a, c] - w[a, b], rest + [(a, c)]
                if w[b, c] > w[a, b]:
                    yield w[b, c] - w[a, b], rest + [(b, c)]
            for x in range(len(free)):
                for y in range(len(free)):
                    if x == y:
                        continue
                    c, d = free[x], free[y]
                    gain = w[a, c] + w[b, d] - w[a, b]
                    if gain > 0:
                        yield gain, rest + [(a, c), (b, d)]
    for s in range(len(pairs)):
        for t in range(s + 1, len(pairs)):
            a, b = pairs[s]
            c, d = pairs[t]
            rest = [p for r, p in enumerate(pairs) if r != s and r != t]
            old = w[a, b] + w[c, d]
            if w[a, c] + w[b, d] > old:
                yield w[a, c] + w[b, d] - old, rest + [(a, c), (b, d)]
            if w[a, d] + w[b, c] > old:
                yield w[a, d] + w[b, c] - old, rest + [(a, d), (b, c)]


def _local_search(w: np.ndarray, start: Matching, epsilon: float,
                  keep_perfect: bool) -> Matching:
    n = w.shape[0]
    pairs = list(start.pairs)
    total = start.total_weight
    for _ in range(n * n + 1):
        free = sorted(set(range(n)) - {v for p in pairs for v in p})
        best_gain = 0.0
        best_pairs = None
        for gain, cand in _improvement_moves(w, pairs, free, keep_perfect):
            if gain > best_gain:
                best_gain, best_pairs = gain, cand
        if best_pairs is None or best_gain <= epsilon * total:
            break
        pairs = sorted((min(u, v), max(u, v)) for u, v in best_pairs)
        total += best_gain
    return Matching.from_pairs(w, pairs)


def local_search_matching(weights: np.ndarray, epsilon: float) -> Matching:
    """Greedy matching improved by short augmentations and pair swaps.

    Stops once no move improves the total weight by more than a relative
    ``epsilon`` (any positive gain counts while the total is zero).
    """
    if not (0.0 < epsilon < 1.0):
        raise MatchingError("epsilon must lie in (0, 1)")
    w = _check_table(weights)
    return _local_search(w, greedy_matching(w), epsilon, keep_perfect=False)


def max_matching(weights: np.ndarray, engine: EngineChoice) -> Matching:
    """Unconstrained maximum matching under the chosen engine."""
    if engine.kind == EXACT:
        return exact_max_matching(weights)
    if engine.kind == GREEDY:
        return greedy_matching(weights)
    return local_search_matching(weights, engine.epsilon)


def max_perfect_matching(weights: np.ndarray, engine: EngineChoice) -> Matching:
    """Maximum-weight perfect matching (even vertex count, complete table)."""
    w = _check_table(weights)
    n = w.shape[0]
    if n % 2:
        raise MatchingError("perfect matching needs an even vertex count")
    if n == 0:
        return Matching((), 0.0)
    if engine.kind == EXACT:
        _require_cap(n)
        dp = _dp_perfect_max(w)
        pairs = _extract_perfect_max(w, dp)
        return Matching.from_pairs(w, pairs)
    start = greedy_matching(w)
    if 2 * start.size != n:
        raise MatchingError("greedy failed to perfect-match a complete table")
    if engine.kind == GREEDY:
        return start
    return _local_search(w, start, engine.epsilon, keep_perfect=True)


def min_perfect_matching(weights: np.ndarray, engine: EngineChoice) -> Matching:
    """Minimum-weight perfect matching via complement weights W - w."""
    w = _check_table(weights)
    n = w.shape[0]
    if n % 2:
        raise MatchingError("perfect matching needs an even vertex count")
    comp = w.max() - w
    np.fill_diagonal(comp, 0.0)
    best = max_perfect_matching(comp, engine)
    return Matching.from_pairs(w, best.pairs, note=best.note)


def _delta_for(epsilon: float, n: int, k_edges: int) -> float:
    # smaller positive root of d^2 - (c+1) d + epsilon = 0 with c = n / k
    c = n / k_edges
    disc = (c + 1.0) ** 2 - 4.0 * epsilon
    root = ((c + 1.0) - math.sqrt(disc)) / 2.0
    return min(epsilon, root)


def _k_sized_max_with_stats(weights: np.ndarray, k_edges: int, epsilon: float,
                            engine: EngineChoice) -> tuple[Matching, int]:
    """k-sized (or smaller) maximum matching; returns (matching, probe count)."""
    w = _check_table(weights)
    n = w.shape[0]
    if not (1 <= k_edges <= n // 2):
        raise MatchingError(f"k_edges must lie in [1, n//2], got {k_edges}")
    if not (0.0 < epsilon < 1.0):
        raise MatchingError("epsilon must lie in (0, 1)")
    if not np.array_equal(w, np.rint(w)):
        raise MatchingError("the k-sized reduction requires integer weights")
    delta = _delta_for(epsilon, n, k_edges)
    n_dummy = n - 2 * k_edges
    big_w = int(round(w.max()))
    hi = n * big_w
    slack = k_edges * (1.0 - delta)

    def probe(q: int) -> Matching:
        m = n + n_dummy
        t = np.zeros((m, m), dtype=np.float64)
        t[:n, :n] = w
        if n_dummy:
            t[n:, :n] = float(q)
            t[:n, n:] = float(q)
        full = max_matching(t, engine)
        kept = [p for p in full.pairs if p[0] < n and p[1] < n]
        return Matching.from_pairs(w, kept)

    cache: dict[int, Matching] = {}
    lo, q = 0, hi
    iterations = 0
    while lo < q:
        mid = (lo + q) // 2
        m = probe(mid)
        cache[mid] = m
        iterations += 1
        if m.size <= k_edges and m.total_weight <= mid * slack + 1e-9:
            q = mid
        else:
            lo = mid + 1
    result = cache.get(q)
    if result is None or result.size > k_edges:
        result = probe(q)
    if result.size > k_edges:
        raise MatchingError("k-sized reduction failed to satisfy the halt condition")
    result = Matching(result.pairs, result.total_weight,
                      note=f"k_sized_max via {engine.kind}")
    return result, iterations


def k_sized_max_matching(weights: np.ndarray, k_edges: int, epsilon: float,
                         engine: EngineChoice) -> Matching:
    """Maximum matching with at most k_edges pairs, by dummy-vertex reduction."""
    matching, _ = _k_sized_max_with_stats(weights, k_edges, epsilon, engine)
    return matching


def min_k_sized_matching(weights: np.ndarray, k_edges: int,
                         engine: EngineChoice) -> Matching:
    """Minimum-weight matching with exactly k_edges pairs.

    The exact engine optimizes by edge-count DP; heuristic engines are
    best-effort stand-ins and say so in the matching note.
    """
    w = _check_table(weights)
    n = w.shape[0]
    if not (1 <= k_edges <= n // 2):
        raise MatchingError(f"k_edges must lie in [1, n//2], got {k_edges}")
    if engine.kind == EXACT:
        _require_cap(n, min(size_cap(), _COUNT_DP_CAP))
        neg = -w
        dp = _dp_count_max(neg, k_edges)
        pairs = _extract_exact_k(neg, dp, k_edges)
        if len(pairs) != k_edges:
            raise MatchingError(f"no matching with exactly {k_edges} edges")
        return Matching.from_pairs(w, pairs)
    pairs = _greedy_min_k(w, k_edges)
    start = Matching.from_pairs(w, pairs, note="min_k heuristic stand-in")
    if engine.kind == GREEDY:
        return start
    improved = _local_search_min_k(w, start, engine.epsilon)
    return Matching(improved.pairs, improved.total_weight,
                    note="min_k heuristic stand-in")


def _greedy_min_k(w: np.ndarray, k_edges: int) -> list[tuple[int, int]]:
    n = w.shape[0]
    iu, ju = np.triu_indices(n, k=1)
    order = np.lexsort((ju, iu, w[iu, ju]))
    used = np.zeros(n, dtype=bool)
    pairs: list[tuple[int, int]] = []
    for idx in order:
        if len(pairs) == k_edges:
            break
        u, v = int(iu[idx]), int(ju[idx])
        if not used[u] and not used[v]:
            used[u] = used[v] = True
            pairs.append((u, v))
    if len(pairs) < k_edges:
        raise MatchingError(f"could not build {k_edges} disjoint pairs")
    return pairs


def _local_search_min_k(w: np.ndarray, start: Matching, epsilon: float) -> Matching:
    """Swap/rewire moves that keep the pair count fixed, minimizing weight."""
    n = w.shape[0]
    pairs = list(start.pairs)
    total = start.total_weight
    for _ in range(n * n + 1):
        free = sorted(set(range(n)) - {v for p in pairs for v in p})
        best_gain = 0.0
        best_pairs = None
        for t, (a, b) in enumerate(pairs):
            rest = pairs[:t] + pairs[t + 1:]
            for c in free:
                for keep in (a, b):
                    gain = w[a, b] - w[keep, c]
                    if gain > best_gain:
                        best_gain, best_pairs = gain, rest + [(keep, c)]
        for s in range(len(pairs)):
            for t in range(s + 1, len(pairs)):
                a, b = pairs[s]
                c, d = pairs[t]
                rest = [p for r, p in enumerate(pairs) if r != s and r != t]
                old = w[a, b] + w[c, d]
                for p1, p2 in (((a, c), (b, d)), ((a, d), (b, c))):
                    gain = old - (w[p1[0], p1[1]] + w[p2[0], p2[1]])
                    if gain > best_gain:
                        best_gain, best_pairs = gain, rest + [p1, p2]
        if best_pairs is None or best_gain <= epsilon * max(total, 1e-12):
            break
        pairs = sorted((min(u, v), max(u, v)) for u, v in best_pairs)
        total -= best_gain
    return Matching.from_pairs(w, pairs)
