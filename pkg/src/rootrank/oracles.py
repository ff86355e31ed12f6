"""Brute-force reference scorers and the exhaustive verification pass.

Everything here recomputes centrality from first principles (explicit
component enumeration, all-pairs BFS, exact big-integer products) with
no shared code with the linear-time scorers, so agreement between the
two routes is meaningful.  Guarded to n <= 2000; these are quadratic or
worse on purpose.
"""

from __future__ import annotations

import math
from collections import deque
from functools import cmp_to_key

import numpy as np

from . import centrality as _fast
from .tree import RecursiveTree, enumerate_recursive_trees, serialize_tree, subtree_sizes

ORACLE_MAX_N = 2000


class VerificationError(AssertionError):
    """A fast scorer disagreed with its oracle."""


def _check_n(tree: RecursiveTree) -> None:
    if tree.n > ORACLE_MAX_N:
        raise ValueError(f"oracle scorers are limited to n <= {ORACLE_MAX_N}")


def _adjacency(tree: RecursiveTree) -> list[list[int]]:
    adj: list[list[int]] = [[] for _ in range(tree.n + 1)]
    par = tree.parent
    for v in range(2, tree.n + 1):
        p = int(par[v])
        adj[v].append(p)
        adj[p].append(v)
    return adj


def _components_without(adj: list[list[int]], n: int, removed: int) -> list[int]:
    """Sizes of the components of the tree with ``removed`` deleted."""
    seen = [False] * (n + 1)
    seen[removed] = True
    out = []
    for start in adj[removed]:
        if seen[start]:
            continue
        size = 0
        queue = deque([start])
        seen[start] = True
        while queue:
            u = queue.popleft()
            size += 1
            for w in adj[u]:
                if not seen[w]:
                    seen[w] = True
                    queue.append(w)
        out.append(size)
    return out


def oracle_jordan(tree: RecursiveTree) -> np.ndarray:
    _check_n(tree)
    adj = _adjacency(tree)
    out = np.zeros(tree.n + 1, dtype=np.int64)
    for v in range(1, tree.n + 1):
        comps = _components_without(adj, tree.n, v)
        out[v] = max(comps) if comps else 0
    return out


def oracle_closeness(tree: RecursiveTree) -> np.ndarray:
    _check_n(tree)
    adj = _adjacency(tree)
    out = np.zeros(tree.n + 1, dtype=np.int64)
    for v in range(1, tree.n + 1):
        dist = [-1] * (tree.n + 1)
        dist[v] = 0
        queue = deque([v])
        total = 0
        while queue:
            u = queue.popleft()
            total += dist[u]
            for w in adj[u]:
                if dist[w] < 0:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        out[v] = total
    return out


def oracle_rumor(tree: RecursiveTree) -> list[int]:
    """Exact rumor scores as arbitrary-precision integers (index 0 unused).

    phi(v) is the product over u != v of the size of u's subtree in the
    tree rooted at v.
    """
    _check_n(tree)
    adj = _adjacency(tree)
    n = tree.n
    out = [0] * (n + 1)
    for r in range(1, n + 1):
        size = [0] * (n + 1)
        order = []
        parent_r = [0] * (n + 1)
        stack = [r]
        seen = [False] * (n + 1)
        seen[r] = True
        while stack:
            u = stack.pop()
            order.append(u)
            for w in adj[u]:
                if not seen[w]:
                    seen[w] = True
                    parent_r[w] = u
                    stack.append(w)
        phi = 1
        for u in reversed(order):
            size[u] += 1
            if u != r:
                size[parent_r[u]] += size[u]
                phi *= size[u]
        out[r] = phi
    return out


def oracle_betweenness_pairs(tree: RecursiveTree) -> np.ndarray:
    """Count paths through each vertex by walking every vertex pair."""
    _check_n(tree)
    n = tree.n
    par = tree.parent.tolist()
    depth = [0] * (n + 1)
    for v in range(2, n + 1):
        depth[v] = depth[par[v]] + 1
    out = np.zeros(n + 1, dtype=np.int64)
    for s in range(1, n + 1):
        for t in range(s + 1, n + 1):
            a, b = s, t
            while depth[a] > depth[b]:
                a = par[a]
                if a not in (s, t):
                    out[a] += 1
            while depth[b] > depth[a]:
                b = par[b]
                if b not in (s, t):
                    out[b] += 1
            while a != b:
                a = par[a]
                b = par[b]
                if a == b:
                    if a not in (s, t):
                        out[a] += 1
                else:
                    if a not in (s, t):
                        out[a] += 1
                    if b not in (s, t):
                        out[b] += 1
    return out


def oracle_betweenness_sq(tree: RecursiveTree, q: int = 2) -> list[int]:
    """Sum of q-th powers of component sizes, by explicit enumeration."""
    _check_n(tree)
    adj = _adjacency(tree)
    out = [0] * (tree.n + 1)
    for v in range(1, tree.n + 1):
        out[v] = sum(c**q for c in _components_without(adj, tree.n, v))
    return out


def oracle_degree(tree: RecursiveTree) -> np.ndarray:
    _check_n(tree)
    adj = _adjacency(tree)
    out = np.zeros(tree.n + 1, dtype=np.int64)
    for v in range(1, tree.n + 1):
        out[v] = len(adj[v])
    return out


def _rank_generic(values: list, larger_is_central: bool) -> tuple[list[int], int, tuple[int, ...]]:
    """Rank 1..n from exact scores; pessimistic ties.  Returns (rank, center, tied)."""
    n = len(values) - 1

    def cmp(a: int, b: int) -> int:
        va, vb = values[a], values[b]
        if va != vb:
            better = (va > vb) if larger_is_central else (va < vb)
            return -1 if better else 1
        return b - a

    order = sorted(range(1, n + 1), key=cmp_to_key(cmp))
    rank = [0] * (n + 1)
    for pos, v in enumerate(order, start=1):
        rank[v] = pos
    best = values[order[0]]
    tied = tuple(sorted(v for v in range(1, n + 1) if values[v] == best))
    return rank, order[0], tied


def oracle_rank(values, larger_is_central: bool) -> list[int]:
    return _rank_generic(list(values), larger_is_central)[0]


def _verify_one(tree: RecursiveTree, sizes: np.ndarray, log_tol: float) -> None:
    n = tree.n

    checks = [
        ("jordan", _fast.jordan_scores(tree, sizes), oracle_jordan(tree), False),
        ("closeness", _fast.closeness_scores(tree, sizes), oracle_closeness(tree), False),
        ("degree", _fast.degree_scores(tree), oracle_degree(tree), True),
        (
            "betweenness-sq",
            _fast.betweenness_sq_scores(tree, sizes, q=2),
            np.array(oracle_betweenness_sq(tree, 2), dtype=np.int64),
            False,
        ),
        (
            "betweenness-pairs",
            _fast.betweenness_pairs_scores(tree, sizes),
            oracle_betweenness_pairs(tree),
            True,
        ),
    ]
    for tag, fast_scores, oracle_scores_, larger in checks:
        if not np.array_equal(fast_scores[1:], np.asarray(oracle_scores_)[1:]):
            raise VerificationError(
                f"{tag} scores disagree on tree {serialize_tree(tree)!r}: "
                f"fast={fast_scores[1:].tolist()} oracle={np.asarray(oracle_scores_)[1:].tolist()}"
            )

    log_fast, comparator = _fast.rumor_scores(tree, sizes)
    phi = oracle_rumor(tree)
    for v in range(1, n + 1):
        if abs(log_fast[v] - math.log(phi[v])) > log_tol:
            raise VerificationError(
                f"rumor log score disagrees at vertex {v} on tree "
                f"{serialize_tree(tree)!r}: fast={log_fast[v]} exact={math.log(phi[v])}"
            )

    # Exact comparator must reproduce big-integer comparisons (all pairs
    # for small trees, a deterministic O(n) sample otherwise).
    if n <= 12:
        pairs = [(a, b) for a in range(1, n + 1) for b in range(1, n + 1)]
    else:
        pairs = [(v, 1) for v in range(1, n + 1)]
        pairs += [(v, min(v + 7, n)) for v in range(1, n + 1)]
    for a, b in pairs:
        want = (phi[a] > phi[b]) - (phi[a] < phi[b])
        got = comparator.compare(a, b)
        if got != want:
            raise VerificationError(
                f"rumor comparator wrong for ({a},{b}) on tree "
                f"{serialize_tree(tree)!r}: got {got}, want {want}"
            )

    # Tie-broken ranks, fast vs oracle, all measures.
    rank_checks = [
        (_fast.JORDAN, checks[0][1], checks[0][2].tolist(), False),
        (_fast.CLOSENESS, checks[1][1], checks[1][2].tolist(), False),
        (_fast.DEGREE, checks[2][1], checks[2][2].tolist(), True),
        (_fast.BETWEENNESS_SQ, checks[3][1], checks[3][2].tolist(), False),
        (_fast.BETWEENNESS_PAIRS, checks[4][1], checks[4][2].tolist(), True),
    ]
    fast_ranks = {}
    for measure, fast_scores, oracle_vals, larger in rank_checks:
        fast_rank, _ = _fast.rank_vertices(fast_scores, measure)
        want_rank = oracle_rank(oracle_vals, larger)
        if fast_rank[1:].tolist() != want_rank[1:]:
            raise VerificationError(
                f"{measure.tag} ranks disagree on tree {serialize_tree(tree)!r}"
            )
        fast_ranks[measure.tag] = fast_rank

    rumor_rank, _ = _fast.rank_vertices(log_fast, _fast.RUMOR, comparator)
    want_rumor = oracle_rank(phi, False)
    if rumor_rank[1:].tolist() != want_rumor[1:]:
        raise VerificationError(f"rumor ranks disagree on tree {serialize_tree(tree)!r}")

    # The two betweenness forms must rank identically.
    if fast_ranks["betweenness-sq"][1:].tolist() != fast_ranks["betweenness-pairs"][1:].tolist():
        raise VerificationError(
            f"betweenness sq vs pairs ranking differs on tree {serialize_tree(tree)!r}"
        )


def verify_tree(tree: RecursiveTree, log_tol: float | None = None) -> None:
    """Compare every fast scorer and ranking against its oracle on one tree."""
    sizes = subtree_sizes(tree)
    tol = log_tol if log_tol is not None else _fast.RUMOR_TIE_BAND_PER_VERTEX * tree.n
    _verify_one(tree, sizes, tol)


def verify_exhaustive(max_n: int) -> int:
    """Verify all recursive trees with n <= max_n.  Returns the tree count."""
    if max_n < 1:
        raise ValueError("max_n must be >= 1")
    if max_n > 9:
        raise ValueError("exhaustive verification beyond n=9 is impractical")
    total = 0
    for n in range(1, max_n + 1):
        for tree in enumerate_recursive_trees(n):
            verify_tree(tree)
            total += 1
    return total
