"""Centrality measures on recursive trees, with root-finding reports.

Five measures are implemented, each in one or two O(n) passes driven by
subtree sizes and rerooting identities:

* Jordan: largest component left by removing the vertex (smaller wins).
* Closeness: total distance to all other vertices (smaller wins).
* Rumor: product of subtree sizes in the tree rooted at the vertex,
  kept in log space with an exact big-integer comparison fallback
  (smaller log-score wins).
* Betweenness, sum-of-powers form: sum of q-th powers of the component
  sizes left by removing the vertex, q >= 2 (smaller wins).  For q = 2
  this ranks vertices identically to the classical pair-counting form.
* Betweenness, pair-counting form: number of vertex pairs whose path
  passes through the vertex (larger wins).
* Degree (larger wins).

Ties are always broken pessimistically: among equally central vertices
the one inserted later (larger label) ranks first.  ``rank_vertices``
returns the full rank permutation plus a ``CenterReport`` naming the
tie-broken center and the rank of vertex 1.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .tree import RecursiveTree, subtree_sizes

RUMOR_TIE_BAND_PER_VERTEX = 1e-7


class ScoreOverflowError(OverflowError):
    """Scores would not fit 64-bit integers for the requested (n, q)."""


@dataclass(frozen=True)
class Measure:
    """A centrality measure tag plus its ranking direction."""

    tag: str
    larger_is_central: bool
    q: int | None = None

    def __str__(self) -> str:
        return self.tag


JORDAN = Measure("jordan", False)
CLOSENESS = Measure("closeness", False)
RUMOR = Measure("rumor", False)
BETWEENNESS_SQ = Measure("betweenness-sq", False, q=2)
BETWEENNESS_PAIRS = Measure("betweenness-pairs", True)
DEGREE = Measure("degree", True)


def betweenness_q(q: int) -> Measure:
    if q < 2:
        raise ValueError("q must be >= 2")
    return Measure(f"betweenness-q{q}", False, q=q)


MEASURES: dict[str, Measure] = {
    m.tag: m
    for m in (JORDAN, CLOSENESS, RUMOR, BETWEENNESS_SQ, BETWEENNESS_PAIRS, DEGREE)
}


@dataclass(frozen=True)
class CenterReport:
    """Tie-broken center label, rank of the root, and the raw tied set."""

    center_index: int
    root_rank: int
    tied_center_set: tuple[int, ...]


@dataclass
class CentralityProfile:
    measure: Measure
    scores: np.ndarray
    rank: np.ndarray
    report: CenterReport
    comparator: "RumorComparator | None" = field(default=None, repr=False)


def _sizes_or(tree: RecursiveTree, sizes: np.ndarray | None) -> np.ndarray:
    return subtree_sizes(tree) if sizes is None else sizes


def _child_aggregates(tree: RecursiveTree, sizes: np.ndarray) -> tuple[list, list]:
    """One reverse pass: per-vertex max child size and sum of squared child sizes."""
    n = tree.n
    par = tree.parent.tolist()
    s = sizes.tolist()
    cmax = [0] * (n + 1)
    csq = [0] * (n + 1)
    for v in range(n, 1, -1):
        p = par[v]
        sv = s[v]
        if sv > cmax[p]:
            cmax[p] = sv
        csq[p] += sv * sv
    return cmax, csq


def jordan_scores(
    tree: RecursiveTree, sizes: np.ndarray | None = None
) -> np.ndarray:
    """Largest component size after removing each vertex (int64, slot 0 unused)."""
    sizes = _sizes_or(tree, sizes)
    n = tree.n
    cmax, _ = _child_aggregates(tree, sizes)
    above = n - sizes
    above[0] = 0
    out = np.maximum(above, np.array(cmax, dtype=np.int64))
    out[0] = 0
    return out


def closeness_scores(
    tree: RecursiveTree, sizes: np.ndarray | None = None
) -> np.ndarray:
    """Sum of distances from each vertex to all others, via rerooting."""
    sizes = _sizes_or(tree, sizes)
    n = tree.n
    par = tree.parent.tolist()
    s = sizes.tolist()
    out = [0] * (n + 1)
    depth_total = 0
    depth = [0] * (n + 1)
    for v in range(2, n + 1):
        d = depth[par[v]] + 1
        depth[v] = d
        depth_total += d
    out[1] = depth_total
    for v in range(2, n + 1):
        out[v] = out[par[v]] + n - 2 * s[v]
    return np.array(out, dtype=np.int64)


class RumorComparator:
    """Exact comparison of rumor scores via telescoping integer products.

    For adjacent vertices phi(child)/phi(parent) = (n - size)/size with
    the child's subtree size, so phi(a)/phi(b) telescopes along the tree
    path between a and b.  Comparisons cross-multiply the integer
    factors, which stays exact where accumulated float logs cannot.
    """

    def __init__(self, tree: RecursiveTree, sizes: np.ndarray):
        self._par = tree.parent.tolist()
        self._s = sizes.tolist()
        self.n = tree.n
        depth = [0] * (tree.n + 1)
        par = self._par
        for v in range(2, tree.n + 1):
            depth[v] = depth[par[v]] + 1
        self._depth = depth

    def _path_factors(self, lo: int, hi_excl: int) -> tuple[int, int]:
        """Product of (n - s_w) and of s_w for w walking lo up to hi_excl."""
        num = 1
        den = 1
        n = self.n
        s = self._s
        par = self._par
        w = lo
        while w != hi_excl:
            num *= n - s[w]
            den *= s[w]
            w = par[w]
        return num, den

    def compare(self, a: int, b: int) -> int:
        """Sign of phi(a) - phi(b): -1, 0, or 1, computed exactly."""
        if a == b:
            return 0
        depth = self._depth
        par = self._par
        x, y = a, b
        while depth[x] > depth[y]:
            x = par[x]
        while depth[y] > depth[x]:
            y = par[y]
        while x != y:
            x = par[x]
            y = par[y]
        lca = x
        num_a, den_a = self._path_factors(a, lca)
        num_b, den_b = self._path_factors(b, lca)
        lhs = num_a * den_b
        rhs = num_b * den_a
        if lhs < rhs:
            return -1
        if lhs > rhs:
            return 1
        return 0


def rumor_scores(
    tree: RecursiveTree, sizes: np.ndarray | None = None
) -> tuple[np.ndarray, RumorComparator]:
    """Log rumor scores plus the exact comparison handle.

    log phi(root) = sum over v != root of log size(v); rerooting adds
    log(n - size) - log(size) along each edge.
    """
    sizes = _sizes_or(tree, sizes)
    n = tree.n
    out = np.zeros(n + 1, dtype=np.float64)
    if n > 1:
        logs = np.log(sizes[2:].astype(np.float64))
        log_above = np.log((n - sizes[2:]).astype(np.float64))
        root_score = float(np.sum(logs))
        gain = (log_above - logs).tolist()
        par = tree.parent.tolist()
        acc = [0.0] * (n + 1)
        for v in range(2, n + 1):
            acc[v] = acc[par[v]] + gain[v - 2]
        out = np.array(acc, dtype=np.float64)
        out += root_score
        out[0] = 0.0
    return out, RumorComparator(tree, sizes)


def betweenness_sq_scores(
    tree: RecursiveTree, sizes: np.ndarray | None = None, q: int = 2
) -> np.ndarray:
    """Sum of q-th powers of component sizes after removing each vertex."""
    if q < 2:
        raise ValueError("q must be >= 2")
    n = tree.n
    if n > 1 and 2 * (n - 1) ** q >= 2**63:
        raise ScoreOverflowError(
            f"betweenness scores overflow 64-bit integers for n={n}, q={q}"
        )
    if q == 2 and n > 10**8:
        raise ScoreOverflowError(f"n={n} exceeds the enforced bound 1e8 for q=2")
    sizes = _sizes_or(tree, sizes)
    par = tree.parent.tolist()
    s = sizes.tolist()
    acc = [0] * (n + 1)
    for v in range(n, 1, -1):
        acc[par[v]] += s[v] ** q
    for v in range(2, n + 1):
        acc[v] += (n - s[v]) ** q
    return np.array(acc, dtype=np.int64)


def betweenness_pairs_scores(
    tree: RecursiveTree, sizes: np.ndarray | None = None
) -> np.ndarray:
    """Number of vertex pairs whose path passes through each vertex."""
    sizes = _sizes_or(tree, sizes)
    n = tree.n
    _, csq = _child_aggregates(tree, sizes)
    total_sq = np.array(csq, dtype=np.int64)
    above = (n - sizes).astype(np.int64)
    above[0] = 0
    above[1] = 0
    total_sq += above * above
    out = ((n - 1) ** 2 - total_sq) // 2
    out[0] = 0
    return out


def degree_scores(tree: RecursiveTree) -> np.ndarray:
    n = tree.n
    deg = np.bincount(tree.parent[2:], minlength=n + 1).astype(np.int64)
    if n > 1:
        deg[2:] += 1
    deg[0] = 0
    return deg


def _rank_exact(scores_view: np.ndarray, larger_is_central: bool) -> np.ndarray:
    labels = np.arange(1, scores_view.size + 1)
    key = -scores_view if larger_is_central else scores_view
    return np.lexsort((-labels, key))


def rank_vertices(
    scores: np.ndarray,
    measure: Measure,
    comparator: RumorComparator | None = None,
) -> tuple[np.ndarray, CenterReport]:
    """Rank permutation under pessimistic tie-breaking, plus the center report.

    ``scores`` is indexed by vertex with slot 0 unused.  Rank 1 is the
    most central vertex; ties go to the later-inserted (larger) label.
    Rumor scores are float logs, so near-ties (within
    ``RUMOR_TIE_BAND_PER_VERTEX * n`` in log space) are re-ordered with
    the exact comparator before ranks are assigned.
    """
    n = scores.size - 1
    view = scores[1:]
    order = _rank_exact(view, measure.larger_is_central)

    if measure.tag == "rumor":
        if comparator is None:
            raise ValueError("rumor ranking requires the exact comparator")
        order = _fix_rumor_order(view, order, comparator)
        tied = _rumor_tied_best(view, order, comparator)
    else:
        best = view[order[0]]
        tied = tuple(sorted(int(v) for v in np.nonzero(view == best)[0] + 1))

    rank = np.zeros(n + 1, dtype=np.int64)
    rank[order + 1] = np.arange(1, n + 1)
    report = CenterReport(
        center_index=int(order[0]) + 1,
        root_rank=int(rank[1]),
        tied_center_set=tied,
    )
    return rank, report


def _fix_rumor_order(
    view: np.ndarray, order: np.ndarray, comparator: RumorComparator
) -> np.ndarray:
    """Re-sort runs of near-equal log scores with the exact comparator."""
    n = view.size
    band = RUMOR_TIE_BAND_PER_VERTEX * n
    sorted_vals = view[order]
    close_to_prev = np.empty(n, dtype=bool)
    close_to_prev[0] = False
    if n > 1:
        close_to_prev[1:] = np.diff(sorted_vals) <= band
    if not close_to_prev.any():
        return order

    def cmp(a: int, b: int) -> int:
        c = comparator.compare(a, b)
        if c != 0:
            return c
        return b - a  # equal scores: larger label first

    order = order.copy()
    i = 0
    while i < n:
        j = i + 1
        while j < n and close_to_prev[j]:
            j += 1
        if j - i > 1:
            group = sorted(
                (int(v) + 1 for v in order[i:j]), key=functools.cmp_to_key(cmp)
            )
            order[i:j] = np.array(group) - 1
        i = j
    return order


def _rumor_tied_best(
    view: np.ndarray, order: np.ndarray, comparator: RumorComparator
) -> tuple[int, ...]:
    band = RUMOR_TIE_BAND_PER_VERTEX * view.size
    best = int(order[0]) + 1
    tied = [best]
    best_val = view[order[0]]
    for k in range(1, order.size):
        v = int(order[k]) + 1
        if view[order[k]] - best_val > band:
            break
        if comparator.compare(v, best) == 0:
            tied.append(v)
    return tuple(sorted(tied))


def confidence_set(rank: np.ndarray, k: int) -> np.ndarray:
    """Labels of the k most central vertices (rank <= k), ordered by rank."""
    n = rank.size - 1
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k}")
    labels = np.nonzero(rank[1:] <= k)[0] + 1
    return labels[np.argsort(rank[labels])]


def compute_profile(
    tree: RecursiveTree,
    measure: Measure,
    sizes: np.ndarray | None = None,
) -> CentralityProfile:
    """Scores, ranks, and center report for one measure on one tree."""
    sizes = _sizes_or(tree, sizes)
    comparator = None
    if measure.tag == "rumor":
        scores, comparator = rumor_scores(tree, sizes)
    elif measure.tag == "jordan":
        scores = jordan_scores(tree, sizes)
    elif measure.tag == "closeness":
        scores = closeness_scores(tree, sizes)
    elif measure.tag.startswith("betweenness-q") or measure.tag == "betweenness-sq":
        scores = betweenness_sq_scores(tree, sizes, q=measure.q or 2)
    elif measure.tag == "betweenness-pairs":
        scores = betweenness_pairs_scores(tree, sizes)
    elif measure.tag == "degree":
        scores = degree_scores(tree)
    else:
        raise ValueError(f"unknown measure {measure.tag!r}")
    rank, report = rank_vertices(scores, measure, comparator)
    return CentralityProfile(measure, scores, rank, report, comparator)


def profile_csv(profile: CentralityProfile) -> str:
    """CSV dump with header vertex,score,rank (rumor scores are log values)."""
    lines = ["vertex,score,rank"]
    scores = profile.scores
    rank = profile.rank
    is_float = scores.dtype.kind == "f"
    for v in range(1, scores.size):
        score = f"{scores[v]:.12g}" if is_float else str(int(scores[v]))
        lines.append(f"{v},{score},{int(rank[v])}")
    return "\n".join(lines) + "\n"
