"""Growth trajectories with online center and root-rank tracking.

A fixed-size sweep answers "what does the profile look like at size n";
this module answers "how does it evolve along one growth history".  A
trajectory grows a tree one attachment at a time up to a horizon N and
watches two statistics per centrality measure: the center index I_m and
the root rank R_m.

Tracking everything per step would cost O(n) per insertion, so the work
is split by what each statistic needs:

* Center indices for the subtree-based measures coincide with the
  centroid set, which moves by at most one edge per insertion.  The
  centroid, its heaviest child, and the degree leader are maintained in
  O(depth) per step, giving exact per-step change times for I_m.
* Root ranks (and the betweenness index) are evaluated at checkpoints,
  every ``stride`` steps, by walking only the relevant neighborhood:
  vertices at least as central as the root form a small connected region
  around the centroid, so each evaluation touches O(R_m) vertices, not
  O(m).

All scores here are relative; none of the evaluators recompute a full
profile.  Agreement with :mod:`rootrank.centrality` at every step is
enforced by tests on small horizons.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import isqrt as _ISQRT, log as _LOG

import numpy as np

from .rng import RngStream

__all__ = [
    "PERSISTENCE_MEASURES",
    "TrajectoryResult",
    "default_stride",
    "checkpoint_grid",
    "run_trajectory",
]

PERSISTENCE_MEASURES = ("jordan", "closeness", "rumor", "betweenness", "degree")

# Rumor scores are compared through root-relative log differences; gaps
# inside this band are settled with exact integer path products.
_RUMOR_TOL = 1e-9

_CENTROID_GROUP = ("jordan", "closeness", "rumor")


def default_stride(horizon: int) -> int:
    """Checkpoint stride: every step on small runs, every 16 beyond 1e4."""
    return 1 if horizon <= 10_000 else 16


def checkpoint_grid(horizon: int, stride: int) -> np.ndarray:
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    if stride < 1 or horizon % stride != 0:
        raise ValueError("stride must be >= 1 and divide the horizon")
    return np.arange(stride, horizon + 1, stride, dtype=np.int64)


@dataclass
class TrajectoryResult:
    """Tracked statistics for one growth history.

    ``last_change_index`` and ``last_change_rank`` hold, per measure, the
    largest tree size m at which the statistic differed from its previous
    observation (0 when it never changed).  Index changes are exact
    per-step times except for betweenness, whose index is only observed
    at checkpoints; rank changes are at checkpoint granularity.
    ``changed_*`` flags whether that last change falls in the final-window
    (horizon/2, horizon].  ``series`` retains the full checkpoint table
    (rows aligned with ``checkpoints``) when requested, else None.
    """

    replicate: int
    horizon: int
    stride: int
    checkpoints: np.ndarray
    last_change_index: dict[str, int]
    last_change_rank: dict[str, int]
    changed_index: dict[str, bool]
    changed_rank: dict[str, bool]
    series: dict[str, dict[str, np.ndarray]] | None = None


def _exact_phi_sign(parent: list[int], size: list[int], m: int, a: int, b: int) -> int:
    """Exact sign of log(phi(a)) - log(phi(b)) via integer path products."""
    num_a = den_a = num_b = den_b = 1
    w = a
    while w != 1:
        s = size[w]
        num_a *= m - s
        den_a *= s
        w = parent[w]
    w = b
    while w != 1:
        s = size[w]
        num_b *= m - s
        den_b *= s
        w = parent[w]
    lhs = num_a * den_b
    rhs = num_b * den_a
    return (lhs > rhs) - (lhs < rhs)


class _Trajectory:
    """Mutable growth state; one instance per trajectory."""

    __slots__ = (
        "m",
        "parent",
        "size",
        "childsq",
        "children",
        "deg",
        "hist",
        "centroid",
        "heavy_child",
        "heavy_size",
        "best_deg",
        "best_deg_label",
    )

    def __init__(self, horizon: int):
        cap = horizon + 1
        self.m = 1
        self.parent = [0] * cap
        self.size = [0] * cap
        self.size[1] = 1
        self.childsq = [0] * cap
        self.children: list[list[int]] = [[] for _ in range(cap)]
        self.deg = [0] * cap
        self.hist = [1]  # degree histogram over live vertices
        self.centroid = 1
        self.heavy_child = 0
        self.heavy_size = 0
        self.best_deg = 0
        self.best_deg_label = 1

    def _rescan_heavy(self) -> None:
        size = self.size
        hc = 0
        hs = 0
        for ch in self.children[self.centroid]:
            s = size[ch]
            if s > hs:
                hs = s
                hc = ch
        self.heavy_child = hc
        self.heavy_size = hs

    def step(self, target: int) -> None:
        """Attach a new vertex to ``target`` and update all tracked state."""
        size = self.size
        parent = self.parent
        childsq = self.childsq
        deg = self.deg
        hist = self.hist
        new = self.m + 1

        parent[new] = target
        size[new] = 1
        self.children[target].append(new)
        childsq[target] += 1

        if len(hist) < 2:
            hist.append(0)
        hist[1] += 1
        d = deg[target]
        hist[d] -= 1
        d += 1
        deg[target] = d
        if d == len(hist):
            hist.append(0)
        hist[d] += 1
        deg[new] = 1

        # Degrees only ever grow, so the lexicographic (degree, label)
        # leader can only be displaced by a vertex that just incremented.
        if d > self.best_deg or (d == self.best_deg and target > self.best_deg_label):
            self.best_deg = d
            self.best_deg_label = target
        if self.best_deg == 1 and new > self.best_deg_label:
            self.best_deg_label = new

        c = self.centroid
        path_child = 0
        prev = new
        w = target
        while w:
            if w == c:
                path_child = prev
            s = size[w] + 1
            size[w] = s
            p = parent[w]
            if p:
                childsq[p] += s + s - 1
            prev = w
            w = p
        m = new
        self.m = m

        if path_child:
            s = size[path_child]
            if path_child == self.heavy_child:
                self.heavy_size = s
            elif s > self.heavy_size:
                self.heavy_child = path_child
                self.heavy_size = s

        while True:
            if 2 * self.heavy_size > m:
                self.centroid = self.heavy_child
                self._rescan_heavy()
                continue
            c = self.centroid
            if c != 1 and 2 * (m - size[c]) > m:
                self.centroid = parent[c]
                self._rescan_heavy()
                continue
            break

    def centroid_index(self) -> int:
        """Center index shared by the subtree-based measures."""
        m = self.m
        c = self.centroid
        if 2 * self.heavy_size == m:
            return max(c, self.heavy_child)
        if c != 1 and 2 * (m - self.size[c]) == m:
            return c  # parent is the tied twin and always has a smaller label
        return c

    # -- checkpoint evaluators -------------------------------------------

    def jordan_rank(self) -> int:
        """Count v with max(m - size(v), max child size) <= psi(root).

        Vertices with size(v) >= m - psi(root) form an up-closed cone
        around the root; only inside it can the complement component stay
        small enough, so the walk prunes everything else.
        """
        m = self.m
        size = self.size
        children = self.children
        psi_root = 0
        for ch in children[1]:
            s = size[ch]
            if s > psi_root:
                psi_root = s
        s_min = m - psi_root
        count = 0
        stack = [1]
        while stack:
            v = stack.pop()
            ok = True
            for ch in children[v]:
                s = size[ch]
                if s >= s_min:
                    stack.append(ch)
                if s > psi_root:
                    ok = False
            if ok:
                count += 1
        return count

    def _root_ball_rank(self) -> tuple[int, int]:
        """(closeness rank, rumor rank) via one ball walk from the centroid.

        Both scores increase weakly along any path leaving the centroid,
        so every vertex at least as central as the root lies inside the
        region where the running diff stays at or below the root's diff.
        """
        m = self.m
        size = self.size
        parent = self.parent
        children = self.children
        c = self.centroid

        droot_c = 0
        droot_r = 0.0
        w = c
        while w != 1:
            s = size[w]
            droot_c += 2 * s - m
            droot_r += _LOG(s) - _LOG(m - s)
            w = parent[w]

        tol = _RUMOR_TOL
        count_c = 0
        count_r = 0
        pending: list[int] = []
        # (vertex, came_from, closeness diff, rumor log diff, c in ball, r in ball)
        stack = [(c, 0, 0, 0.0, True, True)]
        while stack:
            v, src, dc, dr, in_c, in_r = stack.pop()
            if in_c:
                count_c += 1
            if in_r:
                count_r += 1
            for w in children[v]:
                if w == src:
                    continue
                s = size[w]
                ndc = dc + (m - 2 * s)
                ndr = dr + _LOG(m - s) - _LOG(s)
                nin_c = in_c and ndc <= droot_c
                nin_r = in_r and ndr <= droot_r + tol
                if nin_c or nin_r:
                    if nin_r and ndr >= droot_r - tol:
                        pending.append(w)
                        nin_r = False
                    stack.append((w, v, ndc, ndr, nin_c, nin_r))
            p = parent[v]
            if p and p != src:
                s = size[v]
                ndc = dc + (2 * s - m)
                ndr = dr + _LOG(s) - _LOG(m - s)
                nin_c = in_c and ndc <= droot_c
                nin_r = in_r and ndr <= droot_r + tol
                if nin_c or nin_r:
                    if nin_r and ndr >= droot_r - tol:
                        pending.append(p)
                        nin_r = False
                    stack.append((p, v, ndc, ndr, nin_c, nin_r))
        for v in pending:
            if _exact_phi_sign(parent, size, m, v, 1) <= 0:
                count_r += 1
        return count_c, count_r

    def betweenness_stats(self) -> tuple[int, int]:
        """(rank, index): exhaustive over the small candidate cone.

        Any v with score <= score(root) satisfies (m - size(v))^2 <=
        childsq(root), so candidates form an up-closed set reachable from
        the root by descending while sizes stay large enough.
        """
        m = self.m
        size = self.size
        childsq = self.childsq
        children = self.children
        root_score = childsq[1]
        s_min = m - _ISQRT(root_score)
        rank = 0
        best_score = root_score
        best_label = 1
        stack = [1]
        while stack:
            v = stack.pop()
            score = childsq[v] if v == 1 else childsq[v] + (m - size[v]) ** 2
            if score <= root_score:
                rank += 1
            if score < best_score or (score == best_score and v > best_label):
                best_score = score
                best_label = v
            for ch in children[v]:
                if size[ch] >= s_min:
                    stack.append(ch)
        return rank, best_label

    def degree_rank(self) -> int:
        hist = self.hist
        return sum(hist[self.deg[1] :])


def run_trajectory(
    horizon: int,
    rng: RngStream,
    stride: int | None = None,
    keep_series: bool = False,
    replicate: int = 0,
) -> TrajectoryResult:
    """Grow one trajectory to ``horizon`` and track I_m and R_m.

    Attachment draws replay ``grow_urrt`` on the same stream, so the tree
    at the horizon matches the fixed-size generator replicate for
    replicate.  ``stride`` must divide the horizon.
    """
    if stride is None:
        stride = default_stride(horizon)
    grid = checkpoint_grid(horizon, stride)

    gen = rng.generator()
    if horizon > 1:
        u = gen.random(horizon - 1)
        targets = 1 + (u * np.arange(1, horizon, dtype=np.float64)).astype(np.int64)
        targets = targets.tolist()
    else:
        targets = []

    traj = _Trajectory(horizon)
    measures = PERSISTENCE_MEASURES

    last_idx = {t: 0 for t in measures}
    last_rank = {t: 0 for t in measures}
    prev_center = 1
    prev_deg_label = 1
    prev_rank: dict[str, int] = {}
    prev_b_index = 0

    n_checks = len(grid)
    series_rank = {t: np.zeros(n_checks, dtype=np.int64) for t in measures}
    series_index = {t: np.zeros(n_checks, dtype=np.int64) for t in measures}
    check_pos = 0

    def observe_checkpoint() -> None:
        nonlocal check_pos, prev_b_index
        m = traj.m
        rank_c, rank_r = traj._root_ball_rank()
        rank_b, index_b = traj.betweenness_stats()
        ranks = {
            "jordan": traj.jordan_rank(),
            "closeness": rank_c,
            "rumor": rank_r,
            "betweenness": rank_b,
            "degree": traj.degree_rank(),
        }
        center = traj.centroid_index()
        for t in measures:
            r = ranks[t]
            if t in prev_rank and r != prev_rank[t]:
                last_rank[t] = m
            prev_rank[t] = r
            series_rank[t][check_pos] = r
            series_index[t][check_pos] = center
        series_index["degree"][check_pos] = traj.best_deg_label
        series_index["betweenness"][check_pos] = index_b
        if prev_b_index and index_b != prev_b_index:
            last_idx["betweenness"] = m
        prev_b_index = index_b
        check_pos += 1

    if grid[0] == 1:
        observe_checkpoint()
    for i, target in enumerate(targets):
        traj.step(target)
        m = i + 2
        center = traj.centroid_index()
        if center != prev_center:
            for t in _CENTROID_GROUP:
                last_idx[t] = m
            prev_center = center
        if traj.best_deg_label != prev_deg_label:
            last_idx["degree"] = m
            prev_deg_label = traj.best_deg_label
        if m % stride == 0:
            observe_checkpoint()

    half = horizon // 2
    return TrajectoryResult(
        replicate=replicate,
        horizon=horizon,
        stride=stride,
        checkpoints=grid,
        last_change_index={t: last_idx[t] for t in measures},
        last_change_rank={t: last_rank[t] for t in measures},
        changed_index={t: last_idx[t] > half for t in measures},
        changed_rank={t: last_rank[t] > half for t in measures},
        series={"rank": series_rank, "index": series_index} if keep_series else None,
    )
