"""Urn processes and the Dickman-type limit law of the largest subtree.

Three related samplers live here:

* Polya urn with reinforcement 1, started from (a, 1) balls.  The
  x-fraction converges to Beta(a, 1); the diagonal-hit helper estimates
  the probability that the x-fraction ever drops below a threshold,
  truncated at a finite horizon (so it is a lower bound of the
  infinite-horizon event; the horizon is always explicit).
* Hoppe urn: one black ball of weight 1; drawing black founds a new
  color, drawing a colored ball duplicates it.  Tracks the leading
  color (ties to the earliest-born color) and every time it changes.
* Exact sampler for D = max(U1, (1-U1)U2, (1-U1)(1-U2)U3, ...): the
  running product bounds every future term, so the first time it drops
  below the current maximum the draw can stop, having produced an exact
  sample.  This is the limit law of the largest root-subtree fraction.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .tree import RecursiveTree, subtree_sizes

_DIAGONAL_DP_MAX_HORIZON = 500


@dataclass
class PolyaState:
    x: int
    y: int
    t: int


def polya_step(state: PolyaState, rng: np.random.Generator) -> PolyaState:
    """One reinforcement step: add an x ball with probability x/(x+y)."""
    tot = state.x + state.y
    if rng.random() * tot < state.x:
        return PolyaState(state.x + 1, state.y, state.t + 1)
    return PolyaState(state.x, state.y + 1, state.t + 1)


def polya_run(
    a: int,
    steps: int,
    rng: np.random.Generator,
    record_every: int = 1,
) -> np.ndarray:
    """Run a (a, 1)-started urn; rows of (t, x, y) at the recorded times.

    Always records t = 0 and the final step.
    """
    if a < 1:
        raise ValueError("a must be >= 1")
    if record_every < 1:
        raise ValueError("record_every must be >= 1")
    x, y = a, 1
    rows = [(0, x, y)]
    u = rng.random(steps)
    for t in range(steps):
        if u[t] * (x + y) < x:
            x += 1
        else:
            y += 1
        if (t + 1) % record_every == 0 or t + 1 == steps:
            rows.append((t + 1, x, y))
    return np.array(rows, dtype=np.int64)


def polya_final_counts(
    a: int,
    steps: int,
    gens: Sequence[np.random.Generator],
    time_block: int = 20_000,
) -> np.ndarray:
    """Final x-ball counts for many replicates, one generator each.

    Vectorizes over replicates while each replicate consumes exactly one
    uniform per step from its own stream (same draws as single runs).
    """
    reps = len(gens)
    x = np.full(reps, a, dtype=np.int64)
    done = 0
    while done < steps:
        blk = min(time_block, steps - done)
        u = np.stack([g.random(blk) for g in gens])
        for j in range(blk):
            tot = a + 1 + done + j
            x += u[:, j] * tot < x
        done += blk
    return x


def polya_diagonal_hits(
    a: int,
    threshold: float,
    horizon: int,
    gens: Sequence[np.random.Generator],
    time_block: int = 20_000,
) -> np.ndarray:
    """Whether each replicate's x-fraction drops below ``threshold`` by the horizon.

    The returned booleans witness the event x/(a+1+t) < threshold for
    some t <= horizon; the true (infinite-horizon) probability is at
    least the mean of this array.
    """
    reps = len(gens)
    x = np.full(reps, a, dtype=np.int64)
    hit = x < threshold * (a + 1)
    done = 0
    while done < horizon:
        blk = min(time_block, horizon - done)
        u = np.stack([g.random(blk) for g in gens])
        for j in range(blk):
            tot = a + 1 + done + j
            x += u[:, j] * tot < x
            hit |= x < threshold * (tot + 1)
        done += blk
    return hit


def polya_diagonal_hit_exact(a: int, threshold: float, horizon: int) -> float:
    """Exact P(x-fraction drops below threshold by the horizon), by recursion.

    Dynamic program over (x count, time); practical for small horizons
    only (guarded at 500).
    """
    if horizon > _DIAGONAL_DP_MAX_HORIZON:
        raise ValueError(f"exact recursion limited to horizon <= {_DIAGONAL_DP_MAX_HORIZON}")

    @lru_cache(maxsize=None)
    def rec(x_count: int, t: int) -> float:
        if x_count < threshold * (a + 1 + t):
            return 1.0
        if t == horizon:
            return 0.0
        tot = a + 1 + t
        p = x_count / tot
        return p * rec(x_count + 1, t + 1) + (1.0 - p) * rec(x_count, t + 1)

    return rec(a, 0)


@dataclass
class HoppeRun:
    """Trajectory of one Hoppe urn run.

    Arrays are indexed by time 0..steps.  ``leader`` is the color id of
    the current argmax (earliest-born wins ties), 0 before any color
    exists.  ``change_times`` lists every step at which the argmax
    changed, including its first establishment at t = 1.
    """

    steps: int
    num_colors: np.ndarray
    leader: np.ndarray
    leader_count: np.ndarray
    change_times: np.ndarray
    final_counts: np.ndarray


def hoppe_run(steps: int, rng: np.random.Generator) -> HoppeRun:
    """Run a Hoppe urn for ``steps`` draws, tracking the leading color."""
    if steps < 0:
        raise ValueError("steps must be >= 0")
    num_colors = np.zeros(steps + 1, dtype=np.int64)
    leader_arr = np.zeros(steps + 1, dtype=np.int64)
    leader_count_arr = np.zeros(steps + 1, dtype=np.int64)
    changes: list[int] = []
    if steps == 0:
        return HoppeRun(0, num_colors, leader_arr, leader_count_arr,
                        np.array([], dtype=np.int64), np.array([0], dtype=np.int64))

    u = rng.random(steps)
    # Ball drawn at step i is uniform over {black} + the i-1 colored balls.
    targets = (u * np.arange(1, steps + 1)).astype(np.int64).tolist()

    col = [0] * (steps + 1)  # color of the ball added at each step
    counts = [0]             # counts[c] for color c; slot 0 unused
    leader = 0
    lead_count = 0
    ncolors = 0
    nc_out = num_colors
    ld_out = leader_arr
    lc_out = leader_count_arr
    for i in range(1, steps + 1):
        k = targets[i - 1]
        if k == 0:
            ncolors += 1
            counts.append(1)
            c = ncolors
            col[i] = c
            if leader == 0:
                leader = c
                lead_count = 1
                changes.append(i)
        else:
            c = col[k]
            col[i] = c
            cc = counts[c] + 1
            counts[c] = cc
            if c != leader and (cc > lead_count or (cc == lead_count and c < leader)):
                leader = c
                lead_count = cc
                changes.append(i)
            elif c == leader:
                lead_count = cc
        nc_out[i] = ncolors
        ld_out[i] = leader
        lc_out[i] = lead_count
    return HoppeRun(
        steps,
        num_colors,
        leader_arr,
        leader_count_arr,
        np.array(changes, dtype=np.int64),
        np.array(counts, dtype=np.int64),
    )


def sample_dickman(rng: np.random.Generator) -> float:
    """One exact draw of D = max of the stick-breaking sequence.

    Stops as soon as the remaining product is below the running max;
    every term after that point is provably smaller, so the returned
    value is the max of the entire infinite sequence.
    """
    m = 0.0
    r = 1.0
    while r >= m:
        u = rng.random()
        term = r * u
        if term > m:
            m = term
        r *= 1.0 - u
    return m


def sample_dickman_many(rng: np.random.Generator, size: int) -> np.ndarray:
    """``size`` exact draws, value-identical to repeated scalar calls.

    Uniforms are consumed in the same order as ``sample_dickman`` would
    consume them (buffered in blocks purely for speed).
    """
    if size < 0:
        raise ValueError("size must be >= 0")
    out = np.empty(size, dtype=np.float64)
    buf = rng.random(max(4 * size, 64))
    pos = 0
    limit = buf.size
    blist = buf.tolist()
    for i in range(size):
        m = 0.0
        r = 1.0
        while r >= m:
            if pos == limit:
                buf = rng.random(max(size, 1024))
                blist = buf.tolist()
                limit = buf.size
                pos = 0
            u = blist[pos]
            pos += 1
            term = r * u
            if term > m:
                m = term
            r *= 1.0 - u
        out[i] = m
    return out


def max_subtree_fraction(
    tree: RecursiveTree, sizes: np.ndarray | None = None
) -> float:
    """Largest root-subtree size divided by n (needs n >= 2)."""
    if tree.n < 2:
        raise ValueError("max_subtree_fraction needs n >= 2")
    if sizes is None:
        sizes = subtree_sizes(tree)
    root_children = tree.parent[2:] == 1
    return float(np.max(sizes[2:][root_children])) / tree.n
