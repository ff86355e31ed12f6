"""Uniform random recursive trees.

A recursive tree on vertices 1..n has parent[v] in {1, ..., v-1} for
every v >= 2; labels are arrival times and vertex 1 is the root.  The
uniform distribution over the (n-1)! such parent arrays is exactly the
law of the growth process that attaches each new vertex to a uniformly
chosen existing vertex.

Trees are immutable after construction.  The parent array is stored
1-indexed (slot 0 is unused, parent[1] == 0) so code reads like the
math.  Sizes and scores elsewhere use 64-bit integers throughout since
n^2 terms appear downstream.
"""

from __future__ import annotations

import itertools
from typing import Iterable, Iterator, Sequence

import numpy as np

from .rng import RngStream


class EdgeListParseError(ValueError):
    """Raised when an edge-list file is malformed; carries the 1-based line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


def _coerce_generator(rng: np.random.Generator | RngStream) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    return rng


class RecursiveTree:
    """Rooted labeled recursive tree with 1-based vertex labels."""

    __slots__ = ("n", "parent", "_children")

    def __init__(self, parents: Sequence[int] | np.ndarray, *, validate: bool = True):
        """Build a tree from the compact parent list (parent of v for v = 2..n).

        An empty sequence gives the single-vertex tree.
        """
        compact = np.asarray(parents, dtype=np.int64)
        if compact.ndim != 1:
            raise ValueError("parents must be one-dimensional")
        n = compact.size + 1
        parent = np.zeros(n + 1, dtype=np.int64)
        parent[2:] = compact
        if validate and n > 1:
            labels = np.arange(2, n + 1)
            bad = np.nonzero((compact < 1) | (compact >= labels))[0]
            if bad.size:
                v = int(labels[bad[0]])
                raise ValueError(
                    f"parent of vertex {v} is {int(compact[bad[0]])}, "
                    f"must be in [1, {v - 1}]"
                )
        parent.setflags(write=False)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "parent", parent)
        object.__setattr__(self, "_children", None)

    def __setattr__(self, name, value):
        raise AttributeError("RecursiveTree is immutable")

    def __eq__(self, other) -> bool:
        return isinstance(other, RecursiveTree) and np.array_equal(
            self.parent, other.parent
        )

    def __hash__(self) -> int:
        return hash(self.parent.tobytes())

    def __repr__(self) -> str:
        return f"RecursiveTree(n={self.n})"

    @property
    def children(self) -> list[np.ndarray]:
        """Children lists indexed by vertex (built lazily, cached)."""
        cached = self._children
        if cached is None:
            order = np.argsort(self.parent[2:], kind="stable") + 2
            sorted_parents = self.parent[order]
            counts = np.bincount(sorted_parents, minlength=self.n + 1)
            bounds = np.concatenate(([0], np.cumsum(counts)))
            cached = [
                order[bounds[v] : bounds[v + 1]] for v in range(self.n + 1)
            ]
            object.__setattr__(self, "_children", cached)
        return cached

    def compact_parents(self) -> np.ndarray:
        return self.parent[2:].copy()


def grow_urrt(n: int, rng: np.random.Generator | RngStream) -> RecursiveTree:
    """Sample a uniform random recursive tree on n vertices.

    Consumes exactly one float64 draw per vertex beyond the root, so the
    result is identical to iterating :func:`grow_step` from the
    single-vertex tree with the same generator.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    gen = _coerce_generator(rng)
    if n == 1:
        return RecursiveTree([])
    u = gen.random(n - 1)
    compact = 1 + (u * np.arange(1, n, dtype=np.float64)).astype(np.int64)
    return RecursiveTree(compact, validate=False)


def grow_step(
    tree: RecursiveTree, rng: np.random.Generator | RngStream
) -> RecursiveTree:
    """Attach one new vertex to a uniformly chosen existing vertex."""
    gen = _coerce_generator(rng)
    target = 1 + int(gen.random() * tree.n)
    compact = np.empty(tree.n, dtype=np.int64)
    compact[: tree.n - 1] = tree.parent[2:]
    compact[tree.n - 1] = target
    return RecursiveTree(compact, validate=False)


def subtree_sizes(tree: RecursiveTree) -> np.ndarray:
    """Subtree size of every vertex (rooted at 1), one reverse pass.

    Returns an int64 array of length n+1; slot 0 is 0.
    """
    n = tree.n
    par = tree.parent.tolist()
    size = [1] * (n + 1)
    size[0] = 0
    for v in range(n, 1, -1):
        size[par[v]] += size[v]
    return np.array(size, dtype=np.int64)


def serialize_tree(tree: RecursiveTree) -> str:
    """Edge-list text: first line n, then '<v> <parent>' for v = 2..n."""
    lines = [str(tree.n)]
    par = tree.parent
    lines.extend(f"{v} {par[v]}" for v in range(2, tree.n + 1))
    return "\n".join(lines) + "\n"


def parse_edge_list(text: str) -> RecursiveTree:
    """Inverse of :func:`serialize_tree`; errors name the offending line."""
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise EdgeListParseError(1, "empty input, expected vertex count")
    try:
        n = int(lines[0].strip())
    except ValueError:
        raise EdgeListParseError(1, f"expected vertex count, got {lines[0]!r}") from None
    if n < 1:
        raise EdgeListParseError(1, f"vertex count must be >= 1, got {n}")
    if len(lines) < n:
        raise EdgeListParseError(
            len(lines) + 1, f"expected {n - 1} edge lines for n={n}, got {len(lines) - 1}"
        )
    if len(lines) > n:
        raise EdgeListParseError(n + 1, f"unexpected extra line after {n - 1} edges")
    compact = np.zeros(max(n - 1, 0), dtype=np.int64)
    for i, raw in enumerate(lines[1:], start=2):
        parts = raw.split()
        if len(parts) != 2:
            raise EdgeListParseError(i, f"expected '<v> <parent>', got {raw!r}")
        try:
            v, p = int(parts[0]), int(parts[1])
        except ValueError:
            raise EdgeListParseError(i, f"non-integer field in {raw!r}") from None
        if v != i:
            raise EdgeListParseError(i, f"expected vertex {i} (ascending order), got {v}")
        if not 1 <= p < v:
            raise EdgeListParseError(i, f"parent {p} of vertex {v} not in [1, {v - 1}]")
        compact[i - 2] = p
    return RecursiveTree(compact, validate=False)


def write_edge_list(tree: RecursiveTree, path) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(serialize_tree(tree))


def read_edge_list(path) -> RecursiveTree:
    with open(path, "r") as fh:
        return parse_edge_list(fh.read())


def enumerate_recursive_trees(n: int) -> Iterator[RecursiveTree]:
    """Yield all (n-1)! recursive trees on n vertices."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if n == 1:
        yield RecursiveTree([])
        return
    for compact in itertools.product(*(range(1, v) for v in range(2, n + 1))):
        yield RecursiveTree(compact, validate=False)


def num_recursive_trees(n: int) -> int:
    out = 1
    for v in range(2, n + 1):
        out *= v - 1
    return out


def tree_index(tree: RecursiveTree) -> int:
    """Mixed-radix rank of the tree among all trees on n vertices.

    Bijection onto [0, (n-1)!), matching enumeration order of
    :func:`enumerate_recursive_trees`.
    """
    idx = 0
    par = tree.parent
    for v in range(2, tree.n + 1):
        idx = idx * (v - 1) + (int(par[v]) - 1)
    return idx
