"""Connectivity, color coverage and restricted component counts along a trace."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .process import ProcessTrace


class NotReachedError(RuntimeError):
    """The trace ended before the graph became connected."""

    def __init__(self, components: int, length: int) -> None:
        super().__init__(f"still {components} components after {length} edges")
        self.components = components
        self.length = length


class DisjointSets:
    """Union-find over ``0..n-1`` with union by rank and path compression.

    On equal ranks the root of the second argument is attached under the
    root of the first, so the internal state is a function of the call
    sequence alone.
    """

    __slots__ = ("parent", "rank", "component_count")

    def __init__(self, n: int) -> None:
        self.parent = list(range(n))
        self.rank = [0] * n
        self.component_count = n

    def find(self, x: int) -> int:
        parent = self.parent
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(self, a: int, b: int) -> bool:
        """Merge the sets of ``a`` and ``b``; False if they were already one."""
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        rank = self.rank
        if rank[ra] < rank[rb]:
            ra, rb = rb, ra
        elif rank[ra] == rank[rb]:
            rank[ra] += 1
        self.parent[rb] = ra
        self.component_count -= 1
        return True

    def connected(self, a: int, b: int) -> bool:
        return self.find(a) == self.find(b)


class CoverageTracker:
    def __init__(self, w_size: int) -> None:
        self.seen = bytearray(w_size)
        self.unseen_count = w_size

    def add(self, colors: Iterable[int]) -> int:
        """Mark colors as seen and return how many remain unseen."""
        seen = self.seen
        for c in colors:
            if not seen[c]:
                seen[c] = 1
                self.unseen_count -= 1
        return self.unseen_count

    @property
    def complete(self) -> bool:
        return self.unseen_count == 0


@dataclass(frozen=True)
class HittingTimes:
    """Hitting times of connectivity, full coverage and a rainbow spanning tree.

    ``None`` marks an event that never happened within ``length`` steps.
    """

    m_C: int
    m_N: int | None
    m_R: int | None
    length: int

    def as_record(self) -> dict:
        return {"m_C": self.m_C, "m_N": self.m_N, "m_R": self.m_R, "length": self.length}

    @classmethod
    def from_record(cls, rec: dict) -> HittingTimes:
        return cls(rec["m_C"], rec["m_N"], rec["m_R"], rec["length"])


def connect_time_of_edges(n: int, us: np.ndarray, vs: np.ndarray, start: int = 0,
                          dsu: DisjointSets | None = None) -> tuple[int | None, DisjointSets]:
    """Feed edges ``start..`` into ``dsu``; return the 1-based step at which it
    becomes connected (None if never) together with the union-find."""
    if dsu is None:
        dsu = DisjointSets(n)
    if dsu.component_count == 1:
        return start, dsu
    union = dsu.union
    for i, (a, b) in enumerate(zip(us[start:].tolist(), vs[start:].tolist()), start=start + 1):
        if union(a, b) and dsu.component_count == 1:
            return i, dsu
    return None, dsu


def first_connect_time(trace: ProcessTrace) -> int:
    """Least m such that the first m edges connect all n vertices."""
    t, dsu = connect_time_of_edges(trace.n, trace.u, trace.v)
    if t is None:
        raise NotReachedError(dsu.component_count, len(trace))
    return t


def coverage_time_of_colors(colors: np.ndarray, w_size: int) -> int | None:
    """1-based row at which every color has appeared, or None."""
    if w_size == 0:
        return 0
    flat = colors.ravel()
    if flat.size == 0:
        return None
    values, first = np.unique(flat, return_index=True)
    if len(values) < w_size:
        return None
    return int(first.max()) // colors.shape[1] + 1


def first_all_colors_time(trace: ProcessTrace) -> int | None:
    """Least m such that every color occurs among the first m edges, else None."""
    return coverage_time_of_colors(trace.colors, trace.w_size)


def restricted_mask(colors: np.ndarray, I: Iterable[int], w_size: int) -> np.ndarray:
    chosen = np.zeros(w_size, dtype=bool)
    for c in I:
        if not 0 <= c < w_size:
            raise ValueError(f"color {c} outside [0, {w_size})")
        chosen[c] = True
    if colors.size == 0:
        return np.zeros(len(colors), dtype=bool)
    return chosen[colors].any(axis=1)


def kappa_restricted(trace: ProcessTrace, m: int, I: Iterable[int]) -> int:
    """Component count, isolated vertices included, of the first ``m`` edges
    that carry at least one color of ``I``."""
    if not 0 <= m <= len(trace):
        raise ValueError(f"m={m} outside [0, {len(trace)}]")
    mask = restricted_mask(trace.colors[:m], I, trace.w_size)
    dsu = DisjointSets(trace.n)
    for a, b in zip(trace.u[:m][mask].tolist(), trace.v[:m][mask].tolist()):
        dsu.union(a, b)
    return dsu.component_count
