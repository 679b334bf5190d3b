"""Exponential-time ground truth for small colored graphs.

Nothing here shares code with the matroid intersection path except the
restricted component count, so the two can be compared against each other.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from .hitting import DisjointSets, kappa_restricted
from .intersection import GroundElement, TreeCertificate, max_rainbow_forest
from .process import ProcessTrace

MAX_COLORS = 20
# k * m for K_8 with three colors per edge
MAX_GROUND = 84


class OracleRefused(ValueError):
    """Instance exceeds the oracle's resource guard."""


@dataclass(frozen=True)
class OracleReport:
    exists: bool
    worst_I: tuple[int, ...]
    minmax_value: int


def edmonds_bruteforce(trace: ProcessTrace, m: int | None = None) -> OracleReport:
    """Evaluate the component bound for every color subset.

    ``minmax_value`` is ``min_I (n - kappa(G_I)) + #{colors outside I that
    occur}``, the largest rainbow forest size.  ``worst_I`` minimizes
    ``n - kappa(G_I) - |I|``, ties going to smaller then lexicographically
    smaller sets.
    """
    m = len(trace) if m is None else m
    n, w = trace.n, trace.w_size
    if w > MAX_COLORS:
        raise OracleRefused(f"w_size={w} exceeds {MAX_COLORS}")
    occurring = set(trace.colors[:m].ravel().tolist())
    best_value = None
    worst: tuple[int, int, tuple[int, ...]] | None = None
    for size in range(w + 1):
        for I in combinations(range(w), size):
            kappa = kappa_restricted(trace, m, I)
            outside = sum(1 for c in occurring if c not in I)
            value = n - kappa + outside
            if best_value is None or value < best_value:
                best_value = value
            key = (n - kappa - size, size, I)
            if worst is None or key < worst:
                worst = key
    assert best_value is not None and worst is not None
    return OracleReport(best_value >= n - 1, worst[2], best_value)


def backtrack_rainbow_tree(trace: ProcessTrace, m: int | None = None) -> TreeCertificate | None:
    """Depth-first search for a rainbow spanning tree.

    The tree is grown from vertex 0: some tree element must leave the
    current component of vertex 0, so branch on which crossing element is
    the first one used, excluding the earlier ones in that branch.
    """
    m = len(trace) if m is None else m
    n, k = trace.n, trace.k
    if k * m > MAX_GROUND:
        raise OracleRefused(f"k*m={k * m} exceeds {MAX_GROUND}")
    elems = [
        (i + 1, c, int(trace.u[i]), int(trace.v[i]))
        for i in range(m)
        for c in trace.colors[i].tolist()
    ]

    def feasible(chosen: list[int], excluded: set[int], used: set[int]) -> bool:
        need = n - 1 - len(chosen)
        free = [j for j in range(len(elems)) if j not in excluded and elems[j][1] not in used]
        if len({elems[j][1] for j in free}) < need:
            return False
        dsu = DisjointSets(n)
        for j in chosen:
            dsu.union(elems[j][2], elems[j][3])
        for j in free:
            dsu.union(elems[j][2], elems[j][3])
        return dsu.component_count == 1

    def search(chosen: list[int], excluded: set[int]) -> list[int] | None:
        if len(chosen) == n - 1:
            return chosen
        used = {elems[j][1] for j in chosen}
        if not feasible(chosen, excluded, used):
            return None
        dsu = DisjointSets(n)
        for j in chosen:
            dsu.union(elems[j][2], elems[j][3])
        root = dsu.find(0)
        crossing = [
            j
            for j in range(len(elems))
            if j not in excluded
            and elems[j][1] not in used
            and (dsu.find(elems[j][2]) == root) != (dsu.find(elems[j][3]) == root)
        ]
        skipped = set(excluded)
        for j in crossing:
            found = search(chosen + [j], skipped)
            if found is not None:
                return found
            skipped = skipped | {j}
        return None

    found = search([], set())
    if found is None:
        return None
    return TreeCertificate(
        tuple(sorted(GroundElement(elems[j][0], elems[j][1]) for j in found))
    )


@dataclass(frozen=True)
class Comparison:
    n: int
    k: int
    m: int
    mi_size: int
    minmax_value: int
    edmonds_exists: bool
    backtrack_exists: bool

    @property
    def mi_exists(self) -> bool:
        return self.mi_size == self.n - 1

    @property
    def agree(self) -> bool:
        return (
            self.mi_exists == self.edmonds_exists == self.backtrack_exists
            and self.mi_size == self.minmax_value
        )


def compare(trace: ProcessTrace, m: int | None = None) -> Comparison:
    m = len(trace) if m is None else m
    report = edmonds_bruteforce(trace, m)
    tree = backtrack_rainbow_tree(trace, m)
    size = max_rainbow_forest(trace, m).size
    return Comparison(trace.n, trace.k, m, size, report.minmax_value, report.exists, tree is not None)


def _complete_graph_edges(n: int, special: dict[tuple[int, int], tuple[int, ...]],
                          filler: list[tuple[int, ...]]) -> list[tuple[int, int, tuple[int, ...]]]:
    edges = [(a, b, cs) for (a, b), cs in special.items()]
    rest = [(a, b) for a in range(n) for b in range(a + 1, n) if (a, b) not in special]
    edges += [(a, b, filler[i % len(filler)]) for i, (a, b) in enumerate(rest)]
    return edges


def structured_fixtures() -> list[tuple[str, ProcessTrace, OracleReport]]:
    """Hand-built instances whose obstruction is one of the smallest bad color sets.

    Each lists the special edges first and fills the rest of K_n with colors
    outside the bad set, so the bad set's restricted graph is exactly the
    named structure plus isolated vertices.
    """
    fixtures = []

    def add(name, n, special, filler, report):
        edges = _complete_graph_edges(n, special, filler)
        fixtures.append((name, ProcessTrace.from_edges(n, 2, edges), report))

    add("double-edge", 5, {(0, 1): (0, 1)}, [(2, 3)], OracleReport(False, (0, 1), 3))
    add(
        "triangle",
        6,
        {(0, 1): (0, 3), (1, 2): (1, 3), (0, 2): (2, 4)},
        [(3, 4)],
        OracleReport(False, (0, 1, 2), 4),
    )
    add(
        "double-triangle",
        6,
        {(0, 1): (0, 1), (1, 2): (1, 2), (0, 2): (0, 2)},
        [(3, 4)],
        OracleReport(False, (0, 1, 2), 4),
    )
    add(
        "double-2-path",
        6,
        {(0, 1): (0, 1), (1, 2): (1, 2)},
        [(3, 4)],
        OracleReport(False, (0, 1, 2), 4),
    )
    add(
        "two-double-edges",
        7,
        {(0, 1): (0, 1), (2, 3): (1, 2)},
        [(3, 4), (3, 5), (4, 5)],
        OracleReport(False, (0, 1, 2), 5),
    )
    rainbow_path = [(i, i + 1, (i,)) for i in range(4)]
    fixtures.append(
        ("rainbow-path", ProcessTrace.from_edges(5, 1, rainbow_path), OracleReport(True, (), 4))
    )
    return fixtures
