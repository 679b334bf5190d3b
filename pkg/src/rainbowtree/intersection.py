"""Rainbow spanning trees via intersection of the cycle and color matroids.

Every physical edge ``e_i`` with color set ``S`` contributes ``k`` parallel
ground elements ``(i, c)``, ``c in S``.  A set of ground elements is
independent in the cycle matroid when its edges form a forest (two parallel
elements close a 2-cycle) and independent in the partition matroid when no
color repeats.  A rainbow spanning tree is a common independent set of size
``n - 1``.

Augmentation works on the exchange graph of the current common independent
set ``S``:

* an element ``z`` outside ``S`` points to the selected element of its own
  color (swapping them keeps colors distinct),
* a selected element ``y`` points to every outside ``z`` whose fundamental
  cycle in the forest passes through ``y``.

A shortest path from an element that joins two trees to an element with an
unused color is found by a breadth-first search run backwards from the
unused-color elements, and the lexicographically least shortest path is then
read off forwards.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

from .hitting import DisjointSets, kappa_restricted
from .process import ProcessTrace


class InternalInconsistencyError(RuntimeError):
    """A certificate failed its independent recheck; indicates a bug."""


@dataclass(frozen=True, order=True)
class GroundElement:
    edge_index: int  # 1-based position in the trace
    color: int


@dataclass(frozen=True)
class TreeCertificate:
    elements: tuple[GroundElement, ...]

    def as_record(self) -> dict:
        return {"kind": "tree", "elements": [[e.edge_index, e.color] for e in self.elements]}


@dataclass(frozen=True)
class ViolationCertificate:
    """Colors ``I`` whose restricted graph has too many components.

    ``kappa + len(colors) >= w_size + 2``; with ``w_size = n - 1`` this is
    ``kappa > n - |I|``.
    """

    colors: tuple[int, ...]
    kappa: int

    def as_record(self) -> dict:
        return {"kind": "violation", "colors": list(self.colors), "kappa": self.kappa}


def violates(kappa: int, size: int, w_size: int) -> bool:
    return kappa + size >= w_size + 2


def ground_elements(trace: ProcessTrace, m: int) -> list[GroundElement]:
    if not 0 <= m <= len(trace):
        raise ValueError(f"m={m} outside [0, {len(trace)}]")
    return [
        GroundElement(i + 1, int(c)) for i in range(m) for c in trace.colors[i].tolist()
    ]


class _Forest:
    """Rooted view of the selected forest, rebuilt after every change."""

    __slots__ = ("comp", "parent", "pelem", "depth", "tin", "tout")

    def __init__(self, n: int, eu: list[int], ev: list[int], selected: set[int]) -> None:
        adj: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        for e in sorted(selected):
            adj[eu[e]].append((ev[e], e))
            adj[ev[e]].append((eu[e], e))
        comp = [-1] * n
        parent = [-1] * n
        pelem = [-1] * n
        depth = [0] * n
        order: list[int] = []
        for root in range(n):
            if comp[root] != -1:
                continue
            comp[root] = root
            stack = [root]
            while stack:
                x = stack.pop()
                order.append(x)
                dx = depth[x] + 1
                for y, e in adj[x]:
                    if comp[y] == -1:
                        comp[y] = root
                        parent[y] = x
                        pelem[y] = e
                        depth[y] = dx
                        stack.append(y)
        # stack order is a preorder: each subtree occupies a contiguous range
        tin = [0] * n
        size = [1] * n
        for t, x in enumerate(order):
            tin[x] = t
        for x in reversed(order):
            if parent[x] != -1:
                size[parent[x]] += size[x]
        tout = [tin[x] + size[x] for x in range(n)]
        self.comp = comp
        self.parent = parent
        self.pelem = pelem
        self.depth = depth
        self.tin = tin
        self.tout = tout


class CommonIndependentState:
    """A common independent set over a growing prefix of a trace.

    Element ids follow ``(edge_index, color)`` order, so comparing ids is the
    same as comparing ground elements lexicographically.
    """

    def __init__(self, trace: ProcessTrace) -> None:
        self.trace = trace
        self.n = trace.n
        self.w_size = trace.w_size
        self.m = 0
        self.eu: list[int] = []
        self.ev: list[int] = []
        self.ecolor: list[int] = []
        self.eedge: list[int] = []
        self.in_sel = bytearray()
        self.selected: set[int] = set()
        self.owner = [-1] * self.w_size
        self.by_color: list[list[int]] = [[] for _ in range(self.w_size)]
        self._forest: _Forest | None = None
        self._visited: list[int] | None = None

    def __len__(self) -> int:
        return len(self.selected)

    @property
    def size(self) -> int:
        return len(self.selected)

    @property
    def pool_size(self) -> int:
        return len(self.eu)

    def element(self, e: int) -> GroundElement:
        return GroundElement(self.eedge[e], self.ecolor[e])

    def selected_elements(self) -> list[GroundElement]:
        return [self.element(e) for e in sorted(self.selected)]

    # -- pool ----------------------------------------------------------------

    def push_edges(self, upto: int) -> None:
        """Add the ground elements of edges ``m+1..upto`` to the pool."""
        if not self.m <= upto <= len(self.trace):
            raise ValueError(f"cannot extend prefix {self.m} to {upto}")
        us = self.trace.u[self.m : upto].tolist()
        vs = self.trace.v[self.m : upto].tolist()
        cs = self.trace.colors[self.m : upto].tolist()
        for i, (a, b, colors) in enumerate(zip(us, vs, cs), start=self.m + 1):
            for c in colors:
                self.by_color[c].append(len(self.eu))
                self.eu.append(a)
                self.ev.append(b)
                self.ecolor.append(c)
                self.eedge.append(i)
                self.in_sel.append(0)
        self.m = upto
        self._visited = None

    def push_edge(self) -> None:
        self.push_edges(self.m + 1)

    # -- augmentation --------------------------------------------------------

    def _select(self, e: int) -> None:
        self.in_sel[e] = 1
        self.selected.add(e)
        self.owner[self.ecolor[e]] = e

    def _deselect(self, e: int) -> None:
        self.in_sel[e] = 0
        self.selected.discard(e)
        self.owner[self.ecolor[e]] = -1

    def _changed(self) -> None:
        self._forest = None
        self._visited = None

    def greedy(self) -> int:
        """Add pool elements in id order while both matroids stay independent.

        Equivalent to repeating length-zero augmentations; returns the number
        of elements added.
        """
        dsu = DisjointSets(self.n)
        for e in self.selected:
            dsu.union(self.eu[e], self.ev[e])
        owner, in_sel = self.owner, self.in_sel
        added = 0
        for e in range(len(self.eu)):
            if in_sel[e] or owner[self.ecolor[e]] != -1:
                continue
            if dsu.union(self.eu[e], self.ev[e]):
                self._select(e)
                added += 1
        if added:
            self._changed()
        return added

    def _search(self) -> list[int] | None:
        """Lexicographically least shortest augmenting path, or None.

        On failure the ids reached by the backward search are kept in
        ``self._visited``.
        """
        if self._forest is None:
            self._forest = _Forest(self.n, self.eu, self.ev, self.selected)
        f = self._forest
        comp, parent, pelem, depth = f.comp, f.parent, f.pelem, f.depth
        eu, ev, ecolor, in_sel, by_color = self.eu, self.ev, self.ecolor, self.in_sel, self.by_color

        level: list[int] = []
        for c, y in enumerate(self.owner):
            if y == -1:
                level.extend(by_color[c])
        found = [z for z in level if comp[eu[z]] != comp[ev[z]]]
        if found:
            return [min(found)]

        dist = [-1] * len(eu)
        for z in level:
            dist[z] = 0
        levels = [level]
        jump = list(range(self.n))
        d = 0
        while level:
            nxt: list[int] = []
            if d % 2 == 0:
                # outside elements: label unlabeled tree edges on their cycles
                for z in level:
                    a, b = eu[z], ev[z]
                    while jump[a] != a:
                        jump[a] = jump[jump[a]]
                        a = jump[a]
                    while jump[b] != b:
                        jump[b] = jump[jump[b]]
                        b = jump[b]
                    while a != b:
                        if depth[a] < depth[b]:
                            a, b = b, a
                        y = pelem[a]
                        dist[y] = d + 1
                        nxt.append(y)
                        p = parent[a]
                        jump[a] = p
                        a = p
                        while jump[a] != a:
                            jump[a] = jump[jump[a]]
                            a = jump[a]
            else:
                # selected elements: outside elements of the same color
                for y in level:
                    for z in by_color[ecolor[y]]:
                        if dist[z] == -1 and not in_sel[z]:
                            dist[z] = d + 1
                            nxt.append(z)
                            if comp[eu[z]] != comp[ev[z]]:
                                found.append(z)
            d += 1
            levels.append(nxt)
            if found:
                break
            level = nxt
        else:
            self._visited = [e for e, x in enumerate(dist) if x != -1]
            return None

        cur = min(found)
        path = [cur]
        tin, tout = f.tin, f.tout
        for dd in range(d - 1, -1, -1):
            if not in_sel[cur]:
                cur = self.owner[ecolor[cur]]
            else:
                child = eu[cur] if pelem[eu[cur]] == cur else ev[cur]
                lo, hi = tin[child], tout[child]
                cur = min(
                    z
                    for z in levels[dd]
                    if (lo <= tin[eu[z]] < hi) != (lo <= tin[ev[z]] < hi)
                )
            path.append(cur)
        return path

    def _apply(self, path: list[int]) -> None:
        for e in path:
            if self.in_sel[e]:
                self._deselect(e)
        for e in path[::2]:
            self._select(e)
        self._changed()

    def try_augment(self) -> bool:
        """Grow the common independent set by one element if possible."""
        if len(self.selected) >= self.n - 1:
            return False
        path = self._search()
        if path is None:
            return False
        self._apply(path)
        return True

    def augmenting_path(self) -> list[GroundElement] | None:
        """The path ``try_augment`` would use, without applying it."""
        path = self._search() if len(self.selected) < self.n - 1 else None
        return None if path is None else [self.element(e) for e in path]

    def maximize(self) -> None:
        self.greedy()
        while self.try_augment():
            pass

    def unreached(self) -> list[int]:
        """Ids not reached backwards from unused-color elements.

        Only meaningful for a maximal state; this is the partition-matroid
        side of a minimizing partition of the ground set.
        """
        if len(self.selected) >= self.n - 1:
            return list(range(len(self.eu)))
        if self._visited is None and self._search() is not None:
            raise ValueError("state is not maximal")
        reached = set(self._visited or ())
        return [e for e in range(len(self.eu)) if e not in reached]


def max_rainbow_forest(trace: ProcessTrace, m: int | None = None) -> CommonIndependentState:
    """Maximum common independent set over the first ``m`` edges."""
    state = CommonIndependentState(trace)
    state.push_edges(len(trace) if m is None else m)
    state.maximize()
    return state


def rainbow_forest_sizes(trace: ProcessTrace) -> Iterator[int]:
    """Maximum common independent set size after each edge, incrementally."""
    state = CommonIndependentState(trace)
    for _ in range(len(trace)):
        state.push_edge()
        state.try_augment()
        yield state.size


def first_rainbow_time(trace: ProcessTrace, start: int = 0) -> int | None:
    """Least m whose prefix has a rainbow spanning tree, else None.

    ``start`` may be any step known to precede the answer, e.g.
    ``max(m_C, m_N)``; the prefix up to it is maximized in one go and the
    remaining edges are added one at a time with one augmentation each.
    """
    n = trace.n
    if trace.w_size < n - 1:
        return None
    state = CommonIndependentState(trace)
    if start:
        state.push_edges(start)
        state.maximize()
        if state.size == n - 1:
            return start
    for m in range(start + 1, len(trace) + 1):
        state.push_edge()
        state.try_augment()
        if state.size == n - 1:
            return m
    return None


def _restricted_violation(trace: ProcessTrace, m: int, colors: list[int]) -> tuple[bool, int]:
    kappa = kappa_restricted(trace, m, colors)
    return violates(kappa, len(colors), trace.w_size), kappa


def certify(state: CommonIndependentState) -> TreeCertificate | ViolationCertificate:
    """Certificate for the (maximal) state's prefix.

    A full tree is returned as is.  Otherwise the colors of selected elements
    on the partition-matroid side of the minimizing cut form ``J``; the
    complement ``I`` violates the component bound and is shrunk greedily
    until dropping any single color would lose the violation.  Component
    counts are recomputed from the trace.
    """
    n, w = state.n, state.w_size
    if state.size == n - 1:
        return TreeCertificate(tuple(state.selected_elements()))
    side = state.unreached()
    used = {state.ecolor[e] for e in side if state.in_sel[e]}
    colors = [c for c in range(w) if c not in used]
    ok, kappa = _restricted_violation(state.trace, state.m, colors)
    if not ok:
        raise InternalInconsistencyError(
            f"dual color set {colors} has kappa={kappa}, no violation (w={w})"
        )
    # repeat passes until no single color can be dropped
    shrunk = True
    while shrunk:
        shrunk = False
        for c in list(colors):
            trial = [x for x in colors if x != c]
            ok, kt = _restricted_violation(state.trace, state.m, trial)
            if ok:
                colors, kappa = trial, kt
                shrunk = True
    return ViolationCertificate(tuple(colors), kappa)


def validate_tree(cert: TreeCertificate, trace: ProcessTrace, n: int | None = None) -> bool:
    n = trace.n if n is None else n
    elements = cert.elements
    if len(elements) != n - 1:
        return False
    if len({e.color for e in elements}) != len(elements):
        return False
    dsu = DisjointSets(n)
    for e in elements:
        if not 1 <= e.edge_index <= len(trace):
            return False
        edge = trace[e.edge_index - 1]
        if e.color not in edge.colors:
            return False
        if not dsu.union(edge.u, edge.v):
            return False
    return dsu.component_count == 1


def validate_violation(cert: ViolationCertificate, trace: ProcessTrace, m: int | None = None) -> bool:
    m = len(trace) if m is None else m
    kappa = kappa_restricted(trace, m, cert.colors)
    return kappa == cert.kappa and violates(kappa, len(cert.colors), trace.w_size)
