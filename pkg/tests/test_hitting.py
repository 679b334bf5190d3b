from collections import deque
from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rainbowtree.hitting import (
    CoverageTracker,
    DisjointSets,
    HittingTimes,
    NotReachedError,
    first_all_colors_time,
    first_connect_time,
    kappa_restricted,
)
from rainbowtree.process import ProcessConfig, ProcessTrace, generate_trace


def bfs_components(n, edges):
    adj = {v: [] for v in range(n)}
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    seen = set()
    count = 0
    for s in range(n):
        if s in seen:
            continue
        count += 1
        seen.add(s)
        queue = deque([s])
        while queue:
            x = queue.popleft()
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    queue.append(y)
    return count


def prefix_edges(trace, m, colors=None):
    return [
        (e.u, e.v) for e in list(trace)[:m] if colors is None or set(e.colors) & set(colors)
    ]


def rescan_coverage(trace):
    seen = set()
    for e in trace:
        seen.update(e.colors)
        if len(seen) == trace.w_size:
            return e.index
    return None


def test_disjoint_sets_basics():
    d = DisjointSets(5)
    assert d.component_count == 5
    assert d.union(0, 1)
    assert not d.union(1, 0)
    assert d.union(2, 3)
    assert d.union(0, 3)
    assert d.component_count == 2
    assert d.connected(1, 2)
    assert not d.connected(1, 4)
    assert d.find(d.find(3)) == d.find(3)


def test_equal_rank_attaches_second_under_first():
    d = DisjointSets(4)
    d.union(2, 3)
    assert d.parent[3] == 2
    d.union(1, 0)
    assert d.parent[0] == 1
    d.union(1, 2)
    assert d.parent[2] == 1


def test_coverage_tracker():
    c = CoverageTracker(3)
    assert c.add([0]) == 2
    assert c.add([0]) == 2
    assert c.add([2, 1]) == 0
    assert c.complete
    assert c.unseen_count == sum(1 for s in c.seen if not s)


def test_connect_time_single_edge():
    trace = ProcessTrace.from_edges(2, 1, [(0, 1, (0,))])
    assert first_connect_time(trace) == 1


def test_connect_time_hand_instance():
    edges = [(0, 1, (0,)), (2, 3, (0,)), (0, 2, (0,)), (1, 3, (0,))]
    trace = ProcessTrace.from_edges(4, 1, edges)
    assert first_connect_time(trace) == 3
    assert bfs_components(4, prefix_edges(trace, 2)) == 2
    assert bfs_components(4, prefix_edges(trace, 3)) == 1


def test_connect_time_not_reached():
    trace = ProcessTrace.from_edges(4, 1, [(0, 1, (0,)), (2, 3, (1,))])
    with pytest.raises(NotReachedError) as info:
        first_connect_time(trace)
    assert info.value.components == 2


@pytest.mark.parametrize("seed", range(40))
def test_connect_time_matches_bfs(seed):
    n = 3 + seed % 9
    trace = generate_trace(ProcessConfig(n, 1, seed=seed))
    m = first_connect_time(trace)
    assert bfs_components(n, prefix_edges(trace, m)) == 1
    assert bfs_components(n, prefix_edges(trace, m - 1)) > 1
    assert m >= n - 1
    assert m == min(j for j in range(len(trace) + 1) if kappa_restricted(trace, j, range(n - 1)) == 1)


def test_coverage_examples():
    trace = ProcessTrace.from_edges(2, 1, [(0, 1, (0,))])
    assert first_all_colors_time(trace) == 1
    edges = [(0, 1, (0,)), (0, 2, (0,)), (0, 3, (1,)), (1, 2, (2,))]
    assert first_all_colors_time(ProcessTrace.from_edges(4, 1, edges)) == 4
    missing = ProcessTrace.from_edges(4, 1, edges[:3])
    assert first_all_colors_time(missing) is None


def test_coverage_matches_rescan():
    for seed in range(1000):
        trace = generate_trace(ProcessConfig(6, 2, seed=seed))
        t = first_all_colors_time(trace)
        assert t == rescan_coverage(trace)
        if t is not None:
            assert t >= -(-trace.w_size // trace.k)


def test_kappa_examples():
    trace = ProcessTrace.from_edges(5, 2, [(0, 1, (0, 1)), (2, 3, (2, 3))])
    assert kappa_restricted(trace, 2, []) == 5
    assert kappa_restricted(trace, 2, {0, 2}) == 3
    assert bfs_components(5, [(0, 1), (2, 3)]) == 3
    full = generate_trace(ProcessConfig(6, 2, seed=4))
    assert kappa_restricted(full, len(full), range(5)) == 1
    with pytest.raises(ValueError):
        kappa_restricted(trace, 2, {4})


@settings(max_examples=200, deadline=None)
@given(
    n=st.integers(2, 8),
    k=st.integers(1, 3),
    seed=st.integers(0, 2**32),
    data=st.data(),
)
def test_kappa_properties(n, k, seed, data):
    k = min(k, n - 1)
    trace = generate_trace(ProcessConfig(n, k, seed=seed))
    w = trace.w_size
    m = data.draw(st.integers(0, len(trace)))
    I = data.draw(st.sets(st.integers(0, w - 1)))
    kappa = kappa_restricted(trace, m, I)
    assert kappa == bfs_components(n, prefix_edges(trace, m, I))
    if m < len(trace):
        assert kappa_restricted(trace, m + 1, I) <= kappa
    for c in range(w):
        assert kappa_restricted(trace, m, I | {c}) <= kappa
    dsu = DisjointSets(n)
    for a, b in prefix_edges(trace, m):
        dsu.union(a, b)
    assert kappa_restricted(trace, m, range(w)) == dsu.component_count


def test_hitting_times_record_roundtrip():
    h = HittingTimes(12, None, None, 45)
    assert h.as_record() == {"m_C": 12, "m_N": None, "m_R": None, "length": 45}
    assert HittingTimes.from_record(h.as_record()) == h


def test_kappa_of_all_subsets_small():
    trace = generate_trace(ProcessConfig(5, 2, seed=8, m_max=6))
    for size in range(5):
        for I in combinations(range(4), size):
            assert kappa_restricted(trace, 6, I) == bfs_components(5, prefix_edges(trace, 6, I))
