import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from temporeach.reach import (
    arrivals,
    foremost_tree,
    max_reachability,
    reach_set,
    sparsify_for_source,
)
from temporeach.tgraph import TemporalGraph, parse_graph

from test_tgraph import temporal_graphs


def brute_foremost(g: TemporalGraph, source: int) -> list:
    """Independent oracle: DFS over all simple strict temporal paths."""
    best = [None] * g.n
    best[source] = 0

    def walk(v, t, visited):
        for w, ei in g.adjacency[v]:
            if w in visited:
                continue
            for lab in g.labels[ei]:
                if lab > t:
                    if best[w] is None or lab < best[w]:
                        best[w] = lab
                    walk(w, lab, visited | {w})

    walk(source, 0, {source})
    return best


def test_star_arrivals():
    g = parse_graph("n 3\ne 0 1 5\ne 0 2 3")
    t = foremost_tree(g, 0)
    assert t.arrival == (0, 5, 3)


def test_path_blocked_by_ordering():
    g = parse_graph("n 3\ne 0 1 2\ne 1 2 1")
    t = foremost_tree(g, 0)
    assert t.arrival == (0, 2, None)
    assert brute_foremost(g, 0) == [0, 2, None]


def test_source_arrival_zero():
    g = parse_graph("n 2\ne 0 1 4")
    assert foremost_tree(g, 1).arrival[1] == 0


def test_reach_set_middle_of_path():
    g = parse_graph("n 3\ne 0 1 2\ne 1 2 1")
    assert reach_set(g, 1) == {0, 1, 2}


def test_reach_isolated_vertex():
    g = parse_graph("n 2\ne 0 1 1")
    g = TemporalGraph(3, g.edges, g.labels)
    assert reach_set(g, 2) == {2}


def test_max_reachability_examples():
    k4 = parse_graph("n 4\n" + "\n".join(f"e {u} {v} 1" for u, v in itertools.combinations(range(4), 2)))
    assert max_reachability(k4) == (0, 4)
    path = parse_graph("n 3\ne 0 1 2\ne 1 2 1")
    assert max_reachability(path) == (1, 3)
    lonely = TemporalGraph(1, (), ())
    assert max_reachability(lonely) == (0, 1)


@settings(max_examples=200, deadline=None)
@given(temporal_graphs(max_n=6, max_t=4, max_labels=2), st.integers(0, 5))
def test_foremost_matches_brute_force(g, source):
    source %= g.n
    tree = foremost_tree(g, source)
    assert list(tree.arrival) == brute_foremost(g, source)


@settings(max_examples=200, deadline=None)
@given(temporal_graphs(max_n=6, max_t=4, max_labels=2))
def test_neighbourhood_containment(g):
    for v in range(g.n):
        nbrs = {w for w, _ in g.adjacency[v]}
        assert reach_set(g, v) >= nbrs | {v}


@settings(max_examples=150, deadline=None)
@given(temporal_graphs(max_n=5, max_t=4, max_labels=2), st.data())
def test_monotone_under_more_time_edges(g, data):
    extra = {}
    for e, ts in zip(g.edges, g.labels):
        more = data.draw(
            st.lists(st.integers(1, 6), max_size=2, unique=True), label=f"extra{e}"
        )
        extra[e] = tuple(sorted(set(ts) | set(more)))
    g2 = g.with_labels(extra)
    for v in range(g.n):
        a1, a2 = arrivals(g, v), arrivals(g2, v)
        for x in range(g.n):
            if a1[x] is not None:
                assert a2[x] is not None and a2[x] <= a1[x]
        assert reach_set(g, v) <= reach_set(g2, v)
    assert max_reachability(g)[1] <= max_reachability(g2)[1]


@settings(max_examples=150, deadline=None)
@given(temporal_graphs(max_n=6, max_t=4, max_labels=2), st.integers(0, 5))
def test_tree_paths_are_prefix_foremost(g, source):
    source %= g.n
    tree = foremost_tree(g, source)
    for v in range(g.n):
        if tree.arrival[v] is None or v == source:
            continue
        hops = tree.path_to(v)
        times = [t for _u, _w, t in hops]
        assert times == sorted(times) and len(set(times)) == len(times)
        for _u, w, t in hops:
            assert tree.arrival[w] == t


@settings(max_examples=150, deadline=None)
@given(temporal_graphs(max_n=6, max_t=4, max_labels=2), st.integers(0, 5))
def test_sparsify_preserves_reach_and_arrivals(g, source):
    source %= g.n
    sparse = sparsify_for_source(g, source)
    assert all(len(ts) == 1 for ts in sparse.labels)
    a1, a2 = arrivals(g, source), arrivals(sparse, source)
    assert a1 == a2


def test_sparsify_keeps_min_used_time():
    # edge (1,2) carries the tree time only
    g = parse_graph("n 3\ne 0 1 1\ne 0 2 2\ne 1 2 3 5")
    sparse = sparsify_for_source(g, 0)
    assert dict(zip(sparse.edges, sparse.labels)) == {(0, 1): (1,), (0, 2): (2,)}


def test_source_out_of_range():
    g = parse_graph("n 2\ne 0 1 1")
    with pytest.raises(ValueError):
        foremost_tree(g, 5)
