import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from temporeach.limits import CapExceeded, WorkCaps
from temporeach.reach import arrivals, max_reachability
from temporeach.solvers import (
    ALL_EDGES,
    TrlpInstance,
    _explore,
    explore_with_perturbable_set,
    solve_trlp,
    solve_trlp_big_zeta,
    solve_trlp_xp,
    solve_trp,
)
from temporeach.tgraph import apply_perturbation, parse_graph, validate_relabelling
from temporeach.testkit import enumerate_perturbations, oracle_trlp, oracle_trlp_max_reach

from test_tgraph import temporal_graphs


def micro_graphs():
    # enumeration-sized: at most ~10 time-edges keeps full sweeps fast
    return temporal_graphs(max_n=5, max_t=3, max_labels=2, max_edges=5)


def tiny_graphs():
    # for tests that enumerate with an unlimited move budget
    return temporal_graphs(max_n=5, max_t=3, max_labels=1, max_edges=5)


# --- solve_trp -------------------------------------------------------------


def test_trp_path_example():
    g = parse_graph("n 3\ne 0 1 2\ne 1 2 1")
    res = solve_trp(g, 1, 3)
    assert res.answer and res.source == 0 and res.reach_count == 3
    pg = apply_perturbation(g, res.perturbation)
    assert sum(1 for a in arrivals(pg, 0) if a is not None) == 3


def test_trp_delta_zero():
    g = parse_graph("n 4\ne 0 1 2\ne 1 2 2\ne 2 3 2")
    res = solve_trp(g, 0, 4)
    assert not res.answer
    assert res.reach_count == max_reachability(g)[1]


def test_trp_h_one():
    g = parse_graph("n 2\ne 0 1 1")
    res = solve_trp(g, 0, 1)
    assert res.answer and res.perturbation.perturbed_count == 0


@settings(max_examples=60, deadline=None)
@given(temporal_graphs(max_n=5, max_t=3, max_labels=2, max_edges=3), st.integers(0, 2))
def test_trp_count_and_pointwise_optimality(g, delta):
    res = solve_trp(g, delta, 1)
    best = oracle_trlp_max_reach(g, delta, g.num_time_edges())
    assert res.reach_count == best
    src = res.source
    cert_arr = arrivals(apply_perturbation(g, res.perturbation), src)
    for _p, pg in enumerate_perturbations(g, delta, g.num_time_edges()):
        other = arrivals(pg, src)
        for v in range(g.n):
            if other[v] is not None:
                assert cert_arr[v] is not None and cert_arr[v] <= other[v]


def test_trp_certificate_validates():
    g = parse_graph("n 4\ne 0 1 3\ne 1 2 1\ne 2 3 1")
    res = solve_trp(g, 2, 4)
    assert res.answer
    moved = validate_relabelling(g, apply_perturbation(g, res.perturbation), 2)
    assert moved is not None and moved <= res.perturbation.perturbed_count


# --- Algorithm-1 explorer ---------------------------------------------------


def test_explore_examples():
    g = parse_graph("n 3\ne 0 1 3\ne 1 2 3")
    assert explore_with_perturbable_set(g, 0, 3, 1, frozenset({(1, 2)}))
    assert not explore_with_perturbable_set(g, 0, 3, 1, frozenset())
    assert explore_with_perturbable_set(g, 0, 1, 0, frozenset())


def eset_oracle(g, source, k, delta, eset):
    for _p, pg in enumerate_perturbations(g, delta, g.num_time_edges(), eset=eset):
        if sum(1 for a in arrivals(pg, source) if a is not None) >= k:
            return True
    return False


@settings(max_examples=120, deadline=None)
@given(micro_graphs(), st.integers(0, 4), st.integers(1, 2), st.data())
def test_explore_matches_restricted_oracle(g, source, delta, data):
    source %= g.n
    esize = min(2, len(g.edges))
    eset = frozenset(
        data.draw(st.lists(st.sampled_from(g.edges), unique=True, max_size=esize))
        if g.edges
        else []
    )
    for k in range(1, g.n + 1):
        assert explore_with_perturbable_set(g, source, k, delta, eset) == eset_oracle(
            g, source, k, delta, eset
        )


# --- XP enumeration ----------------------------------------------------------


def test_xp_zeta_zero():
    g = parse_graph("n 4\ne 0 1 2\ne 1 2 2\ne 2 3 2")
    inst = TrlpInstance(g, 1, 0, 4)
    assert not solve_trlp_xp(inst).answer
    assert solve_trlp_xp(TrlpInstance(g, 1, 0, 3)).answer


def test_xp_work_cap():
    g = parse_graph("n 4\ne 0 1 2\ne 1 2 2\ne 2 3 2")
    with pytest.raises(CapExceeded):
        solve_trlp_xp(TrlpInstance(g, 1, 2, 4), caps=WorkCaps(xp_ops=1))


@settings(max_examples=80, deadline=None)
@given(micro_graphs(), st.integers(0, 2), st.integers(0, 2), st.integers(1, 5))
def test_xp_matches_oracle(g, delta, zeta, h):
    h = min(h, g.n)
    inst = TrlpInstance(g, delta, zeta, h)
    got = solve_trlp_xp(inst)
    want = oracle_trlp(inst)
    assert got.answer == want.answer
    if got.answer:
        pg = apply_perturbation(g, got.perturbation)
        assert sum(1 for a in arrivals(pg, got.source) if a is not None) >= h
        assert got.perturbation.perturbed_count <= zeta


def test_xp_deterministic():
    g = parse_graph("n 4\ne 0 1 2\ne 0 2 2\ne 1 3 2\ne 2 3 2")
    inst = TrlpInstance(g, 1, 1, 4)
    a = solve_trlp_xp(inst)
    b = solve_trlp_xp(inst)
    assert a == b


# --- big-zeta route ----------------------------------------------------------


def test_big_zeta_requires_precondition():
    g = parse_graph("n 3\ne 0 1 2\ne 1 2 1")
    with pytest.raises(ValueError):
        solve_trlp_big_zeta(TrlpInstance(g, 1, 1, 3))


def test_big_zeta_star_no_moves():
    star = parse_graph("n 5\ne 0 1 1\ne 0 2 1\ne 0 3 1\ne 0 4 1")
    res = solve_trlp_big_zeta(TrlpInstance(star, 1, 4, 5))
    assert res.answer and res.perturbation.perturbed_count == 0


def test_big_zeta_path_example():
    g = parse_graph("n 3\ne 0 1 2\ne 1 2 1")
    res = solve_trlp_big_zeta(TrlpInstance(g, 1, 2, 3))
    assert res.answer
    assert res.perturbation.perturbed_count <= 2


def aux_check_certificate_structure(g, res, h):
    moved = res.perturbation.moved_records()
    assert len(moved) <= h - 1
    edges = [e for e, _o, _n in moved]
    assert len(edges) == len(set(edges))
    # acyclic: union-find over the moved edges
    parent = {}

    def find(x):
        parent.setdefault(x, x)
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v in edges:
        ru, rv = find(u), find(v)
        assert ru != rv
        parent[ru] = rv
    reached = {
        v
        for v, a in enumerate(arrivals(apply_perturbation(g, res.perturbation), res.source))
        if a is not None
    }
    for u, v in edges:
        assert u in reached and v in reached


@settings(max_examples=60, deadline=None)
@given(temporal_graphs(max_n=5, max_t=3, max_labels=2, max_edges=4), st.integers(0, 2), st.integers(1, 5))
def test_big_zeta_matches_oracle_with_structure(g, delta, h):
    h = min(h, g.n)
    zeta = max(h - 1, 0)
    inst = TrlpInstance(g, delta, zeta, h)
    got = solve_trlp_big_zeta(inst)
    want = oracle_trlp(inst)
    assert got.answer == want.answer
    if got.answer:
        aux_check_certificate_structure(g, got, h)


# --- dispatcher ---------------------------------------------------------------


def test_dispatch_degree_shortcut():
    g = parse_graph("n 4\ne 0 1 2\ne 0 2 2\ne 0 3 2")
    res = solve_trlp(TrlpInstance(g, 1, 0, 4))
    assert res.answer and res.strategy == "degree"
    assert res.perturbation.perturbed_count == 0


def test_dispatch_bigzeta_route():
    g = parse_graph("n 4\ne 0 1 2\ne 1 2 2\ne 2 3 2")
    res = solve_trlp(TrlpInstance(g, 2, 3, 4))
    assert res.strategy == "bigzeta"


def test_dispatch_tree_route():
    g = parse_graph("n 4\ne 0 1 1\ne 1 2 3\ne 2 3 1")
    res = solve_trlp(TrlpInstance(g, 1, 1, 4))
    assert res.strategy == "tree"


def test_dispatch_forced_strategy_and_refusal():
    g = parse_graph("n 4\ne 0 1 2\ne 1 2 2\ne 2 3 2")
    res = solve_trlp(TrlpInstance(g, 1, 1, 4), strategy="xp")
    assert res.strategy == "xp"
    with pytest.raises(CapExceeded):
        solve_trlp(TrlpInstance(g, 1, 1, 4), strategy="xp", caps=WorkCaps(xp_ops=1))


@settings(max_examples=60, deadline=None)
@given(micro_graphs(), st.integers(0, 2), st.integers(0, 2), st.integers(1, 5))
def test_dispatch_matches_oracle(g, delta, zeta, h):
    h = min(h, g.n)
    inst = TrlpInstance(g, delta, zeta, h)
    got = solve_trlp(inst)
    want = oracle_trlp(inst)
    assert got.answer == want.answer
    if got.answer:
        pg = apply_perturbation(g, got.perturbation)
        count = sum(1 for a in arrivals(pg, got.source) if a is not None)
        assert count >= h
        moved = validate_relabelling(g, pg, delta)
        assert moved is not None and moved <= zeta
