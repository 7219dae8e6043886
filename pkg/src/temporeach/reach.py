"""Strict temporal paths: foremost arrival times, path trees, reach sets.

Exploration is a Dijkstra-style earliest-arrival relaxation over a priority
queue of (time, vertex, parent) triples; popping in that lexicographic order
makes trees deterministic (smallest feasible time, then smallest parent id).
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Optional

from .tgraph import TemporalGraph, next_label_after


@dataclass(frozen=True)
class ForemostTree:
    """Foremost-path tree from a source: every root-to-vertex path uses strictly
    increasing times and each prefix arrives at that vertex's foremost time.

    ``arrival[v]`` is None for unreachable vertices and 0 for the source.
    ``parent[v]``/``edge_time[v]`` describe the tree edge into v (None at the
    source and at unreachable vertices).
    """

    source: int
    parent: tuple[Optional[int], ...]
    edge_time: tuple[Optional[int], ...]
    arrival: tuple[Optional[int], ...]

    def reached(self) -> frozenset[int]:
        return frozenset(v for v, a in enumerate(self.arrival) if a is not None)

    def path_to(self, v: int) -> list[tuple[int, int, int]]:
        """Tree path to v as (u, w, time) hops from the source."""
        if self.arrival[v] is None:
            raise ValueError(f"vertex {v} is unreachable")
        hops = []
        while self.parent[v] is not None:
            u = self.parent[v]
            hops.append((u, v, self.edge_time[v]))
            v = u
        hops.reverse()
        return hops


def foremost_tree(g: TemporalGraph, source: int) -> ForemostTree:
    """Foremost arrivals and a deterministic foremost-path tree from ``source``."""
    if not (0 <= source < g.n):
        raise ValueError(f"source {source} out of range")
    arrival: list[Optional[int]] = [None] * g.n
    parent: list[Optional[int]] = [None] * g.n
    edge_time: list[Optional[int]] = [None] * g.n
    heap: list[tuple[int, int, int]] = []
    arrival[source] = 0
    for w, ei in g.adjacency[source]:
        heapq.heappush(heap, (g.labels[ei][0], w, source))
    while heap:
        t, v, u = heapq.heappop(heap)
        if arrival[v] is not None:
            continue
        arrival[v] = t
        parent[v] = u
        edge_time[v] = t
        for w, ei in g.adjacency[v]:
            if arrival[w] is None:
                nt = next_label_after(g.labels[ei], t)
                if nt is not None:
                    heapq.heappush(heap, (nt, w, v))
    return ForemostTree(source, tuple(parent), tuple(edge_time), tuple(arrival))


def arrivals(g: TemporalGraph, source: int, min_departure: int = 0) -> list[Optional[int]]:
    """Foremost arrival times using only paths whose first edge is at a time
    >= ``min_departure``; no tree bookkeeping."""
    arr: list[Optional[int]] = [None] * g.n
    arr[source] = 0
    heap: list[tuple[int, int]] = []
    start = max(0, min_departure - 1)
    for w, ei in g.adjacency[source]:
        nt = next_label_after(g.labels[ei], start)
        if nt is not None:
            heap.append((nt, w))
    heapq.heapify(heap)
    while heap:
        t, v = heapq.heappop(heap)
        if arr[v] is not None:
            continue
        arr[v] = t
        for w, ei in g.adjacency[v]:
            if arr[w] is None:
                nt = next_label_after(g.labels[ei], t)
                if nt is not None:
                    heapq.heappush(heap, (nt, w))
    return arr


def reach_set(g: TemporalGraph, source: int) -> frozenset[int]:
    """All vertices reachable from ``source`` by a strict temporal path."""
    if not (0 <= source < g.n):
        raise ValueError(f"source {source} out of range")
    return frozenset(v for v, a in enumerate(arrivals(g, source)) if a is not None)


def max_reachability(g: TemporalGraph) -> tuple[int, int]:
    """(best source, reach count): the smallest vertex id attaining the maximum."""
    if g.n < 1:
        raise ValueError("graph has no vertices")
    best_src, best = 0, 0
    for s in range(g.n):
        count = sum(1 for a in arrivals(g, s) if a is not None)
        if count > best:
            best_src, best = s, count
        if best == g.n:
            break
    return best_src, best


def sparsify_for_source(g: TemporalGraph, source: int) -> TemporalGraph:
    """Keep only the foremost-tree edges, each at the single time its chosen
    path uses it; foremost arrivals and the reach set from ``source`` are
    unchanged."""
    tree = foremost_tree(g, source)
    kept: dict[tuple[int, int], int] = {}
    for v in range(g.n):
        u = tree.parent[v]
        if u is None:
            continue
        e = (u, v) if u < v else (v, u)
        t = tree.edge_time[v]
        if e not in kept or t < kept[e]:
            kept[e] = t
    edges = tuple(sorted(kept))
    return TemporalGraph(g.n, edges, tuple((kept[e],) for e in edges))
