"""Bounded-treewidth DP for reachability under bounded re-timings.

The DP runs bottom-up over a nice tree decomposition rooted at a bag holding
only the source.  A node state records: the re-timed label sets of the edges
inside the bag; for every (bag vertex v, departure time t) the foremost
arrival at each bag vertex over paths inside the processed subgraph; for
every assignment of departure times to bag vertices, how many distinct
already-forgotten vertices they reach (capped at h); and the number of moved
appearances on edges with a forgotten endpoint.  Leaf/introduce/forget/join
rules derive parent states constructively from child states, so enumeration
is over (bag-edge image choices x child-state combinations) only.

Scoped to micro parameters; a per-node candidate cap triggers a refusal.
"""

from __future__ import annotations

import itertools
from bisect import bisect_left
from dataclasses import dataclass
from functools import lru_cache
from math import ceil, log2
from typing import NamedTuple, Optional

from .limits import CapExceeded, WorkCaps, DEFAULT_CAPS
from .reach import arrivals
from .solvers import SolveResult, TrlpInstance
from .tgraph import (
    Edge,
    Perturbation,
    TemporalGraph,
    apply_perturbation,
    matching_records,
    minimal_moves,
)


class DecompositionError(ValueError):
    """A tree-decomposition axiom fails; the message names the witness."""


@dataclass(frozen=True)
class TreeDecomposition:
    """Unrooted decomposition: bags[i] is node i's vertex set; ``links`` are
    undirected tree edges between node ids."""

    bags: tuple[frozenset[int], ...]
    links: tuple[tuple[int, int], ...]

    def width(self) -> int:
        return max((len(b) for b in self.bags), default=1) - 1


def width(decomp: TreeDecomposition) -> int:
    return decomp.width()


def validate_decomposition(
    n: int, graph_edges: tuple[Edge, ...], decomp: TreeDecomposition
) -> None:
    """Check the three axioms plus tree-ness; raise DecompositionError."""
    k = len(decomp.bags)
    if k == 0:
        raise DecompositionError("decomposition has no nodes")
    for a, b in decomp.links:
        if not (0 <= a < k and 0 <= b < k):
            raise DecompositionError(f"link ({a},{b}) references a missing node")
    if len(decomp.links) != k - 1:
        raise DecompositionError("decomposition links do not form a tree")
    adj: list[list[int]] = [[] for _ in range(k)]
    for a, b in decomp.links:
        adj[a].append(b)
        adj[b].append(a)
    seen = [False] * k
    stack = [0]
    seen[0] = True
    cnt = 1
    while stack:
        x = stack.pop()
        for y in adj[x]:
            if not seen[y]:
                seen[y] = True
                cnt += 1
                stack.append(y)
    if cnt != k:
        raise DecompositionError("decomposition links do not form a tree (disconnected)")
    covered = set().union(*decomp.bags) if decomp.bags else set()
    for v in range(n):
        if v not in covered:
            raise DecompositionError(f"vertex {v} appears in no bag")
    for bag in decomp.bags:
        for v in bag:
            if not (0 <= v < n):
                raise DecompositionError(f"bag vertex {v} out of range")
    for u, v in graph_edges:
        if not any(u in b and v in b for b in decomp.bags):
            raise DecompositionError(f"edge ({u},{v}) is contained in no bag")
    for v in range(n):
        holders = [i for i, b in enumerate(decomp.bags) if v in b]
        if not holders:
            continue
        hset = set(holders)
        comp = {holders[0]}
        stack = [holders[0]]
        while stack:
            x = stack.pop()
            for y in adj[x]:
                if y in hset and y not in comp:
                    comp.add(y)
                    stack.append(y)
        if comp != hset:
            raise DecompositionError(f"bags containing vertex {v} are not connected")


# ---------------------------------------------------------------------------
# Exact treewidth for small graphs: subset DP over elimination prefixes.


def decompose_exact_small(n: int, edges: tuple[Edge, ...]) -> TreeDecomposition:
    """Width-minimal decomposition from an optimal elimination order."""
    if n > 20:
        raise CapExceeded("exact treewidth guard: at most 20 vertices")
    if n == 0:
        raise ValueError("graph has no vertices")
    adj = [0] * n
    for u, v in edges:
        adj[u] |= 1 << v
        adj[v] |= 1 << u

    def through_degree(v: int, wmask: int) -> int:
        seen = 1 << v
        frontier = adj[v]
        result = 0
        while True:
            new = frontier & ~seen
            if not new:
                break
            seen |= new
            result |= new & ~wmask
            expand = new & wmask
            frontier = 0
            while expand:
                low = expand & -expand
                expand ^= low
                frontier |= adj[low.bit_length() - 1]
        return bin(result).count("1")

    memo: dict[int, int] = {0: 0}

    def g(mask: int) -> int:
        if mask in memo:
            return memo[mask]
        best = n
        rest = mask
        while rest:
            low = rest & -rest
            rest ^= low
            v = low.bit_length() - 1
            best = min(best, max(g(mask ^ low), through_degree(v, mask ^ low)))
        memo[mask] = best
        return best

    full = (1 << n) - 1
    g(full)
    order: list[int] = []
    mask = full
    while mask:
        pick, pick_cost = None, None
        rest = mask
        while rest:
            low = rest & -rest
            rest ^= low
            v = low.bit_length() - 1
            cost = max(g(mask ^ low), through_degree(v, mask ^ low))
            if pick_cost is None or cost < pick_cost:
                pick, pick_cost = v, cost
        order.append(pick)
        mask ^= 1 << pick
    order.reverse()

    work = [set() for _ in range(n)]
    for u, v in edges:
        work[u].add(v)
        work[v].add(u)
    pos = {v: i for i, v in enumerate(order)}
    bags: list[frozenset[int]] = []
    for v in order:
        nb = set(work[v])
        bags.append(frozenset(nb | {v}))
        for a in nb:
            work[a].discard(v)
            for b in nb:
                if a != b:
                    work[a].add(b)
    links = []
    for i, v in enumerate(order):
        later = [pos[w] for w in bags[i] if pos[w] > i]
        if later:
            links.append((i, min(later)))
        elif i + 1 < n:
            links.append((i, i + 1))
    return TreeDecomposition(tuple(bags), tuple(links))


# ---------------------------------------------------------------------------
# Nice decompositions


@dataclass(frozen=True)
class NiceNode:
    bag: tuple[int, ...]
    kind: str  # "leaf" | "introduce" | "forget" | "join"
    vertex: Optional[int]
    children: tuple[int, ...]


@dataclass(frozen=True)
class NiceDecomposition:
    """Children always have smaller ids than their parent, so evaluating nodes
    in index order is bottom-up; the last node is the root."""

    nodes: tuple[NiceNode, ...]

    @property
    def root(self) -> int:
        return len(self.nodes) - 1


def make_nice(
    decomp: TreeDecomposition, source: int, n: int, graph_edges: tuple[Edge, ...]
) -> NiceDecomposition:
    """Equivalent nice decomposition of the same width whose root bag is
    exactly {source}; rooted at a node whose bag already holds the source."""
    validate_decomposition(n, graph_edges, decomp)
    holders = [i for i, b in enumerate(decomp.bags) if source in b]
    if not holders:
        raise DecompositionError(f"source {source} appears in no bag")
    root0 = min(holders)
    adj: list[list[int]] = [[] for _ in decomp.bags]
    for a, b in decomp.links:
        adj[a].append(b)
        adj[b].append(a)
    nodes: list[NiceNode] = []

    def emit(bag, kind, vertex, children) -> int:
        nodes.append(NiceNode(tuple(sorted(bag)), kind, vertex, tuple(children)))
        return len(nodes) - 1

    def chain_introduce(below: int, have: set[int], want: set[int]) -> int:
        cur = below
        bag = set(have)
        for v in sorted(want - have):
            bag.add(v)
            cur = emit(bag, "introduce", v, (cur,))
        return cur

    def transform(below: int, have: frozenset[int], want: frozenset[int]) -> int:
        cur = below
        bag = set(have)
        for v in sorted(have - want):
            bag.discard(v)
            cur = emit(bag, "forget", v, (cur,))
        return chain_introduce(cur, bag, set(want))

    def build(node: int, parent: int) -> int:
        bag = decomp.bags[node]
        kids = [c for c in adj[node] if c != parent]
        if not kids:
            leaf = emit((), "leaf", None, ())
            return chain_introduce(leaf, set(), set(bag))
        arms = [transform(build(c, node), decomp.bags[c], bag) for c in kids]
        cur = arms[0]
        for arm in arms[1:]:
            cur = emit(bag, "join", None, (cur, arm))
        return cur

    top = build(root0, -1)
    bag = set(decomp.bags[root0])
    for v in sorted(bag - {source}):
        bag.discard(v)
        top = emit(bag, "forget", v, (top,))
    return NiceDecomposition(tuple(nodes))


def parse_decomposition(text: str) -> TreeDecomposition:
    """Lines ``b <node-id> <v...>`` (bags) and ``t <a> <b>`` (tree links)."""
    bags: dict[int, frozenset[int]] = {}
    links: list[tuple[int, int]] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] == "b":
            bags[int(parts[1])] = frozenset(int(x) for x in parts[2:])
        elif parts[0] == "t":
            links.append((int(parts[1]), int(parts[2])))
        else:
            raise DecompositionError(f"line {line_no}: unknown line kind {parts[0]!r}")
    ids = sorted(bags)
    remap = {x: i for i, x in enumerate(ids)}
    try:
        link_ids = tuple((remap[a], remap[b]) for a, b in links)
    except KeyError as exc:
        raise DecompositionError(f"link references unknown node {exc}") from None
    return TreeDecomposition(tuple(bags[x] for x in ids), link_ids)


def serialize_decomposition(decomp: TreeDecomposition) -> str:
    out = [f"b {i} " + " ".join(str(v) for v in sorted(b)) for i, b in enumerate(decomp.bags)]
    out += [f"t {a} {b}" for a, b in decomp.links]
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# The DP proper


class TwState(NamedTuple):
    """Hashable state: bag-edge images, in-subgraph foremost arrivals, counts
    of reached forgotten vertices per departure assignment, moves below."""

    p: tuple[tuple[int, ...], ...]
    r_in: tuple[tuple[tuple[int, ...], ...], ...]
    r_below: tuple[int, ...]
    zeta_below: int


class _Ctx:
    def __init__(self, inst: TrlpInstance, caps: WorkCaps):
        self.g = inst.graph
        self.delta = inst.delta
        self.zeta = inst.zeta
        self.h = inst.h
        self.caps = caps
        self.horizon = self.g.lifetime + inst.delta
        self.inf = self.horizon + 1
        self.uvals = tuple(range(self.horizon + 1)) + (self.inf,)
        self._images: dict[int, tuple[tuple[tuple[int, ...], int], ...]] = {}

    def norm(self, t: int) -> int:
        return t if t <= self.horizon else self.inf

    def bag_edges(self, bag: tuple[int, ...]) -> tuple[Edge, ...]:
        inside = []
        for i, u in enumerate(bag):
            for v in bag[i + 1 :]:
                if (u, v) in self.g.edge_index:
                    inside.append((u, v))
        return tuple(sorted(inside))

    def images(self, e: Edge) -> tuple[tuple[tuple[int, ...], int], ...]:
        """(sorted label image, minimal move count) choices for edge e."""
        ei = self.g.edge_index[e]
        if ei in self._images:
            return self._images[ei]
        labels = self.g.labels[ei]
        windows = [
            range(max(1, t - self.delta), t + self.delta + 1) for t in labels
        ]
        seen: dict[tuple[int, ...], int] = {}
        for targets in itertools.product(*windows):
            if len(set(targets)) != len(targets):
                continue
            image = tuple(sorted(targets))
            if image not in seen:
                seen[image] = minimal_moves(labels, image, self.delta)
        out = tuple(sorted(seen.items()))
        self._images[ei] = out
        return out

    def u_enum(self, bag: tuple[int, ...]) -> tuple[tuple[int, ...], ...]:
        return _u_enum(self.uvals, len(bag))

    def u_index(self, bag: tuple[int, ...]) -> dict[tuple[int, ...], int]:
        return _u_index(self.uvals, len(bag))


@lru_cache(maxsize=64)
def _u_enum(uvals: tuple[int, ...], size: int) -> tuple[tuple[int, ...], ...]:
    return tuple(itertools.product(uvals, repeat=size))


@lru_cache(maxsize=64)
def _u_index(uvals: tuple[int, ...], size: int) -> dict[tuple[int, ...], int]:
    return {u: i for i, u in enumerate(_u_enum(uvals, size))}


def _first_label_at_or_after(labels: tuple[int, ...], t: int, inf: int) -> int:
    i = bisect_left(labels, t)
    return labels[i] if i < len(labels) else inf


def _first_label_after(labels: tuple[int, ...], t: int, inf: int) -> int:
    i = bisect_left(labels, t + 1)
    return labels[i] if i < len(labels) else inf


def _leaf_state(ctx: _Ctx) -> TwState:
    return TwState((), (), (0,), 0)


def _bag_cost(ctx: _Ctx, bag_edges: tuple[Edge, ...], p: tuple) -> int:
    total = 0
    for e, image in zip(bag_edges, p):
        ei = ctx.g.edge_index[e]
        total += minimal_moves(ctx.g.labels[ei], image, ctx.delta)
    return total


def _introduce_states(
    ctx: _Ctx, bag: tuple[int, ...], u: int, child_bag: tuple[int, ...],
    child_states: dict[TwState, tuple], counter: list[int],
) -> dict[TwState, tuple]:
    g, horizon, inf = ctx.g, ctx.horizon, ctx.inf
    bs = bag
    vidx = {v: i for i, v in enumerate(bs)}
    cidx = {v: i for i, v in enumerate(child_bag)}
    u_i = vidx[u]
    edges_s = ctx.bag_edges(bag)
    edges_child = ctx.bag_edges(child_bag)
    new_edges = tuple(e for e in edges_s if u in e)
    new_set = set(new_edges)
    old_pos = {e: i for i, e in enumerate(edges_child)}
    nbrs = tuple(w for w in bs if w != u and (min(u, w), max(u, w)) in new_set)
    image_lists = [ctx.images(e) for e in new_edges]
    times = range(horizon + 1)
    u_all = ctx.u_enum(bag)
    child_uidx = ctx.u_index(child_bag)
    out: dict[TwState, tuple] = {}

    for ckey in sorted(child_states):
        czb = ckey.zeta_below
        child_cost = _bag_cost(ctx, edges_child, ckey.p)

        def crin(v: int, t: int) -> tuple[int, ...]:
            # child arrivals from v departing >= t; inf-safe
            if t > horizon:
                return tuple(inf for _ in child_bag)
            return ckey.r_in[cidx[v]][t]

        for combo in itertools.product(*image_lists):
            counter[0] += 1
            if counter[0] > ctx.caps.tw_states:
                raise CapExceeded(
                    f"introduce node candidate count exceeded {ctx.caps.tw_states}"
                )
            new_cost = sum(c for _img, c in combo)
            if child_cost + new_cost + czb > ctx.zeta:
                continue
            p_map = {e: img for e, (img, _c) in zip(new_edges, combo)}
            for e in edges_child:
                p_map[e] = ckey.p[old_pos[e]]
            p_s = tuple(p_map[e] for e in edges_s)
            uw_labels = {w: p_map[(min(u, w), max(u, w))] for w in nbrs}

            # arrivals at u from each bag vertex & departure time; the trivial
            # self-arrival at w == v encodes "first edge at >= t", every other
            # arrival is a real edge and forces strictly-later continuation
            arr_at_u = [[inf] * (horizon + 1) for _ in bs]
            for v in bs:
                row = arr_at_u[vidx[v]]
                for t in times:
                    if v == u:
                        row[t] = t
                        continue
                    best = inf
                    cr = crin(v, t)
                    for w in nbrs:
                        aw = cr[cidx[w]]
                        if aw >= inf:
                            continue
                        if w == v:
                            cand = _first_label_at_or_after(uw_labels[w], aw, inf)
                        else:
                            cand = _first_label_after(uw_labels[w], aw, inf)
                        if cand < best:
                            best = cand
                    row[t] = best

            # arrivals from u departing >= t, to every bag vertex
            from_u = [[inf] * len(bs) for _ in range(horizon + 1)]
            for t in times:
                row = from_u[t]
                row[u_i] = t
                tw = {
                    w: _first_label_at_or_after(uw_labels[w], t, inf) for w in nbrs
                }
                for v in bs:
                    if v == u:
                        continue
                    best = tw[v] if v in tw else inf
                    for w in nbrs:
                        if w == v or tw[w] >= inf:
                            continue
                        aw = crin(w, tw[w] + 1)[cidx[v]]
                        if aw < best:
                            best = aw
                    row[vidx[v]] = best

            def from_u_at(dep: int) -> list[int]:
                if dep <= horizon:
                    return from_u[dep]
                return [dep if i == u_i else inf for i in range(len(bs))]

            rin_rows = []
            for v in bs:
                per_t = []
                for t in times:
                    if v == u:
                        per_t.append(tuple(from_u[t]))
                        continue
                    au = arr_at_u[vidx[v]][t]
                    via_u = from_u_at(au + 1) if au < inf else None
                    cr = crin(v, t)
                    row = []
                    for x in bs:
                        if x == u:
                            row.append(au)
                            continue
                        val = cr[cidx[x]]
                        if via_u is not None and via_u[vidx[x]] < val:
                            val = via_u[vidx[x]]
                        row.append(val)
                    per_t.append(tuple(row))
                rin_rows.append(tuple(per_t))
            rin_s = tuple(rin_rows)

            rbelow = []
            for uu in u_all:
                du = uu[u_i]
                reach_u = from_u_at(du) if du <= horizon else None
                child_u = []
                for v in child_bag:
                    val = uu[vidx[v]]
                    if reach_u is not None:
                        via = reach_u[vidx[v]]
                        if via < inf and via + 1 < val:
                            val = ctx.norm(via + 1)
                    child_u.append(ctx.norm(val))
                rbelow.append(ckey.r_below[child_uidx[tuple(child_u)]])
            state = TwState(p_s, rin_s, tuple(rbelow), czb)
            if state not in out:
                out[state] = (ckey,)
    return out


def _forget_states(
    ctx: _Ctx, bag: tuple[int, ...], u: int, child_bag: tuple[int, ...],
    child_states: dict[TwState, tuple], counter: list[int],
) -> dict[TwState, tuple]:
    g, horizon, inf = ctx.g, ctx.horizon, ctx.inf
    cidx = {v: i for i, v in enumerate(child_bag)}
    u_i = cidx[u]
    edges_s = ctx.bag_edges(bag)
    edges_child = ctx.bag_edges(child_bag)
    child_pos = {e: i for i, e in enumerate(edges_child)}
    keep_cols = [cidx[v] for v in bag]
    u_all = ctx.u_enum(bag)
    child_uidx = ctx.u_index(child_bag)
    out: dict[TwState, tuple] = {}
    for ckey in sorted(child_states):
        counter[0] += 1
        if counter[0] > ctx.caps.tw_states:
            raise CapExceeded(f"forget node candidate count exceeded {ctx.caps.tw_states}")
        forgotten_cost = 0
        for e in edges_child:
            if u in e:
                ei = g.edge_index[e]
                forgotten_cost += minimal_moves(
                    g.labels[ei], ckey.p[child_pos[e]], ctx.delta
                )
        zb = ckey.zeta_below + forgotten_cost
        p_s = tuple(ckey.p[child_pos[e]] for e in edges_s)
        rin_s = tuple(
            tuple(tuple(row[c] for c in keep_cols) for row in ckey.r_in[cidx[v]])
            for v in bag
        )
        rbelow = []
        for uu in u_all:
            t2 = inf
            for j, v in enumerate(bag):
                dv = uu[j]
                if dv > horizon:
                    continue
                a = ckey.r_in[cidx[v]][dv][u_i]
                if a < t2:
                    t2 = a
            if t2 <= horizon:
                ext = _insert_at(uu, keep_cols, u_i, ctx.norm(t2 + 1), len(child_bag))
                val = min(ckey.r_below[child_uidx[ext]] + 1, ctx.h)
            else:
                ext = _insert_at(uu, keep_cols, u_i, inf, len(child_bag))
                val = ckey.r_below[child_uidx[ext]]
            rbelow.append(val)
        state = TwState(p_s, rin_s, tuple(rbelow), zb)
        if state not in out:
            out[state] = (ckey,)
    return out


def _insert_at(
    uu: tuple[int, ...], keep_cols: list[int], u_col: int, val: int, size: int
) -> tuple[int, ...]:
    full = [0] * size
    for j, c in enumerate(keep_cols):
        full[c] = uu[j]
    full[u_col] = val
    return tuple(full)


def join_rounds(bag_size: int) -> int:
    return ceil(log2(bag_size)) if bag_size > 1 else 0


def _join_rin(
    ctx: _Ctx, bag: tuple[int, ...], r1, r2, rounds: Optional[int] = None
):
    """Iterated stitching of the two sides' arrival functions."""
    horizon, inf = ctx.horizon, ctx.inf
    k = len(bag)
    cur = [
        [tuple(min(a, b) for a, b in zip(r1[i][t], r2[i][t])) for t in range(horizon + 1)]
        for i in range(k)
    ]
    steps = join_rounds(k) if rounds is None else rounds

    def lookup(rows, x_i: int, dep: int):
        if dep <= horizon:
            return rows[x_i][dep]
        return tuple(dep if j == x_i else inf for j in range(k))

    for _ in range(steps):
        nxt = []
        for i in range(k):
            per_t = []
            for t in range(horizon + 1):
                base = cur[i][t]
                best = list(base)
                for x_i in range(k):
                    ax = base[x_i]
                    if ax >= inf:
                        continue
                    via = lookup(cur, x_i, ax + 1)
                    for j in range(k):
                        if via[j] < best[j]:
                            best[j] = via[j]
                per_t.append(tuple(best))
            nxt.append(per_t)
        cur = nxt
    return tuple(tuple(row) for row in cur)


def _join_states(
    ctx: _Ctx, bag: tuple[int, ...],
    left: dict[TwState, tuple], right: dict[TwState, tuple], counter: list[int],
) -> dict[TwState, tuple]:
    horizon, inf = ctx.horizon, ctx.inf
    edges_s = ctx.bag_edges(bag)
    u_all = ctx.u_enum(bag)
    uidx = ctx.u_index(bag)
    by_p_right: dict[tuple, list[TwState]] = {}
    for rkey in sorted(right):
        by_p_right.setdefault(rkey.p, []).append(rkey)
    out: dict[TwState, tuple] = {}
    for lkey in sorted(left):
        for rkey in by_p_right.get(lkey.p, ()):
            counter[0] += 1
            if counter[0] > ctx.caps.tw_states:
                raise CapExceeded(
                    f"join node candidate count exceeded {ctx.caps.tw_states}"
                )
            zb = lkey.zeta_below + rkey.zeta_below
            if _bag_cost(ctx, edges_s, lkey.p) + zb > ctx.zeta:
                continue
            rin = _join_rin(ctx, bag, lkey.r_in, rkey.r_in)
            rbelow = []
            for uu in u_all:
                uprime = []
                for j, v in enumerate(bag):
                    val = uu[j]
                    for i2, w in enumerate(bag):
                        dw = uu[i2]
                        if dw > horizon:
                            continue
                        a = rin[i2][dw][j]
                        if a < inf and a + 1 < val:
                            val = ctx.norm(a + 1)
                    uprime.append(ctx.norm(val))
                key = uidx[tuple(uprime)]
                rbelow.append(min(lkey.r_below[key] + rkey.r_below[key], ctx.h))
            state = TwState(lkey.p, rin, tuple(rbelow), zb)
            if state not in out:
                out[state] = (lkey, rkey)
    return out


def valid_states(
    inst: TrlpInstance,
    nice: NiceDecomposition,
    node_id: int,
    child_state_sets: tuple[dict, ...],
    caps: WorkCaps = DEFAULT_CAPS,
    counter: Optional[list[int]] = None,
) -> dict[TwState, tuple]:
    """All valid states of one nice-decomposition node given its children's
    state sets (keys are states; values are witnessing child-state tuples)."""
    ctx = _Ctx(inst, caps)
    return _node_states(ctx, nice, node_id, child_state_sets, counter or [0])


def _node_states(ctx, nice, node_id, child_state_sets, counter):
    node = nice.nodes[node_id]
    if node.kind == "leaf":
        return {_leaf_state(ctx): ()}
    if node.kind == "introduce":
        child = nice.nodes[node.children[0]]
        return _introduce_states(
            ctx, node.bag, node.vertex, child.bag, child_state_sets[0], counter
        )
    if node.kind == "forget":
        child = nice.nodes[node.children[0]]
        return _forget_states(
            ctx, node.bag, node.vertex, child.bag, child_state_sets[0], counter
        )
    return _join_states(ctx, node.bag, child_state_sets[0], child_state_sets[1], counter)


def _solve_for_source(
    inst: TrlpInstance, nice: NiceDecomposition, source: int, caps: WorkCaps
) -> Optional[SolveResult]:
    ctx = _Ctx(inst, caps)
    counter = [0]
    states: list[dict[TwState, tuple]] = []
    for node_id, node in enumerate(nice.nodes):
        kids = tuple(states[c] for c in node.children)
        states.append(_node_states(ctx, nice, node_id, kids, counter))
        if not states[-1] and node.kind != "leaf":
            return None
    root = nice.root
    root_bag = nice.nodes[root].bag
    assert root_bag == (source,)
    uidx = ctx.u_index(root_bag)
    zero = uidx[(0,)]
    accepted = None
    for key in sorted(states[root]):
        if key.r_below[zero] >= inst.h - 1:
            accepted = key
            break
    if accepted is None:
        return None
    images = _collect_images(inst, nice, states, accepted)
    records = []
    for e, image in sorted(images.items()):
        ei = inst.graph.edge_index[e]
        if image != inst.graph.labels[ei]:
            recs = matching_records(e, inst.graph.labels[ei], image, inst.delta)
            records.extend(r for r in recs if r[1] != r[2])
    cert = Perturbation(inst.delta, inst.zeta, tuple(sorted(records)))
    perturbed = apply_perturbation(inst.graph, cert)
    count = sum(1 for a in arrivals(perturbed, source) if a is not None)
    assert count >= inst.h
    return SolveResult(
        True, "treewidth", source=source, reach_count=count, perturbation=cert
    )


def _collect_images(inst, nice, states, root_key) -> dict[Edge, tuple[int, ...]]:
    ctx = _Ctx(inst, DEFAULT_CAPS)
    images: dict[Edge, tuple[int, ...]] = {}
    stack = [(nice.root, root_key)]
    while stack:
        node_id, key = stack.pop()
        node = nice.nodes[node_id]
        for e, image in zip(ctx.bag_edges(node.bag), key.p):
            prev = images.get(e)
            assert prev is None or prev == image
            images[e] = image
        witness = states[node_id][key]
        for child_id, child_key in zip(node.children, witness):
            stack.append((child_id, child_key))
    for e, ts in zip(inst.graph.edges, inst.graph.labels):
        images.setdefault(e, ts)
    return images


def solve_trlp_treewidth(
    inst: TrlpInstance,
    decomp: TreeDecomposition,
    caps: WorkCaps = DEFAULT_CAPS,
) -> SolveResult:
    """Exact answer over all sources; smallest yes-source wins."""
    g = inst.graph
    for source in range(g.n):
        nice = make_nice(decomp, source, g.n, g.edges)
        res = _solve_for_source(inst, nice, source, caps)
        if res is not None:
            return res
    return SolveResult(False, "treewidth")
