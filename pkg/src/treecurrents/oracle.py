"""Exhaustive ground truth on desk-size graphs.

Enumerates weighted spanning trees, two-component spanning forests and
spanning unicycles by scanning edge subsets of the right cardinality with a
union-find acyclicity/connectivity check.  On wired graphs the boundary is
contracted to a single node first, so "tree" means a spanning tree of the
sink-contracted graph, matching every wired determinant in this package.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .util import ValidationError

DEFAULT_EDGE_CAP = 14


def contracted_index_map(graph):
    """Vertex id -> contracted index; all boundary vertices share index 0."""
    vmap = {}
    nxt = 0
    if graph.boundary:
        for v in graph.boundary:
            vmap[v] = 0
        nxt = 1
    for v in graph.vertex_ids:
        if v not in vmap:
            vmap[v] = nxt
            nxt += 1
    return vmap, nxt


class _UnionFind:
    def __init__(self, n):
        self.p = list(range(n))

    def find(self, a):
        while self.p[a] != a:
            self.p[a] = self.p[self.p[a]]
            a = self.p[a]
        return a

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.p[ra] = rb
        return True


@dataclass
class EnumerationResult:
    """Complete weighted list of subgraphs of one kind."""

    kind: str
    edge_order: tuple
    subgraphs: list = field(repr=False)        # frozensets of edge ids
    weights: np.ndarray = field(repr=False)
    masks: np.ndarray = field(repr=False)      # bitmask over edge_order

    @property
    def total(self):
        return float(self.weights.sum())

    def event_prob(self, predicate):
        """Weighted fraction of enumerated subgraphs satisfying the predicate."""
        if not self.subgraphs:
            return 0.0
        sel = np.fromiter((bool(predicate(s)) for s in self.subgraphs),
                          dtype=bool, count=len(self.subgraphs))
        return float(self.weights[sel].sum() / self.total)

    def containment_prob(self, edge_ids):
        """Weighted fraction of subgraphs containing all the given edges."""
        bit = {e: 1 << i for i, e in enumerate(self.edge_order)}
        m = 0
        for e in edge_ids:
            m |= bit[e]
        hit = (self.masks & m) == m
        return float(self.weights[hit].sum() / self.total)


def enumerate_subgraphs(graph, kind, edge_cap=DEFAULT_EDGE_CAP):
    """Enumerate spanning trees ('tree'), 2-component spanning forests
    ('2sf') or spanning unicycles ('unicycle'), weighted by edge products.
    """
    if graph.ne > edge_cap:
        raise ValidationError(f"enumeration capped at {edge_cap} edges "
                              f"(graph has {graph.ne})")
    vmap, n = contracted_index_map(graph)
    ends = [(vmap[int(graph.edge_u[j])], vmap[int(graph.edge_v[j])])
            for j in range(graph.ne)]
    m = graph.ne

    if kind == "tree":
        size, need_acyclic, ncomp = n - 1, True, 1
    elif kind == "2sf":
        size, need_acyclic, ncomp = n - 2, True, 2
    elif kind == "unicycle":
        size, need_acyclic, ncomp = n, False, 1
    else:
        raise ValidationError(f"unknown kind {kind!r}")
    if size < 0:
        return EnumerationResult(kind, graph.edge_ids, [],
                                 np.zeros(0), np.zeros(0, np.uint64))

    subgraphs, weights, masks = [], [], []
    for combo in combinations(range(m), size):
        uf = _UnionFind(n)
        acyclic = True
        merges = 0
        for j in combo:
            a, b = ends[j]
            if a == b or not uf.union(a, b):
                acyclic = False
                if need_acyclic:
                    break
            else:
                merges += 1
        if need_acyclic and not acyclic:
            continue
        if n - merges != ncomp:
            continue
        if kind == "unicycle" and acyclic:
            continue  # |B| = |V| and acyclic cannot happen, but keep explicit
        subgraphs.append(frozenset(graph.edge_ids[j] for j in combo))
        weights.append(float(np.prod([graph.edge_c[j] for j in combo]))
                       if combo else 1.0)
        masks.append(sum(1 << j for j in combo))
    return EnumerationResult(kind, graph.edge_ids, subgraphs,
                             np.array(weights), np.array(masks, np.uint64))


def unicycle_cycle(graph, edge_ids):
    """The unique cycle of a unicycle edge set, as an ordered dart list.

    Orientation is fixed by the lowest-edge-id rule: the smallest edge id on
    the cycle is traversed in its stored direction.  Free graphs only.
    """
    if graph.boundary:
        raise ValidationError("cycle extraction implemented for free graphs")
    deg = {v: 0 for v in graph.vertex_ids}
    inc = {v: [] for v in graph.vertex_ids}
    for e in edge_ids:
        u, v = graph.edge_endpoints(e)
        deg[u] += 1
        deg[v] += 1
        inc[u].append((e, v))
        inc[v].append((e, u))
    live = set(edge_ids)
    leaves = [v for v in graph.vertex_ids if deg[v] == 1]
    while leaves:
        v = leaves.pop()
        for e, o in inc[v]:
            if e in live:
                live.discard(e)
                deg[v] -= 1
                deg[o] -= 1
                if deg[o] == 1:
                    leaves.append(o)
                break
    if not live:
        raise ValidationError("edge set has no cycle")
    start = min(live)
    u, v = graph.edge_endpoints(start)
    darts = [graph.dart(start, forward=True)]
    live.discard(start)
    cur = v
    while cur != u:
        for e, o in inc[cur]:
            if e in live:
                live.discard(e)
                eu, ev = graph.edge_endpoints(e)
                darts.append(graph.dart(e, forward=(eu == cur)))
                cur = o
                break
        else:
            raise ValidationError("cycle walk failed; not a unicycle")
    if live:
        raise ValidationError("more than one cycle; not a unicycle")
    return darts
