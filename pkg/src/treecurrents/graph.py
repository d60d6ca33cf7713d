"""Embedded weighted graphs with boundary, and the discrete calculus on them.

A graph is a finite connected multigraph (parallel edges allowed, self-loops
rejected) whose vertices carry coordinates in R^d and whose edges carry
positive conductances.  A subset of vertices may be marked as boundary; the
wired convention grounds functions there.  Vertex and edge ids are stable
integers; every matrix produced from a graph is indexed by the frozen
vertex/edge ordering recorded at construction.

Directed-edge convention: the positive orientation of edge (u, v) is the
pair with head u and tail v, and a 1-form evaluates with opposite signs on
the two orientations.  The derivative of a vertex function f along (u, v)
is f(v) - f(u).
"""

from __future__ import annotations

import hashlib
import json
from typing import NamedTuple

import numpy as np
import scipy.sparse as sp

from .util import ValidationError


class DirectedEdge(NamedTuple):
    """Orientation of an edge: ``head`` is the first endpoint of the pair."""

    eid: int
    head: int
    tail: int

    def reversed(self):
        return DirectedEdge(self.eid, self.tail, self.head)


class WeightedGraph:
    """Immutable embedded weighted multigraph with optional boundary.

    Parameters
    ----------
    vertices : sequence of (id, position) pairs
        Positions are coordinate sequences, all of one dimension d.
    edges : sequence of (id, u, v, c)
        Unordered pairs with conductance c > 0; (u, v) fixes the positive
        orientation.  Self-loops are rejected.
    boundary : iterable of vertex ids
        The grounded set (may be empty).
    rotation : dict vertex id -> sequence of edge ids, optional
        Counterclockwise cyclic order of incident edges; required for planar
        duals.  Validated as a sphere embedding unless ``validate_rotation``
        is False (periodic graphs carry no rotation system).
    """

    def __init__(self, vertices, edges, boundary=(), rotation=None,
                 validate=True, validate_rotation=True):
        vertices = list(vertices)
        self.vertex_ids = tuple(vid for vid, _ in vertices)
        self.pos = {vid: np.asarray(p, dtype=float) for vid, p in vertices}
        self.edge_ids = tuple(e[0] for e in edges)
        self.edge_u = np.array([e[1] for e in edges], dtype=np.int64)
        self.edge_v = np.array([e[2] for e in edges], dtype=np.int64)
        self.edge_c = np.array([e[3] for e in edges], dtype=float)
        self.boundary = frozenset(boundary)
        self.rotation = ({int(v): tuple(r) for v, r in rotation.items()}
                         if rotation else None)

        self._vx = {v: i for i, v in enumerate(self.vertex_ids)}
        self._ex = {e: j for j, e in enumerate(self.edge_ids)}
        self.interior = tuple(v for v in self.vertex_ids if v not in self.boundary)
        self._ix = {v: i for i, v in enumerate(self.interior)}

        # darts incident to each vertex: (edge index, other endpoint, +1 if the
        # stored orientation leaves this vertex)
        self._inc = {v: [] for v in self.vertex_ids}
        for j in range(len(self.edge_ids)):
            u, v = int(self.edge_u[j]), int(self.edge_v[j])
            self._inc[u].append((j, v, +1))
            self._inc[v].append((j, u, -1))

        if validate:
            self._validate(validate_rotation)

    # -- structure -----------------------------------------------------

    @property
    def nv(self):
        return len(self.vertex_ids)

    @property
    def ne(self):
        return len(self.edge_ids)

    @property
    def dim(self):
        return len(next(iter(self.pos.values())))

    def is_boundary(self, v):
        return v in self.boundary

    def vertex_index(self, v):
        return self._vx[v]

    def interior_index(self, v):
        return self._ix[v]

    def edge_index(self, eid):
        return self._ex[eid]

    def edge_endpoints(self, eid):
        j = self._ex[eid]
        return int(self.edge_u[j]), int(self.edge_v[j])

    def weight(self, eid):
        return float(self.edge_c[self._ex[eid]])

    def dart(self, eid, forward=True):
        u, v = self.edge_endpoints(eid)
        return DirectedEdge(eid, u, v) if forward else DirectedEdge(eid, v, u)

    def incident(self, v):
        """Darts at v as (edge id, other endpoint, conductance, sign)."""
        return [(self.edge_ids[j], o, float(self.edge_c[j]), s)
                for j, o, s in self._inc[v]]

    def degree_c(self, v):
        return float(sum(self.edge_c[j] for j, _, _ in self._inc[v]))

    def degree(self, v):
        return len(self._inc[v])

    def edge_midpoint(self, eid):
        u, v = self.edge_endpoints(eid)
        return 0.5 * (self.pos[u] + self.pos[v])

    def edge_vector(self, eid):
        u, v = self.edge_endpoints(eid)
        return self.pos[v] - self.pos[u]

    def with_weights(self, new_c):
        """Copy with conductances replaced (dict eid -> c or full array)."""
        if isinstance(new_c, dict):
            c = self.edge_c.copy()
            for eid, w in new_c.items():
                c[self._ex[eid]] = w
        else:
            c = np.asarray(new_c, dtype=float)
        edges = [(self.edge_ids[j], int(self.edge_u[j]), int(self.edge_v[j]), float(c[j]))
                 for j in range(self.ne)]
        return WeightedGraph([(v, self.pos[v]) for v in self.vertex_ids], edges,
                             self.boundary, self.rotation, validate=False)

    # -- validation ------------------------------------------------------

    def _validate(self, validate_rotation):
        if self.nv == 0:
            raise ValidationError("graph has no vertices")
        d = self.dim
        for v in self.vertex_ids:
            if self.pos[v].shape != (d,):
                raise ValidationError(f"vertex {v}: position dimension != {d}")
        for j, eid in enumerate(self.edge_ids):
            u, v = int(self.edge_u[j]), int(self.edge_v[j])
            if u == v:
                raise ValidationError(f"edge {eid}: self-loop at vertex {u}")
            if u not in self._vx or v not in self._vx:
                raise ValidationError(f"edge {eid}: unknown endpoint {u if u not in self._vx else v}")
            if not self.edge_c[j] > 0:
                raise ValidationError(f"edge {eid}: non-positive weight {self.edge_c[j]}")
        for v in self.boundary:
            if v not in self._vx:
                raise ValidationError(f"boundary vertex {v} not in vertex set")
        if not self._connected():
            raise ValidationError("graph is not connected")
        if self.rotation is not None and validate_rotation:
            self.validate_rotation()

    def _connected(self):
        if self.nv == 1:
            return True
        seen = {self.vertex_ids[0]}
        stack = [self.vertex_ids[0]]
        while stack:
            v = stack.pop()
            for _, o, _ in self._inc[v]:
                if o not in seen:
                    seen.add(o)
                    stack.append(o)
        return len(seen) == self.nv

    def validate_rotation(self):
        """Check the rotation system is a sphere embedding (Euler count)."""
        from .planar import trace_faces  # local import: planar builds on graph

        for v in self.vertex_ids:
            if v not in self.rotation:
                raise ValidationError(f"rotation system missing vertex {v}")
            incident = sorted(self.edge_ids[j] for j, _, _ in self._inc[v])
            if sorted(self.rotation[v]) != incident:
                raise ValidationError(f"rotation at vertex {v} is not a permutation "
                                      f"of its incident edges")
        faces = trace_faces(self)
        nf = len(faces)
        if self.nv - self.ne + nf != 2:
            raise ValidationError(f"rotation system is not planar: V-E+F = "
                                  f"{self.nv}-{self.ne}+{nf} != 2")

    # -- serialization ---------------------------------------------------

    def to_json(self):
        doc = {
            "dim": self.dim,
            "vertices": [{"id": v, "pos": [float(x) for x in self.pos[v]],
                          "boundary": v in self.boundary}
                         for v in self.vertex_ids],
            "edges": [{"id": self.edge_ids[j], "u": int(self.edge_u[j]),
                       "v": int(self.edge_v[j]), "c": float(self.edge_c[j])}
                      for j in range(self.ne)],
        }
        if self.rotation is not None:
            doc["rotation"] = {str(v): list(r) for v, r in self.rotation.items()}
        return doc

    @classmethod
    def from_json(cls, doc, validate_rotation=True):
        vertices = [(rec["id"], rec["pos"]) for rec in doc["vertices"]]
        boundary = [rec["id"] for rec in doc["vertices"] if rec.get("boundary")]
        edges = [(rec["id"], rec["u"], rec["v"], rec["c"]) for rec in doc["edges"]]
        rotation = doc.get("rotation")
        if rotation is not None:
            rotation = {int(v): r for v, r in rotation.items()}
        return cls(vertices, edges, boundary, rotation,
                   validate_rotation=validate_rotation)

    def content_hash(self):
        return hashlib.sha256(
            json.dumps(self.to_json(), sort_keys=True).encode()).hexdigest()[:16]


class VertexFunction:
    """Real function on vertices, zero on the boundary unless supplied."""

    def __init__(self, graph, values=None):
        self.graph = graph
        self.values = np.zeros(graph.nv) if values is None else np.asarray(values, float)

    @classmethod
    def from_interior(cls, graph, interior_values):
        f = cls(graph)
        for v, x in zip(graph.interior, np.asarray(interior_values, float)):
            f.values[graph.vertex_index(v)] = x
        return f

    @classmethod
    def from_dict(cls, graph, d):
        f = cls(graph)
        for v, x in d.items():
            f.values[graph.vertex_index(v)] = x
        return f

    def __call__(self, v):
        return float(self.values[self.graph.vertex_index(v)])

    def interior_values(self):
        return np.array([self(v) for v in self.graph.interior])


class OneForm:
    """Antisymmetric function on directed edges, stored on positive reps."""

    def __init__(self, graph, values=None):
        self.graph = graph
        self.values = np.zeros(graph.ne) if values is None else np.asarray(values, float)

    @classmethod
    def edge_indicator(cls, graph, dart):
        """The 1-form of a directed edge (value +1 along it, -1 reversed)."""
        if isinstance(dart, DirectedEdge):
            eid, head = dart.eid, dart.head
        else:
            eid, head = dart, graph.edge_endpoints(dart)[0]
        a = cls(graph)
        u, _ = graph.edge_endpoints(eid)
        a.values[graph.edge_index(eid)] = 1.0 if head == u else -1.0
        return a

    def on(self, dart):
        """Evaluate on a directed edge; sign flips with orientation."""
        u, _ = self.graph.edge_endpoints(dart.eid)
        x = float(self.values[self.graph.edge_index(dart.eid)])
        return x if dart.head == u else -x


def derivative(graph, f):
    """Discrete derivative: (df)(u, v) = f(v) - f(u) on positive reps."""
    if isinstance(f, dict):
        f = VertexFunction.from_dict(graph, f)
    vals = f.values
    rows_u = np.array([graph.vertex_index(int(u)) for u in graph.edge_u])
    rows_v = np.array([graph.vertex_index(int(v)) for v in graph.edge_v])
    return OneForm(graph, vals[rows_v] - vals[rows_u])


def coderivative(graph, alpha):
    """Weighted divergence d* on interior vertices.

    d*a(v) sums c(v'v) a(v'v) over darts pointing into v; adjoint to the
    derivative for the interior/edge inner products.
    """
    out = np.zeros(graph.nv)
    c, a = graph.edge_c, alpha.values
    for j in range(graph.ne):
        out[graph.vertex_index(int(graph.edge_v[j]))] += c[j] * a[j]
        out[graph.vertex_index(int(graph.edge_u[j]))] -= c[j] * a[j]
    f = VertexFunction(graph, out)
    for v in graph.boundary:
        f.values[graph.vertex_index(v)] = 0.0
    return f


def laplacian(graph, bc="wired"):
    """Weighted graph Laplacian as a sparse CSR matrix.

    ``wired``: rows and columns indexed by interior vertices, boundary
    neighbours contributing to the diagonal only (grounded).  ``free``:
    indexed by all vertices, boundary labels ignored.
    """
    if bc == "wired":
        index = graph._ix
        n = len(graph.interior)
    elif bc == "free":
        index = graph._vx
        n = graph.nv
    else:
        raise ValidationError(f"unknown boundary condition {bc!r}")
    rows, cols, vals = [], [], []
    for j in range(graph.ne):
        u, v, c = int(graph.edge_u[j]), int(graph.edge_v[j]), graph.edge_c[j]
        iu, iv = index.get(u), index.get(v)
        if iu is not None:
            rows.append(iu); cols.append(iu); vals.append(c)
        if iv is not None:
            rows.append(iv); cols.append(iv); vals.append(c)
        if iu is not None and iv is not None:
            rows.append(iu); cols.append(iv); vals.append(-c)
            rows.append(iv); cols.append(iu); vals.append(-c)
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))


def inner_vertex(graph, f, g):
    """Euclidean inner product over interior vertices."""
    return float(np.dot(f.interior_values(), g.interior_values()))


def inner_form(graph, a, b):
    """c-weighted inner product of 1-forms (half-sum over orientations)."""
    return float(np.sum(graph.edge_c * a.values * b.values))
