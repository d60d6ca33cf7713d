"""Face tracing and planar duals from rotation systems.

Faces are traced so that every directed edge lies in exactly one face, the
face sitting on its left (bounded faces come out counterclockwise, the outer
face clockwise).  The dual edge of e is directed from the right face to the
left face of e's positive orientation, so the frame (e, e*) is positively
oriented, and it carries weight 1/c(e).  Dual edges reuse the primal edge
ids, which makes the e <-> e* correspondence an identity on ids.
"""

from __future__ import annotations

import numpy as np

from .graph import DirectedEdge, WeightedGraph
from .util import ValidationError


def trace_faces(graph):
    """All faces of the embedding as tuples of darts.

    From a dart arriving at w via edge e, the face continues along the
    predecessor of e in the counterclockwise rotation at w (the next edge
    clockwise), which keeps the traced face on the left of every dart.
    Raises if the graph has no rotation system.
    """
    if graph.rotation is None:
        raise ValidationError("face tracing requires a rotation system")
    succ = {}
    for v, order in graph.rotation.items():
        for i, eid in enumerate(order):
            succ[(v, eid)] = order[(i - 1) % len(order)]

    unused = set()
    for eid in graph.edge_ids:
        u, v = graph.edge_endpoints(eid)
        unused.add((eid, u))
        unused.add((eid, v))

    faces = []
    while unused:
        eid, head = min(unused)
        start = (eid, head)
        face = []
        cur = start
        while True:
            face.append(cur)
            unused.discard(cur)
            ceid, chead = cur
            u, v = graph.edge_endpoints(ceid)
            w = v if chead == u else u  # arrival vertex
            neid = succ[(w, ceid)]
            cur = (neid, w)
            if cur == start:
                break
            if len(face) > 4 * graph.ne:
                raise ValidationError("face tracing does not terminate; "
                                      "rotation system is inconsistent")
        faces.append(tuple(DirectedEdge(e, h, _other(graph, e, h)) for e, h in face))
    return faces


def _other(graph, eid, head):
    u, v = graph.edge_endpoints(eid)
    return v if head == u else u


def face_signed_area(graph, face):
    """Shoelace area of the face polygon (positive for ccw bounded faces)."""
    pts = [graph.pos[d.head] for d in face]
    a = 0.0
    for i in range(len(pts)):
        x0, y0 = pts[i][0], pts[i][1]
        x1, y1 = pts[(i + 1) % len(pts)][0], pts[(i + 1) % len(pts)][1]
        a += x0 * y1 - x1 * y0
    return 0.5 * a


class PlanarDual:
    """Planar dual of an embedded graph, with the face bookkeeping.

    Attributes
    ----------
    graph : WeightedGraph
        The dual graph; dual edge ids equal the primal ids, weights 1/c.
    faces : list of dart tuples
    outer_face : int
        Index of the unbounded face (most negative signed area).
    """

    def __init__(self, primal):
        if primal.rotation is None:
            raise ValidationError("planar dual requires a rotation system")
        self.primal = primal
        self.faces = trace_faces(primal)
        areas = [face_signed_area(primal, f) for f in self.faces]
        self.outer_face = int(np.argmin(areas))

        # face on the left of each dart
        self.left = {}
        for fi, face in enumerate(self.faces):
            for d in face:
                self.left[(d.eid, d.head)] = fi

        centroids = []
        for face in self.faces:
            pts = np.array([primal.pos[d.head] for d in face])
            centroids.append(pts.mean(axis=0))

        edges = []
        for eid in primal.edge_ids:
            u, v = primal.edge_endpoints(eid)
            fl = self.left[(eid, u)]
            fr = self.left[(eid, v)]
            if fl == fr:
                raise ValidationError(f"edge {eid} is a bridge; its dual would "
                                      f"be a self-loop")
            edges.append((eid, fr, fl, 1.0 / primal.weight(eid)))

        # dual rotation at a face = its boundary darts in trace order
        rotation = {fi: tuple(d.eid for d in face)
                    for fi, face in enumerate(self.faces)}
        self.graph = WeightedGraph(
            [(fi, centroids[fi]) for fi in range(len(self.faces))],
            edges, boundary=(), rotation=rotation)

    def dual_dart(self, eid):
        """Positive orientation of e*: right face -> left face of e."""
        return self.graph.dart(eid, forward=True)

    def without_outer(self):
        """Dual with the outer-face vertex deleted.

        Returns (graph, kept edge ids).  This is the dual of the primal with
        its outer boundary contracted to a sink; only primal edges not
        bordering the outer face survive.
        """
        keep = [eid for eid in self.graph.edge_ids
                if self.outer_face not in self.graph.edge_endpoints(eid)]
        verts = [(v, self.graph.pos[v]) for v in self.graph.vertex_ids
                 if v != self.outer_face]
        edges = [(eid, *self.graph.edge_endpoints(eid), self.graph.weight(eid))
                 for eid in keep]
        g = WeightedGraph(verts, edges, boundary=())
        return g, keep

    def enclosed_faces(self, cycle_eids):
        """Bounded faces enclosed by a primal cycle.

        The cycle's dual crossings are removed from the dual; enclosed faces
        are those cut off from the outer face.
        """
        cut = set(cycle_eids)
        adj = {v: [] for v in self.graph.vertex_ids}
        for eid in self.graph.edge_ids:
            if eid in cut:
                continue
            a, b = self.graph.edge_endpoints(eid)
            adj[a].append(b)
            adj[b].append(a)
        seen = {self.outer_face}
        stack = [self.outer_face]
        while stack:
            f = stack.pop()
            for o in adj[f]:
                if o not in seen:
                    seen.add(o)
                    stack.append(o)
        return frozenset(v for v in self.graph.vertex_ids if v not in seen)

    def dual_path_crossings(self, face, to_face=None):
        """Primal darts crossed by a dual path from ``to_face`` to ``face``.

        The path is found in the dual graph (BFS, deterministic order);
        ``to_face`` defaults to the outer face.  Each crossed primal edge is
        oriented so that its dual dart agrees with the path step, i.e. the
        path crosses it left-to-right.
        """
        src = self.outer_face if to_face is None else to_face
        prev = {src: None}
        order = [src]
        qi = 0
        while qi < len(order):
            f = order[qi]
            qi += 1
            for eid, other, _, sign in self.graph.incident(f):
                if other not in prev:
                    prev[other] = (f, eid, sign)
                    order.append(other)
        if face not in prev:
            raise ValidationError(f"face {face} unreachable in dual")
        darts = []
        f = face
        while prev[f] is not None:
            pf, eid, sign = prev[f]
            # step pf -> f along the dual; sign +1 when that is e*'s direction
            u, v = self.primal.edge_endpoints(eid)
            darts.append(DirectedEdge(eid, u, v) if sign > 0
                         else DirectedEdge(eid, v, u))
            f = pf
        return darts


def planar_dual(graph):
    """Dual WeightedGraph of an embedded planar graph (weights 1/c)."""
    return PlanarDual(graph).graph
