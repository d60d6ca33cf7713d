"""Green operators and transfer currents, with the planar duality check.

The wired Green function inverts the Laplacian on interior vertices and is
extended by zero to the boundary; the free Green function is the
mean-zero-gauge pseudo-inverse on all vertices.  The transfer current
between directed edges (a,b) and (u,v) is

    T(ab, uv) = c(uv) (G(a,u) - G(b,u) - G(a,v) + G(b,v)),

stored on positive edge representatives with signs extended by antisymmetry
in both slots.  K(e,f) = sqrt(c(e)/c(f)) T(e,f) is the symmetric kernel; it
is the matrix of an orthogonal projection, which the validation helpers
check explicitly.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg as sla
import scipy.sparse.linalg as spla

from .graph import DirectedEdge, OneForm, coderivative, derivative, laplacian
from .planar import PlanarDual
from .util import TOL_FACTORED, ValidationError

DENSE_LIMIT = 4000
_GREEN_CACHE = {}


class GreenOperator:
    """Factorized inverse Laplacian with cached column solves."""

    def __init__(self, graph, bc):
        if bc not in ("wired", "free"):
            raise ValidationError(f"unknown boundary condition {bc!r}")
        if bc == "wired" and not graph.boundary:
            raise ValidationError("wired Green function requires a nonempty boundary")
        self.graph = graph
        self.bc = bc
        self._cols = {}

        if bc == "wired":
            self._support = graph.interior
            self._sx = {v: i for i, v in enumerate(self._support)}
            L = laplacian(graph, "wired")
        else:
            self._support = graph.vertex_ids
            self._sx = {v: i for i, v in enumerate(self._support)}
            # ground one vertex; re-gauged to mean zero per column
            self._ground = graph.vertex_ids[0]
            keep = [i for i, v in enumerate(self._support) if v != self._ground]
            self._keep = keep
            L = laplacian(graph, "free")[keep][:, keep]

        self.n = L.shape[0]
        if self.n == 0:
            self._solve = None
        elif self.n <= DENSE_LIMIT:
            try:
                cf = sla.cho_factor(L.toarray())
            except np.linalg.LinAlgError as exc:
                raise ValidationError(f"singular Laplacian factorization: {exc}")
            self._solve = lambda b: sla.cho_solve(cf, b)
        else:
            self._solve = spla.factorized(L.tocsc())

    def column(self, w):
        """G(., w) over all vertices (zeros on the boundary when wired)."""
        if w in self._cols:
            return self._cols[w]
        g = self.graph
        col = np.zeros(g.nv)
        if self.bc == "wired":
            if w not in g.boundary:
                b = np.zeros(self.n)
                b[self._sx[w]] = 1.0
                x = self._solve(b)
                for v, i in self._sx.items():
                    col[g.vertex_index(v)] = x[i]
        else:
            nv = g.nv
            b_full = np.full(nv, -1.0 / nv)
            b_full[self._sx[w]] += 1.0
            b = b_full[self._keep]
            x = self._solve(b)
            full = np.zeros(nv)
            for j, i in enumerate(self._keep):
                full[i] = x[j]
            full -= full.mean()
            for v, i in self._sx.items():
                col[g.vertex_index(v)] = full[i]
        self._cols[w] = col
        return col

    def entry(self, x, y):
        return float(self.column(y)[self.graph.vertex_index(x)])

    def apply(self, b):
        """G . b for b over all vertices (boundary entries ignored if wired)."""
        g = self.graph
        out = np.zeros(g.nv)
        if self.bc == "wired":
            bi = np.array([b[g.vertex_index(v)] for v in self._support])
            x = self._solve(bi)
            for v, i in self._sx.items():
                out[g.vertex_index(v)] = x[i]
        else:
            bv = np.asarray(b, float)
            bv = bv - bv.mean()
            x = self._solve(bv[self._keep])
            full = np.zeros(g.nv)
            for j, i in enumerate(self._keep):
                full[i] = x[j]
            full -= full.mean()
            out = full
        return out

    def matrix(self):
        """Dense G over all vertices (small graphs only)."""
        if self.graph.nv > DENSE_LIMIT:
            raise ValidationError("dense Green matrix requested for a large graph")
        g = self.graph
        G = np.zeros((g.nv, g.nv))
        for w in self._support:
            G[:, g.vertex_index(w)] = self.column(w)
        return G


def green(graph, bc, cache=True):
    """Green operator for the graph under the given boundary condition."""
    if cache:
        key = (graph.content_hash(), bc)
        if key not in _GREEN_CACHE:
            _GREEN_CACHE[key] = GreenOperator(graph, bc)
        return _GREEN_CACHE[key]
    return GreenOperator(graph, bc)


class TransferCurrent:
    """Transfer current matrix over positive edge representatives."""

    def __init__(self, graph, bc, T):
        self.graph = graph
        self.bc = bc
        self.T = T
        s = np.sqrt(graph.edge_c)
        self.K = (s[:, None] / s[None, :]) * T

    def entry(self, d1, d2):
        """T(d1, d2) for darts or edge ids (ids mean positive orientation)."""
        s = 1.0
        if isinstance(d1, DirectedEdge):
            u, _ = self.graph.edge_endpoints(d1.eid)
            s *= 1.0 if d1.head == u else -1.0
            e1 = d1.eid
        else:
            e1 = d1
        if isinstance(d2, DirectedEdge):
            u, _ = self.graph.edge_endpoints(d2.eid)
            s *= 1.0 if d2.head == u else -1.0
            e2 = d2.eid
        else:
            e2 = d2
        return s * float(self.T[self.graph.edge_index(e1), self.graph.edge_index(e2)])

    def minor_K(self, edge_ids):
        idx = [self.graph.edge_index(e) for e in edge_ids]
        return self.K[np.ix_(idx, idx)]

    def expected_trace(self):
        g = self.graph
        return len(g.interior) if self.bc == "wired" else g.nv - 1

    def validate(self, tol=TOL_FACTORED):
        """Projection/reciprocity/trace defects; raises on gross failure."""
        c = self.graph.edge_c
        recip = np.max(np.abs(c[:, None] * self.T - (c[:, None] * self.T).T))
        proj = np.max(np.abs(self.K @ self.K - self.K))
        tr = abs(float(np.trace(self.T)) - self.expected_trace())
        diag = self.T.diagonal()
        diag_ok = float(max(np.max(diag - 1.0), np.max(-diag)))
        return {"reciprocity": float(recip), "projection": float(proj),
                "trace": float(tr), "diag_outside": max(diag_ok, 0.0)}


def _double_difference(graph, G):
    """M G M^T with M the signed edge-vertex incidence (+head, -tail)."""
    rows_u = np.array([graph.vertex_index(int(u)) for u in graph.edge_u])
    rows_v = np.array([graph.vertex_index(int(v)) for v in graph.edge_v])
    D = G[rows_u] - G[rows_v]
    return D[:, rows_u] - D[:, rows_v]


def transfer_current(graph, bc):
    """Full transfer-current matrix (dense; small and medium graphs)."""
    if graph.nv > DENSE_LIMIT:
        raise ValidationError("full transfer current needs the dense Green matrix; "
                              "use transfer_current_entries for large graphs")
    G = green(graph, bc).matrix()
    T = _double_difference(graph, G) * graph.edge_c[None, :]
    return TransferCurrent(graph, bc, T)


def transfer_current_entries(graph, bc, rows, cols):
    """Selected T(row_i, col_j) entries via per-column Green solves.

    ``rows`` and ``cols`` are darts or edge ids.  Only Green columns at the
    endpoints of ``cols`` are computed, so this scales to large graphs.
    """
    gop = green(graph, bc)

    def resolve(d):
        if isinstance(d, DirectedEdge):
            return d.eid, d.head, d.tail
        u, v = graph.edge_endpoints(d)
        return d, u, v

    rows = [resolve(d) for d in rows]
    cols = [resolve(d) for d in cols]
    out = np.zeros((len(rows), len(cols)))
    for j, (eid, u, v) in enumerate(cols):
        cu, cv = gop.column(u), gop.column(v)
        c = graph.weight(eid)
        for i, (_, a, b) in enumerate(rows):
            ia, ib = graph.vertex_index(a), graph.vertex_index(b)
            out[i, j] = c * (cu[ia] - cu[ib] - cv[ia] + cv[ib])
    return out


def transfer_current_spectral(graph, bc):
    """Transfer current from the Laplacian eigenbasis (nonzero modes only)."""
    if graph.nv > 2000:
        raise ValidationError("spectral transfer current needs a full eigensolve")
    if bc == "wired":
        L = laplacian(graph, "wired").toarray()
        lam, vecs = np.linalg.eigh(L)
        keep = lam > 1e-12 * max(lam.max(), 1.0)
        lam, vecs = lam[keep], vecs[:, keep]
        full = np.zeros((graph.nv, vecs.shape[1]))
        for i, v in enumerate(graph.interior):
            full[graph.vertex_index(v)] = vecs[i]
    else:
        L = laplacian(graph, "free").toarray()
        lam, vecs = np.linalg.eigh(L)
        keep = lam > 1e-10 * max(lam.max(), 1.0)
        lam, vecs = lam[keep], vecs[:, keep]
        full = vecs
    rows_u = np.array([graph.vertex_index(int(u)) for u in graph.edge_u])
    rows_v = np.array([graph.vertex_index(int(v)) for v in graph.edge_v])
    D = full[rows_u] - full[rows_v]          # (edges, modes): f_k(u) - f_k(v)
    T = (D / lam[None, :]) @ D.T * graph.edge_c[None, :]
    return TransferCurrent(graph, bc, T)


def apply_projection(graph, bc, alpha):
    """P alpha = d G d* alpha, the transfer current acting on a 1-form."""
    gop = green(graph, bc)
    div = coderivative(graph, alpha)
    pot = gop.apply(div.values)
    from .graph import VertexFunction

    return derivative(graph, VertexFunction(graph, pot))


def dual_transfer_check(graph):
    """Planar duality of the transfer current (the 2SF/unicycle coupling).

    With dual weights 1/c(e) and e* directed so that (e, e*) is positively
    oriented, the spanning-tree process of the dual is the complement of the
    primal process under e <-> e*, so the symmetric kernels satisfy
    K*(e*, f*) = (I - K)(e, f).  The transfer current the dual induces on
    the primal edges is therefore

        T_dual(e, f) = sqrt(c(f)/c(e)) (I - K*)(e*, f*),

    and the check reports max |T(e, f) - T_dual(e, f)| over all edge pairs.
    Free graphs are compared against the full dual; wired graphs (boundary
    on the outer face) against the dual with the outer-face vertex deleted,
    restricted to the edges that survive contracting the boundary.
    """
    dual = PlanarDual(graph)
    if graph.boundary:
        outer_vertices = {d.head for d in dual.faces[dual.outer_face]}
        if set(graph.boundary) != outer_vertices:
            raise ValidationError("wired duality check requires the boundary to "
                                  "be exactly the outer-face vertices")
        dgraph, kept = dual.without_outer()
        tc = transfer_current(graph, "wired")
        tcd = transfer_current(dgraph, "free")
        idx = [graph.edge_index(e) for e in kept]
        K = tc.K[np.ix_(idx, idx)]
        Kd = tcd.K  # dual edge order equals kept order
        c = graph.edge_c[idx]
        edges = kept
    else:
        dgraph = dual.graph
        tc = transfer_current(graph, "free")
        tcd = transfer_current(dgraph, "free")
        K = tc.K
        Kd = tcd.K
        c = graph.edge_c
        edges = list(graph.edge_ids)

    comp = np.eye(len(edges)) - Kd      # primal kernel implied by the dual
    s = np.sqrt(c)
    ratio = s[None, :] / s[:, None]     # sqrt(c(f)/c(e)) turns K back into T
    T = ratio * K
    T_dual = ratio * comp
    disc = np.max(np.abs(T - T_dual))
    return {"edges": edges, "max_discrepancy": float(disc),
            "kernel_discrepancy": float(np.max(np.abs(Kd - (np.eye(len(edges)) - K))))}
