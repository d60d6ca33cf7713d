"""Graph builders (lattice patches, tori, isoradial tilings) and continuum
Green-function oracles for convergence experiments.

Lattice convention: ``grid_in_domain`` places vertices at k/n strictly inside
the open domain, so a unit square at resolution n yields an (n-1)^d block.
Wired boundaries are realized by marking exterior-adjacent vertices as the
sink set; ``wired_grid`` instead builds an exact n^d interior block with an
explicit pendant sink layer (no boundary-boundary edges), which is the shape
the sandpile and field experiments use.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .graph import WeightedGraph
from .util import ValidationError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DomainSpec:
    """Open domain in R^d: rectangle, disk, or the whole space."""

    kind: str = "rectangle"           # rectangle | disk | plane
    bounds: tuple = ((0.0, 1.0), (0.0, 1.0))   # per-axis (lo, hi)
    center: tuple = (0.0, 0.0)
    radius: float = 1.0

    def __post_init__(self):
        if self.kind == "rectangle":
            for lo, hi in self.bounds:
                if not hi > lo:
                    raise ValidationError("rectangle sides must be positive")
        elif self.kind == "disk":
            if not self.radius > 0:
                raise ValidationError("disk radius must be positive")
        elif self.kind != "plane":
            raise ValidationError(f"unknown domain kind {self.kind!r}")

    @property
    def dim(self):
        if self.kind == "rectangle":
            return len(self.bounds)
        return len(self.center)

    def contains(self, p):
        if self.kind == "plane":
            return True
        if self.kind == "rectangle":
            return all(lo < x < hi for x, (lo, hi) in zip(p, self.bounds))
        return float(np.linalg.norm(np.asarray(p) - np.asarray(self.center))) < self.radius


def unit_square():
    return DomainSpec("rectangle", ((0.0, 1.0), (0.0, 1.0)))


def _rotation_from_embedding(pos, incident):
    """CCW rotation at each vertex of a straight-line planar embedding."""
    rot = {}
    for v, darts in incident.items():
        ang = sorted((math.atan2((pos[o] - pos[v])[1], (pos[o] - pos[v])[0]), eid)
                     for eid, o in darts)
        rot[v] = tuple(eid for _, eid in ang)
    return rot


def grid_in_domain(spec, n, bc="wired"):
    """Unit-weight lattice Z^d/n intersected with an open domain.

    Boundary (wired) = vertices with a lattice neighbour outside the domain;
    free leaves the boundary empty.  Keeps the largest component if the
    intersection is disconnected (logged, never silent).
    """
    if n < 2:
        raise ValidationError("resolution n must be >= 2")
    if spec.kind == "plane":
        raise ValidationError("cannot mesh the whole space; give a bounded domain")
    d = spec.dim
    if spec.kind == "rectangle":
        ranges = [range(int(math.floor(lo * n)) - 1, int(math.ceil(hi * n)) + 2)
                  for lo, hi in spec.bounds]
    else:
        c, r = np.asarray(spec.center), spec.radius
        ranges = [range(int(math.floor((c[i] - r) * n)) - 1,
                        int(math.ceil((c[i] + r) * n)) + 2) for i in range(d)]
    points = {}
    for idx in np.ndindex(*[len(r) for r in ranges]):
        k = tuple(ranges[i][idx[i]] for i in range(d))
        p = np.array(k, dtype=float) / n
        if spec.contains(p):
            points[k] = p
    if not points:
        raise ValidationError("domain contains no lattice points at this resolution")

    keys = sorted(points)
    vid = {k: i for i, k in enumerate(keys)}
    edges = []
    eid = 0
    steps = [tuple(int(i == a) for i in range(d)) for a in range(d)]
    for k in keys:
        for s in steps:
            k2 = tuple(k[i] + s[i] for i in range(d))
            if k2 in vid:
                edges.append((eid, vid[k], vid[k2], 1.0))
                eid += 1

    # largest component
    adj = {i: [] for i in vid.values()}
    for _, a, b, _ in edges:
        adj[a].append(b)
        adj[b].append(a)
    comp = {}
    for start in vid.values():
        if start in comp:
            continue
        stack, members = [start], [start]
        comp[start] = start
        while stack:
            x = stack.pop()
            for y in adj[x]:
                if y not in comp:
                    comp[y] = start
                    stack.append(y)
                    members.append(y)
    sizes = {}
    for x, root in comp.items():
        sizes[root] = sizes.get(root, 0) + 1
    main = max(sizes, key=lambda r: sizes[r])
    if sizes[main] != len(keys):
        logger.warning("grid_in_domain: trimmed %d vertices in minor components",
                       len(keys) - sizes[main])
    keep = {i for i in vid.values() if comp[i] == main}
    keys = [k for k in keys if vid[k] in keep]

    boundary = []
    if bc == "wired":
        for k in keys:
            for s in steps:
                for sgn in (+1, -1):
                    k2 = tuple(k[i] + sgn * s[i] for i in range(d))
                    if k2 not in points:
                        boundary.append(vid[k])
                        break
                else:
                    continue
                break

    vertices = [(vid[k], points[k]) for k in keys]
    edges = [(e, a, b, c) for e, a, b, c in edges if a in keep and b in keep]
    rotation = None
    if d == 2:
        pos = {v: p for v, p in vertices}
        incident = {v: [] for v, _ in vertices}
        for e, a, b, _ in edges:
            incident[a].append((e, b))
            incident[b].append((e, a))
        rotation = _rotation_from_embedding(pos, incident)
    return WeightedGraph(vertices, edges, boundary, rotation)


def wired_grid(n, d=2):
    """n^d interior block with a pendant sink layer (unit weights).

    Every interior vertex has full lattice degree 2d; sink vertices are
    degree-1 and carry no edges among themselves.
    """
    if n < 1:
        raise ValidationError("n must be >= 1")
    shape = (n,) * d
    N = n ** d

    def rav(k):
        out = 0
        for x in k:
            out = out * n + x
        return out

    vertices = [(rav(k), np.array(k, dtype=float)) for k in np.ndindex(*shape)]
    edges = []
    eid = 0
    steps = [tuple(int(i == a) for i in range(d)) for a in range(d)]
    for k in np.ndindex(*shape):
        for s in steps:
            k2 = tuple(k[i] + s[i] for i in range(d))
            if all(x < n for x in k2):
                edges.append((eid, rav(k), rav(k2), 1.0))
                eid += 1
    sink_id = N
    boundary = []
    for k in np.ndindex(*shape):
        for s in steps:
            for sgn in (+1, -1):
                k2 = tuple(k[i] + sgn * s[i] for i in range(d))
                if not all(0 <= x < n for x in k2):
                    vertices.append((sink_id, np.array(k2, dtype=float)))
                    boundary.append(sink_id)
                    edges.append((eid, rav(k), sink_id, 1.0))
                    sink_id += 1
                    eid += 1
    rotation = None
    if d == 2:
        pos = {v: p for v, p in vertices}
        incident = {v: [] for v, _ in vertices}
        for e, a, b, _ in edges:
            incident[a].append((e, b))
            incident[b].append((e, a))
        rotation = _rotation_from_embedding(pos, incident)
    g = WeightedGraph(vertices, edges, boundary, rotation)
    g.meta = {"kind": "wired_grid", "n": n, "d": d}
    return g


def torus(n, d=2):
    """Discrete torus (Z/n)^d with unit weights, free boundary.

    Vertices sit at k/n in [0,1)^d.  Edge ids are axis * n^d + base vertex,
    and ``meta`` records each edge's axis and base lattice point.
    """
    if n < 3:
        raise ValidationError("torus needs n >= 3 (no parallel edges)")
    N = n ** d
    strides = [n ** (d - 1 - a) for a in range(d)]

    def rav(k):
        return sum(k[i] * strides[i] for i in range(d))

    vertices = [(rav(k), np.array(k, dtype=float) / n) for k in np.ndindex(*(n,) * d)]
    edges = []
    axis = {}
    base = {}
    for k in np.ndindex(*(n,) * d):
        for a in range(d):
            k2 = list(k)
            k2[a] = (k2[a] + 1) % n
            eid = a * N + rav(k)
            edges.append((eid, rav(k), rav(tuple(k2)), 1.0))
            axis[eid] = a
            base[eid] = tuple(k)
    g = WeightedGraph(vertices, edges, boundary=())
    g.meta = {"kind": "torus", "n": n, "d": d, "axis": axis, "base": base}
    return g


# -- isoradial tilings ---------------------------------------------------

@dataclass(frozen=True)
class IsoradialSpec:
    """Named isoradial tiling with common circumradius epsilon.

    ``square`` is the grid (all half-angles pi/4); ``triangular`` the
    equilateral lattice (pi/6); ``sixty-rhombic`` the strip of 60-degree
    rhombi (half-angles pi/6 and pi/3 alternating); ``isosceles`` a general
    isosceles triangulation with the given base/height (in units of epsilon).
    """

    tiling: str = "square"
    epsilon: float = 1.0
    base: float = None
    height: float = None
    theta_min: float = 0.05

    def geometry(self):
        """(base a, row height h) of the triangulation, or None for square."""
        e = self.epsilon
        if self.tiling == "square":
            return None
        if self.tiling == "triangular":
            a = e * math.sqrt(3.0)
            return a, 1.5 * e
        if self.tiling == "sixty-rhombic":
            return e * math.sqrt(3.0), 0.5 * e
        if self.tiling == "isosceles":
            if self.base is None or self.height is None:
                raise ValidationError("isosceles tiling needs base and height")
            a, h = self.base * self.epsilon, self.height * self.epsilon
            R = (a * a + 4 * h * h) / (8 * h)
            if abs(R - self.epsilon) > 1e-9 * self.epsilon:
                raise ValidationError(f"base/height give circumradius {R}, "
                                      f"not epsilon={self.epsilon}")
            return a, h
        raise ValidationError(f"unknown tiling {self.tiling!r}")


def half_angle(length, epsilon):
    """Rhombic half-angle of an edge of the given length (chord of radius
    epsilon): tan(theta) = sqrt(4 eps^2 - L^2) / L."""
    disc = 4 * epsilon * epsilon - length * length
    if disc <= 0:
        raise ValidationError(f"edge length {length} too long for circumradius "
                              f"{epsilon}")
    return math.atan2(math.sqrt(disc), length)


def _check_angles(thetas, theta_min):
    for eid, th in thetas.items():
        if not (theta_min <= th <= math.pi / 2 - theta_min):
            raise ValidationError(f"edge {eid}: half-angle {th:.4f} outside "
                                  f"[{theta_min}, pi/2-{theta_min}]")


def _triangulated_rows(spec, ncols, nrows, wrap):
    """Vertex/edge lists of an isosceles triangulation, optionally wrapped."""
    a, h = spec.geometry()
    e = spec.epsilon

    def vid(i, k):
        return (k % nrows if wrap else k) * ncols + (i % ncols if wrap else i)

    vertices = {}
    for k in range(nrows):
        for i in range(ncols):
            x = i * a + (k % 2) * (a / 2.0)
            vertices[vid(i, k)] = np.array([x, k * h])
    edges = []
    cls = {}
    theta = {}
    eid = 0

    def add(u, v, length, label):
        nonlocal eid
        th = half_angle(length, e)
        edges.append((eid, u, v, math.tan(th)))
        theta[eid] = th
        cls[eid] = label
        eid += 1

    slant = math.hypot(a / 2.0, h)
    for k in range(nrows):
        for i in range(ncols):
            u = vid(i, k)
            if wrap or i + 1 < ncols:
                add(u, vid(i + 1, k), a, "base")
            if wrap or k + 1 < nrows:
                off = k % 2
                if wrap or 0 <= i + off < ncols:
                    add(u, vid(i + off, k + 1), slant, "slant")
                if wrap or 0 <= i - 1 + off < ncols:
                    add(u, vid(i - 1 + off, k + 1), slant, "slant")
    return vertices, edges, theta, cls


def isoradial_patch(spec, window):
    """Finite isoradial patch clipped to a window, with rotation system."""
    if spec.tiling == "square":
        # the square tiling is the grid with spacing epsilon * sqrt(2)
        s = spec.epsilon * math.sqrt(2.0)
        cols = int((window.bounds[0][1] - window.bounds[0][0]) / s) + 1
        rows = int((window.bounds[1][1] - window.bounds[1][0]) / s) + 1
        vertices = {}
        for k in range(rows):
            for i in range(cols):
                vertices[k * cols + i] = np.array([window.bounds[0][0] + i * s,
                                                   window.bounds[1][0] + k * s])
        edges = []
        theta = {}
        cls = {}
        eid = 0
        for k in range(rows):
            for i in range(cols):
                u = k * cols + i
                if i + 1 < cols:
                    edges.append((eid, u, u + 1, 1.0))
                    theta[eid] = math.pi / 4
                    cls[eid] = "h"
                    eid += 1
                if k + 1 < rows:
                    edges.append((eid, u, u + cols, 1.0))
                    theta[eid] = math.pi / 4
                    cls[eid] = "v"
                    eid += 1
    else:
        a, h = spec.geometry()
        ncols = int((window.bounds[0][1] - window.bounds[0][0]) / a) + 2
        nrows = int((window.bounds[1][1] - window.bounds[1][0]) / h) + 2
        vertices, edges, theta, cls = _triangulated_rows(spec, ncols, nrows, wrap=False)
    _check_angles(theta, spec.theta_min)
    pos = vertices
    incident = {v: [] for v in vertices}
    for e, u, v, _ in edges:
        incident[u].append((e, v))
        incident[v].append((e, u))
    rotation = _rotation_from_embedding(pos, incident)
    g = WeightedGraph([(v, p) for v, p in sorted(vertices.items())], edges,
                      boundary=(), rotation=rotation)
    g.meta = {"kind": "isoradial", "tiling": spec.tiling, "theta": theta,
              "class": cls, "epsilon": spec.epsilon}
    return g


def isoradial_torus(spec, ncols, nrows):
    """Periodic isoradial patch wrapped on a torus (no rotation system).

    Exact translation-invariant surrogate for the infinite tiling; used for
    the edge-density comparison against (2/pi) theta_e.
    """
    if spec.tiling == "square":
        g = torus(ncols)
        theta = {eid: math.pi / 4 for eid in g.edge_ids}
        cls = {eid: ("h" if g.meta["axis"][eid] == 0 else "v") for eid in g.edge_ids}
        g.meta.update({"kind": "isoradial_torus", "tiling": "square",
                       "theta": theta, "class": cls, "epsilon": spec.epsilon})
        return g
    if nrows % 2:
        raise ValidationError("wrapped triangulations need an even row count")
    vertices, edges, theta, cls = _triangulated_rows(spec, ncols, nrows, wrap=True)
    _check_angles(theta, spec.theta_min)
    g = WeightedGraph([(v, p) for v, p in sorted(vertices.items())], edges,
                      boundary=())
    g.meta = {"kind": "isoradial_torus", "tiling": spec.tiling, "theta": theta,
              "class": cls, "epsilon": spec.epsilon}
    return g


def mean_value_defect(graph, f, v, r):
    """r * |f(v) - mean over the combinatorial ball B(v, r)|.

    Diagnostic for the approximate mean value property: stays bounded in r
    for discrete harmonic functions on good approximations.
    """
    ball = {v: 0}
    frontier = [v]
    depth = 0
    while frontier and depth < r:
        depth += 1
        nxt = []
        for x in frontier:
            for _, o, _, _ in graph.incident(x):
                if o not in ball:
                    ball[o] = depth
                    nxt.append(o)
        frontier = nxt
    if any(graph.is_boundary(x) for x in ball):
        raise ValidationError("ball exits the interior region")
    vals = np.array([f(x) for x in ball])
    return float(r * abs(f(v) - vals.mean()))


# -- continuum Green oracles ----------------------------------------------

class ContinuumGreen:
    """Continuum Green function evaluator with mixed directional derivatives.

    Supported: whole plane/space (log / power kernel), disk with Dirichlet
    condition (image method), rectangle with Dirichlet condition (single
    eigenseries summed analytically along the better-separated axis, so the
    truncation error decays geometrically; the default tolerance keeps it
    below 1e-8 away from the diagonal).
    """

    def __init__(self, spec, bc="dirichlet", tol=1e-10, max_terms=4000):
        self.spec = spec
        self.bc = bc
        self.tol = tol
        self.max_terms = max_terms
        if spec.kind == "plane":
            self.bc = "plane"
        elif bc != "dirichlet":
            raise ValidationError("only Dirichlet bounded-domain oracles are "
                                  "implemented")
        if spec.kind == "disk" and spec.dim != 2:
            raise ValidationError("disk oracle is two-dimensional")

    # whole space ------------------------------------------------------

    def _plane_value(self, z, w):
        r = float(np.linalg.norm(np.asarray(z) - np.asarray(w)))
        d = len(z)
        if d == 2:
            return -math.log(r) / (2 * math.pi)
        if d == 3:
            return 1.0 / (4 * math.pi * r)
        raise ValidationError("whole-space oracle implemented for d in {2, 3}")

    @staticmethod
    def _log_mixed(z, w, a, b):
        """D_a^z D_b^w log|z - w| = Re(a b / (z - w)^2) with complex a, b."""
        zz = complex(z[0], z[1]) - complex(w[0], w[1])
        aa = complex(a[0], a[1])
        bb = complex(b[0], b[1])
        return (aa * bb / (zz * zz)).real

    @staticmethod
    def _log_conj_mixed(z, w, a, b):
        """D_a^z D_b^w log|1 - conj(z) w| (unit-disk reflection term)."""
        zz = complex(z[0], z[1])
        ww = complex(w[0], w[1])
        aa = complex(a[0], a[1])
        bb = complex(b[0], b[1])
        return (-aa * bb.conjugate() / (1 - zz * ww.conjugate()) ** 2).real

    # rectangle ----------------------------------------------------------

    def _rect_eval(self, z, w, da=None, db=None):
        """Value or mixed directional derivative on the Dirichlet rectangle.

        da/db: unit direction vectors or None (no derivative in that slot).
        """
        (x0, x1), (y0, y1) = self.spec.bounds
        Lx, Ly = x1 - x0, y1 - y0
        zx, zy = z[0] - x0, z[1] - y0
        wx, wy = w[0] - x0, w[1] - y0
        # choose the sinh axis = larger separation
        if abs(zy - wy) * Lx >= abs(zx - wx) * Ly:
            sine, sinh_ = (zx, wx, Lx), (zy, wy, Ly)
            perm = False
        else:
            sine, sinh_ = (zy, wy, Ly), (zx, wx, Lx)
            perm = True

        def axis_dirs(d):
            if d is None:
                return None
            return (d[1], d[0]) if perm else (d[0], d[1])

        da, db = axis_dirs(da), axis_dirs(db)
        sx, su, L = sine
        ty, tv, M = sinh_
        sep = abs(ty - tv)
        if sep < 1e-12:
            raise ValidationError("rectangle oracle needs z != w off-axis")

        total = 0.0
        j = 1
        while j <= self.max_terms:
            k = j * math.pi / L
            # stable sinh(k y<) sinh(k (M - y>)) / (k sinh(k M))
            lo, hi = min(ty, tv), max(ty, tv)
            expo = -k * (hi - lo)
            Y = (math.exp(expo) * (1 - math.exp(-2 * k * lo))
                 * (1 - math.exp(-2 * k * (M - hi)))
                 / (2 * k * (1 - math.exp(-2 * k * M))))
            dY_z = dY_w = None
            if da is not None or db is not None:
                # derivative of the sinh factor wrt its own argument
                def Yd(y_is_z):
                    # d/dy of sinh(k y<) sinh(k(M - y>)) / (k sinh kM), at the
                    # argument belonging to z (y_is_z) or w
                    y = ty if y_is_z else tv
                    other = tv if y_is_z else ty
                    if y <= other:
                        num = (math.exp(expo) * (1 + math.exp(-2 * k * lo))
                               * (1 - math.exp(-2 * k * (M - hi))))
                    else:
                        num = -(math.exp(expo) * (1 - math.exp(-2 * k * lo))
                                * (1 + math.exp(-2 * k * (M - hi))))
                    return num / (2 * (1 - math.exp(-2 * k * M)))
                dY_z, dY_w = Yd(True), Yd(False)
            ssx, csx = math.sin(k * sx), math.cos(k * sx)
            ssu, csu = math.sin(k * su), math.cos(k * su)

            if da is None and db is None:
                term = (2.0 / L) * ssx * ssu * Y
            elif da is not None and db is None:
                term = (2.0 / L) * (da[0] * k * csx * ssu * Y
                                    + da[1] * ssx * ssu * dY_z)
            elif da is None and db is not None:
                term = (2.0 / L) * (db[0] * k * ssx * csu * Y
                                    + db[1] * ssx * ssu * dY_w)
            else:
                term = (2.0 / L) * (
                    da[0] * db[0] * k * k * csx * csu * Y
                    + da[0] * db[1] * k * csx * ssu * dY_w
                    + da[1] * db[0] * k * ssx * csu * dY_z
                    + da[1] * db[1] * ssx * ssu * self._d2Y(k, ty, tv, M))
            total += term
            # geometric tail bound: remaining terms < C exp(-k sep)
            if j > 4 and math.exp(-k * sep) * k * k < self.tol:
                break
            j += 1
        else:
            raise ValidationError("rectangle series did not converge within "
                                  f"{self.max_terms} terms")
        return total

    @staticmethod
    def _d2Y(k, ty, tv, M):
        """d^2/dy dv of the 1-D Green factor (arguments on opposite slopes)."""
        lo, hi = min(ty, tv), max(ty, tv)
        expo = -k * (hi - lo)
        num = (math.exp(expo) * (1 + math.exp(-2 * k * lo))
               * (1 + math.exp(-2 * k * (M - hi))))
        return -k * num / (2 * (1 - math.exp(-2 * k * M)))

    # public API -----------------------------------------------------------

    def value(self, z, w):
        z, w = np.asarray(z, float), np.asarray(w, float)
        if self.bc == "plane":
            return self._plane_value(z, w)
        if self.spec.kind == "disk":
            c = np.asarray(self.spec.center)
            R = self.spec.radius
            zz, ww = (z - c) / R, (w - c) / R
            num = float(np.linalg.norm(zz - ww))
            den = abs(1 - complex(*zz).conjugate() * complex(*ww))
            return -math.log(num / den) / (2 * math.pi)
        return self._rect_eval(z, w)

    def mixed_derivative(self, z, w, a, b):
        """D_a^z D_b^w g(z, w) for unit directions a, b."""
        z, w = np.asarray(z, float), np.asarray(w, float)
        a = np.asarray(a, float) / np.linalg.norm(a)
        b = np.asarray(b, float) / np.linalg.norm(b)
        if self.bc == "plane":
            if len(z) != 2:
                raise ValidationError("mixed derivative implemented for d = 2")
            return -self._log_mixed(z, w, a, b) / (2 * math.pi)
        if self.spec.kind == "disk":
            c = np.asarray(self.spec.center)
            R = self.spec.radius
            zz, ww = (z - c) / R, (w - c) / R
            val = (-self._log_mixed(zz, ww, a, b)
                   + self._log_conj_mixed(zz, ww, a, b)) / (2 * math.pi)
            return val / (R * R)
        return self._rect_eval(z, w, da=a, db=b)


def continuum_green(spec, bc="dirichlet"):
    return ContinuumGreen(spec, bc)
