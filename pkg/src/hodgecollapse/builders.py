"""Desk-scale meshes of the model manifolds, with metrics and Killing fields.

Curved manifolds are carried by chord geometry: vertices sit on the manifold,
each top simplex is affine, and its metric is the Euclidean Gram matrix of
its edge vectors.  Killing fields stay analytic; they are evaluated at points
mapped back to the manifold and projected to simplex tangent planes only at
assembly time.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .complexes import SimplicialComplex

GOLDEN = (1.0 + math.sqrt(5.0)) / 2.0


@dataclass(frozen=True)
class QuadratureRule:
    """Barycentric nodes and weights on the reference n-simplex.

    Weights are positive and sum to the reference volume 1/n!.  Nodes are
    interior, keeping quadrature supported away from orbit singularities.
    """

    points: np.ndarray  # (nq, n+1) barycentric coordinates
    weights: np.ndarray  # (nq,)

    @property
    def size(self):
        return len(self.weights)


def simplex_quadrature(n: int, degree: int = 2) -> QuadratureRule:
    """Interior quadrature on the n-simplex, exact for polynomials of `degree`.

    degree 1: centroid rule.  degree 2: the symmetric n+1 point rule with
    nodes at permutations of (a, b, ..., b), b = (1 - 1/sqrt(n+2))/(n+1).
    """
    ref_vol = 1.0 / math.factorial(n)
    if degree <= 1:
        pts = np.full((1, n + 1), 1.0 / (n + 1))
        wts = np.array([ref_vol])
    elif degree == 2:
        b = (1.0 - 1.0 / math.sqrt(n + 2)) / (n + 1)
        a = 1.0 - n * b
        pts = np.full((n + 1, n + 1), b)
        np.fill_diagonal(pts, a)
        wts = np.full(n + 1, ref_vol / (n + 1))
    else:
        raise ValueError(f"unsupported quadrature degree {degree}")
    return QuadratureRule(points=pts, weights=wts)


def sphere_chart_frames(corners: np.ndarray, quadrature: QuadratureRule) -> np.ndarray:
    """Pushed-forward edge frames of the radial chart onto the sphere.

    Each affine simplex is read as a chart onto the sphere through x -> R x/|x|
    (R from the corner radii).  The returned J[t, q, :, i] is that map's
    differential applied to edge i at quadrature node q, so J^T J is the
    exact first fundamental form there rather than a chord approximation.
    """
    nodes = np.einsum("qv,tva->tqa", quadrature.points, corners)
    r = np.linalg.norm(nodes, axis=2)
    xhat = nodes / r[:, :, None]
    R = np.mean(np.linalg.norm(corners, axis=2), axis=1)
    edges = np.swapaxes(corners[:, 1:, :] - corners[:, :1, :], 1, 2)
    radial = np.einsum("tqa,tan->tqn", xhat, edges)
    J = edges[:, None, :, :] - xhat[:, :, :, None] * radial[:, :, None, :]
    return (R[:, None] / r)[:, :, None, None] * J


class GeometryData:
    """Embedding, per-top-simplex metric, and quadrature for a complex.

    `corners[t, i]` is the coordinate of the i-th vertex (in sorted tuple
    order) of top simplex t.  Corners are stored per simplex so periodic
    identifications (flat torus seams) carry the unwrapped geometry; global
    vertex coordinates are kept for interchange and display.

    The metric is the flat edge Gram per simplex unless a `frame_builder`
    maps (corners, quadrature) to per-node tangent frames, in which case
    assembly sees the exact pulled-back metric of the curved manifold at
    every quadrature node (the round-sphere builders do this).
    """

    def __init__(self, complex, vertex_coords, corners=None, gram=None,
                 quadrature=None, description="", frame_builder=None,
                 node_grams=None):
        self.complex = complex
        n = complex.dimension
        self.vertex_coords = None if vertex_coords is None else np.asarray(
            vertex_coords, dtype=float)
        if corners is None:
            if self.vertex_coords is None:
                raise ValueError("need vertex coordinates or explicit corners")
            tops = np.array(complex.simplices[n], dtype=int)
            corners = self.vertex_coords[tops]
        self.corners = np.asarray(corners, dtype=float)
        self.ambient_dim = self.corners.shape[2]
        # edge vectors per top simplex, columns e_i = v_i - v_0
        self.edges = np.swapaxes(self.corners[:, 1:, :] - self.corners[:, :1, :], 1, 2)
        if gram is None:
            gram = np.einsum("tai,taj->tij", self.edges, self.edges)
        self.gram = np.asarray(gram, dtype=float)
        self.quadrature = quadrature or simplex_quadrature(n, degree=2)
        self.description = description
        self.frame_builder = frame_builder
        self.node_frames = None
        self.node_grams = None if node_grams is None else np.asarray(
            node_grams, dtype=float)
        if frame_builder is not None:
            self.node_frames = frame_builder(self.corners, self.quadrature)
            self.node_grams = np.einsum(
                "tqam,tqan->tqmn", self.node_frames, self.node_frames)
        if n > 0:
            sign, _ = np.linalg.slogdet(self.gram)
            if not np.all(sign > 0):
                raise ValueError(
                    "degenerate top simplex: Gram matrix not positive-definite")
            if self.node_grams is not None:
                sign, _ = np.linalg.slogdet(self.node_grams)
                if not np.all(sign > 0):
                    raise ValueError("node metric not positive-definite")
        sign, logdet = np.linalg.slogdet(self.gram) if n > 0 else (np.ones(1), np.zeros(1))
        self.sqrt_det_gram = np.exp(0.5 * logdet) if n > 0 else np.ones(len(self.corners))

    def metric_at_nodes(self) -> np.ndarray:
        """(nT, nq, n, n) metric seen by quadrature; broadcast if constant."""
        if self.node_grams is not None:
            return self.node_grams
        nq = self.quadrature.size
        return np.broadcast_to(
            self.gram[:, None, :, :], (len(self.corners), nq) + self.gram.shape[1:])

    def frames_at_nodes(self) -> np.ndarray:
        """(nT, nq, ambient, n) tangent frames; broadcast edges if constant."""
        if self.node_frames is not None:
            return self.node_frames
        nq = self.quadrature.size
        return np.broadcast_to(
            self.edges[:, None, :, :], (len(self.corners), nq) + self.edges.shape[1:])

    def volumes(self):
        n = self.complex.dimension
        if self.node_grams is None:
            return self.sqrt_det_gram / math.factorial(n)
        _, logdet = np.linalg.slogdet(self.node_grams)
        return np.einsum("q,tq->t", self.quadrature.weights, np.exp(0.5 * logdet))

    def total_volume(self):
        return float(self.volumes().sum())

    def with_gram(self, gram, description=""):
        """Same mesh and embedding, an explicit constant per-simplex metric."""
        return GeometryData(self.complex, self.vertex_coords, corners=self.corners,
                            gram=gram, quadrature=self.quadrature,
                            description=description or self.description)

    def with_node_grams(self, node_grams, description=""):
        """Same mesh, an explicit metric per quadrature node (no frames)."""
        return GeometryData(self.complex, self.vertex_coords, corners=self.corners,
                            gram=self.gram, quadrature=self.quadrature,
                            node_grams=node_grams,
                            description=description or self.description)

    def scaled(self, c: float):
        """All coordinates multiplied by c (metric scales by exactly c^2)."""
        coords = None if self.vertex_coords is None else c * self.vertex_coords
        out = GeometryData(self.complex, coords, corners=c * self.corners,
                           gram=(c * c) * self.gram, quadrature=self.quadrature,
                           description=f"{self.description} scaled x{c}")
        out.frame_builder = self.frame_builder
        if self.node_frames is not None:
            out.node_frames = c * self.node_frames
        if self.node_grams is not None:
            out.node_grams = (c * c) * self.node_grams
        return out


@dataclass
class ActionData:
    """Isometric group action: analytic Killing fields plus orbit data.

    `fields[j]` maps an (..., ambient) array of points to field vectors of
    the same shape.  `to_manifold` sends a chord point back to the manifold
    (radial projection for spheres, identity for flat meshes); quadrature
    nodes are mapped through it before the fields are evaluated.
    """

    fields: list
    group_dim: int
    stabilizer_dim: int
    description: str
    to_manifold: Optional[Callable] = None
    # Betti numbers of the orbit space, when known analytically.
    quotient_betti: Optional[tuple] = None
    # (quotient complex, vertex map) when the projection is simplicial.
    quotient_map: Optional[tuple] = None

    def __post_init__(self):
        if len(self.fields) != self.group_dim:
            raise ValueError("number of Killing fields must equal dim(G)")
        if self.stabilizer_dim < 0:
            raise ValueError("stabilizer dimension must be non-negative")

    def manifold_point(self, x):
        return x if self.to_manifold is None else self.to_manifold(x)

    def field_values(self, x):
        """Stacked field vectors at manifold points x: shape (..., dimG, amb)."""
        return np.stack([f(x) for f in self.fields], axis=-2)


def _normalize(x):
    return x / np.linalg.norm(x, axis=-1, keepdims=True)


def build_circle(segments: int):
    """Cycle complex on the unit circle; chord metric, rotation action."""
    if segments < 3:
        raise ValueError("need at least 3 segments")
    theta = 2.0 * np.pi * np.arange(segments) / segments
    coords = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    edges = [(i, (i + 1) % segments) for i in range(segments)]
    K = SimplicialComplex(1, [[(i,) for i in range(segments)], edges])
    K.known_betti = (1, 1)
    geom = GeometryData(K, coords, description=f"circle:{segments}")
    action = ActionData(
        fields=[lambda x: np.stack([-x[..., 1], x[..., 0]], axis=-1)],
        group_dim=1, stabilizer_dim=0, description="rotation",
        to_manifold=_normalize, quotient_betti=(1,),
    )
    return K, geom, action


def build_flat_torus(nx: int, ny: int):
    """Structured triangulation of the unit flat torus, each cell split in two.

    The action is the free unit x-translation (one Killing field, trivial
    stabilizer); corners are unwrapped per triangle so seam cells carry the
    flat metric exactly.
    """
    if nx < 3 or ny < 3:
        raise ValueError("need at least a 3x3 grid")
    vid = lambda i, j: (i % nx) * ny + (j % ny)
    coords = np.array([[i / nx, j / ny] for i in range(nx) for j in range(ny)])
    tris, corner_rows = [], []
    for i in range(nx):
        for j in range(ny):
            cell = [
                [(i, j), (i + 1, j), (i + 1, j + 1)],
                [(i, j), (i + 1, j + 1), (i, j + 1)],
            ]
            for tri in cell:
                labelled = sorted(
                    ((vid(a, b), np.array([a / nx, b / ny])) for a, b in tri),
                    key=lambda vp: vp[0],
                )
                tris.append(tuple(v for v, _ in labelled))
                corner_rows.append([p for _, p in labelled])
    K = SimplicialComplex.from_top_simplices(2, tris)
    K.known_betti = (1, 2, 1)
    order = {s: t for t, s in enumerate(tris)}
    corners = np.array([corner_rows[order[s]] for s in K.simplices[2]])
    geom = GeometryData(K, coords, corners=corners, description=f"torus:{nx}x{ny}")
    # the x-translation quotient is the y-circle; (i, j) -> j is simplicial
    circle_K, _, _ = build_circle(ny)
    action = ActionData(
        fields=[lambda x: np.broadcast_to(np.array([1.0, 0.0]), np.shape(x)).copy()],
        group_dim=1, stabilizer_dim=0, description="translation",
        quotient_betti=(1, 1),
        quotient_map=(circle_K, {v: v % ny for v in range(nx * ny)}),
    )
    return K, geom, action


def _icosahedron_vertices():
    base = []
    for c in ((0.0, 1.0, GOLDEN), (1.0, GOLDEN, 0.0), (GOLDEN, 0.0, 1.0)):
        for s1 in (1.0, -1.0):
            for s2 in (1.0, -1.0):
                v = np.array(c)
                nz = np.nonzero(v)[0]
                v[nz[0]] *= s1
                v[nz[1]] *= s2
                base.append(v)
    return _normalize(np.unique(np.round(np.array(base), 12), axis=0))


def _cells_from_nearest_neighbors(coords, top_order):
    """Edges from minimal pairwise distance, then larger cells as cliques."""
    npts = len(coords)
    d2 = np.sum((coords[:, None, :] - coords[None, :, :]) ** 2, axis=2)
    pos = d2[np.triu_indices(npts, k=1)]
    cutoff = pos.min() * (1.0 + 1e-9)
    adj = [set() for _ in range(npts)]
    edges = []
    for i in range(npts):
        for j in range(i + 1, npts):
            if d2[i, j] <= cutoff:
                adj[i].add(j)
                adj[j].add(i)
                edges.append((i, j))
    cells = [edges]
    for _ in range(top_order - 1):
        bigger = []
        for cell in cells[-1]:
            common = set.intersection(*(adj[v] for v in cell))
            bigger.extend(cell + (w,) for w in sorted(common) if w > cell[-1])
        cells.append(bigger)
    return cells


def _rotation_field(x):
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    out[..., 0] = -x[..., 1]
    out[..., 1] = x[..., 0]
    out[..., 2] = 0.0
    return out


def _hopf_field(x):
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    out[..., 0] = -x[..., 1]
    out[..., 1] = x[..., 0]
    out[..., 2] = -x[..., 3]
    out[..., 3] = x[..., 2]
    return out


def build_icosphere(level: int, round_metric: bool = True):
    """Icosahedron subdivided `level` times, projected to the unit sphere.

    round_metric=True measures edges along great circles (the default, and
    what the spectral oracles are calibrated to); False keeps plain chords.
    Action: rotation about the z-axis, X = (-y, x, 0); the two poles are
    fixed points, the principal stabilizer is trivial.
    """
    if not 0 <= level <= 6:
        raise ValueError("icosphere level must be in 0..6")
    coords = _icosahedron_vertices()
    edges, faces = _cells_from_nearest_neighbors(coords, top_order=2)
    K = SimplicialComplex(2, [[(i,) for i in range(len(coords))], edges, faces])
    K.known_betti = (1, 0, 1)
    builder = sphere_chart_frames if round_metric else None
    geom = GeometryData(K, coords, description="icosphere:0", frame_builder=builder)
    for lev in range(level):
        K, geom = subdivide(K, geom, project=_normalize)
        geom.description = f"icosphere:{lev + 1}"
    action = ActionData(fields=[_rotation_field], group_dim=1, stabilizer_dim=0,
                        description="rotation", to_manifold=_normalize,
                        quotient_betti=(1, 0))
    return K, geom, action


def _600cell_vertices():
    verts = []
    for i in range(4):
        for s in (1.0, -1.0):
            v = np.zeros(4)
            v[i] = s
            verts.append(v)
    for signs in itertools.product((0.5, -0.5), repeat=4):
        verts.append(np.array(signs))
    base = np.array([GOLDEN, 1.0, 1.0 / GOLDEN, 0.0]) / 2.0
    even_perms = [p for p in itertools.permutations(range(4)) if _parity(p) == 0]
    for perm in even_perms:
        for signs in itertools.product((1.0, -1.0), repeat=3):
            v = base[list(perm)].copy()
            k = 0
            for idx in range(4):
                if v[idx] != 0.0:
                    v[idx] *= signs[k]
                    k += 1
            verts.append(v)
    verts = np.unique(np.round(np.array(verts), 12), axis=0)
    if len(verts) != 120:
        raise AssertionError(f"600-cell construction produced {len(verts)} vertices")
    return _normalize(verts)


def _parity(perm):
    inv = sum(1 for a, b in itertools.combinations(range(len(perm)), 2)
              if perm[a] > perm[b])
    return inv % 2


def build_s3_600cell(level: int = 0, round_metric: bool = True):
    """Boundary complex of the 600-cell on the unit 3-sphere.

    round_metric as in build_icosphere.  Action: the Hopf circle
    X = (-y, x, -w, z), free with |X| = 1 at every point of S^3.
    """
    if not 0 <= level <= 2:
        raise ValueError("600-cell level must be in 0..2")
    coords = _600cell_vertices()
    edges, faces, cells = _cells_from_nearest_neighbors(coords, top_order=3)
    K = SimplicialComplex(3, [[(i,) for i in range(len(coords))], edges, faces, cells])
    K.known_betti = (1, 0, 0, 1)
    builder = sphere_chart_frames if round_metric else None
    geom = GeometryData(K, coords, description="s3:600cell:0", frame_builder=builder)
    for lev in range(level):
        K, geom = subdivide(K, geom, project=_normalize)
        geom.description = f"s3:600cell:{lev + 1}"
    action = ActionData(fields=[_hopf_field], group_dim=1, stabilizer_dim=0,
                        description="hopf", to_manifold=_normalize,
                        quotient_betti=(1, 0, 1))
    return K, geom, action


def suspension(K: SimplicialComplex) -> SimplicialComplex:
    """Join with two apex vertices: each p-simplex yields two (p+1)-simplices."""
    nv = K.num(0)
    north, south = nv, nv + 1
    levels = [list(K.simplices[0]) + [(north,), (south,)]]
    for p in range(1, K.dimension + 2):
        new = list(K.simplices[p]) if p <= K.dimension else []
        for s in K.simplices[p - 1]:
            new.append(s + (north,))
            new.append(s + (south,))
        levels.append(new)
    out = SimplicialComplex(K.dimension + 1, levels)
    betti = getattr(K, "known_betti", None)
    if betti is not None:
        # reduced cohomology shifts up one degree under suspension
        out.known_betti = (1, betti[0] - 1) + tuple(betti[1:])
    return out


_OCTAHEDRON_RING = {  # equator cycle of the central octahedron per diagonal
    ((0, 1), (2, 3)): [(0, 2), (0, 3), (1, 3), (1, 2)],
    ((0, 2), (1, 3)): [(0, 1), (0, 3), (2, 3), (1, 2)],
    ((0, 3), (1, 2)): [(0, 1), (0, 2), (2, 3), (1, 3)],
}


def subdivide(K: SimplicialComplex, geom: GeometryData, project=None):
    """One round of edge-midpoint (red) refinement, dimensions 1 to 3.

    Each edge spawns one vertex; triangles split 1->4 and tetrahedra 1->8
    (central octahedron cut along its shortest diagonal).  `project` pushes
    new coordinates back onto curved manifolds.  New-vertex display
    coordinates are taken from per-simplex corners, so periodic meshes stay
    consistent.
    """
    n = K.dimension
    if n not in (1, 2, 3):
        raise ValueError("subdivision supports dimensions 1..3")
    nv = K.num(0)
    edge_index = K.index[1]
    mid = lambda a, b: nv + edge_index[(a, b) if a < b else (b, a)]

    children, child_corners = [], []
    vertex_coords = np.zeros((nv + K.num(1), geom.ambient_dim))
    if geom.vertex_coords is not None:
        vertex_coords[:nv] = geom.vertex_coords
    seen = np.zeros(nv + K.num(1), dtype=bool)
    seen[:nv] = True

    for t, s in enumerate(K.simplices[n]):
        local = {v: geom.corners[t, i] for i, v in enumerate(s)}
        for (ia, ib) in itertools.combinations(range(n + 1), 2):
            m = mid(s[ia], s[ib])
            pt = 0.5 * (local[s[ia]] + local[s[ib]])
            if project is not None:
                pt = project(pt)
            local[m] = pt
            if not seen[m]:
                vertex_coords[m] = pt
                seen[m] = True
        if n == 1:
            a, b = s
            pieces = [(a, mid(a, b)), (mid(a, b), b)]
        elif n == 2:
            a, b, c = s
            ab, ac, bc = mid(a, b), mid(a, c), mid(b, c)
            pieces = [(a, ab, ac), (b, ab, bc), (c, ac, bc), (ab, ac, bc)]
        else:
            a, b, c, d = s
            m = {(i, j): mid(s[i], s[j])
                 for i, j in itertools.combinations(range(4), 2)}
            pieces = [
                (a, m[0, 1], m[0, 2], m[0, 3]),
                (b, m[0, 1], m[1, 2], m[1, 3]),
                (c, m[0, 2], m[1, 2], m[2, 3]),
                (d, m[0, 3], m[1, 3], m[2, 3]),
            ]
            diag = min(_OCTAHEDRON_RING,
                       key=lambda dg: (np.linalg.norm(local[m[dg[0]]] - local[m[dg[1]]]),
                                       dg))
            ring = _OCTAHEDRON_RING[diag]
            e0, e1 = m[diag[0]], m[diag[1]]
            for r in range(4):
                pieces.append((e0, e1, m[ring[r]], m[ring[(r + 1) % 4]]))
        for piece in pieces:
            order = sorted(piece)
            children.append(tuple(order))
            child_corners.append([local[v] for v in order])

    K2 = SimplicialComplex.from_top_simplices(n, children)
    betti = getattr(K, "known_betti", None)
    if betti is not None:
        K2.known_betti = betti
    pos = {s: i for i, s in enumerate(children)}
    corners = np.array([child_corners[pos[s]] for s in K2.simplices[n]])
    geom2 = GeometryData(K2, vertex_coords, corners=corners,
                         quadrature=geom.quadrature, description=geom.description,
                         frame_builder=geom.frame_builder)
    return K2, geom2


def build_interval_complex(segments: int = 4):
    """Path complex modelling a closed interval (the rotating-sphere quotient)."""
    if segments < 1:
        raise ValueError("need at least one segment")
    verts = [(i,) for i in range(segments + 1)]
    edges = [(i, i + 1) for i in range(segments)]
    K = SimplicialComplex(1, [verts, edges])
    K.known_betti = (1, 0)
    return K
