"""Whitney-form mass matrices, plain and collapse-weighted.

Forms are discretized with lowest-order Whitney p-forms on each top simplex.
Values live in the coordinate basis du_I of the simplex edge chart, where
the barycentric differentials are universal; the metric enters only through
per-quadrature-node compound Gram matrices (exact pullback metric on curved
builders, constant edge Gram otherwise), so assembly is a few einsums.

The weighted family realizes, per top simplex and quadrature node,

  ||w||_eps^2 = Int rho_eps^{-1} [ |w|^2
      + sum_k eps^{-2k} sum_{j1<...<jk} |i_{X_j1} ... i_{X_jk} w|^2 ] dvol

with rho_eps = det^{1/2}(eps^2 Id + Gram(fields)) / eps^{dim stabilizer}.
Field coordinates come from the chart frames at each node; rho uses the
ambient field Gram at the node mapped back to the manifold, which is exact.
"""

from __future__ import annotations

import itertools
import math
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .builders import ActionData, GeometryData
from .complexes import coboundary_matrix


def whitney_value_tensor(n: int, p: int, bary_points: np.ndarray) -> np.ndarray:
    """Values of all local Whitney p-forms at barycentric points.

    Returns (num_points, C(n+1, p+1), C(n, p)): one coefficient vector in
    the du_I basis per local p-face (faces and coordinate sets both in
    lexicographic order).
    """
    bary_points = np.asarray(bary_points, dtype=float)
    faces = list(itertools.combinations(range(n + 1), p + 1))
    if p == 0:
        return bary_points[:, :, None].copy()
    # d(lambda_0) = -(1,...,1), d(lambda_i) = e_i in the edge chart
    A = np.vstack([-np.ones(n), np.eye(n)])
    coord_sets = list(itertools.combinations(range(n), p))
    V = np.zeros((len(bary_points), len(faces), len(coord_sets)))
    fact = float(math.factorial(p))
    for f, s in enumerate(faces):
        for a in range(p + 1):
            rows = A[[v for i, v in enumerate(s) if i != a]]
            coeff = np.array([np.linalg.det(rows[:, I]) for I in coord_sets])
            V[:, f, :] += ((-1) ** a * fact) * np.outer(bary_points[:, s[a]], coeff)
    return V


def contraction_tensor(n: int, p: int) -> np.ndarray:
    """Sign table T with (i_X w)_J = sum_{m,I} T[J, m, I] x_m w_I.

    x is the field in edge-chart coordinates; I runs over p-sets, J over
    (p-1)-sets of {0..n-1}, both lexicographic.
    """
    if p < 1:
        raise ValueError("contraction needs p >= 1")
    combos_p = list(itertools.combinations(range(n), p))
    combos_q = list(itertools.combinations(range(n), p - 1))
    q_index = {J: j for j, J in enumerate(combos_q)}
    T = np.zeros((len(combos_q), n, len(combos_p)))
    for i, I in enumerate(combos_p):
        for a, m in enumerate(I):
            T[q_index[I[:a] + I[a + 1:]], m, i] += (-1) ** a
    return T


def compound_metric(ginv: np.ndarray, p: int) -> np.ndarray:
    """Gram matrices of the du_I basis of p-covectors.

    ginv is (..., n, n), the inverse edge-chart Gram; entry (I, J) of the
    result is det(ginv[ix_(I, J)]), batched over the leading axes.
    """
    n = ginv.shape[-1]
    lead = ginv.shape[:-2]
    if p == 0:
        return np.ones(lead + (1, 1))
    if p == 1:
        return ginv.copy()
    combos = list(itertools.combinations(range(n), p))
    out = np.empty(lead + (len(combos), len(combos)))
    for a, I in enumerate(combos):
        sub = ginv[..., I, :]
        for b, J in enumerate(combos):
            out[..., a, b] = np.linalg.det(sub[..., :, J])
    return out


def _nonempty_subsets(k: int):
    for size in range(1, k + 1):
        yield from itertools.combinations(range(k), size)


class MassFamily:
    """Assembled mass matrices for one mesh, cached across degrees and eps.

    The per-(simplex, node) ingredients (compound metrics, contracted
    Whitney values, field Grams) are computed once; each eps only rescales
    and recombines them, so sweeping eps is cheap.
    """

    def __init__(self, geometry: GeometryData, action: Optional[ActionData] = None):
        self.geometry = geometry
        self.action = action
        self.complex = geometry.complex
        n = self.complex.dimension
        self.dim = n
        quad = geometry.quadrature
        self._wq = quad.weights
        gn = np.ascontiguousarray(geometry.metric_at_nodes())
        self._ginv = np.linalg.inv(gn)
        sign, logdet = np.linalg.slogdet(gn)
        if not np.all(sign > 0):
            raise ValueError("metric at quadrature nodes not positive-definite")
        self._sd = np.exp(0.5 * logdet)  # (nT, nq)
        self._metric = {}     # p -> (nT, nq, C, C)
        self._values = {}     # p -> (nq, F, C)
        self._loc2glob = {}   # p -> (nT, F) int
        self._contract = {}   # p -> sign tensor
        self._psub = {}       # p -> list of (k, (nT, nq, C, C))
        self._matrix_cache = {}
        if action is not None:
            if action.group_dim > 2:
                raise ValueError("at most two independent Killing fields supported")
            corners = geometry.corners  # (nT, n+1, amb)
            nodes = np.einsum("qv,tva->tqa", quad.points, corners)
            pts = action.manifold_point(nodes)
            fields = action.field_values(pts)  # (nT, nq, dimG, amb)
            self._field_gram = np.einsum("tqja,tqka->tqjk", fields, fields)
            # edge-chart coordinates of the fields through the node frames
            frames = geometry.frames_at_nodes()
            JTX = np.einsum("tqan,tqja->tqjn", frames, fields)
            self._field_coords = np.einsum("tqmn,tqjn->tqjm", self._ginv, JTX)

    # ---- cached ingredients -------------------------------------------

    def _whitney(self, p):
        if p not in self._values:
            self._values[p] = whitney_value_tensor(
                self.dim, p, self.geometry.quadrature.points)
        return self._values[p]

    def _lambda_metric(self, p):
        if p not in self._metric:
            self._metric[p] = compound_metric(self._ginv, p)
        return self._metric[p]

    def _local_to_global(self, p):
        if p not in self._loc2glob:
            K = self.complex
            faces = list(itertools.combinations(range(self.dim + 1), p + 1))
            index = K.index[p]
            table = np.empty((K.num(self.dim), len(faces)), dtype=np.int64)
            for t, s in enumerate(K.simplices[self.dim]):
                for f, pos in enumerate(faces):
                    table[t, f] = index[tuple(s[i] for i in pos)]
            self._loc2glob[p] = table
        return self._loc2glob[p]

    def _contraction(self, p):
        if p not in self._contract:
            self._contract[p] = contraction_tensor(self.dim, p)
        return self._contract[p]

    def _subset_metrics(self, p):
        """Pointwise quadratic forms of the contracted norms, one per subset.

        Entry (k, P) gives |i_{X_S} w|^2 = w^T P[t, q] w for a size-k subset
        S, as a (nT, nq, C, C) array on the degree-p value coordinates.
        """
        if self.action is None:
            raise ValueError("no group action attached to this mass family")
        if p not in self._psub:
            out = []
            for S in _nonempty_subsets(self.action.group_dim):
                k = len(S)
                if k > p:
                    continue
                # chain the contractions down to degree p-k
                C = None
                level = p
                for j in S:
                    T = self._contraction(level)
                    x = self._field_coords[:, :, j, :]
                    step = np.einsum("JmI,tqm->tqJI", T, x)
                    C = step if C is None else np.einsum(
                        "tqJj,tqjI->tqJI", step, C)
                    level -= 1
                low = self._lambda_metric(p - k)
                P = np.einsum("tqJI,tqJL,tqLM->tqIM", C, low, C, optimize=True)
                out.append((k, P))
            self._psub[p] = out
        return self._psub[p]

    # ---- public assembly ----------------------------------------------

    def rho_values(self, eps: float) -> np.ndarray:
        """rho_eps at every quadrature node, shape (nT, nq)."""
        if self.action is None:
            raise ValueError("no group action attached to this mass family")
        if eps <= 0:
            raise ValueError("eps must be positive")
        g = self._field_gram
        M = (eps ** 2) * np.eye(g.shape[-1]) + g
        sign, logdet = np.linalg.slogdet(M)
        if not np.all(sign > 0):
            raise ValueError("field Gram produced a non-positive determinant")
        return np.exp(0.5 * logdet) / eps ** self.action.stabilizer_dim

    def _assemble(self, p, Q):
        """Galerkin assembly of sum_t sum_q w_q sqrt(det G_tq) V^T Q V."""
        V = self._whitney(p)
        local = np.einsum(
            "q,tq,qfc,tqcd,qgd->tfg", self._wq, self._sd, V, Q, V,
            optimize=True)
        lg = self._local_to_global(p)
        F = lg.shape[1]
        rows = np.repeat(lg[:, :, None], F, axis=2)
        cols = np.repeat(lg[:, None, :], F, axis=1)
        N = self.complex.num(p)
        M = sp.coo_matrix(
            (local.ravel(), (rows.ravel(), cols.ravel())), shape=(N, N)).tocsr()
        return (M + M.T) * 0.5

    def mass_matrix(self, p: int) -> sp.csr_matrix:
        """Plain L2 mass matrix on Whitney p-forms."""
        if not 0 <= p <= self.dim:
            raise ValueError(f"degree {p} out of range 0..{self.dim}")
        key = (p, None)
        if key not in self._matrix_cache:
            self._matrix_cache[key] = self._assemble(p, self._lambda_metric(p))
        return self._matrix_cache[key]

    def weighted_mass_matrix(self, p: int, eps: Optional[float]) -> sp.csr_matrix:
        """Collapse-weighted mass matrix; eps=None falls back to plain L2."""
        if eps is None:
            return self.mass_matrix(p)
        if not 0 <= p <= self.dim:
            raise ValueError(f"degree {p} out of range 0..{self.dim}")
        key = (p, float(eps))
        if key not in self._matrix_cache:
            rho_inv = 1.0 / self.rho_values(eps)
            Q = self._lambda_metric(p).copy()
            for k, P in self._subset_metrics(p):
                Q += float(eps) ** (-2 * k) * P
            Q *= rho_inv[:, :, None, None]
            self._matrix_cache[key] = self._assemble(p, Q)
        return self._matrix_cache[key]


class RhoEvaluator:
    """Analytic rho_eps(m) from the action's Killing fields.

    Works at arbitrary manifold points with the ambient metric; this is the
    exact quantity the assembly evaluates at quadrature nodes.
    """

    def __init__(self, action: ActionData):
        self.action = action

    def __call__(self, points, eps: float) -> np.ndarray:
        if eps <= 0:
            raise ValueError("eps must be positive")
        pts = self.action.manifold_point(np.asarray(points, dtype=float))
        F = self.action.field_values(pts)
        g = np.einsum("...ja,...ka->...jk", F, F)
        M = (eps ** 2) * np.eye(g.shape[-1]) + g
        sign, logdet = np.linalg.slogdet(M)
        return np.exp(0.5 * logdet) / eps ** self.action.stabilizer_dim

    def lower_bound(self, eps: float) -> float:
        """rho_eps >= eps^(dim G - dim stabilizer) everywhere."""
        return eps ** (self.action.group_dim - self.action.stabilizer_dim)


def coboundary_stiffness(family: MassFamily, p: int,
                         eps: Optional[float] = None) -> sp.csr_matrix:
    """d^T M_p d on (p-1)-cochains, the quadratic form of |d w|^2."""
    if not 1 <= p <= family.dim:
        raise ValueError(f"degree {p} out of range 1..{family.dim}")
    D = coboundary_matrix(family.complex, p - 1).astype(float)
    M = family.weighted_mass_matrix(p, eps)
    A = (D.T @ (M @ D)).tocsr()
    return (A + A.T) * 0.5
