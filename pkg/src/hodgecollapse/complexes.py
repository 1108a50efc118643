"""Simplicial complexes with exact integer chain algebra.

Simplices are canonicalized as sorted vertex tuples; the orientation of a
face inside a boundary is the parity of the omitted-vertex position, which
makes d(d(.)) = 0 hold in exact integer arithmetic.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp


class SimplicialComplex:
    """Oriented simplicial complex with dense 0-based indices per degree.

    Parameters
    ----------
    dimension:
        Top degree n (>= 0).
    simplices:
        For each p in 0..n, a sequence of p-simplices given as vertex index
        tuples.  Tuples are sorted and deduplicated order-preservingly; the
        resulting per-degree lists are sorted lexicographically so indices
        are stable across rebuilds.
    """

    def __init__(self, dimension, simplices):
        if dimension < 0:
            raise ValueError("dimension must be non-negative")
        if len(simplices) != dimension + 1:
            raise ValueError("need one simplex list per degree 0..n")
        self.dimension = int(dimension)
        self.simplices = []
        self.index = []
        for p, plist in enumerate(simplices):
            canon = sorted({tuple(sorted(int(v) for v in s)) for s in plist})
            for s in canon:
                if len(s) != p + 1:
                    raise ValueError(f"degree-{p} simplex {s} has {len(s)} vertices")
                if len(set(s)) != p + 1:
                    raise ValueError(f"simplex {s} repeats a vertex")
            self.simplices.append(canon)
            self.index.append({s: i for i, s in enumerate(canon)})

    @classmethod
    def from_top_simplices(cls, dimension, top):
        """Close a list of top simplices under faces."""
        levels = [set() for _ in range(dimension + 1)]
        for s in top:
            s = tuple(sorted(int(v) for v in s))
            if len(s) != dimension + 1:
                raise ValueError(f"top simplex {s} is not {dimension}-dimensional")
            for p in range(dimension + 1):
                levels[p].update(itertools.combinations(s, p + 1))
        return cls(dimension, [sorted(l) for l in levels])

    def counts(self):
        return [len(s) for s in self.simplices]

    def num(self, p):
        if 0 <= p <= self.dimension:
            return len(self.simplices[p])
        return 0

    def __repr__(self):
        return f"SimplicialComplex(dim={self.dimension}, counts={self.counts()})"


def boundary_matrix(K: SimplicialComplex, p: int) -> sp.csr_matrix:
    """Integer matrix of the boundary operator C_p -> C_{p-1}.

    Column s of the result holds the signed faces of the p-th simplex:
    omitting vertex position i contributes (-1)^i.  Entries are in
    {-1, 0, +1} with exactly p+1 nonzeros per column.
    """
    if not 1 <= p <= K.dimension:
        raise ValueError(f"boundary degree p={p} out of range 1..{K.dimension}")
    rows, cols, vals = [], [], []
    face_index = K.index[p - 1]
    for j, s in enumerate(K.simplices[p]):
        for i in range(p + 1):
            face = s[:i] + s[i + 1:]
            rows.append(face_index[face])
            cols.append(j)
            vals.append(1 if i % 2 == 0 else -1)
    mat = sp.coo_matrix(
        (np.asarray(vals, dtype=np.int64), (rows, cols)),
        shape=(K.num(p - 1), K.num(p)),
    )
    return mat.tocsr()


def coboundary_matrix(K: SimplicialComplex, p: int) -> sp.csr_matrix:
    """Integer matrix of d_p : C^p -> C^{p+1} (transpose of boundary_{p+1})."""
    if not 0 <= p < K.dimension:
        raise ValueError(f"coboundary degree p={p} out of range 0..{K.dimension - 1}")
    return boundary_matrix(K, p + 1).T.tocsr()


def integer_triplets(mat) -> list[tuple[int, int, int]]:
    """Deduplicated (row, col, value) triplets of an integer sparse matrix."""
    coo = sp.coo_matrix(mat)
    coo.sum_duplicates()
    return [
        (int(r), int(c), int(v))
        for r, c, v in zip(coo.row, coo.col, coo.data)
        if v != 0
    ]


@dataclass
class ComplexReport:
    """Diagnostics from validate_complex; empty lists mean a valid complex."""

    missing_faces: list = field(default_factory=list)
    duplicate_simplices: list = field(default_factory=list)
    boundary_violations: list = field(default_factory=list)

    @property
    def ok(self):
        return not (
            self.missing_faces or self.duplicate_simplices or self.boundary_violations
        )

    def summary(self):
        if self.ok:
            return "valid complex"
        parts = []
        if self.missing_faces:
            parts.append(f"{len(self.missing_faces)} missing faces")
        if self.duplicate_simplices:
            parts.append(f"{len(self.duplicate_simplices)} duplicate simplices")
        if self.boundary_violations:
            parts.append(f"{len(self.boundary_violations)} nonzero dd entries")
        return ", ".join(parts)


def validate_complex(K: SimplicialComplex) -> ComplexReport:
    """Check closure under faces, duplicates, and dd = 0 over the integers.

    Diagnostic only: problems are reported, never raised.  The constructor
    already canonicalizes, so duplicate detection guards hand-built inputs
    that bypassed it (e.g. mutated simplex lists).
    """
    report = ComplexReport()
    for p in range(K.dimension + 1):
        seen = {}
        for i, s in enumerate(K.simplices[p]):
            if s in seen:
                report.duplicate_simplices.append((p, s))
            seen[s] = i
        if p == 0:
            continue
        face_index = K.index[p - 1]
        for s in K.simplices[p]:
            for i in range(p + 1):
                face = s[:i] + s[i + 1:]
                if face not in face_index:
                    report.missing_faces.append((p, s, face))
    if not report.missing_faces and not report.duplicate_simplices:
        for p in range(2, K.dimension + 1):
            prod = (boundary_matrix(K, p - 1) @ boundary_matrix(K, p)).tocoo()
            prod.sum_duplicates()
            for r, c, v in zip(prod.row, prod.col, prod.data):
                if v != 0:
                    report.boundary_violations.append((p, int(r), int(c), int(v)))
    return report


def euler_characteristic(K: SimplicialComplex) -> int:
    """Alternating sum of simplex counts."""
    return sum((-1) ** p * K.num(p) for p in range(K.dimension + 1))
