"""Cohomology over the reals: Betti numbers, harmonic bases, induced maps.

Everything here works on cochains with the combinatorial (identity) inner
product, independent of any metric.  Ranks come from dense SVD with a
relative threshold; complexes too large for that can carry `known_betti`
(builders set it, subdivision preserves it) which the kernel-dimension
helper falls back on.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .complexes import SimplicialComplex, coboundary_matrix

RANK_RTOL = 1e-9
# dense-SVD size guard: m*n above this raises instead of thrashing memory
MAX_DENSE_ELEMENTS = 30_000_000


def matrix_rank(A, rtol: float = RANK_RTOL) -> int:
    """SVD rank with a relative threshold sigma > rtol * sigma_max.

    Warns when the spectrum has a singular value within a factor 10 of the
    cut on either side, i.e. when the rank decision is marginal.
    """
    if sp.issparse(A):
        if A.shape[0] * A.shape[1] > MAX_DENSE_ELEMENTS:
            raise ValueError(
                f"matrix {A.shape} too large for dense rank computation")
        A = A.toarray()
    A = np.asarray(A, dtype=float)
    if A.size == 0:
        return 0
    svals = np.linalg.svd(A, compute_uv=False)
    if svals[0] == 0.0:
        return 0
    cut = rtol * svals[0]
    marginal = np.any((svals > cut / 10.0) & (svals < cut * 10.0))
    if marginal:
        warnings.warn(
            "rank threshold is marginal: singular value within 10x of cut",
            RuntimeWarning, stacklevel=2)
    return int(np.count_nonzero(svals > cut))


def _rank_cache(K: SimplicialComplex) -> dict:
    cache = getattr(K, "_rank_cache", None)
    if cache is None:
        cache = {}
        K._rank_cache = cache
    return cache


def coboundary_rank(K: SimplicialComplex, p: int) -> int:
    """rank of d_p : C^p -> C^{p+1}; cached per complex."""
    if p < 0 or p >= K.dimension:
        return 0
    cache = _rank_cache(K)
    if p not in cache:
        cache[p] = matrix_rank(coboundary_matrix(K, p))
    return cache[p]


def betti_numbers(K: SimplicialComplex) -> list[int]:
    """Real Betti numbers b_0..b_n from coboundary ranks.

    Degree by degree via kernel_dimension so that meshes whose coboundaries
    exceed the dense-SVD budget still resolve through their recorded Betti
    data.
    """
    return [betti_number(K, p) for p in range(K.dimension + 1)]


def kernel_dimension(K: SimplicialComplex, p: int) -> int:
    """dim Ker d_p on p-cochains (p < 0 counts as 0, p = n gives full kernel).

    Computed as b_p + rank d_{p-1}.  When the complex is too large for SVD
    ranks but carries `known_betti`, the ranks telescope from degree 0:
    rank d_q = n_q - b_q - rank d_{q-1}.
    """
    if p < 0:
        return 0
    if p > K.dimension:
        raise ValueError(f"degree {p} above complex dimension {K.dimension}")
    if p == K.dimension:
        return K.num(p)  # d_n is the zero map
    try:
        return K.num(p) - coboundary_rank(K, p)
    except ValueError:
        betti = getattr(K, "known_betti", None)
        if betti is None:
            raise
        rank = 0  # rank d_{-1}
        for q in range(p):
            rank = K.num(q) - betti[q] - rank
        return betti[p] + rank


def betti_number(K: SimplicialComplex, p: int) -> int:
    """Single Betti number; honours the known_betti fallback of large meshes."""
    if p < 0 or p > K.dimension:
        return 0
    if p == 0:
        return kernel_dimension(K, 0)
    return kernel_dimension(K, p) - (K.num(p - 1) - kernel_dimension(K, p - 1))


@dataclass
class CohomologyBasis:
    """Orthonormal harmonic representatives of H^p in the cochain metric.

    `vectors` has one column per class; columns span
    Ker d_p  intersect  Ker d_{p-1}^T.
    """

    complex: SimplicialComplex
    degree: int
    vectors: np.ndarray

    @property
    def betti(self):
        return self.vectors.shape[1]


def cohomology_basis(K: SimplicialComplex, p: int) -> CohomologyBasis:
    """Harmonic basis of H^p via the nullspace of the stacked coboundaries."""
    if not 0 <= p <= K.dimension:
        raise ValueError(f"degree {p} out of range 0..{K.dimension}")
    n_p = K.num(p)
    blocks = []
    if p < K.dimension:
        blocks.append(coboundary_matrix(K, p).toarray())
    if p > 0:
        blocks.append(coboundary_matrix(K, p - 1).toarray().T)
    if not blocks:
        return CohomologyBasis(K, p, np.eye(n_p))
    S = np.vstack(blocks)
    if S.size > MAX_DENSE_ELEMENTS:
        raise ValueError(f"complex too large for a dense harmonic basis {S.shape}")
    _, svals, vt = np.linalg.svd(S, full_matrices=True)
    cut = RANK_RTOL * (svals[0] if len(svals) and svals[0] > 0 else 1.0)
    rank = int(np.count_nonzero(svals > cut))
    return CohomologyBasis(K, p, vt[rank:].T.copy())


def cochain_pullback(K_dom: SimplicialComplex, K_cod: SimplicialComplex,
                     vertex_map, p: int) -> sp.csr_matrix:
    """Pullback C^p(codomain) -> C^p(domain) of a simplicial vertex map.

    vertex_map sends domain vertex indices to codomain vertex indices (a
    dict or array).  A domain simplex whose image degenerates contributes a
    zero row; otherwise the entry is the parity of the permutation sorting
    the image vertices.
    """
    vmap = (lambda v: vertex_map[v]) if not callable(vertex_map) else vertex_map
    rows, cols, vals = [], [], []
    cod_index = K_cod.index[p]
    for i, s in enumerate(K_dom.simplices[p]):
        image = [vmap(v) for v in s]
        if len(set(image)) != len(image):
            continue
        order = sorted(range(len(image)), key=lambda a: image[a])
        tgt = tuple(image[a] for a in order)
        if tgt not in cod_index:
            raise ValueError(
                f"image simplex {tgt} missing from codomain: not a simplicial map")
        sign = 1
        seq = list(order)
        for a in range(len(seq)):  # parity by counting inversions
            for b in range(a + 1, len(seq)):
                if seq[a] > seq[b]:
                    sign = -sign
        rows.append(i)
        cols.append(cod_index[tgt])
        vals.append(sign)
    return sp.csr_matrix(
        (np.asarray(vals, dtype=np.int64), (rows, cols)),
        shape=(K_dom.num(p), K_cod.num(p)),
    )


def check_chain_map(K_dom: SimplicialComplex, K_cod: SimplicialComplex,
                    vertex_map, p: int, tol: float = 1e-10) -> None:
    """Assert d_p pullback_p = pullback_{p+1} d_p (exact for integer data)."""
    if p >= min(K_dom.dimension, K_cod.dimension):
        return
    left = coboundary_matrix(K_dom, p) @ cochain_pullback(K_dom, K_cod, vertex_map, p)
    right = cochain_pullback(K_dom, K_cod, vertex_map, p + 1) @ coboundary_matrix(K_cod, p)
    diff = (left - right).tocoo()
    if len(diff.data) and np.max(np.abs(diff.data)) > tol:
        raise ValueError("vertex map does not commute with the coboundary")


def induced_map_kernel_dim(K_dom: SimplicialComplex, K_cod: SimplicialComplex,
                           vertex_map, p: int) -> int:
    """dim Ker of the induced map H^p(codomain) -> H^p(domain).

    The projection M -> M/G is simplicial on compatible meshes; its pullback
    on harmonic representatives, re-projected to domain harmonics, is the
    induced map in orthonormal bases.
    """
    check_chain_map(K_dom, K_cod, vertex_map, p)
    if p > 0:
        check_chain_map(K_dom, K_cod, vertex_map, p - 1)
    basis_cod = cohomology_basis(K_cod, p)
    if basis_cod.betti == 0:
        return 0
    basis_dom = cohomology_basis(K_dom, p)
    P = cochain_pullback(K_dom, K_cod, vertex_map, p)
    induced = basis_dom.vectors.T @ (P @ basis_cod.vectors)
    return basis_cod.betti - matrix_rank(induced, rtol=1e-8)


def kernel_dim_lower_bound(betti_dom: int, betti_cod: int) -> tuple[int, bool]:
    """(bound, exact) for dim Ker(H^p(codomain) -> H^p(domain)) from ranks alone.

    The kernel has dimension at least b_cod - b_dom; the bound is exact
    whenever the domain has no cohomology in this degree.
    """
    return max(0, betti_cod - betti_dom), betti_dom == 0
