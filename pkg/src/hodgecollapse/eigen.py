"""Generalized eigensolvers for the weighted form Laplacians.

Spectra come from matrix pencils (A, B) with B a weighted mass matrix.  The
exact-sequence pencil for d-image eigenvalues is

    A = d^T M_p(eps) d,   B = M_{p-1}(eps)   on (p-1)-cochains,

whose kernel is Ker d, of dimension known exactly from cohomology; the
solver verifies that count and treats a mismatch as a hard numerical
failure rather than reporting a shifted spectrum.

Small problems go through dense eigh, which doubles as the oracle for the
blocked shift-invert subspace iteration used above the dense cutoff.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .cohomology import betti_number, kernel_dimension
from .complexes import coboundary_matrix
from .feec import MassFamily

DENSE_CUTOFF = 2000
ZERO_TOL = 1e-8
GROUP_RTOL = 1e-6
COND_LIMIT = 1e12


class SpectralError(RuntimeError):
    """Numerical failure: wrong kernel count or unusable residuals."""


class ConditioningError(SpectralError):
    """Pencil mass matrix too ill-conditioned to trust (small eps)."""


@dataclass
class SpectrumResult:
    """Positive spectrum window of one pencil, with its verified kernel."""

    eigenvalues: np.ndarray
    zero_modes: int
    expected_zero_modes: int
    cond_estimate: float
    method: str
    degree: int
    eps: Optional[float] = None
    residuals: Optional[np.ndarray] = None
    iterations: int = 0
    vectors: Optional[np.ndarray] = None

    @property
    def multiplicities(self) -> list[int]:
        """Cluster sizes of the positive eigenvalues at relative gap 1e-6."""
        groups = []
        for lam in self.eigenvalues:
            if groups and lam <= groups[-1][-1] * (1.0 + GROUP_RTOL):
                groups[-1].append(lam)
            else:
                groups.append([lam])
        return [len(g) for g in groups]

    def summary(self) -> str:
        eps = "L2" if self.eps is None else f"eps={self.eps:g}"
        lams = ", ".join(f"{v:.6g}" for v in self.eigenvalues[:8])
        return (f"p={self.degree} {eps}: {self.zero_modes} zero modes, "
                f"positive [{lams}] ({self.method})")


def _exact_one_norm(A) -> float:
    A = sp.csc_matrix(A)
    if A.nnz == 0:
        return 0.0
    return float(np.max(np.abs(A).sum(axis=0)))


def _inverse_one_norm_estimate(solve, n, maxit=5) -> float:
    """Hager's 1-norm estimator for a symmetric inverse given its solve.

    Deterministic (fixed uniform start, no random restarts) so condition
    estimates are identical across runs; report files depend on them.
    """
    x = np.full(n, 1.0 / n)
    est = 0.0
    last = -1
    for _ in range(maxit):
        y = solve(x)
        est = max(est, float(np.linalg.norm(y, 1)))
        xi = np.where(y >= 0, 1.0, -1.0)
        z = solve(xi)  # symmetric solve is its own adjoint
        j = int(np.argmax(np.abs(z)))
        if abs(z[j]) <= float(z @ x) or j == last:
            break
        x = np.zeros(n)
        x[j] = 1.0
        last = j
    return est


def condition_estimate(B) -> float:
    """1-norm condition estimate of a sparse SPD matrix via its LU solve."""
    B = sp.csc_matrix(B)
    if B.shape[0] == 0:
        return 1.0
    lu = spla.splu(B)
    return _exact_one_norm(B) * _inverse_one_norm_estimate(lu.solve, B.shape[0])


def _dense_smallest(A, B, k):
    A = A.toarray() if sp.issparse(A) else np.asarray(A, dtype=float)
    B = B.toarray() if sp.issparse(B) else np.asarray(B, dtype=float)
    vals, vecs = sla.eigh(0.5 * (A + A.T), 0.5 * (B + B.T))
    return vals[:k], vecs[:, :k]


def _b_orthonormalize(Y, BY):
    G = Y.T @ BY
    G = 0.5 * (G + G.T)
    w, U = np.linalg.eigh(G)
    keep = w > w[-1] * 1e-14
    W = U[:, keep] / np.sqrt(w[keep])
    return Y @ W


def _subspace_smallest(A, B, k, seed=0, tol=1e-11, maxit=500):
    """Blocked shift-invert subspace iteration with B-inner products.

    Iterates X <- (A + delta B)^{-1} B X with a shift just below the
    spectrum, B-orthonormalizes, and Rayleigh-Ritz extracts ascending
    eigenvalues.  Leading pairs whose residuals reach the floor are locked
    out of the block: a large kernel otherwise dominates the shift-inverted
    operator and its amplification ruins the Gram conditioning for the
    positive pairs behind it.  Deterministic for a fixed seed.
    """
    n = A.shape[0]
    block = min(n, k + max(8, k // 3))
    norm_a = _exact_one_norm(A) or 1.0
    norm_b = _exact_one_norm(B) or 1.0
    delta = 1e-6 * norm_a / norm_b
    lu = spla.splu(sp.csc_matrix(A + delta * B))
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, block))
    locked = np.zeros((n, 0))
    locked_vals = np.zeros(0)
    prev = None
    theta = np.zeros(0)
    for it in range(1, maxit + 1):
        Y = lu.solve(B @ X)
        if locked.shape[1]:
            Y -= locked @ (locked.T @ (B @ Y))
        Y = _b_orthonormalize(Y, B @ Y)
        H = Y.T @ (A @ Y)
        theta, S = np.linalg.eigh(0.5 * (H + H.T))
        X = Y @ S
        want = min(k - len(locked_vals), len(theta))
        if prev is not None and len(prev) >= want:
            ref = max(np.max(np.abs(theta[:want])), delta)
            if np.all(np.abs(theta[:want] - prev[:want]) <= tol * ref):
                return (np.concatenate([locked_vals, theta[:want]]),
                        np.hstack([locked, X[:, :want]]), it)
        prev = theta
        if it % 5 == 0 and want > 0:
            res = residual_norms(A, B, theta[:want], X[:, :want])
            floor = 1e-12 * (norm_a + np.abs(theta[:want]) * norm_b)
            m = 0
            while m < want and res[m] <= floor[m]:
                m += 1
            if m:
                locked = np.hstack([locked, X[:, :m]])
                locked_vals = np.concatenate([locked_vals, theta[:m]])
                if len(locked_vals) >= k:
                    return locked_vals[:k], locked[:, :k], it
                X = X[:, m:]
                prev = None
    m = min(k - len(locked_vals), len(theta))
    vals = np.concatenate([locked_vals, theta[:m]])
    vecs = np.hstack([locked, X[:, :m]])
    res = residual_norms(A, B, vals, vecs)
    raise SpectralError(
        f"subspace iteration did not converge in {maxit} iterations; "
        f"residual norms {np.array2string(res, precision=3)}")


def residual_norms(A, B, vals, vecs) -> np.ndarray:
    """Per-pair 2-norms of A v - lambda B v."""
    R = A @ vecs - (B @ vecs) * np.asarray(vals)[None, :]
    return np.linalg.norm(R, axis=0)


def _check_residuals(A, B, vals, vecs, context):
    """Every reported pair must satisfy |Av - lBv| <= 1e-8 |Bv| max(1, l)."""
    res = residual_norms(A, B, vals, vecs)
    limit = 1e-8 * np.linalg.norm(B @ vecs, axis=0) * np.maximum(1.0, vals)
    if np.any(res > limit):
        worst = int(np.argmax(res - limit))
        raise SpectralError(
            f"{context}: eigenpair {worst} residual {res[worst]:.3e} exceeds "
            f"{limit[worst]:.3e}")
    return res


def smallest_generalized_eigenpairs(A, B, k, seed=0, tol=1e-11,
                                    dense_cutoff=DENSE_CUTOFF, method=None):
    """k smallest eigenpairs of A x = lambda B x, ascending.

    method None picks dense below the cutoff; "dense" and "subspace" force a
    path (the dense path is the oracle in tests).  Returns the eigenvalues,
    B-orthonormal vectors, the method used, and the iteration count (0 for
    the direct dense path).
    """
    n = A.shape[0]
    k = min(k, n)
    if method is None:
        method = "dense" if n <= dense_cutoff else "subspace"
    if method == "dense":
        vals, vecs = _dense_smallest(A, B, k)
        iterations = 0
    elif method == "subspace":
        vals, vecs, iterations = _subspace_smallest(
            sp.csr_matrix(A), sp.csr_matrix(B), k, seed=seed, tol=tol)
    else:
        raise ValueError(f"unknown eigensolver method {method!r}")
    return vals, vecs, method, iterations


def _verified_zero_count(vals, expected, context):
    """Count near-zero leading eigenvalues and check it matches `expected`.

    Primary rule: below ZERO_TOL relative to the window maximum.  Fallback:
    accept the expected split when it sits on a four-decade relative gap.
    """
    ref = vals[-1] if len(vals) else 0.0
    if ref <= 0.0:
        count = len(vals)
    else:
        count = int(np.sum(vals < ZERO_TOL * ref))
    if count != expected:
        gap_ok = (
            0 < expected < len(vals)
            and vals[expected] > 0.0
            and max(vals[expected - 1], 0.0) <= 1e-4 * vals[expected]
        )
        if expected == 0 and len(vals) and vals[0] > 1e-4 * ref:
            gap_ok = True
        if not gap_ok:
            raise SpectralError(
                f"{context}: found {count} near-zero eigenvalues, expected "
                f"{expected}; leading window {vals[:expected + 2]}")
        count = expected
    return count


def im_d_pencil(family: MassFamily, p: int, eps: Optional[float] = None):
    """(A, B) with A = d^T M_p(eps) d and B = M_{p-1}(eps), symmetrized."""
    K = family.complex
    if not 1 <= p <= K.dimension:
        raise ValueError(f"degree {p} out of range 1..{K.dimension}")
    D = coboundary_matrix(K, p - 1).astype(float)
    Mp = family.weighted_mass_matrix(p, eps)
    A = (D.T @ (Mp @ D)).tocsr()
    return (A + A.T) * 0.5, family.weighted_mass_matrix(p - 1, eps)


def spectrum_im_d(family: MassFamily, p: int, eps: Optional[float] = None,
                  k: int = 6, seed: int = 0, tol: float = 1e-11,
                  dense_cutoff: int = DENSE_CUTOFF,
                  method: Optional[str] = None,
                  keep_vectors: bool = False) -> SpectrumResult:
    """k smallest eigenvalues of the weighted Laplacian on Im(d) in degree p.

    Solves the pencil (d^T M_p d, M_{p-1}); its positive eigenvalues are the
    degree-p d-image spectrum, its kernel is Ker d_{p-1} and is verified
    against the cohomological count.
    """
    K = family.complex
    A, Mq = im_d_pencil(family, p, eps)
    cond = condition_estimate(Mq)
    if cond > COND_LIMIT:
        raise ConditioningError(
            f"mass matrix at p={p - 1}, eps={eps} has condition estimate "
            f"{cond:.2e} beyond {COND_LIMIT:.0e}")
    expected = kernel_dimension(K, p - 1)
    total = min(expected + k, A.shape[0])
    vals, vecs, used, iters = smallest_generalized_eigenpairs(
        A, Mq, total, seed=seed, tol=tol, dense_cutoff=dense_cutoff,
        method=method)
    zeros = _verified_zero_count(vals, expected, f"Im(d) spectrum p={p}")
    res = _check_residuals(A, sp.csr_matrix(Mq), vals[zeros:], vecs[:, zeros:],
                           f"Im(d) spectrum p={p}")
    return SpectrumResult(
        eigenvalues=np.asarray(vals[zeros:], dtype=float),
        zero_modes=zeros, expected_zero_modes=expected,
        cond_estimate=cond, method=used, degree=p, eps=eps,
        residuals=res, iterations=iters,
        vectors=vecs[:, zeros:] if keep_vectors else None)


def hodge_spectrum(family: MassFamily, p: int, eps: Optional[float] = None,
                   k: int = 6, seed: int = 0,
                   dense_cutoff: int = DENSE_CUTOFF) -> SpectrumResult:
    """k smallest positive eigenvalues of the full weighted Hodge Laplacian.

    Assembles up and down parts against the weighted metric; the kernel is
    the degree-p cohomology and is verified against its Betti number.  The
    down part needs an inverse mass, so this path is dense-scale only.
    """
    K = family.complex
    if not 0 <= p <= K.dimension:
        raise ValueError(f"degree {p} out of range 0..{K.dimension}")
    n_p = K.num(p)
    if n_p > 4000:
        raise ValueError("full Hodge spectrum is limited to dense-scale meshes")
    B = family.weighted_mass_matrix(p, eps)
    A = sp.csr_matrix((n_p, n_p))
    if p < K.dimension:
        D = coboundary_matrix(K, p).astype(float)
        Mup = family.weighted_mass_matrix(p + 1, eps)
        A = A + D.T @ (Mup @ D)
    if p > 0:
        Dd = coboundary_matrix(K, p - 1).astype(float)
        Mq = family.weighted_mass_matrix(p - 1, eps)
        C = (B @ Dd).toarray()
        A = sp.csr_matrix(A + C @ spla.splu(sp.csc_matrix(Mq)).solve(C.T))
    A = (A + A.T) * 0.5
    cond = condition_estimate(B)
    if cond > COND_LIMIT:
        raise ConditioningError(
            f"mass matrix at p={p}, eps={eps} has condition estimate "
            f"{cond:.2e} beyond {COND_LIMIT:.0e}")
    expected = betti_number(K, p)
    total = min(expected + k, n_p)
    vals, vecs, used, iters = smallest_generalized_eigenpairs(
        A, B, total, seed=seed, dense_cutoff=max(dense_cutoff, 4000),
        method="dense")
    zeros = _verified_zero_count(vals, expected, f"Hodge spectrum p={p}")
    res = _check_residuals(A, sp.csr_matrix(B), vals[zeros:], vecs[:, zeros:],
                           f"Hodge spectrum p={p}")
    return SpectrumResult(
        eigenvalues=np.asarray(vals[zeros:], dtype=float),
        zero_modes=zeros, expected_zero_modes=expected,
        cond_estimate=cond, method=used, degree=p, eps=eps,
        residuals=res, iterations=iters)
