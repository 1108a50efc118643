"""Collapse sweeps, biLipschitz spectrum comparisons, and duality tables.

A sweep tracks the small end of the degree-p spectrum along a decreasing
grid of collapse parameters and judges it against the kernel dimension
predicted by the quotient cohomology: the first j eigenvalues must fall
while the (j+1)-st stays put.  The verdict is recorded data plus a labeled
check, never a proof claim.

The comparison path realizes the biLipschitz eigenvalue bound: a pointwise
metric distortion s moves every degree-p eigenvalue by at most e^{Js} with
J = 2p + n.

Reports serialize to JSON (lossless round trip) and to flat CSV.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .builders import ActionData, GeometryData
from .cohomology import (betti_number, induced_map_kernel_dim,
                         kernel_dim_lower_bound)
from .complexes import SimplicialComplex
from .eigen import ConditioningError, spectrum_im_d
from .feec import MassFamily

DECAY_FACTOR = 10.0
BULK_FACTOR = 3.0
EPS_RANGE = (0.05, 1.0)


def default_eps_grid(points: int = 5) -> tuple:
    """Log-spaced collapse grid spanning [0.05, 1], largest value first."""
    return tuple(float(e) for e in np.geomspace(1.0, 0.05, points))


def theorem_kernel_dim(K: SimplicialComplex, action: ActionData, p: int,
                       quotient=None) -> tuple:
    """(j, exact): dimension of Ker(H^p(quotient) -> H^p(total space)).

    Uses the induced map of a simplicial projection when one is attached to
    the action, otherwise the rank bound max(0, b_p(quotient) - b_p(M)),
    which is exact whenever b_p(M) = 0.  An explicit `quotient` argument
    (a Betti tuple, or a (complex, vertex_map) pair) overrides the action's
    own data.
    """
    qmap = action.quotient_map
    qbetti = action.quotient_betti
    if quotient is not None:
        if (isinstance(quotient, tuple) and len(quotient) == 2
                and isinstance(quotient[0], SimplicialComplex)):
            qmap, qbetti = quotient, None
        else:
            qmap, qbetti = None, tuple(int(b) for b in quotient)
    if qmap is not None:
        Kq, vertex_map = qmap
        return induced_map_kernel_dim(K, Kq, vertex_map, p), True
    if qbetti is not None:
        b_cod = qbetti[p] if p < len(qbetti) else 0
        return kernel_dim_lower_bound(betti_number(K, p), b_cod)
    raise ValueError(
        "missing quotient data: the action carries neither Betti numbers "
        "of the orbit space nor a simplicial projection")


@dataclass
class SweepReport:
    """Eigenvalue curves of one collapse sweep plus the labeled verdict."""

    mesh: str
    action: str
    degree: int
    eps_grid: list
    eigenvalues: list          # one ascending row per eps, smallest k values
    zero_modes: list
    cond_estimates: list
    j_theorem: int
    j_exact: bool
    decay_factor: float
    decay_observed: list       # lambda_i(eps_max) / lambda_i(eps_min), i < j
    bulk_variation: Optional[float]
    verdict: str
    k: int
    abort_reason: Optional[str] = None

    def __post_init__(self):
        for a, b in zip(self.eps_grid, self.eps_grid[1:]):
            if not b < a:
                raise ValueError("eps grid must be strictly decreasing")
        for row in self.eigenvalues:
            if any(y < x for x, y in zip(row, row[1:])):
                raise ValueError("eigenvalue rows must be ascending")

    def to_dict(self) -> dict:
        return {
            "kind": "sweep", "mesh": self.mesh, "action": self.action,
            "degree": self.degree, "eps_grid": list(self.eps_grid),
            "eigenvalues": [list(r) for r in self.eigenvalues],
            "zero_modes": list(self.zero_modes),
            "cond_estimates": list(self.cond_estimates),
            "j_theorem": self.j_theorem, "j_exact": self.j_exact,
            "decay_factor": self.decay_factor,
            "decay_observed": list(self.decay_observed),
            "bulk_variation": self.bulk_variation,
            "verdict": self.verdict, "k": self.k,
            "abort_reason": self.abort_reason,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SweepReport":
        args = dict(d)
        args.pop("kind", None)
        return cls(**args)

    def csv_rows(self):
        yield ["mesh", "action", "p", "eps", "j", "lambda", "zero_modes",
               "cond_estimate"]
        for i, eps in enumerate(self.eps_grid):
            for j, lam in enumerate(self.eigenvalues[i], start=1):
                yield [self.mesh, self.action, str(self.degree), repr(eps),
                       str(j), repr(lam), str(self.zero_modes[i]),
                       repr(self.cond_estimates[i])]


def collapse_sweep(geometry: GeometryData, action: ActionData, p: int,
                   eps_grid=None, k: int = 6,
                   decay_factor: float = DECAY_FACTOR, seed: int = 0,
                   quotient=None, dense_cutoff: Optional[int] = None,
                   method: Optional[str] = None) -> SweepReport:
    """Track the degree-p spectrum down a collapse grid and judge the kernel.

    Verdict `consistent` requires each of the first j_theorem eigenvalues to
    drop by at least `decay_factor` from the largest to the smallest eps
    while the (j_theorem+1)-st moves by less than a factor 3.  j_theorem = 0
    yields `no prediction` (spectra recorded only).  A conditioning failure
    at small eps aborts the sweep and emits the completed prefix.
    """
    grid = default_eps_grid() if eps_grid is None else tuple(
        float(e) for e in eps_grid)
    grid = tuple(sorted(set(grid), reverse=True))
    if not grid:
        raise ValueError("empty eps grid")
    lo, hi = EPS_RANGE
    if grid[-1] < lo - 1e-12 or grid[0] > hi + 1e-12:
        raise ValueError(f"eps grid must stay within [{lo}, {hi}]")
    K = geometry.complex
    j, exact = theorem_kernel_dim(K, action, p, quotient=quotient)
    if j >= k:
        raise ValueError(f"k={k} must exceed j_theorem={j} to watch the bulk")
    family = MassFamily(geometry, action)
    solver_kwargs = {} if dense_cutoff is None else {
        "dense_cutoff": dense_cutoff}
    rows, zeros, conds = [], [], []
    abort_reason = None
    for eps in grid:
        try:
            res = spectrum_im_d(family, p, eps=eps, k=k, seed=seed,
                                method=method, **solver_kwargs)
        except ConditioningError as exc:
            abort_reason = f"eps={eps:g}: {exc}"
            break
        rows.append([float(v) for v in res.eigenvalues])
        zeros.append(res.zero_modes)
        conds.append(float(res.cond_estimate))
    done = list(grid[:len(rows)])
    decay = []
    bulk = None
    if len(rows) >= 2:
        first, last = rows[0], rows[-1]
        decay = [first[i] / last[i] for i in range(min(j, len(last)))]
        col = [r[j] for r in rows if len(r) > j]
        if col:
            bulk = max(col) / min(col)
    if abort_reason is not None:
        verdict = "aborted"
    elif j == 0:
        verdict = "no prediction"
    elif len(rows) < 2:
        verdict = "aborted"
        abort_reason = "grid has fewer than two usable points"
    elif (len(decay) == j and all(d >= decay_factor for d in decay)
            and bulk is not None and bulk < BULK_FACTOR):
        verdict = "consistent"
    else:
        verdict = "inconsistent"
    return SweepReport(
        mesh=geometry.description or "mesh", action=action.description,
        degree=p, eps_grid=done, eigenvalues=rows, zero_modes=zeros,
        cond_estimates=conds, j_theorem=j, j_exact=exact,
        decay_factor=decay_factor, decay_observed=decay,
        bulk_variation=bulk, verdict=verdict, k=k, abort_reason=abort_reason)


# ---- biLipschitz comparison ------------------------------------------------


def metric_distortion(geom_a: GeometryData, geom_b: GeometryData) -> float:
    """Pointwise length distortion s with e^{-2s} g_a <= g_b <= e^{2s} g_a.

    Half the signed log-eigenvalue spread of the Gram pencils over all
    quadrature nodes of all top simplices; doubling every length gives
    s = log 2, identical metrics give 0.
    """
    GA = np.ascontiguousarray(geom_a.metric_at_nodes())
    GB = np.ascontiguousarray(geom_b.metric_at_nodes())
    if GA.shape != GB.shape:
        raise ValueError("geometries carry different node metric shapes")
    L = np.linalg.cholesky(GA)
    Linv = np.linalg.inv(L)
    M = Linv @ GB @ np.swapaxes(Linv, -1, -2)
    logs = np.log(np.linalg.eigvalsh(M))
    return float(max(logs.max(), 0.0) - min(logs.min(), 0.0)) / 2.0


def conformal_perturb(geometry: GeometryData, u) -> GeometryData:
    """Metric e^{u} g with a piecewise-constant factor per top simplex."""
    u = np.asarray(u, dtype=float)
    nT = geometry.complex.num(geometry.complex.dimension)
    if u.shape != (nT,):
        raise ValueError(f"need one log-factor per top simplex ({nT})")
    grams = geometry.metric_at_nodes() * np.exp(u)[:, None, None, None]
    return geometry.with_node_grams(
        grams, description=f"{geometry.description}+conformal")


@dataclass
class CompareReport:
    """Spectra of one complex under two metrics against the e^{Js} bound."""

    geometry_a: str
    geometry_b: str
    degree: int
    distortion: float
    J: int
    bound: float
    eigenvalues_a: list
    eigenvalues_b: list
    ratios: list
    within_bound: list
    passed: bool

    def __post_init__(self):
        if self.distortion < 0:
            raise ValueError("distortion must be non-negative")

    def to_dict(self) -> dict:
        return {
            "kind": "compare", "geometry_a": self.geometry_a,
            "geometry_b": self.geometry_b, "degree": self.degree,
            "distortion": self.distortion, "J": self.J, "bound": self.bound,
            "eigenvalues_a": list(self.eigenvalues_a),
            "eigenvalues_b": list(self.eigenvalues_b),
            "ratios": list(self.ratios),
            "within_bound": list(self.within_bound), "passed": self.passed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CompareReport":
        args = dict(d)
        args.pop("kind", None)
        return cls(**args)

    def csv_rows(self):
        yield ["geometry_a", "geometry_b", "p", "j", "lambda_a", "lambda_b",
               "ratio", "distortion", "bound", "within_bound"]
        for j, (a, b, r, ok) in enumerate(zip(
                self.eigenvalues_a, self.eigenvalues_b, self.ratios,
                self.within_bound), start=1):
            yield [self.geometry_a, self.geometry_b, str(self.degree),
                   str(j), repr(a), repr(b), repr(r), repr(self.distortion),
                   repr(self.bound), str(ok)]


def bilipschitz_compare(K: SimplicialComplex, geom_a: GeometryData,
                        geom_b: GeometryData, p: int, k: int = 6,
                        seed: int = 0) -> CompareReport:
    """Compare degree-p spectra of one mesh under two metrics.

    Checks every ratio lambda_b/lambda_a against [e^{-Js}, e^{Js}] with
    J = 2p + n and s the pointwise metric distortion.
    """
    if geom_a.complex.simplices != K.simplices or \
            geom_b.complex.simplices != K.simplices:
        raise ValueError("mismatched complexes")
    s = metric_distortion(geom_a, geom_b)
    n = K.dimension
    J = 2 * p + n
    bound = float(np.exp(J * s))
    res_a = spectrum_im_d(MassFamily(geom_a), p, k=k, seed=seed)
    res_b = spectrum_im_d(MassFamily(geom_b), p, k=k, seed=seed)
    m = min(len(res_a.eigenvalues), len(res_b.eigenvalues))
    ea = [float(v) for v in res_a.eigenvalues[:m]]
    eb = [float(v) for v in res_b.eigenvalues[:m]]
    ratios = [b / a for a, b in zip(ea, eb)]
    slack = 1e-9
    within = [bool(1.0 / bound * (1 - slack) <= r <= bound * (1 + slack))
              for r in ratios]
    return CompareReport(
        geometry_a=geom_a.description or "A", geometry_b=geom_b.description
        or "B", degree=p, distortion=s, J=J, bound=bound,
        eigenvalues_a=ea, eigenvalues_b=eb, ratios=ratios,
        within_bound=within, passed=all(within))


# ---- Hodge duality table ---------------------------------------------------


@dataclass
class DualityRow:
    """Positive Im(d) spectrum in degree p against the Im(d*) side at n-p."""

    degree: int
    dual_degree: int
    eigenvalues: list
    dual_eigenvalues: list
    rel_gaps: list
    max_gap: float
    exact_pair: bool

    def to_dict(self) -> dict:
        return {
            "degree": self.degree, "dual_degree": self.dual_degree,
            "eigenvalues": list(self.eigenvalues),
            "dual_eigenvalues": list(self.dual_eigenvalues),
            "rel_gaps": list(self.rel_gaps), "max_gap": self.max_gap,
            "exact_pair": self.exact_pair,
        }


@dataclass
class DualityReport:
    """Degree-paired spectra; the d* side in degree q is the d side at q+1."""

    mesh: str
    action: Optional[str]
    eps: Optional[float]
    k: int
    dimension: int
    rows: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "kind": "duality", "mesh": self.mesh, "action": self.action,
            "eps": self.eps, "k": self.k, "dimension": self.dimension,
            "rows": [r.to_dict() for r in self.rows],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DualityReport":
        args = dict(d)
        args.pop("kind", None)
        args["rows"] = [DualityRow(**r) for r in d["rows"]]
        return cls(**args)

    def csv_rows(self):
        yield ["mesh", "eps", "p", "dual_p", "j", "lambda", "dual_lambda",
               "rel_gap"]
        eps = "" if self.eps is None else repr(self.eps)
        for row in self.rows:
            for j, (a, b, g) in enumerate(zip(
                    row.eigenvalues, row.dual_eigenvalues, row.rel_gaps),
                    start=1):
                yield [self.mesh, eps, str(row.degree), str(row.dual_degree),
                       str(j), repr(a), repr(b), repr(g)]


def hodge_duality_report(geometry: GeometryData,
                         action: Optional[ActionData] = None,
                         eps: Optional[float] = None, k: int = 6,
                         seed: int = 0) -> DualityReport:
    """Pair Im(d) spectra in degree p with the Im(d*) side in degree n-p.

    The coexact (n-p)-form spectrum coincides with the exact (n-p+1)-form
    spectrum, so each row compares the degree-p pencil with the degree
    n-p+1 pencil; the middle row of an odd-dimensional mesh pairs a
    pencil with itself and is exact.
    """
    if action is None:
        eps = None
    family = MassFamily(geometry, action)
    K = geometry.complex
    n = K.dimension
    cache = {}

    def window(p):
        if p not in cache:
            cache[p] = spectrum_im_d(family, p, eps=eps, k=k, seed=seed)
        return cache[p]

    rows = []
    for p in range(1, n + 1):
        dual_pencil = n - p + 1
        res_a, res_b = window(p), window(dual_pencil)
        m = min(len(res_a.eigenvalues), len(res_b.eigenvalues))
        ea = [float(v) for v in res_a.eigenvalues[:m]]
        eb = [float(v) for v in res_b.eigenvalues[:m]]
        gaps = [abs(a - b) / max(a, b) for a, b in zip(ea, eb)]
        rows.append(DualityRow(
            degree=p, dual_degree=n - p, eigenvalues=ea,
            dual_eigenvalues=eb, rel_gaps=gaps,
            max_gap=max(gaps, default=0.0),
            exact_pair=dual_pencil == p))
    return DualityReport(
        mesh=geometry.description or "mesh",
        action=None if action is None else action.description,
        eps=eps, k=k, dimension=n, rows=rows)


# ---- serialization ----------------------------------------------------------

_KINDS = {"sweep": SweepReport, "compare": CompareReport,
          "duality": DualityReport}


def report_to_json(report) -> str:
    """Deterministic JSON text for any report (trailing newline included)."""
    return json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"


def report_from_json(text: str):
    """Inverse of report_to_json; dispatches on the embedded kind tag."""
    d = json.loads(text)
    kind = d.get("kind")
    if kind not in _KINDS:
        raise ValueError(f"unknown report kind {kind!r}")
    return _KINDS[kind].from_dict(d)


def report_to_csv(report) -> str:
    """Flat CSV with one row per (grid point, eigenvalue index)."""
    return "\n".join(",".join(row) for row in report.csv_rows()) + "\n"


def write_report(report, path) -> Path:
    """Write a report as .json or .csv, chosen by the file extension."""
    path = Path(path)
    if path.suffix == ".json":
        text = report_to_json(report)
    elif path.suffix == ".csv":
        text = report_to_csv(report)
    else:
        raise ValueError(f"unsupported report extension {path.suffix!r}")
    path.write_text(text)
    return path
