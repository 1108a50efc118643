"""End-to-end acceptance gate.

One test per criterion; each prints a single `criterion N: PASS/FAIL` line
(visible with -s, and on any failure) and enforces its wall-clock budget.
"""

import json
import math
import time

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from hodgecollapse import (
    MassFamily,
    betti_numbers,
    bilipschitz_compare,
    build_circle,
    build_flat_torus,
    build_icosphere,
    build_s3_600cell,
    coboundary_matrix,
    collapse_sweep,
    conformal_perturb,
    default_eps_grid,
    im_d_pencil,
    kernel_dimension,
    smallest_generalized_eigenpairs,
    spectrum_im_d,
    suspension,
)
from hodgecollapse.cli import _spectrum_dict, run_cli
from hodgecollapse.eigen import ZERO_TOL, hodge_spectrum


def _report(num, ok, detail=""):
    status = "PASS" if ok else "FAIL"
    line = f"criterion {num}: {status}"
    if detail:
        line += f" ({detail})"
    print(line)
    assert ok, line


def _built_ins():
    return {
        "circle:12": build_circle(12),
        "torus:4x4": build_flat_torus(4, 4),
        "icosphere:1": build_icosphere(1),
        "s3:600cell": build_s3_600cell(0),
    }


## 1. topology: Betti numbers and the suspension shift, exact integers


def test_criterion_1_topology():
    t0 = time.perf_counter()
    ok = betti_numbers(build_circle(12)[0]) == [1, 1]
    ok &= betti_numbers(build_flat_torus(4, 4)[0]) == [1, 2, 1]
    for level in (0, 1, 2):
        ok &= betti_numbers(build_icosphere(level)[0]) == [1, 0, 1]
    ok &= betti_numbers(build_s3_600cell(0)[0]) == [1, 0, 0, 1]
    for K in (build_circle(10)[0], build_flat_torus(4, 4)[0],
              build_icosphere(0)[0], build_s3_600cell(0)[0]):
        betti = betti_numbers(K)
        reduced = [betti[0] - 1] + betti[1:]
        ok &= betti_numbers(suspension(K)) == [1] + reduced
    elapsed = time.perf_counter() - t0
    _report(1, ok and elapsed < 10.0, f"{elapsed:.2f}s < 10s")


## 2. analytic spectra of the round spheres


def test_criterion_2_analytic_spectra():
    t0 = time.perf_counter()
    _, geom2, _ = build_icosphere(2)
    res2 = spectrum_im_d(MassFamily(geom2), 1, k=8)
    target = np.repeat([2.0, 6.0], [3, 5])
    ok = bool(np.all(np.abs(res2.eigenvalues[:8] / target - 1.0) < 0.03))
    ok &= res2.multiplicities[:2] == [3, 5]
    _, geom3, _ = build_s3_600cell(0)
    res3 = spectrum_im_d(MassFamily(geom3), 1, k=4)
    ok &= bool(np.all(np.abs(res3.eigenvalues[:4] / 3.0 - 1.0) < 0.10))
    ok &= res3.multiplicities[0] == 4
    elapsed = time.perf_counter() - t0
    err2 = float(np.max(np.abs(res2.eigenvalues[:8] / target - 1.0)))
    err3 = float(np.max(np.abs(res3.eigenvalues[:4] / 3.0 - 1.0)))
    _report(2, ok and elapsed < 60.0,
            f"S2 err {err2:.3%} < 3%, S3 err {err3:.3%} < 10%, "
            f"{elapsed:.1f}s < 60s")


## 3. zero modes across every built-in, degree, and eps


def test_criterion_3_zero_modes():
    t0 = time.perf_counter()
    ok = True
    for name, (K, geom, action) in _built_ins().items():
        family = MassFamily(geom, action)
        betti = betti_numbers(K)
        for eps in (1.0, 0.25):
            for p in range(K.dimension + 1):
                res = hodge_spectrum(family, p, eps=eps, k=4)
                ok &= res.zero_modes == betti[p]
            for p in range(1, K.dimension + 1):
                res = spectrum_im_d(family, p, eps=eps, k=4)
                ok &= res.zero_modes == kernel_dimension(K, p - 1)
    elapsed = time.perf_counter() - t0
    _report(3, ok and elapsed < 120.0, f"{elapsed:.1f}s < 120s")


## 4. Berger collapse on the 600-cell: one forced small 2-form eigenvalue


def test_criterion_4_berger_collapse():
    t0 = time.perf_counter()
    _, geom, action = build_s3_600cell(0)
    report = collapse_sweep(geom, action, 2, eps_grid=(1.0, 0.5, 0.25, 0.1),
                            k=6)
    ok = report.j_theorem == 1 and report.j_exact
    ok &= report.verdict == "consistent"
    lam = dict(zip(report.eps_grid, report.eigenvalues))
    ok &= lam[0.1][0] < 0.1 * lam[1.0][0]
    bulk = [row[1] for row in report.eigenvalues]
    ok &= max(bulk) / min(bulk) < 3.0
    elapsed = time.perf_counter() - t0
    _report(4, ok and elapsed < 300.0,
            f"verdict {report.verdict}, decay {report.decay_observed[0]:.1f}, "
            f"bulk {report.bulk_variation:.2f}, {elapsed:.1f}s < 5min")


## 5. null controls: actions whose quotients predict nothing


def test_criterion_5_null_predictions():
    t0 = time.perf_counter()
    _, geom_s, spin = build_icosphere(1)
    rot = collapse_sweep(geom_s, spin, 1, k=4)
    _, geom_t, slide = build_flat_torus(4, 4)
    trans = collapse_sweep(geom_t, slide, 1, k=4)
    ok = rot.j_theorem == 0 and rot.verdict == "no prediction"
    ok &= trans.j_theorem == 0 and trans.verdict == "no prediction"
    elapsed = time.perf_counter() - t0
    _report(5, ok and elapsed < 120.0, f"{elapsed:.1f}s < 2min")


## 6. biLipschitz eigenvalue bounds


def test_criterion_6_bilipschitz():
    t0 = time.perf_counter()
    K, geom, _ = build_flat_torus(4, 4)
    ok = True
    for p in (1, 2):
        scaled = bilipschitz_compare(K, geom, geom.scaled(2.0), p, k=6)
        ok &= scaled.passed
        ok &= all(abs(r - 0.25) <= 1e-10 * 0.25 for r in scaled.ratios)
    rng = np.random.default_rng(0)
    u = rng.uniform(-0.1, 0.1, K.num(2))
    conf = bilipschitz_compare(K, geom, conformal_perturb(geom, u), 1, k=6)
    cap = math.exp((2 * 1 + 2) * 0.1)
    ok &= conf.passed and conf.bound <= cap * (1 + 1e-9)
    ok &= all(1.0 / cap * (1 - 1e-9) <= r <= cap * (1 + 1e-9)
              for r in conf.ratios)
    elapsed = time.perf_counter() - t0
    _report(6, ok and elapsed < 120.0,
            f"scaling exact to 1e-10, conformal bound {conf.bound:.3f}, "
            f"{elapsed:.1f}s < 2min")


## 7. iterative solver against the dense oracle on every pencil used above


def _hodge_pencil(family, p, eps):
    K = family.complex
    n_p = K.num(p)
    B = family.weighted_mass_matrix(p, eps)
    A = sp.csr_matrix((n_p, n_p))
    if p < K.dimension:
        D = coboundary_matrix(K, p).astype(float)
        A = A + D.T @ (family.weighted_mass_matrix(p + 1, eps) @ D)
    if p > 0:
        Dd = coboundary_matrix(K, p - 1).astype(float)
        C = (B @ Dd).toarray()
        Mq = family.weighted_mass_matrix(p - 1, eps)
        A = sp.csr_matrix(A + C @ spla.splu(sp.csc_matrix(Mq)).solve(C.T))
    return (A + A.T) * 0.5, B


def _pencil_inventory():
    """Every (label, A, B, k) pencil the criteria above solve, deduplicated."""
    seen = {}

    def add(label, A, B, k):
        if label not in seen and A.shape[0] <= 2000:
            seen[label] = (A, B, min(k, A.shape[0]))

    built = _built_ins()
    # criterion 2
    _, geom2, _ = build_icosphere(2)
    fam2 = MassFamily(geom2)
    A, B = im_d_pencil(fam2, 1)
    add("icosphere:2/d/p1", A, B, 1 + 8)
    fam3 = MassFamily(built["s3:600cell"][1])
    A, B = im_d_pencil(fam3, 1)
    add("s3:600cell/d/p1", A, B, 1 + 4)
    # criterion 3
    for name, (K, geom, action) in built.items():
        family = MassFamily(geom, action)
        betti = betti_numbers(K)
        for eps in (1.0, 0.25):
            for p in range(K.dimension + 1):
                A, B = _hodge_pencil(family, p, eps)
                add(f"{name}/hodge/p{p}/eps{eps}", A, B, betti[p] + 4)
            for p in range(1, K.dimension + 1):
                A, B = im_d_pencil(family, p, eps)
                add(f"{name}/d/p{p}/eps{eps}", A, B,
                    kernel_dimension(K, p - 1) + 4)
    # criterion 4
    K3, geom3, hopf = built["s3:600cell"]
    fam = MassFamily(geom3, hopf)
    for eps in (1.0, 0.5, 0.25, 0.1):
        A, B = im_d_pencil(fam, 2, eps)
        add(f"s3:600cell/d/p2/eps{eps}", A, B, kernel_dimension(K3, 1) + 6)
    # criterion 5
    for name in ("icosphere:1", "torus:4x4"):
        K, geom, action = built[name]
        fam = MassFamily(geom, action)
        for eps in default_eps_grid():
            A, B = im_d_pencil(fam, 1, eps)
            add(f"{name}/d/p1/eps{eps:.6g}", A, B, 1 + 4)
    # criterion 6
    K, geom, _ = built["torus:4x4"]
    rng = np.random.default_rng(0)
    u = rng.uniform(-0.1, 0.1, K.num(2))
    variants = [("base", geom), ("x2", geom.scaled(2.0)),
                ("conf", conformal_perturb(geom, u))]
    for tag, g in variants:
        fam = MassFamily(g)
        for p in (1, 2):
            if tag == "conf" and p == 2:
                continue
            A, B = im_d_pencil(fam, p)
            add(f"torus:4x4[{tag}]/d/p{p}", A, B,
                kernel_dimension(K, p - 1) + 6)
    return seen


def test_criterion_7_solver_oracle():
    t0 = time.perf_counter()
    worst = 0.0
    checked = 0
    ok = True
    for label, (A, B, k) in _pencil_inventory().items():
        dense, _, _, _ = smallest_generalized_eigenpairs(A, B, k,
                                                         method="dense")
        iterative, _, _, _ = smallest_generalized_eigenpairs(
            A, B, k, method="subspace", seed=0)
        window = max(float(dense[-1]), 1e-300)
        zeros = int(np.sum(dense < ZERO_TOL * window))
        same_zeros = int(np.sum(iterative < ZERO_TOL * window)) == zeros
        rel = (np.abs(iterative[zeros:] - dense[zeros:])
               / np.maximum(dense[zeros:], 1e-300))
        tail_ok = bool(np.all(rel <= 1e-9))
        ok &= same_zeros and tail_ok
        worst = max(worst, float(rel.max()) if len(rel) else 0.0)
        checked += 1
        assert same_zeros and tail_ok, (label, rel.max() if len(rel) else 0)
    elapsed = time.perf_counter() - t0
    _report(7, ok, f"{checked} pencils, worst rel gap {worst:.2e} <= 1e-9, "
                   f"{elapsed:.1f}s")


## 8. repeated runs with a fixed seed produce bit-identical report files


def _c3_matrix_payload():
    rows = {}
    for name, (K, geom, action) in _built_ins().items():
        family = MassFamily(geom, action)
        for eps in (1.0, 0.25):
            for p in range(K.dimension + 1):
                res = hodge_spectrum(family, p, eps=eps, k=4)
                rows[f"{name}/hodge/p{p}/eps{eps}"] = _spectrum_dict(name, res)
            for p in range(1, K.dimension + 1):
                res = spectrum_im_d(family, p, eps=eps, k=4)
                rows[f"{name}/d/p{p}/eps{eps}"] = _spectrum_dict(name, res)
    return json.dumps(rows, indent=2, sort_keys=True) + "\n"


def _produce_report_files(base):
    base.mkdir(parents=True, exist_ok=True)
    jobs = [
        ("c2_icosphere2.json", ["spectrum", "--mesh", "icosphere:2", "--p",
                                "1", "--k", "8"]),
        ("c2_600cell.json", ["spectrum", "--mesh", "s3:600cell", "--p", "1",
                             "--k", "4"]),
        ("c4_berger.json", ["collapse", "--mesh", "s3:600cell", "--action",
                            "hopf", "--p", "2", "--eps", "1,0.5,0.25,0.1"]),
        ("c4_berger.csv", ["collapse", "--mesh", "s3:600cell", "--action",
                           "hopf", "--p", "2", "--eps", "1,0.5,0.25,0.1"]),
        ("c5_rotation.json", ["collapse", "--mesh", "icosphere:1", "--action",
                              "rotation", "--p", "1", "--k", "4"]),
        ("c5_translation.json", ["collapse", "--mesh", "torus:4x4",
                                 "--action", "translation", "--p", "1",
                                 "--k", "4"]),
        ("c6_scale.json", ["compare", "--mesh", "torus:4x4", "--p", "1",
                           "--scale", "2"]),
        ("c6_conformal.json", ["compare", "--mesh", "torus:4x4", "--p", "1",
                               "--conformal", "0.1", "--seed", "0"]),
    ]
    out = {}
    for fname, argv in jobs:
        path = base / fname
        rc = run_cli(argv + ["--out", str(path)])
        assert rc == 0, (fname, rc)
        out[fname] = path.read_bytes()
    c3 = base / "c3_matrix.json"
    c3.write_text(_c3_matrix_payload())
    out["c3_matrix.json"] = c3.read_bytes()
    return out


def test_criterion_8_determinism(tmp_path):
    t0 = time.perf_counter()
    first = _produce_report_files(tmp_path / "run1")
    second = _produce_report_files(tmp_path / "run2")
    assert first.keys() == second.keys()
    stale = [name for name in first if first[name] != second[name]]
    elapsed = time.perf_counter() - t0
    _report(8, not stale,
            f"{len(first)} report files bit-identical, {elapsed:.1f}s"
            if not stale else f"differing files: {stale}")
