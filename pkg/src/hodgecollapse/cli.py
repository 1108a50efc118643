"""Command line front end.

Subcommands: mesh, betti, spectrum, collapse, compare, duality.  Reports go
to stdout as JSON, or to --out files chosen by extension (.json/.csv);
--plot renders a matplotlib figure next to the data.  Exit codes: 0 ok,
1 failed verdict under --strict, 2 usage, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .builders import (build_circle, build_flat_torus, build_icosphere,
                       build_s3_600cell)
from .cohomology import betti_numbers
from .complexes import euler_characteristic, validate_complex
from .eigen import (SpectralError, hodge_spectrum, im_d_pencil,
                    spectrum_im_d)
from .experiments import (bilipschitz_compare, collapse_sweep,
                          conformal_perturb, hodge_duality_report,
                          report_to_json, write_report)
from .feec import MassFamily
from .meshio import mesh_to_text

_MESH_SYNOPSIS = ("mesh descriptors: circle:N, torus:NXxNY, icosphere:LEVEL, "
                  "s3:600cell[:LEVEL]")


def build_from_descriptor(desc: str, chord: bool = False):
    """(complex, geometry, action-or-None) for a built-in mesh descriptor."""
    name, _, rest = desc.partition(":")
    round_metric = not chord
    if name == "circle":
        return build_circle(int(rest or 12))
    if name == "torus":
        try:
            nx, ny = (int(v) for v in rest.split("x"))
        except ValueError:
            raise ValueError(f"bad torus descriptor {desc!r}; want torus:4x4")
        return build_flat_torus(nx, ny)
    if name == "icosphere":
        return build_icosphere(int(rest or 1), round_metric=round_metric)
    if name == "s3":
        parts = rest.split(":")
        if parts[0] != "600cell":
            raise ValueError(f"unknown 3-sphere mesh {desc!r}")
        level = int(parts[1]) if len(parts) > 1 else 0
        return build_s3_600cell(level, round_metric=round_metric)
    raise ValueError(f"unknown mesh {desc!r}; {_MESH_SYNOPSIS}")


def _resolve_action(action_name, action, desc):
    if action_name in (None, "none"):
        return None
    if action is None or action.description != action_name:
        have = "none" if action is None else action.description
        raise ValueError(
            f"mesh {desc!r} provides action {have!r}, not {action_name!r}")
    return action


def _parse_eps_list(text):
    return [float(v) for v in text.split(",") if v]


def _triplet_text(M) -> str:
    coo = M.tocoo()
    lines = [f"{M.shape[0]} {M.shape[1]} {coo.nnz}"]
    order = np.lexsort((coo.col, coo.row))
    for i in order:
        lines.append(f"{coo.row[i]} {coo.col[i]} {float(coo.data[i])!r}")
    return "\n".join(lines) + "\n"


def _emit(args, report):
    if args.out:
        write_report(report, args.out)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(report_to_json(report))
    if getattr(args, "plot", None):
        from .plots import render_report
        render_report(report, args.plot)
        print(f"wrote {args.plot}")


def _spectrum_dict(desc, res):
    return {
        "mesh": desc, "degree": res.degree, "eps": res.eps,
        "eigenvalues": [float(v) for v in res.eigenvalues],
        "zero_modes": res.zero_modes,
        "expected_zero_modes": res.expected_zero_modes,
        "residuals": [float(v) for v in res.residuals],
        "iterations": res.iterations,
        "cond_estimate": res.cond_estimate, "method": res.method,
    }


def _make_parser():
    top = argparse.ArgumentParser(
        prog="hodgecollapse", description=__doc__, epilog=_MESH_SYNOPSIS)
    sub = top.add_subparsers(dest="command", required=True)

    def common(p, action=True, out=True, plot=False):
        p.add_argument("--mesh", required=True, help=_MESH_SYNOPSIS)
        p.add_argument("--chord-metric", action="store_true",
                       help="constant chord Grams instead of round metrics")
        if action:
            p.add_argument("--action", default=None,
                           help="action name or 'none'")
        if out:
            p.add_argument("--out", default=None,
                           help="output file (.json or .csv)")
        if plot:
            p.add_argument("--plot", default=None,
                           help="render a figure to this file")
        p.add_argument("--strict", action="store_true",
                       help="exit 1 when a verdict or bound check fails")

    m = sub.add_parser("mesh", help="write the mesh interchange document")
    common(m, action=False, out=True)

    b = sub.add_parser("betti", help="Betti numbers of a built-in mesh")
    common(b, action=False, out=True)

    s = sub.add_parser("spectrum", help="small end of one degree's spectrum")
    common(s, plot=False)
    s.add_argument("--p", type=int, required=True)
    s.add_argument("--eps", type=float, default=None)
    s.add_argument("--k", type=int, default=6)
    s.add_argument("--tol", type=float, default=1e-11,
                   help="iterative solver tolerance")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--full-hodge", action="store_true",
                   help="full Hodge Laplacian instead of the Im(d) pencil")
    s.add_argument("--dump-matrices", metavar="PREFIX", default=None,
                   help="write the pencil as PREFIX_A.txt / PREFIX_B.txt "
                        "triplet text")

    c = sub.add_parser("collapse", help="eigenvalue sweep over a collapse grid")
    common(c, plot=True)
    c.add_argument("--p", type=int, required=True)
    c.add_argument("--eps", default=None,
                   help="comma-separated grid, e.g. 1,0.5,0.25,0.1")
    c.add_argument("--k", type=int, default=6)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--decay-factor", type=float, default=10.0)

    q = sub.add_parser("compare", help="two metrics on one mesh vs e^{Js}")
    common(q, action=False, plot=True)
    q.add_argument("--p", type=int, required=True)
    q.add_argument("--k", type=int, default=6)
    q.add_argument("--seed", type=int, default=0)
    g = q.add_mutually_exclusive_group(required=True)
    g.add_argument("--scale", type=float, default=None,
                   help="scale all lengths by this factor")
    g.add_argument("--conformal", type=float, default=None, metavar="AMP",
                   help="random piecewise conformal factor e^u, |u| <= AMP")

    d = sub.add_parser("duality", help="exact vs coexact spectra per degree")
    common(d, plot=True)
    d.add_argument("--eps", type=float, default=None)
    d.add_argument("--k", type=int, default=6)
    d.add_argument("--seed", type=int, default=0)
    return top


def run_cli(argv=None) -> int:
    parser = _make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        K, geom, action = build_from_descriptor(
            args.mesh, chord=getattr(args, "chord_metric", False))
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        print(_MESH_SYNOPSIS, file=sys.stderr)
        return 2

    try:
        if args.command == "mesh":
            validate_complex(K)
            text = mesh_to_text(K, geom.vertex_coords)
            if args.out:
                Path(args.out).write_text(text)
                print(f"wrote {args.out}")
            else:
                sys.stdout.write(text)
            return 0

        if args.command == "betti":
            betti = betti_numbers(K)
            print(json.dumps(list(betti), separators=(",", ":")))
            if args.out:
                payload = {"mesh": args.mesh, "betti": list(betti),
                           "euler": euler_characteristic(K)}
                Path(args.out).write_text(
                    json.dumps(payload, indent=2, sort_keys=True) + "\n")
                print(f"wrote {args.out}")
            return 0

        if args.command == "spectrum":
            act = _resolve_action(args.action, action, args.mesh)
            family = MassFamily(geom, act)
            if args.full_hodge:
                res = hodge_spectrum(family, args.p, eps=args.eps, k=args.k,
                                     seed=args.seed)
            else:
                res = spectrum_im_d(family, args.p, eps=args.eps, k=args.k,
                                    seed=args.seed, tol=args.tol)
            if args.dump_matrices:
                A, B = im_d_pencil(family, max(args.p, 1), args.eps)
                for tag, M in (("A", A), ("B", B)):
                    path = Path(f"{args.dump_matrices}_{tag}.txt")
                    path.write_text(_triplet_text(M))
                    print(f"wrote {path}")
            payload = _spectrum_dict(args.mesh, res)
            if args.out:
                Path(args.out).write_text(
                    json.dumps(payload, indent=2, sort_keys=True) + "\n")
                print(f"wrote {args.out}")
            else:
                print(json.dumps(payload, indent=2, sort_keys=True))
            return 0

        if args.command == "collapse":
            act = _resolve_action(args.action, action, args.mesh)
            if act is None:
                print("error: collapse needs --action", file=sys.stderr)
                return 2
            grid = _parse_eps_list(args.eps) if args.eps else None
            report = collapse_sweep(geom, act, args.p, eps_grid=grid,
                                    k=args.k, seed=args.seed,
                                    decay_factor=args.decay_factor)
            _emit(args, report)
            if report.verdict == "aborted":
                return 3
            if args.strict and report.verdict == "inconsistent":
                return 1
            return 0

        if args.command == "compare":
            if args.scale is not None:
                other = geom.scaled(args.scale)
            else:
                rng = np.random.default_rng(args.seed)
                u = rng.uniform(-args.conformal, args.conformal,
                                K.num(K.dimension))
                other = conformal_perturb(geom, u)
            report = bilipschitz_compare(K, geom, other, args.p, k=args.k,
                                         seed=args.seed)
            _emit(args, report)
            return 1 if (args.strict and not report.passed) else 0

        if args.command == "duality":
            act = _resolve_action(args.action, action, args.mesh)
            report = hodge_duality_report(geom, action=act, eps=args.eps,
                                          k=args.k, seed=args.seed)
            _emit(args, report)
            return 0
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SpectralError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    return 2


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
