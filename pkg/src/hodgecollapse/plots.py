"""Figure rendering for report objects.

Optional: nothing in the library imports this module; the CLI does so only
when asked for figures, so headless installs without a display still work
(the Agg backend is forced).
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .experiments import CompareReport, DualityReport, SweepReport  # noqa: E402


def plot_sweep(report: SweepReport, path) -> Path:
    """Eigenvalue curves over the collapse grid, tracked modes highlighted."""
    fig, ax = plt.subplots(figsize=(5.5, 4))
    eps = report.eps_grid
    k = max((len(r) for r in report.eigenvalues), default=0)
    for j in range(k):
        lam = [row[j] for row in report.eigenvalues if len(row) > j]
        tracked = j < report.j_theorem
        ax.loglog(eps[:len(lam)], lam,
                  marker="o" if tracked else ".",
                  lw=1.8 if tracked else 0.9,
                  color="C3" if tracked else "C0",
                  label=f"$\\lambda_{{{report.degree},{j + 1}}}$" if tracked
                  else None)
    ax.set_xlabel("collapse parameter")
    ax.set_ylabel(f"degree-{report.degree} eigenvalue")
    ax.set_title(f"{report.mesh} / {report.action}: {report.verdict} "
                 f"(j={report.j_theorem})")
    ax.invert_xaxis()
    if report.j_theorem:
        ax.legend(loc="best", fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)


def plot_compare(report: CompareReport, path) -> Path:
    """Per-index eigenvalue ratios against the distortion bound band."""
    fig, ax = plt.subplots(figsize=(5.5, 4))
    idx = range(1, len(report.ratios) + 1)
    ax.axhspan(1.0 / report.bound, report.bound, color="C0", alpha=0.15,
               label=f"$e^{{\\pm Js}}$, J={report.J}")
    ax.axhline(1.0, color="gray", lw=0.8)
    ax.semilogy(list(idx), report.ratios, "o", color="C3", label="ratio")
    ax.set_xlabel("eigenvalue index")
    ax.set_ylabel("ratio B / A")
    ax.set_title(f"p={report.degree}, s={report.distortion:.3g}: "
                 f"{'pass' if report.passed else 'fail'}")
    ax.legend(loc="best", fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)


def plot_duality(report: DualityReport, path) -> Path:
    """Paired exact/coexact spectra per degree."""
    rows = report.rows
    fig, axes = plt.subplots(1, max(len(rows), 1),
                             figsize=(3.2 * max(len(rows), 1), 3.4),
                             squeeze=False)
    for ax, row in zip(axes[0], rows):
        idx = range(1, len(row.eigenvalues) + 1)
        ax.plot(list(idx), row.eigenvalues, "o-", label=f"d side p={row.degree}")
        ax.plot(list(idx), row.dual_eigenvalues, "s--",
                label=f"d* side q={row.dual_degree}")
        ax.set_title(f"max gap {row.max_gap:.2%}", fontsize=9)
        ax.set_xlabel("index")
        ax.legend(fontsize=8)
    axes[0][0].set_ylabel("eigenvalue")
    fig.suptitle(report.mesh)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)


def render_report(report, path) -> Path:
    """Dispatch to the figure matching the report type."""
    if isinstance(report, SweepReport):
        return plot_sweep(report, path)
    if isinstance(report, CompareReport):
        return plot_compare(report, path)
    if isinstance(report, DualityReport):
        return plot_duality(report, path)
    raise TypeError(f"no figure for {type(report).__name__}")
