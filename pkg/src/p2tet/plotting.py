"""Matplotlib rendering of convergence reports to image files."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .analysis import ConvergenceReport

_SERIES = (
    ("l2_ihu_uh", "||I_h u - u_h||_0", "o-", "tab:blue"),
    ("l2_u_uh", "||u - u_h||_0", "s-", "tab:orange"),
    ("l2_u_l3uh", "||u - L3 u_h||_0", "d-", "tab:green"),
    ("h1_ihu_uh", "|I_h u - u_h|_1", "o--", "tab:blue"),
    ("h1_u_uh", "|u - u_h|_1", "s--", "tab:orange"),
    ("h1_u_l3uh", "|u - L3 u_h|_1", "d--", "tab:green"),
)


def render_convergence_figure(report: ConvergenceReport, path) -> None:
    """Log-log error-versus-h plot with slope guides, saved to ``path``."""
    fig, (ax_l2, ax_h1) = plt.subplots(1, 2, figsize=(9.0, 3.8), sharex=True)
    for key, label, style, color in _SERIES:
        hs = [rec.h for rec in report.levels if rec.errors.get(key) is not None]
        errs = [rec.errors[key] for rec in report.levels if rec.errors.get(key) is not None]
        if not hs:
            continue
        ax = ax_l2 if key.startswith("l2") else ax_h1
        ax.loglog(hs, errs, style, color=color, label=label, markersize=4)
    for ax, orders in ((ax_l2, (3, 4)), (ax_h1, (2, 3))):
        hs = [rec.h for rec in report.levels]
        if len(hs) >= 2:
            for order in orders:
                ref = [hs[-1] ** order * (h / hs[-1]) ** order for h in hs]
                scale = None
                for key, *_ in _SERIES:
                    errs = [r.errors.get(key) for r in report.levels]
                    if errs and errs[-1]:
                        scale = errs[-1] / ref[-1]
                        break
                if scale:
                    ax.loglog(
                        hs, [v * scale for v in ref], ":", color="gray", linewidth=0.8
                    )
                    ax.annotate(
                        f"h^{order}",
                        (hs[0], ref[0] * scale),
                        fontsize=7,
                        color="gray",
                    )
        ax.set_xlabel("h")
        ax.grid(True, which="both", alpha=0.3)
        ax.legend(fontsize=7)
    ax_l2.set_ylabel("error")
    ax_l2.set_title(f"{report.problem}: L2 errors", fontsize=9)
    ax_h1.set_title(f"{report.problem}: H1 seminorm errors", fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
