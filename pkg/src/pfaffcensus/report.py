"""Artifact writers: delimited outputs and report figures.

Output layout for a verification run (everything deterministic for fixed
inputs; the census timing column is the only run-to-run variable and is
excluded from golden comparisons):

    census.csv          curve_id,H,N,status,seconds
    bounds.csv          curve_id,H,N_empirical,bound_name,bound_value,ratio
    plot.csv            H,N,bound        (plot-ready triples)
    verification.json   full bundle
    figures/counts.png  N and bounds against H (log-log)
    figures/covers.png  per-piece cover sizes against their budgets
"""

from __future__ import annotations

import csv
import json
import math
from fractions import Fraction
from pathlib import Path

from .census import CensusRecord
from .enclosures import format_decimal


def write_census_csv(path: Path, records: list[CensusRecord]) -> None:
    write_census_rows(path, [(r.curve_id, r.H, r.n, r.status, r.seconds)
                             for r in records])


def write_census_rows(path: Path, rows) -> None:
    with open(path, "w", newline="\n") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["curve_id", "H", "N", "status", "seconds"])
        for cid, H, n, status, seconds in rows:
            w.writerow([cid, H, n, status, f"{seconds:.3f}"])


def bounds_rows(bundle: dict) -> list[list[str]]:
    rows = []
    cid = bundle["curve"]
    for rec in bundle["records"]:
        n = rec["n"]
        for b in rec["bounds"]:
            val = Fraction(b["value"]) if "/" in b["value"] else \
                Fraction(b["value"])
            ratio = format_decimal(Fraction(n) / val, 8, "up") if val else ""
            rows.append([cid, str(rec["H"]), str(n), b["name"], b["value"],
                         ratio])
    return rows


def write_bounds_csv(path: Path, bundle: dict) -> None:
    with open(path, "w", newline="\n") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["curve_id", "H", "N_empirical", "bound_name",
                    "bound_value", "ratio"])
        for row in bounds_rows(bundle):
            w.writerow(row)


def write_plot_csv(path: Path, bundle: dict) -> None:
    with open(path, "w", newline="\n") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["H", "N", "bound"])
        for rec in bundle["records"]:
            bound = min((b["value"] for b in rec["bounds"]),
                        key=lambda v: Fraction(v), default="")
            w.writerow([rec["H"], rec["n"], bound])


def write_verification_json(path: Path, bundle: dict) -> None:
    clean = _strip_seconds(bundle)
    with open(path, "w", newline="\n") as fh:
        json.dump(clean, fh, indent=1, sort_keys=True)
        fh.write("\n")


def _strip_seconds(obj):
    if isinstance(obj, dict):
        return {k: _strip_seconds(v) for k, v in obj.items() if k != "seconds"}
    if isinstance(obj, list):
        return [_strip_seconds(v) for v in obj]
    return obj


def render_figures(outdir: Path, bundle: dict) -> list[Path]:
    """Log-log census/bound comparison and cover budget chart."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    figdir = outdir / "figures"
    figdir.mkdir(parents=True, exist_ok=True)
    out = []

    hs = [rec["H"] for rec in bundle["records"]]
    ns = [max(rec["n"], 1) for rec in bundle["records"]]
    fig, ax = plt.subplots(figsize=(6.0, 4.0), dpi=120)
    ax.loglog(hs, ns, "o-", label="N(X, H)")
    by_name: dict[str, list[float]] = {}
    for rec in bundle["records"]:
        for b in rec["bounds"]:
            by_name.setdefault(b["name"], [None] * len(hs))
    for i, rec in enumerate(bundle["records"]):
        for b in rec["bounds"]:
            by_name[b["name"]][i] = float(Fraction(b["value"]))
    for name, vals in sorted(by_name.items()):
        pts = [(h, v) for h, v in zip(hs, vals) if v is not None]
        if pts:
            ax.loglog([p[0] for p in pts], [p[1] for p in pts], "s--",
                      label=name)
    ax.set_xlabel("height bound H")
    ax.set_ylabel("count / bound")
    ax.set_title(f"{bundle['curve']}: census vs bounds")
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    p = figdir / "counts.png"
    fig.savefig(p, metadata={"Software": "pfaffcensus"})
    plt.close(fig)
    out.append(p)

    labels, sizes, budgets = [], [], []
    for rec in bundle["records"]:
        for i, c in enumerate(rec["covers"]):
            labels.append(f"H={rec['H']}#{i}")
            sizes.append(max(c["blocks"], 1))
            budgets.append(float(Fraction(c["bound"])))
    if labels:
        fig, ax = plt.subplots(figsize=(6.0, 4.0), dpi=120)
        xs = range(len(labels))
        ax.bar(xs, sizes, label="cover size")
        ax.plot(xs, budgets, "r_", markersize=14, label="certified budget")
        ax.set_yscale("log")
        ax.set_xticks(list(xs))
        ax.set_xticklabels(labels, rotation=60, fontsize=6, ha="right")
        ax.set_ylabel("curves (log scale)")
        ax.set_title(f"{bundle['curve']}: cover sizes vs budgets")
        ax.legend(fontsize=8)
        fig.tight_layout()
        p = figdir / "covers.png"
        fig.savefig(p, metadata={"Software": "pfaffcensus"})
        plt.close(fig)
        out.append(p)
    return out


def write_verification_artifacts(outdir: Path, bundle: dict,
                                 figures: bool = True) -> list[Path]:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = []
    p = outdir / "census.csv"
    write_census_rows(p, [(bundle["curve"], rec["H"], rec["n"],
                           rec["status"], rec["seconds"])
                          for rec in bundle["records"]])
    paths.append(p)
    p = outdir / "bounds.csv"
    write_bounds_csv(p, bundle)
    paths.append(p)
    p = outdir / "plot.csv"
    write_plot_csv(p, bundle)
    paths.append(p)
    p = outdir / "verification.json"
    write_verification_json(p, bundle)
    paths.append(p)
    if figures:
        paths.extend(render_figures(outdir, bundle))
    return paths
