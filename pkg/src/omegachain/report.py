"""Report rendering: figures plus delimited result files for one decision."""
from __future__ import annotations

import csv
import os
from fractions import Fraction
from typing import Optional

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .chains import HasOmegaChain, NotTransitive, Verdict  # noqa: E402


def _verdict_name(verdict: Verdict) -> str:
    if isinstance(verdict, HasOmegaChain):
        return "chain"
    if isinstance(verdict, NotTransitive):
        return "not-transitive"
    return "no-chain"


def _cell(x) -> str:
    if isinstance(x, Fraction) and x.denominator != 1:
        return f"{x.numerator}/{x.denominator}"
    return str(int(x) if isinstance(x, Fraction) else x)


def write_report(input_path: str, out_dir: Optional[str], verdict: Verdict,
                 prefix: Optional[list], stats: dict) -> list[str]:
    """Write report.csv, prefix.csv when a witness exists, and one or two
    figures into out_dir; returns the written paths."""
    if out_dir is None:
        stem, _ = os.path.splitext(input_path)
        out_dir = stem + "_report"
    os.makedirs(out_dir, exist_ok=True)
    written = []

    summary = os.path.join(out_dir, "report.csv")
    with open(summary, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["field", "value"])
        w.writerow(["input", input_path])
        w.writerow(["verdict", _verdict_name(verdict)])
        if isinstance(verdict, HasOmegaChain):
            w.writerow(["disjunct", verdict.disjunct])
            for sym, mode in sorted(verdict.modes.as_dict().items()):
                w.writerow([f"mode.{sym}", mode])
        for key in ("disjuncts", "mode_vectors_checked", "elapsed_ms"):
            w.writerow([key, stats.get(key, 0)])
    written.append(summary)

    if prefix:
        pfile = os.path.join(out_dir, "prefix.csv")
        names = sorted({v.display() for p in prefix for v in p})
        with open(pfile, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["point"] + names)
            for i, p in enumerate(prefix):
                by_name = {v.display(): val for v, val in p.items()}
                w.writerow([i] + [_cell(by_name.get(n, "")) for n in names])
        written.append(pfile)

    fig, ax = plt.subplots(figsize=(5, 3))
    labels = ["disjuncts", "mode vectors\nchecked"]
    values = [stats.get("disjuncts", 0), stats.get("mode_vectors_checked", 0)]
    ax.bar(labels, values, color=["#4477aa", "#ee6677"])
    ax.set_ylabel("count")
    ax.set_title(f"search effort ({_verdict_name(verdict)}, "
                 f"{stats.get('elapsed_ms', 0)} ms)")
    fig.tight_layout()
    effort = os.path.join(out_dir, "search_effort.png")
    fig.savefig(effort, dpi=120)
    plt.close(fig)
    written.append(effort)

    if prefix:
        fig, ax = plt.subplots(figsize=(5, 3))
        names = sorted({v for p in prefix for v in p}, key=lambda v: v.display())
        xs = list(range(len(prefix)))
        for v in names:
            ys = [float(Fraction(p.get(v, 0))) for p in prefix]
            ax.plot(xs, ys, marker="o", label=v.display())
        ax.set_xlabel("chain position")
        ax.set_ylabel("value")
        ax.legend(loc="best", fontsize=8)
        ax.set_title("witness prefix")
        fig.tight_layout()
        traj = os.path.join(out_dir, "witness_prefix.png")
        fig.savefig(traj, dpi=120)
        plt.close(fig)
        written.append(traj)

    return written
