"""Campaign report rendering: JSON + CSV plus matplotlib figures.

The delimited outputs (report.json, coverage_curve.csv) are written with
sorted keys and fixed float rendering so identical campaigns produce
identical bytes; figures are PNG companions for eyeballing a run.
"""

from __future__ import annotations

import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .fuzzer import FuzzConfig, FuzzReport


def fmt6(value) -> str:
    """Render a criterion value as a decimal with 6 places."""
    return f"{float(value):.6f}"


def report_document(report: FuzzReport, cfg: FuzzConfig) -> dict:
    return {
        "criterion": report.criterion,
        "config": {
            "boundary_steps": cfg.boundary_steps,
            "campaign_seed": cfg.campaign_seed,
            "criterion": cfg.criterion,
            "iterations": cfg.iterations,
            "max_history": cfg.max_history,
            "time_budget": cfg.time_budget,
            "wer_threshold": cfg.wer_threshold,
        },
        "initial_coverage": fmt6(report.initial_coverage),
        "final_coverage": fmt6(report.final_coverage),
        "totals": report.totals,
        "failed": [
            {
                "mutant": f.mutant_path or f.mutant_id,
                "seed_id": f.record.seed_id,
                "history": [
                    {"kind": e.kind.value, "params": e.param_dict(), "seed": e.seed}
                    for e in f.record.history
                ],
                "reference": f.reference,
                "hypothesis": f.hypothesis,
                "wer": f.wer,
            }
            for f in report.failed
        ],
        "queue_final": report.queue_final,
    }


def write_fuzz_outputs(report: FuzzReport, cfg: FuzzConfig, out_dir) -> None:
    """Write report.json, coverage_curve.csv, and the companion figures."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "report.json", "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(report_document(report, cfg), sort_keys=True, indent=2) + "\n")
    with open(out / "coverage_curve.csv", "w", encoding="utf-8", newline="\n") as fh:
        fh.write("iteration,value\n")
        for it, value in report.coverage_curve:
            fh.write(f"{it},{fmt6(value)}\n")
    render_coverage_curve(report.coverage_curve, report.criterion, out / "coverage_curve.png")
    if report.failed:
        render_wer_histogram([f.wer for f in report.failed], out / "failure_wer_hist.png")


def render_coverage_curve(curve, criterion: str, path) -> None:
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.step([it for it, _ in curve], [float(v) for _, v in curve], where="post")
    ax.set_xlabel("iteration")
    ax.set_ylabel(criterion)
    ax.set_ylim(0.0, 1.0)
    ax.set_title(f"{criterion} over the campaign")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_wer_histogram(wers, path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.hist(wers, bins=20)
    ax.set_xlabel("WER vs lineage root")
    ax.set_ylabel("failures")
    ax.set_title("Failure severity")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_criteria_bars(rows, path) -> None:
    """Bar chart for the coverage subcommand: one bar per criterion."""
    names = [name for name, *_ in rows]
    values = [float(value) for _, value, *_ in rows]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar(names, values)
    ax.set_ylim(0.0, 1.0)
    ax.set_ylabel("coverage")
    for i, v in enumerate(values):
        ax.text(i, v + 0.01, fmt6(v), ha="center", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
