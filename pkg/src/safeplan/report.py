"""Batch report rendering: a delimited summary plus matplotlib figures.

Takes validation report records (as produced by the validator / CLI), scores
them with a reward configuration, and writes ``summary.csv`` together with
``categories.png`` (category histogram) and ``rewards.png`` (reward by
record, colored by category) into an output directory.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .reward import RewardConfig, DEFAULT_CONFIG, compute_reward  # noqa: E402
from .validator import Category, ValidationReport  # noqa: E402

_CATEGORY_COLORS = {
    "c1": "#7f0000",
    "c2": "#d62728",
    "c3": "#ff7f0e",
    "c4": "#bcbd22",
    "c5": "#2ca02c",
}

_CSV_COLUMNS = ("index", "category", "t_v", "failed_action_index", "n_sat",
                "n_total", "executed_steps", "l_ref", "reward", "rho",
                "message")


def load_report_records(text: str) -> list[dict]:
    """Parse JSONL (one report record per line, blank lines skipped)."""
    records = []
    for line in text.splitlines():
        if line.strip():
            records.append(json.loads(line))
    return records


def write_report(records: Sequence[dict], out_dir: Path | str,
                 config: RewardConfig = DEFAULT_CONFIG,
                 default_l_ref: int | None = None) -> dict[str, Path]:
    """Score *records* and render the summary CSV plus figures.

    Each record may carry its own ``l_ref``; otherwise *default_l_ref*
    applies.  Returns the paths of the written files.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    rows = []
    for i, record in enumerate(records):
        report = ValidationReport.from_record(record)
        l_ref = record.get("l_ref", default_l_ref)
        if l_ref is None:
            raise ValueError(
                f"record {i} has no l_ref and no default was given")
        result = compute_reward(report, int(l_ref), config)
        rows.append({
            "index": i,
            "category": report.category.code,
            "t_v": report.t_v,
            "failed_action_index": report.failed_action_index,
            "n_sat": report.n_sat,
            "n_total": report.n_total,
            "executed_steps": report.executed_steps,
            "l_ref": int(l_ref),
            "reward": result.value,
            "rho": result.rho,
            "message": report.message,
        })

    csv_path = out / "summary.csv"
    with csv_path.open("w", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=_CSV_COLUMNS)
        writer.writeheader()
        writer.writerows(rows)

    categories_path = _plot_categories(rows, out)
    rewards_path = _plot_rewards(rows, out)
    return {"summary": csv_path, "categories": categories_path,
            "rewards": rewards_path}


def _plot_categories(rows: Sequence[dict], out: Path) -> Path:
    codes = [c.code for c in Category]
    counts = {code: 0 for code in codes}
    for row in rows:
        counts[row["category"]] += 1
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar(codes, [counts[c] for c in codes],
           color=[_CATEGORY_COLORS[c] for c in codes])
    ax.set_xlabel("validation category")
    ax.set_ylabel("plans")
    ax.set_title(f"Category distribution ({len(rows)} plans)")
    fig.tight_layout()
    path = out / "categories.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def _plot_rewards(rows: Sequence[dict], out: Path) -> Path:
    fig, ax = plt.subplots(figsize=(7, 4))
    for code in [c.code for c in Category]:
        xs = [row["index"] for row in rows if row["category"] == code]
        ys = [row["reward"] for row in rows if row["category"] == code]
        if xs:
            ax.scatter(xs, ys, s=18, label=code, color=_CATEGORY_COLORS[code])
    ax.set_xlabel("plan index")
    ax.set_ylabel("reward")
    ax.set_ylim(-1.05, 1.05)
    ax.axhline(0.0, color="grey", linewidth=0.6)
    ax.legend(loc="lower right", fontsize=8)
    ax.set_title("Rewards by plan")
    fig.tight_layout()
    path = out / "rewards.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
