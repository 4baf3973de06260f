"""Batch evaluation and the quantitative report.

Frame-pair metrics (SSIM, PSNR, perceptual distance) are computed against
ground truth per frame; subject consistency is computed per sequence over
the generated frames.  Aggregates are presented as "mean ± std"; infinite
PSNR values (identical images) are excluded from the aggregate with the
exclusion count recorded, and serialize as the string "inf".
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .perceptual import lpips, subject_consistency
from .quality import psnr, ssim

__all__ = ["KeyMismatchError", "MetricSummary", "MetricReport", "evaluate_run",
           "report_to_json", "report_from_json", "format_table", "save_report"]


class KeyMismatchError(KeyError):
    """Generated and ground-truth inventories disagree."""

    def __init__(self, message: str, missing: list[str]):
        super().__init__(message)
        self.missing = missing

    def __str__(self) -> str:
        return self.args[0]


@dataclass
class MetricSummary:
    per_item: list[tuple[str, float]]
    excluded: int = 0  # items left out of the aggregate (infinite PSNR)

    @property
    def finite_values(self) -> np.ndarray:
        return np.array([v for _, v in self.per_item if math.isfinite(v)], dtype=np.float64)

    @property
    def mean(self) -> float | None:
        vals = self.finite_values
        return float(vals.mean()) if vals.size else None

    @property
    def std(self) -> float | None:
        vals = self.finite_values
        return float(vals.std()) if vals.size else None


@dataclass
class MetricReport:
    metrics: dict[str, MetricSummary]
    count: int
    metadata: dict = field(default_factory=dict)


def _check_keys(generated: dict, truth: dict) -> None:
    missing_truth = sorted(set(generated) - set(truth))
    missing_gen = sorted(set(truth) - set(generated))
    problems = []
    if missing_truth:
        problems.append(f"sequences missing from ground truth: {missing_truth}")
    if missing_gen:
        problems.append(f"sequences missing from generated: {missing_gen}")
    length_mismatch = [
        f"{key} ({len(generated[key])} generated vs {len(truth[key])} truth frames)"
        for key in sorted(set(generated) & set(truth))
        if len(generated[key]) != len(truth[key])
    ]
    if length_mismatch:
        problems.append(f"frame-count mismatches: {length_mismatch}")
    if problems:
        raise KeyMismatchError("; ".join(problems), missing_truth + missing_gen + length_mismatch)


def evaluate_run(
    generated: dict[str, list[np.ndarray]],
    truth: dict[str, list[np.ndarray]],
    fx,
    metadata: dict | None = None,
) -> MetricReport:
    """Score generated sequences against RGB ground truth.

    ``generated`` and ``truth`` map sequence keys to equal-length RGB frame
    lists.  Single-frame sequences are skipped for subject consistency
    (the score is undefined there).
    """
    _check_keys(generated, truth)
    ssim_items, psnr_items, lpips_items, consistency_items = [], [], [], []
    psnr_excluded = 0
    count = 0
    for key in sorted(generated):
        for i, (gen, ref) in enumerate(zip(generated[key], truth[key])):
            item = f"{key}#{i}"
            ssim_items.append((item, ssim(gen, ref)))
            p = psnr(gen, ref)
            if not math.isfinite(p):
                psnr_excluded += 1
            psnr_items.append((item, p))
            lpips_items.append((item, lpips(gen, ref, fx)))
            count += 1
        if len(generated[key]) >= 2:
            consistency_items.append((key, subject_consistency(generated[key], fx)))
    return MetricReport(
        metrics={
            "ssim": MetricSummary(per_item=ssim_items),
            "psnr": MetricSummary(per_item=psnr_items, excluded=psnr_excluded),
            "lpips": MetricSummary(per_item=lpips_items),
            "subject_consistency": MetricSummary(per_item=consistency_items),
        },
        count=count,
        metadata=dict(metadata or {}),
    )


def _encode_value(v: float) -> float | str:
    return "inf" if math.isinf(v) else v


def _decode_value(v) -> float:
    return math.inf if v == "inf" else float(v)


def report_to_json(report: MetricReport) -> str:
    doc = {
        "schema_version": 1,
        "count": report.count,
        "metadata": report.metadata,
        "metrics": {
            name: {
                "mean": summary.mean,
                "std": summary.std,
                "excluded": summary.excluded,
                "per_item": [[k, _encode_value(v)] for k, v in summary.per_item],
            }
            for name, summary in report.metrics.items()
        },
    }
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def report_from_json(text: str) -> MetricReport:
    doc = json.loads(text)
    return MetricReport(
        metrics={
            name: MetricSummary(
                per_item=[(k, _decode_value(v)) for k, v in entry["per_item"]],
                excluded=int(entry.get("excluded", 0)),
            )
            for name, entry in doc["metrics"].items()
        },
        count=int(doc["count"]),
        metadata=doc.get("metadata", {}),
    )


_TABLE_LABELS = {
    "ssim": "SSIM",
    "psnr": "PSNR (dB)",
    "lpips": "LPIPS",
    "subject_consistency": "Subject Consistency",
}


def format_table(report: MetricReport) -> str:
    """Human-readable mean ± std table."""
    lines = [f"{'Metric':<22}{'mean ± std':>18}   items"]
    for name in ("ssim", "psnr", "lpips", "subject_consistency"):
        if name not in report.metrics:
            continue
        summary = report.metrics[name]
        if summary.mean is None:
            cell, items = "-", 0
        else:
            cell = f"{summary.mean:.3f} ± {summary.std:.3f}"
            items = len(summary.per_item) - summary.excluded
        suffix = f" ({summary.excluded} inf excluded)" if summary.excluded else ""
        lines.append(f"{_TABLE_LABELS[name]:<22}{cell:>18}   {items}{suffix}")
    return "\n".join(lines) + "\n"


def save_report(report: MetricReport, json_path: str | Path, table_path: str | Path | None = None) -> None:
    Path(json_path).write_text(report_to_json(report), encoding="utf-8")
    if table_path is not None:
        Path(table_path).write_text(format_table(report), encoding="utf-8")
