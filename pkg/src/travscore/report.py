"""Evaluation metrics, safety statistics, and score-overlay rendering.

``compute_report`` aggregates per-section regression errors into a compact,
JSON-serializable report.  Predictions are clamped to [0, 1] first — the same
clamp applied at inference — and a prediction is *unsafe* when it strictly
exceeds the ground-truth score (plus an optional tolerance ``delta``): the
model claims more traversable space than exists.

``render_overlay`` paints each section's non-traversable region — the bottom
``(1 - score)`` fraction of the frame height — as a semi-transparent band:
green for ground truth, red for the prediction (drawn on top).  The blend is
``(1 - alpha) * pixel + alpha * color``, so original pixels are recoverable
wherever a single band was drawn.

Metric accumulation is plain Python in frame-major, section-minor order, so
the result is bit-reproducible and independently checkable by a naive
double-loop reference.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np

from .core import ImageFrame, SectionLayout, TraversabilityVector

__all__ = [
    "EvalReport",
    "compute_report",
    "cutoff_row",
    "render_overlay",
    "OVERLAY_ALPHA",
    "OVERLAY_GREEN",
    "OVERLAY_RED",
]

OVERLAY_ALPHA = 0.45
OVERLAY_GREEN = (0.0, 1.0, 0.0)
OVERLAY_RED = (1.0, 0.0, 0.0)


@dataclass(frozen=True)
class EvalReport:
    """Aggregated regression and safety metrics over an evaluation set."""

    mae_all: float
    mae_per_domain: Dict[str, float]
    unsafe_rate: float
    mean_unsafe_overshoot: float
    n_frames: int
    n_sections: int
    config: Dict[str, Any]

    def to_json(self) -> str:
        """Stable-keyed JSON rendering (diffable across runs)."""
        return json.dumps(
            {
                "mae_all": self.mae_all,
                "mae_per_domain": self.mae_per_domain,
                "unsafe_rate": self.unsafe_rate,
                "mean_unsafe_overshoot": self.mean_unsafe_overshoot,
                "n_frames": self.n_frames,
                "n_sections": self.n_sections,
                "config": self.config,
            },
            sort_keys=True,
            indent=2,
        )

    @classmethod
    def from_json(cls, text: str) -> "EvalReport":
        doc = json.loads(text)
        return cls(
            mae_all=doc["mae_all"],
            mae_per_domain=dict(doc["mae_per_domain"]),
            unsafe_rate=doc["unsafe_rate"],
            mean_unsafe_overshoot=doc["mean_unsafe_overshoot"],
            n_frames=doc["n_frames"],
            n_sections=doc["n_sections"],
            config=dict(doc["config"]),
        )

    def save(self, path: Union[str, Path]) -> None:
        Path(path).write_text(self.to_json() + "\n")


ScoreRow = Union[TraversabilityVector, Sequence[float], np.ndarray]


def _as_rows(name: str, rows: Sequence[ScoreRow]) -> List[List[float]]:
    out = []
    for i, row in enumerate(rows):
        values = [float(v) for v in row]
        for j, v in enumerate(values):
            if not math.isfinite(v):
                raise ValueError(f"{name}[{i}][{j}] is not finite: {v!r}")
        out.append(values)
    return out


def compute_report(
    predictions: Sequence[ScoreRow],
    ground_truth: Sequence[ScoreRow],
    domains: Sequence[str],
    *,
    delta: float = 0.0,
    config: Optional[Dict[str, Any]] = None,
) -> EvalReport:
    """Aggregate aligned predictions and labels into an :class:`EvalReport`.

    ``domains[i]`` names the domain frame ``i`` came from; per-domain MAEs
    are reported alongside the overall MAE (their frame-count-weighted mean).
    Predictions are clamped to [0, 1] before any metric; ground truth must
    already be valid scores.
    """
    if len(predictions) == 0:
        raise ValueError("cannot evaluate an empty set")
    if not (len(predictions) == len(ground_truth) == len(domains)):
        raise ValueError(
            f"aligned sequences required: {len(predictions)} predictions, "
            f"{len(ground_truth)} labels, {len(domains)} domains"
        )
    preds = _as_rows("predictions", predictions)
    labels = _as_rows("ground_truth", ground_truth)
    k = len(preds[0])
    total_abs = 0.0
    unsafe = 0
    overshoot = 0.0
    domain_abs: Dict[str, float] = {}
    domain_frames: Dict[str, int] = {}
    for i, (pred_row, label_row) in enumerate(zip(preds, labels)):
        if len(pred_row) != k or len(label_row) != k:
            raise ValueError(f"frame {i}: expected {k} sections per row")
        domain = str(domains[i])
        domain_frames[domain] = domain_frames.get(domain, 0) + 1
        for j in range(k):
            t = label_row[j]
            if t < 0.0 or t > 1.0:
                raise ValueError(f"ground_truth[{i}][{j}]={t} outside [0, 1]")
            p = min(1.0, max(0.0, pred_row[j]))
            err = p - t
            total_abs += abs(err)
            domain_abs[domain] = domain_abs.get(domain, 0.0) + abs(err)
            if err > delta:
                unsafe += 1
            overshoot += max(0.0, err)
    n = len(preds)
    echo = dict(config or {})
    echo["delta"] = float(delta)
    return EvalReport(
        mae_all=total_abs / (n * k),
        mae_per_domain={
            d: domain_abs[d] / (domain_frames[d] * k) for d in domain_abs
        },
        unsafe_rate=unsafe / (n * k),
        mean_unsafe_overshoot=overshoot / (n * k),
        n_frames=n,
        n_sections=k,
        config=echo,
    )


def cutoff_row(score: float, height: int) -> int:
    """First image row of the non-traversable band for a section score.

    The band spans rows ``[cutoff_row(score, H), H)`` — the bottom
    ``(1 - score)`` fraction of the frame, rounded half-up to whole pixels.
    A score of 1 yields ``H`` (empty band); a score of 0 yields 0 (full
    column covered).
    """
    if not (0.0 <= score <= 1.0):
        raise ValueError(f"score {score} outside [0, 1]")
    return int(math.floor(score * height + 0.5))


def _blend_band(
    pixels: np.ndarray,
    layout: SectionLayout,
    scores: TraversabilityVector,
    color: Sequence[float],
    alpha: float,
) -> None:
    height = pixels.shape[1]
    tint = np.asarray(color, dtype=np.float64).reshape(3, 1, 1)
    for i in range(layout.k):
        row0 = cutoff_row(scores[i], height)
        if row0 >= height:
            continue
        c0, c1 = layout.columns(i)
        region = pixels[:, row0:height, c0:c1]
        pixels[:, row0:height, c0:c1] = (1.0 - alpha) * region + alpha * tint


def render_overlay(
    frame: ImageFrame,
    ground_truth: Optional[TraversabilityVector],
    prediction: Optional[TraversabilityVector],
    layout: SectionLayout,
    alpha: float = OVERLAY_ALPHA,
) -> ImageFrame:
    """Return a copy of ``frame`` with non-traversable bands painted per section.

    Ground truth is drawn in green first, then the prediction in red on top;
    either may be omitted.  The input frame is never modified.
    """
    if layout.width != frame.width:
        raise ValueError(
            f"layout width {layout.width} does not match frame width {frame.width}"
        )
    for name, vec in (("ground_truth", ground_truth), ("prediction", prediction)):
        if vec is not None and vec.k != layout.k:
            raise ValueError(f"{name} has {vec.k} sections, layout has {layout.k}")
    if not (0.0 < alpha < 1.0):
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    pixels = frame.pixels.astype(np.float64)
    if ground_truth is not None:
        _blend_band(pixels, layout, ground_truth, OVERLAY_GREEN, alpha)
    if prediction is not None:
        _blend_band(pixels, layout, prediction, OVERLAY_RED, alpha)
    return ImageFrame(pixels)
