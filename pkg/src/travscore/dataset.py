"""Frame ingestion, pose-based near-duplicate removal, and annotation storage.

A recording session yields one frame record per camera image, each carrying
the robot pose at capture time. Near-duplicates are dropped by a greedy scan
that keeps a frame only when its normalized yaw difference plus normalized
displacement relative to the last kept frame exceeds a combined threshold.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from PIL import Image

from .core import ImageFrame, PoseStamped, TraversabilityVector

ON_ROAD = "on_road"
OFF_ROAD = "off_road"

MANIFEST_FIELDS = ("image_path", "x", "y", "yaw", "frame_index", "timestamp", "domain")


@dataclass(frozen=True)
class FrameRecord:
    """A camera frame reference with its capture pose and domain label."""

    image_path: str
    pose: PoseStamped
    domain: str = ON_ROAD


@dataclass(frozen=True)
class Annotation:
    """Per-section cutoff lines for one image.

    ``cutoff_y`` values are fractions of image height measured from the top
    (0 = top, 1 = bottom); the traversability score of a section is always
    derived as 1 - cutoff_y, never stored.
    """

    image_path: str
    k: int
    cutoff_y: tuple[float, ...]
    annotator_id: str = "anonymous"
    created_at: str = ""

    def __post_init__(self):
        cutoffs = tuple(float(y) for y in self.cutoff_y)
        if len(cutoffs) != self.k:
            raise ValueError(f"expected {self.k} cutoffs, got {len(cutoffs)}")
        for i, y in enumerate(cutoffs):
            if not math.isfinite(y) or y < 0.0 or y > 1.0:
                raise ValueError(f"cutoff_y[{i}]={y} outside [0, 1]")
        object.__setattr__(self, "cutoff_y", cutoffs)


@dataclass(frozen=True)
class SelectionConfig:
    """Thresholds for near-duplicate removal.

    Defaults follow the acquisition setup this pipeline was tuned on: a 40
    degree yaw threshold (about half the camera's horizontal field of view)
    and a 0.8 m displacement threshold.
    """

    theta_th: float = 40.0
    dist_th: float = 0.8
    comb_threshold: float = 1.0

    def __post_init__(self):
        for name in ("theta_th", "dist_th", "comb_threshold"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be strictly positive")


def angular_difference(theta_i: float, theta_j: float, theta_th: float) -> float:
    """Normalized yaw difference |theta_i - theta_j| / theta_th.

    Yaw lives in [-180, 180], so when the raw absolute difference exceeds
    180 degrees the short way around (360 minus the difference) is used.
    """
    if theta_th <= 0.0:
        raise ValueError("theta_th must be strictly positive")
    for v in (theta_i, theta_j):
        if not -180.0 <= v <= 180.0:
            raise ValueError(f"yaw {v} outside [-180, 180]")
    raw = abs(theta_i - theta_j)
    if raw > 180.0:
        raw = 360.0 - raw
    return raw / theta_th


def linear_displacement(p_i: PoseStamped, p_j: PoseStamped, dist_th: float) -> float:
    """Normalized Euclidean displacement between two poses."""
    if dist_th <= 0.0:
        raise ValueError("dist_th must be strictly positive")
    return math.hypot(p_i.x - p_j.x, p_i.y - p_j.y) / dist_th


def select_frames(
    records: Sequence[FrameRecord], cfg: SelectionConfig
) -> list[FrameRecord]:
    """Drop near-duplicate frames with a greedy scan over a pose trace.

    The first record is always kept. Every later record is compared against
    the last *selected* record and kept only when its normalized displacement
    plus normalized yaw difference strictly exceeds ``cfg.comb_threshold``.
    Input must be ordered by frame_index; output preserves that order.
    """
    if not records:
        return []
    indices = [r.pose.frame_index for r in records]
    if any(b <= a for a, b in zip(indices, indices[1:])):
        raise ValueError("records must be ordered by strictly increasing frame_index")
    selected = [records[0]]
    last = records[0]
    for rec in records[1:]:
        comb = linear_displacement(rec.pose, last.pose, cfg.dist_th) + angular_difference(
            rec.pose.yaw, last.pose.yaw, cfg.theta_th
        )
        if comb > cfg.comb_threshold:
            selected.append(rec)
            last = rec
    return selected


def annotation_to_scores(a: Annotation) -> TraversabilityVector:
    """Convert cutoff lines into traversability scores (score = 1 - cutoff_y).

    A cutoff at the image bottom (1.0) means an obstacle at the robot's feet,
    score 0; a cutoff at the top (0.0) means fully traversable, score 1.
    """
    return TraversabilityVector([1.0 - y for y in a.cutoff_y])


def split_train_test(
    frames: Sequence[FrameRecord], fraction: float, seed: int
) -> tuple[list[FrameRecord], list[FrameRecord]]:
    """Randomly partition frames into train/test, train side floor(n * fraction).

    Deterministic under a fixed seed; both sides preserve the original frame
    order.
    """
    if not 0.0 < fraction < 1.0:
        raise ValueError(f"fraction must be in (0, 1), got {fraction}")
    n = len(frames)
    n_train = int(n * fraction)
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    train_idx = sorted(order[:n_train].tolist())
    test_idx = sorted(order[n_train:].tolist())
    return [frames[i] for i in train_idx], [frames[i] for i in test_idx]


# --- manifest / annotation documents ---------------------------------------


def save_manifest(records: Sequence[FrameRecord], path: str | Path) -> None:
    """Write frame records as line-delimited JSON (one record per line)."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for rec in records:
            doc = {
                "image_path": rec.image_path,
                "x": rec.pose.x,
                "y": rec.pose.y,
                "yaw": rec.pose.yaw,
                "frame_index": rec.pose.frame_index,
                "timestamp": rec.pose.timestamp,
                "domain": rec.domain,
            }
            fh.write(json.dumps(doc, sort_keys=True) + "\n")


def load_manifest(path: str | Path) -> list[FrameRecord]:
    """Read a line-delimited manifest written by :func:`save_manifest`."""
    records = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                doc = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{line_no}: malformed manifest line") from exc
            missing = set(MANIFEST_FIELDS) - set(doc)
            if missing:
                raise ValueError(f"{path}:{line_no}: missing fields {sorted(missing)}")
            records.append(
                FrameRecord(
                    image_path=str(doc["image_path"]),
                    pose=PoseStamped(
                        x=float(doc["x"]),
                        y=float(doc["y"]),
                        yaw=float(doc["yaw"]),
                        frame_index=int(doc["frame_index"]),
                        timestamp=float(doc["timestamp"]),
                    ),
                    domain=str(doc["domain"]),
                )
            )
    return records


def annotation_filename(image_path: str) -> str:
    """Annotation document name for an image: its stem plus ``.json``."""
    return Path(image_path).stem + ".json"


def save_annotation(a: Annotation, path: str | Path) -> None:
    """Atomically write one annotation document (temp file + rename)."""
    path = Path(path)
    doc = {
        "image_path": a.image_path,
        "k": a.k,
        "cutoff_y": list(a.cutoff_y),
        "annotator_id": a.annotator_id,
        "created_at": a.created_at,
    }
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(json.dumps(doc, sort_keys=True) + "\n", encoding="utf-8")
    os.replace(tmp, path)


def load_annotation(path: str | Path) -> Annotation:
    """Read one annotation document written by :func:`save_annotation`."""
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    return Annotation(
        image_path=str(doc["image_path"]),
        k=int(doc["k"]),
        cutoff_y=tuple(float(y) for y in doc["cutoff_y"]),
        annotator_id=str(doc.get("annotator_id", "anonymous")),
        created_at=str(doc.get("created_at", "")),
    )


def save_image(frame: ImageFrame, path: str | Path) -> None:
    """Write a frame as an 8-bit RGB image file."""
    arr = np.clip(np.rint(frame.pixels * 255.0), 0, 255).astype(np.uint8)
    Image.fromarray(np.transpose(arr, (1, 2, 0))).save(path)


def load_image(path: str | Path) -> ImageFrame:
    """Read an image file into a float frame in [0, 1]."""
    with Image.open(path) as img:
        arr = np.asarray(img.convert("RGB"), dtype=np.float32) / 255.0
    return ImageFrame(np.transpose(arr, (2, 0, 1)))


def load_annotations_dir(directory: str | Path) -> dict[str, Annotation]:
    """Load every annotation document in a directory, keyed by image stem."""
    out: dict[str, Annotation] = {}
    for path in sorted(Path(directory).glob("*.json")):
        a = load_annotation(path)
        out[Path(a.image_path).stem] = a
    return out


def resize_shortest_side(frame: ImageFrame, size: int) -> ImageFrame:
    """Rescale a frame so its shortest side equals ``size`` (bilinear).

    The aspect ratio is preserved; the longer side is rounded to the nearest
    pixel. Channels are resampled as float planes, so no 8-bit quantization
    is introduced.
    """
    if size < 1:
        raise ValueError(f"size must be >= 1, got {size}")
    h, w = frame.height, frame.width
    scale = size / min(h, w)
    new_h = size if h <= w else int(math.floor(h * scale + 0.5))
    new_w = size if w < h else int(math.floor(w * scale + 0.5))
    planes = [
        np.asarray(
            Image.fromarray(frame.pixels[c], mode="F").resize(
                (new_w, new_h), Image.BILINEAR
            ),
            dtype=np.float32,
        )
        for c in range(frame.channels)
    ]
    return ImageFrame(np.clip(np.stack(planes), 0.0, 1.0))
