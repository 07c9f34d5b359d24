"""Shared domain types and the image-region geometry used across the toolkit."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

DEFAULT_SECTIONS = 9


class ConfigurationError(ValueError):
    """Raised when a parameter or layout request is invalid."""


def normalize_yaw(yaw_deg: float) -> float:
    """Wrap an angle in degrees into [-180, 180] (180 maps to -180)."""
    return (yaw_deg + 180.0) % 360.0 - 180.0


@dataclass(frozen=True)
class TraversabilityVector:
    """Per-section traversability scores.

    Each entry is in [0, 1]: 0 means not traversable at all (obstacle at the
    robot's feet), 1 means fully traversable up to the top of the frame.
    """

    scores: tuple[float, ...]

    def __init__(self, scores: Sequence[float]):
        values = tuple(float(s) for s in scores)
        if not values:
            raise ValueError("traversability vector must have at least one section")
        for i, s in enumerate(values):
            if not math.isfinite(s):
                raise ValueError(f"score[{i}] is not finite: {s!r}")
            if s < 0.0 or s > 1.0:
                raise ValueError(f"score[{i}]={s} outside [0, 1]")
        object.__setattr__(self, "scores", values)

    @property
    def k(self) -> int:
        return len(self.scores)

    def __len__(self) -> int:
        return len(self.scores)

    def __getitem__(self, i: int) -> float:
        return self.scores[i]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.scores, dtype=np.float64)


@dataclass(frozen=True, eq=False)
class ImageFrame:
    """An RGB image as a C x H x W array of floats in [0, 1].

    The pixel buffer is copied and marked read-only, so frames can be shared
    freely between threads. Height must be at least the section count before
    the frame is divided into vertical bands.
    """

    pixels: np.ndarray = field(repr=False)

    def __init__(self, pixels: np.ndarray):
        arr = np.array(pixels, dtype=np.float32, copy=True)
        if arr.ndim != 3:
            raise ValueError(f"expected C x H x W pixels, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1 or arr.shape[2] < 1:
            raise ValueError(f"degenerate image shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("pixel values must be finite")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise ValueError("pixel values must lie in [0, 1]")
        arr.flags.writeable = False
        object.__setattr__(self, "pixels", arr)

    @property
    def channels(self) -> int:
        return self.pixels.shape[0]

    @property
    def height(self) -> int:
        return self.pixels.shape[1]

    @property
    def width(self) -> int:
        return self.pixels.shape[2]


@dataclass(frozen=True)
class SectionLayout:
    """Column boundaries of k near-equal-width vertical bands.

    ``boundaries`` holds k+1 strictly increasing column indices with
    boundaries[0] == 0 and boundaries[k] == width; band i covers columns
    [boundaries[i], boundaries[i+1]).
    """

    k: int
    width: int
    boundaries: tuple[int, ...]

    def __post_init__(self):
        if self.k < 1:
            raise ConfigurationError(f"section count must be >= 1, got {self.k}")
        if len(self.boundaries) != self.k + 1:
            raise ConfigurationError("expected k+1 boundaries")
        if self.boundaries[0] != 0 or self.boundaries[-1] != self.width:
            raise ConfigurationError("boundaries must span [0, width]")
        widths = [b - a for a, b in zip(self.boundaries, self.boundaries[1:])]
        if any(w <= 0 for w in widths):
            raise ConfigurationError("boundaries must be strictly increasing")
        if max(widths) - min(widths) > 1:
            raise ConfigurationError("section widths must differ by at most one pixel")

    def columns(self, i: int) -> tuple[int, int]:
        """Half-open column range [start, stop) of band i."""
        return self.boundaries[i], self.boundaries[i + 1]


@dataclass(frozen=True)
class PoseStamped:
    """Planar robot pose attached to a camera frame.

    x, y are meters in a local frame; yaw is degrees, normalized to
    [-180, 180] on construction.
    """

    x: float
    y: float
    yaw: float
    frame_index: int = 0
    timestamp: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "yaw", normalize_yaw(float(self.yaw)))


def section_boundaries(width: int, k: int) -> tuple[int, ...]:
    """Column boundaries round(i * width / k) for i = 0..k."""
    if k < 1:
        raise ConfigurationError(f"section count must be >= 1, got {k}")
    if width < k:
        raise ConfigurationError(f"width {width} is smaller than section count {k}")
    return tuple(int(math.floor(i * width / k + 0.5)) for i in range(k + 1))


def split_sections(frame: ImageFrame, k: int) -> SectionLayout:
    """Divide a frame into k contiguous, near-equal-width vertical bands.

    The bands partition [0, width): widths differ by at most one pixel when
    the width is not divisible by k.
    """
    bounds = section_boundaries(frame.width, k)
    return SectionLayout(k=k, width=frame.width, boundaries=bounds)


def clamp_scores(raw: Sequence[float]) -> TraversabilityVector:
    """Clamp raw per-section outputs into [0, 1] and wrap them as scores.

    Idempotent; values already in range pass through unchanged (no
    quantization). Non-finite inputs are rejected.
    """
    values = [float(v) for v in raw]
    for i, v in enumerate(values):
        if not math.isfinite(v):
            raise ValueError(f"score[{i}] is not finite: {v!r}")
    return TraversabilityVector([min(1.0, max(0.0, v)) for v in values])
