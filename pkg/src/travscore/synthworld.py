"""Procedural scenes with analytic traversability ground truth.

Scenes are a textured ground plane seen head-on with axis-aligned rectangular
obstacles painted over it. The two ground styles act as visually distinct
domains for adaptation experiments: obstacle geometry is drawn from a stream
that ignores the domain, so the same seed yields the same ground truth in
both domains while the pixels differ.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .core import ImageFrame, PoseStamped, TraversabilityVector, section_boundaries
from .dataset import Annotation, FrameRecord, save_annotation, save_image, save_manifest

ASPHALT = "asphalt_like"
GRASS = "grass_like"
GROUND_STYLES = (ASPHALT, GRASS)

# Matches the camera aspect used for real recordings (shortest side 128).
DEFAULT_HEIGHT = 128
DEFAULT_WIDTH = 227

_MASK64 = (1 << 64) - 1


def _splitmix64(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(base: int, *parts: int | str) -> int:
    """Fold parts into a 64-bit stream seed with splitmix64 steps."""
    state = _splitmix64(int(base) & _MASK64)
    for part in parts:
        if isinstance(part, str):
            chunks = [int.from_bytes(part.encode("utf-8")[i : i + 8], "little") for i in range(0, max(len(part.encode("utf-8")), 1), 8)]
        else:
            chunks = [int(part) & _MASK64]
        for chunk in chunks:
            state = _splitmix64(state ^ (chunk & _MASK64))
    return state


@dataclass(frozen=True)
class Obstacle:
    """Axis-aligned rectangle in pixel coordinates, bounds inclusive."""

    x0: int
    y0: int
    x1: int
    y1: int
    color: tuple[float, float, float]

    def __post_init__(self):
        if self.x0 > self.x1 or self.y0 > self.y1:
            raise ValueError("obstacle bounds must satisfy x0 <= x1 and y0 <= y1")


@dataclass(frozen=True)
class SceneSpec:
    """Full description of one synthetic scene."""

    height: int
    width: int
    ground_style: str
    obstacles: tuple[Obstacle, ...] = ()
    noise_level: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.height < 1 or self.width < 1:
            raise ValueError("scene dimensions must be positive")
        if self.ground_style not in GROUND_STYLES:
            raise ValueError(f"unknown ground style {self.ground_style!r}")
        if self.noise_level < 0.0:
            raise ValueError("noise_level must be >= 0")
        for o in self.obstacles:
            if o.x0 < 0 or o.y0 < 0 or o.x1 >= self.width or o.y1 >= self.height:
                raise ValueError(f"obstacle {o} outside {self.width}x{self.height} bounds")


def _ground_texture(spec: SceneSpec, rng: np.random.Generator) -> np.ndarray:
    h, w = spec.height, spec.width
    if spec.ground_style == ASPHALT:
        # Light gray slab with fine speckle, channels nearly equal.
        base = rng.uniform(0.50, 0.60)
        speckle = rng.normal(0.0, 0.035, size=(1, h, w))
        tint = rng.uniform(-0.02, 0.02, size=(3, 1, 1))
        tex = base + speckle + tint
    else:
        # Darker green with horizontal banding plus speckle.
        base = np.array([rng.uniform(0.18, 0.26), rng.uniform(0.42, 0.55), rng.uniform(0.16, 0.24)])
        rows = 1.0 + 0.12 * np.sin(np.arange(h)[None, :, None] * rng.uniform(0.5, 1.2) + rng.uniform(0, math.tau))
        speckle = rng.normal(0.0, 0.045, size=(3, h, w))
        tex = base.reshape(3, 1, 1) * rows + speckle
    return np.clip(tex, 0.0, 1.0).astype(np.float64) * np.ones((3, h, w))


def render(spec: SceneSpec) -> ImageFrame:
    """Rasterize a scene: ground texture, obstacles on top, additive noise last."""
    rng = np.random.default_rng(derive_seed(spec.seed, "render", spec.ground_style))
    img = _ground_texture(spec, rng)
    for o in spec.obstacles:
        img[:, o.y0 : o.y1 + 1, o.x0 : o.x1 + 1] = np.array(o.color).reshape(3, 1, 1)
    if spec.noise_level > 0.0:
        img = img + rng.normal(0.0, spec.noise_level, size=img.shape)
    return ImageFrame(np.clip(img, 0.0, 1.0))


def ground_truth(spec: SceneSpec, k: int) -> TraversabilityVector:
    """Analytic per-section scores from the obstacle rectangles.

    For each vertical band, the bottom-most row covered by an intersecting
    obstacle fixes the cutoff: score = 1 - (row + 1) / height, so an obstacle
    touching the bottom row scores exactly 0. Bands with no obstacle score 1.
    """
    bounds = section_boundaries(spec.width, k)
    scores = []
    for c0, c1 in zip(bounds, bounds[1:]):
        bottom = -1
        for o in spec.obstacles:
            if o.x0 < c1 and o.x1 >= c0:
                bottom = max(bottom, o.y1)
        scores.append(1.0 if bottom < 0 else 1.0 - (bottom + 1) / spec.height)
    return TraversabilityVector(scores)


def _sample_scene(
    geometry_rng: np.random.Generator,
    appearance_rng: np.random.Generator,
    domain: str,
    height: int,
    width: int,
    noise_level: float,
    seed: int,
    max_obstacles: int,
) -> SceneSpec:
    n_obs = int(geometry_rng.integers(0, max_obstacles + 1))
    obstacles = []
    for _ in range(n_obs):
        ow = max(2, int(geometry_rng.uniform(0.08, 0.35) * width))
        oh = max(2, int(geometry_rng.uniform(0.12, 0.55) * height))
        x0 = int(geometry_rng.integers(0, max(1, width - ow)))
        y1 = int(geometry_rng.integers(int(0.15 * height), height))
        y0 = max(0, y1 - oh + 1)
        x1 = min(width - 1, x0 + ow - 1)
        # Dark varied hues so the contrast polarity against either ground
        # transfers across domains.
        color = tuple(appearance_rng.uniform(0.02, 0.40, size=3).tolist())
        obstacles.append(Obstacle(x0=x0, y0=y0, x1=x1, y1=y1, color=color))
    return SceneSpec(
        height=height,
        width=width,
        ground_style=domain,
        obstacles=tuple(obstacles),
        noise_level=noise_level,
        seed=seed,
    )


def generate_domain_specs(
    n: int,
    domain: str,
    seed: int,
    height: int = DEFAULT_HEIGHT,
    width: int = DEFAULT_WIDTH,
    noise_level: float = 0.02,
    max_obstacles: int = 3,
) -> list[SceneSpec]:
    """Sample n scene specs for one domain.

    The obstacle layout stream depends only on (seed, index), never on the
    domain, so matched seeds produce identical geometry (hence identical
    ground truth) in both domains; texture and color streams include the
    domain.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if domain not in GROUND_STYLES:
        raise ValueError(f"unknown domain {domain!r}")
    specs = []
    for i in range(n):
        geometry_rng = np.random.default_rng(derive_seed(seed, "geometry", i))
        appearance_rng = np.random.default_rng(derive_seed(seed, "appearance", i, domain))
        specs.append(
            _sample_scene(
                geometry_rng,
                appearance_rng,
                domain,
                height,
                width,
                noise_level,
                seed=derive_seed(seed, "scene", i, domain),
                max_obstacles=max_obstacles,
            )
        )
    return specs


def generate_domain_set(
    n: int,
    domain: str,
    seed: int,
    k: int = 9,
    height: int = DEFAULT_HEIGHT,
    width: int = DEFAULT_WIDTH,
    noise_level: float = 0.02,
    max_obstacles: int = 3,
) -> list[tuple[ImageFrame, TraversabilityVector, str]]:
    """Render n scenes with their analytic scores and domain label."""
    specs = generate_domain_specs(n, domain, seed, height, width, noise_level, max_obstacles)
    return [(render(s), ground_truth(s, k), domain) for s in specs]


# Fixed stamp keeps generated datasets byte-reproducible.
SYNTH_CREATED_AT = "1970-01-01T00:00:00+00:00"


def write_dataset(
    specs: Sequence[SceneSpec],
    out_dir: str | Path,
    k: int = 9,
    start_index: int = 0,
) -> Path:
    """Materialize scenes in the on-disk dataset layout.

    Writes ``images/*.png``, ``annotations/*.json`` and ``manifest.jsonl``
    under ``out_dir`` so synthetic data is interchangeable with recorded
    data downstream. Returns the manifest path.
    """
    out_dir = Path(out_dir)
    (out_dir / "images").mkdir(parents=True, exist_ok=True)
    (out_dir / "annotations").mkdir(parents=True, exist_ok=True)
    records = []
    for offset, spec in enumerate(specs):
        idx = start_index + offset
        name = f"img_{idx:05d}.png"
        save_image(render(spec), out_dir / "images" / name)
        scores = ground_truth(spec, k)
        annotation = Annotation(
            image_path=f"images/{name}",
            k=k,
            cutoff_y=tuple(1.0 - s for s in scores.scores),
            annotator_id="synthworld",
            created_at=SYNTH_CREATED_AT,
        )
        save_annotation(annotation, out_dir / "annotations" / f"img_{idx:05d}.json")
        records.append(
            FrameRecord(
                image_path=f"images/{name}",
                pose=PoseStamped(x=float(idx), y=0.0, yaw=0.0, frame_index=idx, timestamp=idx / 15.0),
                domain=spec.ground_style,
            )
        )
    manifest = out_dir / "manifest.jsonl"
    save_manifest(records, manifest)
    return manifest
