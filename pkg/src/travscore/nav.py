"""Map per-section scores to velocity commands; run them in a planar simulator.

The command rules: the score of the central image section sets the linear
velocity — full speed at or above ``full_speed_score``, zero at or below
``stop_score``, a linear ramp in between — and the robot steers toward the
center bearing of the highest-scoring section (positive bearing = right of
the camera axis).

The simulator is a smoke-test vehicle, not a planner: unicycle kinematics,
axis-aligned box obstacles, and a proportional heading controller.  Two world
flavors exist: :class:`PlanarWorld` synthesizes observations from robot pose
by casting rays across the camera's field of view, and :class:`ReplayWorld`
replays a fixed sequence of synthetic scenes regardless of pose.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .core import (
    ImageFrame,
    PoseStamped,
    TraversabilityVector,
    section_boundaries,
)
from . import synthworld

__all__ = [
    "NavConfig",
    "VelocityCommand",
    "Observation",
    "TrajectoryPoint",
    "SimulationResult",
    "Box",
    "PlanarWorld",
    "ReplayWorld",
    "center_score",
    "linear_velocity",
    "steering_target",
    "command",
    "oracle_policy",
    "simulate",
]


@dataclass(frozen=True)
class NavConfig:
    """Velocity-mapping parameters.

    ``fov`` is the camera's horizontal field of view in degrees; section
    bearings span ``[-fov/2, fov/2]`` with positive bearings to the right.
    """

    v_max: float
    full_speed_score: float = 0.5
    stop_score: float = 0.1
    fov: float = 85.0
    k: int = 9

    def __post_init__(self) -> None:
        if not (self.v_max > 0.0):
            raise ValueError(f"v_max must be > 0, got {self.v_max}")
        if not (0.0 <= self.stop_score < self.full_speed_score <= 1.0):
            raise ValueError(
                "thresholds must satisfy 0 <= stop_score < full_speed_score <= 1, "
                f"got stop={self.stop_score}, full={self.full_speed_score}"
            )
        if not (self.fov > 0.0):
            raise ValueError(f"fov must be > 0, got {self.fov}")
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")


@dataclass(frozen=True)
class VelocityCommand:
    """Linear speed (m/s) and steering bearing (degrees, positive = right)."""

    linear: float
    angular_target: float


@dataclass(frozen=True)
class Observation:
    """What the robot sees at one pose: a camera frame plus oracle scores."""

    frame: ImageFrame
    scores: TraversabilityVector


@dataclass(frozen=True)
class TrajectoryPoint:
    step: int
    pose: PoseStamped
    command: VelocityCommand
    scores: TraversabilityVector


@dataclass(frozen=True)
class SimulationResult:
    points: Tuple[TrajectoryPoint, ...]
    collided: bool
    stopped: bool


def center_score(scores: TraversabilityVector) -> float:
    """Score of the central section; for even k, mean of the middle two."""
    k = scores.k
    if k % 2 == 1:
        return scores[k // 2]
    return (scores[k // 2 - 1] + scores[k // 2]) / 2.0


def linear_velocity(center: float, config: NavConfig) -> float:
    """Linear speed for the central-section score.

    At or above ``full_speed_score`` the speed is ``v_max``; at or below
    ``stop_score`` it is 0; in between it ramps linearly.
    """
    if not (0.0 <= center <= 1.0):
        raise ValueError(f"score {center} outside [0, 1]")
    if center >= config.full_speed_score:
        return config.v_max
    if center <= config.stop_score:
        return 0.0
    span = config.full_speed_score - config.stop_score
    return config.v_max * (center - config.stop_score) / span


def section_bearing(i: int, config: NavConfig) -> float:
    """Bearing (degrees) of section i's center: ((i + 0.5)/k - 0.5) * fov."""
    return ((i + 0.5) / config.k - 0.5) * config.fov


def steering_target(scores: TraversabilityVector, config: NavConfig) -> float:
    """Bearing of the highest-scoring section's center.

    Ties prefer the section closest to the image center, then the leftmost,
    so a uniform vector steers straight ahead.
    """
    if scores.k != config.k:
        raise ValueError(f"scores have {scores.k} sections, config expects {config.k}")
    center = (config.k - 1) / 2.0
    best = max(range(config.k), key=lambda i: (scores[i], -abs(i - center), -i))
    return section_bearing(best, config)


def command(scores: TraversabilityVector, config: NavConfig) -> VelocityCommand:
    """Full velocity command for one score vector."""
    return VelocityCommand(
        linear=linear_velocity(center_score(scores), config),
        angular_target=steering_target(scores, config),
    )


def oracle_policy(observation: Observation) -> TraversabilityVector:
    """Perception stub that reads the world's ground-truth scores directly."""
    return observation.scores


# -- worlds -----------------------------------------------------------------


@dataclass(frozen=True)
class Box:
    """Axis-aligned obstacle in the ground plane (meters)."""

    x0: float
    y0: float
    x1: float
    y1: float

    def __post_init__(self) -> None:
        if not (self.x0 < self.x1 and self.y0 < self.y1):
            raise ValueError(f"degenerate box ({self.x0},{self.y0})-({self.x1},{self.y1})")

    def contains(self, x: float, y: float) -> bool:
        return self.x0 <= x <= self.x1 and self.y0 <= y <= self.y1

    def ray_distance(self, ox: float, oy: float, dx: float, dy: float) -> float:
        """Distance along the ray (ox,oy) + t*(dx,dy) to this box, or inf."""
        t_near = -math.inf
        t_far = math.inf
        for origin, direction, lo, hi in (
            (ox, dx, self.x0, self.x1),
            (oy, dy, self.y0, self.y1),
        ):
            if abs(direction) < 1e-12:
                if origin < lo or origin > hi:
                    return math.inf
                continue
            t1 = (lo - origin) / direction
            t2 = (hi - origin) / direction
            if t1 > t2:
                t1, t2 = t2, t1
            t_near = max(t_near, t1)
            t_far = min(t_far, t2)
        if t_far < max(t_near, 0.0):
            return math.inf
        return max(t_near, 0.0)


class PlanarWorld:
    """Pose-indexed world: rays cast across the field of view score each section.

    Section ``i`` covers the bearing range ``[(i/k - 0.5) * fov,
    ((i+1)/k - 0.5) * fov]``; ``rays_per_section`` rays sample it evenly.  A
    section's score is the nearest obstacle distance over its rays divided by
    ``max_range`` (so 1.0 means nothing within sensing range).  The rendered
    frame paints each section's blocked fraction from the top of the image,
    matching the annotation convention ``cutoff_y = 1 - score``.
    """

    def __init__(
        self,
        boxes: Sequence[Box] = (),
        k: int = 9,
        fov: float = 85.0,
        max_range: float = 5.0,
        rays_per_section: int = 5,
        frame_height: int = 48,
        frame_width: int = 85,
    ) -> None:
        if not (max_range > 0.0):
            raise ValueError(f"max_range must be > 0, got {max_range}")
        if rays_per_section < 1:
            raise ValueError(f"rays_per_section must be >= 1, got {rays_per_section}")
        self.boxes = tuple(boxes)
        self.k = k
        self.fov = fov
        self.max_range = max_range
        self.rays_per_section = rays_per_section
        self.frame_height = frame_height
        self.frame_width = frame_width
        self._boundaries = section_boundaries(frame_width, k)

    def collides(self, x: float, y: float) -> bool:
        return any(box.contains(x, y) for box in self.boxes)

    def _cast(self, pose: PoseStamped, bearing: float) -> float:
        angle = math.radians(pose.yaw - bearing)
        dx, dy = math.cos(angle), math.sin(angle)
        nearest = min(
            (box.ray_distance(pose.x, pose.y, dx, dy) for box in self.boxes),
            default=math.inf,
        )
        return min(nearest, self.max_range)

    def section_scores(self, pose: PoseStamped) -> TraversabilityVector:
        scores = []
        r = self.rays_per_section
        for i in range(self.k):
            dist = min(
                self._cast(pose, ((i + (j + 0.5) / r) / self.k - 0.5) * self.fov)
                for j in range(r)
            )
            scores.append(dist / self.max_range)
        return TraversabilityVector(scores)

    def _render(self, scores: TraversabilityVector) -> ImageFrame:
        pixels = np.full(
            (3, self.frame_height, self.frame_width), 0.65, dtype=np.float32
        )
        for i in range(self.k):
            blocked = self.frame_height - int(
                math.floor(scores[i] * self.frame_height + 0.5)
            )
            if blocked > 0:
                c0, c1 = self._boundaries[i], self._boundaries[i + 1]
                pixels[:, :blocked, c0:c1] = 0.15
        return ImageFrame(pixels)

    def observe(self, pose: PoseStamped, step: int = 0) -> Observation:
        scores = self.section_scores(pose)
        return Observation(frame=self._render(scores), scores=scores)


class ReplayWorld:
    """Step-indexed world that replays synthetic scenes, ignoring pose.

    Past the end of the sequence the last scene repeats.  There is no
    geometry to collide with.
    """

    def __init__(self, specs: Sequence[synthworld.SceneSpec], k: int = 9) -> None:
        specs = list(specs)
        if not specs:
            raise ValueError("ReplayWorld needs at least one scene")
        self.specs = specs
        self.k = k
        self._cache: dict[int, Observation] = {}

    def collides(self, x: float, y: float) -> bool:
        return False

    def observe(self, pose: PoseStamped, step: int = 0) -> Observation:
        index = min(step, len(self.specs) - 1)
        if index not in self._cache:
            spec = self.specs[index]
            self._cache[index] = Observation(
                frame=synthworld.render(spec),
                scores=synthworld.ground_truth(spec, self.k),
            )
        return self._cache[index]


Policy = Callable[[Observation], TraversabilityVector]
WorldLike = Union["PlanarWorld", "ReplayWorld", Iterable[synthworld.SceneSpec]]


def simulate(
    policy: Policy,
    world: WorldLike,
    steps: int,
    config: NavConfig,
    dt: float = 0.1,
    gain: float = 1.0,
    start: Optional[PoseStamped] = None,
) -> SimulationResult:
    """Run a closed-loop episode and record the trajectory.

    Per step: observe at the current pose, ask the policy for scores, form a
    command, record it, then advance unicycle kinematics — translate along
    the current heading, then rotate with angular velocity
    ``-gain * angular_target`` degrees/s (positive bearing turns the robot
    clockwise, i.e. right).  The episode ends early when the command is a
    full stop (zero linear and angular) or when the robot enters an obstacle,
    which sets the ``collided`` flag.
    """
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    if not (dt > 0.0):
        raise ValueError(f"dt must be > 0, got {dt}")
    if not hasattr(world, "observe"):
        world = ReplayWorld(list(world), k=config.k)
    pose = start if start is not None else PoseStamped(x=0.0, y=0.0, yaw=0.0)
    points: List[TrajectoryPoint] = []
    collided = False
    stopped = False
    for step in range(steps):
        observation = world.observe(pose, step=step)
        scores = policy(observation)
        if scores.k != config.k:
            raise ValueError(
                f"policy produced {scores.k} sections, config expects {config.k}"
            )
        cmd = command(scores, config)
        points.append(TrajectoryPoint(step=step, pose=pose, command=cmd, scores=scores))
        if cmd.linear == 0.0 and cmd.angular_target == 0.0:
            stopped = True
            break
        heading = math.radians(pose.yaw)
        new_x = pose.x + cmd.linear * math.cos(heading) * dt
        new_y = pose.y + cmd.linear * math.sin(heading) * dt
        new_yaw = pose.yaw - gain * cmd.angular_target * dt
        pose = PoseStamped(
            x=new_x,
            y=new_y,
            yaw=new_yaw,
            frame_index=step + 1,
            timestamp=(step + 1) * dt,
        )
        if world.collides(new_x, new_y):
            collided = True
            break
    return SimulationResult(points=tuple(points), collided=collided, stopped=stopped)
