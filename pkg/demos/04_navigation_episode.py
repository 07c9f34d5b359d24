"""
From score vectors to velocity commands
=======================================

Downstream of the perception model sits a deliberately simple controller:
the central section's score sets the linear speed (full speed at 0.5 and
above, zero at 0.1 and below, a linear ramp in between) and the bearing of
the best-scoring section becomes the steering target.

Two closed-loop episodes show what that buys:

1. a *replay* episode scripted like an approach to a wall — open frames,
   then a blocked center (the controller swerves), then fully blocked
   frames (the controller stops dead, exactly zero velocity);
2. a *planar* room in which rays cast against real rectangles produce the
   scores — the robot wanders, but the speed ramp always brakes it before
   any wall, so it never collides.

Run it with:  python3 demos/04_navigation_episode.py
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from travscore.nav import Box, NavConfig, PlanarWorld, ReplayWorld, oracle_policy, simulate
from travscore.synthworld import Obstacle, SceneSpec

OUT = Path(__file__).resolve().parent / "out" / "04_navigation_episode"
OUT.mkdir(parents=True, exist_ok=True)

H, W = 48, 85

# --- episode 1: scripted approach ------------------------------------------
open_scene = SceneSpec(height=H, width=W, ground_style="asphalt_like")
center_block = SceneSpec(
    height=H,
    width=W,
    ground_style="asphalt_like",
    obstacles=(Obstacle(x0=28, y0=10, x1=56, y1=H - 1, color=(0.1, 0.1, 0.1)),),
)
full_block = SceneSpec(
    height=H,
    width=W,
    ground_style="asphalt_like",
    obstacles=(Obstacle(x0=0, y0=0, x1=W - 1, y1=H - 1, color=(0.1, 0.1, 0.1)),),
)

world = ReplayWorld([open_scene] * 3 + [center_block] * 2 + [full_block] * 2, k=9)
result = simulate(oracle_policy, world, steps=30, config=NavConfig(v_max=0.6))

print("scripted approach (replay world):")
print(f"{'step':>4} {'x':>7} {'y':>7} {'yaw':>7} {'v':>6} {'steer':>7}")
for point in result.points:
    print(
        f"{point.step:>4} {point.pose.x:>7.3f} {point.pose.y:>7.3f} "
        f"{point.pose.yaw:>7.2f} {point.command.linear:>6.3f} "
        f"{point.command.angular_target:>7.2f}"
    )
print(f"stopped={result.stopped} collided={result.collided}\n")

# --- episode 2: planar room --------------------------------------------------
room = (
    Box(x0=2.8, y0=-3.2, x1=3.2, y1=3.2),
    Box(x0=-3.2, y0=-3.2, x1=-2.8, y1=3.2),
    Box(x0=-3.2, y0=2.8, x1=3.2, y1=3.2),
    Box(x0=-3.2, y0=-3.2, x1=3.2, y1=-2.8),
)
planar = PlanarWorld(boxes=room, k=9, max_range=5.0)
run = simulate(oracle_policy, planar, steps=400, config=NavConfig(v_max=0.6))
xs = [p.pose.x for p in run.points]
ys = [p.pose.y for p in run.points]
print(f"planar room: {len(run.points)} steps, collided={run.collided}")
print(f"  x range [{min(xs):.2f}, {max(xs):.2f}], y range [{min(ys):.2f}, {max(ys):.2f}]")

fig, ax = plt.subplots(figsize=(5, 5))
for box in room:
    ax.add_patch(
        plt.Rectangle((box.x0, box.y0), box.x1 - box.x0, box.y1 - box.y0, color="0.3")
    )
ax.plot(xs, ys, "-", lw=0.8, color="tab:blue")
ax.plot(xs[0], ys[0], "go", label="start")
ax.plot(xs[-1], ys[-1], "rs", label="end")
ax.set_xlim(-3.5, 3.5)
ax.set_ylim(-3.5, 3.5)
ax.set_aspect("equal")
ax.legend(loc="upper right", fontsize=8)
ax.set_title("closed-room wander: braked before every wall")
fig.savefig(OUT / "room_trajectory.png", dpi=120, bbox_inches="tight")
print(f"  trajectory plot -> {OUT / 'room_trajectory.png'}")
