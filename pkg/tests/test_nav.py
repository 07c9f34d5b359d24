import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from travscore.core import PoseStamped, TraversabilityVector
from travscore.nav import (
    Box,
    NavConfig,
    PlanarWorld,
    ReplayWorld,
    VelocityCommand,
    center_score,
    command,
    linear_velocity,
    oracle_policy,
    simulate,
    steering_target,
)
from travscore.synthworld import Obstacle, SceneSpec


CFG = NavConfig(v_max=1.0)


class TestNavConfig:
    def test_defaults(self):
        assert CFG.full_speed_score == 0.5
        assert CFG.stop_score == 0.1
        assert CFG.fov == 85.0
        assert CFG.k == 9

    def test_rejects_bad_thresholds(self):
        with pytest.raises(ValueError):
            NavConfig(v_max=1.0, stop_score=0.5, full_speed_score=0.5)
        with pytest.raises(ValueError):
            NavConfig(v_max=1.0, stop_score=-0.1)
        with pytest.raises(ValueError):
            NavConfig(v_max=1.0, full_speed_score=1.1)
        with pytest.raises(ValueError):
            NavConfig(v_max=0.0)
        with pytest.raises(ValueError):
            NavConfig(v_max=1.0, fov=0.0)
        with pytest.raises(ValueError):
            NavConfig(v_max=1.0, k=0)


class TestLinearVelocity:
    def test_high_score_gives_max(self):
        assert linear_velocity(0.8, CFG) == 1.0
        assert linear_velocity(0.5, CFG) == 1.0
        assert linear_velocity(1.0, CFG) == 1.0

    def test_low_score_stops(self):
        assert linear_velocity(0.1, CFG) == 0.0
        assert linear_velocity(0.05, CFG) == 0.0
        assert linear_velocity(0.0, CFG) == 0.0

    def test_ramp_midpoint(self):
        assert linear_velocity(0.3, CFG) == pytest.approx(0.5, abs=1e-12)

    def test_scales_with_v_max(self):
        cfg = NavConfig(v_max=2.0)
        assert linear_velocity(0.3, cfg) == pytest.approx(1.0, abs=1e-12)

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            linear_velocity(-0.01, CFG)
        with pytest.raises(ValueError):
            linear_velocity(1.01, CFG)

    @given(st.floats(0.0, 1.0), st.floats(0.0, 1.0))
    def test_monotone_non_decreasing(self, a, b):
        lo, hi = sorted((a, b))
        assert linear_velocity(lo, CFG) <= linear_velocity(hi, CFG)

    @given(st.floats(0.0, 1.0 - 1e-6))
    def test_continuity(self, s):
        eps = 1e-7
        assert abs(linear_velocity(s + eps, CFG) - linear_velocity(s, CFG)) < 1e-5


class TestCenterScore:
    def test_odd_k_takes_middle(self):
        scores = TraversabilityVector([0.1, 0.2, 0.9, 0.3, 0.4])
        assert center_score(scores) == 0.9

    def test_even_k_averages_middle_pair(self):
        scores = TraversabilityVector([0.1, 0.4, 0.8, 0.2])
        assert center_score(scores) == pytest.approx(0.6, abs=1e-12)

    def test_k_one(self):
        assert center_score(TraversabilityVector([0.7])) == 0.7


class TestSteeringTarget:
    def test_uniform_scores_point_center(self):
        scores = TraversabilityVector([0.5] * 9)
        assert steering_target(scores, CFG) == 0.0

    def test_leftmost_section_bearing(self):
        scores = TraversabilityVector([1.0] + [0.0] * 8)
        want = ((0 + 0.5) / 9 - 0.5) * 85.0
        assert steering_target(scores, CFG) == pytest.approx(want, abs=1e-12)
        assert steering_target(scores, CFG) == pytest.approx(-37.7778, abs=1e-3)

    def test_center_section_is_zero(self):
        scores = TraversabilityVector([0.0] * 4 + [1.0] + [0.0] * 4)
        assert steering_target(scores, CFG) == 0.0

    def test_tie_prefers_closest_to_center(self):
        scores = TraversabilityVector([1.0, 0.0, 1.0, 0.0, 0.0])
        # sections 0 and 2 tie; 2 is the center
        assert steering_target(scores, NavConfig(v_max=1.0, k=5)) == 0.0

    def test_tie_equidistant_prefers_leftmost(self):
        cfg = NavConfig(v_max=1.0, k=4)
        scores = TraversabilityVector([1.0, 0.0, 0.0, 1.0])
        want = ((0 + 0.5) / 4 - 0.5) * 85.0
        assert steering_target(scores, cfg) == pytest.approx(want, abs=1e-12)

    @settings(max_examples=200)
    @given(st.lists(st.floats(0.0, 1.0), min_size=1, max_size=15))
    def test_bearing_bounded_by_half_fov(self, values):
        scores = TraversabilityVector(values)
        cfg = NavConfig(v_max=1.0, k=len(values))
        assert abs(steering_target(scores, cfg)) <= cfg.fov / 2

    @settings(max_examples=200)
    @given(st.lists(st.floats(0.0, 1.0), min_size=1, max_size=12))
    def test_argmax_invariance_under_monotone_transforms(self, values):
        scores = TraversabilityVector(values)
        cfg = NavConfig(v_max=1.0, k=len(values))
        base = steering_target(scores, cfg)
        for transform in (lambda s: s**3, lambda s: 0.5 + s / 2, lambda s: s / 3):
            mapped = [transform(v) for v in values]
            # Rounding can merge almost-equal scores into a tie; the argmax
            # is only preserved when every pairwise comparison survives.
            preserved = all(
                (a > b) == (ma > mb) and (a < b) == (ma < mb)
                for a, ma in zip(values, mapped)
                for b, mb in zip(values, mapped)
            )
            if preserved:
                assert steering_target(TraversabilityVector(mapped), cfg) == base

    def test_command_combines_both(self):
        scores = TraversabilityVector([0.0] * 4 + [1.0] + [0.0] * 4)
        cmd = command(scores, CFG)
        assert isinstance(cmd, VelocityCommand)
        assert cmd.linear == 1.0
        assert cmd.angular_target == 0.0


def open_scene(h=32, w=45):
    return SceneSpec(height=h, width=w, ground_style="asphalt_like", obstacles=(), seed=1)


def blocked_scene(h=32, w=45):
    wall = Obstacle(x0=0, y0=0, x1=w - 1, y1=h - 1, color=(0.1, 0.1, 0.1))
    return SceneSpec(
        height=h, width=w, ground_style="asphalt_like", obstacles=(wall,), seed=2
    )


class TestSimulate:
    def test_open_world_goes_straight_at_v_max(self):
        world = PlanarWorld(boxes=(), k=9)
        result = simulate(oracle_policy, world, steps=10, config=CFG, dt=0.1)
        assert len(result.points) == 10
        assert not result.collided
        assert not result.stopped
        for pt in result.points:
            assert pt.command.linear == 1.0
            assert pt.command.angular_target == 0.0
            assert pt.pose.y == 0.0
            assert pt.pose.yaw == 0.0
        xs = [pt.pose.x for pt in result.points]
        assert xs == pytest.approx([0.1 * i for i in range(10)], abs=1e-12)

    def test_fully_blocked_stops_within_one_step(self):
        world = ReplayWorld([blocked_scene()])
        result = simulate(oracle_policy, world, steps=10, config=CFG)
        assert result.stopped
        assert len(result.points) == 1
        assert result.points[0].command.linear == 0.0

    def test_scene_spec_sequence_accepted_directly(self):
        result = simulate(oracle_policy, [blocked_scene()], steps=5, config=CFG)
        assert result.stopped and len(result.points) == 1

    def test_replay_world_repeats_last_scene(self):
        world = ReplayWorld([open_scene(), blocked_scene()])
        result = simulate(oracle_policy, world, steps=6, config=CFG)
        # first step free, second blocked, then stays blocked -> stops at step 2
        assert result.stopped
        assert len(result.points) == 2

    def test_wall_ahead_free_corridor_right(self):
        # Wall blocks straight ahead and the left; the right half-plane is open.
        wall = Box(x0=2.0, y0=-1.0, x1=2.6, y1=4.0)
        world = PlanarWorld(boxes=(wall,), k=9, max_range=4.0)
        start = PoseStamped(x=0.0, y=0.0, yaw=0.0)
        result = simulate(
            oracle_policy, world, steps=120, config=CFG, dt=0.1, start=start
        )
        assert not result.collided
        assert all(not world.collides(p.pose.x, p.pose.y) for p in result.points)
        # turned right: final heading has negative yaw (positive bearing)
        assert result.points[-1].pose.yaw < -1.0

    def test_collision_flag_set_when_driving_into_wall(self):
        wall = Box(x0=0.5, y0=-5.0, x1=1.0, y1=5.0)
        world = PlanarWorld(boxes=(wall,), k=9, max_range=4.0)

        def blind_policy(obs):
            return TraversabilityVector([0.0] * 4 + [1.0] + [0.0] * 4)

        result = simulate(blind_policy, world, steps=50, config=CFG, dt=0.2)
        assert result.collided

    def test_observation_frame_matches_scores(self):
        from travscore.dataset import annotation_to_scores
        from travscore.report import cutoff_row

        world = PlanarWorld(boxes=(Box(1.0, -3.0, 1.5, 3.0),), k=9, max_range=4.0)
        obs = world.observe(PoseStamped(x=0.0, y=0.0, yaw=0.0))
        assert obs.frame.height == world.frame_height
        assert obs.frame.width == world.frame_width
        assert obs.scores.k == 9

    def test_positive_gain_turns_clockwise(self):
        # argmax on the right -> positive bearing -> yaw decreases
        class RightPolicy:
            def __call__(self, obs):
                return TraversabilityVector([0.0] * 8 + [1.0])

        world = PlanarWorld(boxes=(), k=9)
        result = simulate(RightPolicy(), world, steps=3, config=CFG, dt=0.1, gain=1.0)
        yaws = [pt.pose.yaw for pt in result.points]
        assert yaws[0] == 0.0
        assert yaws[1] < yaws[0]
        assert yaws[2] < yaws[1]

    def test_rejects_nonpositive_steps(self):
        world = PlanarWorld(boxes=(), k=9)
        with pytest.raises(ValueError):
            simulate(oracle_policy, world, steps=0, config=CFG)
