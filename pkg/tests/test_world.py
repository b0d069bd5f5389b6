import math

import pytest

from lumipad.conditions import ConditionSpec
from lumipad.logio import dump_trial_log
from lumipad.policies import StationaryPolicy, TactilePolicy
from lumipad.world import (
    DroneState,
    ScenarioSpec,
    TimeoutEvent,
    TouchdownEvent,
    run_trial,
    spawn_trial,
    step,
)

SLOW1 = ScenarioSpec(drone_count=1, speed_class="slow")
FAST2 = ScenarioSpec(drone_count=2, speed_class="fast")


class TestSpawn:
    def test_zero_jitter_hits_nominal(self):
        spec = ScenarioSpec(spawn_jitter=0.0)
        w = spawn_trial(spec, 99)
        nx, ny = spec.nominal_positions()[0]
        assert w.drones[0].position == (nx, ny, spec.start_height)
        assert w.drones[0].led_on and w.drones[0].motors_on
        assert w.pads[0].center == (nx, ny, spec.pad_height)
        assert w.pads[0].velocity == (0.0, 0.0)

    def test_same_seed_identical(self):
        a = spawn_trial(SLOW1, 1234)
        b = spawn_trial(SLOW1, 1234)
        assert a.drones[0].position == b.drones[0].position

    def test_different_seeds_differ(self):
        a = spawn_trial(SLOW1, 1)
        b = spawn_trial(SLOW1, 2)
        assert a.drones[0].position != b.drones[0].position

    def test_two_drone_separation_interval(self):
        lim = 2 * 0.06 * math.sqrt(2.0)
        for seed in range(50):
            w = spawn_trial(FAST2, seed)
            (x0, y0, _), (x1, y1, _) = (d.position for d in w.drones)
            d = math.hypot(x0 - x1, y0 - y1)
            assert 1.0 - lim <= d <= 1.0 + lim

    def test_jitter_bounded_by_half_width(self):
        for seed in range(50):
            w = spawn_trial(SLOW1, seed)
            nx, ny = SLOW1.nominal_positions()[0]
            x, y, _ = w.drones[0].position
            assert abs(x - nx) <= SLOW1.spawn_jitter
            assert abs(y - ny) <= SLOW1.spawn_jitter


class TestStep:
    def test_euler_descent(self):
        spec = ScenarioSpec(spawn_jitter=0.0)
        w = spawn_trial(spec, 0)
        step(w, [(0.0, 0.0)], spec)
        assert w.drones[0].position[2] == pytest.approx(2.0 - 0.001, abs=1e-15)

    def test_descent_keeps_xy_bitwise(self):
        w = spawn_trial(SLOW1, 5)
        x0, y0, _ = w.drones[0].position
        for _ in range(200):
            step(w, [(0.1, -0.2)], SLOW1)
        assert w.drones[0].position[0] == x0
        assert w.drones[0].position[1] == y0

    def test_non_finite_command_rejected(self):
        w = spawn_trial(SLOW1, 0)
        with pytest.raises(ValueError):
            step(w, [(float("nan"), 0.0)], SLOW1)

    def test_command_count_checked(self):
        w = spawn_trial(FAST2, 0)
        with pytest.raises(ValueError):
            step(w, [(0.0, 0.0)], FAST2)

    def test_speed_and_accel_limits(self):
        spec = SLOW1
        w = spawn_trial(spec, 7)
        prev_v = (0.0, 0.0)
        for _ in range(300):
            step(w, [(10.0, -10.0)], spec)
            vx, vy = w.pads[0].velocity
            assert math.hypot(vx, vy) <= spec.max_hand_speed + 1e-12
            dv = math.hypot(vx - prev_v[0], vy - prev_v[1])
            assert dv <= spec.hand_accel_limit * spec.dt + 1e-12
            prev_v = (vx, vy)

    def test_touchdown_gap_window(self):
        spec = ScenarioSpec(spawn_jitter=0.0)
        w = spawn_trial(spec, 0)
        events = []
        while not w.done():
            events.extend(step(w, [(0.0, 0.0)], spec))
        touchdowns = [e for e in events if isinstance(e, TouchdownEvent)]
        assert len(touchdowns) == 1
        o = touchdowns[0].outcome
        gap = (o.position[2] - w.drones[0].leg_offset) - spec.pad_height
        assert spec.shutdown_gap - spec.descent_speed * spec.dt <= gap < spec.shutdown_gap
        assert not w.drones[0].motors_on

    def test_level_pad_zero_drift(self):
        spec = ScenarioSpec(spawn_jitter=0.0)
        w = spawn_trial(spec, 0)
        while not w.done():
            step(w, [(0.0, 0.0)], spec)
        assert w.outcomes[0].displacement == (0.0, 0.0)

    def test_tilted_pad_drifts_downhill_by_gain_times_tilt(self):
        spec = ScenarioSpec(spawn_jitter=0.0)

        def land(tilt):
            w = spawn_trial(spec, 0)
            w.pads[0].tilt = tilt
            while not w.done():
                step(w, [(0.0, 0.0)], spec)
            return w.outcomes[0]

        level = land((0.0, 0.0))
        pitched = land((0.0, 0.1))
        dx = pitched.position[0] - level.position[0]
        dy = pitched.position[1] - level.position[1]
        assert math.hypot(dx, dy) == pytest.approx(spec.ground_effect_gain * 0.1, rel=1e-9)
        assert dx > 0  # +pitch drops the +X side of the plate

    def test_small_tilt_below_threshold_no_drift(self):
        spec = ScenarioSpec(spawn_jitter=0.0)
        w = spawn_trial(spec, 0)
        w.pads[0].tilt = (0.0, 0.015)  # below the 0.02 rad threshold
        while not w.done():
            step(w, [(0.0, 0.0)], spec)
        assert w.outcomes[0].displacement[0] == pytest.approx(0.0, abs=1e-12)

    def test_timeout_event_for_stuck_drone(self):
        spec = ScenarioSpec(spawn_jitter=0.0)
        w = spawn_trial(spec, 0)
        w.drones[0].descent_speed = 0.0  # defensive path: motors on, not descending
        events = []
        while not w.done():
            events.extend(step(w, [(0.0, 0.0)], spec))
        assert w.timed_out
        assert any(isinstance(e, TimeoutEvent) for e in events)
        assert w.t == pytest.approx(spec.timeout_s, abs=spec.dt)
        assert w.outcomes == []


class TestRunTrial:
    def test_static_catch_zero_displacement(self):
        spec = ScenarioSpec(spawn_jitter=0.0)
        log = run_trial(spec, [StationaryPolicy()], 0, ConditionSpec("VT", "slow", 1))
        assert log.outcomes[0].displacement == (0.0, 0.0)

    def test_no_pursuit_displacement_equals_spawn_offset(self):
        for seed in (3, 17, 99):
            w0 = spawn_trial(SLOW1, seed)
            off = (
                w0.drones[0].position[0] - w0.pads[0].center[0],
                w0.drones[0].position[1] - w0.pads[0].center[1],
            )
            log = run_trial(SLOW1, [StationaryPolicy()], seed, ConditionSpec("VT", "slow", 1))
            assert log.outcomes[0].displacement == pytest.approx(off, abs=1e-15)

    def test_log_spacing_is_exactly_dt(self):
        log = run_trial(SLOW1, [StationaryPolicy()], 4, ConditionSpec("VT", "slow", 1))
        ts = [s.t for s in log.samples]
        assert ts[0] == 0.0
        for k, (a, b) in enumerate(zip(ts, ts[1:])):
            assert b == (k + 1) * log.dt
            assert b > a

    def test_outcome_iff_touchdown(self):
        log = run_trial(SLOW1, [StationaryPolicy()], 4, ConditionSpec("VT", "slow", 1))
        assert not log.timed_out
        assert len(log.outcomes) == 1
        assert log.outcome_for(0) is not None
        assert log.outcome_for(1) is None

    def test_bit_reproducible(self):
        a = run_trial(FAST2, [TactilePolicy(), TactilePolicy()], 42, ConditionSpec("T", "fast", 2))
        b = run_trial(FAST2, [TactilePolicy(), TactilePolicy()], 42, ConditionSpec("T", "fast", 2))
        assert dump_trial_log(a) == dump_trial_log(b)

    def test_policy_count_checked(self):
        with pytest.raises(ValueError):
            run_trial(FAST2, [StationaryPolicy()], 0, ConditionSpec("VT", "fast", 2))

    def test_condition_scenario_agreement_checked(self):
        with pytest.raises(ValueError):
            run_trial(SLOW1, [StationaryPolicy()], 0, ConditionSpec("VT", "fast", 1))


class TestValidation:
    def test_drone_speed_range(self):
        with pytest.raises(ValueError):
            DroneState(0, (0, 0, 1), descent_speed=0.005)
        DroneState(0, (0, 0, 1), descent_speed=0.0)  # motors-off convention

    def test_scenario_validation(self):
        with pytest.raises(ValueError):
            ScenarioSpec(dt=0.0)
        with pytest.raises(ValueError):
            ScenarioSpec(shutdown_gap=0.0)
        with pytest.raises(ValueError):
            ScenarioSpec(start_height=1.0, pad_height=1.5)

    def test_speed_class_mapping(self):
        assert ScenarioSpec(speed_class="slow").descent_speed == 0.1
        assert ScenarioSpec(speed_class="fast").descent_speed == 0.15
