import math
import random

import pytest

from lumipad.conditions import ConditionSpec
from lumipad.logio import dump_trial_log
from lumipad.policies import (
    AttentionHeadModel,
    CombinedPolicy,
    CombinedPolicyParams,
    PadObservation,
    TactilePolicy,
    TactilePolicyParams,
    VisualPolicy,
    VisualPolicyParams,
    combined_step,
    tactile_step,
    visual_step,
)
from lumipad.tactors import PadGeometry, TactileFrame, zero_frame
from lumipad.world import ScenarioSpec, run_trial

GEOM = PadGeometry()


def obs(pad_xy=(0.0, 0.0), drone_xy=None, frame=None, attended=True, operator=(0.0, 0.0)):
    return PadObservation(
        t=0.0, pad_xy=pad_xy, drone_xy=drone_xy, attended=attended,
        operator_xy=operator, frame=frame, geometry=GEOM,
    )


def frame_with(unit, amp, t=0.0):
    amps = [0.0] * 7
    amps[unit] = amp
    return TactileFrame(t, tuple(amps))


class TestVisualStep:
    def test_equilibrium(self):
        p = VisualPolicyParams(position_noise_sd=0.0, operator_bias_gain=0.0)
        cmd, _ = visual_step((0.2, 0.5), (0.0, 0.0), (0.2, 0.5), p, random.Random(0), 0.01)
        assert cmd == (0.0, 0.0)

    def test_operator_bias_closed_form(self):
        # operator 0.5 m behind the drone along -Y, bias 0.1
        p = VisualPolicyParams(position_noise_sd=0.0, operator_bias_gain=0.1)
        drone = (0.0, 0.5)
        _, perceived = visual_step(drone, (0.0, 0.0), (0.0, 0.0), p, random.Random(0), 0.01)
        assert perceived[0] == pytest.approx(0.0)
        assert perceived[1] == pytest.approx(0.45)

    def test_monte_carlo_mean_matches_noiseless(self):
        sd = 0.01
        n = 10_000
        p = VisualPolicyParams(position_noise_sd=sd, operator_bias_gain=0.0, pursuit_gain=2.0)
        rng = random.Random(7)
        drone, pad = (0.1, 0.4), (0.05, 0.35)
        noiseless = (2.0 * (drone[0] - pad[0]), 2.0 * (drone[1] - pad[1]))
        sx = sy = 0.0
        for _ in range(n):
            cmd, _ = visual_step(drone, (0.0, 0.0), pad, p, rng, 0.01)
            sx += cmd[0]
            sy += cmd[1]
        tol = 3.0 * (p.pursuit_gain * sd) / math.sqrt(n)
        assert sx / n == pytest.approx(noiseless[0], abs=tol)
        assert sy / n == pytest.approx(noiseless[1], abs=tol)


class TestTactileStep:
    def test_search_mode_speed(self):
        params = TactilePolicyParams()
        cmd, _, heading = tactile_step(
            zero_frame(), GEOM, 0.0, params, random.Random(3), 0.01, search_heading=1.0
        )
        assert math.hypot(*cmd) == pytest.approx(params.search_speed)
        assert heading != 1.0  # the walk turns

    def test_centered_equilibrium_is_pure_dither(self):
        # only the centre unit active at amplitude 1: centroid (0,0), and the
        # dither scale (1 - total activation) collapses to zero
        cmd, _, _ = tactile_step(
            frame_with(6, 1.0), GEOM, 0.0, TactilePolicyParams(), random.Random(0), 0.01, 0.0
        )
        assert cmd == (0.0, 0.0)

    def test_single_unit_centroid_times_gain(self):
        params = TactilePolicyParams(centroid_gain=3.0, dither_amplitude=0.0)
        cmd, _, _ = tactile_step(
            frame_with(0, 1.0), GEOM, 0.0, params, random.Random(0), 0.01, 0.0
        )
        assert cmd[0] == pytest.approx(0.12)
        assert cmd[1] == pytest.approx(0.0, abs=1e-12)

    def test_dither_scale_shrinks_with_activation(self):
        params = TactilePolicyParams()
        def dither_mag(amp):
            f = frame_with(6, amp)
            cmd, _, _ = tactile_step(f, GEOM, 0.0, params, random.Random(0), 0.01, 0.0)
            return math.hypot(*cmd)  # centroid is (0,0): pure dither remains
        assert dither_mag(0.2) > dither_mag(0.6) > dither_mag(0.99)


class TestCombinedStep:
    P = CombinedPolicyParams()

    def test_zero_activation_pure_visual(self):
        assert combined_step((1.0, 2.0), (-9.0, -9.0), 0.0, self.P) == (1.0, 2.0)

    def test_saturated_activation_pure_tactile(self):
        assert combined_step((1.0, 2.0), (-9.0, 3.0), 0.5, self.P) == (-9.0, 3.0)
        assert combined_step((1.0, 2.0), (-9.0, 3.0), 4.0, self.P) == (-9.0, 3.0)

    def test_half_threshold_is_mean(self):
        cmd = combined_step((1.0, 0.0), (0.0, 1.0), 0.25, self.P)
        assert cmd == (0.5, 0.5)


class TestAttentionHeadModel:
    def test_single_drone_constant_attention_and_convergence(self):
        m = AttentionHeadModel()
        for _ in range(600):
            attended, pose = m.step([(0.3, 0.5)], 0.01)
            assert attended == 0
        bearing = math.atan2(0.5 - m.pivot[1], 0.3 - m.pivot[0])
        assert pose.yaw == pytest.approx(bearing, abs=1e-6)

    def test_two_drone_toggle_schedule(self):
        m = AttentionHeadModel(dwell=0.8)
        drones = [(0.5, 0.5), (-0.5, 0.5)]
        switches = []
        prev = 0
        for k in range(1, 241):
            attended, _ = m.step(drones, 0.01)
            if attended != prev:
                switches.append(round(k * 0.01, 3))
                prev = attended
        assert switches[:2] == [0.8, 1.6]

    def test_yaw_lag_step_response(self):
        tau = 0.15
        m = AttentionHeadModel(yaw_tau=tau)
        m.yaw = 0.0
        target = (10.0, 0.0)  # bearing 0; start error via yaw offset
        m.yaw = 1.0
        err0 = 1.0
        steps = int(round(tau / 0.001))
        for _ in range(steps):
            m.step([target], 0.001)
        assert abs(m.yaw) == pytest.approx(err0 * math.exp(-1.0), rel=5e-3)

    def test_head_pose_on_lever_arm(self):
        m = AttentionHeadModel(sway_lever=0.05)
        _, pose = m.step([(0.0, 1.0)], 0.01)
        assert math.hypot(pose.x - m.pivot[0], pose.y - m.pivot[1]) == pytest.approx(0.05)
        assert pose.z == m.pivot[2]


class TestPolicyClasses:
    def test_visual_freeze_holds_last_percept(self):
        p = VisualPolicyParams(position_noise_sd=0.0, operator_bias_gain=0.0)
        pol = VisualPolicy(p)
        pol.reset(random.Random(0))
        rng = random.Random(0)
        cmd1 = pol.command(obs(drone_xy=(0.1, 0.0)), rng, 0.01)
        assert cmd1 == pytest.approx((0.2, 0.0))
        # unattended: drone moved but the percept is frozen
        cmd2 = pol.command(obs(drone_xy=(0.5, 0.5), attended=False), rng, 0.01)
        assert cmd2 == pytest.approx(cmd1)

    def test_visual_never_seen_holds_still(self):
        pol = VisualPolicy()
        pol.reset(random.Random(0))
        cmd = pol.command(obs(drone_xy=(0.4, 0.4), attended=False), random.Random(0), 0.01)
        assert cmd == (0.0, 0.0)

    def test_tactile_policy_ignores_missing_frame(self):
        pol = TactilePolicy()
        pol.reset(random.Random(0))
        assert pol.command(obs(frame=None), random.Random(0), 0.01) == (0.0, 0.0)

    def test_equilibrium_fixed_point_all_policies(self):
        # zero noise, zero bias, zero dither: a centred pad stays put
        vis = VisualPolicy(VisualPolicyParams(position_noise_sd=0.0, operator_bias_gain=0.0))
        tac = TactilePolicy(TactilePolicyParams(dither_amplitude=0.0))
        comb = CombinedPolicy(
            CombinedPolicyParams(
                visual=VisualPolicyParams(position_noise_sd=0.0, operator_bias_gain=0.0),
                tactile=TactilePolicyParams(dither_amplitude=0.0),
            )
        )
        rng = random.Random(0)
        for pol in (vis, tac, comb):
            pol.reset(rng)
        centered = obs(
            pad_xy=(0.0, 0.0),
            drone_xy=(0.0, 0.0),
            frame=TactileFrame(0.0, (0.4,) * 6 + (0.8,)),
        )
        assert vis.command(centered, rng, 0.01) == pytest.approx((0.0, 0.0), abs=1e-15)
        assert tac.command(centered, rng, 0.01) == pytest.approx((0.0, 0.0), abs=1e-15)
        assert comb.command(centered, rng, 0.01) == pytest.approx((0.0, 0.0), abs=1e-15)


class TestClosedLoopContracts:
    def test_condition_isolation_tactile_logs_ignore_visual_params(self):
        from lumipad.harness import ExperimentConfig, PolicyParamSet, run_single_trial

        cond = ConditionSpec("T", "slow", 1)
        cfg_a = ExperimentConfig(conditions=(cond,))
        cfg_b = ExperimentConfig(
            conditions=(cond,),
            policies=PolicyParamSet(
                visual=VisualPolicyParams(position_noise_sd=0.5, pursuit_gain=9.0)
            ),
        )
        a = run_single_trial(cfg_a, cond, 0)
        b = run_single_trial(cfg_b, cond, 0)
        assert dump_trial_log(a) == dump_trial_log(b)

    def test_visual_logs_ignore_tactile_params(self):
        from lumipad.harness import ExperimentConfig, PolicyParamSet, run_single_trial

        cond = ConditionSpec("V", "slow", 1)
        cfg_a = ExperimentConfig(conditions=(cond,))
        cfg_b = ExperimentConfig(
            conditions=(cond,),
            policies=PolicyParamSet(
                tactile=TactilePolicyParams(centroid_gain=50.0, search_speed=0.4)
            ),
        )
        a = run_single_trial(cfg_a, cond, 0)
        b = run_single_trial(cfg_b, cond, 0)
        assert dump_trial_log(a) == dump_trial_log(b)

    def test_tactile_convergence_after_handover(self):
        spec = ScenarioSpec(drone_count=1, speed_class="slow")
        cond = ConditionSpec("T", "slow", 1)
        handover = CombinedPolicyParams().handover_activation
        # per-step excursions are bounded by the residual dither circle and
        # the hand plant's velocity carry-over: ~0.5 mm at dt = 10 ms
        slack = 6e-4
        for seed in (0, 1, 2, 3, 4):
            log = run_trial(spec, [TactilePolicy()], seed, cond)
            dists = []
            for s in log.samples:
                total = sum(s.pads[0].amps)
                if total > handover:
                    dists.append(
                        math.hypot(
                            s.drones[0].x - s.pads[0].x, s.drones[0].y - s.pads[0].y
                        )
                    )
            assert dists, "activation never crossed the handover threshold"
            for a, b in zip(dists, dists[1:]):
                assert b <= a + slack
            assert dists[-1] <= 0.002  # locked on by touchdown
            assert dists[-1] <= 0.2 * dists[0]

    def test_commands_always_finite(self):
        spec = ScenarioSpec(drone_count=1, speed_class="fast")
        log = run_trial(spec, [TactilePolicy()], 3, ConditionSpec("T", "fast", 1))
        for s in log.samples:
            assert math.isfinite(s.pads[0].x) and math.isfinite(s.pads[0].y)


def test_param_validation():
    with pytest.raises(ValueError):
        VisualPolicyParams(operator_bias_gain=1.5)
    with pytest.raises(ValueError):
        VisualPolicyParams(position_noise_sd=-0.1)
    with pytest.raises(ValueError):
        TactilePolicyParams(search_speed=-1.0)
    with pytest.raises(ValueError):
        CombinedPolicyParams(handover_activation=0.0)
