import numpy as np
import pytest

from teleopsim.geometry import Pose, rotvec_from_rot
from teleopsim.kinematics import (
    IkParams,
    IkStatus,
    JointState,
    forward_kinematics,
    solve_ik,
)


def _reachable_target(model, chain, rng):
    q = JointState(
        {name: float(rng.uniform(*spec.limits)) for name, spec in model.joints.items()}
    )
    return forward_kinematics(model, q, chain)


def _round_trip_errors(model, chain, target, solution):
    reached = forward_kinematics(model, solution, chain)
    pos_err = float(np.linalg.norm(reached.position - target.position))
    rot_err = float(
        np.linalg.norm(rotvec_from_rot(target.rotation() @ reached.rotation().T))
    )
    return pos_err, rot_err


def test_seed_already_solving_succeeds_in_zero_iterations(model):
    seed = model.mid_range_state()
    target = forward_kinematics(model, seed, "left_arm")
    result = solve_ik(model, "left_arm", target, seed)
    assert result.success
    assert result.iterations == 0
    assert result.solution.positions == seed.positions


def test_target_beyond_reach_fails_fast(model):
    target = Pose(np.array([5.0, 0.0, 0.0]))
    result = solve_ik(model, "left_arm", target, model.mid_range_state())
    assert result.status is IkStatus.UNREACHABLE
    assert result.iterations == 0


@pytest.mark.parametrize("chain", ["left_arm", "right_arm"])
def test_reachable_targets_solved_and_verified(model, chain):
    rng = np.random.default_rng(2024)
    seed = model.mid_range_state()
    params = IkParams()
    successes = 0
    trials = 100
    for _ in range(trials):
        target = _reachable_target(model, chain, rng)
        result = solve_ik(model, chain, target, seed, params)
        if not result.success:
            continue
        successes += 1
        pos_err, rot_err = _round_trip_errors(model, chain, target, result.solution)
        assert pos_err <= params.position_tolerance
        assert rot_err <= params.orientation_tolerance
        for name in model.chains[chain].joints:
            lo, hi = model.joints[name].limits
            assert lo <= result.solution.get(name) <= hi
    assert successes >= 0.95 * trials


def test_reported_residuals_match_round_trip(model):
    rng = np.random.default_rng(9)
    seed = model.mid_range_state()
    target = _reachable_target(model, "left_arm", rng)
    result = solve_ik(model, "left_arm", target, seed)
    assert result.success
    pos_err, rot_err = _round_trip_errors(model, "left_arm", target, result.solution)
    assert result.position_error == pytest.approx(pos_err, abs=1e-12)
    assert result.orientation_error == pytest.approx(rot_err, abs=1e-12)


def test_freeze_torso_keeps_torso_at_seed(model):
    rng = np.random.default_rng(31)
    seed = model.mid_range_state()
    solved = 0
    for _ in range(20):
        # Generate targets with the torso already at the seed posture so a
        # frozen-torso solve can still reach them.
        q = seed.with_updates(
            {
                name: float(rng.uniform(*model.joints[name].limits))
                for name in model.chains["left_arm"].joints[3:]
            }
        )
        target = forward_kinematics(model, q, "left_arm")
        result = solve_ik(model, "left_arm", target, seed, freeze_torso=True)
        if result.success:
            solved += 1
            for name in model.chains["torso"].joints:
                assert result.solution.get(name) == seed.get(name)
    assert solved >= 18


def test_iteration_cap_reports_best_effort(model):
    rng = np.random.default_rng(55)
    target = _reachable_target(model, "left_arm", rng)
    result = solve_ik(
        model,
        "left_arm",
        target,
        model.mid_range_state(),
        IkParams(max_iterations=1),
    )
    assert result.status in (IkStatus.NO_CONVERGENCE, IkStatus.SUCCESS)
    if result.status is IkStatus.NO_CONVERGENCE:
        assert result.iterations == 1
        assert np.isfinite(result.position_error)
        assert np.isfinite(result.orientation_error)


def test_seed_outside_limits_rejected(model):
    bad = model.mid_range_state().with_updates({"l_elbow_pitch": 5.0})
    target = Pose(np.array([0.3, 0.3, 0.3]))
    with pytest.raises(ValueError):
        solve_ik(model, "left_arm", target, bad)


def test_solutions_never_outside_limits_even_on_failure(model):
    rng = np.random.default_rng(88)
    for _ in range(30):
        target = _reachable_target(model, "left_arm", rng)
        result = solve_ik(
            model,
            "left_arm",
            target,
            model.mid_range_state(),
            IkParams(max_iterations=3),
        )
        for name in model.chains["left_arm"].joints:
            lo, hi = model.joints[name].limits
            assert lo - 1e-12 <= result.solution.get(name) <= hi + 1e-12
