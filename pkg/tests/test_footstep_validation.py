import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from teleopsim.errors import OutOfBounds, SameSide
from teleopsim.footsteps import (
    Footstep,
    HeightMap,
    Side,
    StepConstraints,
    snap_footstep,
    validate_transition,
)

from oracles import covered_cells_shapely, transition_violations_reference

C = StepConstraints()


def flat_map():
    return HeightMap.flat(60, 60, resolution=0.05, origin_x=-1.5, origin_y=-1.5)


def test_snap_on_flat_free_terrain():
    snapped = snap_footstep(flat_map(), Footstep(side=Side.LEFT, x=0.2, y=0.1, yaw=0.3), C)
    assert snapped.z == 0.0
    assert snapped.valid
    assert snapped.violations == ()


def test_snap_flags_no_step_cell():
    grid = flat_map()
    step = Footstep(side=Side.LEFT, x=0.2, y=0.1, yaw=0.4)
    cells = covered_cells_shapely(grid, step.x, step.y, step.yaw, C.foot_length, C.foot_width)
    ix, iy = cells[len(cells) // 2]
    grid.no_step[iy, ix] = True
    grid.refresh_cached_flags()
    snapped = snap_footstep(grid, step, C)
    assert not snapped.valid
    assert "NO_STEP_CELL" in snapped.violations


def test_snap_flags_ledge_spread():
    grid = flat_map()
    # 0.2 m ledge along the middle of the footprint
    grid.heights[:, 30:] = 0.2
    grid.refresh_cached_flags()
    snapped = snap_footstep(grid, Footstep(side=Side.RIGHT, x=0.0, y=0.0, yaw=0.0), C)
    assert not snapped.valid
    assert "HEIGHT_SPREAD" in snapped.violations


def test_snap_z_is_mean_of_covered_cells():
    grid = flat_map()
    rng = np.random.default_rng(4)
    grid.heights[:] = rng.uniform(0.0, 0.02, size=grid.heights.shape)
    grid.refresh_cached_flags()
    step = Footstep(side=Side.LEFT, x=0.31, y=-0.22, yaw=1.1)
    cells = covered_cells_shapely(grid, step.x, step.y, step.yaw, C.foot_length, C.foot_width)
    expected = np.mean([grid.heights[iy, ix] for ix, iy in cells])
    snapped = snap_footstep(grid, step, C)
    assert snapped.z == pytest.approx(expected, abs=1e-12)
    assert snapped.valid  # spread 0.02 < 0.05


def test_snap_out_of_bounds_raises():
    with pytest.raises(OutOfBounds):
        snap_footstep(flat_map(), Footstep(side=Side.LEFT, x=1.45, y=0.0, yaw=0.0), C)


def nominal_pair():
    stance = Footstep(side=Side.LEFT, x=0.0, y=0.0, yaw=0.0)
    candidate = Footstep(side=Side.RIGHT, x=0.0, y=-C.nominal_separation, yaw=0.0)
    return stance, candidate


def test_nominal_mirror_stance_passes():
    stance, candidate = nominal_pair()
    assert validate_transition(stance, candidate, C) == []


def test_far_forward_step_rejected():
    stance, candidate = nominal_pair()
    far = Footstep(side=Side.RIGHT, x=0.6, y=candidate.y, yaw=0.0)
    codes = [v.value for v in validate_transition(stance, far, C)]
    assert codes == ["OUT_OF_REACH_FORWARD"]


def test_crossed_feet_rejected():
    stance, _ = nominal_pair()
    crossed = Footstep(side=Side.RIGHT, x=0.0, y=0.10, yaw=0.0)
    codes = [v.value for v in validate_transition(stance, crossed, C)]
    assert "CROSSED_FEET" in codes


def test_same_side_raises():
    stance, _ = nominal_pair()
    with pytest.raises(SameSide):
        validate_transition(stance, stance, C)


def test_random_pairs_match_reference_bounds():
    rng = np.random.default_rng(17)
    for _ in range(500):
        stance = Footstep(
            side=Side.LEFT if rng.random() < 0.5 else Side.RIGHT,
            x=rng.uniform(-1, 1),
            y=rng.uniform(-1, 1),
            yaw=rng.uniform(-math.pi, math.pi),
        )
        candidate = Footstep(
            side=stance.side.opposite,
            x=stance.x + rng.uniform(-0.8, 0.8),
            y=stance.y + rng.uniform(-0.8, 0.8),
            yaw=rng.uniform(-math.pi, math.pi),
        )
        got = {v.value for v in validate_transition(stance, candidate, C)}
        assert got == transition_violations_reference(stance, candidate, C)


@settings(max_examples=200, deadline=None)
@given(
    tx=st.floats(-5, 5), ty=st.floats(-5, 5), rot=st.floats(-math.pi, math.pi),
    dx=st.floats(-0.6, 0.6), dy=st.floats(-0.6, 0.6), dyaw=st.floats(-0.6, 0.6),
)
def test_transition_invariant_under_rigid_motion(tx, ty, rot, dx, dy, dyaw):
    """Moving both feet by the same planar transform never changes the verdict."""
    stance = Footstep(side=Side.LEFT, x=0.0, y=0.0, yaw=0.0)
    candidate = Footstep(side=Side.RIGHT, x=dx, y=dy, yaw=dyaw)
    base = {v.value for v in validate_transition(stance, candidate, C)}

    cos, sin = math.cos(rot), math.sin(rot)

    def moved(step):
        return Footstep(
            side=step.side,
            x=tx + cos * step.x - sin * step.y,
            y=ty + sin * step.x + cos * step.y,
            yaw=step.yaw + rot,
        )

    transformed = {
        v.value for v in validate_transition(moved(stance), moved(candidate), C)
    }
    assert transformed == base


def test_constraints_reject_nonpositive_values():
    with pytest.raises(ValueError):
        StepConstraints(max_forward=0.0)
    with pytest.raises(ValueError):
        StepConstraints(min_lateral_separation=0.4, max_lateral=0.35)
