import numpy as np
import pytest
import yaml
from hypothesis import given, strategies as st

from teleopsim.errors import MissingJoint, ModelError, ParseError
from teleopsim.kinematics import JointState, clamp_to_limits, load_robot_model


def test_default_model_chain_inventory(model):
    assert len(model.chains["torso"].joints) == 3
    assert len(model.chains["neck"].joints) == 3
    for arm in ("left_arm", "right_arm"):
        chain = model.chains[arm].joints
        assert len(chain) == 10
        assert chain[:3] == model.chains["torso"].joints
    for hand in ("left_fingers", "right_fingers"):
        assert len(model.chains[hand].joints) == 4
        assert not model.chains[hand].serial
    assert model.end_effectors == {"left": "left_arm", "right": "right_arm"}


def _mutate(model_text, fn):
    doc = yaml.safe_load(model_text)
    fn(doc)
    return yaml.safe_dump(doc)


def test_six_joint_arm_rejected(model_text):
    def drop_elbow(doc):
        doc["joints"] = [j for j in doc["joints"] if j["name"] != "l_elbow_pitch"]
        for chain in doc["chains"].values():
            chain["joints"] = [n for n in chain["joints"] if n != "l_elbow_pitch"]
        # keep the serial linkage intact so only the DOF count is wrong
        for j in doc["joints"]:
            if j["name"] == "l_forearm_yaw":
                j["parent"] = "l_shoulder_yaw"

    with pytest.raises(ModelError):
        load_robot_model(_mutate(model_text, drop_elbow))


def test_inverted_limits_rejected(model_text):
    def invert(doc):
        doc["joints"][0]["limits"] = [0.5, -0.5]

    with pytest.raises(ModelError):
        load_robot_model(_mutate(model_text, invert))


def test_disconnected_chain_rejected(model_text):
    def orphan(doc):
        for j in doc["joints"]:
            if j["name"] == "neck_yaw":
                j["parent"] = "nonexistent_link"

    with pytest.raises(ModelError):
        load_robot_model(_mutate(model_text, orphan))


def test_non_unit_axis_rejected(model_text):
    def stretch(doc):
        doc["joints"][0]["axis"] = [0.0, 0.0, 2.0]

    with pytest.raises(ModelError):
        load_robot_model(_mutate(model_text, stretch))


def test_missing_chain_rejected(model_text):
    def drop(doc):
        del doc["chains"]["neck"]

    with pytest.raises(ModelError):
        load_robot_model(_mutate(model_text, drop))


def test_broken_serial_order_rejected(model_text):
    def scramble(doc):
        doc["chains"]["neck"]["joints"] = ["neck_pitch", "neck_yaw", "neck_roll"]

    with pytest.raises(ModelError):
        load_robot_model(_mutate(model_text, scramble))


def test_malformed_yaml_is_parse_error():
    with pytest.raises(ParseError):
        load_robot_model("joints: [unclosed")


def test_schema_violation_is_parse_error(model_text):
    def remove_axis(doc):
        del doc["joints"][0]["axis"]

    with pytest.raises(ParseError):
        load_robot_model(_mutate(model_text, remove_axis))


def test_clamp_within_limits_is_identity(model):
    q = model.mid_range_state()
    clamped = clamp_to_limits(model, q)
    assert clamped.positions == q.positions


def test_clamp_pins_excess_to_max(model):
    spec = model.joints["l_shoulder_pitch"]
    q = model.zero_state().with_updates({"l_shoulder_pitch": spec.limits[1] + 0.5})
    clamped = clamp_to_limits(model, q)
    assert clamped.get("l_shoulder_pitch") == spec.limits[1]


@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_clamp_idempotent(model, seed):
    rng = np.random.default_rng(seed)
    q = JointState(
        {name: float(rng.uniform(-6, 6)) for name in model.joints}
    )
    once = clamp_to_limits(model, q)
    twice = clamp_to_limits(model, once)
    assert once.positions == twice.positions
    for name, spec in model.joints.items():
        assert spec.limits[0] <= once.get(name) <= spec.limits[1]


def test_clamp_requires_full_coverage(model):
    with pytest.raises(MissingJoint):
        clamp_to_limits(model, JointState({"torso_yaw": 0.0}))
