import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial.transform import Rotation

from kphrase.errors import DegenerateFrameError, ParseError, SchemaError
from kphrase.skeleton import (
    JOINT_INDEX,
    JOINT_NAMES,
    MOVEMENT_JOINTS,
    NUM_JOINTS,
    SkeletonSequence,
    compute_reference_frames,
    dumps_sequence,
    gravity_align,
    load_sequence,
    mirror,
    normalize,
    resample,
    rotation_aligning,
    save_sequence,
)
from kphrase.synth import REST_POSE, synth_rest_pose

from oracles import smooth_motion, yaw_matrix


def _doc(T=2, fps=30, names=JOINT_NAMES, value=0.0):
    return {"id": "m", "fps": fps, "joint_names": list(names), "frames": [[[value] * 3] * len(names)] * T}


def test_joint_inventory():
    assert NUM_JOINTS == 17
    assert JOINT_NAMES[0] == "pelvis"
    excluded = {"pelvis", "l_eye", "r_eye", "l_hip", "r_hip"}
    assert sorted(JOINT_NAMES[j] for j in MOVEMENT_JOINTS) == sorted(set(JOINT_NAMES) - excluded)
    assert len(MOVEMENT_JOINTS) == 12


def test_load_minimal_file(tmp_path):
    p = tmp_path / "m.json"
    p.write_text(json.dumps(_doc()))
    seq = load_sequence(p)
    assert seq.num_frames == 2
    assert np.all(seq.frames == 0.0)


def test_missing_joint_is_named(tmp_path):
    p = tmp_path / "m.json"
    p.write_text(json.dumps(_doc(names=[n for n in JOINT_NAMES if n != "r_elbow"])))
    with pytest.raises(SchemaError, match="r_elbow"):
        load_sequence(p)


def test_wrong_order_is_schema_error(tmp_path):
    names = list(JOINT_NAMES)
    names[1], names[2] = names[2], names[1]
    p = tmp_path / "m.json"
    p.write_text(json.dumps(_doc(names=names)))
    with pytest.raises(SchemaError, match="order"):
        load_sequence(p)


def test_malformed_json_reports_position(tmp_path):
    p = tmp_path / "m.json"
    p.write_text('{\n  "fps": 30,\n  "frames": [1, 2\n}')
    with pytest.raises(ParseError, match=r"line \d+ column \d+"):
        load_sequence(p)


@pytest.mark.parametrize(
    "mutate, message",
    [
        (lambda d: d.pop("fps"), "fps"),
        (lambda d: d.update(fps="fast"), "fps"),
        (lambda d: d.update(frames=[[[0, 0]] * 17] * 2), "shape"),
        (lambda d: d.update(frames=[[[0, 0, 0]] * 17]), "at least 2"),
        (lambda d: d.update(text=5), "text"),
    ],
)
def test_schema_errors(tmp_path, mutate, message):
    doc = _doc()
    mutate(doc)
    p = tmp_path / "m.json"
    p.write_text(json.dumps(doc))
    with pytest.raises(SchemaError, match=message):
        load_sequence(p)


def test_duration_from_fps(tmp_path):
    p = tmp_path / "m.json"
    p.write_text(json.dumps(_doc(T=480, fps=120)))
    assert load_sequence(p).duration == 4.0


def test_save_load_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    seq = SkeletonSequence(smooth_motion(rng, 12), fps=24.0, id="walk_01", text="a person walks")
    p = tmp_path / "walk.json"
    save_sequence(seq, p)
    back = load_sequence(p)
    assert np.array_equal(back.frames, seq.frames)
    assert (back.fps, back.id, back.text) == (24.0, "walk_01", "a person walks")
    assert dumps_sequence(back) == p.read_text()


def test_frames_are_read_only():
    seq = synth_rest_pose(3)
    with pytest.raises(ValueError):
        seq.frames[0, 0, 0] = 1.0


# ---------------------------------------------------------------------------
# resampling


def test_resample_decimation_is_exact():
    rng = np.random.default_rng(1)
    seq = SkeletonSequence(smooth_motion(rng, 60), fps=60)
    out = resample(seq, 30)
    assert out.num_frames == 30 and out.fps == 30
    for k in range(30):
        assert np.array_equal(out.frames[k], seq.frames[2 * k])


def test_resample_identity_is_bit_identical():
    rng = np.random.default_rng(2)
    seq = SkeletonSequence(smooth_motion(rng, 20), fps=30)
    assert np.array_equal(resample(seq, 30).frames, seq.frames)


def test_resample_midpoint():
    p0 = np.zeros((NUM_JOINTS, 3))
    p1 = np.ones((NUM_JOINTS, 3))
    out = resample(SkeletonSequence(np.stack([p0, p1]), fps=30), 60)
    assert out.num_frames == 3
    assert np.allclose(out.frames[1], 0.5)
    assert np.array_equal(out.frames[0], p0) and np.array_equal(out.frames[2], p1)


@pytest.mark.parametrize("bad", [0, -30, float("nan")])
def test_resample_rejects_bad_fps(bad):
    with pytest.raises(ValueError):
        resample(synth_rest_pose(4), bad)


@settings(max_examples=60, deadline=None)
@given(
    T=st.integers(2, 200),
    src=st.sampled_from([10, 20, 24, 25, 30, 50, 59.94, 60, 100, 120]),
    dst=st.sampled_from([10, 12.5, 20, 24, 30, 60]),
)
def test_resample_preserves_duration(T, src, dst):
    seq = SkeletonSequence(np.zeros((T, NUM_JOINTS, 3)), fps=src)
    try:
        out = resample(seq, dst)
    except ValueError:
        # too short to keep two output frames
        assert (T - 1) / src < 1 / dst + 1e-9
        return
    span_in = (T - 1) / src
    span_out = (out.num_frames - 1) / dst
    assert span_out <= span_in + 1e-9
    assert span_in - span_out < 1 / dst + 1e-9


@settings(max_examples=30, deadline=None)
@given(T=st.integers(2, 40), factor=st.sampled_from([2, 3, 4]))
def test_resample_interpolates_linearly(T, factor):
    rng = np.random.default_rng(T)
    frames = rng.normal(size=(T, NUM_JOINTS, 3))
    out = resample(SkeletonSequence(frames, fps=10), 10 * factor)
    for k in range(out.num_frames):
        t = k / factor
        lo = int(math.floor(t + 1e-12))
        hi = min(lo + 1, T - 1)
        w = t - lo
        assert np.allclose(out.frames[k], (1 - w) * frames[lo] + w * frames[hi], atol=1e-12)


# ---------------------------------------------------------------------------
# gravity alignment


def _points_seq(points):
    frames = np.zeros((2, NUM_JOINTS, 3))
    frames[:, : len(points)] = points
    return SkeletonSequence(frames, fps=30)


def test_gravity_identity():
    rng = np.random.default_rng(3)
    seq = SkeletonSequence(smooth_motion(rng, 10), fps=30)
    assert np.array_equal(gravity_align(seq).frames, seq.frames)


def test_gravity_quarter_turn():
    out = gravity_align(_points_seq([(0.0, 1.0, 0.0)]), gravity=(0, -1, 0))
    assert np.allclose(out.frames[0, 0], (0, 0, 1), atol=1e-12)


@pytest.mark.parametrize(
    "g", [(1, 1, 1), (0.3, -2.0, 0.5), (0, 0, 1), (0, 0, -5), (1e-3, 0, 1), (1, 0, 0)]
)
def test_gravity_alignment_matches_rotation_oracle(g):
    g = np.array(g, dtype=float) / np.linalg.norm(g)
    R = rotation_aligning(g, np.array([0.0, 0.0, -1.0]))
    assert np.allclose(R @ R.T, np.eye(3), atol=1e-12)
    assert np.isclose(np.linalg.det(R), 1.0)
    assert np.allclose(R @ g, (0, 0, -1), atol=1e-9)
    if abs(g[2] + 1) > 1e-9 and abs(g[2] - 1) > 1e-9:
        # the shortest-arc rotation is unique away from the (anti)parallel cases
        oracle, _ = Rotation.align_vectors([[0.0, 0.0, -1.0]], [g])
        assert np.allclose(R, oracle.as_matrix(), atol=1e-9)


def test_gravity_align_twice_is_identity():
    rng = np.random.default_rng(4)
    seq = SkeletonSequence(smooth_motion(rng, 10), fps=30)
    once = gravity_align(seq, (1, 1, 1))
    twice = gravity_align(once)
    assert np.allclose(once.frames, twice.frames, atol=1e-9)


def test_gravity_zero_rejected():
    with pytest.raises(ValueError):
        gravity_align(synth_rest_pose(2), (0, 0, 0))


def test_normalize_resamples_then_aligns():
    seq = SkeletonSequence(np.repeat(REST_POSE[None], 8, axis=0) @ yaw_matrix(0.0).T, fps=60)
    out = normalize(seq, 30, (0, 0, -1))
    assert out.fps == 30 and out.num_frames == 4


# ---------------------------------------------------------------------------
# reference frames


def test_reference_axis_aligned():
    frames = np.zeros((2, NUM_JOINTS, 3))
    frames[:, JOINT_INDEX["l_hip"]] = (-0.1, 0, 1)
    frames[:, JOINT_INDEX["r_hip"]] = (0.1, 0, 1)
    ref = compute_reference_frames(frames)
    assert np.allclose(ref.right, (1, 0, 0))
    assert np.allclose(ref.up, (0, 0, 1))
    assert np.allclose(ref.forward, (0, 1, 0))


def test_reference_yawed_quarter_turn():
    frames = np.repeat(REST_POSE[None], 2, axis=0) @ yaw_matrix(math.pi / 2).T
    ref = compute_reference_frames(frames)
    assert np.allclose(ref.right, (0, 1, 0), atol=1e-12)
    assert np.allclose(ref.forward, (-1, 0, 0), atol=1e-12)


@pytest.mark.parametrize("vertical", [False, True])
def test_reference_degenerate_names_frame(vertical):
    frames = np.repeat(REST_POSE[None], 5, axis=0).copy()
    frames[3, JOINT_INDEX["r_hip"]] = frames[3, JOINT_INDEX["l_hip"]]
    if vertical:
        frames[3, JOINT_INDEX["r_hip"], 2] += 0.2
    with pytest.raises(DegenerateFrameError) as info:
        compute_reference_frames(frames)
    assert info.value.frame == 3
    assert "3" in str(info.value)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_reference_frames_orthonormal(seed):
    rng = np.random.default_rng(seed)
    ref = compute_reference_frames(smooth_motion(rng, 20))
    for i in range(ref.axes.shape[0]):
        M = ref.axes[i]
        assert np.allclose(M @ M.T, np.eye(3), atol=1e-9)
        assert np.allclose(np.cross(ref.up[i], ref.right[i]), ref.forward[i], atol=1e-9)


# ---------------------------------------------------------------------------
# mirror


def test_mirror_fixes_symmetric_pose():
    seq = synth_rest_pose(3)
    assert np.allclose(mirror(seq).frames, seq.frames, atol=1e-9)


def test_mirror_swaps_sides():
    frames = np.repeat(REST_POSE[None], 2, axis=0).copy()
    frames[1, JOINT_INDEX["l_wrist"], 2] += 0.3
    out = mirror(SkeletonSequence(frames, fps=30)).frames
    assert np.isclose(out[1, JOINT_INDEX["r_wrist"], 2], REST_POSE[JOINT_INDEX["r_wrist"], 2] + 0.3)
    assert np.isclose(out[1, JOINT_INDEX["l_wrist"], 2], REST_POSE[JOINT_INDEX["l_wrist"], 2])


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_mirror_is_involution(seed):
    rng = np.random.default_rng(seed)
    seq = SkeletonSequence(smooth_motion(rng, 15), fps=30)
    assert np.allclose(mirror(mirror(seq)).frames, seq.frames, atol=1e-9)
