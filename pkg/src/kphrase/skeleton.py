"""Skeleton sequences: data model, native file I/O and normalization.

Coordinates are meters in a right-handed frame. After :func:`gravity_align`
gravity points along -z, which is what reference-frame construction assumes.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import DegenerateFrameError, ParseError, SchemaError

JOINT_NAMES: tuple[str, ...] = (
    "pelvis",
    "l_hip",
    "r_hip",
    "l_knee",
    "r_knee",
    "l_ankle",
    "r_ankle",
    "neck",
    "head",
    "l_eye",
    "r_eye",
    "l_shoulder",
    "r_shoulder",
    "l_elbow",
    "r_elbow",
    "l_wrist",
    "r_wrist",
)
NUM_JOINTS = len(JOINT_NAMES)
JOINT_INDEX = {name: i for i, name in enumerate(JOINT_NAMES)}

PELVIS = 0
L_HIP, R_HIP = 1, 2
EYES = (9, 10)
HIPS = (L_HIP, R_HIP)

# parent of every joint in the kinematic tree rooted at the pelvis
PARENTS: tuple[int, ...] = (-1, 0, 0, 1, 2, 3, 4, 0, 7, 8, 8, 7, 7, 11, 12, 13, 14)

# joints whose position phrases are meaningful: all but pelvis, eyes and hips
MOVEMENT_JOINTS: tuple[int, ...] = tuple(
    j for j in range(NUM_JOINTS) if j != PELVIS and j not in EYES and j not in HIPS
)


def _mirror_index() -> tuple[int, ...]:
    out = []
    for name in JOINT_NAMES:
        if name.startswith("l_"):
            out.append(JOINT_INDEX["r_" + name[2:]])
        elif name.startswith("r_"):
            out.append(JOINT_INDEX["l_" + name[2:]])
        else:
            out.append(JOINT_INDEX[name])
    return tuple(out)


# joint index after swapping left and right
MIRROR_JOINT: tuple[int, ...] = _mirror_index()


def descendants(joint: int) -> list[int]:
    """Return ``joint`` and every joint below it in the kinematic tree."""
    out = [joint]
    for j in range(NUM_JOINTS):
        k = j
        while PARENTS[k] != -1:
            k = PARENTS[k]
            if k == joint:
                out.append(j)
                break
    return sorted(out)


@dataclass(frozen=True)
class SkeletonSequence:
    """A ``T x 17 x 3`` joint-position time series.

    Attributes
    ----------
    frames : np.ndarray
        Positions in meters, shape ``(T, 17, 3)``, joint order as in
        :data:`JOINT_NAMES`.
    fps : float
        Sampling rate in Hz.
    id : str
        Sequence identifier.
    text : str | None
        Optional attached description.
    """

    frames: np.ndarray
    fps: float
    id: str = ""
    text: str | None = None

    def __post_init__(self):
        frames = np.array(self.frames, dtype=np.float64)
        if frames.ndim != 3 or frames.shape[1:] != (NUM_JOINTS, 3):
            raise SchemaError(f"frames must have shape (T, {NUM_JOINTS}, 3), got {frames.shape}")
        if frames.shape[0] < 2:
            raise SchemaError(f"a sequence needs at least 2 frames, got {frames.shape[0]}")
        if not np.all(np.isfinite(frames)):
            raise SchemaError("frames contain non-finite coordinates")
        if not (self.fps > 0 and math.isfinite(self.fps)):
            raise SchemaError(f"fps must be positive and finite, got {self.fps}")
        frames.setflags(write=False)
        object.__setattr__(self, "frames", frames)
        object.__setattr__(self, "fps", float(self.fps))

    @property
    def num_frames(self) -> int:
        return self.frames.shape[0]

    @property
    def duration(self) -> float:
        """Duration in seconds, counting one period per frame."""
        return self.num_frames / self.fps

    def with_frames(self, frames: np.ndarray, **kwargs) -> "SkeletonSequence":
        return replace(self, frames=frames, **kwargs)


@dataclass(frozen=True)
class ReferenceFrameSeries:
    """Per-frame egocentric unit vectors.

    ``axes[i]`` stacks ``(right, up, forward)`` for frame ``i`` so that
    ``axes[:, a]`` selects one reference vector for all frames.
    """

    axes: np.ndarray = field(repr=False)

    @property
    def right(self) -> np.ndarray:
        return self.axes[:, 0]

    @property
    def up(self) -> np.ndarray:
        return self.axes[:, 1]

    @property
    def forward(self) -> np.ndarray:
        return self.axes[:, 2]


# ---------------------------------------------------------------------------
# native file format

def sequence_to_dict(seq: SkeletonSequence) -> dict:
    doc = {
        "id": seq.id,
        "fps": seq.fps,
        "joint_names": list(JOINT_NAMES),
        "frames": seq.frames.tolist(),
    }
    if seq.text is not None:
        doc["text"] = seq.text
    return doc


def dumps_sequence(seq: SkeletonSequence) -> str:
    """Serialize to the native JSON document (one frame per line)."""
    head = {k: v for k, v in sequence_to_dict(seq).items() if k != "frames"}
    lines = ["{"]
    for key, value in head.items():
        lines.append(f"  {json.dumps(key)}: {json.dumps(value)},")
    lines.append('  "frames": [')
    rows = [json.dumps(frame) for frame in seq.frames.tolist()]
    lines.append(",\n".join("    " + r for r in rows))
    lines.append("  ]")
    lines.append("}")
    return "\n".join(lines) + "\n"


def save_sequence(seq: SkeletonSequence, path: str | Path) -> None:
    Path(path).write_text(dumps_sequence(seq), encoding="utf-8")


def sequence_from_dict(doc: dict, source: str = "<dict>") -> SkeletonSequence:
    if not isinstance(doc, dict):
        raise SchemaError(f"{source}: top-level value must be an object")
    for key in ("fps", "joint_names", "frames"):
        if key not in doc:
            raise SchemaError(f"{source}: missing field '{key}'")
    names = doc["joint_names"]
    if not isinstance(names, list):
        raise SchemaError(f"{source}: field 'joint_names' must be a list")
    missing = [n for n in JOINT_NAMES if n not in names]
    if missing:
        raise SchemaError(f"{source}: joint_names is missing joint(s) {', '.join(missing)}")
    if list(names) != list(JOINT_NAMES):
        extra = [n for n in names if n not in JOINT_INDEX]
        if extra:
            raise SchemaError(f"{source}: unknown joint name(s) {', '.join(map(str, extra))}")
        raise SchemaError(f"{source}: joint_names must follow the canonical order {list(JOINT_NAMES)}")
    fps = doc["fps"]
    if isinstance(fps, bool) or not isinstance(fps, (int, float)):
        raise SchemaError(f"{source}: field 'fps' must be a number")
    try:
        frames = np.asarray(doc["frames"], dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"{source}: field 'frames' is not a rectangular numeric array ({exc})") from None
    if frames.ndim != 3 or frames.shape[1:] != (NUM_JOINTS, 3):
        raise SchemaError(
            f"{source}: field 'frames' must have shape (T, {NUM_JOINTS}, 3), got {frames.shape}"
        )
    text = doc.get("text")
    if text is not None and not isinstance(text, str):
        raise SchemaError(f"{source}: field 'text' must be a string")
    try:
        return SkeletonSequence(frames=frames, fps=float(fps), id=str(doc.get("id", "")), text=text)
    except SchemaError as exc:
        raise SchemaError(f"{source}: {exc}") from None


def load_sequence(path: str | Path, format: str = "native-json") -> SkeletonSequence:
    """Load a native JSON motion file.

    Raises :class:`ParseError` with line/column context on malformed JSON and
    :class:`SchemaError` when joints, shape or fields are wrong.
    """
    if format != "native-json":
        raise ValueError(f"unsupported format {format!r}")
    path = Path(path)
    raw = path.read_text(encoding="utf-8")
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return sequence_from_dict(doc, source=str(path))


# ---------------------------------------------------------------------------
# normalization

def resample(seq: SkeletonSequence, target_fps: float) -> SkeletonSequence:
    """Piecewise-linear resampling to ``target_fps``.

    Output frame ``k`` samples the input at time ``k / target_fps``; the last
    output frame is the final sample time not beyond the input's last frame.
    """
    if not (target_fps > 0 and math.isfinite(target_fps)):
        raise ValueError(f"target_fps must be positive, got {target_fps}")
    if target_fps == seq.fps:
        return seq.with_frames(seq.frames.copy())
    T = seq.num_frames
    ratio = seq.fps / target_fps
    n_out = int(math.floor((T - 1) / ratio + 1e-9)) + 1
    if n_out < 2:
        raise ValueError(f"resampling {T} frames at {seq.fps} Hz to {target_fps} Hz leaves fewer than 2 frames")
    pos = np.arange(n_out) * ratio
    lo = np.minimum(np.floor(pos + 1e-9).astype(int), T - 1)
    frac = np.clip(pos - lo, 0.0, 1.0)
    frac[np.abs(frac) < 1e-9] = 0.0
    hi = np.minimum(lo + 1, T - 1)
    a = seq.frames[lo]
    b = seq.frames[hi]
    w = frac[:, None, None]
    out = a + w * (b - a)
    # keep exact copies where the sample lands on an input frame
    out[frac == 0.0] = a[frac == 0.0]
    return seq.with_frames(out, fps=float(target_fps))


def rotation_aligning(src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    """Minimal rotation matrix taking unit vector ``src`` onto unit vector ``dst``."""
    src = np.asarray(src, dtype=float)
    dst = np.asarray(dst, dtype=float)
    c = float(np.dot(src, dst))
    axis = np.cross(src, dst)
    s = float(np.linalg.norm(axis))
    if s < 1e-12:
        if c > 0:
            return np.eye(3)
        # antiparallel: half-turn about any axis orthogonal to src
        helper = np.array([1.0, 0.0, 0.0]) if abs(src[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
        k = np.cross(src, helper)
        k /= np.linalg.norm(k)
        return 2.0 * np.outer(k, k) - np.eye(3)
    k = axis / s
    K = np.array([[0.0, -k[2], k[1]], [k[2], 0.0, -k[0]], [-k[1], k[0], 0.0]])
    return np.eye(3) + s * K + (1.0 - c) * (K @ K)


def gravity_align(seq: SkeletonSequence, gravity=(0.0, 0.0, -1.0)) -> SkeletonSequence:
    """Rotate ``seq`` so that ``gravity`` maps onto -z."""
    g = np.asarray(gravity, dtype=float)
    if g.shape != (3,) or not np.all(np.isfinite(g)):
        raise ValueError("gravity must be a finite 3-vector")
    norm = float(np.linalg.norm(g))
    if norm == 0.0:
        raise ValueError("gravity vector must be nonzero")
    g = g / norm
    down = np.array([0.0, 0.0, -1.0])
    if np.array_equal(g, down):
        return seq.with_frames(seq.frames.copy())
    R = rotation_aligning(g, down)
    return seq.with_frames(seq.frames @ R.T)


def normalize(seq: SkeletonSequence, target_fps: float = 30.0, gravity=(0.0, 0.0, -1.0)) -> SkeletonSequence:
    """Resample then gravity-align, as done when building a knowledge base."""
    return gravity_align(resample(seq, target_fps), gravity)


def compute_reference_frames(seq: SkeletonSequence | np.ndarray, eps: float = 1e-9) -> ReferenceFrameSeries:
    """Egocentric right/up/forward vectors per frame.

    Up is +z, right is the horizontal projection of the left-to-right hip
    vector, forward is ``up x right``.
    """
    frames = seq.frames if isinstance(seq, SkeletonSequence) else np.asarray(seq, dtype=float)
    hip = frames[:, R_HIP] - frames[:, L_HIP]
    horiz = hip.copy()
    horiz[:, 2] = 0.0
    norms = np.linalg.norm(horiz, axis=1)
    bad = np.flatnonzero(norms < eps)
    if bad.size:
        i = int(bad[0])
        if np.linalg.norm(hip[i]) < eps:
            raise DegenerateFrameError(i, "hip joints coincide")
        raise DegenerateFrameError(i, "hip axis is parallel to gravity")
    T = frames.shape[0]
    axes = np.zeros((T, 3, 3))
    axes[:, 0] = horiz / norms[:, None]
    axes[:, 1, 2] = 1.0
    fwd = np.cross(axes[:, 1], axes[:, 0])
    axes[:, 2] = fwd / np.linalg.norm(fwd, axis=1)[:, None]
    axes.setflags(write=False)
    return ReferenceFrameSeries(axes=axes)


def mirror(seq: SkeletonSequence) -> SkeletonSequence:
    """Reflect across the body's sagittal plane at frame 0 and swap sides.

    The plane passes through the frame-0 pelvis and is spanned by that
    frame's up and forward vectors. Applying it twice returns the input.
    """
    ref = compute_reference_frames(seq)
    n = ref.right[0]
    origin = seq.frames[0, PELVIS]
    rel = seq.frames - origin
    reflected = rel - 2.0 * (rel @ n)[..., None] * n + origin
    return seq.with_frames(reflected[:, list(MIRROR_JOINT)])
