"""Procedural fixture motions that realise a prompt's phrase pattern.

This is kinematic puppetry. Joints move through a fixed displacement basis
that never rotates the reference frame: a whole-body translation, free
offsets for the 14 non-root joints, a penalised pelvis offset, and hip
offsets restricted to the right/up plane (which leaves the horizontal hip
direction, and so every reference vector, unchanged). Each active frame solves a small minimum-norm Newton
problem so that every target's underlying state (pelvis-relative position,
pair distance, bend angle, pelvis position) changes by exactly the requested
step. Hold segments copy the pose bit-exactly, which makes every run maximal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .catalog import PhraseCatalog, PhraseType, build_catalog
from .errors import DegenerateFrameError, DegenerateLimbError, SynthesisError
from .evaluate import eval_prompt
from .extract import extract
from .prompts import ATOMIC_TYPES, Prompt, mutually_exclusive
from .skeleton import HIPS, JOINT_INDEX, NUM_JOINTS, PELVIS, SkeletonSequence, compute_reference_frames, descendants

# Standing T-pose facing +y, right along +x, pelvis at the origin (meters).
_REST = {
    "pelvis": (0.0, 0.0, 0.0),
    "l_hip": (-0.10, 0.0, 0.0),
    "r_hip": (0.10, 0.0, 0.0),
    "l_knee": (-0.10, 0.0, -0.44),
    "r_knee": (0.10, 0.0, -0.44),
    "l_ankle": (-0.10, 0.0, -0.86),
    "r_ankle": (0.10, 0.0, -0.86),
    "neck": (0.0, 0.0, 0.52),
    "head": (0.0, 0.0, 0.72),
    "l_eye": (-0.035, 0.08, 0.75),
    "r_eye": (0.035, 0.08, 0.75),
    "l_shoulder": (-0.18, 0.0, 0.48),
    "r_shoulder": (0.18, 0.0, 0.48),
    "l_elbow": (-0.46, 0.0, 0.48),
    "r_elbow": (0.46, 0.0, 0.48),
    "l_wrist": (-0.72, 0.0, 0.48),
    "r_wrist": (0.72, 0.0, 0.48),
}
REST_POSE = np.array([_REST[n] for n in sorted(_REST, key=JOINT_INDEX.get)], dtype=np.float64)
REST_POSE.setflags(write=False)

# joints that may move freely; the pelvis and hips get restricted offsets
MOVABLE = tuple(j for j in range(NUM_JOINTS) if j != PELVIS and j not in HIPS)
_BLOCK = (PELVIS,) + HIPS
ROOT_WEIGHT = 0.3


def _displacement_basis(root_offsets: bool) -> np.ndarray:
    """Columns map DOF values to flattened ``(17, 3)`` joint displacements.

    Root offsets move the pelvis (and with it every pelvis-relative position),
    so they are only brought in when the limb joints alone are not enough.
    """
    cols = []
    for a in range(3):
        c = np.zeros((NUM_JOINTS, 3))
        c[:, a] = 1.0
        cols.append(c)
    for j in MOVABLE:
        for a in range(3):
            c = np.zeros((NUM_JOINTS, 3))
            c[j, a] = 1.0
            cols.append(c)
    if not root_offsets:
        return np.stack([c.ravel() for c in cols], axis=1)
    for a in range(3):
        c = np.zeros((NUM_JOINTS, 3))
        c[PELVIS, a] = ROOT_WEIGHT
        cols.append(c)
    # rest-pose right (+x) and up (+z)
    for j in HIPS:
        for a in (0, 2):
            c = np.zeros((NUM_JOINTS, 3))
            c[j, a] = ROOT_WEIGHT
            cols.append(c)
    return np.stack([c.ravel() for c in cols], axis=1)


LIMB_BASIS = _displacement_basis(False)
ROOT_BASIS = _displacement_basis(True)

LAP_CENTER = math.radians(100.0)
PDP_MARGIN = 0.15


def synth_rest_pose(num_frames: int = 30, fps: float = 30.0, id: str = "rest") -> SkeletonSequence:
    """Static T-pose; every dynamic phrase extracts to category 0."""
    return SkeletonSequence(np.repeat(REST_POSE[None], num_frames, axis=0), fps=fps, id=id)


@dataclass(frozen=True)
class SynthSpec:
    """What to synthesize.

    ``step`` is the per-frame change for metric states (m/frame) and
    ``angle_step`` for bend angles (rad/frame).
    """

    kind: str
    targets: tuple[tuple[int, int], ...]
    reps: int | None = None
    num_frames: int = 120
    fps: float = 30.0
    step: float = 0.02
    angle_step: float = math.radians(2.0)
    move_frames: int = 8
    gap_frames: int = 4
    lead_frames: int = 4
    id: str = ""
    text: str | None = None

    def __post_init__(self):
        if min(self.step, self.angle_step) < 100 * 1e-4:
            raise SynthesisError("per-frame amplitude must be at least 100x the 1e-4 threshold")
        if self.move_frames < 6 or self.gap_frames < 2 or self.lead_frames < 1:
            raise SynthesisError("segments too short for the run-length protocols")
        if any(c == 0 for _, c in self.targets):
            raise SynthesisError("cannot synthesize category 0 targets")
        if self.frames_needed > self.num_frames:
            raise SynthesisError(f"{self.kind} pattern needs {self.frames_needed} frames, only {self.num_frames} requested")

    @classmethod
    def from_prompt(cls, prompt: Prompt, **kwargs) -> "SynthSpec":
        return cls(kind=prompt.kind, targets=prompt.targets, reps=prompt.reps, id=prompt.id, text=prompt.text, **kwargs)

    @property
    def segments(self) -> list[tuple[tuple[tuple[int, int], ...], int]]:
        """Movement segments as (active targets, direction).

        Repetitive patterns return to the start pose after every stroke so
        the travel of one stroke bounds the whole excursion.
        """
        if self.kind == "atomic":
            return [(self.targets[:1], 1)]
        if self.kind == "repetitive":
            return [(self.targets[:1], d) for _ in range(self.reps or 0) for d in (1, -1)]
        if self.kind == "sequential":
            return [(self.targets[:1], 1), (self.targets[1:2], 1)]
        if self.kind == "simultaneous":
            return [(self.targets, 1)]
        raise SynthesisError(f"unknown kind {self.kind!r}")

    @property
    def frames_needed(self) -> int:
        n = len(self.segments)
        # trailing hold keeps the last-frame velocity convention out of the way
        return 1 + self.lead_frames + n * self.move_frames + max(n - 1, 0) * self.gap_frames + 2


# ---------------------------------------------------------------------------
# target states and their gradients

class _Target:
    def __init__(self, pid: int, category: int, catalog: PhraseCatalog, axes: np.ndarray, spec: SynthSpec):
        d = catalog[pid]
        if d.ptype not in ATOMIC_TYPES:
            raise SynthesisError(f"phrase {pid} ({d.ptype.name}) is a static family and cannot be driven")
        self.pid, self.cat, self.desc = pid, category, d
        self.ptype, self.joints = d.ptype, d.joints
        self.r = axes[d.axis] if d.axis is not None else None
        amp = spec.angle_step if d.ptype == PhraseType.LAP else spec.step
        self.delta = category * amp

    def state(self, x: np.ndarray) -> float:
        t, js = self.ptype, self.joints
        if t == PhraseType.PP:
            return float((x[js[0]] - x[PELVIS]) @ self.r)
        if t == PhraseType.PDP:
            return float(np.linalg.norm(x[js[0]] - x[js[1]]))
        if t == PhraseType.LAP:
            return _angle(x, *js)
        return float(x[PELVIS] @ self.r)

    def grad(self, x: np.ndarray) -> np.ndarray:
        """Gradient of :meth:`state` with respect to all joint positions."""
        g = np.zeros((NUM_JOINTS, 3))
        t, js = self.ptype, self.joints
        if t == PhraseType.PP:
            g[js[0]] += self.r
            g[PELVIS] -= self.r
        elif t == PhraseType.PDP:
            diff = x[js[0]] - x[js[1]]
            unit = diff / np.linalg.norm(diff)
            g[js[0]] += unit
            g[js[1]] -= unit
        elif t == PhraseType.LAP:
            apex, a, b = js
            u, v = x[a] - x[apex], x[b] - x[apex]
            nu, nv = np.linalg.norm(u), np.linalg.norm(v)
            uh, vh = u / nu, v / nv
            cos = float(np.clip(uh @ vh, -1.0, 1.0))
            sin = math.sqrt(max(1.0 - cos * cos, 0.0))
            if sin < 1e-6:
                raise SynthesisError(f"chain {js} is straight; its bend gradient is undefined")
            gu = (cos * uh - vh) / (nu * sin)
            gv = (cos * vh - uh) / (nv * sin)
            g[a] += gu
            g[b] += gv
            g[apex] -= gu + gv
        else:
            g[PELVIS] += self.r
        return g


def _angle(x: np.ndarray, apex: int, a: int, b: int) -> float:
    u, v = x[a] - x[apex], x[b] - x[apex]
    cos = float(u @ v / (np.linalg.norm(u) * np.linalg.norm(v)))
    return math.acos(min(1.0, max(-1.0, cos)))


def _dof_jacobian(targets: list[_Target], x: np.ndarray, basis: np.ndarray) -> np.ndarray:
    return np.array([tg.grad(x).ravel() @ basis for tg in targets])


def _apply(x: np.ndarray, dof: np.ndarray, basis: np.ndarray) -> np.ndarray:
    return x + (basis @ dof).reshape(NUM_JOINTS, 3)


def _step(
    x: np.ndarray,
    targets: list[_Target],
    direction: int = 1,
    basis: np.ndarray = LIMB_BASIS,
    held: list[_Target] = (),
) -> np.ndarray:
    """Pose after one frame in which every target state moves by its delta.

    States of ``held`` targets are kept constant over the frame.
    """
    want = np.concatenate([direction * np.array([tg.delta for tg in targets]), np.zeros(len(held))])
    targets = list(targets) + list(held)
    s0 = np.array([tg.state(x) for tg in targets])

    def residual(dof):
        y = _apply(x, dof, basis)
        return y, want - (np.array([tg.state(y) for tg in targets]) - s0)

    dof = np.zeros(basis.shape[1])
    y, res = residual(dof)
    for _ in range(20):
        if np.max(np.abs(res)) < 1e-12:
            return y
        J = _dof_jacobian(targets, y, basis)
        sv = np.linalg.svd(J, compute_uv=False)
        if sv[-1] < 1e-3 * max(1.0, sv[0]):
            names = ", ".join(tg.desc.name for tg in targets)
            raise SynthesisError(f"targets cannot be driven independently here: {names}")
        update = np.linalg.lstsq(J, res, rcond=None)[0]
        # backtrack until the residual shrinks
        for _ in range(12):
            y_new, res_new = residual(dof + update)
            if np.linalg.norm(res_new) < np.linalg.norm(res):
                break
            update = update / 2.0
        else:
            break
        dof, y, res = dof + update, y_new, res_new
    if np.max(np.abs(res)) > 1e-6 * np.max(np.abs(want)):
        raise SynthesisError("per-frame solve did not converge")
    return y


# ---------------------------------------------------------------------------
# pre-posing so that the requested travel stays well inside valid ranges

def _rotate_about(points: np.ndarray, center: np.ndarray, axis: np.ndarray, angle: float) -> np.ndarray:
    k = axis / np.linalg.norm(axis)
    p = points - center
    c, s = math.cos(angle), math.sin(angle)
    rotated = p * c + np.cross(k, p) * s + np.outer(p @ k, k) * (1.0 - c)
    return rotated + center


def _moving_end(apex: int, a: int, b: int) -> tuple[int, int]:
    """(fixed end, moving end): the moving end hangs below the apex in the tree."""
    if b in descendants(apex):
        return a, b
    return b, a


def set_chain_angle(x: np.ndarray, chain: tuple[int, int, int], theta: float) -> np.ndarray:
    """Rotate the distal part of a chain about its apex to reach ``theta``."""
    apex, a, b = chain
    fixed, moving = _moving_end(apex, a, b)
    x = x.copy()
    sub = descendants(moving)
    for _ in range(3):
        u, v = x[fixed] - x[apex], x[moving] - x[apex]
        current = _angle(x, apex, a, b)
        n = np.cross(u, v)
        if np.linalg.norm(n) < 1e-9 * np.linalg.norm(u) * np.linalg.norm(v):
            ref = np.array([0.0, 1.0, 0.0])
            if np.linalg.norm(np.cross(u / np.linalg.norm(u), ref)) < 0.1:
                ref = np.array([0.0, 0.0, 1.0])
            n = np.cross(u, ref)
            # straight (pi) or folded (0): any rotation moves the angle towards the middle
            amount = (math.pi - theta) if current > math.pi / 2 else theta
        else:
            amount = theta - current
        x[sub] = _rotate_about(x[sub], x[apex], n, amount)
        if abs(_angle(x, apex, a, b) - theta) < 1e-12:
            break
    return x


def _pdp_mover(j: int, k: int) -> tuple[int, int]:
    """(moving, other) for pushing a pair apart without touching the pelvis block."""
    for m, o in ((k, j), (j, k)):
        if m not in _BLOCK and o not in descendants(m):
            return m, o
    raise SynthesisError(f"no movable joint for pair ({j}, {k})")


def _prepose(x: np.ndarray, targets: list[_Target], spec: SynthSpec, margin: float = PDP_MARGIN) -> np.ndarray:
    # every target travels one stroke away from its start state at most
    for tg in targets:
        if tg.ptype == PhraseType.LAP:
            travel = spec.move_frames * spec.angle_step
            x = set_chain_angle(x, tg.joints, LAP_CENTER - tg.cat * travel / 2.0)
    for tg in targets:
        if tg.ptype == PhraseType.PDP and tg.cat < 0:
            need = spec.move_frames * spec.step + margin
            j, k = tg.joints
            m, o = _pdp_mover(j, k)
            diff = x[m] - x[o]
            dist = float(np.linalg.norm(diff))
            if dist < need:
                sub = descendants(m)
                x = x.copy()
                x[sub] += diff / dist * (need - dist)
    return x


# ---------------------------------------------------------------------------
# public entry points

def _targets_for(spec: SynthSpec, catalog: PhraseCatalog) -> list[_Target]:
    axes = compute_reference_frames(REST_POSE[None]).axes[0]
    return [_Target(pid, c, catalog, axes, spec) for pid, c in spec.targets]


def _build(spec: SynthSpec, targets: list[_Target], margin: float, jitter: float, basis: np.ndarray) -> np.ndarray:
    by_pid = {tg.pid: tg for tg in targets}
    start = REST_POSE.copy()
    if jitter:
        offsets = np.random.default_rng(7).uniform(-jitter, jitter, size=(NUM_JOINTS, 3))
        start[list(MOVABLE)] += offsets[list(MOVABLE)]
    frames = [_prepose(start, targets, spec, margin)]
    for _ in range(spec.lead_frames):
        frames.append(frames[-1].copy())
    for n, (seg, direction) in enumerate(spec.segments):
        if n:
            for _ in range(spec.gap_frames):
                frames.append(frames[-1].copy())
        active = [by_pid[pid] for pid, _ in seg]
        # freezing the first target afterwards keeps all of its runs ahead of
        # the second target's segment, so the reversed order cannot hit
        held = [by_pid[pid] for pid, _ in spec.targets[:1]] if spec.kind == "sequential" and n else []
        for _ in range(spec.move_frames):
            frames.append(_step(frames[-1], active, direction, basis, held))
    while len(frames) < spec.num_frames:
        frames.append(frames[-1].copy())
    return np.array(frames)


# (closer-pair margin, start-pose jitter, DOF basis) tried in turn when an attempt fails
ATTEMPTS = tuple(
    (margin, jitter, basis)
    for basis in (LIMB_BASIS, ROOT_BASIS)
    for margin, jitter in ((PDP_MARGIN, 0.0), (0.4, 0.02), (0.8, 0.05))
)


def confusers(prompt: Prompt) -> list[Prompt]:
    """Prompts a faithful motion for ``prompt`` must not hit."""
    if prompt.kind == "atomic":
        (pid, cat), = prompt.targets
        return [Prompt("opposite", "atomic", "", ((pid, -cat),))]
    if prompt.kind == "sequential":
        return [Prompt("reversed", "sequential", "", prompt.targets[::-1])]
    if prompt.kind == "simultaneous":
        return [Prompt("ordered", "sequential", "", prompt.targets), Prompt("reversed", "sequential", "", prompt.targets[::-1])]
    return []


def realises(prompt: Prompt, ps) -> bool:
    """Hit on ``prompt`` and miss on the prompts its construction rules out."""
    return eval_prompt(prompt, ps).hit and not any(eval_prompt(c, ps).hit for c in confusers(prompt))


def synthesize(spec: SynthSpec, catalog: PhraseCatalog | None = None, verify: bool = True) -> SkeletonSequence:
    """Build a motion realising ``spec``'s pattern.

    With ``verify`` the result is extracted and checked at default settings:
    it must hit its own pattern and miss the opposite category (atomic), the
    reversed order (sequential) or either ordering (simultaneous). A failure
    raises :class:`SynthesisError`.
    """
    catalog = catalog or build_catalog()
    expected = {"atomic": 1, "repetitive": 1, "sequential": 2, "simultaneous": 2}.get(spec.kind)
    if expected is None or len(spec.targets) != expected:
        raise SynthesisError(f"{spec.kind} pattern needs {expected} target(s)")
    if expected == 2:
        if mutually_exclusive(*spec.targets):
            raise SynthesisError("targets are mutually exclusive")
        if spec.targets[0][0] == spec.targets[1][0]:
            raise SynthesisError("two-target patterns need distinct phrases")
    if spec.kind == "repetitive" and not (isinstance(spec.reps, int) and spec.reps >= 1):
        raise SynthesisError("repetition count must be a positive integer")

    targets = _targets_for(spec, catalog)
    prompt = Prompt(spec.id or "synth", spec.kind, spec.text or "", spec.targets, spec.reps)
    last_error = None
    for margin, jitter, basis in ATTEMPTS:
        try:
            frames = _build(spec, targets, margin, jitter, basis)
            seq = SkeletonSequence(frames, fps=spec.fps, id=spec.id, text=spec.text)
            if verify and not realises(prompt, extract(seq, catalog)):
                raise SynthesisError("synthesized motion does not realise its pattern")
            return seq
        except (SynthesisError, DegenerateLimbError, DegenerateFrameError) as exc:
            last_error = exc
    raise SynthesisError(f"cannot synthesize {spec.kind} {spec.targets}: {last_error}")


def _synth_kind(kind: str, spec: SynthSpec, catalog: PhraseCatalog | None) -> SkeletonSequence:
    if spec.kind != kind:
        raise SynthesisError(f"expected a {kind} spec, got {spec.kind}")
    return synthesize(spec, catalog)


def synth_atomic(spec: SynthSpec, catalog: PhraseCatalog | None = None) -> SkeletonSequence:
    return _synth_kind("atomic", spec, catalog)


def synth_repetitive(spec: SynthSpec, catalog: PhraseCatalog | None = None) -> SkeletonSequence:
    return _synth_kind("repetitive", spec, catalog)


def synth_sequential(spec: SynthSpec, catalog: PhraseCatalog | None = None) -> SkeletonSequence:
    return _synth_kind("sequential", spec, catalog)


def synth_simultaneous(spec: SynthSpec, catalog: PhraseCatalog | None = None) -> SkeletonSequence:
    return _synth_kind("simultaneous", spec, catalog)


def synth_for_prompt(prompt: Prompt, catalog: PhraseCatalog | None = None, **kwargs) -> SkeletonSequence:
    return synthesize(SynthSpec.from_prompt(prompt, **kwargs), catalog)
