"""The fixed inventory of 392 kinematic phrases.

Phrase families and their candidate pools:

* PP   -- 12 movement joints x 3 axes, minus both shoulders on the right axis.
* PRPP -- all 136 joint pairs x 3 axes, minus limb-linked pairs, eye pairs
  other than (l_eye, r_eye), and four near-constant (pair, axis) triplets.
* PDP  -- the 105 pairs of non-eye joints minus the same limb-linked pairs.
* LAP  -- eight hinge-like chains ``(apex, end_a, end_b)``.
* LOP  -- 15 limbs x 3 axes minus 21 near-constant (limb, axis) pairs.
* GVP  -- pelvis velocity along each axis.

Ids are contiguous and ordered by (family, joints tuple, axis).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from pathlib import Path

from .skeleton import EYES, JOINT_INDEX, JOINT_NAMES, MIRROR_JOINT, MOVEMENT_JOINTS, NUM_JOINTS


class PhraseType(enum.IntEnum):
    PP = 0
    PRPP = 1
    PDP = 2
    LAP = 3
    LOP = 4
    GVP = 5


class Axis(enum.IntEnum):
    RIGHT = 0
    UP = 1
    FORWARD = 2


J = JOINT_INDEX

# Pairs treated as "linked by a limb": the 14 bones among the 15 non-eye
# joints plus 10 pairs spanned by a short rigid chain.
BONES: tuple[tuple[str, str], ...] = (
    ("pelvis", "l_hip"),
    ("pelvis", "r_hip"),
    ("l_hip", "l_knee"),
    ("r_hip", "r_knee"),
    ("l_knee", "l_ankle"),
    ("r_knee", "r_ankle"),
    ("pelvis", "neck"),
    ("neck", "head"),
    ("neck", "l_shoulder"),
    ("neck", "r_shoulder"),
    ("l_shoulder", "l_elbow"),
    ("r_shoulder", "r_elbow"),
    ("l_elbow", "l_wrist"),
    ("r_elbow", "r_wrist"),
)
LINKED_EXTRA: tuple[tuple[str, str], ...] = (
    ("l_hip", "r_hip"),
    ("l_shoulder", "r_shoulder"),
    ("l_shoulder", "l_hip"),
    ("r_shoulder", "r_hip"),
    ("l_wrist", "l_shoulder"),
    ("r_wrist", "r_shoulder"),
    ("l_ankle", "l_hip"),
    ("r_ankle", "r_hip"),
    ("head", "l_shoulder"),
    ("head", "r_shoulder"),
)

PP_EXCLUDED: tuple[tuple[str, Axis], ...] = (
    ("l_shoulder", Axis.RIGHT),
    ("r_shoulder", Axis.RIGHT),
)

# Knee/ankle versus the opposite hip barely changes sides along the right axis.
PRPP_EXCLUDED: tuple[tuple[str, str, Axis], ...] = (
    ("r_hip", "l_knee", Axis.RIGHT),
    ("l_hip", "r_knee", Axis.RIGHT),
    ("r_hip", "l_ankle", Axis.RIGHT),
    ("l_hip", "r_ankle", Axis.RIGHT),
)

# (name, apex, end_a, end_b); the angle is measured at the apex
LAP_CHAINS: tuple[tuple[str, str, str, str], ...] = (
    ("left arm", "l_elbow", "l_shoulder", "l_wrist"),
    ("right arm", "r_elbow", "r_shoulder", "r_wrist"),
    ("left leg", "l_knee", "l_hip", "l_ankle"),
    ("right leg", "r_knee", "r_hip", "r_ankle"),
    ("left shoulder", "l_shoulder", "l_elbow", "neck"),
    ("right shoulder", "r_shoulder", "r_elbow", "neck"),
    ("left hip", "l_hip", "l_knee", "pelvis"),
    ("right hip", "r_hip", "r_knee", "pelvis"),
)

# (name, proximal, distal)
LIMBS: tuple[tuple[str, str, str], ...] = (
    ("left upper arm", "l_shoulder", "l_elbow"),
    ("right upper arm", "r_shoulder", "r_elbow"),
    ("left forearm", "l_elbow", "l_wrist"),
    ("right forearm", "r_elbow", "r_wrist"),
    ("left thigh", "l_hip", "l_knee"),
    ("right thigh", "r_hip", "r_knee"),
    ("left shank", "l_knee", "l_ankle"),
    ("right shank", "r_knee", "r_ankle"),
    ("head", "neck", "head"),
    ("left collarbone", "neck", "l_shoulder"),
    ("right collarbone", "neck", "r_shoulder"),
    ("left hip bone", "pelvis", "l_hip"),
    ("right hip bone", "pelvis", "r_hip"),
    ("torso", "pelvis", "neck"),
    ("upper body", "pelvis", "head"),
)

# 21 (limb, axis) pairs whose indicator is near-constant for a standing body
LOP_EXCLUDED: tuple[tuple[str, Axis], ...] = (
    ("head", Axis.UP),
    ("torso", Axis.UP),
    ("upper body", Axis.UP),
    ("left thigh", Axis.UP),
    ("right thigh", Axis.UP),
    ("left shank", Axis.UP),
    ("right shank", Axis.UP),
    ("left shank", Axis.RIGHT),
    ("right shank", Axis.RIGHT),
    ("left collarbone", Axis.RIGHT),
    ("right collarbone", Axis.RIGHT),
    ("left collarbone", Axis.UP),
    ("right collarbone", Axis.UP),
    ("left collarbone", Axis.FORWARD),
    ("right collarbone", Axis.FORWARD),
    ("left hip bone", Axis.RIGHT),
    ("right hip bone", Axis.RIGHT),
    ("left hip bone", Axis.UP),
    ("right hip bone", Axis.UP),
    ("left hip bone", Axis.FORWARD),
    ("right hip bone", Axis.FORWARD),
)

EXPECTED_COUNTS = {
    PhraseType.PP: 34,
    PhraseType.PRPP: 242,
    PhraseType.PDP: 81,
    PhraseType.LAP: 8,
    PhraseType.LOP: 24,
    PhraseType.GVP: 3,
}
NUM_PHRASES = sum(EXPECTED_COUNTS.values())

DISPLAY_NAMES = {
    "pelvis": "pelvis",
    "l_hip": "left hip",
    "r_hip": "right hip",
    "l_knee": "left knee",
    "r_knee": "right knee",
    "l_ankle": "left foot",
    "r_ankle": "right foot",
    "neck": "neck",
    "head": "head",
    "l_eye": "left eye",
    "r_eye": "right eye",
    "l_shoulder": "left shoulder",
    "r_shoulder": "right shoulder",
    "l_elbow": "left elbow",
    "r_elbow": "right elbow",
    "l_wrist": "left hand",
    "r_wrist": "right hand",
}


def _pair(a: str, b: str) -> tuple[int, int]:
    i, k = J[a], J[b]
    return (i, k) if i < k else (k, i)


LINKED_PAIRS: frozenset[tuple[int, int]] = frozenset(_pair(a, b) for a, b in BONES + LINKED_EXTRA)


@dataclass(frozen=True)
class PhraseDescriptor:
    """One phrase: family, joints (or limb / chain) and reference axis.

    ``joints`` holds ``(j,)`` for PP, ``(j, k)`` with ``j < k`` for PRPP and
    PDP, ``(apex, end_a, end_b)`` for LAP, ``(proximal, distal)`` for LOP and
    ``(0,)`` (the pelvis) for GVP.
    """

    id: int
    ptype: PhraseType
    joints: tuple[int, ...]
    axis: Axis | None
    name: str
    label: str = ""

    @property
    def key(self) -> tuple:
        return (self.ptype, self.joints, self.axis)

    @property
    def is_derivative(self) -> bool:
        """True for families that describe change rather than state."""
        return self.ptype in (PhraseType.PP, PhraseType.PDP, PhraseType.LAP, PhraseType.GVP)


def _display(j: int) -> str:
    return DISPLAY_NAMES[JOINT_NAMES[j]]


def _candidates() -> list[tuple]:
    """Yield (ptype, joints, axis, label) for every kept phrase, unordered."""
    out = []
    pp_skip = {(J[n], a) for n, a in PP_EXCLUDED}
    for j in MOVEMENT_JOINTS:
        for a in Axis:
            if (j, a) not in pp_skip:
                out.append((PhraseType.PP, (j,), a, _display(j)))

    eye_pair = _pair("l_eye", "r_eye")
    prpp_skip = {(_pair(x, y), a) for x, y, a in PRPP_EXCLUDED}
    for pair in combinations(range(NUM_JOINTS), 2):
        if pair in LINKED_PAIRS:
            continue
        if (pair[0] in EYES or pair[1] in EYES) and pair != eye_pair:
            continue
        for a in Axis:
            if (pair, a) not in prpp_skip:
                out.append((PhraseType.PRPP, pair, a, f"{_display(pair[0])} / {_display(pair[1])}"))

    non_eye = [j for j in range(NUM_JOINTS) if j not in EYES]
    for pair in combinations(non_eye, 2):
        if pair not in LINKED_PAIRS:
            out.append((PhraseType.PDP, pair, None, f"{_display(pair[0])} / {_display(pair[1])}"))

    for name, apex, ea, eb in LAP_CHAINS:
        out.append((PhraseType.LAP, (J[apex], J[ea], J[eb]), None, name))

    lop_skip = set(LOP_EXCLUDED)
    for name, prox, dist in LIMBS:
        for a in Axis:
            if (name, a) not in lop_skip:
                out.append((PhraseType.LOP, (J[prox], J[dist]), a, name))

    for a in Axis:
        out.append((PhraseType.GVP, (0,), a, "body"))
    return out


class PhraseCatalog:
    """Immutable, id-indexed collection of :class:`PhraseDescriptor`."""

    def __init__(self, descriptors: list[PhraseDescriptor]):
        self.descriptors: tuple[PhraseDescriptor, ...] = tuple(descriptors)
        self._by_key = {d.key: d for d in self.descriptors}
        if len(self._by_key) != len(self.descriptors):
            raise ValueError("duplicate phrase descriptors")
        self.by_type: dict[PhraseType, tuple[PhraseDescriptor, ...]] = {
            t: tuple(d for d in self.descriptors if d.ptype == t) for t in PhraseType
        }
        self._mirror = {d.id: self._find_mirror(d) for d in self.descriptors}

    def __len__(self) -> int:
        return len(self.descriptors)

    def __iter__(self):
        return iter(self.descriptors)

    def __getitem__(self, pid: int) -> PhraseDescriptor:
        if isinstance(pid, bool) or not isinstance(pid, int) or not 0 <= pid < len(self.descriptors):
            raise KeyError(f"unknown phrase id {pid!r}")
        return self.descriptors[pid]

    @property
    def total(self) -> int:
        return len(self.descriptors)

    def count(self, ptype: PhraseType) -> int:
        return len(self.by_type[ptype])

    def ids(self, *ptypes: PhraseType) -> list[int]:
        return [d.id for d in self.descriptors if d.ptype in ptypes]

    def lookup(self, ptype: PhraseType, joints: tuple[int, ...], axis: Axis | None = None) -> PhraseDescriptor:
        try:
            return self._by_key[(ptype, tuple(joints), axis)]
        except KeyError:
            raise KeyError(f"no phrase {ptype.name} {joints} {axis}") from None

    def _find_mirror(self, d: PhraseDescriptor) -> tuple[int, int]:
        axis_sign = -1 if d.axis == Axis.RIGHT else 1
        mj = tuple(MIRROR_JOINT[j] for j in d.joints)
        order_sign = 1
        if d.ptype in (PhraseType.PRPP, PhraseType.PDP) and mj[0] > mj[1]:
            mj = (mj[1], mj[0])
            # PDP is symmetric in its pair, PRPP is antisymmetric
            order_sign = -1 if d.ptype == PhraseType.PRPP else 1
        other = self._by_key.get((d.ptype, mj, d.axis))
        if other is None:
            raise ValueError(f"catalog is not mirror-closed at {d}")
        return other.id, axis_sign * order_sign

    def mirror_of(self, pid: int) -> tuple[int, int]:
        """Return ``(mirror_id, sign)`` such that on a mirrored motion the
        mirror phrase shows ``sign`` times the original category."""
        return self._mirror[self[pid].id]

    def export_rows(self) -> list[str]:
        rows = ["id\ttype\tjoints\taxis\tname"]
        for d in self.descriptors:
            joints = ",".join(JOINT_NAMES[j] for j in d.joints)
            axis = d.axis.name.lower() if d.axis is not None else "-"
            rows.append(f"{d.id}\t{d.ptype.name}\t{joints}\t{axis}\t{d.name}")
        return rows

    def export(self, path: str | Path) -> None:
        """Write the descriptor table as tab-separated text."""
        Path(path).write_text("\n".join(self.export_rows()) + "\n", encoding="utf-8")

    def export_per_type(self, directory: str | Path) -> list[Path]:
        """Write one ``<type>.txt`` table per family (pp.txt, prpp.txt, ...)."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        rows = self.export_rows()
        header, body = rows[0], rows[1:]
        paths = []
        for t in PhraseType:
            lines = [header] + [r for r, d in zip(body, self.descriptors) if d.ptype == t]
            p = directory / f"{t.name.lower()}.txt"
            p.write_text("\n".join(lines) + "\n", encoding="utf-8")
            paths.append(p)
        return paths


def _axis_key(a: Axis | None) -> int:
    return -1 if a is None else int(a)


def _name(ptype: PhraseType, label: str, axis: Axis | None) -> str:
    tail = f", {axis.name.lower()}" if axis is not None else ""
    return f"{ptype.name}({label}{tail})"


@lru_cache(maxsize=1)
def build_catalog() -> PhraseCatalog:
    """Construct the 392-phrase catalog (cached; immutable)."""
    cands = sorted(_candidates(), key=lambda c: (c[0], c[1], _axis_key(c[2])))
    descriptors = [
        PhraseDescriptor(id=i, ptype=t, joints=joints, axis=axis, name=_name(t, label, axis), label=label)
        for i, (t, joints, axis, label) in enumerate(cands)
    ]
    catalog = PhraseCatalog(descriptors)
    for t, n in EXPECTED_COUNTS.items():
        if catalog.count(t) != n:
            raise AssertionError(f"{t.name}: expected {n} phrases, built {catalog.count(t)}")
    return catalog


# ---------------------------------------------------------------------------
# text templates

_MOVE = {
    Axis.RIGHT: ("rightwards", "leftwards", "sideways"),
    Axis.UP: ("upwards", "downwards", "vertically"),
    Axis.FORWARD: ("forwards", "backwards", "front-to-back"),
}
_RELATIVE = {
    Axis.RIGHT: ("to the right of", "to the left of", "level with {b} sideways"),
    Axis.UP: ("above", "below", "at the same height as {b}"),
    Axis.FORWARD: ("in front of", "behind", "level with {b} front-to-back"),
}
_POINT = {
    Axis.RIGHT: ("rightwards", "leftwards", "neither left nor right"),
    Axis.UP: ("upwards", "downwards", "neither up nor down"),
    Axis.FORWARD: ("forwards", "backwards", "neither forward nor backward"),
}


def describe(pid: int, category: int, catalog: PhraseCatalog | None = None) -> str:
    """Fixed text for phrase ``pid`` showing ``category``."""
    catalog = catalog or build_catalog()
    d = catalog[pid]
    if category not in (-1, 0, 1):
        raise ValueError(f"category must be -1, 0 or 1, got {category!r}")
    slot = {1: 0, -1: 1, 0: 2}[category]
    t = d.ptype
    if t == PhraseType.PP:
        joint = _display(d.joints[0])
        if category == 0:
            return f"{joint} stays still {_MOVE[d.axis][2]}"
        return f"{joint} moves {_MOVE[d.axis][slot]}"
    if t == PhraseType.PRPP:
        a, b = _display(d.joints[0]), _display(d.joints[1])
        if category == 0:
            return f"{a} is " + _RELATIVE[d.axis][2].format(b=b)
        return f"{a} is {_RELATIVE[d.axis][slot]} {b}"
    if t == PhraseType.PDP:
        a, b = _display(d.joints[0]), _display(d.joints[1])
        return {
            1: f"{a} and {b} move away from each other",
            -1: f"{a} and {b} move closer to each other",
            0: f"{a} and {b} keep their distance",
        }[category]
    if t == PhraseType.LAP:
        return {1: f"{d.label} unbends", -1: f"{d.label} bends", 0: f"{d.label} keeps its bend"}[category]
    if t == PhraseType.LOP:
        return f"{d.label} points {_POINT[d.axis][slot]}"
    # GVP
    if category == 0:
        return f"the body stays still {_MOVE[d.axis][2]}"
    return f"the body moves {_MOVE[d.axis][slot]}"
