"""Indicator computation and sign categorization for all 392 phrases."""

from __future__ import annotations

import weakref
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .catalog import PhraseCatalog, PhraseType, build_catalog
from .errors import DegenerateLimbError, SchemaError
from .skeleton import PELVIS, ReferenceFrameSeries, SkeletonSequence, compute_reference_frames

DEFAULT_THRESHOLD = 1e-4


@dataclass(frozen=True)
class IndicatorSequence:
    values: np.ndarray  # (T, P) float64
    source: str = ""


@dataclass(frozen=True)
class PhraseSequence:
    """Categorical phrase matrix, ``(T, P)`` int8 over {-1, 0, 1}."""

    categories: np.ndarray
    source: str = ""

    @property
    def num_frames(self) -> int:
        return self.categories.shape[0]

    def column(self, pid: int) -> np.ndarray:
        return self.categories[:, pid]


# ---------------------------------------------------------------------------
# per-family indicators

def _frames_and_axes(seq, ref):
    frames = seq.frames if isinstance(seq, SkeletonSequence) else np.asarray(seq, dtype=float)
    if ref is None:
        ref = compute_reference_frames(frames)
    return frames, ref.axes


def _delta(state: np.ndarray) -> np.ndarray:
    out = np.zeros_like(state)
    out[1:] = state[1:] - state[:-1]
    return out


def pp_indicator(seq, joint: int, axis: int, ref: ReferenceFrameSeries | None = None) -> np.ndarray:
    """Frame-to-frame change of the pelvis-relative joint position along an axis."""
    frames, axes = _frames_and_axes(seq, ref)
    rel = frames[:, joint] - frames[:, PELVIS]
    return _delta(np.einsum("ti,ti->t", rel, axes[:, axis]))


def prpp_indicator(seq, j: int, k: int, axis: int, ref: ReferenceFrameSeries | None = None) -> np.ndarray:
    frames, axes = _frames_and_axes(seq, ref)
    return np.einsum("ti,ti->t", frames[:, j] - frames[:, k], axes[:, axis])


def pdp_indicator(seq, j: int, k: int) -> np.ndarray:
    frames = seq.frames if isinstance(seq, SkeletonSequence) else np.asarray(seq, dtype=float)
    return _delta(np.linalg.norm(frames[:, j] - frames[:, k], axis=-1))


def chain_angles(frames: np.ndarray, apex, end_a, end_b) -> np.ndarray:
    """Angle at ``apex`` between the two limb vectors, shape ``(T, C)``.

    Index arguments are ints or equal-length integer arrays of C chains.
    """
    apex, end_a, end_b = np.atleast_1d(apex), np.atleast_1d(end_a), np.atleast_1d(end_b)
    u = frames[:, end_a] - frames[:, apex]
    v = frames[:, end_b] - frames[:, apex]
    nu = np.linalg.norm(u, axis=-1)
    nv = np.linalg.norm(v, axis=-1)
    bad = (nu < 1e-12) | (nv < 1e-12)
    if np.any(bad):
        t, c = np.argwhere(bad)[0]
        raise DegenerateLimbError(int(t), (int(apex[c]), int(end_a[c]), int(end_b[c])))
    cos = np.einsum("tci,tci->tc", u, v) / (nu * nv)
    return np.arccos(np.clip(cos, -1.0, 1.0))


def lap_indicator(seq, apex: int, end_a: int, end_b: int) -> np.ndarray:
    """Frame-to-frame change of the bend angle at ``apex`` (radians)."""
    frames = seq.frames if isinstance(seq, SkeletonSequence) else np.asarray(seq, dtype=float)
    return _delta(chain_angles(frames, apex, end_a, end_b)[:, 0])


def lop_indicator(seq, proximal: int, distal: int, axis: int, ref: ReferenceFrameSeries | None = None) -> np.ndarray:
    frames, axes = _frames_and_axes(seq, ref)
    return np.einsum("ti,ti->t", frames[:, distal] - frames[:, proximal], axes[:, axis])


def gvp_indicator(seq, axis: int, ref: ReferenceFrameSeries | None = None) -> np.ndarray:
    """Pelvis displacement to the next frame along the current axis; 0 at the last frame."""
    frames, axes = _frames_and_axes(seq, ref)
    out = np.zeros(frames.shape[0])
    step = frames[1:, PELVIS] - frames[:-1, PELVIS]
    out[:-1] = np.einsum("ti,ti->t", step, axes[:-1, axis])
    return out


# ---------------------------------------------------------------------------
# vectorized extraction

class _Plan:
    """Index arrays gathering every family in one pass."""

    def __init__(self, catalog: PhraseCatalog):
        self.num = catalog.total

        def arr(ptype, fn):
            ds = catalog.by_type[ptype]
            return np.array([d.id for d in ds], dtype=int), np.array([fn(d) for d in ds], dtype=int)

        self.pp_ids, pp = arr(PhraseType.PP, lambda d: (d.joints[0], d.axis))
        self.pp_joint, self.pp_axis = pp.T
        self.prpp_ids, prpp = arr(PhraseType.PRPP, lambda d: (*d.joints, d.axis))
        self.prpp_j, self.prpp_k, self.prpp_axis = prpp.T
        self.pdp_ids, pdp = arr(PhraseType.PDP, lambda d: d.joints)
        self.pdp_j, self.pdp_k = pdp.T
        self.lap_ids, lap = arr(PhraseType.LAP, lambda d: d.joints)
        self.lap_apex, self.lap_a, self.lap_b = lap.T
        self.lop_ids, lop = arr(PhraseType.LOP, lambda d: (*d.joints, d.axis))
        self.lop_prox, self.lop_dist, self.lop_axis = lop.T
        self.gvp_ids, gvp = arr(PhraseType.GVP, lambda d: (d.axis,))
        self.gvp_axis = gvp[:, 0]


_PLANS: "weakref.WeakKeyDictionary[PhraseCatalog, _Plan]" = weakref.WeakKeyDictionary()


def _plan(catalog: PhraseCatalog) -> _Plan:
    plan = _PLANS.get(catalog)
    if plan is None:
        plan = _PLANS[catalog] = _Plan(catalog)
    return plan


def compute_indicators(
    seq: SkeletonSequence, catalog: PhraseCatalog | None = None, ref: ReferenceFrameSeries | None = None
) -> IndicatorSequence:
    """Raw indicator values for every phrase, shape ``(T, 392)``."""
    catalog = catalog or build_catalog()
    p = _plan(catalog)
    frames = seq.frames
    axes = compute_reference_frames(frames).axes if ref is None else ref.axes
    T = frames.shape[0]
    out = np.empty((T, p.num))

    rel = frames[:, p.pp_joint] - frames[:, PELVIS][:, None]
    out[:, p.pp_ids] = _delta(np.einsum("tpi,tpi->tp", rel, axes[:, p.pp_axis]))

    diff = frames[:, p.prpp_j] - frames[:, p.prpp_k]
    out[:, p.prpp_ids] = np.einsum("tpi,tpi->tp", diff, axes[:, p.prpp_axis])

    dist = np.linalg.norm(frames[:, p.pdp_j] - frames[:, p.pdp_k], axis=-1)
    out[:, p.pdp_ids] = _delta(dist)

    try:
        theta = chain_angles(frames, p.lap_apex, p.lap_a, p.lap_b)
    except DegenerateLimbError as exc:
        c = next(i for i, d in enumerate(catalog.by_type[PhraseType.LAP]) if d.joints == exc.chain)
        raise DegenerateLimbError(exc.frame, exc.chain, int(p.lap_ids[c])) from None
    out[:, p.lap_ids] = _delta(theta)

    limb = frames[:, p.lop_dist] - frames[:, p.lop_prox]
    out[:, p.lop_ids] = np.einsum("tpi,tpi->tp", limb, axes[:, p.lop_axis])

    step = np.zeros((T, 3))
    step[:-1] = frames[1:, PELVIS] - frames[:-1, PELVIS]
    out[:, p.gvp_ids] = np.einsum("ti,tai->ta", step, axes[:, p.gvp_axis])

    return IndicatorSequence(values=out, source=seq.id)


def categorize(values: np.ndarray, threshold: float = DEFAULT_THRESHOLD) -> np.ndarray:
    """Sign of each indicator, with ``|value| < threshold`` mapped to 0."""
    if not threshold > 0:
        raise ValueError("threshold must be positive")
    cats = np.sign(values).astype(np.int8)
    cats[np.abs(values) < threshold] = 0
    return cats


def extract(
    seq: SkeletonSequence,
    catalog: PhraseCatalog | None = None,
    threshold: float = DEFAULT_THRESHOLD,
    return_indicators: bool = False,
):
    """Categorical phrase sequence for a gravity-aligned skeleton sequence."""
    ind = compute_indicators(seq, catalog)
    ps = PhraseSequence(categories=categorize(ind.values, threshold), source=seq.id)
    if return_indicators:
        return ps, ind
    return ps


# ---------------------------------------------------------------------------
# runs

def find_runs(column: np.ndarray | PhraseSequence, pid: int | None = None, category: int = 1) -> list[tuple[int, int]]:
    """Maximal half-open ``(start, end)`` intervals where the column equals ``category``.

    Accepts either a 1-D column or a :class:`PhraseSequence` plus a phrase id.
    """
    if isinstance(column, PhraseSequence):
        if pid is None:
            raise ValueError("phrase id required when passing a PhraseSequence")
        column = column.column(pid)
    mask = np.asarray(column) == category
    if not mask.any():
        return []
    padded = np.concatenate(([False], mask, [False])).astype(np.int8)
    edges = np.diff(padded)
    starts = np.flatnonzero(edges == 1)
    ends = np.flatnonzero(edges == -1)
    return [(int(s), int(e)) for s, e in zip(starts, ends)]


# ---------------------------------------------------------------------------
# text output

def format_phrase_sequence(ps: PhraseSequence) -> str:
    """One tab-separated row per frame, one signed digit per phrase."""
    lines = ["\t".join(str(int(v)) for v in row) for row in ps.categories]
    return "\n".join(lines) + "\n"


def write_phrase_sequence(ps: PhraseSequence, path: str | Path) -> None:
    Path(path).write_text(format_phrase_sequence(ps), encoding="utf-8")


def read_phrase_sequence(path: str | Path, num_phrases: int | None = None) -> PhraseSequence:
    path = Path(path)
    rows = []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            row = [int(tok) for tok in line.split("\t")]
        except ValueError:
            raise SchemaError(f"{path}: line {lineno}: non-integer category") from None
        if any(v not in (-1, 0, 1) for v in row):
            raise SchemaError(f"{path}: line {lineno}: categories must be -1, 0 or 1")
        if num_phrases is not None and len(row) != num_phrases:
            raise SchemaError(f"{path}: line {lineno}: expected {num_phrases} columns, got {len(row)}")
        rows.append(row)
    if rows and len({len(r) for r in rows}) != 1:
        raise SchemaError(f"{path}: ragged rows")
    return PhraseSequence(categories=np.array(rows, dtype=np.int8).reshape(len(rows), -1), source=path.stem)


def write_indicators(ind: IndicatorSequence, path: str | Path) -> None:
    lines = ["\t".join(repr(float(v)) for v in row) for row in ind.values]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
