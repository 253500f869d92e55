"""White-box hit protocols over categorical phrase sequences."""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .catalog import PhraseCatalog, build_catalog
from .errors import ConfigError
from .extract import DEFAULT_THRESHOLD, PhraseSequence, extract, find_runs
from .prompts import KINDS, Prompt, PromptSuite
from .skeleton import SkeletonSequence

# (phrase id, category, start, end)
Run = tuple[int, int, int, int]


@dataclass(frozen=True)
class EvalConfig:
    """Run-length constants; frame counts at the motion's native rate."""

    min_run_atomic: int = 6
    min_run: int = 5
    threshold: float = DEFAULT_THRESHOLD

    def __post_init__(self):
        if self.min_run_atomic < 1 or self.min_run < 1:
            raise ConfigError("minimum run lengths must be >= 1")
        if not self.threshold > 0:
            raise ConfigError("threshold must be positive")


@dataclass(frozen=True)
class HitVerdict:
    prompt_id: str
    hit: bool
    evidence: tuple[Run, ...] = ()


@dataclass
class EvalReport:
    accuracy: dict[str, float | None]
    overall: float | None
    verdicts: list[HitVerdict]
    counts: dict[str, int]
    hits: dict[str, int]
    motion_count: int
    skipped: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "overall": self.overall,
            "counts": self.counts,
            "hits": self.hits,
            "motion_count": self.motion_count,
            "skipped": self.skipped,
        }


def _check(prompt: Prompt, ps: PhraseSequence, kind: str) -> None:
    if prompt.kind != kind:
        raise ConfigError(f"prompt {prompt.id} is {prompt.kind}, not {kind}")
    num = ps.categories.shape[1]
    for pid, _ in prompt.targets:
        if not 0 <= pid < num:
            raise ConfigError(f"prompt {prompt.id}: phrase id {pid} not in catalog")


def _qualifying(ps: PhraseSequence, target, min_len: int) -> list[Run]:
    pid, cat = target
    return [(pid, cat, s, e) for s, e in find_runs(ps.column(pid), category=cat) if e - s >= min_len]


def eval_atomic(prompt: Prompt, ps: PhraseSequence, config: EvalConfig = EvalConfig()) -> HitVerdict:
    _check(prompt, ps, "atomic")
    runs = _qualifying(ps, prompt.targets[0], config.min_run_atomic)
    return HitVerdict(prompt.id, bool(runs), tuple(runs))


def eval_repetitive(prompt: Prompt, ps: PhraseSequence, config: EvalConfig = EvalConfig()) -> HitVerdict:
    """Hit iff the number of qualifying maximal runs equals the repetition count."""
    _check(prompt, ps, "repetitive")
    runs = _qualifying(ps, prompt.targets[0], config.min_run)
    hit = len(runs) == prompt.reps
    return HitVerdict(prompt.id, hit, tuple(runs) if hit else ())


def eval_sequential(prompt: Prompt, ps: PhraseSequence, config: EvalConfig = EvalConfig()) -> HitVerdict:
    """Hit iff a qualifying run of the first target ends no later than one of the second starts."""
    _check(prompt, ps, "sequential")
    first = _qualifying(ps, prompt.targets[0], config.min_run)
    second = _qualifying(ps, prompt.targets[1], config.min_run)
    if not first or not second:
        return HitVerdict(prompt.id, False)
    r1 = min(first, key=lambda r: r[3])
    r2 = max(second, key=lambda r: r[2])
    if r1[3] <= r2[2]:
        return HitVerdict(prompt.id, True, (r1, r2))
    return HitVerdict(prompt.id, False)


def eval_simultaneous(prompt: Prompt, ps: PhraseSequence, config: EvalConfig = EvalConfig()) -> HitVerdict:
    """Hit iff both targets hold together for ``min_run`` consecutive frames."""
    _check(prompt, ps, "simultaneous")
    (p1, c1), (p2, c2) = prompt.targets
    both = (ps.column(p1) == c1) & (ps.column(p2) == c2)
    windows = [(s, e) for s, e in find_runs(both.astype(np.int8), category=1) if e - s >= config.min_run]
    if not windows:
        return HitVerdict(prompt.id, False)
    evidence = []
    for s, e in windows:
        evidence.append((p1, c1, s, e))
        evidence.append((p2, c2, s, e))
    return HitVerdict(prompt.id, True, tuple(evidence))


PROTOCOLS = {
    "atomic": eval_atomic,
    "repetitive": eval_repetitive,
    "sequential": eval_sequential,
    "simultaneous": eval_simultaneous,
}


def eval_prompt(prompt: Prompt, ps: PhraseSequence, config: EvalConfig = EvalConfig()) -> HitVerdict:
    return PROTOCOLS[prompt.kind](prompt, ps, config)


def _extract_categories(args):
    seq, catalog, threshold = args
    return extract(seq, catalog, threshold).categories


def evaluate_suite(
    suite: PromptSuite | list[Prompt],
    motions: dict[str, SkeletonSequence],
    catalog: PhraseCatalog | None = None,
    config: EvalConfig = EvalConfig(),
    jobs: int = 1,
) -> EvalReport:
    """Extract phrases from each prompt's motion and aggregate hit accuracy.

    Prompts without a motion are listed in ``skipped`` and left out of every
    denominator.
    """
    catalog = catalog or build_catalog()
    prompts = list(suite)
    todo = [p for p in prompts if p.id in motions]
    skipped = [p.id for p in prompts if p.id not in motions]

    # one extraction per distinct motion object
    unique: dict[int, SkeletonSequence] = {}
    for p in todo:
        unique.setdefault(id(motions[p.id]), motions[p.id])
    keys = list(unique)
    if jobs > 1 and len(keys) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            cats = list(pool.map(_extract_categories, [(unique[k], catalog, config.threshold) for k in keys], chunksize=16))
        extracted = {k: PhraseSequence(c, unique[k].id) for k, c in zip(keys, cats)}
    else:
        extracted = {k: extract(unique[k], catalog, config.threshold) for k in keys}

    verdicts = [eval_prompt(p, extracted[id(motions[p.id])], config) for p in todo]
    counts = {k: 0 for k in KINDS}
    hits = {k: 0 for k in KINDS}
    for p, v in zip(todo, verdicts):
        counts[p.kind] += 1
        hits[p.kind] += int(v.hit)
    accuracy = {k: (hits[k] / counts[k] if counts[k] else None) for k in KINDS}
    total = sum(counts.values())
    overall = sum(hits.values()) / total if total else None
    return EvalReport(
        accuracy=accuracy,
        overall=overall,
        verdicts=verdicts,
        counts=counts,
        hits=hits,
        motion_count=len(unique),
        skipped=skipped,
    )


# ---------------------------------------------------------------------------
# report files

def _pct(x: float | None) -> str:
    return "n/a" if x is None else f"{100.0 * x:.2f}"


def format_report(report: EvalReport) -> str:
    header = ["Atomic", "Repetitive", "Sequential", "Simultaneous", "Overall"]
    values = [_pct(report.accuracy[k]) for k in KINDS] + [_pct(report.overall)]
    widths = [max(len(h), len(v)) for h, v in zip(header, values)]
    lines = [
        "Accuracy (%)",
        " | ".join(h.ljust(w) for h, w in zip(header, widths)),
        " | ".join(v.ljust(w) for v, w in zip(values, widths)),
        "",
        "prompts evaluated: "
        + ", ".join(f"{k}={report.counts[k]}" for k in KINDS)
        + f", total={sum(report.counts.values())}",
        "hits: " + ", ".join(f"{k}={report.hits[k]}" for k in KINDS) + f", total={sum(report.hits.values())}",
        f"motions: {report.motion_count}",
        f"skipped (no motion): {len(report.skipped)}",
    ]
    if report.skipped:
        by_kind = {k: sum(pid.startswith(k + "-") for pid in report.skipped) for k in KINDS}
        other = len(report.skipped) - sum(by_kind.values())
        parts = [f"{k}={n}" for k, n in by_kind.items() if n] + ([f"other={other}"] if other else [])
        lines.append("  " + ", ".join(parts))
    return "\n".join(lines) + "\n"


def write_verdicts(report: EvalReport, path: str | Path) -> None:
    """JSON-lines verdict log with run evidence."""
    with open(path, "w", encoding="utf-8") as fh:
        for v in report.verdicts:
            ev = [dict(zip(("phrase", "category", "start", "end"), r)) for r in v.evidence]
            fh.write(json.dumps({"prompt": v.prompt_id, "hit": v.hit, "evidence": ev}) + "\n")
