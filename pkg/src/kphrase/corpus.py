"""Knowledge-base construction from a motion manifest, plus corpus statistics.

A manifest is a tab-separated text file, one entry per line::

    path<TAB>tag[<TAB>text]

Blank lines and lines starting with ``#`` are ignored. Relative paths are
resolved against the manifest's directory. Building a KB normalizes every
entry (resample, gravity-align), extracts its phrase sequence and writes::

    <kb>/sequences/<name>.json   normalized native sequence
    <kb>/kp/<name>.tsv           T rows x 392 categories
    <kb>/index.json              one record per manifest entry, in order

Entries that fail to load or extract are recorded in the index with a reason
and do not stop the build.
"""

from __future__ import annotations

import json
import logging
import re
import string
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .catalog import PhraseType, build_catalog
from .errors import ConfigError, IntegrityError, KPError, ParseError
from .extract import DEFAULT_THRESHOLD, extract, format_phrase_sequence, read_phrase_sequence
from .skeleton import dumps_sequence, load_sequence, normalize

log = logging.getLogger(__name__)

INDEX_NAME = "index.json"
CATEGORIES = (-1, 0, 1)


@dataclass(frozen=True)
class ManifestEntry:
    path: str
    tag: str
    text: str | None = None


@dataclass(frozen=True)
class CorpusManifest:
    entries: tuple[ManifestEntry, ...]
    root: str = "."
    target_fps: float = 30.0
    gravity: tuple[float, float, float] = (0.0, 0.0, -1.0)

    def __post_init__(self):
        if not self.target_fps > 0:
            raise ConfigError("target fps must be positive")
        seen = set()
        for e in self.entries:
            if e.path in seen:
                raise ConfigError(f"duplicate manifest path {e.path!r}")
            seen.add(e.path)

    def resolve(self, entry: ManifestEntry) -> Path:
        p = Path(entry.path)
        return p if p.is_absolute() else Path(self.root) / p


def read_manifest(path: str | Path, target_fps: float = 30.0, gravity=(0.0, 0.0, -1.0)) -> CorpusManifest:
    path = Path(path)
    entries = []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) not in (2, 3) or not cols[0]:
            raise ParseError(f"{path}: line {lineno}: expected 'path<TAB>tag[<TAB>text]'")
        text = cols[2] if len(cols) == 3 and cols[2] else None
        entries.append(ManifestEntry(cols[0], cols[1], text))
    return CorpusManifest(tuple(entries), root=str(path.parent), target_fps=target_fps, gravity=tuple(gravity))


def _entry_name(i: int, entry: ManifestEntry) -> str:
    stem = re.sub(r"[^A-Za-z0-9_.-]+", "_", Path(entry.path).stem) or "motion"
    return f"{i:06d}_{stem}"


def _process(job) -> dict:
    i, entry, src, out_dir, target_fps, gravity, threshold = job
    record = {"index": i, "path": entry.path, "tag": entry.tag, "text": entry.text}
    try:
        seq = load_sequence(src)
        seq = normalize(seq, target_fps, gravity)
        name = _entry_name(i, entry)
        text = entry.text if entry.text is not None else seq.text
        seq = seq.with_frames(seq.frames, id=seq.id or name, text=text)
        ps = extract(seq, build_catalog(), threshold)
    except (KPError, ValueError, OSError) as exc:
        record.update(status="error", error=f"{type(exc).__name__}: {exc}")
        return record
    seq_rel = f"sequences/{name}.json"
    kp_rel = f"kp/{name}.tsv"
    (out_dir / seq_rel).write_text(dumps_sequence(seq), encoding="utf-8")
    (out_dir / kp_rel).write_text(format_phrase_sequence(ps), encoding="utf-8")
    record.update(text=text, status="ok", frames=seq.num_frames, sequence=seq_rel, kp=kp_rel)
    return record


def build_kb(
    manifest: CorpusManifest,
    out_dir: str | Path,
    threshold: float = DEFAULT_THRESHOLD,
    jobs: int = 1,
) -> list[dict]:
    """Normalize and extract every entry; returns the index records."""
    out_dir = Path(out_dir)
    (out_dir / "sequences").mkdir(parents=True, exist_ok=True)
    (out_dir / "kp").mkdir(parents=True, exist_ok=True)
    work = [
        (i, e, manifest.resolve(e), out_dir, manifest.target_fps, manifest.gravity, threshold)
        for i, e in enumerate(manifest.entries)
    ]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_process, work))
    else:
        records = [_process(w) for w in work]
    for r in records:
        if r["status"] != "ok":
            log.warning("entry %d (%s) failed: %s", r["index"], r["path"], r["error"])
    doc = {"target_fps": manifest.target_fps, "threshold": threshold, "entries": records}
    (out_dir / INDEX_NAME).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    return records


def read_index(kb_dir: str | Path) -> dict:
    path = Path(kb_dir) / INDEX_NAME
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise IntegrityError(f"{path}: KB index not found") from None
    except json.JSONDecodeError as exc:
        raise IntegrityError(f"{path}: corrupt index ({exc.msg})") from None
    if not isinstance(doc, dict) or not isinstance(doc.get("entries"), list):
        raise IntegrityError(f"{path}: index has no entry list")
    return doc


# ---------------------------------------------------------------------------
# statistics

_PUNCT = str.maketrans({c: " " for c in string.punctuation})


def tokenize(text: str) -> list[str]:
    """Lowercase whitespace tokens with ASCII punctuation removed."""
    return text.lower().translate(_PUNCT).split()


@dataclass
class CorpusStats:
    sequences: int
    failed: int
    total_frames: int
    distinct_texts: int
    vocabulary_size: int
    histogram: np.ndarray  # (392, 3) counts for categories -1, 0, +1
    per_tag: dict[str, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "sequences": self.sequences,
            "failed": self.failed,
            "total_frames": self.total_frames,
            "distinct_texts": self.distinct_texts,
            "vocabulary_size": self.vocabulary_size,
            "per_tag": self.per_tag,
            "histogram": self.histogram.tolist(),
        }


def compute_stats(kb_dir: str | Path) -> CorpusStats:
    kb_dir = Path(kb_dir)
    doc = read_index(kb_dir)
    catalog = build_catalog()
    hist = np.zeros((catalog.total, 3), dtype=np.int64)
    frames = 0
    texts, vocab = set(), set()
    per_tag: dict[str, int] = {}
    ok = [r for r in doc["entries"] if r.get("status") == "ok"]
    for r in ok:
        kp_path = kb_dir / r["kp"]
        if not kp_path.is_file():
            raise IntegrityError(f"{kp_path}: KP file listed in the index is missing")
        cats = read_phrase_sequence(kp_path, catalog.total).categories
        if cats.shape[0] != r.get("frames"):
            raise IntegrityError(f"{kp_path}: {cats.shape[0]} rows but the index says {r.get('frames')}")
        for col, c in enumerate(CATEGORIES):
            hist[:, col] += (cats == c).sum(axis=0)
        frames += cats.shape[0]
        per_tag[r["tag"]] = per_tag.get(r["tag"], 0) + 1
        if r.get("text"):
            texts.add(r["text"])
            vocab.update(tokenize(r["text"]))
    return CorpusStats(
        sequences=len(ok),
        failed=len(doc["entries"]) - len(ok),
        total_frames=frames,
        distinct_texts=len(texts),
        vocabulary_size=len(vocab),
        histogram=hist,
        per_tag=dict(sorted(per_tag.items())),
    )


def format_stats(stats: CorpusStats) -> str:
    catalog = build_catalog()
    lines = [
        "Kinematic phrase base statistics",
        f"sequences        {stats.sequences}",
        f"failed entries   {stats.failed}",
        f"total frames     {stats.total_frames}",
        f"distinct texts   {stats.distinct_texts}",
        f"vocabulary size  {stats.vocabulary_size}",
    ]
    for tag, n in stats.per_tag.items():
        lines.append(f"  tag {tag}: {n}")
    lines += ["", "family  phrases      -1 (%)       0 (%)      +1 (%)"]
    for ptype in PhraseType:
        ids = catalog.ids(ptype)
        counts = stats.histogram[ids].sum(axis=0)
        total = counts.sum()
        pct = counts / total * 100.0 if total else np.zeros(3)
        lines.append(f"{ptype.name:<7} {len(ids):>7} " + " ".join(f"{p:>11.2f}" for p in pct))
    return "\n".join(lines) + "\n"


def write_stats(stats: CorpusStats, out_dir: str | Path) -> tuple[Path, Path]:
    """Write ``stats.txt`` (table) and ``stats.json`` (full summary)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    txt, js = out_dir / "stats.txt", out_dir / "stats.json"
    txt.write_text(format_stats(stats), encoding="utf-8")
    js.write_text(json.dumps(stats.to_dict(), indent=1) + "\n", encoding="utf-8")
    return txt, js
