"""Templated benchmark prompts built from the phrase catalog.

Atomic and repetitive prompts are enumerated exhaustively; sequential and
simultaneous prompts are sampled without replacement from their eligible
pair pools with a seeded generator, so a suite is reproducible per seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .catalog import PhraseCatalog, PhraseType, build_catalog, describe
from .errors import ConfigError, ParseError

KINDS = ("atomic", "repetitive", "sequential", "simultaneous")
SUITE_COUNTS = {"atomic": 252, "repetitive": 492, "sequential": 3912, "simultaneous": 3120}
DEFAULT_SEED = 2024

ATOMIC_TYPES = (PhraseType.PP, PhraseType.PDP, PhraseType.LAP, PhraseType.GVP)
REPETITIVE_TYPES = (PhraseType.PP, PhraseType.PDP, PhraseType.LAP)
REPETITIONS = {2: "twice", 3: "three times"}

Target = tuple[int, int]


@dataclass(frozen=True)
class Prompt:
    id: str
    kind: str
    text: str
    targets: tuple[Target, ...]
    reps: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown prompt kind {self.kind!r}")
        n = 1 if self.kind in ("atomic", "repetitive") else 2
        if len(self.targets) != n:
            raise ValueError(f"{self.kind} prompt needs {n} target(s), got {len(self.targets)}")
        if any(c == 0 for _, c in self.targets):
            raise ValueError("prompt targets must have a non-zero category")
        if n == 2 and self.targets[0][0] == self.targets[1][0]:
            raise ValueError("two-target prompts need distinct phrases")
        if (self.kind == "repetitive") != (self.reps is not None):
            raise ValueError("repetition count is required for, and only for, repetitive prompts")

    @property
    def pattern(self) -> str:
        return format_pattern(self.kind, self.targets, self.reps)


@dataclass
class PromptSuite:
    prompts: list[Prompt]
    seed: int = DEFAULT_SEED
    counts: dict[str, int] = field(init=False)

    def __post_init__(self):
        self.counts = {k: sum(p.kind == k for p in self.prompts) for k in KINDS}

    def __len__(self) -> int:
        return len(self.prompts)

    def __iter__(self):
        return iter(self.prompts)

    def by_kind(self, kind: str) -> list[Prompt]:
        return [p for p in self.prompts if p.kind == kind]


# ---------------------------------------------------------------------------
# text and pattern rendering

def render_text(kind: str, targets, reps: int | None = None, catalog: PhraseCatalog | None = None) -> str:
    catalog = catalog or build_catalog()
    parts = [describe(pid, cat, catalog) for pid, cat in targets]
    if kind == "atomic":
        return parts[0]
    if kind == "repetitive":
        return f"{parts[0]} {REPETITIONS[reps]}"
    if kind == "sequential":
        return f"{parts[0]}, then {parts[1]}"
    if kind == "simultaneous":
        return f"{parts[0]}, and simultaneously, {parts[1]}"
    raise ValueError(f"unknown prompt kind {kind!r}")


def _fmt_target(t: Target) -> str:
    return f"{t[0]}:{t[1]:+d}"


def format_pattern(kind: str, targets, reps: int | None = None) -> str:
    """Compact pattern: ``12:+1``, ``12:+1*2``, ``12:+1>40:-1``, ``12:+1&40:-1``."""
    if kind == "atomic":
        return _fmt_target(targets[0])
    if kind == "repetitive":
        return f"{_fmt_target(targets[0])}*{reps}"
    sep = ">" if kind == "sequential" else "&"
    return sep.join(_fmt_target(t) for t in targets)


def _parse_target(tok: str) -> Target:
    pid, cat = tok.split(":")
    return int(pid), int(cat)


def parse_pattern(kind: str, pattern: str) -> tuple[tuple[Target, ...], int | None]:
    try:
        if kind == "atomic":
            return (_parse_target(pattern),), None
        if kind == "repetitive":
            tok, reps = pattern.split("*")
            return (_parse_target(tok),), int(reps)
        sep = ">" if kind == "sequential" else "&"
        a, b = pattern.split(sep)
        return (_parse_target(a), _parse_target(b)), None
    except ValueError:
        raise ParseError(f"bad {kind} pattern {pattern!r}") from None


# ---------------------------------------------------------------------------
# generation

def atomic_targets(catalog: PhraseCatalog | None = None) -> list[Target]:
    """Every (phrase, non-zero category) of the dynamic families, by id then category."""
    catalog = catalog or build_catalog()
    return [(pid, c) for pid in catalog.ids(*ATOMIC_TYPES) for c in (-1, 1)]


def gen_atomic(catalog: PhraseCatalog | None = None) -> list[Prompt]:
    catalog = catalog or build_catalog()
    out = []
    for i, t in enumerate(atomic_targets(catalog)):
        out.append(Prompt(f"atomic-{i:04d}", "atomic", render_text("atomic", (t,), None, catalog), (t,)))
    return out


def gen_repetitive(catalog: PhraseCatalog | None = None) -> list[Prompt]:
    catalog = catalog or build_catalog()
    out = []
    for pid in catalog.ids(*REPETITIVE_TYPES):
        for c in (-1, 1):
            for reps in REPETITIONS:
                t = ((pid, c),)
                text = render_text("repetitive", t, reps, catalog)
                out.append(Prompt(f"repetitive-{len(out):04d}", "repetitive", text, t, reps))
    return out


def sequential_pool(catalog: PhraseCatalog | None = None) -> list[tuple[Target, Target]]:
    """Ordered pairs of atomic targets on distinct phrases."""
    ts = atomic_targets(catalog)
    return [(a, b) for a in ts for b in ts if a[0] != b[0]]


def mutually_exclusive(a: Target, b: Target) -> bool:
    """True when two targets can never hold at the same frame."""
    # catalog keys are unique, so only one phrase with two signs conflicts
    return a[0] == b[0] and a[1] != b[1]


def simultaneous_pool(catalog: PhraseCatalog | None = None) -> list[tuple[Target, Target]]:
    """Unordered pairs of compatible atomic targets on distinct phrases."""
    catalog = catalog or build_catalog()
    ts = atomic_targets(catalog)
    out = []
    for i, a in enumerate(ts):
        for b in ts[i + 1:]:
            if a[0] != b[0] and not mutually_exclusive(a, b):
                out.append((a, b))
    return out


def _sample(pool: list, n: int, rng: np.random.Generator) -> list:
    if n > len(pool):
        raise ConfigError(f"cannot sample {n} prompts from a pool of {len(pool)}")
    idx = np.sort(rng.choice(len(pool), size=n, replace=False))
    return [pool[i] for i in idx]


def gen_sequential(catalog: PhraseCatalog | None = None, seed: int = DEFAULT_SEED, n: int = SUITE_COUNTS["sequential"]) -> list[Prompt]:
    catalog = catalog or build_catalog()
    rng = np.random.default_rng([seed, 1])
    out = []
    for i, pair in enumerate(_sample(sequential_pool(catalog), n, rng)):
        out.append(Prompt(f"sequential-{i:04d}", "sequential", render_text("sequential", pair, None, catalog), pair))
    return out


def gen_simultaneous(catalog: PhraseCatalog | None = None, seed: int = DEFAULT_SEED, n: int = SUITE_COUNTS["simultaneous"]) -> list[Prompt]:
    catalog = catalog or build_catalog()
    rng = np.random.default_rng([seed, 2])
    out = []
    for i, pair in enumerate(_sample(simultaneous_pool(catalog), n, rng)):
        out.append(Prompt(f"simultaneous-{i:04d}", "simultaneous", render_text("simultaneous", pair, None, catalog), pair))
    return out


def generate_suite(catalog: PhraseCatalog | None = None, seed: int = DEFAULT_SEED) -> PromptSuite:
    catalog = catalog or build_catalog()
    prompts = gen_atomic(catalog) + gen_repetitive(catalog) + gen_sequential(catalog, seed) + gen_simultaneous(catalog, seed)
    return PromptSuite(prompts=prompts, seed=seed)


# ---------------------------------------------------------------------------
# suite files

def format_suite(suite: PromptSuite) -> str:
    """Tab-separated rows ``id, kind, text, pattern``; no header."""
    return "".join(f"{p.id}\t{p.kind}\t{p.text}\t{p.pattern}\n" for p in suite.prompts)


def write_suite(suite: PromptSuite, path: str | Path) -> None:
    Path(path).write_text(format_suite(suite), encoding="utf-8")


def read_suite(path: str | Path, seed: int = DEFAULT_SEED) -> PromptSuite:
    path = Path(path)
    prompts = []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) != 4:
            raise ParseError(f"{path}: line {lineno}: expected 4 tab-separated fields, got {len(cols)}")
        pid, kind, text, pattern = cols
        try:
            targets, reps = parse_pattern(kind, pattern)
            prompts.append(Prompt(pid, kind, text, targets, reps))
        except (ParseError, ValueError) as exc:
            raise ParseError(f"{path}: line {lineno}: {exc}") from None
    return PromptSuite(prompts=prompts, seed=seed)
