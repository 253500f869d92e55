"""``kphrase`` command-line entry point.

Exit status: 0 on success, 1 on usage or validation errors, 2 on I/O errors.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__
from .catalog import build_catalog, describe
from .config import CONFIG_ENV, Config, load_config
from .corpus import build_kb, compute_stats, format_stats, read_manifest, write_stats
from .errors import ConfigError, IntegrityError, KPError
from .evaluate import evaluate_suite, format_report, write_verdicts
from .extract import compute_indicators, extract, write_indicators, write_phrase_sequence
from .prompts import KINDS, generate_suite, read_suite, write_suite
from .skeleton import load_sequence, normalize, save_sequence
from .synth import SynthSpec, synthesize

log = logging.getLogger("kphrase")

MOTION_FORMAT = """\
motion file (native JSON):
  {"id": str, "fps": number, "joint_names": [17 names in canonical order],
   "frames": [[[x, y, z] x 17] x T], "text": optional str}
  coordinates in meters; gravity along -z unless --gravity says otherwise"""

KP_FORMAT = """\
phrase file (TSV): one row per frame, 392 tab-separated columns of -1/0/1,
  column i is phrase id i (see catalog-export); no header"""

SUITE_FORMAT = """\
suite file (TSV, no header): id, kind, text, pattern
  patterns: atomic 12:+1 | repetitive 12:+1*2 | sequential 12:+1>40:-1 |
  simultaneous 12:+1&40:-1 (phrase id:category)"""

MOTIONS_MANIFEST_FORMAT = """\
motion manifest (TSV, no header): prompt_id, path
  relative paths are resolved against the manifest's directory"""

CORPUS_MANIFEST_FORMAT = """\
corpus manifest (TSV, no header): path, tag[, text]
  '#' comment lines and blank lines are ignored"""

CONFIG_FORMAT = f"""\
config file (JSON object) with any of: threshold, min_run_atomic, min_run,
  seed, target_fps, output_dir, jobs. Default path from ${CONFIG_ENV}.
  Command-line flags override the file."""


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with status 1 instead of argparse's 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("shared options")
    g.add_argument("--config", help=f"JSON config file (default: ${CONFIG_ENV} if set)")
    g.add_argument("--seed", type=int, help="prompt sampling seed (default 2024)")
    g.add_argument("--fps", type=float, help="target frame rate for normalization and synthesis (default 30)")
    g.add_argument("--threshold", type=float, help="indicator dead-zone; |value| below it is category 0 (default 1e-4)")
    g.add_argument("--min-run-atomic", type=int, help="frames an atomic target must hold (default 6)")
    g.add_argument("--min-run", type=int, help="frames other targets must hold (default 5)")
    g.add_argument("-o", "--output", help="output file or directory (see subcommand)")
    g.add_argument("--jobs", type=int, help="worker processes (default 1)")
    g.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    return p


def _gravity(text: str) -> tuple[float, float, float]:
    try:
        parts = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("expected three comma-separated numbers") from None
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected three comma-separated numbers")
    return parts


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    fmt = argparse.RawDescriptionHelpFormatter
    parser = _Parser(
        prog="kphrase",
        description="Kinematic phrase extraction, prompt generation and white-box evaluation.",
        epilog=CONFIG_FORMAT,
        formatter_class=fmt,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    def add(name, help, epilog):
        return sub.add_parser(name, help=help, description=help, epilog=epilog + "\n\n" + CONFIG_FORMAT,
                              parents=[common], formatter_class=fmt)

    p = add("extract", "Extract the 392-phrase categorical matrix from a motion file.",
            MOTION_FORMAT + "\n\n" + KP_FORMAT + "\n\nindicator dump: same layout with raw float values.")
    p.add_argument("motion", help="native motion file")
    p.add_argument("--normalize", action="store_true", help="resample to --fps and gravity-align before extracting")
    p.add_argument("--gravity", type=_gravity, default=(0.0, 0.0, -1.0), metavar="X,Y,Z",
                   help="gravity direction of the input, used with --normalize (default 0,0,-1)")
    p.add_argument("--indicators", metavar="PATH", help="also write raw indicator values")
    p.set_defaults(func=cmd_extract)

    p = add("prompts", "Generate the seeded 7,776-prompt benchmark suite.", SUITE_FORMAT)
    p.set_defaults(func=cmd_prompts)

    p = add("eval", "Score motions against a prompt suite; writes the accuracy report.",
            SUITE_FORMAT + "\n\n" + MOTIONS_MANIFEST_FORMAT + "\n\n" + MOTION_FORMAT
            + "\n\nverdict log (JSON lines): {prompt, hit, evidence: [{phrase, category, start, end}]}")
    p.add_argument("--suite", required=True, help="prompt suite file")
    p.add_argument("--motions", required=True, help="manifest mapping prompt ids to motion files")
    p.add_argument("--verdicts", metavar="PATH", help="also write a per-prompt verdict log")
    p.add_argument("--normalize", action="store_true", help="resample to --fps before evaluating")
    p.set_defaults(func=cmd_eval)

    p = add("synth", "Synthesize one oracle motion per prompt into a directory.",
            SUITE_FORMAT + "\n\n" + MOTION_FORMAT
            + "\n\nAlso writes manifest.tsv (prompt_id, path) usable as eval --motions.")
    p.add_argument("suite", help="prompt suite file")
    p.add_argument("--kind", choices=KINDS, action="append", help="only synthesize these kinds (repeatable)")
    p.set_defaults(func=cmd_synth)

    p = add("kb-build", "Normalize a corpus manifest into a kinematic phrase base.",
            CORPUS_MANIFEST_FORMAT + "\n\n" + MOTION_FORMAT
            + "\n\nKB layout: index.json, sequences/<name>.json, kp/<name>.tsv")
    p.add_argument("manifest", help="corpus manifest")
    p.add_argument("--gravity", type=_gravity, default=(0.0, 0.0, -1.0), metavar="X,Y,Z",
                   help="gravity direction of the inputs (default 0,0,-1)")
    p.set_defaults(func=cmd_kb_build)

    p = add("stats", "Report corpus statistics and phrase distributions of a KB.",
            "writes stats.txt (table) and stats.json (summary incl. 392x3 histogram)")
    p.add_argument("kb", help="KB directory written by kb-build")
    p.set_defaults(func=cmd_stats)

    p = add("catalog-export", "Write the phrase descriptor tables.",
            "writes catalog.tsv and one <family>.txt per phrase family; columns: id, type, joints, axis, name")
    p.set_defaults(func=cmd_catalog_export)

    p = add("describe", "Print the template text of a phrase category.",
            "with no arguments, prints every (id, category, text) row as TSV")
    p.add_argument("phrase", nargs="?", type=int, help="phrase id")
    p.add_argument("category", nargs="?", type=int, choices=(-1, 0, 1), help="category")
    p.set_defaults(func=cmd_describe)
    return parser


def resolve_config(args) -> Config:
    base = load_config(args.config)
    return base.updated(
        seed=args.seed,
        target_fps=args.fps,
        threshold=args.threshold,
        min_run_atomic=args.min_run_atomic,
        min_run=args.min_run,
        jobs=args.jobs,
    )


def _out(args, cfg: Config, default: str) -> Path:
    return Path(args.output) if args.output else Path(cfg.output_dir) / default


# ---------------------------------------------------------------------------
# subcommands

def cmd_extract(args, cfg: Config) -> int:
    seq = load_sequence(args.motion)
    if args.normalize:
        seq = normalize(seq, cfg.target_fps, args.gravity)
    catalog = build_catalog()
    ps = extract(seq, catalog, cfg.threshold)
    out = _out(args, cfg, Path(args.motion).stem + ".kp.tsv")
    write_phrase_sequence(ps, out)
    if args.indicators:
        write_indicators(compute_indicators(seq, catalog), args.indicators)
    log.info("wrote %d x %d phrases to %s", *ps.categories.shape, out)
    return 0


def cmd_prompts(args, cfg: Config) -> int:
    suite = generate_suite(seed=cfg.seed)
    out = _out(args, cfg, "kpg.tsv")
    write_suite(suite, out)
    log.info("wrote %d prompts to %s", len(suite), out)
    return 0


def _read_motion_manifest(path: Path) -> dict[str, Path]:
    out = {}
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) != 2:
            raise ConfigError(f"{path}: line {lineno}: expected 'prompt_id<TAB>path'")
        pid, p = cols
        if pid in out:
            raise ConfigError(f"{path}: line {lineno}: duplicate prompt id {pid}")
        out[pid] = Path(p) if Path(p).is_absolute() else path.parent / p
    return out


def cmd_eval(args, cfg: Config) -> int:
    suite = read_suite(args.suite)
    paths = _read_motion_manifest(Path(args.motions))
    # prompts sharing a file share one loaded motion, so it is extracted once
    loaded = {}
    motions = {}
    for pid, p in paths.items():
        key = p.resolve()
        if key not in loaded:
            seq = load_sequence(p)
            loaded[key] = normalize(seq, cfg.target_fps) if args.normalize else seq
        motions[pid] = loaded[key]
    report = evaluate_suite(suite, motions, config=cfg.eval_config, jobs=cfg.jobs)
    text = format_report(report)
    out = _out(args, cfg, "report.txt")
    out.write_text(text, encoding="utf-8")
    if args.verdicts:
        write_verdicts(report, args.verdicts)
    sys.stdout.write(text)
    return 0


def _synth_one(job):
    prompt, fps, out_dir = job
    seq = synthesize(SynthSpec.from_prompt(prompt, fps=fps))
    path = out_dir / f"{prompt.id}.json"
    save_sequence(seq, path)
    return prompt.id, path.name


def cmd_synth(args, cfg: Config) -> int:
    suite = read_suite(args.suite)
    prompts = [p for p in suite if not args.kind or p.kind in args.kind]
    out_dir = _out(args, cfg, "motions")
    out_dir.mkdir(parents=True, exist_ok=True)
    jobs = [(p, cfg.target_fps, out_dir) for p in prompts]
    if cfg.jobs > 1 and len(jobs) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            rows = list(pool.map(_synth_one, jobs, chunksize=32))
    else:
        rows = [_synth_one(j) for j in jobs]
    (out_dir / "manifest.tsv").write_text("".join(f"{pid}\t{name}\n" for pid, name in rows), encoding="utf-8")
    log.info("wrote %d motions to %s", len(rows), out_dir)
    return 0


def cmd_kb_build(args, cfg: Config) -> int:
    manifest = read_manifest(args.manifest, cfg.target_fps, args.gravity)
    out = _out(args, cfg, "kb")
    records = build_kb(manifest, out, cfg.threshold, cfg.jobs)
    failed = [r for r in records if r["status"] != "ok"]
    for r in failed:
        print(f"warning: {r['path']}: {r['error']}", file=sys.stderr)
    print(f"{len(records) - len(failed)} of {len(records)} entries built into {out}")
    return 0


def cmd_stats(args, cfg: Config) -> int:
    stats = compute_stats(args.kb)
    write_stats(stats, args.output or args.kb)
    sys.stdout.write(format_stats(stats))
    return 0


def cmd_catalog_export(args, cfg: Config) -> int:
    catalog = build_catalog()
    out = _out(args, cfg, "catalog")
    out.mkdir(parents=True, exist_ok=True)
    catalog.export(out / "catalog.tsv")
    catalog.export_per_type(out)
    return 0


def cmd_describe(args, cfg: Config) -> int:
    catalog = build_catalog()
    if args.phrase is None:
        for d in catalog:
            for c in (-1, 0, 1):
                print(f"{d.id}\t{c:+d}\t{describe(d.id, c, catalog)}")
        return 0
    if args.category is None:
        raise ConfigError("describe needs both a phrase id and a category")
    try:
        print(describe(args.phrase, args.category, catalog))
    except KeyError as exc:
        raise ConfigError(str(exc.args[0])) from None
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = resolve_config(args)
        return args.func(args, cfg)
    except IntegrityError as exc:
        print(f"kphrase: error: {exc}", file=sys.stderr)
        return 2
    except (KPError, ValueError) as exc:
        print(f"kphrase: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"kphrase: I/O error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
