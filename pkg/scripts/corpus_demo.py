"""Build a small synthetic phrase base and print its statistics.

Writes a handful of oracle motions (plus one deliberately corrupt file) at
60 fps, lists them in a manifest, then normalizes them to 30 fps into a KB
and reports per-family category distributions.

    python scripts/corpus_demo.py [--out demo_kb]
"""

import argparse
from pathlib import Path

from kphrase.corpus import build_kb, compute_stats, format_stats, read_manifest, write_stats
from kphrase.prompts import generate_suite
from kphrase.skeleton import save_sequence
from kphrase.synth import synth_for_prompt


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out", default="demo_kb")
    ap.add_argument("--per-kind", type=int, default=5)
    args = ap.parse_args()

    out = Path(args.out)
    src = out / "source"
    src.mkdir(parents=True, exist_ok=True)
    suite = generate_suite()
    rows = []
    for kind in ("atomic", "repetitive", "sequential", "simultaneous"):
        for prompt in suite.by_kind(kind)[: args.per_kind]:
            seq = synth_for_prompt(prompt, fps=60.0, num_frames=240, move_frames=16, gap_frames=8, lead_frames=8)
            save_sequence(seq, src / f"{prompt.id}.json")
            rows.append(f"{prompt.id}.json\t{kind}\t{prompt.text}\n")
    (src / "broken.json").write_text("{ not a motion")
    rows.append("broken.json\tbroken\n")
    (src / "manifest.tsv").write_text("".join(rows))

    records = build_kb(read_manifest(src / "manifest.tsv"), out / "kb")
    for r in records:
        if r["status"] != "ok":
            print(f"skipped {r['path']}: {r['error']}")
    stats = compute_stats(out / "kb")
    write_stats(stats, out / "kb")
    print(format_stats(stats))


if __name__ == "__main__":
    main()
