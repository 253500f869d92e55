"""Synthesize an oracle motion for every benchmark prompt and score it.

Each motion is built to realise its prompt, so a sound evaluator scores 100%
on every kind. The sweep also counts confuser hits (opposite category for
atomic prompts, reversed order for sequential ones, either ordering for
simultaneous ones), which must stay at zero.

    python scripts/run_kpg_oracle.py [--seed 2024] [--kind atomic] [--jobs 4]
"""

import argparse
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor

from kphrase.errors import KPError
from kphrase.evaluate import eval_prompt
from kphrase.extract import extract
from kphrase.prompts import DEFAULT_SEED, KINDS, generate_suite
from kphrase.synth import confusers, synth_for_prompt


def score(prompt):
    try:
        ps = extract(synth_for_prompt(prompt))
    except KPError as exc:
        return prompt.kind, "error", str(exc)
    hit = eval_prompt(prompt, ps).hit
    confused = any(eval_prompt(c, ps).hit for c in confusers(prompt))
    return prompt.kind, "hit" if hit else "miss", "confuser hit" if confused else ""


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--seed", type=int, default=DEFAULT_SEED)
    ap.add_argument("--kind", choices=KINDS, action="append")
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()

    prompts = [p for p in generate_suite(seed=args.seed) if not args.kind or p.kind in args.kind]
    t0 = time.perf_counter()
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            results = list(pool.map(score, prompts, chunksize=64))
    else:
        results = [score(p) for p in prompts]
    elapsed = time.perf_counter() - t0

    outcome = Counter((k, o) for k, o, _ in results)
    confused = Counter(k for k, _, note in results if note == "confuser hit")
    print(f"{'kind':<13} {'prompts':>7} {'hits':>6} {'errors':>6} {'confused':>8} {'accuracy':>9}")
    for kind in KINDS:
        n = sum(v for (k, _), v in outcome.items() if k == kind)
        if not n:
            continue
        hits = outcome[(kind, "hit")]
        print(f"{kind:<13} {n:>7} {hits:>6} {outcome[(kind, 'error')]:>6} {confused[kind]:>8} {100 * hits / n:>8.2f}%")
    print(f"{len(prompts)} prompts in {elapsed:.1f}s")
    for (p, (_, o, note)) in zip(prompts, results):
        if o != "hit" or note:
            print(f"  {p.id}: {o} {note} ({p.text})")


if __name__ == "__main__":
    main()
