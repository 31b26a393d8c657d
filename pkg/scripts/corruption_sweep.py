"""Scorer calibration sweep: corrupt a share of target counts, measure accuracy.

Generates a synthetic corpus, injects count errors at several rates and
prints injected vs measured error, overall and per targets-per-sentence bucket.
"""

import argparse

from markupqa.evaluation import evaluate_corpus
from markupqa.generation import generate_corpus
from markupqa.perturb import corrupt_counts
from markupqa.scenes import synth_scenes


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--scenes", type=int, default=500)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--rates", default="0,0.1,0.3,0.5,1.0")
    args = ap.parse_args()

    items = generate_corpus(synth_scenes(args.seed, args.scenes), mix={"direction": 1}, seed=args.seed).items
    print(f"{len(items)} direction items")
    print(f"{'rate':>5} {'injected':>9} {'measured':>9} {'cat_acc':>8}  per n-QA cat_count_acc")
    for rate in (float(r) for r in args.rates.split(",")):
        preds, bad, slots = corrupt_counts(items, rate, seed=args.seed)
        rep = evaluate_corpus(items, preds)
        buckets = " ".join(f"{n}:{row.cat_count.value:.2f}" for n, row in rep.by_n_qa.items())
        print(f"{rate:>5.2f} {bad / slots:>9.4f} {1 - rep.cat_count_acc.value:>9.4f} {rep.cat_acc.value:>8.3f}  {buckets}")


if __name__ == "__main__":
    main()
