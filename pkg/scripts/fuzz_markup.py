"""Fuzz the markup parser: lossless round trip, lenient safety, finding mix."""

import argparse
import time
from collections import Counter

from markupqa.fuzz import fuzz_corpus
from markupqa.markup import MarkupError, parse_markup, render, strip_markup


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("-n", type=int, default=50_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    t0 = time.perf_counter()
    corpus = fuzz_corpus(args.seed, args.n)
    kinds, strict, failures = Counter(), 0, []
    for s in corpus:
        doc = parse_markup(s, "lenient")
        if render(doc) != s:
            failures.append(("lenient render", s))
        strip_markup(doc)
        kinds.update(w.kind.value for w in doc.warnings)
        try:
            if render(parse_markup(s)) != s:
                failures.append(("strict render", s))
            strict += 1
        except MarkupError:
            pass
    dt = time.perf_counter() - t0
    print(f"{len(corpus)} strings in {dt:.2f}s ({len(corpus) / dt:,.0f}/s); {strict} strict-parseable")
    for k, n in kinds.most_common():
        print(f"  {k:<20} {n}")
    for what, s in failures[:10]:
        print(f"FAIL {what}: {s!r}")
    raise SystemExit(1 if failures else 0)


if __name__ == "__main__":
    main()
