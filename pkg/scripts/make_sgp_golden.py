"""Freeze reference SGP values for a 10-pair fixture using nltk and rouge-score.

Run once; the output is committed under tests/data/ and the test suite compares
the in-package metrics against it.  Needs the ``goldens`` extra.

The pairs avoid repeated words inside a sentence, so unigram alignments are
unique and nltk's greedy aligner agrees with an optimal one.
"""

import argparse
import json
from pathlib import Path

from nltk.stem.porter import PorterStemmer
from nltk.translate.bleu_score import corpus_bleu
from nltk.translate.meteor_score import meteor_score
from rouge_score import rouge_scorer

from markupqa.metrics import tokenize

PAIRS = [
    ("In the back, 3 trucks are detected.", "In the back, 3 trucks are detected."),
    ("The closest object to the ego-car is a car located at coordinates (3.43, 1.41).",
     "The nearest object is a car at (3.43, 1.41)."),
    ("Yes, there are pedestrians near the vehicle.", "No pedestrians were detected near us."),
    ("There are 4 cars and 2 buses in the front left camera.",
     "In the front left camera there are 2 buses and 4 cars."),
    ("A traffic cone is 5.00 meters away.", "A traffic cone sits 7.50 meters away."),
    ("The front camera sees 1 motorcycle.", "1 motorcycle appears ahead."),
    ("Detecting several barriers behind.", "Several barriers detected behind."),
    ("Nothing is parked on the right.", "Nothing parked right."),
    ("The bicycle stands 12.25 meters ahead.", "A trailer blocks the lane."),
    ("Two construction vehicles are working nearby.", "Two construction vehicle work nearby."),
]


class _NoWordnet:
    @staticmethod
    def synsets(word):
        return []


class _Tok:
    @staticmethod
    def tokenize(text):
        return tokenize(text)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parents[1] / "tests/data/sgp_golden.json"))
    args = ap.parse_args()

    refs = [tokenize(r) for r, _ in PAIRS]
    hyps = [tokenize(h) for _, h in PAIRS]
    stemmer = PorterStemmer(mode=PorterStemmer.ORIGINAL_ALGORITHM)
    met = [meteor_score([r], h, stemmer=stemmer, wordnet=_NoWordnet) for r, h in zip(refs, hyps)]
    scorer = rouge_scorer.RougeScorer(["rouge1"], tokenizer=_Tok())
    rg = [scorer.score(r, h)["rouge1"].fmeasure for r, h in PAIRS]
    out = {
        "pairs": [{"ref": r, "hyp": h} for r, h in PAIRS],
        "bleu1": corpus_bleu([[r] for r in refs], hyps, weights=(1, 0, 0, 0)),
        "bleu4": corpus_bleu([[r] for r in refs], hyps, weights=(0.25,) * 4),
        "meteor_per_pair": met,
        "meteor": sum(met) / len(met),
        "rouge1_per_pair": rg,
        "rouge1_f": sum(rg) / len(rg),
    }
    Path(args.out).write_text(json.dumps(out, indent=1) + "\n")
    print(json.dumps({k: v for k, v in out.items() if k != "pairs"}, indent=1))


if __name__ == "__main__":
    main()
