"""Freeze nltk's original-algorithm Porter stems for a word list.

Words of two letters or fewer are left out: the in-package stemmer returns
them unchanged, nltk's original mode does not.  Needs the ``goldens`` extra.
"""

import argparse
import json
import re
from pathlib import Path

from nltk.stem.porter import PorterStemmer

from markupqa.generation import TemplateBank

EXTRA = """
caresses ponies ties caress cats feed agreed plastered bled motoring sing conflated
troubled sized hopping tanned falling hissing fizzed failing filing happy sky
relational conditional rational valenci hesitanci digitizer conformabli radicalli
differentli vileli analogousli vietnamization predication operator feudalism
decisiveness hopefulness callousness formaliti sensitiviti sensibiliti triplicate
formative formalize electriciti electrical hopeful goodness revival allowance
inference airliner gyroscopic adjustable defensible irritant replacement adjustment
dependent adoption homologou communism activate angulariti homologous effective
bowdlerize probate rate cease controll roll generalizations oscillators detecting
detected detection detects vehicles vehicle barriers pedestrians trucks motorcycles
bicycles trailers cones construction located coordinates closest nearest meters
""".split()


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parents[1] / "tests/data/porter_golden.json"))
    args = ap.parse_args()
    words = set(EXTRA)
    bank = TemplateBank.default()
    for section in bank.sections.values():
        for patterns in section.values():
            for p in patterns if isinstance(patterns, list) else sum(patterns.values(), []):
                words.update(re.findall(r"[a-z]+", p.lower()))
    words = sorted(w for w in words if len(w) > 2)
    ps = PorterStemmer(mode=PorterStemmer.ORIGINAL_ALGORITHM)
    golden = {w: ps.stem(w) for w in words}
    Path(args.out).write_text(json.dumps(golden, indent=0, sort_keys=True) + "\n")
    print(f"{len(golden)} stems written to {args.out}")


if __name__ == "__main__":
    main()
