"""Controlled corruption of ground-truth answers, for calibrating the scorer."""

from __future__ import annotations

import random
import re

from .evaluation import PredictionRecord
from .generation import MAX_COUNT, QAItem

_CNT_RE = re.compile(r"<cnt>(\d+)</cnt>")


def corrupt_counts(items: list[QAItem], fraction: float, seed: int = 0) -> tuple[list[PredictionRecord], int, int]:
    """Copy the GT answers as predictions, altering exactly
    ``round(fraction * slots)`` target counts.

    Returns ``(predictions, corrupted, slots)``.  Corrupted counts always
    differ from the original and stay within 0..MAX_COUNT.
    """
    slots = [(i, k) for i, it in enumerate(items) for k in range(len(_CNT_RE.findall(it.answer_markup)))]
    rng = random.Random(seed)
    chosen = set(rng.sample(slots, round(fraction * len(slots))))
    preds = []
    for i, it in enumerate(items):
        k = -1

        def sub(m):
            nonlocal k
            k += 1
            if (i, k) not in chosen:
                return m.group(0)
            n = int(m.group(1))
            new = rng.choice([v for v in range(MAX_COUNT + 1) if v != n])
            return f"<cnt>{new}</cnt>"

        preds.append(PredictionRecord(it.item_id, _CNT_RE.sub(sub, it.answer_markup)))
    return preds, len(chosen), len(slots)
