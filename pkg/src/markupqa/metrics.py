"""Sentence-generation metrics on demarked text: BLEU-1/4, METEOR, ROUGE-1 F.

BLEU is corpus-level; METEOR and ROUGE-1 are averaged over sentences.
METEOR uses the exact and Porter-stem matching stages only.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import asdict, dataclass
from typing import Sequence

from .porter import stem

_TOKEN_RE = re.compile(r"\d+(?:\.\d+)+|\w+|[^\w\s]")


class LengthMismatch(ValueError):
    pass


def tokenize(text: str) -> list[str]:
    """Lowercase; words, decimals and single punctuation marks as tokens."""
    return _TOKEN_RE.findall(text.lower())


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def bleu(refs: Sequence[Sequence[str]], hyps: Sequence[Sequence[str]], max_n: int = 4) -> float:
    """Corpus BLEU with uniform weights over 1..max_n and a brevity penalty.

    Unsmoothed: a zero modified precision at any order gives 0.
    """
    if len(refs) != len(hyps):
        raise LengthMismatch(f"{len(refs)} references vs {len(hyps)} hypotheses")
    matched = [0] * max_n
    total = [0] * max_n
    ref_len = hyp_len = 0
    for ref, hyp in zip(refs, hyps):
        ref_len += len(ref)
        hyp_len += len(hyp)
        for n in range(1, max_n + 1):
            h = _ngrams(hyp, n)
            r = _ngrams(ref, n)
            matched[n - 1] += sum(min(c, r[g]) for g, c in h.items())
            total[n - 1] += sum(h.values())
    if hyp_len == 0 or any(m == 0 for m in matched):
        return 0.0
    log_p = sum(math.log(m / t) for m, t in zip(matched, total)) / max_n
    bp = 1.0 if hyp_len > ref_len else math.exp(1.0 - ref_len / hyp_len)
    return bp * math.exp(log_p)


# -- METEOR ----------------------------------------------------------------

_STATE_BUDGET = 200_000


class _OverBudget(Exception):
    pass


def _stage(ref, hyp, keys_r, keys_h, fixed: dict[int, int]) -> dict[int, int]:
    """Extend ``fixed`` (hyp index -> ref index) with a maximum set of new
    key-equal pairs, choosing the one with the fewest chunks overall."""
    used0 = 0
    for j in fixed.values():
        used0 |= 1 << j
    free_r: dict[str, list[int]] = {}
    for j, k in enumerate(keys_r):
        if not used0 >> j & 1:
            free_r.setdefault(k, []).append(j)
    free_h = Counter(keys_h[i] for i in range(len(hyp)) if i not in fixed)
    target = {k: min(c, len(free_r.get(k, ()))) for k, c in free_h.items()}
    target = {k: t for k, t in target.items() if t}
    if not target:
        return dict(fixed)
    # hyp positions still open for each key at or after i
    left_after: list[Counter] = [Counter() for _ in range(len(hyp) + 1)]
    for i in range(len(hyp) - 1, -1, -1):
        left_after[i] = left_after[i + 1].copy()
        if i not in fixed and keys_h[i] in target:
            left_after[i][keys_h[i]] += 1

    def done(mask, key):
        return sum(1 for j in free_r.get(key, ()) if mask >> j & 1)

    memo: dict = {}
    inf = float("inf")

    def best(i, mask, prev):
        if i == len(hyp):
            return (0, ()) if all(done(mask, k) == t for k, t in target.items()) else (inf, ())
        key = (i, mask, prev)
        if key in memo:
            return memo[key]
        if len(memo) > _STATE_BUDGET:
            raise _OverBudget
        if i in fixed:
            j = fixed[i]
            c, path = best(i + 1, mask, j)
            res = (c + (0 if prev is not None and j == prev + 1 else 1), path)
        else:
            k = keys_h[i]
            res = (inf, ())
            if k in target:
                need = target[k] - done(mask, k)
                if need > 0:
                    for j in free_r[k]:
                        if mask >> j & 1:
                            continue
                        c, path = best(i + 1, mask | 1 << j, j)
                        c += 0 if prev is not None and j == prev + 1 else 1
                        if c < res[0]:
                            res = (c, ((i, j),) + path)
                if left_after[i + 1][k] >= need:
                    c, path = best(i + 1, mask, None)
                    if c < res[0]:
                        res = (c, path)
            else:
                res = best(i + 1, mask, None)
        memo[key] = res
        return res

    out = dict(fixed)
    try:
        _, path = best(0, used0, None)
        out.update(path)
    except (_OverBudget, RecursionError):
        out.update(_greedy(keys_r, keys_h, fixed, used0))
    return out


def _greedy(keys_r, keys_h, fixed, used):
    # fallback for pathological inputs: prefer extending the current chunk
    pairs, prev = {}, None
    for i, k in enumerate(keys_h):
        if i in fixed:
            prev = fixed[i]
            continue
        cands = [j for j, kr in enumerate(keys_r) if kr == k and not used >> j & 1]
        if not cands:
            prev = None
            continue
        j = prev + 1 if prev is not None and prev + 1 in cands else cands[0]
        pairs[i] = j
        used |= 1 << j
        prev = j
    return pairs


def meteor_alignment(ref: Sequence[str], hyp: Sequence[str]) -> dict[int, int]:
    """Exact stage then stem stage; returns hyp index -> ref index."""
    ref, hyp = list(ref), list(hyp)
    align = _stage(ref, hyp, ref, hyp, {})
    return _stage(ref, hyp, [stem(t) for t in ref], [stem(t) for t in hyp], align)


def count_chunks(align: dict[int, int]) -> int:
    chunks, prev_i, prev_j = 0, None, None
    for i in sorted(align):
        j = align[i]
        if not (prev_i == i - 1 and prev_j == j - 1):
            chunks += 1
        prev_i, prev_j = i, j
    return chunks


def meteor(ref: Sequence[str], hyp: Sequence[str], alpha: float = 0.9, beta: float = 3.0,
           gamma: float = 0.5) -> float:
    align = meteor_alignment(ref, hyp)
    m = len(align)
    if m == 0:
        return 0.0
    p, r = m / len(hyp), m / len(ref)
    f_mean = p * r / (alpha * p + (1 - alpha) * r)
    penalty = gamma * (count_chunks(align) / m) ** beta
    return f_mean * (1 - penalty)


# -- ROUGE-1 ---------------------------------------------------------------

def rouge1_f(ref: Sequence[str], hyp: Sequence[str]) -> float:
    if not ref or not hyp:
        return 0.0
    overlap = sum((Counter(ref) & Counter(hyp)).values())
    if overlap == 0:
        return 0.0
    p, r = overlap / len(hyp), overlap / len(ref)
    return 2 * p * r / (p + r)


# -- suite -----------------------------------------------------------------

@dataclass(frozen=True)
class SgpScores:
    bleu1: float
    bleu4: float
    meteor: float
    rouge1_f: float
    avg_sgp: float

    def to_dict(self) -> dict:
        return asdict(self)


def sgp_suite(refs: Sequence[str], hyps: Sequence[str]) -> SgpScores:
    """All four SGP metrics on already-demarked strings, plus their mean."""
    if len(refs) != len(hyps):
        raise LengthMismatch(f"{len(refs)} references vs {len(hyps)} hypotheses")
    rt = [tokenize(s) for s in refs]
    ht = [tokenize(s) for s in hyps]
    b1 = bleu(rt, ht, 1)
    b4 = bleu(rt, ht, 4)
    n = len(rt)
    met = math.fsum(meteor(r, h) for r, h in zip(rt, ht)) / n if n else 0.0
    rg = math.fsum(rouge1_f(r, h) for r, h in zip(rt, ht)) / n if n else 0.0
    return SgpScores(b1, b4, met, rg, (b1 + b4 + met + rg) / 4)
