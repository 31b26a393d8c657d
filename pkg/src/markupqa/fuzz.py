"""Seeded corpus of well-formed and mutated markup strings for parser fuzzing."""

from __future__ import annotations

import random

from .markup import TagKind
from .vocab import CameraId, DEFAULT_VOCAB

_WORDS = "the a there are is in on near ego-car camera detected located object closest meters , . ?".split()
_LEAF = [k for k in TagKind if k is not TagKind.TARGET]
_JUNK = ["<", ">", "</", "<>", "< obj>", "<obj", "obj>", "<Obj>", "<box>", "</box>", "&lt;", "\n", "\t", "  ", "é", "🚗"]


def _leaf_content(kind: TagKind, rng: random.Random) -> str:
    if kind is TagKind.OBJ:
        name = rng.choice(DEFAULT_VOCAB.names)
        return DEFAULT_VOCAB.plural(name) if rng.random() < 0.5 else name
    if kind is TagKind.CNT:
        return str(rng.randint(0, 20))
    if kind is TagKind.ANS:
        return rng.choice(["yes", "no", "Yes"])
    if kind is TagKind.CAM:
        return rng.choice(list(CameraId)).surface
    if kind is TagKind.DST:
        return f"{rng.uniform(0, 40):.2f}"
    return f"({rng.uniform(-40, 40):.2f}, {rng.uniform(-40, 40):.2f})"


def _span(rng: random.Random) -> str:
    if rng.random() < 0.3:
        parts = [f"<cnt>{_leaf_content(TagKind.CNT, rng)}</cnt>", f"<obj>{_leaf_content(TagKind.OBJ, rng)}</obj>"]
        if rng.random() < 0.2:
            parts.reverse()
        return f"<target>{parts[0]}{rng.choice([' ', '', '  '])}{parts[1]}</target>"
    kind = rng.choice([k for k in _LEAF if k is not TagKind.CNT])
    return f"<{kind.value}>{_leaf_content(kind, rng)}</{kind.value}>"


def well_formed(rng: random.Random) -> str:
    out = []
    for _ in range(rng.randint(1, 12)):
        out.append(_span(rng) if rng.random() < 0.35 else rng.choice(_WORDS))
    return " ".join(out)


def mutate(text: str, rng: random.Random) -> str:
    for _ in range(rng.randint(1, 3)):
        op = rng.randrange(5)
        i = rng.randint(0, len(text))
        if op == 0 and text:  # delete a slice
            j = min(len(text), i + rng.randint(1, 8))
            text = text[:i] + text[j:]
        elif op == 1:  # insert junk or a stray tag
            k = rng.choice(list(TagKind)).value
            text = text[:i] + rng.choice(_JUNK + [f"<{k}>", f"</{k}>"]) + text[i:]
        elif op == 2 and text:  # duplicate a slice
            j = min(len(text), i + rng.randint(1, 20))
            text = text[:j] + text[i:j] + text[j:]
        elif op == 3:  # splice in another sentence
            text = text[:i] + well_formed(rng) + text[i:]
        else:  # swap two characters
            if len(text) > 1:
                a, b = sorted(rng.sample(range(len(text)), 2))
                text = text[:a] + text[b] + text[a + 1:b] + text[a] + text[b + 1:]
    return text


def fuzz_corpus(seed: int, n: int, mutated_fraction: float = 0.6) -> list[str]:
    rng = random.Random(seed)
    out = []
    for _ in range(n):
        s = well_formed(rng)
        out.append(mutate(s, rng) if rng.random() < mutated_fraction else s)
    return out
