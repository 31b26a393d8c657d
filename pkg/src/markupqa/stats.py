"""Corpus statistics as plain distributions, ready for plotting.

Covers word frequencies of questions and demarked answers, the yes/no
balance, the counted-object histogram, targets per sentence, closest-object
distances and the closest-object location grid.
"""

from __future__ import annotations

import csv
import json
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from .generation import FAMILIES, MAX_COUNT, MAX_TARGETS, QAItem, TaskFamily
from .markup import parse_markup, strip_markup
from .metrics import tokenize

STOPWORDS = frozenset(
    "a an the is are was were be to of in on at and or for with by from this that there "
    "it its i can you any , . ? ! ( ) - ;".split()
)


@dataclass
class StatsBundle:
    word_freq_questions: dict[str, int] = field(default_factory=dict)
    word_freq_answers: dict[str, int] = field(default_factory=dict)
    yes_no_dist: dict[str, int] = field(default_factory=lambda: {"yes": 0, "no": 0})
    count_hist: dict[int, int] = field(default_factory=lambda: dict.fromkeys(range(MAX_COUNT + 1), 0))
    n_qa_hist: dict[int, int] = field(default_factory=lambda: dict.fromkeys(range(1, MAX_TARGETS + 1), 0))
    distance_edges: list[float] = field(default_factory=list)
    distance_hist: list[int] = field(default_factory=list)
    distance_overflow: int = 0
    location_edges: list[float] = field(default_factory=list)
    # sparse: (x bin, y bin) -> count
    location_grid: dict[tuple[int, int], int] = field(default_factory=dict)
    location_overflow: int = 0
    family_counts: dict[str, int] = field(default_factory=lambda: {f.value: 0 for f in FAMILIES})


def _edges(lo: float, hi: float, width: float) -> list[float]:
    n = int(round((hi - lo) / width))
    return [lo + i * width for i in range(n + 1)]


def _bin(value: float, edges: list[float]) -> int | None:
    lo, hi = edges[0], edges[-1]
    if not (lo <= value <= hi) or math.isnan(value):
        return None
    width = (hi - lo) / (len(edges) - 1)
    return min(int((value - lo) // width), len(edges) - 2)


def _sorted_freq(c: Counter) -> dict[str, int]:
    return dict(sorted(c.items(), key=lambda kv: (-kv[1], kv[0])))


def compute_stats(corpus: list[QAItem], distance_max: float = 40.0, distance_bin: float = 1.0,
                  location_range: float = 40.0, location_bin: float = 1.0) -> StatsBundle:
    b = StatsBundle()
    b.distance_edges = _edges(0.0, distance_max, distance_bin)
    b.distance_hist = [0] * (len(b.distance_edges) - 1)
    b.location_edges = _edges(-location_range, location_range, location_bin)
    qwords, awords, grid = Counter(), Counter(), Counter()
    for it in corpus:
        qwords.update(tokenize(it.question))
        awords.update(tokenize(strip_markup(parse_markup(it.answer_markup, "lenient"))))
        b.family_counts[it.family.value] = b.family_counts.get(it.family.value, 0) + 1
        gt = it.ground_truth
        if it.family is TaskFamily.PRESENCE:
            if gt["variant"] == "exists":
                b.yes_no_dist["yes" if gt["exists"] else "no"] += 1
            else:
                b.count_hist[gt["count"]] = b.count_hist.get(gt["count"], 0) + 1
        elif it.family is TaskFamily.DIRECTION:
            for _, n in gt["targets"]:
                b.count_hist[n] = b.count_hist.get(n, 0) + 1
            b.n_qa_hist[it.n_qa] = b.n_qa_hist.get(it.n_qa, 0) + 1
        elif it.family is TaskFamily.RELATIVE_DISTANCE:
            k = _bin(gt["distance"], b.distance_edges)
            if k is None:
                b.distance_overflow += 1
            else:
                b.distance_hist[k] += 1
        else:
            kx, ky = _bin(gt["x"], b.location_edges), _bin(gt["y"], b.location_edges)
            if kx is None or ky is None:
                b.location_overflow += 1
            else:
                grid[(kx, ky)] += 1
    b.word_freq_questions = _sorted_freq(qwords)
    b.word_freq_answers = _sorted_freq(awords)
    b.count_hist = dict(sorted(b.count_hist.items()))
    b.n_qa_hist = dict(sorted(b.n_qa_hist.items()))
    b.location_grid = dict(sorted(grid.items()))
    return b


def cloud_view(freq: dict[str, int], stopwords=STOPWORDS) -> dict[str, int]:
    """Word frequencies without stopwords, as conventionally fed to a word cloud."""
    return {w: n for w, n in freq.items() if w not in stopwords}


# -- emission --------------------------------------------------------------

def _structured(b: StatsBundle) -> dict:
    return {
        "word_freq_questions": b.word_freq_questions,
        "word_freq_answers": b.word_freq_answers,
        "cloud_questions": cloud_view(b.word_freq_questions),
        "cloud_answers": cloud_view(b.word_freq_answers),
        "yes_no_dist": b.yes_no_dist,
        "count_hist": {str(k): v for k, v in b.count_hist.items()},
        "n_qa_hist": {str(k): v for k, v in b.n_qa_hist.items()},
        "distance_hist": {"edges": b.distance_edges, "counts": b.distance_hist, "overflow": b.distance_overflow},
        "location_grid": {
            "edges": b.location_edges,
            "cells": [[ix, iy, n] for (ix, iy), n in b.location_grid.items()],
            "overflow": b.location_overflow,
        },
        "family_counts": b.family_counts,
    }


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def emit_stats(bundle: StatsBundle, path: str | Path, format: str = "structured") -> list[Path]:
    """Write ``stats.json`` (structured) or a set of CSV files (tabular)
    into directory ``path``; returns the files written."""
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    b = bundle
    if format == "structured":
        p = out / "stats.json"
        p.write_text(json.dumps(_structured(b), indent=1, ensure_ascii=False) + "\n", encoding="utf-8")
        return [p]
    if format != "tabular":
        raise ValueError(f"unknown stats format {format!r}")
    de, le = b.distance_edges, b.location_edges
    files = {
        "word_freq_questions.csv": (["token", "count"], b.word_freq_questions.items()),
        "word_freq_answers.csv": (["token", "count"], b.word_freq_answers.items()),
        "cloud_questions.csv": (["token", "count"], cloud_view(b.word_freq_questions).items()),
        "cloud_answers.csv": (["token", "count"], cloud_view(b.word_freq_answers).items()),
        "yes_no.csv": (["answer", "count"], b.yes_no_dist.items()),
        "count_hist.csv": (["count_value", "items"], b.count_hist.items()),
        "n_qa_hist.csv": (["n_qa", "items"], b.n_qa_hist.items()),
        "distance_hist.csv": (
            ["bin_lo", "bin_hi", "count"],
            [[de[i], de[i + 1], n] for i, n in enumerate(b.distance_hist)] + [["overflow", "", b.distance_overflow]],
        ),
        "location_grid.csv": (
            ["x_lo", "x_hi", "y_lo", "y_hi", "count"],
            [[le[ix], le[ix + 1], le[iy], le[iy + 1], n] for (ix, iy), n in b.location_grid.items()]
            + [["overflow", "", "", "", b.location_overflow]],
        ),
        "location_edges.csv": (["edge"], [[e] for e in le]),
        "family_counts.csv": (["family", "items"], b.family_counts.items()),
    }
    written = []
    for name, (header, rows) in files.items():
        _write_csv(out / name, header, rows)
        written.append(out / name)
    return written


def _read_csv(path: Path) -> list[list[str]]:
    with open(path, encoding="utf-8", newline="") as f:
        rows = list(csv.reader(f))
    return rows[1:]


def read_stats(path: str | Path, format: str = "structured") -> StatsBundle:
    """Inverse of ``emit_stats``."""
    src = Path(path)
    b = StatsBundle()
    if format == "structured":
        d = json.loads((src / "stats.json").read_text("utf-8"))
        b.word_freq_questions = d["word_freq_questions"]
        b.word_freq_answers = d["word_freq_answers"]
        b.yes_no_dist = d["yes_no_dist"]
        b.count_hist = {int(k): v for k, v in d["count_hist"].items()}
        b.n_qa_hist = {int(k): v for k, v in d["n_qa_hist"].items()}
        b.distance_edges = d["distance_hist"]["edges"]
        b.distance_hist = d["distance_hist"]["counts"]
        b.distance_overflow = d["distance_hist"]["overflow"]
        b.location_edges = d["location_grid"]["edges"]
        b.location_grid = {(ix, iy): n for ix, iy, n in d["location_grid"]["cells"]}
        b.location_overflow = d["location_grid"]["overflow"]
        b.family_counts = d["family_counts"]
        return b
    b.word_freq_questions = {w: int(n) for w, n in _read_csv(src / "word_freq_questions.csv")}
    b.word_freq_answers = {w: int(n) for w, n in _read_csv(src / "word_freq_answers.csv")}
    b.yes_no_dist = {k: int(n) for k, n in _read_csv(src / "yes_no.csv")}
    b.count_hist = {int(k): int(n) for k, n in _read_csv(src / "count_hist.csv")}
    b.n_qa_hist = {int(k): int(n) for k, n in _read_csv(src / "n_qa_hist.csv")}
    rows = _read_csv(src / "distance_hist.csv")
    b.distance_overflow = int(rows[-1][2])
    rows = rows[:-1]
    b.distance_hist = [int(r[2]) for r in rows]
    b.distance_edges = [float(r[0]) for r in rows] + ([float(rows[-1][1])] if rows else [])
    rows = _read_csv(src / "location_grid.csv")
    b.location_overflow = int(rows[-1][4])
    b.family_counts = {k: int(n) for k, n in _read_csv(src / "family_counts.csv")}
    b.location_edges = le = [float(r[0]) for r in _read_csv(src / "location_edges.csv")]
    index = {v: i for i, v in enumerate(le)}
    b.location_grid = {(index[float(r[0])], index[float(r[2])]): int(r[4]) for r in rows[:-1]}
    return b
