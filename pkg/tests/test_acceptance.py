"""End-to-end acceptance checks, one test per criterion.

Each test records a PASS/FAIL line; ``conftest.py`` prints them all in the
terminal summary.  Run alone with ``pytest tests/test_acceptance.py``.
"""

import hashlib
import json
import math
import subprocess
import sys
import time
from pathlib import Path

import pytest

from markupqa.evaluation import EvalReport, PredictionRecord, evaluate_corpus
from markupqa.fuzz import fuzz_corpus
from markupqa.generation import TaskFamily, generate_corpus
from markupqa.markup import MarkupError, extract_answers, parse_markup, render
from markupqa.metrics import bleu, meteor, rouge1_f, sgp_suite
from markupqa.perturb import corrupt_counts
from markupqa.scenes import closest_object, objects_in_camera, synth_scenes
from markupqa.stats import compute_stats
from markupqa.vocab import CameraId

pytestmark = pytest.mark.acceptance

RESULTS: dict[str, str] = {}
DATA = Path(__file__).parent / "data"


def record(key, ok, detail):
    RESULTS[key] = f"{key:<34} {'PASS' if ok else 'FAIL'}  {detail}"
    assert ok, RESULTS[key]


def test_ac1_grammar_round_trip():
    t0 = time.perf_counter()
    corpus = fuzz_corpus(seed=2024, n=12_000)
    strict_ok = mismatched = lenient_fail = 0
    for s in corpus:
        try:
            doc = parse_markup(s)
        except MarkupError:
            pass
        else:
            strict_ok += 1
            mismatched += render(doc) != s
        try:
            parse_markup(s, "lenient")
        except Exception:
            lenient_fail += 1
    dt = time.perf_counter() - t0
    ok = len(corpus) >= 10_000 and strict_ok > 0 and mismatched == 0 and lenient_fail == 0 and dt < 10
    record("AC1 grammar round trip", ok,
           f"{len(corpus)} strings, {strict_ok} strict-parseable, {mismatched} round-trip mismatches, "
           f"{lenient_fail} lenient aborts, {dt:.2f}s (<10s)")


def test_ac2_generation_self_consistency():
    t0 = time.perf_counter()
    items = generate_corpus(synth_scenes(7, 1000), seed=7).items
    agree = over_count = over_dist = 0
    for it in items:
        agree += extract_answers(parse_markup(it.answer_markup)) == it.expected_answers()
        gt = it.ground_truth
        counts = [gt["count"]] if it.family is TaskFamily.PRESENCE and gt["variant"] == "count" else \
            [n for _, n in gt.get("targets", [])]
        over_count += any(n > 20 for n in counts)
        if it.family is TaskFamily.RELATIVE_DISTANCE:
            over_dist += gt["distance"] > 40.0
        if it.family is TaskFamily.RELATIVE_LOCATION:
            over_dist += math.sqrt(gt["x_exact"] ** 2 + gt["y_exact"] ** 2) > 40.0
    dt = time.perf_counter() - t0
    ok = len(items) > 0 and agree == len(items) and over_count == 0 and over_dist == 0 and dt < 30
    record("AC2 generation self-consistency", ok,
           f"{agree}/{len(items)} items agree, {over_count} over 20, {over_dist} beyond 40 m, {dt:.2f}s (<30s)")


def test_ac3_geometric_oracle():
    scenes = synth_scenes(99, 1000)
    bad_closest = bad_cam = 0
    for s in scenes:
        # exhaustive: rank every in-radius object by (distance, scene index)
        ranked = sorted((math.sqrt(o.x * o.x + o.y * o.y), i) for i, o in enumerate(s.objects))
        ranked = [(d, i) for d, i in ranked if d <= 40.0]
        best = (s.objects[ranked[0][1]], ranked[0][0]) if ranked else None
        bad_closest += closest_object(s, 40.0) != best
        for cam in CameraId:
            want = {}
            for o in s.objects:
                if o.camera == cam:
                    want[o.category] = want.get(o.category, 0) + 1
            bad_cam += objects_in_camera(s, cam) != want
    record("AC3 geometric oracle", bad_closest == 0 and bad_cam == 0,
           f"1000 scenes, {bad_closest} closest mismatches, {bad_cam} camera mismatches")


def test_ac4_metric_correctness():
    errs = {
        "bleu1 truncation": abs(bleu([["the", "cat", "sat"]], [["the", "cat"]], 1) - math.exp(1 - 3 / 2)),
        "meteor swap": abs(meteor(["the", "cat", "sat"], ["the", "sat", "cat"]) - 0.5),
        "rouge1 clipped": abs(rouge1_f(["a", "b", "b"], ["b"]) - 0.5),
    }
    g = json.loads((DATA / "sgp_golden.json").read_text())
    s = sgp_suite([p["ref"] for p in g["pairs"]], [p["hyp"] for p in g["pairs"]])
    for k in ("bleu1", "bleu4", "meteor", "rouge1_f"):
        errs[f"golden {k}"] = abs(getattr(s, k) - g[k])
    worst = max(errs.values())
    ok = worst <= 1e-9 and len(g["pairs"]) == 10 and round(math.exp(-0.5), 4) == 0.6065
    record("AC4 metric correctness", ok, f"max |error| {worst:.2e} over {len(errs)} checks (<=1e-9)")


def test_ac5_self_evaluation_identity():
    items = generate_corpus(synth_scenes(5, 600), seed=5).items[:2000]
    t0 = time.perf_counter()
    rep = evaluate_corpus(items, [PredictionRecord(it.item_id, it.answer_markup) for it in items])
    dt = time.perf_counter() - t0
    rates = {n: getattr(rep, n).value for n in EvalReport._RATES}
    means = {n: getattr(rep, n).value for n in EvalReport._MEANS}
    sgp = rep.sgp.to_dict()
    ok = (len(items) == 2000 and all(v == 1.0 for v in rates.values()) and all(v == 0.0 for v in means.values())
          and all(f"{v:.3f}" == "1.000" for v in sgp.values()) and dt < 60)
    record("AC5 self-evaluation identity", ok,
           f"2000 items, acc min {min(rates.values()):.3f}, MAE max {max(means.values()):.3f}, "
           f"SGP " + " ".join(f"{k}={v:.3f}" for k, v in sgp.items()) + f", {dt:.2f}s (<60s)")


def test_ac6_corruption_calibration():
    items = generate_corpus(synth_scenes(4, 400), mix={"direction": 1}, seed=4).items[:200]
    preds, corrupted, slots = corrupt_counts(items, 0.30, seed=1)
    rep = evaluate_corpus(items, preds)
    injected = corrupted / slots
    measured = 1 - rep.cat_count_acc.value
    buckets_ok = all(row.cat_count.hits <= row.cat.hits for row in rep.by_n_qa.values())
    ok = (len(items) == 200 and rep.cat_count_acc.hits == slots - corrupted and rep.cat_count_acc.total == slots
          and rep.cat_acc.value == 1.0 and buckets_ok)
    table = ", ".join(f"n={n}: {r.cat_count.hits}/{r.cat_count.total}<={r.cat.hits}/{r.cat.total}"
                      for n, r in rep.by_n_qa.items())
    record("AC6 corruption calibration", ok,
           f"injected {corrupted}/{slots}={injected:.4f}, measured error {measured:.4f}, "
           f"cat_acc {rep.cat_acc.value:.3f}; {table}")


def _cli(*args, cwd):
    return subprocess.run([sys.executable, "-m", "markupqa", *args], cwd=cwd, capture_output=True, text=True)


def _digest(paths):
    return {p.name: hashlib.sha256(p.read_bytes()).hexdigest() for p in sorted(paths)}


def test_ac7_determinism(tmp_path):
    runs = {}
    for jobs in ("1", "4"):
        d = tmp_path / f"j{jobs}"
        r = _cli("generate", "--synth", "500", "--seed", "7", "--jobs", jobs, "-o", str(d / "corpus.jsonl"), cwd=tmp_path)
        assert r.returncode == 0, r.stderr
        r = _cli("stats", "--corpus", str(d / "corpus.jsonl"), "--out-dir", str(d / "stats"), cwd=tmp_path)
        assert r.returncode == 0, r.stderr
        files = [d / "corpus.jsonl"] + [p for p in (d / "stats").iterdir() if p.name != "manifest.json"]
        runs[jobs] = _digest(files)
    same = runs["1"] == runs["4"]
    record("AC7 determinism", same and len(runs["1"]) > 2,
           f"jobs 1 vs 4: {len(runs['1'])} files, {'byte-identical' if same else 'DIFFER'}")


def test_ac8_statistics_shape():
    items = generate_corpus(synth_scenes(8, 2000), seed=8).items
    b = compute_stats(items)
    cnt = [k for k, v in b.count_hist.items() if v]
    nqa = [k for k, v in b.n_qa_hist.items() if v]
    dist = [b.distance_edges[i] for i, v in enumerate(b.distance_hist) if v]
    ok = (cnt and min(cnt) >= 0 and max(cnt) <= 20 and nqa and min(nqa) >= 1 and max(nqa) <= 6
          and dist and min(dist) >= 0 and max(dist) + 1 <= 40 and b.distance_overflow == 0
          and set(b.count_hist) == set(range(21)) and set(b.n_qa_hist) == set(range(1, 7)))
    record("AC8 statistics shape", ok,
           f"count support [{min(cnt)},{max(cnt)}] in [0,20], n-QA [{min(nqa)},{max(nqa)}] in [1,6], "
           f"distance [{min(dist):.0f},{max(dist) + 1:.0f}] m in [0,40], overflow {b.distance_overflow}")
