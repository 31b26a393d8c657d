import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from markupqa.evaluation import (
    EvalReport, PredictionRecord, UnknownItemId, accuracy_by_n_qa, evaluate_corpus, load_predictions,
    normalize_category, save_predictions, score_item,
)
from markupqa.generation import QAItem, TaskFamily, generate_corpus
from markupqa.perturb import corrupt_counts
from markupqa.scenes import synth_scenes


@pytest.fixture(scope="module")
def corpus():
    return generate_corpus(synth_scenes(21, 120), seed=21).items


def direction_item(targets, camera="back", item_id="d:0"):
    from markupqa.markup import target
    parts = " and ".join(target(n, c + ("s" if n != 1 else "")) for c, n in targets)
    return QAItem("d", TaskFamily.DIRECTION, "q", f"In the <cam>{camera}</cam>, {parts} are detected.",
                  {"camera": camera, "targets": [[c, n] for c, n in targets]}, len(targets), item_id)


def dist_item(d=5.0):
    return QAItem("r", TaskFamily.RELATIVE_DISTANCE, "q", f"A <obj>car</obj> is <dst>{d:.2f}</dst> m away.",
                  {"category": "car", "distance": d, "distance_exact": d}, 2, "r:0")


def test_normalize_category():
    assert normalize_category("trucks") == "truck"
    assert normalize_category("Car") == "car"
    assert normalize_category(" Traffic  Cones ") == "traffic cone"
    assert normalize_category("dragon") is None


def test_self_score(corpus):
    for it in corpus:
        s = score_item(it, it.answer_markup)
        for hits, total in (s.yes_no, s.cat, s.cat_count, s.cam):
            assert hits == total
        assert s.missing_slots == s.unparseable_slots == s.spurious_slots == 0
        assert s.distance_error in (None, 0.0) and s.x_error in (None, 0.0) and s.y_error in (None, 0.0)
        assert s.category_ok in (None, True)


def test_distance_error():
    s = score_item(dist_item(5.0), "It is a <obj>car</obj>, <dst>7.5</dst> meters out.")
    assert s.category_ok and s.distance_error == pytest.approx(2.5)


def test_multiset_matching():
    gt = direction_item([("truck", 3), ("car", 1)])
    s = score_item(gt, "In the <cam>back</cam>, <target><cnt>1</cnt> <obj>car</obj></target> and "
                       "<target><cnt>2</cnt> <obj>trucks</obj></target>.")
    assert s.cat == (2, 2) and s.cat_count == (1, 2) and s.cam == (1, 1)


def test_unknown_item_id():
    with pytest.raises(UnknownItemId):
        score_item(dist_item(), PredictionRecord("nope", ""))


def test_empty_predictions(corpus):
    rep = evaluate_corpus(corpus, [PredictionRecord(it.item_id, "") for it in corpus])
    for name in EvalReport._RATES:
        r = getattr(rep, name)
        assert r.hits == 0 and r.total > 0
    for name in EvalReport._MEANS:
        assert getattr(rep, name).n == 0 and getattr(rep, name).value is None
    assert rep.sgp.avg_sgp == 0.0
    assert rep.tallies["missing_slots"] > 0


def test_identity_report(corpus):
    rep = evaluate_corpus(corpus, [PredictionRecord(it.item_id, it.answer_markup) for it in corpus])
    for name in EvalReport._RATES:
        assert getattr(rep, name).value == 1.0, name
    for name in EvalReport._MEANS:
        assert getattr(rep, name).value == 0.0, name
    assert rep.sgp.bleu1 == rep.sgp.bleu4 == rep.sgp.rouge1_f == 1.0
    assert round(rep.sgp.meteor, 3) == 1.0
    assert all(row.cat.value == row.cat_count.value == 1.0 for row in rep.by_n_qa.values())
    d = json.loads(rep.to_json())
    assert d["cat_acc"]["numerator"] == d["cat_acc"]["denominator"] > 0
    assert "cat_count_acc" in rep.table()


def test_coverage_tallies(corpus):
    preds = [PredictionRecord(it.item_id, it.answer_markup) for it in corpus[:50]]
    preds += [PredictionRecord("ghost", "x"), PredictionRecord(corpus[0].item_id, "garbage")]
    rep = evaluate_corpus(corpus, preds)
    t = rep.tallies
    assert t["covered_items"] == 50 and t["missing_items"] == len(corpus) - 50
    assert t["unknown_ids"] == 1 and t["duplicate_ids"] == 1
    assert rep.cat_acc.value < 1.0


def test_spurious_and_unparseable():
    s = score_item(dist_item(), "<obj>car</obj> <dst>far</dst> <cam>front</cam> <ans>yes</ans>")
    assert s.unparseable_slots == 1 and s.distance_error is None and s.spurious_slots == 2


def test_cat_rd_tau():
    gt = [dist_item(5.0)]
    near = [PredictionRecord("r:0", "<obj>car</obj> <dst>5.9</dst>")]
    far = [PredictionRecord("r:0", "<obj>car</obj> <dst>6.5</dst>")]
    assert evaluate_corpus(gt, near).cat_rd_acc.value == 1.0
    assert evaluate_corpus(gt, far).cat_rd_acc.value == 0.0
    assert evaluate_corpus(gt, far, tau=2.0).cat_rd_acc.value == 1.0
    assert evaluate_corpus(gt, far).rd_mae.value == pytest.approx(1.5)


def test_by_n_qa_buckets():
    items = [direction_item([("car", 2)], item_id="a"), direction_item([("car", 1), ("bus", 2)], item_id="b")]
    preds = {"a": items[0].answer_markup, "b": "In the <cam>back</cam>, <target><cnt>1</cnt> <obj>car</obj></target>"}
    rows = accuracy_by_n_qa(items, preds)
    assert set(rows) == {1, 2}
    assert (rows[2].cat.hits, rows[2].cat.total, rows[2].cat_count.hits) == (1, 2, 1)
    assert rows[1].cat_count.value == 1.0


def test_corruption_exact_rate():
    items = generate_corpus(synth_scenes(4, 400), mix={"direction": 1}, seed=4).items[:200]
    preds, bad, slots = corrupt_counts(items, 0.3, seed=1)
    rep = evaluate_corpus(items, preds)
    assert rep.cat_count_acc.total == slots and rep.cat_count_acc.hits == slots - bad
    assert rep.cat_acc.value == 1.0
    for row in rep.by_n_qa.values():
        assert row.cat_count.hits <= row.cat.hits


def test_prediction_file_round_trip(tmp_path, corpus):
    preds = [PredictionRecord(it.item_id, it.answer_markup) for it in corpus[:10]]
    p = tmp_path / "p.jsonl"
    save_predictions(preds, p)
    assert load_predictions(p) == preds


# -- properties ------------------------------------------------------------

@settings(max_examples=10)
@given(st.integers(0, 2**32))
def test_order_independence(corpus, seed):
    rnd = random.Random(seed)
    preds = [PredictionRecord(it.item_id, it.answer_markup if rnd.random() < 0.7 else "") for it in corpus]
    shuffled = preds[:]
    rnd.shuffle(shuffled)
    assert evaluate_corpus(corpus, preds).to_dict() == evaluate_corpus(corpus, shuffled).to_dict()


@settings(max_examples=100)
@given(st.data())
def test_single_corruption_never_helps(corpus, data):
    it = data.draw(st.sampled_from([i for i in corpus if "<cnt>" in i.answer_markup or "<ans>" in i.answer_markup]))
    base = evaluate_corpus([it], {it.item_id: it.answer_markup})
    if "<cnt>" in it.answer_markup:
        bad = it.answer_markup.replace("<cnt>", "<cnt>9", 1)
    elif "<ans>yes" in it.answer_markup:
        bad = it.answer_markup.replace("<ans>yes", "<ans>no", 1)
    else:
        bad = it.answer_markup.replace("<ans>no", "<ans>yes", 1)
    worse = evaluate_corpus([it], {it.item_id: bad})
    for name in EvalReport._RATES:
        a, b = getattr(base, name).value, getattr(worse, name).value
        if a is not None:
            assert b <= a


@given(st.text(max_size=200))
def test_garbage_never_aborts(corpus, text):
    for it in corpus[:8]:
        s = score_item(it, text)
        assert s.cat[0] <= s.cat[1] and s.cat_count[0] <= s.cat[0] + s.cat[1]


@settings(max_examples=15)
@given(st.floats(0, 1), st.integers(0, 100))
def test_cat_count_never_exceeds_cat(corpus, frac, seed):
    preds, _, _ = corrupt_counts(corpus, frac, seed)
    rep = evaluate_corpus(corpus, preds)
    assert rep.cat_count_acc.hits <= rep.cat_acc.hits
    for row in rep.by_n_qa.values():
        assert row.cat_count.hits <= row.cat.hits
