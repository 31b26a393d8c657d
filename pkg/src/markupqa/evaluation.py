"""Score model outputs against a generated corpus.

Each prediction is parsed leniently, answers are pulled out of its markup
and compared slot by slot with the ground truth.  Sentence quality is
scored on the demarked text with the SGP metrics.  Every rate in the
report carries its numerator and denominator.
"""

from __future__ import annotations

import json
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from pathlib import Path
from typing import Iterable, Mapping

from .generation import QAItem, TaskFamily
from .markup import (
    Camera, Category, Distance, ExtractionFailure, Location, TagKind, TargetPair, YesNo,
    extract_answers, parse_markup, strip_markup,
)
from .metrics import SgpScores, sgp_suite
from .scenes import SchemaError
from .vocab import DEFAULT_VOCAB, CategoryVocabulary

DEFAULT_TAU = 1.0


class UnknownItemId(KeyError):
    pass


@dataclass(frozen=True)
class PredictionRecord:
    item_id: str
    predicted_text: str


def normalize_category(surface: str, vocab: CategoryVocabulary = DEFAULT_VOCAB) -> str | None:
    """Canonical singular category, or ``None`` (never matches anything)."""
    return vocab.normalize(surface)


@dataclass
class Rate:
    hits: int = 0
    total: int = 0

    @property
    def value(self) -> float | None:
        return self.hits / self.total if self.total else None

    def add(self, hits: int, total: int) -> None:
        self.hits += hits
        self.total += total

    def to_dict(self) -> dict:
        return {"value": self.value, "numerator": self.hits, "denominator": self.total}


@dataclass
class Mean:
    total: float = 0.0
    n: int = 0

    @property
    def value(self) -> float | None:
        return self.total / self.n if self.n else None

    def add(self, x: float) -> None:
        self.total += x
        self.n += 1

    def to_dict(self) -> dict:
        return {"value": self.value, "sum": self.total, "denominator": self.n}


@dataclass(frozen=True)
class ItemScore:
    item_id: str
    family: TaskFamily
    n_qa: int
    yes_no: tuple[int, int] = (0, 0)
    cat: tuple[int, int] = (0, 0)
    cat_count: tuple[int, int] = (0, 0)
    cam: tuple[int, int] = (0, 0)
    category_ok: bool | None = None  # distance/location families
    distance_error: float | None = None
    x_error: float | None = None
    y_error: float | None = None
    missing_slots: int = 0
    unparseable_slots: int = 0
    spurious_slots: int = 0
    markup_warnings: int = 0


def _first(answers, cls):
    for a in answers:
        if isinstance(a, cls):
            return a
    return None


def _has_failure(answers, kind: TagKind) -> bool:
    return any(isinstance(a, ExtractionFailure) and a.kind is kind for a in answers)


def score_item(gt: QAItem, pred: PredictionRecord | str, vocab: CategoryVocabulary = DEFAULT_VOCAB,
               mode: str = "lenient") -> ItemScore:
    """Compare one prediction with its ground-truth item."""
    if isinstance(pred, PredictionRecord):
        if pred.item_id != gt.item_id:
            raise UnknownItemId(pred.item_id)
        text = pred.predicted_text
    else:
        text = pred
    doc = parse_markup(text, "lenient") if mode == "lenient" else parse_markup(text, mode)
    answers = extract_answers(doc, vocab)
    gtd = gt.ground_truth
    missing = unparseable = 0
    consumed = 0
    out: dict = {}

    def single(cls, kind: TagKind):
        nonlocal missing, unparseable, consumed
        a = _first(answers, cls)
        if a is None:
            if _has_failure(answers, kind):
                unparseable += 1
                consumed += 1
            else:
                missing += 1
        else:
            consumed += 1
        return a

    def targets(expected: list[tuple[int, str]]):
        nonlocal missing, unparseable, consumed
        pairs = [a for a in answers if isinstance(a, TargetPair)]
        consumed += min(len(pairs), len(expected))
        missing += max(0, len(expected) - len(pairs))
        unparseable += sum(1 for p in pairs[: len(expected)] if p.count is None or p.category is None)
        gt_cats = Counter(c for _, c in expected)
        gt_pairs = Counter(expected)
        pr_cats = Counter(p.category for p in pairs if p.category is not None)
        pr_pairs = Counter((p.count, p.category) for p in pairs if p.count is not None and p.category is not None)
        out["cat"] = (sum((gt_cats & pr_cats).values()), len(expected))
        out["cat_count"] = (sum((gt_pairs & pr_pairs).values()), len(expected))

    fam = gt.family
    if fam is TaskFamily.PRESENCE:
        if gtd["variant"] == "exists":
            a = single(YesNo, TagKind.ANS)
            out["yes_no"] = (int(a is not None and a.value == gtd["exists"]), 1)
        else:
            targets([(gtd["count"], gtd["category"])])
    elif fam is TaskFamily.DIRECTION:
        a = single(Camera, TagKind.CAM)
        out["cam"] = (int(a is not None and a.camera.value == gtd["camera"]), 1)
        targets([(n, c) for c, n in gtd["targets"]])
    else:
        c = single(Category, TagKind.OBJ)
        out["category_ok"] = c is not None and c.name == gtd["category"]
        if fam is TaskFamily.RELATIVE_DISTANCE:
            d = single(Distance, TagKind.DST)
            if d is not None:
                out["distance_error"] = abs(d.meters - gtd["distance"])
        else:
            loc = single(Location, TagKind.LOC)
            if loc is not None:
                out["x_error"] = abs(loc.x - gtd["x"])
                out["y_error"] = abs(loc.y - gtd["y"])
    return ItemScore(
        item_id=gt.item_id, family=fam, n_qa=gt.n_qa, missing_slots=missing,
        unparseable_slots=unparseable, spurious_slots=max(0, len(answers) - consumed),
        markup_warnings=len(doc.warnings), **out,
    )


@dataclass
class NQaRow:
    cat: Rate = field(default_factory=Rate)
    cat_count: Rate = field(default_factory=Rate)
    items: int = 0

    def to_dict(self) -> dict:
        return {"items": self.items, "cat_acc": self.cat.to_dict(), "cat_count_acc": self.cat_count.to_dict()}


@dataclass
class EvalReport:
    sgp: SgpScores
    tau: float
    yes_no_acc: Rate = field(default_factory=Rate)
    cat_acc: Rate = field(default_factory=Rate)
    cat_count_acc: Rate = field(default_factory=Rate)
    cam_acc: Rate = field(default_factory=Rate)
    rd_mae: Mean = field(default_factory=Mean)
    cat_rd_acc: Rate = field(default_factory=Rate)
    rd_cat_acc: Rate = field(default_factory=Rate)
    loc_x_mae: Mean = field(default_factory=Mean)
    loc_y_mae: Mean = field(default_factory=Mean)
    loc_cat_acc: Rate = field(default_factory=Rate)
    by_n_qa: dict[int, NQaRow] = field(default_factory=dict)
    tallies: dict = field(default_factory=dict)

    _RATES = ("yes_no_acc", "cat_acc", "cat_count_acc", "cam_acc", "cat_rd_acc", "rd_cat_acc", "loc_cat_acc")
    _MEANS = ("rd_mae", "loc_x_mae", "loc_y_mae")

    def to_dict(self) -> dict:
        d = {"sgp": self.sgp.to_dict(), "tau": self.tau}
        for name in self._RATES + self._MEANS:
            d[name] = getattr(self, name).to_dict()
        d["by_n_qa"] = {str(n): row.to_dict() for n, row in sorted(self.by_n_qa.items())}
        d["tallies"] = dict(self.tallies)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def table(self) -> str:
        """Flat plain-text rendering."""
        def fmt(v):
            return "n/a" if v is None else f"{v:.3f}"

        lines = ["metric            value     num/den"]
        for k, v in self.sgp.to_dict().items():
            lines.append(f"{k:<17} {v:.3f}")
        for name in self._RATES:
            r = getattr(self, name)
            lines.append(f"{name:<17} {fmt(r.value):<9} {r.hits}/{r.total}")
        for name in self._MEANS:
            m = getattr(self, name)
            lines.append(f"{name:<17} {fmt(m.value):<9} n={m.n}")
        lines.append("")
        lines.append(f"{'n-QA':<5} {'items':<6} {'cat_acc':<20} cat_count_acc")
        for n, row in sorted(self.by_n_qa.items()):
            cat = f"{fmt(row.cat.value)} ({row.cat.hits}/{row.cat.total})"
            cc = f"{fmt(row.cat_count.value)} ({row.cat_count.hits}/{row.cat_count.total})"
            lines.append(f"{n:<5} {row.items:<6} {cat:<20} {cc}")
        lines.append("")
        for k, v in sorted(self.tallies.items()):
            lines.append(f"{k}: {v}")
        return "\n".join(lines) + "\n"


def _as_mapping(predictions) -> tuple[dict[str, str], int, list[str]]:
    if isinstance(predictions, Mapping):
        return dict(predictions), 0, []
    out, dups, order = {}, 0, []
    for p in predictions:
        if p.item_id in out:
            dups += 1  # first occurrence wins
            continue
        out[p.item_id] = p.predicted_text
        order.append(p.item_id)
    return out, dups, order


def _score_pair(args, vocab, mode):
    gt, text = args
    return score_item(gt, text, vocab, mode)


def score_all(gt_corpus: list[QAItem], texts: list[str], vocab=DEFAULT_VOCAB, mode="lenient",
              jobs: int = 1) -> list[ItemScore]:
    fn = partial(_score_pair, vocab=vocab, mode=mode)
    pairs = list(zip(gt_corpus, texts))
    if jobs > 1 and len(pairs) > 1:
        with ProcessPoolExecutor(jobs) as ex:
            return list(ex.map(fn, pairs, chunksize=max(1, len(pairs) // (jobs * 4))))
    return [fn(p) for p in pairs]


def aggregate_by_n_qa(scores: Iterable[ItemScore]) -> dict[int, NQaRow]:
    rows: dict[int, NQaRow] = {}
    for s in scores:
        if s.family is not TaskFamily.DIRECTION:
            continue
        row = rows.setdefault(s.n_qa, NQaRow())
        row.items += 1
        row.cat.add(*s.cat)
        row.cat_count.add(*s.cat_count)
    return dict(sorted(rows.items()))


def evaluate_corpus(gt_corpus: list[QAItem], predictions: Iterable[PredictionRecord] | Mapping[str, str],
                    tau: float = DEFAULT_TAU, vocab: CategoryVocabulary = DEFAULT_VOCAB,
                    mode: str = "lenient", jobs: int = 1) -> EvalReport:
    """Full report.  GT items without a prediction are scored as empty output."""
    preds, dups, _ = _as_mapping(predictions)
    gt_ids = [it.item_id for it in gt_corpus]
    gt_id_set = set(gt_ids)
    unknown = sorted(set(preds) - gt_id_set)
    texts = [preds.get(i, "") for i in gt_ids]
    scores = score_all(gt_corpus, texts, vocab, mode, jobs)

    refs = [strip_markup(parse_markup(it.answer_markup, "lenient")) for it in gt_corpus]
    hyps = [strip_markup(parse_markup(t, "lenient")) for t in texts]
    rep = EvalReport(sgp=sgp_suite(refs, hyps), tau=tau)

    for s in scores:
        rep.yes_no_acc.add(*s.yes_no)
        rep.cat_acc.add(*s.cat)
        rep.cat_count_acc.add(*s.cat_count)
        rep.cam_acc.add(*s.cam)
        if s.family is TaskFamily.RELATIVE_DISTANCE:
            rep.rd_cat_acc.add(int(bool(s.category_ok)), 1)
            ok = bool(s.category_ok) and s.distance_error is not None and s.distance_error <= tau
            rep.cat_rd_acc.add(int(ok), 1)
            if s.distance_error is not None:
                rep.rd_mae.add(s.distance_error)
        elif s.family is TaskFamily.RELATIVE_LOCATION:
            rep.loc_cat_acc.add(int(bool(s.category_ok)), 1)
            if s.x_error is not None:
                rep.loc_x_mae.add(s.x_error)
                rep.loc_y_mae.add(s.y_error)
    rep.by_n_qa = aggregate_by_n_qa(scores)
    covered = sum(1 for i in gt_ids if i in preds)
    rep.tallies = {
        "gt_items": len(gt_ids),
        "predictions": len(preds) + dups,
        "covered_items": covered,
        "missing_items": len(gt_ids) - covered,
        "coverage": covered / len(gt_ids) if gt_ids else None,
        "unknown_ids": len(unknown),
        "duplicate_ids": dups,
        "missing_slots": sum(s.missing_slots for s in scores),
        "unparseable_slots": sum(s.unparseable_slots for s in scores),
        "spurious_slots": sum(s.spurious_slots for s in scores),
        "malformed_predictions": sum(1 for s in scores if s.markup_warnings),
    }
    return rep


def accuracy_by_n_qa(gt_corpus: list[QAItem], predictions, vocab: CategoryVocabulary = DEFAULT_VOCAB,
                     mode: str = "lenient") -> dict[int, NQaRow]:
    """Direction-family slot accuracies bucketed by targets per sentence."""
    preds, _, _ = _as_mapping(predictions)
    items = [it for it in gt_corpus if it.family is TaskFamily.DIRECTION]
    return aggregate_by_n_qa(score_all(items, [preds.get(it.item_id, "") for it in items], vocab, mode))


# -- files -----------------------------------------------------------------

def load_predictions(path: str | Path) -> list[PredictionRecord]:
    out = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                item_id, text = rec["item_id"], rec["predicted_text"]
            except (json.JSONDecodeError, KeyError, TypeError) as e:
                raise SchemaError(lineno, "<record>", f"bad prediction record: {e}") from None
            if not isinstance(item_id, str) or not isinstance(text, str):
                raise SchemaError(lineno, "item_id/predicted_text", "must be strings")
            out.append(PredictionRecord(item_id, text))
    return out


def save_predictions(preds: Iterable[PredictionRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for p in preds:
            rec = {"item_id": p.item_id, "predicted_text": p.predicted_text}
            f.write(json.dumps(rec, ensure_ascii=False) + "\n")
