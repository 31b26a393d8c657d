"""Rule-based generation of Markup-QA items from scenes.

Four task families are produced: object presence (yes/no or count),
objects per camera direction (multi-target), distance to the closest object
and location of the closest object.  Every answer is rendered from a
template in the shipped bank and is guaranteed to strict-parse and to
extract back to its ground truth.
"""

from __future__ import annotations

import enum
import hashlib
import json
import random
from collections import Counter
from dataclasses import asdict, dataclass, field, replace
from decimal import ROUND_HALF_UP, Decimal
from importlib import resources
from pathlib import Path
from string import Formatter
from typing import Iterable, Mapping

from .markup import (
    Camera, Category, Distance, Location, TargetPair, YesNo, extract_answers,
    parse_markup, target,
)
from .scenes import (
    DEFAULT_RADIUS, ConfigError, Scene, SchemaError, closest_object, objects_in_camera,
)
from .vocab import DEFAULT_VOCAB, CameraId, CategoryVocabulary

MAX_COUNT = 20
MAX_TARGETS = 6


class TaskFamily(str, enum.Enum):
    PRESENCE = "presence"
    DIRECTION = "direction"
    RELATIVE_DISTANCE = "relative_distance"
    RELATIVE_LOCATION = "relative_location"


FAMILIES = tuple(TaskFamily)


class Unsatisfiable(Exception):
    """No valid question of the requested family exists for a scene."""


class TemplateError(ValueError):
    pass


# -- numbers ---------------------------------------------------------------

def round2(value: float) -> float:
    """Round half away from zero to two decimals."""
    d = Decimal(repr(value)).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP)
    return float(d) + 0.0  # + 0.0 folds -0.0 into 0.0


def fmt2(value: float) -> str:
    return f"{round2(value):.2f}"


# -- templates -------------------------------------------------------------

# Placeholders each bank section may use, split into question/answer sides.
SLOT_CONTRACT = {
    "presence_exists": ({"category", "categories"}, {"category", "categories"}),
    "presence_count": ({"category", "categories"}, {"target", "be"}),
    "direction": ({"camera"}, {"camera", "targets", "be"}),
    "relative_distance": (set(), {"category", "distance"}),
    "relative_location": (set(), {"category", "location"}),
}

SECTION_FAMILY = {
    "presence_exists": TaskFamily.PRESENCE,
    "presence_count": TaskFamily.PRESENCE,
    "direction": TaskFamily.DIRECTION,
    "relative_distance": TaskFamily.RELATIVE_DISTANCE,
    "relative_location": TaskFamily.RELATIVE_LOCATION,
}


@dataclass(frozen=True)
class Template:
    family: TaskFamily
    variant: str
    question_pattern: str
    answer_pattern: str


def _fields(pattern: str) -> set[str]:
    return {name for _, name, _, _ in Formatter().parse(pattern) if name}


@dataclass(frozen=True)
class TemplateBank:
    sections: Mapping[str, dict]

    @classmethod
    def default(cls) -> "TemplateBank":
        text = resources.files("markupqa").joinpath("data/templates.json").read_text("utf-8")
        return cls.from_json(text)

    @classmethod
    def load(cls, path: str | Path) -> "TemplateBank":
        return cls.from_json(Path(path).read_text("utf-8"))

    @classmethod
    def from_json(cls, text: str) -> "TemplateBank":
        bank = cls(json.loads(text))
        bank.check()
        return bank

    def pick(self, section: str, outcome: str, rng: random.Random) -> Template:
        sec = self.sections[section]
        q = rng.choice(sec["questions"])
        a = rng.choice(sec["answers"][outcome])
        return Template(SECTION_FAMILY[section], section, q, a)

    def check(self, vocab: CategoryVocabulary = DEFAULT_VOCAB) -> None:
        """Raise ``TemplateError`` unless every pattern honours its slot
        contract and renders to markup that extracts back exactly."""
        for name, (qslots, aslots) in SLOT_CONTRACT.items():
            sec = self.sections.get(name)
            if not sec or not sec.get("questions") or not sec.get("answers"):
                raise TemplateError(f"template section {name!r} missing or empty")
            for q in sec["questions"]:
                if not _fields(q) <= qslots:
                    raise TemplateError(f"{name}: question uses {_fields(q) - qslots}: {q!r}")
            for outcome, answers in sec["answers"].items():
                if not answers:
                    raise TemplateError(f"{name}/{outcome}: no answers")
                for a in answers:
                    if not _fields(a) <= aslots:
                        raise TemplateError(f"{name}: answer uses {_fields(a) - aslots}: {a!r}")
                    for item in _probe_items(name, outcome, a, vocab):
                        try:
                            doc = parse_markup(item.answer_markup)
                        except ValueError as e:
                            raise TemplateError(f"{name}: {a!r} renders invalid markup: {e}") from None
                        if extract_answers(doc, vocab) != item.expected_answers():
                            raise TemplateError(f"{name}: {a!r} does not extract back to its ground truth")


# -- items -----------------------------------------------------------------

@dataclass(frozen=True)
class QAItem:
    scene_id: str
    family: TaskFamily
    question: str
    answer_markup: str
    ground_truth: dict
    n_qa: int
    item_id: str = ""

    def expected_answers(self) -> list:
        """Typed answers that ``extract_answers`` must return for this item."""
        gt = self.ground_truth
        if self.family is TaskFamily.PRESENCE:
            if gt["variant"] == "exists":
                return [YesNo(gt["exists"])]
            return [TargetPair(gt["count"], gt["category"])]
        if self.family is TaskFamily.DIRECTION:
            return [Camera(CameraId(gt["camera"]))] + [TargetPair(n, c) for c, n in gt["targets"]]
        if self.family is TaskFamily.RELATIVE_DISTANCE:
            return [Category(gt["category"]), Distance(gt["distance"])]
        return [Category(gt["category"]), Location(gt["x"], gt["y"])]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["family"] = self.family.value
        return {k: d[k] for k in ("item_id", "scene_id", "family", "question", "answer_markup", "ground_truth", "n_qa")}

    @classmethod
    def from_dict(cls, d: dict) -> "QAItem":
        gt = dict(d["ground_truth"])
        if "targets" in gt:
            gt["targets"] = [[c, n] for c, n in gt["targets"]]
        return cls(
            scene_id=d["scene_id"], family=TaskFamily(d["family"]), question=d["question"],
            answer_markup=d["answer_markup"], ground_truth=gt, n_qa=int(d["n_qa"]),
            item_id=d.get("item_id", ""),
        )


def _be(targets: list[tuple[str, int]]) -> str:
    return "is" if len(targets) == 1 and targets[0][1] == 1 else "are"


def _join_targets(parts: list[str]) -> str:
    if len(parts) == 1:
        return parts[0]
    return ", ".join(parts[:-1]) + " and " + parts[-1]


def _presence_item(scene_id, tpl: Template, vocab, category, exists=None, count=None) -> QAItem:
    q = tpl.question_pattern.format(category=category, categories=vocab.plural(category))
    if tpl.variant == "presence_exists":
        a = tpl.answer_pattern.format(category=category, categories=vocab.plural(category))
        gt = {"variant": "exists", "category": category, "exists": exists}
    else:
        a = tpl.answer_pattern.format(
            target=target(count, vocab.surface(category, count)), be=_be([(category, count)]))
        gt = {"variant": "count", "category": category, "count": count}
    return QAItem(scene_id, TaskFamily.PRESENCE, q, a, gt, 1)


def _direction_item(scene_id, tpl: Template, vocab, cam: CameraId, targets) -> QAItem:
    parts = [target(n, vocab.surface(c, n)) for c, n in targets]
    q = tpl.question_pattern.format(camera=cam.surface)
    a = tpl.answer_pattern.format(camera=cam.surface, targets=_join_targets(parts), be=_be(targets))
    gt = {"camera": cam.value, "targets": [[c, n] for c, n in targets]}
    return QAItem(scene_id, TaskFamily.DIRECTION, q, a, gt, len(targets))


def _distance_item(scene_id, tpl: Template, category, dist) -> QAItem:
    a = tpl.answer_pattern.format(category=category, distance=fmt2(dist))
    gt = {"category": category, "distance": round2(dist), "distance_exact": dist}
    return QAItem(scene_id, TaskFamily.RELATIVE_DISTANCE, tpl.question_pattern, a, gt, 2)


def _location_item(scene_id, tpl: Template, category, x, y) -> QAItem:
    a = tpl.answer_pattern.format(category=category, location=f"({fmt2(x)}, {fmt2(y)})")
    gt = {"category": category, "x": round2(x), "y": round2(y), "x_exact": x, "y_exact": y}
    return QAItem(scene_id, TaskFamily.RELATIVE_LOCATION, tpl.question_pattern, a, gt, 2)


def _probe_items(section: str, outcome: str, answer: str, vocab) -> Iterable[QAItem]:
    # Representative slot values used to check a pattern once at load time.
    names = vocab.names
    if section == "presence_exists":
        for cat in names:
            tpl = Template(TaskFamily.PRESENCE, section, "", answer)
            yield _presence_item("probe", tpl, vocab, cat, exists=(outcome == "yes"))
    elif section == "presence_count":
        tpl = Template(TaskFamily.PRESENCE, section, "", answer)
        for cat in names:
            for n in (0, 1, 2, MAX_COUNT):
                yield _presence_item("probe", tpl, vocab, cat, count=n)
    elif section == "direction":
        tpl = Template(TaskFamily.DIRECTION, section, "", answer)
        for cam in CameraId:
            for k in range(1, min(MAX_TARGETS, len(names)) + 1):
                yield _direction_item("probe", tpl, vocab, cam, [(c, k) for c in names[:k]])
            yield _direction_item("probe", tpl, vocab, cam, [(names[0], 1)])
    elif section == "relative_distance":
        tpl = Template(TaskFamily.RELATIVE_DISTANCE, section, "", answer)
        for cat in names:
            yield _distance_item("probe", tpl, cat, 3.14159)
    elif section == "relative_location":
        tpl = Template(TaskFamily.RELATIVE_LOCATION, section, "", answer)
        for cat in names:
            yield _location_item("probe", tpl, cat, -3.426, 1.414)


# -- generators ------------------------------------------------------------

def gen_presence(scene: Scene, rng: random.Random, bank: TemplateBank,
                 vocab: CategoryVocabulary = DEFAULT_VOCAB, *, max_count: int = MAX_COUNT,
                 variant: str | None = None, category: str | None = None) -> QAItem:
    """Existence (``<ans>``) or count (``<target>``) question about one category.

    Present and absent categories are chosen with equal probability when
    both exist.  Count questions whose answer exceeds ``max_count`` are never
    produced; forcing one raises ``Unsatisfiable``.
    """
    if not vocab.names:
        raise Unsatisfiable("empty vocabulary")
    counts = Counter(o.category for o in scene.objects)
    variant = variant or rng.choice(("exists", "count"))
    if variant not in ("exists", "count"):
        raise ValueError(f"unknown presence variant {variant!r}")
    if category is None:
        present = [c for c in vocab.names if counts[c] > 0]
        absent = [c for c in vocab.names if counts[c] == 0]
        if variant == "count":
            present = [c for c in present if counts[c] <= max_count]
        pools = [p for p in (present, absent) if p]
        if not pools:
            raise Unsatisfiable("no countable category")
        category = rng.choice(rng.choice(pools))
    elif variant == "count" and counts[category] > max_count:
        raise Unsatisfiable(f"{counts[category]} {category} exceeds the count limit {max_count}")
    n = counts[category]
    if variant == "exists":
        tpl = bank.pick("presence_exists", "yes" if n else "no", rng)
        return _presence_item(scene.scene_id, tpl, vocab, category, exists=n > 0)
    tpl = bank.pick("presence_count", "default", rng)
    return _presence_item(scene.scene_id, tpl, vocab, category, count=n)


def gen_direction(scene: Scene, rng: random.Random, bank: TemplateBank,
                  vocab: CategoryVocabulary = DEFAULT_VOCAB, *, max_count: int = MAX_COUNT,
                  max_targets: int = MAX_TARGETS) -> QAItem:
    """Enumerate every (count, category) seen by one camera.

    Eligible cameras hold 1..max_targets categories, none above max_count.
    Targets are ordered by descending count, then name.
    """
    eligible = []
    for cam in CameraId:
        per_cat = objects_in_camera(scene, cam)
        if 1 <= len(per_cat) <= max_targets and max(per_cat.values()) <= max_count:
            eligible.append((cam, per_cat))
    if not eligible:
        raise Unsatisfiable("no camera with an enumerable set of objects")
    cam, per_cat = rng.choice(eligible)
    targets = sorted(per_cat.items(), key=lambda kv: (-kv[1], kv[0]))
    tpl = bank.pick("direction", "default", rng)
    return _direction_item(scene.scene_id, tpl, vocab, cam, targets)


def gen_relative_distance(scene: Scene, rng: random.Random, bank: TemplateBank,
                          vocab: CategoryVocabulary = DEFAULT_VOCAB, *,
                          radius: float = DEFAULT_RADIUS) -> QAItem:
    hit = closest_object(scene, radius)
    if hit is None:
        raise Unsatisfiable(f"no object within {radius} m")
    obj, dist = hit
    return _distance_item(scene.scene_id, bank.pick("relative_distance", "default", rng), obj.category, dist)


def gen_relative_location(scene: Scene, rng: random.Random, bank: TemplateBank,
                          vocab: CategoryVocabulary = DEFAULT_VOCAB, *,
                          radius: float = DEFAULT_RADIUS) -> QAItem:
    hit = closest_object(scene, radius)
    if hit is None:
        raise Unsatisfiable(f"no object within {radius} m")
    obj, _ = hit
    tpl = bank.pick("relative_location", "default", rng)
    return _location_item(scene.scene_id, tpl, obj.category, obj.x, obj.y)


# -- corpus ----------------------------------------------------------------

@dataclass(frozen=True)
class GenConfig:
    radius: float = DEFAULT_RADIUS
    max_count: int = MAX_COUNT
    max_targets: int = MAX_TARGETS
    # None: one attempt per enabled family; otherwise extra draws by weight.
    items_per_scene: int | None = None
    mix: dict = field(default_factory=lambda: {f.value: 1.0 for f in FAMILIES})

    def check(self) -> None:
        if self.radius <= 0:
            raise ConfigError("radius must be positive")
        if self.max_count < 0 or self.max_targets < 1:
            raise ConfigError("max_count must be >= 0 and max_targets >= 1")
        unknown = set(self.mix) - {f.value for f in FAMILIES}
        if unknown:
            raise ConfigError(f"unknown families in mix: {sorted(unknown)}")
        if any(w < 0 for w in self.mix.values()) or not any(w > 0 for w in self.mix.values()):
            raise ConfigError("mix weights must be >= 0 and not all zero")
        if self.items_per_scene is not None and self.items_per_scene < 0:
            raise ConfigError("items_per_scene must be >= 0")


def scene_rng(seed: int, scene_id: str) -> random.Random:
    """Independent stream per scene so parallel and serial runs agree."""
    digest = hashlib.sha256(f"{seed}:{scene_id}".encode("utf-8")).digest()
    return random.Random(int.from_bytes(digest[:16], "big"))


def _generate_one(family: TaskFamily, scene, rng, bank, vocab, cfg: GenConfig) -> QAItem:
    if family is TaskFamily.PRESENCE:
        return gen_presence(scene, rng, bank, vocab, max_count=cfg.max_count)
    if family is TaskFamily.DIRECTION:
        return gen_direction(scene, rng, bank, vocab, max_count=cfg.max_count, max_targets=cfg.max_targets)
    if family is TaskFamily.RELATIVE_DISTANCE:
        return gen_relative_distance(scene, rng, bank, vocab, radius=cfg.radius)
    return gen_relative_location(scene, rng, bank, vocab, radius=cfg.radius)


def generate_scene(scene: Scene, seed: int, bank: TemplateBank,
                   vocab: CategoryVocabulary = DEFAULT_VOCAB,
                   config: GenConfig | None = None) -> tuple[list[QAItem], Counter]:
    """Items for one scene plus a tally of skipped (unsatisfiable) families."""
    cfg = config or GenConfig()
    rng = scene_rng(seed, scene.scene_id)
    enabled = [f for f in FAMILIES if cfg.mix.get(f.value, 0) > 0]
    plan = list(enabled)
    if cfg.items_per_scene is not None:
        extra = cfg.items_per_scene - len(plan)
        if extra < 0:
            plan = plan[: cfg.items_per_scene]
        else:
            weights = [cfg.mix[f.value] for f in enabled]
            plan += rng.choices(enabled, weights, k=extra)
    items, skipped = [], Counter()
    for family in plan:
        try:
            item = _generate_one(family, scene, rng, bank, vocab, cfg)
        except Unsatisfiable:
            skipped[family.value] += 1
            continue
        items.append(replace(item, item_id=f"{scene.scene_id}:{len(items)}"))
    return items, skipped


@dataclass
class Corpus:
    items: list[QAItem]
    family_counts: dict
    skipped: dict

    def manifest(self) -> dict:
        return {
            "n_items": len(self.items),
            "family_counts": dict(self.family_counts),
            "skipped": dict(self.skipped),
        }


def generate_corpus(scenes: Iterable[Scene], mix: Mapping[str, float] | None = None, seed: int = 0,
                    bank: TemplateBank | None = None, vocab: CategoryVocabulary = DEFAULT_VOCAB,
                    config: GenConfig | None = None) -> Corpus:
    """Generate items for every scene, in scene order."""
    cfg = config or GenConfig()
    if mix is not None:
        cfg = replace(cfg, mix=dict(mix))
    cfg.check()
    bank = bank or TemplateBank.default()
    items, skipped = [], Counter()
    for scene in scenes:
        got, sk = generate_scene(scene, seed, bank, vocab, cfg)
        items.extend(got)
        skipped.update(sk)
    return assemble_corpus(items, skipped)


def assemble_corpus(items: list[QAItem], skipped: Counter) -> Corpus:
    counts = {f.value: 0 for f in FAMILIES}
    for it in items:
        counts[it.family.value] += 1
    return Corpus(items, counts, {f.value: skipped.get(f.value, 0) for f in FAMILIES})


def dump_item(item: QAItem) -> str:
    return json.dumps(item.to_dict(), ensure_ascii=False, separators=(",", ":"))


def save_corpus(items: Iterable[QAItem], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for it in items:
            f.write(dump_item(it) + "\n")


def load_corpus(path: str | Path) -> list[QAItem]:
    items = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                items.append(QAItem.from_dict(json.loads(line)))
            except (KeyError, TypeError, ValueError) as e:
                raise SchemaError(lineno, "<record>", f"bad corpus record: {e}") from None
    return items
