"""Ego-frame scene annotations, ingestion and a seeded synthetic source.

Coordinates are meters in the ego frame: ``x`` forward, ``y`` left.  Each
object is visible from exactly one of the six cameras.
"""

from __future__ import annotations

import bisect
import json
import math
import random
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .vocab import DEFAULT_VOCAB, CameraId, CategoryVocabulary

DEFAULT_RADIUS = 40.0

# Counterclockwise from the forward axis; each camera owns a 60 degree sector.
SECTOR_ORDER = (
    CameraId.FRONT,
    CameraId.FRONT_LEFT,
    CameraId.BACK_LEFT,
    CameraId.BACK,
    CameraId.BACK_RIGHT,
    CameraId.FRONT_RIGHT,
)
_EDGES = (-150.0, -90.0, -30.0, 30.0, 90.0, 150.0)
_BY_EDGE = SECTOR_ORDER[3:] + SECTOR_ORDER[:4]


class SchemaError(ValueError):
    def __init__(self, line: int, field: str, message: str = ""):
        super().__init__(f"line {line}: bad field {field!r}" + (f": {message}" if message else ""))
        self.line = line
        self.field = field


class UnknownCategory(ValueError):
    def __init__(self, value: str, line: int | None = None):
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}unknown category {value!r}")
        self.value = value
        self.line = line


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SceneObject:
    category: str
    x: float
    y: float
    camera: CameraId

    @property
    def distance(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y)

    def to_dict(self) -> dict:
        return {"category": self.category, "x": self.x, "y": self.y, "camera": self.camera.value}


@dataclass(frozen=True)
class Scene:
    scene_id: str
    objects: tuple[SceneObject, ...] = ()

    def __post_init__(self):
        if not self.scene_id:
            raise ValueError("scene_id must be non-empty")
        object.__setattr__(self, "objects", tuple(self.objects))

    def to_dict(self) -> dict:
        return {"scene_id": self.scene_id, "objects": [o.to_dict() for o in self.objects]}


def camera_for_bearing(x: float, y: float) -> CameraId:
    """Camera whose sector contains the bearing ``atan2(y, x)``.

    Front covers [-30, 30) degrees; sectors continue counterclockwise.
    """
    deg = math.degrees(math.atan2(y, x))
    # compare against the edges directly; shifting by 30 first can round across one
    return _BY_EDGE[bisect.bisect_right(_EDGES, deg)]


def _parse_object(raw, lineno: int, vocab: CategoryVocabulary) -> SceneObject:
    if not isinstance(raw, dict):
        raise SchemaError(lineno, "objects", "object entry must be a mapping")
    for key in ("category", "x", "y", "camera"):
        if key not in raw:
            raise SchemaError(lineno, key, "missing")
    cat = raw["category"]
    if not isinstance(cat, str):
        raise SchemaError(lineno, "category", "must be a string")
    if cat not in vocab:
        raise UnknownCategory(cat, lineno)
    coords = []
    for key in ("x", "y"):
        v = raw[key]
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            raise SchemaError(lineno, key, "must be a finite number")
        coords.append(float(v))
    try:
        cam = CameraId(raw["camera"])
    except ValueError:
        raise SchemaError(lineno, "camera", f"unknown camera {raw['camera']!r}") from None
    return SceneObject(cat, coords[0], coords[1], cam)


def parse_scene(line: str, lineno: int = 1, vocab: CategoryVocabulary = DEFAULT_VOCAB) -> Scene:
    try:
        rec = json.loads(line)
    except json.JSONDecodeError as e:
        raise SchemaError(lineno, "<record>", str(e)) from None
    if not isinstance(rec, dict):
        raise SchemaError(lineno, "<record>", "must be a JSON object")
    sid = rec.get("scene_id")
    if not isinstance(sid, str) or not sid:
        raise SchemaError(lineno, "scene_id", "must be a non-empty string")
    objs = rec.get("objects")
    if not isinstance(objs, list):
        raise SchemaError(lineno, "objects", "must be a list")
    return Scene(sid, tuple(_parse_object(o, lineno, vocab) for o in objs))


def load_scenes(path: str | Path, vocab: CategoryVocabulary = DEFAULT_VOCAB) -> list[Scene]:
    """Read a line-delimited scene file; blank lines are skipped."""
    scenes = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            if line.strip():
                scenes.append(parse_scene(line, lineno, vocab))
    return scenes


def dump_scene(scene: Scene) -> str:
    return json.dumps(scene.to_dict(), ensure_ascii=False, separators=(",", ":"))


def save_scenes(scenes: Iterable[Scene], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for s in scenes:
            f.write(dump_scene(s) + "\n")


# -- synthetic scenes ------------------------------------------------------

DEFAULT_CATEGORY_WEIGHTS = {
    "car": 8.0,
    "pedestrian": 5.0,
    "barrier": 3.0,
    "traffic cone": 2.5,
    "truck": 2.0,
    "trailer": 0.6,
    "bus": 0.5,
    "construction vehicle": 0.4,
    "motorcycle": 0.6,
    "bicycle": 0.6,
}


@dataclass(frozen=True)
class SynthConfig:
    min_objects: int = 0
    max_objects: int = 60
    coord_range: float = 55.0
    category_weights: dict = field(default_factory=lambda: dict(DEFAULT_CATEGORY_WEIGHTS))
    decimals: int = 3

    def check(self, vocab: CategoryVocabulary = DEFAULT_VOCAB) -> None:
        if self.min_objects < 0 or self.max_objects < self.min_objects:
            raise ConfigError("need 0 <= min_objects <= max_objects")
        if not (self.coord_range > 0 and math.isfinite(self.coord_range)):
            raise ConfigError("coord_range must be positive and finite")
        if not self.category_weights or any(w < 0 for w in self.category_weights.values()):
            raise ConfigError("category weights must be non-negative and non-empty")
        if sum(self.category_weights.values()) <= 0:
            raise ConfigError("category weights sum to zero")
        for c in self.category_weights:
            if c not in vocab:
                raise ConfigError(f"weight given for unknown category {c!r}")
        if self.decimals < 0:
            raise ConfigError("decimals must be >= 0")


def synth_scenes(seed: int, n: int, config: SynthConfig | None = None,
                 vocab: CategoryVocabulary = DEFAULT_VOCAB) -> list[Scene]:
    """Deterministic random scenes with cameras assigned by bearing sector."""
    config = config or SynthConfig()
    config.check(vocab)
    if n < 0:
        raise ConfigError("n must be >= 0")
    rng = random.Random(seed)
    cats = sorted(config.category_weights)
    weights = [config.category_weights[c] for c in cats]
    r = config.coord_range
    scenes = []
    for i in range(n):
        k = rng.randint(config.min_objects, config.max_objects)
        objs = []
        for _ in range(k):
            cat = rng.choices(cats, weights)[0]
            x = round(rng.uniform(-r, r), config.decimals)
            y = round(rng.uniform(-r, r), config.decimals)
            objs.append(SceneObject(cat, x, y, camera_for_bearing(x, y)))
        scenes.append(Scene(f"synth-{seed}-{i:06d}", tuple(objs)))
    return scenes


# -- geometric queries -----------------------------------------------------

def closest_object(scene: Scene, radius: float = DEFAULT_RADIUS) -> tuple[SceneObject, float] | None:
    """Nearest object within ``radius``; the earlier object wins ties."""
    if radius <= 0:
        raise ValueError("radius must be positive")
    best = None
    for obj in scene.objects:
        d = obj.distance
        if d <= radius and (best is None or d < best[1]):
            best = (obj, d)
    return best


def objects_in_camera(scene: Scene, cam: CameraId) -> dict[str, int]:
    return dict(Counter(o.category for o in scene.objects if o.camera is cam))


def count_category(scene: Scene, category: str, vocab: CategoryVocabulary = DEFAULT_VOCAB) -> int:
    if category not in vocab:
        raise UnknownCategory(category)
    return sum(1 for o in scene.objects if o.category == category)
