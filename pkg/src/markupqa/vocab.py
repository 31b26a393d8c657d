"""Category vocabulary, camera identifiers and number words."""

from __future__ import annotations

import enum
import json
import re
from dataclasses import dataclass, field
from pathlib import Path


class CameraId(str, enum.Enum):
    FRONT = "front"
    FRONT_LEFT = "front_left"
    FRONT_RIGHT = "front_right"
    BACK = "back"
    BACK_LEFT = "back_left"
    BACK_RIGHT = "back_right"

    @property
    def surface(self) -> str:
        """Word(s) used inside a ``<cam>`` span, e.g. ``"front left"``."""
        return self.value.replace("_", " ")

    @classmethod
    def parse(cls, text: str) -> "CameraId | None":
        key = re.sub(r"[\s_-]+", " ", text.strip().lower())
        key = re.sub(r"^the ", "", key)
        key = re.sub(r" (camera|cam|view)$", "", key)
        key = key.replace("rear", "back")
        return _CAMERA_BY_SURFACE.get(key)


_CAMERA_BY_SURFACE = {c.surface: c for c in CameraId}


NUMBER_WORDS = (
    "zero one two three four five six seven eight nine ten eleven twelve "
    "thirteen fourteen fifteen sixteen seventeen eighteen nineteen twenty"
).split()


def parse_count(text: str) -> int | None:
    """Digits or a number word between zero and twenty; ``None`` otherwise."""
    s = text.strip().lower()
    if s.isascii() and s.isdigit():
        return int(s)
    try:
        return NUMBER_WORDS.index(s)
    except ValueError:
        return None


DEFAULT_CATEGORIES = (
    ("car", "cars"),
    ("truck", "trucks"),
    ("bus", "buses"),
    ("trailer", "trailers"),
    ("construction vehicle", "construction vehicles"),
    ("pedestrian", "pedestrians"),
    ("motorcycle", "motorcycles"),
    ("bicycle", "bicycles"),
    ("traffic cone", "traffic cones"),
    ("barrier", "barriers"),
)


def _key(surface: str) -> str:
    return " ".join(surface.lower().replace("_", " ").split())


@dataclass(frozen=True)
class CategoryVocabulary:
    """Ordered (singular, plural) pairs; the singular is the canonical name."""

    entries: tuple[tuple[str, str], ...] = DEFAULT_CATEGORIES
    _lookup: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        lookup = {}
        names = [s for s, _ in self.entries]
        if len(set(names)) != len(names):
            raise ValueError("duplicate category names in vocabulary")
        for singular, plural in self.entries:
            lookup[_key(singular)] = singular
            lookup.setdefault(_key(plural), singular)
        object.__setattr__(self, "_lookup", lookup)

    @property
    def names(self) -> list[str]:
        return [s for s, _ in self.entries]

    def __contains__(self, name: str) -> bool:
        return any(name == s for s, _ in self.entries)

    def plural(self, name: str) -> str:
        for singular, plural in self.entries:
            if singular == name:
                return plural
        raise KeyError(name)

    def surface(self, name: str, count: int) -> str:
        return name if count == 1 else self.plural(name)

    def normalize(self, surface: str) -> str | None:
        """Canonical singular for a surface form, or ``None`` if unknown."""
        return self._lookup.get(_key(surface).strip(".,;:!?"))

    @classmethod
    def load(cls, path: str | Path) -> "CategoryVocabulary":
        """Read a JSON list of ``[singular, plural]`` pairs."""
        with open(path, encoding="utf-8") as f:
            data = json.load(f)
        return cls(tuple((str(s), str(p)) for s, p in data))


DEFAULT_VOCAB = CategoryVocabulary()
