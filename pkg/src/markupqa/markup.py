"""Markup-QA grammar: parse, validate, render, strip and extract answers.

A sentence is plain text interleaved with tagged spans::

    In the <cam>back</cam>, <target><cnt>3</cnt> <obj>trucks</obj></target>are detected.

Seven lowercase tags exist.  ``<target>`` is the only container and holds
exactly one ``<cnt>`` and one ``<obj>`` separated by whitespace; every other
tag holds non-empty plain text.  The parse is lossless: rendering a
document reproduces its source string exactly, in both strict and lenient
mode.  Offsets are Python string indices (code points).
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import Iterator, Union

from .vocab import DEFAULT_VOCAB, CameraId, CategoryVocabulary, parse_count

__all__ = [
    "TagKind", "ErrorKind", "Finding", "MarkupError", "TextRun", "MarkupNode",
    "MarkupDocument", "ValidationReport", "parse_markup", "render", "strip_markup",
    "validate", "extract_answers", "YesNo", "Category", "Count", "Camera",
    "Distance", "Location", "TargetPair", "ExtractionFailure", "tag", "target",
    "answer_to_dict", "answer_from_dict",
]


class TagKind(str, enum.Enum):
    TARGET = "target"
    OBJ = "obj"
    CNT = "cnt"
    ANS = "ans"
    CAM = "cam"
    DST = "dst"
    LOC = "loc"


_KINDS = {k.value: k for k in TagKind}

# Anything shaped like a tag; whether the name is legal is decided later.
TAG_TOKEN_RE = re.compile(r"<(/?)([A-Za-z][A-Za-z0-9_-]*)>")


class ErrorKind(str, enum.Enum):
    UNCLOSED_TAG = "unclosed-tag"
    UNKNOWN_TAG = "unknown-tag"
    ILLEGAL_NESTING = "illegal-nesting"
    EMPTY_CONTENT = "empty-content"
    UNMATCHED_CLOSE = "unmatched-close"
    CNT_OUTSIDE_TARGET = "cnt-outside-target"


@dataclass(frozen=True)
class Finding:
    offset: int
    kind: ErrorKind
    message: str

    def to_dict(self) -> dict:
        return {"offset": self.offset, "kind": self.kind.value, "message": self.message}


class MarkupError(ValueError):
    """Raised by a strict parse; carries the first finding."""

    def __init__(self, finding: Finding):
        super().__init__(f"{finding.kind.value} at offset {finding.offset}: {finding.message}")
        self.finding = finding

    @property
    def kind(self) -> ErrorKind:
        return self.finding.kind

    @property
    def offset(self) -> int:
        return self.finding.offset


@dataclass(frozen=True)
class TextRun:
    text: str
    start: int
    end: int

    def render(self) -> str:
        return self.text


@dataclass(frozen=True)
class MarkupNode:
    kind: TagKind
    start: int
    end: int
    content: str | None = None
    children: tuple[Union[TextRun, "MarkupNode"], ...] = ()

    def render(self) -> str:
        inner = self.content if self.content is not None else "".join(c.render() for c in self.children)
        return f"<{self.kind.value}>{inner}</{self.kind.value}>"

    def child(self, kind: TagKind) -> "MarkupNode | None":
        for c in self.children:
            if isinstance(c, MarkupNode) and c.kind is kind:
                return c
        return None


Item = Union[TextRun, MarkupNode]


@dataclass(frozen=True)
class MarkupDocument:
    source: str
    items: tuple[Item, ...]
    warnings: tuple[Finding, ...] = ()

    @property
    def nodes(self) -> list[MarkupNode]:
        return [it for it in self.items if isinstance(it, MarkupNode)]

    def render(self) -> str:
        return "".join(it.render() for it in self.items)


@dataclass(frozen=True)
class ValidationReport:
    findings: tuple[Finding, ...]

    @property
    def ok(self) -> bool:
        return not self.findings

    def __len__(self) -> int:
        return len(self.findings)


class _Bad(Exception):
    # region_end: index of the token closing the malformed region, or None
    # when the region cannot be delimited (only the opening tag is demoted).
    def __init__(self, finding: Finding, region_end: int | None):
        self.finding = finding
        self.region_end = region_end


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = list(TAG_TOKEN_RE.finditer(text))

    def _is_close(self, j: int, name: str) -> bool:
        t = self.toks[j]
        return t.group(1) == "/" and t.group(2) == name

    def _find_close(self, i: int, name: str, limit: int) -> int | None:
        for j in range(i + 1, limit):
            if self._is_close(j, name):
                return j
        return None

    def _leaf(self, i: int, limit: int) -> MarkupNode:
        tok = self.toks[i]
        name = tok.group(2)
        if i + 1 < limit and self._is_close(i + 1, name):
            close = self.toks[i + 1]
            content = self.text[tok.end():close.start()]
            if not content.strip():
                raise _Bad(Finding(tok.start(), ErrorKind.EMPTY_CONTENT, f"<{name}> has no content"), i + 1)
            return MarkupNode(_KINDS[name], tok.start(), close.end(), content=content)
        j = self._find_close(i, name, limit)
        if j is None:
            raise _Bad(Finding(tok.start(), ErrorKind.UNCLOSED_TAG, f"<{name}> is never closed"), None)
        inner = self.toks[i + 1]
        raise _Bad(Finding(inner.start(), ErrorKind.ILLEGAL_NESTING, f"tag inside <{name}>"), j)

    def _target(self, i: int) -> MarkupNode:
        tok = self.toks[i]
        depth, j = 0, None
        for k in range(i + 1, len(self.toks)):
            t = self.toks[k]
            if t.group(2) != "target":
                continue
            if t.group(1) != "/":
                depth += 1
            elif depth:
                depth -= 1
            else:
                j = k
                break
        if j is None:
            raise _Bad(Finding(tok.start(), ErrorKind.UNCLOSED_TAG, "<target> is never closed"), None)

        def bad(offset, kind, msg):
            return _Bad(Finding(offset, kind, msg), j)

        children: list[Item] = []
        pos, k = tok.end(), i + 1

        def gap(upto):
            run = self.text[pos:upto]
            if run.strip():
                raise bad(pos, ErrorKind.ILLEGAL_NESTING, "text inside <target> outside <cnt>/<obj>")
            if run:
                children.append(TextRun(run, pos, upto))

        while k < j:
            t = self.toks[k]
            gap(t.start())
            name = t.group(2)
            if t.group(1) == "/":
                raise bad(t.start(), ErrorKind.UNMATCHED_CLOSE, f"</{name}> without opening tag")
            if name not in _KINDS:
                raise bad(t.start(), ErrorKind.UNKNOWN_TAG, f"unknown tag <{name}>")
            if name not in ("cnt", "obj"):
                raise bad(t.start(), ErrorKind.ILLEGAL_NESTING, f"<{name}> inside <target>")
            try:
                node = self._leaf(k, j)
            except _Bad as e:
                raise bad(e.finding.offset, e.finding.kind, e.finding.message)
            children.append(node)
            pos, k = node.end, k + 2
        gap(self.toks[j].start())
        kinds = [c.kind for c in children if isinstance(c, MarkupNode)]
        if kinds.count(TagKind.CNT) != 1 or kinds.count(TagKind.OBJ) != 1:
            raise bad(tok.start(), ErrorKind.ILLEGAL_NESTING, "<target> needs exactly one <cnt> and one <obj>")
        return MarkupNode(TagKind.TARGET, tok.start(), self.toks[j].end(), children=tuple(children))

    def parse(self) -> tuple[list[Item], list[Finding]]:
        items: list[Item] = []
        findings: list[Finding] = []
        text_start, i = 0, 0
        while i < len(self.toks):
            tok = self.toks[i]
            name = tok.group(2)
            if tok.group(1) == "/":
                findings.append(Finding(tok.start(), ErrorKind.UNMATCHED_CLOSE, f"</{name}> without opening tag"))
                i += 1
                continue
            if name not in _KINDS:
                findings.append(Finding(tok.start(), ErrorKind.UNKNOWN_TAG, f"unknown tag <{name}>"))
                i += 1
                continue
            try:
                if name == "target":
                    node = self._target(i)
                else:
                    node = self._leaf(i, len(self.toks))
            except _Bad as e:
                findings.append(e.finding)
                i = i + 1 if e.region_end is None else e.region_end + 1
                continue
            if node.kind is TagKind.CNT:
                findings.append(Finding(node.start, ErrorKind.CNT_OUTSIDE_TARGET, "<cnt> outside <target>"))
            if text_start < node.start:
                items.append(TextRun(self.text[text_start:node.start], text_start, node.start))
            items.append(node)
            text_start = node.end
            i = next(
                (k for k in range(i + 1, len(self.toks)) if self.toks[k].start() >= node.end),
                len(self.toks),
            )
        if text_start < len(self.text):
            items.append(TextRun(self.text[text_start:], text_start, len(self.text)))
        return items, findings


def parse_markup(text: str, mode: str = "strict") -> MarkupDocument:
    """Parse a Markup-QA sentence.

    In ``"strict"`` mode the first grammar violation raises ``MarkupError``.
    In ``"lenient"`` mode violations are recorded in ``doc.warnings`` and the
    malformed region is kept as plain text; a bare ``<cnt>`` is kept as a
    node.  Lenient parsing never raises.
    """
    if mode not in ("strict", "lenient"):
        raise ValueError(f"unknown parse mode {mode!r}")
    items, findings = _Parser(text).parse()
    if mode == "strict" and findings:
        raise MarkupError(findings[0])
    return MarkupDocument(text, tuple(items), tuple(findings))


def render(doc: MarkupDocument) -> str:
    return doc.render()


def validate(text: str) -> ValidationReport:
    """All grammar findings for ``text``; empty iff a strict parse succeeds."""
    return ValidationReport(parse_markup(text, "lenient").warnings)


def _strip_pieces(doc: MarkupDocument) -> list[str]:
    # Text fragments in order; a junction (removed tag) separates neighbours.
    pieces, cur = [], []

    def cut():
        pieces.append("".join(cur))
        cur.clear()

    def text(s):
        last = 0
        for m in TAG_TOKEN_RE.finditer(s):
            cur.append(s[last:m.start()])
            cut()
            last = m.end()
        cur.append(s[last:])

    def walk(item):
        if isinstance(item, TextRun):
            text(item.text)
            return
        cut()
        if item.content is not None:
            text(item.content)
        else:
            for c in item.children:
                walk(c)
        cut()

    for it in doc.items:
        walk(it)
    cut()
    return pieces


def _join(left: str, right: str) -> str:
    if not left.strip():
        return right.lstrip()
    if left[-1].isspace() or right[0].isspace():
        return left.rstrip() + " " + right.lstrip()
    if left[-1].isalnum() and right[0].isalnum():
        return left + " " + right
    return left + right


def strip_markup(doc: MarkupDocument, normalize_space: bool = True) -> str:
    """Remove all tag tokens, keeping every character of content and text.

    With ``normalize_space`` the whitespace around each removed tag is
    collapsed to a single space (inserted between two alphanumerics that the
    tag separated) and the ends are trimmed.  Text without tags is returned
    unchanged.
    """
    pieces = _strip_pieces(doc)
    if not normalize_space:
        return "".join(pieces)
    if len(pieces) == 1:
        return pieces[0]
    out = pieces[0]
    for piece in pieces[1:]:
        if piece:
            out = _join(out, piece)
    out = out.strip()
    if TAG_TOKEN_RE.search(out):
        # removing a tag glued a new tag token together, e.g. "<<obj>obj>"
        return strip_markup(parse_markup(out, "lenient"))
    return out


# -- extraction ------------------------------------------------------------

@dataclass(frozen=True)
class YesNo:
    value: bool


@dataclass(frozen=True)
class Category:
    name: str


@dataclass(frozen=True)
class Count:
    value: int


@dataclass(frozen=True)
class Camera:
    camera: CameraId


@dataclass(frozen=True)
class Distance:
    meters: float


@dataclass(frozen=True)
class Location:
    x: float
    y: float


@dataclass(frozen=True)
class TargetPair:
    """A ``<target>`` span; a ``None`` field means that half failed to parse."""

    count: int | None
    category: str | None


@dataclass(frozen=True)
class ExtractionFailure:
    kind: TagKind
    raw: str


Answer = Union[YesNo, Category, Count, Camera, Distance, Location, TargetPair, ExtractionFailure]

_NUM = r"[+-]?(?:\d+(?:\.\d*)?|\.\d+)"
_DIST_RE = re.compile(rf"^\s*({_NUM})\s*(?:m|meters?|metres?)?\s*$", re.I)
_LOC_RE = re.compile(rf"^\s*\(?\s*({_NUM})\s*,\s*({_NUM})\s*\)?\s*$")


def _leaf_answer(node: MarkupNode, vocab: CategoryVocabulary) -> Answer:
    raw = node.content or ""
    kind = node.kind
    if kind is TagKind.ANS:
        s = raw.strip().lower()
        if s in ("yes", "no"):
            return YesNo(s == "yes")
    elif kind is TagKind.OBJ:
        name = vocab.normalize(raw)
        if name is not None:
            return Category(name)
    elif kind is TagKind.CNT:
        n = parse_count(raw)
        if n is not None:
            return Count(n)
    elif kind is TagKind.CAM:
        cam = CameraId.parse(raw)
        if cam is not None:
            return Camera(cam)
    elif kind is TagKind.DST:
        m = _DIST_RE.match(raw)
        if m and float(m.group(1)) >= 0:
            return Distance(float(m.group(1)))
    elif kind is TagKind.LOC:
        m = _LOC_RE.match(raw)
        if m:
            return Location(float(m.group(1)), float(m.group(2)))
    return ExtractionFailure(kind, raw)


def _iter_answers(doc: MarkupDocument, vocab: CategoryVocabulary) -> Iterator[Answer]:
    for node in doc.nodes:
        if node.kind is TagKind.TARGET:
            cnt, obj = node.child(TagKind.CNT), node.child(TagKind.OBJ)
            n = parse_count(cnt.content) if cnt is not None else None
            cat = vocab.normalize(obj.content) if obj is not None else None
            yield TargetPair(n, cat)
        else:
            yield _leaf_answer(node, vocab)


def extract_answers(doc: MarkupDocument | str, vocab: CategoryVocabulary = DEFAULT_VOCAB) -> list[Answer]:
    """One typed answer per top-level node, in document order.

    Strings are parsed leniently first.  Unparsable content becomes an
    ``ExtractionFailure`` (or a ``None`` half of a ``TargetPair``) rather
    than an exception.
    """
    if isinstance(doc, str):
        doc = parse_markup(doc, "lenient")
    return list(_iter_answers(doc, vocab))


# -- construction helpers --------------------------------------------------

def tag(kind: TagKind | str, content: object) -> str:
    name = TagKind(kind).value
    return f"<{name}>{content}</{name}>"


def target(count: int, surface: str) -> str:
    return f"<target><cnt>{count}</cnt> <obj>{surface}</obj></target>"


# -- serialization ---------------------------------------------------------

def answer_to_dict(a: Answer) -> dict:
    if isinstance(a, YesNo):
        return {"type": "yes_no", "value": a.value}
    if isinstance(a, Category):
        return {"type": "category", "name": a.name}
    if isinstance(a, Count):
        return {"type": "count", "value": a.value}
    if isinstance(a, Camera):
        return {"type": "camera", "camera": a.camera.value}
    if isinstance(a, Distance):
        return {"type": "distance", "meters": a.meters}
    if isinstance(a, Location):
        return {"type": "location", "x": a.x, "y": a.y}
    if isinstance(a, TargetPair):
        return {"type": "target", "count": a.count, "category": a.category}
    return {"type": "failure", "tag": a.kind.value, "raw": a.raw}


def answer_from_dict(d: dict) -> Answer:
    t = d["type"]
    if t == "yes_no":
        return YesNo(bool(d["value"]))
    if t == "category":
        return Category(d["name"])
    if t == "count":
        return Count(int(d["value"]))
    if t == "camera":
        return Camera(CameraId(d["camera"]))
    if t == "distance":
        return Distance(float(d["meters"]))
    if t == "location":
        return Location(float(d["x"]), float(d["y"]))
    if t == "target":
        return TargetPair(d["count"], d["category"])
    if t == "failure":
        return ExtractionFailure(TagKind(d["tag"]), d["raw"])
    raise ValueError(f"unknown answer type {t!r}")
