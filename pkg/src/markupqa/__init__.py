"""Markup-QA: answers embedded as typed tags inside full sentences.

Parse and strip the markup, generate tagged QA corpora from ego-frame
scene annotations, and score model outputs on sentence quality and on the
extracted answers at the same time.
"""

__version__ = "0.1.0"

from .markup import (  # noqa: E402
    MarkupDocument, MarkupError, TagKind, extract_answers, parse_markup, render, strip_markup, validate,
)
from .scenes import Scene, SceneObject, closest_object, count_category, objects_in_camera, synth_scenes  # noqa: E402
from .generation import QAItem, TaskFamily, TemplateBank, generate_corpus  # noqa: E402
from .metrics import sgp_suite, tokenize  # noqa: E402
from .evaluation import EvalReport, PredictionRecord, evaluate_corpus, score_item  # noqa: E402
from .stats import StatsBundle, compute_stats, emit_stats  # noqa: E402
from .vocab import DEFAULT_VOCAB, CameraId, CategoryVocabulary  # noqa: E402
