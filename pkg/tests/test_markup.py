import pytest
from hypothesis import given, strategies as st

from conftest import EX1, EX2
from markupqa.fuzz import fuzz_corpus, well_formed
from markupqa.markup import (
    TAG_TOKEN_RE, Camera, Category, Count, Distance, ErrorKind, ExtractionFailure, Location,
    MarkupError, MarkupNode, TagKind, TargetPair, TextRun, YesNo, answer_from_dict, answer_to_dict,
    extract_answers, parse_markup, render, strip_markup, validate,
)
from markupqa.vocab import CameraId


def test_example_one_structure():
    doc = parse_markup(EX1)
    cam, tgt = doc.nodes
    assert cam.kind is TagKind.CAM and cam.content == "back"
    assert tgt.kind is TagKind.TARGET
    assert tgt.child(TagKind.CNT).content == "3"
    assert tgt.child(TagKind.OBJ).content == "trucks"
    assert EX1[cam.start:cam.end] == "<cam>back</cam>"


def test_tag_free_is_one_run():
    doc = parse_markup("no tags here")
    assert doc.nodes == [] and doc.items == (TextRun("no tags here", 0, 12),)


def test_target_missing_cnt():
    s = "<target><obj>car</obj></target>"
    with pytest.raises(MarkupError) as e:
        parse_markup(s)
    assert e.value.kind is ErrorKind.ILLEGAL_NESTING
    doc = parse_markup(s, "lenient")
    assert doc.nodes == [] and [type(i) for i in doc.items] == [TextRun]
    assert [w.kind for w in doc.warnings] == [ErrorKind.ILLEGAL_NESTING]


@pytest.mark.parametrize("text,kind,offset", [
    ("a <obj>car", ErrorKind.UNCLOSED_TAG, 2),
    ("a <box>x</box>", ErrorKind.UNKNOWN_TAG, 2),
    ("<obj><cnt>1</cnt></obj>", ErrorKind.ILLEGAL_NESTING, 5),
    ("x <dst>  </dst>", ErrorKind.EMPTY_CONTENT, 2),
    ("x </obj>", ErrorKind.UNMATCHED_CLOSE, 2),
    ("<cnt>3</cnt> cars", ErrorKind.CNT_OUTSIDE_TARGET, 0),
    ("<Obj>car</Obj>", ErrorKind.UNKNOWN_TAG, 0),
    ("<target><cnt>1</cnt> <cnt>2</cnt></target>", ErrorKind.ILLEGAL_NESTING, 0),
    ("<target><cnt>1</cnt> of <obj>car</obj></target>", ErrorKind.ILLEGAL_NESTING, 20),
])
def test_findings(text, kind, offset):
    rep = validate(text)
    assert not rep.ok
    assert rep.findings[0].kind is kind
    assert rep.findings[0].offset == offset
    with pytest.raises(MarkupError):
        parse_markup(text)


def test_validate_clean():
    assert validate(EX1).ok and len(validate(EX1)) == 0
    assert validate("").ok
    assert validate(EX2).ok


def test_bare_cnt_lenient_keeps_node():
    doc = parse_markup("<cnt>3</cnt> cars", "lenient")
    assert [n.kind for n in doc.nodes] == [TagKind.CNT]
    assert extract_answers(doc) == [Count(3)]


def test_target_children_either_order():
    doc = parse_markup("<target><obj>cars</obj>  <cnt>two</cnt></target>")
    assert extract_answers(doc) == [TargetPair(2, "car")]


def test_strip_examples():
    assert strip_markup(parse_markup(EX2)) == \
        "The closest object to the ego-car is a car located at coordinates (3.43, 1.41)."
    assert strip_markup(parse_markup(EX1)) == "In the back, 3 trucks are detected."
    assert strip_markup(parse_markup("  plain   text ")) == "  plain   text "


def test_strip_glued_tag():
    out = strip_markup(parse_markup("<<obj>x</obj>obj>car", "lenient"))
    assert not TAG_TOKEN_RE.search(out)


def test_extract_examples():
    assert extract_answers(parse_markup(EX1)) == [Camera(CameraId.BACK), TargetPair(3, "truck")]
    assert extract_answers(parse_markup("")) == []
    assert extract_answers(parse_markup("<loc>(3.43, 1.41)</loc>")) == [Location(3.43, 1.41)]
    assert extract_answers("<ans>YES</ans> <dst>5.00 m</dst> <loc>-1.5, 2</loc>") == \
        [YesNo(True), Distance(5.0), Location(-1.5, 2.0)]


@pytest.mark.parametrize("text,kind", [
    ("<ans>maybe</ans>", TagKind.ANS),
    ("<dst>far</dst>", TagKind.DST),
    ("<dst>-3.0</dst>", TagKind.DST),
    ("<cam>roof</cam>", TagKind.CAM),
    ("<obj>dragon</obj>", TagKind.OBJ),
    ("<loc>(1, 2, 3)</loc>", TagKind.LOC),
])
def test_extraction_failures(text, kind):
    (a,) = extract_answers(text)
    assert isinstance(a, ExtractionFailure) and a.kind is kind


def test_target_half_failure():
    assert extract_answers("<target><cnt>lots</cnt> <obj>cars</obj></target>") == [TargetPair(None, "car")]


def test_answer_dict_round_trip():
    answers = extract_answers(EX1 + " <ans>no</ans> <dst>2.5</dst> <loc>(1, -2)</loc> <obj>bus</obj> "
                              "<cnt>4</cnt> <ans>eh</ans>")
    assert [answer_from_dict(answer_to_dict(a)) for a in answers] == answers


# -- properties ------------------------------------------------------------

sentences = st.builds(lambda seed: well_formed(__import__("random").Random(seed)), st.integers(0, 10**9))
fuzzed = st.builds(lambda seed: fuzz_corpus(seed, 1)[0], st.integers(0, 10**9))


@given(sentences)
def test_round_trip_generated(s):
    assert render(parse_markup(s)) == s


@given(st.one_of(fuzzed, st.text()))
def test_lenient_never_raises_and_is_lossless(s):
    doc = parse_markup(s, "lenient")
    assert render(doc) == s
    assert validate(s).ok == (not doc.warnings)


@given(st.one_of(fuzzed, sentences, st.text(alphabet="<>/abcdeobjcnt tg ")))
def test_strip_idempotent(s):
    once = strip_markup(parse_markup(s, "lenient"))
    assert strip_markup(parse_markup(once, "lenient")) == once


@given(sentences)
def test_strip_length_invariant(s):
    doc = parse_markup(s)
    tags = sum(len(m.group(0)) for m in TAG_TOKEN_RE.finditer(s))
    assert len(strip_markup(doc, normalize_space=False)) == len(s) - tags


@given(sentences)
def test_nodes_in_source_order_and_disjoint(s):
    doc = parse_markup(s)
    spans = [(i.start, i.end) for i in doc.items]
    assert spans == sorted(spans)
    assert all(a[1] == b[0] for a, b in zip(spans, spans[1:]))
    for n in doc.nodes:
        for c in n.children:
            assert n.start < c.start and c.end < n.end
    answers = extract_answers(doc)
    assert len(answers) == len(doc.nodes)


@given(sentences)
def test_extraction_types_follow_tags(s):
    kinds = {TagKind.ANS: YesNo, TagKind.OBJ: Category, TagKind.CAM: Camera,
             TagKind.DST: Distance, TagKind.LOC: Location, TagKind.TARGET: TargetPair}
    doc = parse_markup(s)
    for node, a in zip(doc.nodes, extract_answers(doc)):
        assert isinstance(a, kinds[node.kind])
        assert isinstance(node, MarkupNode)
