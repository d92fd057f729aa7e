import random

import pytest

from spatialqa.errors import UniqueDescriptionError
from spatialqa.lexicon import load_lexicon
from spatialqa.questions import (
    QType,
    Quantifier,
    QuestionSpec,
)
from spatialqa.reasoner import Fact
from spatialqa.referring import (
    ReferringExpression,
    describe_entity,
    describe_uniquely,
    entity_table,
    resolve,
)
from spatialqa.relations import DIR, Rel
from spatialqa.scene import SceneConfig, build_scene_graph, sample_scene
from spatialqa.textgen import AnnotatedSentence, realize_question, realize_story, story_text

R = Rel
FULL = load_lexicon("full")

TABLE = {
    "o1": {"kind": "object", "size": "big", "color": "black", "shape": "circle", "block": "b0"},
    "o2": {"kind": "object", "size": "small", "color": "black", "shape": "square", "block": "b0"},
    "o3": {"kind": "object", "size": "medium", "color": "blue", "shape": "triangle", "block": "b1"},
    "b0": {"kind": "block", "label": "A"},
    "b1": {"kind": "block", "label": "B"},
}


def expr(eid, **c):
    return ReferringExpression("x", c, resolve(c, TABLE))


def scenes(n, seed=0):
    rng = random.Random(seed)
    for _ in range(n):
        scene = sample_scene(SceneConfig(), rng)
        yield build_scene_graph(scene, rng), rng


def spans_ok(text, triplet):
    for span in (triplet.trajector, triplet.landmark, triplet.spatial_indicator):
        if span is not None:
            assert text[span.start:span.end] == span.text
            assert span.start < span.end


def test_ambiguous_black_object():
    found = describe_entity("o1", TABLE, "ambiguous", random.Random(0), ["o1", "o2"])
    assert found.targets == {"o1", "o2"}
    assert found.surface == "black object"


def test_unique_descriptions_are_singletons_over_many_scenes():
    rng = random.Random(2)
    for _ in range(1000):
        scene = sample_scene(SceneConfig(), rng)
        table = entity_table(scene)
        for eid in table:
            d = describe_uniquely(eid, table, rng)
            assert d.targets == {eid} == resolve(d.constraints, table)


def test_unique_fails_without_block_qualifier():
    table = dict(TABLE, o4=dict(TABLE["o3"], block="b0"))
    with pytest.raises(UniqueDescriptionError):
        describe_entity("o3", table, "unique")
    d = describe_uniquely("o3", table, random.Random(0))
    assert "in block B" in d.surface and d.targets == {"o3"}


def test_sole_entity_any_subset_is_unique():
    d = describe_entity("o3", TABLE, "unique", random.Random(1), ["o3"])
    assert len(d.constraints) == 1


def test_story_realization_single_fact():
    facts = [Fact(R.ABOVE, "o1", "o2")]
    [sent] = realize_story(facts, TABLE, FULL, random.Random(0), {facts[0]: "f0"})
    [t] = sent.triplets
    spans_ok(sent.text, t)
    assert t.spatial_indicator.text in FULL.indicator_surfaces(R.ABOVE)
    assert t.trajector.text == "A big black circle"
    assert sent.text[0].isupper() and sent.text.endswith(".")


def test_story_realization_invariants_and_round_trip():
    for graph, rng in scenes(200, seed=4):
        facts = list(graph.edges)
        ids = {f: graph.fact_id(f) for f in facts}
        table = entity_table(graph.scene)
        sentences = realize_story(facts, table, FULL, rng, ids, pair_prob=0.5)
        assert all(1 <= len(s.triplets) <= 2 for s in sentences)
        realized = [(t.relation, t.head, t.tail) for s in sentences for t in s.triplets]
        assert realized == [(f.relation, f.head, f.tail) for f in facts]
        for s in sentences:
            for t in s.triplets:
                spans_ok(s.text, t)
                surface = t.spatial_indicator.text
                assert t.relation in FULL.relations_for_indicator(surface)
                assert t.trajector.end <= t.spatial_indicator.start or t.spatial_indicator.text in ("has", "have")
                assert t.spatial_indicator.end <= t.landmark.start
            assert AnnotatedSentence.from_dict(s.to_dict()) == s
        text, offsets = story_text(sentences)
        for s, off in zip(sentences, offsets):
            assert text[off:off + len(s.text)] == s.text


def yn(q=Quantifier.NONE, probe=R.LEFT, head=None):
    support = (Fact(R.LEFT, "o1", "o2"), Fact(R.LEFT, "o2", "o3"))
    return QuestionSpec(QType.YN, "o1", "o3", head or expr("o1", shape="circle"),
                        expr("o3", color="blue"), "Yes", 2, support, probe=probe, quantifier=q)


@pytest.mark.parametrize("q, word", [(Quantifier.ANY, "any"), (Quantifier.ALL, "all")])
def test_quantified_question_text(q, word):
    head = expr("o1", color="black")
    text, t = realize_question(yn(q, head=head), FULL, random.Random(0), TABLE)
    assert f" {word} black object" in text
    assert text.startswith("Are" if q is Quantifier.ALL else "Is") or text.startswith(("Do", "Does"))
    spans_ok(text, t)


def test_yn_indicator_registered_for_probe():
    rng = random.Random(3)
    for probe in sorted(DIR) + [R.NTPPI, R.NEAR, R.DC]:
        text, t = realize_question(yn(probe=probe), FULL, rng, TABLE)
        spans_ok(text, t)
        assert probe in FULL.relations_for_indicator(t.spatial_indicator.text)
        assert text.endswith("?") and t.trajector.text == "the circle"


def test_fr_question_has_no_relation_expression():
    spec = QuestionSpec(QType.FR, "o1", "o3", expr("o1", shape="circle"), expr("o3", color="blue"),
                        frozenset({R.LEFT}), 2, yn().supporting)
    surfaces = {s for r in FULL.relations for s in FULL.indicator_surfaces(r)}
    for seed in range(10):
        text, t = realize_question(spec, FULL, random.Random(seed), TABLE)
        spans_ok(text, t)
        assert t.spatial_indicator is None
        rest = text.replace(t.trajector.text, "").replace(t.landmark.text, "")
        assert not any(f" {s} " in f" {rest} " for s in surfaces if s not in ("has", "have"))
