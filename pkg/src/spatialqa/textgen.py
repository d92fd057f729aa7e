"""Story and question realization with SpRL span annotations.

Every described relation becomes a triplet with trajector, landmark and
spatial-indicator character spans. Spans are sentence-local, and
``text[start:end] == surface`` holds for each.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from .lexicon import VERBS, Expression, Lexicon
from .questions import QType, Quantifier, QuestionSpec
from .reasoner import Fact
from .referring import describe_uniquely, entity_table, noun_phrase, resolve
from .relations import Rel
from .scene import Scene

FR_TEMPLATES = (
    "Where is {tr} relative to {lm}?",
    "What is the position of {tr} regarding {lm}?",
    "What is the relation between {tr} and {lm}?",
)


@dataclass(frozen=True)
class Span:
    start: int
    end: int
    text: str

    def to_dict(self) -> dict:
        return {"start": self.start, "end": self.end, "text": self.text}

    @classmethod
    def from_dict(cls, d: Mapping) -> "Span":
        return cls(d["start"], d["end"], d["text"])


@dataclass(frozen=True)
class Triplet:
    relation: Rel
    head: str
    tail: str
    trajector: Span
    landmark: Span
    spatial_indicator: Optional[Span]
    fact_id: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "fact_id": self.fact_id,
            "relation": self.relation.value if self.relation else None,
            "head": self.head,
            "tail": self.tail,
            "trajector": self.trajector.to_dict(),
            "landmark": self.landmark.to_dict(),
            "spatial_indicator": self.spatial_indicator.to_dict() if self.spatial_indicator else None,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "Triplet":
        ind = d.get("spatial_indicator")
        return cls(Rel.parse(d["relation"]) if d.get("relation") else None, d["head"], d["tail"],
                   Span.from_dict(d["trajector"]), Span.from_dict(d["landmark"]),
                   Span.from_dict(ind) if ind else None, d.get("fact_id"))


@dataclass(frozen=True)
class AnnotatedSentence:
    text: str
    triplets: Tuple[Triplet, ...]

    @property
    def fact_ids(self) -> List[str]:
        return [t.fact_id for t in self.triplets]

    def to_dict(self) -> dict:
        return {"text": self.text, "triplets": [t.to_dict() for t in self.triplets]}

    @classmethod
    def from_dict(cls, d: Mapping) -> "AnnotatedSentence":
        return cls(d["text"], tuple(Triplet.from_dict(t) for t in d["triplets"]))


class _Builder:
    """Appends text pieces while remembering where each role landed."""

    def __init__(self):
        self.parts: List[str] = []
        self.length = 0

    def add(self, piece: str) -> Tuple[int, int]:
        start = self.length
        self.parts.append(piece)
        self.length += len(piece)
        return start, self.length

    def text(self) -> str:
        return "".join(self.parts)


def _article(phrase: str) -> str:
    return "an" if phrase[:1] in "aeiou" else "a"


def _render_clause(b: _Builder, expr: Expression, tr: str, lm: str, plural: bool = False):
    """Write ``tr verb rest`` and return (tr, lm, indicator) offsets."""
    tr_span = b.add(tr)
    verb = VERBS[expr.verb][1 if plural else 0]
    b.add(" ")
    verb_span = b.add(verb)
    b.add(" ")
    return (tr_span,) + _render_rest(b, expr, lm, verb_span)


def _render_rest(b: _Builder, expr: Expression, lm: str, verb_span):
    before, after = expr.rest.split("{lm}")
    base = b.length
    ind_span = verb_span
    if expr.indicator != "{have}":
        i = before.find(expr.indicator)
        if i < 0:
            i = len(before) + len(lm) + after.find(expr.indicator)
        ind_span = (base + i, base + i + len(expr.indicator))
    b.add(before)
    lm_span = b.add(lm)
    b.add(after)
    return lm_span, ind_span


def _spans(text: str, *ranges) -> List[Span]:
    return [Span(s, e, text[s:e]) for s, e in ranges]


def _capitalize_first(text: str) -> str:
    return text[:1].upper() + text[1:]


def realize_story(facts: Sequence[Fact], scene: Union[Scene, Mapping], lexicon: Lexicon,
                  rng: random.Random, fact_ids: Optional[Mapping[Fact, str]] = None,
                  pair_prob: float = 0.2, max_per_sentence: int = 2) -> List[AnnotatedSentence]:
    """Turn facts into sentences of one or two conjoined clauses.

    First mentions carry an indefinite article and all properties; later
    mentions use the shortest description that is unique in the story.
    """
    table = entity_table(scene) if isinstance(scene, Scene) else scene
    domain = sorted({e for f in facts for e in (f.head, f.tail)})
    mentioned: set = set()
    short: Dict[str, str] = {}

    def mention(eid: str) -> str:
        props = table[eid]
        if props["kind"] == "block":
            return f"block {props['label']}"
        if eid not in mentioned:
            mentioned.add(eid)
            full = {k: props[k] for k in ("size", "color", "shape")}
            if resolve(full, table, domain) != {eid}:
                full["in_block"] = props["block"]
            phrase = noun_phrase(full, table)
            return f"{_article(phrase)} {phrase}"
        if eid not in short:
            short[eid] = "the " + describe_uniquely(eid, table, rng, domain).surface
        return short[eid]

    sentences = []
    i = 0
    while i < len(facts):
        n = 1
        while n < max_per_sentence and i + n < len(facts) and rng.random() < pair_prob:
            n += 1
        b = _Builder()
        pending = []
        for j, f in enumerate(facts[i:i + n]):
            if j:
                b.add(", and " if j == n - 1 and n > 2 else (" and " if j == n - 1 else ", "))
            expr = rng.choice(lexicon.expressions(f.relation))
            tr_span, lm_span, ind_span = _render_clause(b, expr, mention(f.head), mention(f.tail))
            pending.append((f, tr_span, lm_span, ind_span))
        b.add(".")
        text = _capitalize_first(b.text())
        triplets = []
        for f, tr_span, lm_span, ind_span in pending:
            tr, lm, ind = _spans(text, tr_span, lm_span, ind_span)
            triplets.append(Triplet(f.relation, f.head, f.tail, tr, lm, ind,
                                    fact_ids.get(f) if fact_ids else None))
        sentences.append(AnnotatedSentence(text, tuple(triplets)))
        i += n
    return sentences


def _definite(expr, table, plural=False) -> str:
    if expr.is_block:
        return noun_phrase(expr.constraints, table)
    return "the " + noun_phrase(expr.constraints, table, plural)


def realize_question(spec: QuestionSpec, lexicon: Lexicon, rng: random.Random,
                     table: Mapping) -> Tuple[str, Triplet]:
    """Question text and its single annotated triplet.

    FR questions name no relation, so their triplet has no indicator.
    """
    if spec.qtype is QType.FR:
        template = rng.choice(FR_TEMPLATES)
        before, rest = template.split("{tr}")
        middle, after = rest.split("{lm}")
        b = _Builder()
        b.add(before)
        tr_span = b.add(_definite(spec.head_desc, table))
        b.add(middle)
        lm_span = b.add(_definite(spec.tail_desc, table))
        b.add(after)
        text = b.text()
        tr, lm = _spans(text, tr_span, lm_span)
        return text, Triplet(None, spec.head_id, spec.tail_id, tr, lm, None)

    expr = rng.choice(lexicon.expressions(spec.probe))
    plural = spec.quantifier is Quantifier.ALL
    if spec.quantifier is Quantifier.NONE:
        head = _definite(spec.head_desc, table)
    else:
        head = f"{spec.quantifier.value} " + noun_phrase(spec.head_desc.constraints, table, plural)
    tail = _definite(spec.tail_desc, table)

    b = _Builder()
    if expr.verb == "be":
        b.add("Are " if plural else "Is ")
        tr_span = b.add(head)
        b.add(" ")
        verb_span = None
    else:
        b.add("Do " if plural else "Does ")
        tr_span = b.add(head)
        b.add(" ")
        verb_span = b.add("have")
        b.add(" ")
    lm_span, ind_span = _render_rest(b, expr, tail, verb_span)
    b.add("?")
    text = b.text()
    tr, lm, ind = _spans(text, tr_span, lm_span, ind_span)
    return text, Triplet(spec.probe, spec.head_id, spec.tail_id, tr, lm, ind)


def story_text(sentences: Iterable[AnnotatedSentence]) -> Tuple[str, List[int]]:
    """Join sentences with single spaces; return the text and sentence offsets."""
    offsets, parts, pos = [], [], 0
    for s in sentences:
        offsets.append(pos)
        parts.append(s.text)
        pos += len(s.text) + 1
    return " ".join(parts), offsets
