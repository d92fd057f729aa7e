"""Corpus files, end-to-end record validation, statistics and YN rebalancing.

A corpus directory holds ``train.jsonl``, ``dev.jsonl`` and ``test.jsonl``,
one record per line. A record looks like::

    {"id": "train-000000", "split": "train", "scene_seed": 123,
     "depth_remap": false, "story": "...",
     "sentences": [{"text": ..., "triplets": [...], "offset": 0}, ...],
     "facts": [{"id": "f0", "relation": "left", "head": "o1", "tail": "o2"}, ...],
     "entities": {"o1": {"kind": "object", ...}, "b0": {"kind": "block", ...}},
     "questions": [{"id": 0, "qtype": "YN", "text": ..., "answer": ["Yes"], "k": 3,
                    "supporting_facts": [...], "supporting_sentence_indices": [...],
                    "sprl": {...}, ...}]}

Field names above are the file-format contract.
"""

from __future__ import annotations

import json
import logging
import random
from collections import Counter
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

from .errors import ParseError, SpatialQAError
from .questions import NO, YES, QType, Quantifier, QuestionSpec, compute_answer, _distance
from .reasoner import Fact, FactBase, all_relations, minimal_support
from .referring import ReferringExpression, resolver
from .relations import CANDIDATE_LABELS, Rel, find_exclusion_pair

log = logging.getLogger(__name__)

SPLITS = ("train", "dev", "test")
FR_CANDIDATES = [r.value for r in CANDIDATE_LABELS]
YN_CANDIDATES = [YES, NO]

_RECORD_KEYS = ("story", "sentences", "facts", "entities", "questions", "scene_seed")
_QUESTION_KEYS = ("qtype", "text", "candidate_answers", "answer", "k", "head", "tail",
                  "supporting_facts", "supporting_sentence_indices", "sprl")

PathLike = Union[str, Path]


# -- files -----------------------------------------------------------------

def _dump(record: Mapping) -> str:
    return json.dumps(record, ensure_ascii=False, separators=(",", ":"))


@dataclass
class WriteResult:
    paths: Dict[str, Path]
    counts: Dict[str, Dict[str, int]]
    shortfall: Dict[str, Dict[str, int]] = field(default_factory=dict)


def question_counts(records: Iterable[Mapping]) -> Dict[str, int]:
    c = Counter(q["qtype"] for r in records for q in r["questions"])
    return {"YN": c.get("YN", 0), "FR": c.get("FR", 0)}


def write_corpus(corpus: Mapping[str, Sequence[Mapping]], out_dir: PathLike,
                 expected: Optional[Mapping[str, Mapping[str, int]]] = None) -> WriteResult:
    """Write one ``<split>.jsonl`` per split, in the given record order.

    ``expected`` maps split -> {YN: n, FR: n}; missing questions are logged
    and returned in ``shortfall``.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    result = WriteResult({}, {})
    for split in SPLITS:
        records = corpus.get(split, [])
        path = out / f"{split}.jsonl"
        with path.open("w", encoding="utf-8", newline="\n") as fh:
            for rec in records:
                fh.write(_dump(rec) + "\n")
        result.paths[split] = path
        result.counts[split] = question_counts(records)
        if expected and split in expected:
            short = {q: n - result.counts[split][q] for q, n in expected[split].items()
                     if n > result.counts[split].get(q, 0)}
            if short:
                log.warning("%s: short of requested questions by %s", split, short)
                result.shortfall[split] = short
    return result


def iter_records(path: PathLike) -> Iterator[dict]:
    """Stream records from one ``.jsonl`` file; blank lines are skipped."""
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        for n, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as e:
                raise ParseError(f"{path.name}: invalid JSON ({e.msg})", n) from None
            if not isinstance(rec, dict):
                raise ParseError(f"{path.name}: record must be a JSON object", n)
            yield rec


def corpus_files(path: PathLike) -> Dict[str, Path]:
    """Split name -> file for a corpus directory or a single ``.jsonl`` file."""
    path = Path(path)
    if path.is_dir():
        return {s: path / f"{s}.jsonl" for s in SPLITS if (path / f"{s}.jsonl").exists()}
    if not path.exists():
        raise FileNotFoundError(path)
    return {path.stem: path}


def read_corpus(path: PathLike) -> Dict[str, List[dict]]:
    return {split: list(iter_records(p)) for split, p in corpus_files(path).items()}


# -- validation ------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    kind: str
    detail: str
    question: Optional[int] = None

    def __str__(self) -> str:
        where = f"q{self.question}: " if self.question is not None else ""
        return f"{self.kind}: {where}{self.detail}"


def _fact(d: Mapping) -> Fact:
    return Fact(Rel.parse(d["relation"]), d["head"], d["tail"])


def _check_span(text: str, span: Optional[Mapping], what: str) -> Optional[str]:
    if span is None:
        return None
    s, e = span["start"], span["end"]
    if not (0 <= s < e <= len(text)) or text[s:e] != span["text"]:
        return f"{what} span {s}:{e} does not match {span['text']!r}"
    return None


def _check_sentences(record: Mapping, facts: Mapping[str, Fact]) -> List[Violation]:
    out = []
    story = record["story"]
    realized: Counter = Counter()
    for i, sent in enumerate(record["sentences"]):
        text, off = sent["text"], sent.get("offset")
        if off is None or story[off:off + len(text)] != text:
            out.append(Violation("span", f"sentence {i} is not at offset {off} of the story"))
        for t in sent["triplets"]:
            for role in ("trajector", "landmark", "spatial_indicator"):
                err = _check_span(text, t.get(role), f"sentence {i} {role}")
                if err:
                    out.append(Violation("span", err))
            fid = t.get("fact_id")
            realized[fid] += 1
            f = facts.get(fid)
            if f is None or (f.relation.value, f.head, f.tail) != (t["relation"], t["head"], t["tail"]):
                out.append(Violation("span", f"sentence {i} triplet does not match fact {fid}"))
    for fid in facts:
        if realized[fid] != 1:
            out.append(Violation("span", f"fact {fid} realized {realized[fid]} times"))
    return out


def _spec(q: Mapping, facts: Mapping[str, Fact], gold) -> QuestionSpec:
    supporting = tuple(facts[i] for i in q["supporting_facts"])
    return QuestionSpec(
        qtype=QType(q["qtype"]), head_id=q.get("head_id"), tail_id=q.get("tail_id"),
        head_desc=ReferringExpression.from_dict(q["head"]),
        tail_desc=ReferringExpression.from_dict(q["tail"]),
        gold=gold, k=len(supporting), supporting=supporting,
        probe=Rel.parse(q["probe"]) if q.get("probe") else None,
        quantifier=Quantifier(q.get("quantifier", "none")),
    )


def _gold(q: Mapping):
    if q["qtype"] == QType.YN.value:
        return q["answer"][0] if len(q["answer"]) == 1 else None
    return frozenset(Rel.parse(a) for a in q["answer"])


def _show(gold) -> str:
    return gold if isinstance(gold, str) else "{" + ", ".join(sorted(r.value for r in gold)) + "}"


def _check_question(qi: int, q: Mapping, record: Mapping, facts: Mapping[str, Fact],
                    story: List[Fact]) -> List[Violation]:
    out: List[Violation] = []

    def bad(kind, detail):
        out.append(Violation(kind, detail, qi))

    missing = [k for k in _QUESTION_KEYS if k not in q]
    if missing:
        bad("schema", f"missing fields {missing}")
        return out
    qtype = q["qtype"]
    if qtype not in ("YN", "FR"):
        bad("schema", f"unknown qtype {qtype!r}")
        return out
    want = YN_CANDIDATES if qtype == "YN" else FR_CANDIDATES
    if q["candidate_answers"] != want:
        bad("candidates", "candidate answers differ from the fixed list")
    if any(a not in want for a in q["answer"]):
        bad("candidates", f"answer {q['answer']} outside the candidate list")
        return out
    if qtype == "YN" and len(q["answer"]) != 1:
        bad("schema", "YN questions have exactly one answer")
        return out

    for role in ("trajector", "landmark", "spatial_indicator"):
        err = _check_span(q["text"], q["sprl"].get(role), f"question {role}")
        if err:
            bad("span", err)

    unknown = [i for i in q["supporting_facts"] if i not in facts]
    if unknown:
        bad("schema", f"supporting facts {unknown} are not story facts")
        return out
    k = q["k"]
    if k != len(q["supporting_facts"]):
        bad("k", f"k={k} but {len(q['supporting_facts'])} supporting facts")
    if k < 2:
        bad("k", f"k={k} is below two reasoning steps")
    if out and out[-1].kind == "k":
        return out

    support = set(q["supporting_facts"])
    expected_idx = [i for i, s in enumerate(record["sentences"])
                    if support & {t.get("fact_id") for t in s["triplets"]}]
    if q["supporting_sentence_indices"] != expected_idx:
        bad("support", f"supporting sentences {q['supporting_sentence_indices']} != {expected_idx}")

    gold = _gold(q)
    if qtype == "FR":
        pair = find_exclusion_pair(gold)
        if pair:
            bad("exclusion", f"answer holds mutually exclusive {pair[0].value} and {pair[1].value}")

    domain = sorted({e for f in story for e in (f.head, f.tail)})
    try:
        spec = _spec(q, facts, gold)
        resolve = resolver(record["entities"], domain)
        alone = compute_answer(FactBase.of(spec.supporting, domain), spec, resolve)
    except (SpatialQAError, KeyError, ValueError) as e:
        bad("answer-mismatch", f"cannot recompute the answer: {e}")
        return out
    if alone != gold:
        bad("answer-mismatch", f"gold {_show(gold)} but supporting facts give {_show(alone)}")
        return out
    full = compute_answer(FactBase.of(story), spec, resolve)
    if full != gold:
        bad("answer-mismatch", f"gold {_show(gold)} but the whole story gives {_show(full)}")

    # The derivation between the question's own endpoints must need exactly k facts.
    head, tail = q.get("head_id"), q.get("tail_id")
    if head in domain and tail in domain:
        rels = all_relations(FactBase.of(spec.supporting, domain), head, tail) & frozenset(CANDIDATE_LABELS)
        if not rels:
            bad("k", f"supporting facts derive nothing between {head} and {tail}")
        elif _distance(story, head, tail) < k:
            base = FactBase.of(story)
            for r in sorted(rels):
                _, kmin = minimal_support(base, Fact(r, head, tail))
                if kmin != k:
                    bad("k", f"{r.value}({head},{tail}) needs {kmin} facts, not {k}")
    return out


def validate_record(record: Mapping) -> List[Violation]:
    """Every broken invariant of one record; an empty list means valid."""
    missing = [k for k in _RECORD_KEYS if k not in record]
    if missing:
        return [Violation("schema", f"missing fields {missing}")]
    try:
        facts = {d["id"]: _fact(d) for d in record["facts"]}
    except (KeyError, ValueError, TypeError) as e:
        return [Violation("schema", f"malformed fact: {e}")]
    story = list(facts.values())
    out = _check_sentences(record, facts)
    for qi, q in enumerate(record["questions"]):
        out.extend(_check_question(qi, q, record, facts, story))
    return out


# -- statistics ------------------------------------------------------------

@dataclass
class StatsReport:
    records: Dict[str, int]
    questions: Dict[str, Dict[str, int]]
    mean_sentences: Optional[float]
    mean_tokens: Optional[float]
    mean_relations: Optional[float]
    yes_rate: Optional[float]
    fr_label_rates: Dict[str, float]
    k_histogram: Dict[int, int]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["k_histogram"] = {str(k): v for k, v in sorted(self.k_histogram.items())}
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def format(self) -> str:
        def num(x, fmt="{:.2f}"):
            return "n/a" if x is None else fmt.format(x)

        lines = ["split   records      YN      FR"]
        for split, n in self.records.items():
            q = self.questions[split]
            lines.append(f"{split:<7} {n:>7} {q['YN']:>7} {q['FR']:>7}")
        lines += [
            f"mean sentences/story  {num(self.mean_sentences)}",
            f"mean tokens/story     {num(self.mean_tokens)}",
            f"mean relations/story  {num(self.mean_relations)}",
            f"YN yes-rate           {num(self.yes_rate, '{:.3f}')}",
            "k histogram           " + (" ".join(f"{k}:{v}" for k, v in sorted(self.k_histogram.items())) or "n/a"),
        ]
        if self.fr_label_rates:
            rates = sorted(self.fr_label_rates.items(), key=lambda kv: (-kv[1], kv[0]))
            lines.append("FR label presence     " + " ".join(f"{k}:{v:.2f}" for k, v in rates))
        return "\n".join(lines)


def tokenize(text: str) -> List[str]:
    """Whitespace tokens, so punctuation stays attached to its word."""
    return text.split()


def stats_from_records(corpus: Mapping[str, Iterable[Mapping]]) -> StatsReport:
    """Statistics over split -> records; each iterable is consumed once."""
    records: Dict[str, int] = {}
    questions: Dict[str, Dict[str, int]] = {}
    n = sentences = tokens = relations = 0
    yes = yn = fr = 0
    labels: Counter = Counter()
    ks: Counter = Counter()
    for split, recs in corpus.items():
        records[split] = 0
        qc = questions[split] = {"YN": 0, "FR": 0}
        for rec in recs:
            records[split] += 1
            n += 1
            sentences += len(rec["sentences"])
            tokens += len(tokenize(rec["story"]))
            relations += len(rec["facts"])
            for q in rec["questions"]:
                qc[q["qtype"]] += 1
                ks[q["k"]] += 1
                if q["qtype"] == "YN":
                    yn += 1
                    yes += q["answer"] == [YES]
                else:
                    fr += 1
                    labels.update(set(q["answer"]))
    return StatsReport(
        records=records,
        questions=questions,
        mean_sentences=sentences / n if n else None,
        mean_tokens=tokens / n if n else None,
        mean_relations=relations / n if n else None,
        yes_rate=yes / yn if yn else None,
        fr_label_rates={label: labels[label] / fr for label in FR_CANDIDATES} if fr else {},
        k_histogram=dict(sorted(ks.items())),
    )


def compute_stats(path: PathLike) -> StatsReport:
    """Single streaming pass over a corpus directory or one ``.jsonl`` file."""
    return stats_from_records({s: iter_records(p) for s, p in corpus_files(path).items()})


# -- rebalancing -----------------------------------------------------------

def yes_rate(records: Iterable[Mapping]) -> Optional[float]:
    answers = [q["answer"] == [YES] for r in records for q in r["questions"] if q["qtype"] == "YN"]
    return sum(answers) / len(answers) if answers else None


def rebalance_yn(records: Sequence[Mapping], target: float, rng: random.Random,
                 tolerance: float = 0.02) -> List[dict]:
    """Drop majority-answer YN questions until the yes-rate is near ``target``.

    Records left without questions are dropped; the rest keep their order and
    all other fields. A rate already within ``tolerance`` is left alone.
    """
    if not 0.0 < target < 1.0:
        raise ValueError("target yes-rate must lie in (0, 1)")
    slots: Dict[str, List[Tuple[int, int]]] = {YES: [], NO: []}
    for ri, rec in enumerate(records):
        for qi, q in enumerate(rec["questions"]):
            if q["qtype"] == "YN":
                slots[q["answer"][0]].append((ri, qi))
    n_yes, n_no = len(slots[YES]), len(slots[NO])
    if n_yes + n_no == 0 or abs(n_yes / (n_yes + n_no) - target) <= tolerance:
        return [dict(r) for r in records]
    if n_yes / (n_yes + n_no) > target:
        major, keep = YES, round(target * n_no / (1 - target))
    else:
        major, keep = NO, round((1 - target) * n_yes / target)
    if keep == 0:
        log.warning("yes-rate %.2f is infeasible: no %s answers to balance against",
                    target, NO if major == YES else YES)
        return [dict(r) for r in records]
    drop = set(rng.sample(slots[major], len(slots[major]) - keep))
    out = []
    for ri, rec in enumerate(records):
        qs = [q for qi, q in enumerate(rec["questions"]) if (ri, qi) not in drop]
        if qs:
            out.append({**rec, "questions": qs})
    return out
