"""End-to-end corpus generation: sample, reason, select, realize, assemble."""

from __future__ import annotations

import dataclasses
import logging
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import yaml

from .errors import ConfigError, InconsistentAssignment, NoValidPath
from .lexicon import VARIANTS, Lexicon, load_lexicon
from .questions import (
    NO,
    YES,
    QType,
    Quantifier,
    QuestionPlan,
    QuestionSpec,
    add_distractors,
    finalize_question,
    longest_valid_paths,
    plan_question,
    preserves,
)
from .reasoner import Fact
from .referring import entity_table
from .relations import CANDIDATE_LABELS
from .scene import SceneConfig, build_scene_graph, sample_scene
from .textgen import realize_question, realize_story, story_text

log = logging.getLogger(__name__)

SPLITS = ("train", "dev", "test")
PATH_TRIES = 5
DEFAULT_COUNTS = {"train": 20000, "dev": 3000, "test": 3000}


@dataclass
class GeneratorConfig:
    seed: int = 0
    counts: Dict[str, Dict[str, int]] = field(
        default_factory=lambda: {s: {"YN": n, "FR": n} for s, n in DEFAULT_COUNTS.items()})
    qtype: str = "both"
    lexicon: str = "full"
    depth_remap_p: float = 0.3
    distractors: Tuple[int, int] = (2, 5)
    max_path_len: int = 5
    questions_per_story: Tuple[int, int] = (2, 4)
    p_no: float = 0.5
    quantifier_weights: Dict[str, float] = field(
        default_factory=lambda: {"none": 0.5, "any": 0.25, "all": 0.25})
    pair_prob: float = 0.2
    yes_rate: Optional[float] = None
    scene: SceneConfig = field(default_factory=SceneConfig)
    max_scene_attempts: int = 200

    def __post_init__(self):
        if isinstance(self.scene, dict):
            self.scene = SceneConfig(**{k: tuple(v) if isinstance(v, list) else v
                                        for k, v in self.scene.items()})
        self.distractors = tuple(self.distractors)
        self.questions_per_story = tuple(self.questions_per_story)
        self.validate()

    def validate(self):
        if self.qtype not in ("yn", "fr", "both"):
            raise ConfigError(f"qtype must be yn, fr or both, not {self.qtype!r}")
        for split, per in self.counts.items():
            if split not in SPLITS:
                raise ConfigError(f"unknown split {split!r}")
            for qt, n in per.items():
                if qt not in ("YN", "FR") or not isinstance(n, int) or n < 0:
                    raise ConfigError(f"bad count {split}.{qt}={n!r}")
        for name in ("depth_remap_p", "p_no", "pair_prob"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1]")
        if self.yes_rate is not None and not 0.0 < self.yes_rate < 1.0:
            raise ConfigError("yes_rate must lie in (0, 1)")
        lo, hi = self.distractors
        if lo < 0 or hi < lo:
            raise ConfigError("distractors range must satisfy 0 <= lo <= hi")
        lo, hi = self.questions_per_story
        if lo < 1 or hi < lo:
            raise ConfigError("questions_per_story range must satisfy 1 <= lo <= hi")
        if self.max_path_len < 2:
            raise ConfigError("max_path_len must be at least 2")
        if set(self.quantifier_weights) - {"none", "any", "all"}:
            raise ConfigError("quantifier_weights keys are none, any, all")
        if self.lexicon not in VARIANTS and not Path(self.lexicon).exists():
            raise ConfigError(f"lexicon file not found: {self.lexicon}")

    def wanted(self, split: str) -> Dict[str, int]:
        per = dict(self.counts.get(split, {}))
        if self.qtype == "yn":
            per["FR"] = 0
        elif self.qtype == "fr":
            per["YN"] = 0
        return {"YN": per.get("YN", 0), "FR": per.get("FR", 0)}

    @classmethod
    def from_dict(cls, data: dict) -> "GeneratorConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(**data)
        except TypeError as e:
            raise ConfigError(str(e)) from None

    @classmethod
    def from_file(cls, path) -> "GeneratorConfig":
        try:
            data = yaml.safe_load(Path(path).read_text("utf-8")) or {}
        except (OSError, yaml.YAMLError) as e:
            raise ConfigError(f"cannot read config {path}: {e}") from None
        if not isinstance(data, dict):
            raise ConfigError("config must be a mapping")
        return cls.from_dict(data)


def _fact_dict(fid: str, f: Fact) -> dict:
    return {"id": fid, "relation": f.relation.value, "head": f.head, "tail": f.tail}


def _answer_list(gold) -> List[str]:
    if isinstance(gold, str):
        return [gold]
    return sorted(r.value for r in gold)


def _choose_quantifier(rng: random.Random, weights: Dict[str, float]) -> Quantifier:
    names = sorted(weights)
    return Quantifier(rng.choices(names, [weights[n] for n in names])[0])


def build_record(scene_seed: int, qtypes: Sequence[QType], config: GeneratorConfig,
                 lexicon: Lexicon) -> dict:
    """One story with questions from the scene drawn with ``scene_seed``.

    Raises NoValidPath when the scene has no multi-hop question.
    """
    rng = random.Random(scene_seed)
    scene = sample_scene(config.scene, rng)
    graph = build_scene_graph(scene, rng, config.depth_remap_p, config.scene.max_assignment_rounds)
    scene = graph.scene
    table = entity_table(scene)

    plans: List[QuestionPlan] = []
    core: List[Fact] = []
    used_pairs: List[Tuple[str, str]] = []
    for qtype in qtypes:
        try:
            pool = longest_valid_paths(graph, config.max_path_len, used_pairs)
        except NoValidPath:
            if not plans:
                raise
            break
        # Later questions must not shortcut or change earlier ones.
        for path in rng.sample(pool, min(len(pool), PATH_TRIES)):
            plan = plan_question(path, qtype, rng, config.p_no)
            merged = core + [f for f in path.edges if f not in core]
            if all(preserves(p, merged) for p in plans + [plan]):
                plans.append(plan)
                core = merged
                used_pairs.append((path.head, path.tail))
                break
        else:
            break
    if not plans:
        raise NoValidPath("no compatible question")

    extras = add_distractors(graph, core, plans, rng, rng.randint(*config.distractors))
    story = core + extras
    rng.shuffle(story)

    specs: List[QuestionSpec] = []
    for plan in plans:
        quant = _choose_quantifier(rng, config.quantifier_weights) if plan.qtype is QType.YN else Quantifier.NONE
        spec = finalize_question(plan, story, table, rng, quant)
        specs.append(spec)

    fact_ids = {f: graph.fact_id(f) for f in story}
    sentences = realize_story(story, table, lexicon, rng, fact_ids, config.pair_prob)
    text, offsets = story_text(sentences)
    domain = sorted({e for f in story for e in (f.head, f.tail)})

    questions = []
    for i, spec in enumerate(specs):
        qtext, triplet = realize_question(spec, lexicon, rng, table)
        support_ids = {fact_ids[f] for f in spec.supporting}
        questions.append({
            "id": i,
            "qtype": spec.qtype.value,
            "text": qtext,
            "quantifier": spec.quantifier.value,
            "probe": spec.probe.value if spec.probe else None,
            "head_id": spec.head_id,
            "tail_id": spec.tail_id,
            "head": spec.head_desc.to_dict(),
            "tail": spec.tail_desc.to_dict(),
            "candidate_answers": [YES, NO] if spec.qtype is QType.YN else [r.value for r in CANDIDATE_LABELS],
            "answer": _answer_list(spec.gold),
            "k": spec.k,
            "supporting_facts": sorted(support_ids),
            "supporting_sentence_indices": [j for j, s in enumerate(sentences)
                                            if support_ids & set(s.fact_ids)],
            "sprl": triplet.to_dict(),
        })

    return {
        "scene_seed": scene_seed,
        "depth_remap": scene.depth_remap_applied,
        "story": text,
        "sentences": [dict(s.to_dict(), offset=o) for s, o in zip(sentences, offsets)],
        "facts": [_fact_dict(fact_ids[f], f) for f in story],
        "entities": {e: dict(table[e]) for e in domain},
        "questions": questions,
    }


def generate_story(story_seed: int, qtypes: Sequence[QType], config: GeneratorConfig,
                   lexicon: Lexicon) -> dict:
    """Resample scenes from ``story_seed`` until one yields a question."""
    seeds = random.Random(story_seed)
    for _ in range(config.max_scene_attempts):
        scene_seed = seeds.getrandbits(63)
        try:
            return build_record(scene_seed, qtypes, config, lexicon)
        except (NoValidPath, InconsistentAssignment):
            continue
    raise NoValidPath(f"no usable scene after {config.max_scene_attempts} attempts")


_WORKER_LEXICON: Dict[str, Lexicon] = {}


def _run_task(task):
    config, story_seed, qtypes = task
    lex = _WORKER_LEXICON.get(config.lexicon)
    if lex is None:
        lex = _WORKER_LEXICON[config.lexicon] = load_lexicon(config.lexicon)
    return generate_story(story_seed, qtypes, config, lex)


def _plan_split(rng: random.Random, remaining: Dict[str, int], qps: Tuple[int, int]):
    tasks = []
    left = dict(remaining)
    while sum(left.values()) > 0:
        n = min(rng.randint(*qps), sum(left.values()))
        qtypes = []
        for _ in range(n):
            names = [q for q in ("YN", "FR") if left[q] > 0]
            q = rng.choices(names, [left[x] for x in names])[0]
            left[q] -= 1
            qtypes.append(QType(q))
        tasks.append((rng.getrandbits(63), qtypes))
    return tasks


def generate_split(config: GeneratorConfig, split: str, workers: int = 1,
                   lexicon: Optional[Lexicon] = None) -> List[dict]:
    """Records for one split, with exactly the configured question counts when possible."""
    rng = random.Random(f"{config.seed}:{split}")
    remaining = config.wanted(split)
    records: List[dict] = []
    if lexicon is not None:
        _WORKER_LEXICON[config.lexicon] = lexicon
    pool = ProcessPoolExecutor(workers) if workers > 1 else None
    try:
        rounds = 0
        while sum(remaining.values()) > 0:
            rounds += 1
            if rounds > 50:
                log.warning("%s: giving up with %s questions missing", split, remaining)
                break
            tasks = [(config, seed, qtypes) for seed, qtypes in _plan_split(rng, remaining, config.questions_per_story)]
            results = pool.map(_run_task, tasks, chunksize=8) if pool else map(_run_task, tasks)
            for rec in results:
                for q in rec["questions"]:
                    remaining[q["qtype"]] -= 1
                records.append(rec)
    finally:
        if pool:
            pool.shutdown()
    for i, rec in enumerate(records):
        rec_id = {"id": f"{split}-{i:06d}", "split": split}
        records[i] = {**rec_id, **rec}
    if config.yes_rate is not None:
        from .dataset import rebalance_yn
        records = rebalance_yn(records, config.yes_rate, random.Random(f"{config.seed}:{split}:balance"))
    return records


def generate_corpus(config: GeneratorConfig, workers: int = 1) -> Dict[str, List[dict]]:
    lexicon = load_lexicon(config.lexicon)
    return {split: generate_split(config, split, workers, lexicon) for split in SPLITS}
