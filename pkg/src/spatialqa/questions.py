"""Question selection over scene graphs.

A path is a chain of scene-graph edges between two entities, each edge read
in whichever direction the chain needs. A path is valid when the reasoner
derives at least one relation between its endpoints from the path's edges
alone; its length is the number of reasoning steps ``k``.
"""

from __future__ import annotations

import random
from collections import defaultdict
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

from .errors import NoValidPath, UnresolvableDescription
from .reasoner import Fact, FactBase, all_relations, close, minimal_support
from .referring import ReferringExpression, describe_entity, describe_uniquely
from .relations import (
    CANDIDATE_LABELS,
    DIR_MASK,
    STAR_PP_MASK,
    STAR_PPI_MASK,
    TRANSITIVE_MASK,
    Rel,
    inverse,
    rels_of,
)
from .scene import SceneGraph

YES, NO = "Yes", "No"


class QType(str, Enum):
    YN = "YN"
    FR = "FR"


class Quantifier(str, Enum):
    NONE = "none"
    ANY = "any"
    ALL = "all"


@dataclass(frozen=True)
class CandidatePath:
    edges: Tuple[Fact, ...]
    nodes: Tuple[str, ...]
    inferred: Optional[FrozenSet[Rel]] = None

    @property
    def head(self) -> str:
        return self.nodes[0]

    @property
    def tail(self) -> str:
        return self.nodes[-1]

    def __len__(self) -> int:
        return len(self.edges)


Gold = Union[str, FrozenSet[Rel]]


@dataclass(frozen=True)
class QuestionSpec:
    qtype: QType
    head_id: str
    tail_id: str
    head_desc: Optional[ReferringExpression]
    tail_desc: Optional[ReferringExpression]
    gold: Gold
    k: int
    supporting: Tuple[Fact, ...]
    extras: Tuple[Fact, ...] = ()
    probe: Optional[Rel] = None
    quantifier: Quantifier = Quantifier.NONE

    def __post_init__(self):
        if self.k != len(self.supporting):
            raise ValueError("k must equal the number of supporting facts")
        if self.k < 2:
            raise ValueError("questions need at least two reasoning steps")


# -- path enumeration ------------------------------------------------------

def _adjacency(edges: Sequence[Fact]) -> Dict[str, List[Tuple[int, str]]]:
    adj: Dict[str, List[Tuple[int, str]]] = defaultdict(list)
    for i, f in enumerate(edges):
        adj[f.head].append((i, f.tail))
        adj[f.tail].append((i, f.head))
    return adj


def enumerate_paths(graph: SceneGraph, max_len: int = 5) -> List[CandidatePath]:
    """Every simple path of 1..max_len edges, in both directions."""
    if max_len < 1:
        raise ValueError("max_len must be positive")
    adj = _adjacency(graph.edges)
    paths = []

    def walk(nodes: List[str], eids: List[int]):
        if eids:
            paths.append(CandidatePath(tuple(graph.edges[i] for i in eids), tuple(nodes)))
        if len(eids) == max_len:
            return
        for i, nxt in adj[nodes[-1]]:
            if nxt not in nodes:
                walk(nodes + [nxt], eids + [i])

    for start in graph.nodes:
        walk([start], [])
    return paths


def validate_path(path: CandidatePath) -> FrozenSet[Rel]:
    """Relations derivable from head to tail using only the path's edges."""
    return all_relations(FactBase.of(path.edges), path.head, path.tail)


def compose_masks(first: int, second: int) -> int:
    """Relations derivable across X-Z-Y from relation sets on X-Z and Z-Y."""
    out = first & second & TRANSITIVE_MASK
    if first & STAR_PP_MASK:
        out |= second & DIR_MASK
    if second & STAR_PPI_MASK:
        out |= first & DIR_MASK
    return out


def valid_paths(graph: SceneGraph, max_len: int = 5) -> Dict[int, List[CandidatePath]]:
    """Valid paths grouped by length, built bottom-up from valid sub-paths.

    Every rule in the reasoner joins two chains at a shared entity, so a
    chain is valid exactly when some split point yields two valid halves
    whose relation sets compose. This avoids running the full reasoner on
    every simple path of the graph.
    """
    edges = graph.edges
    masks: Dict[Tuple[str, Tuple[int, ...]], int] = {}
    nodes_of: Dict[Tuple[str, Tuple[int, ...]], Tuple[str, ...]] = {}
    by_len: Dict[int, List[Tuple[str, Tuple[int, ...]]]] = defaultdict(list)
    starting: Dict[int, Dict[str, list]] = defaultdict(lambda: defaultdict(list))

    def register(key, nodes, mask):
        masks[key] = mask
        nodes_of[key] = nodes
        by_len[len(key[1])].append(key)
        starting[len(key[1])][nodes[0]].append(key)

    for i, f in enumerate(edges):
        register((f.head, (i,)), (f.head, f.tail), f.relation.bit)
        register((f.tail, (i,)), (f.tail, f.head), inverse(f.relation).bit)

    for length in range(2, max_len + 1):
        seen = set()
        for a in range(1, length):
            for pk in by_len[a]:
                p_nodes = nodes_of[pk]
                for qk in starting[length - a][p_nodes[-1]]:
                    q_nodes = nodes_of[qk]
                    if set(p_nodes[:-1]) & set(q_nodes):
                        continue
                    key = (p_nodes[0], pk[1] + qk[1])
                    if key in seen:
                        continue
                    seen.add(key)
                    nodes = p_nodes + q_nodes[1:]
                    mask = 0
                    for s in range(1, length):
                        left = masks.get((nodes[0], key[1][:s]), 0)
                        right = masks.get((nodes[s], key[1][s:]), 0)
                        if left and right:
                            mask |= compose_masks(left, right)
                    if mask:
                        register(key, nodes, mask)

    return {
        n: [CandidatePath(tuple(edges[i] for i in k[1]), nodes_of[k], rels_of(masks[k]))
            for k in keys]
        for n, keys in sorted(by_len.items()) if keys
    }


def longest_valid_paths(graph: SceneGraph, max_len: int = 5,
                        exclude_pairs: Iterable[Tuple[str, str]] = ()) -> List[CandidatePath]:
    """Valid paths of maximal length (at least 2) between non-excluded pairs."""
    excluded = {frozenset(p) for p in exclude_pairs}
    by_len = valid_paths(graph, max_len)
    for n in sorted(by_len, reverse=True):
        if n < 2:
            break
        pool = [p for p in by_len[n] if frozenset((p.head, p.tail)) not in excluded]
        if pool:
            return pool
    raise NoValidPath("no valid path with at least two edges")


# -- answers ---------------------------------------------------------------

Resolver = Callable[[ReferringExpression], FrozenSet[str]]


def compute_answer(story: FactBase, spec: QuestionSpec, resolve: Resolver) -> Gold:
    """Gold answer by resolving both descriptions and querying the reasoner.

    YN answers are closed-world: anything not derivably true is No.
    """
    heads = resolve(spec.head_desc)
    tails = resolve(spec.tail_desc)
    if not heads or not tails:
        raise UnresolvableDescription("description matches nothing")
    cl = close(story)
    if spec.qtype is QType.FR:
        rels = set()
        for h in heads:
            for t in tails:
                if h != t:
                    rels |= cl.relations(h, t)
        return frozenset(rels) & frozenset(CANDIDATE_LABELS)

    def holds(h: str, t: str) -> bool:
        return h != t and spec.probe in cl.relations(h, t)

    if spec.quantifier is Quantifier.ALL:
        subjects = [h for h in heads if h not in tails]
        ok = bool(subjects) and all(any(holds(h, t) for t in tails) for h in subjects)
    else:
        ok = any(holds(h, t) for h in heads for t in tails)
    return YES if ok else NO


# -- selection -------------------------------------------------------------

@dataclass
class QuestionPlan:
    """A question before descriptions are fixed: path, type and probe."""
    qtype: QType
    path: CandidatePath
    probe: Optional[Rel] = None
    planned: Gold = field(default=None)

    @property
    def k(self) -> int:
        return len(self.path)

    def target_relations(self) -> FrozenSet[Rel]:
        return self.path.inferred & frozenset(CANDIDATE_LABELS)


def plan_question(path: CandidatePath, qtype: QType, rng: random.Random,
                  p_no: float = 0.5) -> QuestionPlan:
    inferred = sorted(path.inferred & frozenset(CANDIDATE_LABELS))
    if qtype is QType.FR:
        return QuestionPlan(qtype, path, None, frozenset(inferred))
    others = [r for r in CANDIDATE_LABELS if r not in inferred]
    if rng.random() < p_no and others:
        return QuestionPlan(qtype, path, rng.choice(others), NO)
    return QuestionPlan(qtype, path, rng.choice(inferred), YES)


def preserves(plan: QuestionPlan, story: Sequence[Fact]) -> bool:
    """Story keeps the plan's head/tail relations and its reasoning-step count."""
    base = FactBase.of(story)
    got = all_relations(base, plan.path.head, plan.path.tail) & frozenset(CANDIDATE_LABELS)
    if got != plan.target_relations():
        return False
    if _distance(story, plan.path.head, plan.path.tail) >= plan.k:
        return True
    for r in got:
        _, k = minimal_support(base, Fact(r, plan.path.head, plan.path.tail))
        if k != plan.k:
            return False
    return True


def _distance(facts: Sequence[Fact], a: str, b: str) -> int:
    adj = defaultdict(set)
    for f in facts:
        adj[f.head].add(f.tail)
        adj[f.tail].add(f.head)
    frontier, seen, d = {a}, {a}, 0
    while frontier:
        if b in frontier:
            return d
        frontier = {n for x in frontier for n in adj[x]} - seen
        seen |= frontier
        d += 1
    return 1 << 30


def add_distractors(graph: SceneGraph, story: Sequence[Fact], plans: Sequence[QuestionPlan],
                    rng: random.Random, n: int, max_tries: int = 60) -> List[Fact]:
    """Up to ``n`` extra graph edges that leave every plan's answer and k intact."""
    story = list(story)
    pool = [f for f in graph.edges if f not in story]
    rng.shuffle(pool)
    extras: List[Fact] = []
    for cand in pool[:max_tries]:
        if len(extras) >= n:
            break
        trial = story + extras + [cand]
        if all(preserves(p, trial) for p in plans):
            extras.append(cand)
    return extras


def sample_distractors(graph: SceneGraph, path: CandidatePath, rng: random.Random,
                       n: int) -> List[Fact]:
    """Extra facts off ``path`` that never shorten the derivation of its relations."""
    if n < 0:
        raise ValueError("n must be non-negative")
    if n == 0:
        return []
    if path.inferred is None:
        path = replace(path, inferred=validate_path(path))
    plan = QuestionPlan(QType.FR, path, None, path.inferred)
    return add_distractors(graph, path.edges, [plan], rng, n)


def describe_question(plan: QuestionPlan, table, domain: Iterable[str], rng: random.Random,
                      quantifier: Quantifier = Quantifier.NONE) -> QuestionSpec:
    """Attach entity descriptions; the gold stays the planned one until recomputed."""
    domain = list(domain)
    head, tail = plan.path.head, plan.path.tail
    is_object = table[head]["kind"] == "object"
    if plan.qtype is QType.YN and quantifier is not Quantifier.NONE and is_object:
        head_desc = describe_entity(head, table, "ambiguous", rng, domain)
    else:
        quantifier = Quantifier.NONE
        head_desc = describe_uniquely(head, table, rng, domain)
    tail_desc = describe_uniquely(tail, table, rng, domain)
    return QuestionSpec(
        qtype=plan.qtype, head_id=head, tail_id=tail, head_desc=head_desc, tail_desc=tail_desc,
        gold=plan.planned, k=plan.k, supporting=plan.path.edges, probe=plan.probe,
        quantifier=quantifier,
    )


def finalize_question(plan: QuestionPlan, story: Sequence[Fact], table, rng: random.Random,
                      quantifier: Quantifier = Quantifier.NONE) -> QuestionSpec:
    """Describe the question against the story and fix its gold answer.

    A quantified question is kept only if its answer matches the planned
    one whether computed from the whole story or from the supporting facts
    alone; otherwise it is asked without a quantifier.
    """
    from .referring import resolver

    domain = sorted({e for f in story for e in (f.head, f.tail)})
    extras = tuple(f for f in story if f not in plan.path.edges)
    spec = describe_question(plan, table, domain, rng, quantifier)
    resolve = resolver(table, domain)
    full = compute_answer(FactBase.of(story), spec, resolve)
    alone = compute_answer(FactBase.of(plan.path.edges, domain), spec, resolve)
    if spec.quantifier is not Quantifier.NONE and not (full == alone == plan.planned):
        spec = describe_question(plan, table, domain, rng, Quantifier.NONE)
        full = compute_answer(FactBase.of(story), spec, resolve)
    return replace(spec, gold=full, extras=extras)


def select_question(graph: SceneGraph, rng: random.Random, qtype: QType, max_len: int = 5,
                    p_no: float = 0.5, quantifier: Quantifier = Quantifier.NONE,
                    table=None) -> QuestionSpec:
    """Question over a uniformly chosen longest valid path; the story is the path itself."""
    from .referring import entity_table

    pool = longest_valid_paths(graph, max_len)
    path = rng.choice(pool)
    plan = plan_question(path, qtype, rng, p_no)
    if table is None:
        table = entity_table(graph.scene) if graph.scene is not None else _bare_table(graph)
    return finalize_question(plan, path.edges, table, rng, quantifier)


def _bare_table(graph: SceneGraph):
    # Graphs without a scene: every node is a named block-like entity.
    return {n: {"kind": "block", "label": n} for n in graph.nodes}
