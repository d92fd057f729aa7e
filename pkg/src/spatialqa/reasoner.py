"""Forward-chaining spatial reasoner.

Facts are signed atoms ``R(head, tail)``. The closure of a fact base is the
least fixpoint of the following rules, computed semi-naively (each round only
joins against facts that were new in the previous round):

=============== ================================================ ============
rule            premises                                         conclusion
=============== ================================================ ============
Not             R(X,Y), R in Dir|PP                              not inv(R)(X,Y)
Inverse         R(Y,X), R in Dir|PP                              inv(R)(X,Y)
Symmetry        R(Y,X), R in Dis|(RCC8-PP)                       R(X,Y)
Transitivity    R(X,Z), R(Z,Y), R in Dir|PP                      R(X,Y)
Combination     *PP(X,Z), R(Z,H), *PPi(H,Y), R in Dir            R(X,Y)
PPPropagation   *PP(X,Z), R(Z,Y)  or  R(X,Z), *PPi(Z,Y), R in Dir R(X,Y)
=============== ================================================ ============

Only positive facts act as premises. Every fact in the closure carries one
derivation of minimal depth.
"""

from __future__ import annotations

import re
from collections import defaultdict
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from itertools import combinations
from typing import (
    Dict,
    FrozenSet,
    Iterable,
    Iterator,
    List,
    Mapping,
    NamedTuple,
    Optional,
    Set,
    Tuple,
)

from .errors import NotDerivable, ParseError, UnknownEntity
from .relations import (
    DIR,
    STAR_PP,
    STAR_PPI,
    SYMMETRIC,
    TRANSITIVE,
    Rel,
    exclusion_set,
    find_exclusion_pair,
    inverse,
)


class Fact(NamedTuple):
    relation: Rel
    head: str
    tail: str
    positive: bool = True

    def negate(self) -> "Fact":
        return self._replace(positive=not self.positive)

    def reversed(self) -> "Fact":
        """The same statement read from tail to head."""
        return Fact(inverse(self.relation), self.tail, self.head, self.positive)

    def __str__(self) -> str:
        atom = f"{self.relation.value}({self.head},{self.tail})"
        return atom if self.positive else f"not {atom}"


class Rule(str, Enum):
    GIVEN = "given"
    NOT = "not"
    INVERSE = "inverse"
    SYMMETRY = "symmetry"
    TRANSITIVITY = "transitivity"
    COMBINATION = "combination"
    PP_PROPAGATION = "pp_propagation"


@dataclass(frozen=True)
class Derivation:
    conclusion: Fact
    rule: Rule
    premises: Tuple[Fact, ...] = ()
    depth: int = 0


@dataclass(frozen=True)
class FactBase:
    facts: FrozenSet[Fact]
    entities: FrozenSet[str]

    def __post_init__(self):
        for f in self.facts:
            if f.head not in self.entities:
                raise UnknownEntity(f.head)
            if f.tail not in self.entities:
                raise UnknownEntity(f.tail)
            if f.head == f.tail and f.relation is not Rel.EQ:
                raise ValueError(f"reflexive fact {f} is not allowed")

    @classmethod
    def of(cls, facts: Iterable[Fact], entities: Iterable[str] = ()) -> "FactBase":
        facts = frozenset(facts)
        ents = set(entities)
        for f in facts:
            ents.add(f.head)
            ents.add(f.tail)
        return cls(facts, frozenset(ents))

    def __len__(self) -> int:
        return len(self.facts)

    def __iter__(self) -> Iterator[Fact]:
        return iter(sorted(self.facts))


class Closure(Mapping):
    """Read-only mapping ``Fact -> Derivation`` with pairwise lookups."""

    def __init__(self, base: FactBase, derivations: Dict[Fact, Derivation]):
        self.base = base
        self._derivations = derivations
        self._pairs: Dict[Tuple[str, str], Set[Rel]] = defaultdict(set)
        for f in derivations:
            if f.positive:
                self._pairs[f.head, f.tail].add(f.relation)

    def __getitem__(self, fact: Fact) -> Derivation:
        return self._derivations[fact]

    def __iter__(self):
        return iter(self._derivations)

    def __len__(self) -> int:
        return len(self._derivations)

    def relations(self, a: str, b: str) -> FrozenSet[Rel]:
        return frozenset(self._pairs.get((a, b), ()))

    def pairs(self):
        return self._pairs.keys()

    def given_leaves(self, fact: Fact) -> FrozenSet[Fact]:
        """Given facts at the leaves of the recorded derivation of ``fact``."""
        leaves = set()
        stack = [fact]
        seen = set()
        while stack:
            f = stack.pop()
            if f in seen:
                continue
            seen.add(f)
            d = self._derivations[f]
            if d.rule is Rule.GIVEN:
                leaves.add(f)
            else:
                stack.extend(d.premises)
        return frozenset(leaves)


def _saturate(base: FactBase) -> Dict[Fact, Derivation]:
    derivs: Dict[Fact, Derivation] = {}
    out: Dict[str, List[Tuple[Rel, str]]] = defaultdict(list)
    inn: Dict[str, List[Tuple[Rel, str]]] = defaultdict(list)

    def add(f: Fact, d: Derivation):
        derivs[f] = d
        if f.positive:
            out[f.head].append((f.relation, f.tail))
            inn[f.tail].append((f.relation, f.head))

    for f in sorted(base.facts):
        add(f, Derivation(f, Rule.GIVEN))
    delta = sorted(f for f in base.facts if f.positive)

    depth = 0
    while delta:
        depth += 1
        new: Dict[Fact, Derivation] = {}

        def emit(c: Fact, rule: Rule, *premises: Fact):
            if c not in derivs and c not in new:
                new[c] = Derivation(c, rule, premises, depth)

        def join(p: Fact, q: Fact):
            # p = R1(X,Z), q = R2(Z,Y)
            r1, r2 = p.relation, q.relation
            x, y = p.head, q.tail
            if r1 is r2 and r1 in TRANSITIVE:
                emit(Fact(r1, x, y), Rule.TRANSITIVITY, p, q)
            if r1 in STAR_PP and r2 in DIR:
                emit(Fact(r2, x, y), Rule.PP_PROPAGATION, p, q)
            if r1 in DIR and r2 in STAR_PPI:
                emit(Fact(r1, x, y), Rule.PP_PROPAGATION, p, q)

        for f in delta:
            r, x, y = f.relation, f.head, f.tail
            if r in TRANSITIVE:
                emit(Fact(inverse(r), x, y, False), Rule.NOT, f)
                emit(Fact(inverse(r), y, x), Rule.INVERSE, f)
            if r in SYMMETRIC:
                emit(Fact(r, y, x), Rule.SYMMETRY, f)

            for r2, w in list(out[y]):
                join(f, Fact(r2, y, w))
            for r1, v in list(inn[x]):
                join(Fact(r1, v, x), f)

            # Combination with f in each of its three premise positions.
            if r in STAR_PP:
                for rd, h in list(out[y]):
                    if rd in DIR:
                        for rp, t in list(out[h]):
                            if rp in STAR_PPI:
                                emit(Fact(rd, x, t), Rule.COMBINATION,
                                     f, Fact(rd, y, h), Fact(rp, h, t))
            if r in DIR:
                for rp, s in list(inn[x]):
                    if rp in STAR_PP:
                        for rq, t in list(out[y]):
                            if rq in STAR_PPI:
                                emit(Fact(r, s, t), Rule.COMBINATION,
                                     Fact(rp, s, x), f, Fact(rq, y, t))
            if r in STAR_PPI:
                for rd, z in list(inn[x]):
                    if rd in DIR:
                        for rp, s in list(inn[z]):
                            if rp in STAR_PP:
                                emit(Fact(rd, s, y), Rule.COMBINATION,
                                     Fact(rp, s, z), Fact(rd, z, x), f)

        delta = sorted(f for f in new if f.positive)
        for f in sorted(new):
            add(f, new[f])
    return derivs


@lru_cache(maxsize=512)
def close(base: FactBase) -> Closure:
    """Least fixpoint of the rule set over ``base``."""
    return Closure(base, _saturate(base))


class Truth(str, Enum):
    TRUE = "TRUE"
    FALSE = "FALSE"
    UNKNOWN = "UNKNOWN"


def _check_entities(base: FactBase, *ids: str):
    for e in ids:
        if e not in base.entities:
            raise UnknownEntity(e)


def query(base: FactBase, probe: Fact) -> Truth:
    """Three-valued answer for ``probe`` against the closure of ``base``.

    A positive probe is FALSE when its negation is derived or when some
    mutually exclusive relation holds on the same ordered pair. A negative
    probe gets the flipped answer of its positive counterpart.
    """
    _check_entities(base, probe.head, probe.tail)
    if not probe.positive:
        flip = {Truth.TRUE: Truth.FALSE, Truth.FALSE: Truth.TRUE}
        t = query(base, probe.negate())
        return flip.get(t, t)
    cl = close(base)
    if probe in cl:
        return Truth.TRUE
    if probe.negate() in cl:
        return Truth.FALSE
    if cl.relations(probe.head, probe.tail) & exclusion_set(probe.relation):
        return Truth.FALSE
    return Truth.UNKNOWN


def all_relations(base: FactBase, a: str, b: str) -> FrozenSet[Rel]:
    _check_entities(base, a, b)
    return close(base).relations(a, b)


class Contradiction(NamedTuple):
    fact: Fact
    conflicting: Fact


def check_consistency(base: FactBase) -> Optional[Contradiction]:
    """Return the first contradiction in the closure of ``base``, or None.

    Clashes between two distinct entities are reported before reflexive ones,
    which only restate them.
    """
    cl = close(base)
    for f in sorted(cl, key=lambda f: (f.head == f.tail, f)):
        if not f.positive and f.negate() in cl:
            return Contradiction(f.negate(), f)
    for a, b in sorted(cl.pairs(), key=lambda p: (p[0] == p[1], p)):
        pair = find_exclusion_pair(cl.relations(a, b))
        if pair is not None:
            return Contradiction(Fact(pair[0], a, b), Fact(pair[1], a, b))
    return None


def is_consistent(base: FactBase) -> bool:
    return check_consistency(base) is None


def _connected(facts: Tuple[Fact, ...], a: str, b: str) -> bool:
    parent: Dict[str, str] = {}

    def find(x):
        parent.setdefault(x, x)
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for f in facts:
        parent[find(f.head)] = find(f.tail)
    if a not in parent or b not in parent:
        return False
    root = find(a)
    return find(b) == root and all(find(f.head) == root for f in facts)


def minimal_support(base: FactBase, target: Fact) -> Tuple[FrozenSet[Fact], int]:
    """Smallest subset of ``base.facts`` from which ``target`` is derivable.

    Among subsets of minimum size the lexicographically smallest (as a
    sorted tuple) is returned. Raises NotDerivable if ``target`` is not in
    the closure.
    """
    if not target.positive:
        raise ValueError("minimal_support needs a positive target")
    _check_entities(base, target.head, target.tail)
    cl = close(base)
    if target not in cl:
        raise NotDerivable(str(target))
    if target in base.facts:
        return frozenset({target}), 1

    upper = len(cl.given_leaves(target))
    # A support must be connected, so facts outside the target's component never help.
    candidates = sorted(f for f in base.facts if f.positive)
    component = _component(candidates, target.head)
    candidates = [f for f in candidates if f.head in component]
    for size in range(1, upper + 1):
        for combo in combinations(candidates, size):
            if not _connected(combo, target.head, target.tail):
                continue
            if target in close(FactBase.of(combo)):
                return frozenset(combo), size
    raise AssertionError("derivation leaves must form a support")  # pragma: no cover


def _component(facts: List[Fact], start: str) -> Set[str]:
    adj: Dict[str, Set[str]] = defaultdict(set)
    for f in facts:
        adj[f.head].add(f.tail)
        adj[f.tail].add(f.head)
    seen = {start}
    stack = [start]
    while stack:
        for n in adj[stack.pop()]:
            if n not in seen:
                seen.add(n)
                stack.append(n)
    return seen


# Textual facts: one atom per line, e.g. ``ntpp(a,x)`` or ``not left(a,b)``.
_ATOM = re.compile(
    r"^\s*(?P<neg>not\s+)?(?P<rel>[A-Za-z]+)\s*\(\s*(?P<a>[^,()\s]+)\s*,\s*(?P<b>[^,()\s]+)\s*\)\s*\.?\s*$"
)


def _parse_atom(text: str, line: Optional[int] = None):
    m = _ATOM.match(text)
    if not m:
        raise ParseError(f"cannot parse atom {text.strip()!r}", line)
    try:
        rel = Rel.parse(m["rel"])
    except ValueError as e:
        raise ParseError(str(e), line) from None
    return rel, m["a"], m["b"], m["neg"] is None


def parse_facts(text: str) -> List[Fact]:
    facts = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("%", 1)[0].split("#", 1)[0]
        if not line.strip():
            continue
        rel, a, b, pos = _parse_atom(line, lineno)
        if "?" in (a, b):
            raise ParseError("facts cannot contain '?'", lineno)
        facts.append(Fact(rel, a, b, pos))
    return facts


def format_facts(facts: Iterable[Fact]) -> str:
    return "".join(f"{f}\n" for f in facts)


@dataclass(frozen=True)
class Query:
    relation: Rel
    head: Optional[str]
    tail: Optional[str]
    positive: bool = True

    @property
    def is_open(self) -> bool:
        return self.head is None or self.tail is None


def parse_query(text: str) -> Query:
    rel, a, b, pos = _parse_atom(text)
    if a == "?" and b == "?":
        raise ParseError("a query may contain at most one '?' slot")
    return Query(rel, None if a == "?" else a, None if b == "?" else b, pos)


def answer_query(base: FactBase, q: Query):
    """Truth value for a ground query, or the sorted bindings of the open slot."""
    if not q.is_open:
        return query(base, Fact(q.relation, q.head, q.tail, q.positive))
    known = q.head if q.head is not None else q.tail
    _check_entities(base, known)
    cl = close(base)
    hits = []
    for e in sorted(base.entities):
        if e == known:
            continue
        h, t = (known, e) if q.head is not None else (e, known)
        if (Fact(q.relation, h, t, q.positive)) in cl:
            hits.append(e)
    return hits
