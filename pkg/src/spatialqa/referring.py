"""Property-based referring expressions and their resolution.

Entities are looked up through a plain table ``id -> properties`` so the same
resolver works on live scenes and on serialized records::

    {"o1": {"kind": "object", "size": "big", "color": "black",
            "shape": "circle", "block": "b0"},
     "b0": {"kind": "block", "label": "A"}}
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from itertools import combinations
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional

from .errors import UniqueDescriptionError, UnresolvableDescription
from .scene import Scene

PROPERTY_ORDER = ("size", "color", "shape")

EntityTable = Mapping[str, Mapping[str, str]]


@dataclass(frozen=True)
class ReferringExpression:
    surface: str
    constraints: Mapping[str, str]
    targets: FrozenSet[str]

    @property
    def is_block(self) -> bool:
        return "block" in self.constraints

    def to_dict(self) -> dict:
        return {
            "surface": self.surface,
            "constraints": dict(self.constraints),
            "targets": sorted(self.targets),
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "ReferringExpression":
        return cls(d["surface"], dict(d["constraints"]), frozenset(d["targets"]))


def entity_table(scene: Scene) -> Dict[str, Dict[str, str]]:
    table = {b.id: {"kind": "block", "label": b.label} for b in scene.blocks}
    for o in scene.objects:
        table[o.id] = {"kind": "object", "size": o.size, "color": o.color,
                       "shape": o.shape, "block": o.block_id}
    return table


def matches(props: Mapping[str, str], eid: str, constraints: Mapping[str, str]) -> bool:
    if "block" in constraints:
        return eid == constraints["block"]
    if props.get("kind") != "object":
        return False
    for key, value in constraints.items():
        actual = props.get("block") if key == "in_block" else props.get(key)
        if actual != value:
            return False
    return True


def resolve(constraints: Mapping[str, str], table: EntityTable,
            domain: Optional[Iterable[str]] = None) -> FrozenSet[str]:
    """Entities in ``domain`` (default: whole table) satisfying ``constraints``."""
    ids = table.keys() if domain is None else domain
    return frozenset(e for e in ids if matches(table[e], e, constraints))


def resolver(table: EntityTable, domain: Optional[Iterable[str]] = None):
    """Callable mapping a ReferringExpression to the entity ids it denotes."""
    domain = None if domain is None else frozenset(domain)

    def _resolve(expr: ReferringExpression) -> FrozenSet[str]:
        found = resolve(expr.constraints, table, domain)
        if not found:
            raise UnresolvableDescription(expr.surface)
        return found

    return _resolve


def noun_phrase(constraints: Mapping[str, str], table: EntityTable, plural: bool = False) -> str:
    """Bare noun phrase (no determiner) for a constraint set."""
    if "block" in constraints:
        return f"block {table[constraints['block']]['label']}"
    words = [constraints[p] for p in ("size", "color") if p in constraints]
    noun = constraints.get("shape", "object")
    words.append(noun + "s" if plural else noun)
    phrase = " ".join(words)
    if "in_block" in constraints:
        phrase += f" in block {table[constraints['in_block']]['label']}"
    return phrase


def _expression(constraints: Dict[str, str], table: EntityTable, domain) -> ReferringExpression:
    return ReferringExpression(noun_phrase(constraints, table), constraints,
                               resolve(constraints, table, domain))


def describe_entity(eid: str, table: EntityTable, mode: str = "unique",
                    rng: Optional[random.Random] = None,
                    domain: Optional[Iterable[str]] = None,
                    qualify_block: bool = False) -> ReferringExpression:
    """Describe ``eid`` by a subset of its properties.

    ``unique`` picks a smallest subset whose extension over ``domain`` is
    exactly ``{eid}``, raising UniqueDescriptionError when none exists.
    ``ambiguous`` picks any non-empty subset, preferring ones that also
    cover other entities.
    """
    rng = rng or random.Random(0)
    domain = list(table) if domain is None else list(domain)
    if eid not in domain:
        raise KeyError(eid)
    props = table[eid]
    if props["kind"] == "block":
        return _expression({"block": eid}, table, domain)

    subsets: List[tuple] = []
    for n in range(1, len(PROPERTY_ORDER) + 1):
        group = list(combinations(PROPERTY_ORDER, n))
        rng.shuffle(group)
        subsets.extend(group)

    def constraints_for(keys) -> Dict[str, str]:
        c = {k: props[k] for k in keys}
        if qualify_block:
            c["in_block"] = props["block"]
        return c

    if mode == "unique":
        for keys in subsets:
            c = constraints_for(keys)
            if resolve(c, table, domain) == {eid}:
                return _expression(c, table, domain)
        raise UniqueDescriptionError(f"no property subset singles out {eid}")
    if mode == "ambiguous":
        shared = [k for k in subsets if len(resolve(constraints_for(k), table, domain)) > 1]
        keys = rng.choice(shared or subsets)
        return _expression(constraints_for(keys), table, domain)
    raise ValueError(f"unknown mode {mode!r}")


def describe_uniquely(eid: str, table: EntityTable, rng: Optional[random.Random] = None,
                      domain: Optional[Iterable[str]] = None) -> ReferringExpression:
    """Unique description, falling back to qualifying the owning block."""
    try:
        return describe_entity(eid, table, "unique", rng, domain)
    except UniqueDescriptionError:
        return describe_entity(eid, table, "unique", rng, domain, qualify_block=True)
