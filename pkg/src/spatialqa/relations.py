"""Closed vocabulary of qualitative spatial relations.

Sixteen relation types drawn from three formalisms:

- Topological (RCC8): DC, EC, PO, EQ, TPP, NTPP, TPPI, NTPPI
- Directional: LEFT, RIGHT, ABOVE, BELOW, FRONT, BEHIND
- Distance: NEAR, FAR

The canonical string form of every relation is its lowercase name, which is
what all file formats use.
"""

from __future__ import annotations

from enum import Enum
from typing import Dict, FrozenSet, Iterable


class Formalism(str, Enum):
    TOPOLOGICAL = "topological"
    DIRECTIONAL = "directional"
    DISTANCE = "distance"


class Rel(str, Enum):
    """A spatial relation type. Members compare and sort by their string name."""

    DC = "dc"
    EC = "ec"
    PO = "po"
    EQ = "eq"
    TPP = "tpp"
    NTPP = "ntpp"
    TPPI = "tppi"
    NTPPI = "ntppi"
    LEFT = "left"
    RIGHT = "right"
    ABOVE = "above"
    BELOW = "below"
    FRONT = "front"
    BEHIND = "behind"
    NEAR = "near"
    FAR = "far"

    def __str__(self) -> str:
        return self.value

    def __repr__(self) -> str:
        return self.name

    @property
    def formalism(self) -> Formalism:
        if self in RCC8:
            return Formalism.TOPOLOGICAL
        if self in DIR:
            return Formalism.DIRECTIONAL
        return Formalism.DISTANCE

    @property
    def bit(self) -> int:
        return 1 << _INDEX[self]

    @classmethod
    def parse(cls, name: str) -> "Rel":
        """Look up a relation by name, case-insensitively."""
        try:
            return cls(name.strip().lower())
        except ValueError:
            raise ValueError(f"unknown relation {name!r}") from None


RCC8: FrozenSet[Rel] = frozenset(
    {Rel.DC, Rel.EC, Rel.PO, Rel.EQ, Rel.TPP, Rel.NTPP, Rel.TPPI, Rel.NTPPI}
)
DIR: FrozenSet[Rel] = frozenset(
    {Rel.LEFT, Rel.RIGHT, Rel.ABOVE, Rel.BELOW, Rel.FRONT, Rel.BEHIND}
)
DIS: FrozenSet[Rel] = frozenset({Rel.NEAR, Rel.FAR})
STAR_PP: FrozenSet[Rel] = frozenset({Rel.TPP, Rel.NTPP})
STAR_PPI: FrozenSet[Rel] = frozenset({Rel.TPPI, Rel.NTPPI})
PP: FrozenSet[Rel] = STAR_PP | STAR_PPI
RCC_MINUS_PP: FrozenSet[Rel] = RCC8 - PP

SYMMETRIC: FrozenSet[Rel] = DIS | RCC_MINUS_PP
TRANSITIVE: FrozenSet[Rel] = DIR | PP

# Labels a generated scene, story or FR answer may carry.
CANDIDATE_LABELS: tuple = tuple(r for r in Rel if r is not Rel.EQ)

_INDEX: Dict[Rel, int] = {r: i for i, r in enumerate(Rel)}

_INVERSE: Dict[Rel, Rel] = {
    Rel.LEFT: Rel.RIGHT,
    Rel.RIGHT: Rel.LEFT,
    Rel.ABOVE: Rel.BELOW,
    Rel.BELOW: Rel.ABOVE,
    Rel.FRONT: Rel.BEHIND,
    Rel.BEHIND: Rel.FRONT,
    Rel.TPP: Rel.TPPI,
    Rel.TPPI: Rel.TPP,
    Rel.NTPP: Rel.NTPPI,
    Rel.NTPPI: Rel.NTPP,
}


def inverse(r: Rel) -> Rel:
    """Relation that holds from tail to head whenever ``r`` holds from head to tail."""
    return _INVERSE.get(r, r)


def is_symmetric(r: Rel) -> bool:
    return r in SYMMETRIC


def is_transitive(r: Rel) -> bool:
    return r in TRANSITIVE


def _build_exclusions() -> Dict[Rel, FrozenSet[Rel]]:
    table: Dict[Rel, set] = {r: set() for r in Rel}
    for r in Rel:
        if not is_symmetric(r):
            table[r].add(inverse(r))
    for a in RCC8:
        table[a].update(RCC8 - {a})
    table[Rel.NEAR].add(Rel.FAR)
    table[Rel.FAR].add(Rel.NEAR)
    return {r: frozenset(s) for r, s in table.items()}


_EXCLUSIONS = _build_exclusions()


def exclusion_set(r: Rel) -> FrozenSet[Rel]:
    """Relations that can never hold together with ``r`` on the same ordered pair."""
    return _EXCLUSIONS[r]


def excludes(a: Rel, b: Rel) -> bool:
    return b in _EXCLUSIONS[a]


def find_exclusion_pair(rels: Iterable[Rel]):
    """Return the first mutually exclusive pair in ``rels`` (sorted), or None."""
    ordered = sorted(set(rels))
    for i, a in enumerate(ordered):
        for b in ordered[i + 1:]:
            if excludes(a, b):
                return a, b
    return None


# Bitmask views, used by the path search.
def mask_of(rels: Iterable[Rel]) -> int:
    m = 0
    for r in rels:
        m |= r.bit
    return m


def rels_of(mask: int) -> FrozenSet[Rel]:
    return frozenset(r for r in Rel if mask & r.bit)


DIR_MASK = mask_of(DIR)
TRANSITIVE_MASK = mask_of(TRANSITIVE)
STAR_PP_MASK = mask_of(STAR_PP)
STAR_PPI_MASK = mask_of(STAR_PPI)


def inverse_mask(mask: int) -> int:
    return mask_of(inverse(r) for r in rels_of(mask))
