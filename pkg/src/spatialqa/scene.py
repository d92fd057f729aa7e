"""Scene sampling and ground relation computation.

A scene is a handful of blocks, each holding a few objects with axis-aligned
bounding boxes in block-local integer coordinates. Block extent is
``[0, width] x [0, width]`` with ``y`` growing upward, so a larger ``y`` centre
means ABOVE. Integer coordinates keep boundary contact (EC, TPP) exact.
"""

from __future__ import annotations

import dataclasses
import json
import random
import string
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .errors import ConfigError, InconsistentAssignment
from .reasoner import Fact, FactBase, is_consistent
from .relations import CANDIDATE_LABELS, Rel

BLOCK_WIDTH = 20
NEAR_FRACTION = 0.25
FAR_FRACTION = 0.6

DEFAULT_SHAPES = ("circle", "square", "triangle")
DEFAULT_COLORS = ("black", "blue", "yellow")
DEFAULT_SIZES = ("small", "medium", "big")
SIZE_SIDES = {"small": 3, "medium": 5, "big": 7}


@dataclass(frozen=True)
class BBox:
    x0: float
    y0: float
    x1: float
    y1: float

    def __post_init__(self):
        if self.x1 <= self.x0 or self.y1 <= self.y0:
            raise ValueError(f"degenerate bbox {self}")

    @property
    def center(self) -> Tuple[float, float]:
        return (self.x0 + self.x1) / 2, (self.y0 + self.y1) / 2

    def inside(self, other: "BBox") -> bool:
        return (other.x0 <= self.x0 and self.x1 <= other.x1
                and other.y0 <= self.y0 and self.y1 <= other.y1)

    def as_list(self) -> list:
        return [self.x0, self.y0, self.x1, self.y1]


@dataclass(frozen=True)
class ObjectEntity:
    id: str
    shape: str
    color: str
    size: str
    bbox: BBox
    block_id: str

    def properties(self) -> Dict[str, str]:
        return {"size": self.size, "color": self.color, "shape": self.shape}


@dataclass(frozen=True)
class Block:
    id: str
    label: str


@dataclass(frozen=True)
class Scene:
    blocks: Tuple[Block, ...]
    objects: Tuple[ObjectEntity, ...]
    depth_remap_applied: bool = False
    block_width: float = BLOCK_WIDTH

    def __post_init__(self):
        block_ids = {b.id for b in self.blocks}
        if len(block_ids) != len(self.blocks):
            raise ValueError("duplicate block id")
        for o in self.objects:
            if o.block_id not in block_ids:
                raise ValueError(f"object {o.id} references unknown block {o.block_id}")
        if not self.blocks or len(self.blocks) + len(self.objects) < 2:
            raise ValueError("a scene needs at least one block and two entities")

    @property
    def entity_ids(self) -> List[str]:
        return [b.id for b in self.blocks] + [o.id for o in self.objects]

    def entity(self, eid: str):
        for e in self.blocks + self.objects:
            if e.id == eid:
                return e
        raise KeyError(eid)

    def is_block(self, eid: str) -> bool:
        return any(b.id == eid for b in self.blocks)

    def objects_in(self, block_id: str) -> List[ObjectEntity]:
        return [o for o in self.objects if o.block_id == block_id]

    def to_json(self) -> str:
        """Debug dump."""
        return json.dumps(dataclasses.asdict(self), indent=2)


@dataclass(frozen=True)
class SceneConfig:
    blocks: Tuple[int, int] = (1, 3)
    objects_per_block: Tuple[int, int] = (1, 4)
    shapes: Tuple[str, ...] = DEFAULT_SHAPES
    colors: Tuple[str, ...] = DEFAULT_COLORS
    sizes: Tuple[str, ...] = DEFAULT_SIZES
    depth_remap_p: float = 0.3
    max_assignment_rounds: int = 50

    def __post_init__(self):
        for name in ("blocks", "objects_per_block"):
            lo, hi = getattr(self, name)
            if lo < 1 or hi < lo:
                raise ConfigError(f"{name} range must satisfy 1 <= lo <= hi, got {(lo, hi)}")
        if not (0.0 <= self.depth_remap_p <= 1.0):
            raise ConfigError("depth_remap_p must lie in [0, 1]")
        for s in self.sizes:
            if s not in SIZE_SIDES:
                raise ConfigError(f"size {s!r} has no known extent")
        if not self.shapes or not self.colors or not self.sizes:
            raise ConfigError("property vocabularies must be non-empty")


@dataclass(frozen=True)
class SceneGraph:
    nodes: Tuple[str, ...]
    edges: Tuple[Fact, ...]
    scene: Optional[Scene] = field(default=None, compare=False)

    def fact_base(self) -> FactBase:
        return FactBase.of(self.edges, self.nodes)

    def fact_id(self, fact: Fact) -> str:
        return f"f{self.edges.index(fact)}"


def _block_label(i: int) -> str:
    letters = string.ascii_uppercase
    return letters[i] if i < len(letters) else f"{letters[i % 26]}{i // 26}"


def _place(rng: random.Random, side: int, placed: Sequence[BBox], width: int) -> Optional[BBox]:
    for _ in range(200):
        x0 = rng.randint(0, width - side)
        y0 = rng.randint(0, width - side)
        box = BBox(x0, y0, x0 + side, y0 + side)
        if all(rcc8_relation(box, other) in (Rel.DC, Rel.EC) for other in placed):
            return box
    return None


def sample_scene(config: SceneConfig = SceneConfig(), rng: Optional[random.Random] = None) -> Scene:
    """Draw a random scene; deterministic given ``config`` and the rng state."""
    rng = rng or random.Random()
    blocks = tuple(Block(f"b{i}", _block_label(i)) for i in range(rng.randint(*config.blocks)))
    objects: List[ObjectEntity] = []
    for block in blocks:
        placed: List[BBox] = []
        seen = set()
        for _ in range(rng.randint(*config.objects_per_block)):
            for _ in range(50):
                props = (rng.choice(config.shapes), rng.choice(config.colors), rng.choice(config.sizes))
                if props not in seen:
                    break
            else:
                continue
            box = _place(rng, SIZE_SIDES[props[2]], placed, BLOCK_WIDTH)
            if box is None:
                continue
            seen.add(props)
            placed.append(box)
            objects.append(ObjectEntity(f"o{len(objects)}", *props, bbox=box, block_id=block.id))
    return Scene(blocks, tuple(objects))


def rcc8_relation(a: BBox, b: BBox) -> Rel:
    ix = min(a.x1, b.x1) - max(a.x0, b.x0)
    iy = min(a.y1, b.y1) - max(a.y0, b.y0)
    if ix < 0 or iy < 0:
        return Rel.DC
    if ix == 0 or iy == 0:
        return Rel.EC
    if a == b:
        return Rel.EQ
    if a.inside(b):
        touching = a.x0 == b.x0 or a.x1 == b.x1 or a.y0 == b.y0 or a.y1 == b.y1
        return Rel.TPP if touching else Rel.NTPP
    if b.inside(a):
        touching = a.x0 == b.x0 or a.x1 == b.x1 or a.y0 == b.y0 or a.y1 == b.y1
        return Rel.TPPI if touching else Rel.NTPPI
    return Rel.PO


def directional_relations(a: BBox, b: BBox) -> List[Rel]:
    (ax, ay), (bx, by) = a.center, b.center
    rels = []
    if ax < bx:
        rels.append(Rel.LEFT)
    elif ax > bx:
        rels.append(Rel.RIGHT)
    if ay > by:
        rels.append(Rel.ABOVE)
    elif ay < by:
        rels.append(Rel.BELOW)
    return rels


def distance_relation(a: BBox, b: BBox, width: float = BLOCK_WIDTH) -> Optional[Rel]:
    (ax, ay), (bx, by) = a.center, b.center
    d = ((ax - bx) ** 2 + (ay - by) ** 2) ** 0.5
    if d < NEAR_FRACTION * width:
        return Rel.NEAR
    if d > FAR_FRACTION * width:
        return Rel.FAR
    return None


def pair_relations(a: BBox, b: BBox, width: float = BLOCK_WIDTH) -> List[Rel]:
    rels = [rcc8_relation(a, b)] + directional_relations(a, b)
    dist = distance_relation(a, b, width)
    if dist is not None:
        rels.append(dist)
    return rels


def compute_intrinsic_relations(scene: Scene) -> List[Fact]:
    """Ground facts between objects sharing a block, plus object-in-block containment."""
    facts = []
    for block in scene.blocks:
        members = scene.objects_in(block.id)
        for a in members:
            for b in members:
                if a is b:
                    continue
                for r in pair_relations(a.bbox, b.bbox, scene.block_width):
                    facts.append(Fact(r, a.id, b.id))
    for o in scene.objects:
        facts.append(Fact(Rel.NTPP, o.id, o.block_id))
    return facts


def assign_block_relations(scene: Scene, rng: random.Random, max_rounds: int = 50) -> List[Fact]:
    """One random non-EQ relation per unordered block pair, jointly consistent."""
    pairs = [(a, b) for i, a in enumerate(scene.blocks) for b in scene.blocks[i + 1:]]
    if not pairs:
        return []
    for _ in range(max_rounds):
        facts = [Fact(rng.choice(CANDIDATE_LABELS), a.id, b.id) for a, b in pairs]
        if is_consistent(FactBase.of(facts)):
            return facts
    raise InconsistentAssignment(f"no consistent block assignment after {max_rounds} rounds")


_DEPTH = {Rel.LEFT: Rel.BEHIND, Rel.RIGHT: Rel.FRONT}


def _remap(facts: Iterable[Fact]) -> List[Fact]:
    return [f._replace(relation=_DEPTH.get(f.relation, f.relation)) for f in facts]


def remap_depth(facts: Sequence[Fact], rng: random.Random, p: float) -> List[Fact]:
    """With probability ``p`` turn every LEFT into BEHIND and RIGHT into FRONT."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    if rng.random() < p:
        return _remap(facts)
    return list(facts)


def dedupe_orientation(facts: Iterable[Fact]) -> List[Fact]:
    """Drop facts that merely restate an earlier fact read in reverse."""
    kept, seen = [], set()
    for f in facts:
        if f in seen or f.reversed() in seen:
            continue
        seen.add(f)
        kept.append(f)
    return kept


def build_scene_graph(scene: Scene, rng: random.Random, depth_remap_p: float = 0.3,
                      max_rounds: int = 50) -> SceneGraph:
    """Intrinsic, containment and block facts over all entities of ``scene``."""
    intrinsic = compute_intrinsic_relations(scene)
    remapped = rng.random() < depth_remap_p
    if remapped:
        intrinsic = _remap(intrinsic)
        scene = dataclasses.replace(scene, depth_remap_applied=True)
    blocks = assign_block_relations(scene, rng, max_rounds)
    edges = tuple(dedupe_orientation(intrinsic + blocks))
    return SceneGraph(tuple(scene.entity_ids), edges, scene)
