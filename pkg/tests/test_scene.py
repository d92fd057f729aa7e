import random

import pytest

from spatialqa.errors import ConfigError
from spatialqa.reasoner import Fact, FactBase, is_consistent
from spatialqa.relations import Rel, excludes
from spatialqa.scene import (
    BBox,
    Block,
    ObjectEntity,
    Scene,
    SceneConfig,
    assign_block_relations,
    build_scene_graph,
    compute_intrinsic_relations,
    rcc8_relation,
    remap_depth,
    sample_scene,
)

R = Rel


def two_object_scene(a: BBox, b: BBox) -> Scene:
    blk = Block("b0", "A")
    return Scene((blk,), (ObjectEntity("A", "circle", "black", "big", a, "b0"),
                          ObjectEntity("B", "square", "blue", "small", b, "b0")), block_width=100)


def test_sampler_is_deterministic():
    a = sample_scene(SceneConfig(), random.Random(7))
    b = sample_scene(SceneConfig(), random.Random(7))
    assert a.to_json() == b.to_json()


def test_counting():
    scene = sample_scene(SceneConfig(blocks=(1, 1), objects_per_block=(2, 2)), random.Random(0))
    assert len(scene.entity_ids) == 3


def test_bboxes_inside_blocks_and_disjoint_over_1000_draws():
    rng = random.Random(1)
    cfg = SceneConfig()
    unit = BBox(0, 0, 20, 20)
    for _ in range(1000):
        scene = sample_scene(cfg, rng)
        for o in scene.objects:
            assert o.bbox.inside(unit)
            assert o.shape in cfg.shapes and o.color in cfg.colors and o.size in cfg.sizes
        for blk in scene.blocks:
            members = scene.objects_in(blk.id)
            for i, p in enumerate(members):
                for q in members[i + 1:]:
                    assert rcc8_relation(p.bbox, q.bbox) in (R.DC, R.EC)


@pytest.mark.parametrize("kw", [dict(blocks=(0, 2)), dict(objects_per_block=(0, 0)), dict(depth_remap_p=1.5)])
def test_bad_configs_rejected(kw):
    with pytest.raises(ConfigError):
        SceneConfig(**kw)


def test_intrinsic_examples():
    facts = compute_intrinsic_relations(two_object_scene(BBox(0, 0, 2, 2), BBox(3, 0, 5, 2)))
    assert Fact(R.DC, "A", "B") in facts and Fact(R.LEFT, "A", "B") in facts
    assert Fact(R.NTPP, "A", "b0") in facts and Fact(R.NTPP, "B", "b0") in facts
    facts = compute_intrinsic_relations(two_object_scene(BBox(0, 0, 2, 2), BBox(2, 0, 4, 2)))
    assert Fact(R.EC, "A", "B") in facts
    facts = compute_intrinsic_relations(two_object_scene(BBox(0, 0, 4, 4), BBox(1, 1, 2, 2)))
    assert Fact(R.NTPPI, "A", "B") in facts and Fact(R.NTPP, "B", "A") in facts


@pytest.mark.parametrize("a, b, expected", [
    (BBox(0, 0, 4, 4), BBox(0, 1, 2, 2), R.TPPI),
    (BBox(0, 1, 2, 2), BBox(0, 0, 4, 4), R.TPP),
    (BBox(0, 0, 4, 4), BBox(2, 2, 6, 6), R.PO),
    (BBox(0, 0, 4, 4), BBox(0, 0, 4, 4), R.EQ),
    (BBox(0, 0, 2, 2), BBox(2, 2, 4, 4), R.EC),
])
def test_rcc8_relation(a, b, expected):
    assert rcc8_relation(a, b) is expected


def test_intrinsic_pairs_never_exclusive():
    rng = random.Random(3)
    for _ in range(300):
        scene = sample_scene(SceneConfig(), rng)
        by_pair = {}
        for f in compute_intrinsic_relations(scene):
            by_pair.setdefault((f.head, f.tail), []).append(f.relation)
        for rels in by_pair.values():
            assert not any(excludes(a, b) for a in rels for b in rels)


def test_block_assignment():
    rng = random.Random(9)
    one = sample_scene(SceneConfig(blocks=(1, 1)), rng)
    assert assign_block_relations(one, rng) == []
    labels = set()
    for _ in range(300):
        scene = sample_scene(SceneConfig(blocks=(3, 3), objects_per_block=(1, 1)), rng)
        facts = assign_block_relations(scene, rng)
        assert len(facts) == 3
        assert is_consistent(FactBase.of(facts))
        labels.update(f.relation for f in facts)
    assert R.EQ not in labels


def test_block_labels_never_eq_over_10k_pairs():
    rng = random.Random(4)
    scene = sample_scene(SceneConfig(blocks=(2, 2), objects_per_block=(1, 1)), rng)
    labels = set()
    for _ in range(10000):
        labels.update(f.relation for f in assign_block_relations(scene, rng))
    assert R.EQ not in labels and len(labels) == 15


def test_remap_depth():
    rng = random.Random(0)
    facts = [Fact(R.LEFT, "a", "b"), Fact(R.DC, "a", "b"), Fact(R.RIGHT, "b", "c")]
    assert remap_depth(facts, rng, 0.0) == facts
    assert remap_depth(facts, rng, 1.0) == [Fact(R.BEHIND, "a", "b"), Fact(R.DC, "a", "b"), Fact(R.FRONT, "b", "c")]
    assert remap_depth([Fact(R.DC, "a", "b")], rng, 1.0) == [Fact(R.DC, "a", "b")]


def test_scene_graph_consistent_and_deterministic():
    for seed in range(100):
        rng = random.Random(seed)
        scene = sample_scene(SceneConfig(), rng)
        graph = build_scene_graph(scene, rng)
        rng2 = random.Random(seed)
        graph2 = build_scene_graph(sample_scene(SceneConfig(), rng2), rng2)
        assert graph == graph2
        assert is_consistent(graph.fact_base())
        assert R.EQ not in {f.relation for f in graph.edges}
        # no edge restates another in reverse
        assert not any(f.reversed() in graph.edges for f in graph.edges)


def test_depth_remap_flag():
    seen = set()
    for seed in range(40):
        rng = random.Random(seed)
        graph = build_scene_graph(sample_scene(SceneConfig(blocks=(1, 1), objects_per_block=(3, 3)), rng), rng)
        rels = {f.relation for f in graph.edges}
        seen.add(graph.scene.depth_remap_applied)
        if graph.scene.depth_remap_applied:
            assert not rels & {R.LEFT, R.RIGHT}
        else:
            assert not rels & {R.FRONT, R.BEHIND}
    assert seen == {True, False}
