"""Acceptance suite: one test per criterion, each reporting a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py``; the summary lines are
printed at the end of the session (see ``conftest.py``).
"""

import random
import sys
import time
from itertools import permutations

import pytest

from oracle import naive_closure
from spatialqa.cli import main
from spatialqa.dataset import stats_from_records, validate_record
from spatialqa.errors import InconsistentAssignment
from spatialqa.pipeline import GeneratorConfig, generate_corpus
from spatialqa.questions import CandidatePath, validate_path
from spatialqa.reasoner import Fact, FactBase, all_relations, close
from spatialqa.relations import DIR, RCC8, Rel, find_exclusion_pair
from spatialqa.scene import SceneConfig, build_scene_graph, sample_scene

R = Rel
RESULTS = {}


def report(number, title, ok, detail=""):
    RESULTS[number] = (title, ok, detail)
    line = f"criterion {number} {'PASS' if ok else 'FAIL'}: {title}" + (f" ({detail})" if detail else "")
    print(line)
    assert ok, line


@pytest.fixture(scope="module")
def corpus_1k():
    counts = {"train": {"YN": 400, "FR": 400}, "dev": {"YN": 50, "FR": 50}, "test": {"YN": 50, "FR": 50}}
    start = time.perf_counter()
    corpus = generate_corpus(GeneratorConfig(seed=2022, counts=counts))
    return corpus, time.perf_counter() - start


def test_1_worked_example(tmp_path, capsys):
    facts = tmp_path / "facts.pl"
    facts.write_text("ntpp(a,x)\nfront(x,y)\ntppi(y,b)\n")
    start = time.perf_counter()
    answers = {}
    for q in ("front(a,b)", "front(b,a)", "behind(a,b)"):
        assert main(["query", str(facts), q]) == 0
        answers[q] = capsys.readouterr().out.strip()
    elapsed = time.perf_counter() - start
    ok = answers == {"front(a,b)": "TRUE", "front(b,a)": "FALSE", "behind(a,b)": "FALSE"} and elapsed < 1
    report(1, "worked example via the query command", ok, f"{answers}, {elapsed:.2f}s")


RULE_CASES = [
    ("inverse", [Fact(R.LEFT, "b", "c")], Fact(R.RIGHT, "c", "b")),
    ("symmetry", [Fact(R.DC, "a", "b")], Fact(R.DC, "b", "a")),
    ("transitivity", [Fact(R.LEFT, "a", "b"), Fact(R.LEFT, "b", "c")], Fact(R.LEFT, "a", "c")),
    ("not", [Fact(R.LEFT, "a", "b")], Fact(R.RIGHT, "a", "b", False)),
    ("combination", [Fact(R.NTPP, "a", "x"), Fact(R.FRONT, "x", "y"), Fact(R.TPPI, "y", "b")],
     Fact(R.FRONT, "a", "b")),
    ("pp propagation", [Fact(R.NTPP, "a", "b"), Fact(R.LEFT, "b", "c")], Fact(R.LEFT, "a", "c")),
]


def test_2_rule_instances():
    start = time.perf_counter()
    failed = [name for name, facts, goal in RULE_CASES if goal not in close(FactBase.of(facts))]
    elapsed = time.perf_counter() - start
    report(2, "rule instances", not failed and elapsed < 1,
           f"failed: {failed}" if failed else f"{len(RULE_CASES)} rules, {elapsed:.3f}s")


def random_base(rng):
    entities = "abcd"[:rng.randint(2, 4)]
    pairs = list(permutations(entities, 2))
    return [Fact(rng.choice(list(Rel)), *rng.choice(pairs)) for _ in range(rng.randint(1, 5))]


def test_3_oracle_equivalence():
    rng = random.Random(31)
    start = time.perf_counter()
    mismatches = 0
    for _ in range(1000):
        facts = random_base(rng)
        ours = {(f.relation.value, f.head, f.tail, f.positive) for f in close(FactBase.of(facts))}
        ref = naive_closure({(f.relation.value, f.head, f.tail, True) for f in facts})
        mismatches += ours != ref
    elapsed = time.perf_counter() - start
    report(3, "closure equals the naive fixpoint oracle on 1000 bases", mismatches == 0 and elapsed < 60,
           f"{mismatches} mismatches, {elapsed:.1f}s")


def test_4_invalid_path():
    path = CandidatePath((Fact(R.NTPP, "A", "X"), Fact(R.NTPPI, "X", "C")), ("A", "X", "C"))
    inferred = validate_path(path)
    report(4, "invalid path infers nothing", inferred == set(), f"inferred {sorted(inferred)}")


def test_5_well_formed_questions(corpus_1k):
    corpus, gen_seconds = corpus_1k
    start = time.perf_counter()
    records = [r for rs in corpus.values() for r in rs]
    questions = [q for r in records for q in r["questions"]]
    violations = [v for r in records for v in validate_record(r)]
    short_k = sum(q["k"] < 2 for q in questions)
    exclusive = sum(q["qtype"] == "FR" and find_exclusion_pair(R(a) for a in q["answer"]) is not None
                    for q in questions)
    elapsed = gen_seconds + time.perf_counter() - start
    ok = len(questions) == 1000 and not violations and not short_k and not exclusive and elapsed < 300
    kinds = sorted({v.kind for v in violations})
    report(5, "question well-formedness on a 1000-question corpus", ok,
           f"{len(questions)} questions, {len(violations)} violations {kinds}, {elapsed:.1f}s")


def test_6_distribution_bands(corpus_1k):
    corpus, _ = corpus_1k
    s = stats_from_records(corpus)
    ok = (0.44 <= s.yes_rate <= 0.64 and 6 <= s.mean_sentences <= 10 and 7 <= s.mean_relations <= 13)
    report(6, "distribution bands", ok,
           f"yes-rate {s.yes_rate:.3f}, sentences {s.mean_sentences:.2f}, relations {s.mean_relations:.2f}")


def test_7_determinism(tmp_path):
    config = tmp_path / "c.yaml"
    config.write_text("seed: 7\ncounts:\n  train: {YN: 40, FR: 40}\n"
                      "  dev: {YN: 10, FR: 10}\n  test: {YN: 10, FR: 10}\n")
    outs = [tmp_path / "a", tmp_path / "b"]
    codes = [main(["generate", "--config", str(config), "--out", str(o)]) for o in outs]
    same = all((outs[0] / f).read_bytes() == (outs[1] / f).read_bytes()
               for f in ("train.jsonl", "dev.jsonl", "test.jsonl"))
    report(7, "byte-identical corpora from identical runs", codes == [0, 0] and same)


def geometric_holds(rel, a, b, depth_remapped):
    """Check a relation between two boxes from raw coordinates."""
    ax, ay = (a.x0 + a.x1) / 2, (a.y0 + a.y1) / 2
    bx, by = (b.x0 + b.x1) / 2, (b.y0 + b.y1) / 2
    gap_x = max(a.x0, b.x0) - min(a.x1, b.x1)
    gap_y = max(a.y0, b.y0) - min(a.y1, b.y1)
    horizontal = {R.LEFT: ax < bx, R.RIGHT: ax > bx}
    if depth_remapped:
        horizontal = {R.BEHIND: ax < bx, R.FRONT: ax > bx}
    checks = {
        **horizontal,
        R.ABOVE: ay > by,
        R.BELOW: ay < by,
        R.DC: gap_x > 0 or gap_y > 0,
        R.EC: max(gap_x, gap_y) == 0,
    }
    return checks.get(rel, False)


def test_8_geometry_soundness():
    rng = random.Random(8)
    start = time.perf_counter()
    checked, bad = 0, []
    scenes = 0
    while scenes < 200:
        scene = sample_scene(SceneConfig(), rng)
        try:
            graph = build_scene_graph(scene, rng)
        except InconsistentAssignment:
            continue
        scenes += 1
        remapped = graph.scene.depth_remap_applied
        base = graph.fact_base()
        for blk in scene.blocks:
            members = scene.objects_in(blk.id)
            for a in members:
                for b in members:
                    if a is b:
                        continue
                    for rel in all_relations(base, a.id, b.id) & (DIR | RCC8):
                        checked += 1
                        if not geometric_holds(rel, a.bbox, b.bbox, remapped):
                            bad.append((rel.value, a.id, b.id))
    elapsed = time.perf_counter() - start
    report(8, "derived same-block relations agree with geometry", not bad and checked > 0 and elapsed < 60,
           f"{checked} relations checked, {len(bad)} wrong, {elapsed:.1f}s")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
