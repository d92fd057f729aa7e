"""
From a random scene to an annotated question
============================================

Sample a scene of objects in blocks, read its scene graph, pick the
longest valid reasoning path and turn it into a story and a question.
"""

import random

from spatialqa.lexicon import load_lexicon
from spatialqa.questions import QType, longest_valid_paths, plan_question, finalize_question
from spatialqa.referring import entity_table
from spatialqa.scene import SceneConfig, build_scene_graph, sample_scene
from spatialqa.textgen import realize_question, realize_story, story_text

rng = random.Random(3)

# Two or three blocks with up to four objects each.
scene = sample_scene(SceneConfig(blocks=(2, 3)), rng)
for obj in scene.objects:
    print(obj.id, obj.size, obj.color, obj.shape, "in", obj.block_id, obj.bbox.as_list())

# Intrinsic relations come from the boxes, block relations are drawn at random.
graph = build_scene_graph(scene, rng)
print(len(graph.edges), "edges; depth remap applied:", graph.scene.depth_remap_applied)

# Questions come from the longest paths whose endpoints the reasoner can relate.
pool = longest_valid_paths(graph)
path = rng.choice(pool)
print("path:", " ".join(str(f) for f in path.edges))
print("inferred:", sorted(r.value for r in path.inferred))

# Fix the question and its gold answer against the supporting facts.
table = entity_table(graph.scene)
plan = plan_question(path, QType.YN, rng)
spec = finalize_question(plan, list(path.edges), table, rng)

# Write the story and the question with spatial role spans.
lexicon = load_lexicon("full")
sentences = realize_story(list(path.edges), table, lexicon, rng)
text, _ = story_text(sentences)
question, triplet = realize_question(spec, lexicon, rng, table)
print()
print(text)
print(question, "->", spec.gold, f"(k={spec.k})")
for t in sentences[0].triplets:
    print("trajector:", t.trajector.text, "| indicator:", t.spatial_indicator.text,
          "| landmark:", t.landmark.text, "|", t.relation.value)
