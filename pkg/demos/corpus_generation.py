"""
Generating, checking and summarizing a small corpus
===================================================

The same steps as ``spatialqa generate`` followed by ``spatialqa validate``,
driven from Python.
"""

import tempfile

from spatialqa.dataset import compute_stats, read_corpus, validate_record, write_corpus
from spatialqa.pipeline import GeneratorConfig, generate_corpus

# A few hundred questions instead of the default 52k.
config = GeneratorConfig(seed=7, counts={
    "train": {"YN": 150, "FR": 150},
    "dev": {"YN": 25, "FR": 25},
    "test": {"YN": 25, "FR": 25},
})
corpus = generate_corpus(config)

out = tempfile.mkdtemp(prefix="spatialqa-")
result = write_corpus(corpus, out, {s: config.wanted(s) for s in corpus})
print("wrote", {s: str(p) for s, p in result.paths.items()})

# Every record must pass its own end-to-end checks.
records = [r for rs in read_corpus(out).values() for r in rs]
problems = [v for r in records for v in validate_record(r)]
print(len(records), "records,", len(problems), "violations")

# One streaming pass over the files.
print(compute_stats(out).format())

# A record is plain JSON; here is its first question.
q = records[0]["questions"][0]
print()
print(records[0]["story"])
print(q["text"], q["answer"], "k =", q["k"])
