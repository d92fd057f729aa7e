"""Synthetic spatial question answering with rule-based reasoning.

Scenes of objects in blocks are turned into scene graphs, a rule-based
reasoner finds multi-hop questions over them, and a lexicon-driven
generator writes stories and questions annotated with spatial roles.
"""

from .errors import (
    ConfigError,
    LexiconError,
    NoValidPath,
    ParseError,
    SpatialQAError,
    UnknownEntity,
    UnresolvableDescription,
)
from .relations import Rel, exclusion_set, excludes, inverse, is_symmetric, is_transitive
from .reasoner import (
    Fact,
    FactBase,
    Truth,
    all_relations,
    check_consistency,
    close,
    minimal_support,
    parse_facts,
    query,
)
from .scene import SceneConfig, build_scene_graph, sample_scene
from .questions import QType, Quantifier, compute_answer, longest_valid_paths, select_question
from .lexicon import load_lexicon
from .textgen import realize_question, realize_story
from .pipeline import GeneratorConfig, generate_corpus, generate_split
from .dataset import (
    compute_stats,
    read_corpus,
    rebalance_yn,
    validate_record,
    write_corpus,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "LexiconError", "NoValidPath", "ParseError", "SpatialQAError",
    "UnknownEntity", "UnresolvableDescription",
    "Rel", "exclusion_set", "excludes", "inverse", "is_symmetric", "is_transitive",
    "Fact", "FactBase", "Truth", "all_relations", "check_consistency", "close",
    "minimal_support", "parse_facts", "query",
    "SceneConfig", "build_scene_graph", "sample_scene",
    "QType", "Quantifier", "compute_answer", "longest_valid_paths", "select_question",
    "load_lexicon", "realize_question", "realize_story",
    "GeneratorConfig", "generate_corpus", "generate_split",
    "compute_stats", "read_corpus", "rebalance_yn", "validate_record", "write_corpus",
]
