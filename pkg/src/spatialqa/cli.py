"""Command-line entry point: ``spatialqa {generate,query,validate,stats,lexicon}``.

Exit codes: 0 success, 1 data or validation failure, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path
from typing import List, Optional

from .dataset import (
    SPLITS,
    compute_stats,
    corpus_files,
    iter_records,
    stats_from_records,
    validate_record,
    write_corpus,
)
from .errors import ConfigError, LexiconError, ParseError, SpatialQAError
from .lexicon import VARIANTS, load_lexicon
from .pipeline import GeneratorConfig, generate_corpus
from .reasoner import FactBase, Truth, answer_query, parse_facts, parse_query

OK, DATA_ERROR, USAGE_ERROR = 0, 1, 2


def _fail(msg: str, code: int) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return code


def cmd_generate(args) -> int:
    try:
        config = GeneratorConfig.from_file(args.config) if args.config else GeneratorConfig()
        overrides = {}
        if args.seed is not None:
            overrides["seed"] = args.seed
        if args.variant is not None:
            overrides["lexicon"] = args.variant
        if args.qtype is not None:
            overrides["qtype"] = args.qtype
        if overrides:
            config = GeneratorConfig.from_dict({**config.__dict__, **overrides})
    except ConfigError as e:
        return _fail(str(e), USAGE_ERROR)

    started = time.perf_counter()
    try:
        corpus = generate_corpus(config, workers=args.workers)
    except LexiconError as e:
        return _fail(str(e), USAGE_ERROR)
    except SpatialQAError as e:
        return _fail(f"generation failed: {e}", DATA_ERROR)
    try:
        result = write_corpus(corpus, args.out, {s: config.wanted(s) for s in SPLITS})
        report = stats_from_records(corpus)
        stats = report.to_dict()
        # Run-specific values live under "metadata" and are not part of the corpus.
        stats["metadata"] = {"seed": config.seed, "lexicon": config.lexicon,
                             "seconds": round(time.perf_counter() - started, 2)}
        (Path(args.out) / "stats.json").write_text(json.dumps(stats, indent=2) + "\n", "utf-8")
    except OSError as e:
        return _fail(str(e), DATA_ERROR)
    print(report.format())
    if result.shortfall:
        return _fail(f"fewer questions than requested: {result.shortfall}", DATA_ERROR)
    return OK


def cmd_query(args) -> int:
    try:
        text = sys.stdin.read() if args.facts == "-" else Path(args.facts).read_text("utf-8")
    except OSError as e:
        return _fail(str(e), DATA_ERROR)
    try:
        facts = parse_facts(text)
    except ParseError as e:
        return _fail(f"{args.facts}: {e}", DATA_ERROR)
    try:
        q = parse_query(args.query)
    except ParseError as e:
        return _fail(f"query: {e}", USAGE_ERROR)
    try:
        answer = answer_query(FactBase.of(facts), q)
    except SpatialQAError as e:
        return _fail(str(e), DATA_ERROR)
    if isinstance(answer, Truth):
        print(answer.value)
    else:
        for binding in answer:
            print(binding)
    return OK


def cmd_validate(args) -> int:
    try:
        files = corpus_files(args.corpus)
    except FileNotFoundError:
        return _fail(f"no corpus at {args.corpus}", DATA_ERROR)
    if not files:
        return _fail(f"no .jsonl files in {args.corpus}", DATA_ERROR)
    problems = records = 0
    for split, path in files.items():
        index = 0
        try:
            for index, rec in enumerate(iter_records(path)):
                records += 1
                for v in validate_record(rec):
                    problems += 1
                    print(f"{path.name} record {index} ({rec.get('id', '?')}): {v}")
        except ParseError as e:
            problems += 1
            print(f"{path.name} parse: {e}")
    print(f"{records} records, {problems} violations")
    return DATA_ERROR if problems else OK


def cmd_stats(args) -> int:
    try:
        report = compute_stats(args.corpus)
    except FileNotFoundError:
        return _fail(f"no corpus at {args.corpus}", DATA_ERROR)
    except ParseError as e:
        return _fail(str(e), DATA_ERROR)
    print(report.to_json() if args.json else report.format())
    return OK


def cmd_lexicon_list(args) -> int:
    try:
        lex = load_lexicon(args.variant)
    except LexiconError as e:
        return _fail(str(e), USAGE_ERROR)
    for rel, exprs in sorted(lex.relations.items(), key=lambda kv: kv[0].value):
        for e in exprs:
            print(f"{rel.value:<7} {e.template:<40} [{e.indicator}]")
    return OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="spatialqa", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="generate a corpus")
    g.add_argument("--config", help="YAML generator config")
    g.add_argument("--out", required=True, help="output directory")
    g.add_argument("--seed", type=int)
    g.add_argument("--variant", help="lexicon variant (simple, full, clock) or YAML path")
    g.add_argument("--qtype", choices=("yn", "fr", "both"))
    g.add_argument("--workers", type=int, default=1, help="worker processes")
    g.set_defaults(func=cmd_generate)

    q = sub.add_parser("query", help="ask the reasoner about a fact file")
    q.add_argument("facts", help="fact file, one atom per line ('-' for stdin)")
    q.add_argument("query", help="e.g. 'front(a,b)' or 'ntppi(room,?)'")
    q.set_defaults(func=cmd_query)

    v = sub.add_parser("validate", help="check every record of a corpus")
    v.add_argument("corpus", help="corpus directory or .jsonl file")
    v.set_defaults(func=cmd_validate)

    s = sub.add_parser("stats", help="corpus statistics")
    s.add_argument("corpus", help="corpus directory or .jsonl file")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_stats)

    lx = sub.add_parser("lexicon", help="inspect lexicons")
    lsub = lx.add_subparsers(dest="action", required=True)
    ll = lsub.add_parser("list", help="print the expressions of a lexicon")
    ll.add_argument("--variant", default="full", help=f"one of {', '.join(VARIANTS)} or a YAML path")
    ll.set_defaults(func=cmd_lexicon_list)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return USAGE_ERROR if e.code else OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "workers", 1) < 1:
        return _fail("--workers must be at least 1", USAGE_ERROR)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
