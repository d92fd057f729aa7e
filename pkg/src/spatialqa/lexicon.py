"""Spatial-expression lexicons.

A lexicon file is YAML::

    variant: full
    extends: simple          # optional, merges expressions of another variant
    properties:
      shape: [circle, square, triangle]
    relations:
      above:
        - template: "{tr} {be} above {lm}"
          indicator: "above"

Templates start with ``{tr}`` followed by a verb slot, ``{be}`` (is/are) or
``{have}`` (has/have), and contain ``{lm}`` exactly once. The indicator is
a literal substring of the template after the verb slot, or the string
``{have}`` when the verb itself carries the relation.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Dict, FrozenSet, List, Mapping, Tuple, Union

import yaml

from .errors import LexiconError
from .relations import CANDIDATE_LABELS, Rel

VARIANTS = ("simple", "full", "clock")
VERBS = {"be": ("is", "are"), "have": ("has", "have")}

_TEMPLATE = re.compile(r"^\{tr\} \{(be|have)\} (.+)$")


@dataclass(frozen=True)
class Expression:
    template: str
    indicator: str

    @property
    def verb(self) -> str:
        return _TEMPLATE.match(self.template).group(1)

    @property
    def rest(self) -> str:
        """Template text after the verb slot."""
        return _TEMPLATE.match(self.template).group(2)

    def indicator_forms(self) -> Tuple[str, ...]:
        if self.indicator == "{have}":
            return VERBS["have"]
        return (self.indicator,)


@dataclass(frozen=True)
class Lexicon:
    variant: str
    relations: Mapping[Rel, Tuple[Expression, ...]]
    properties: Mapping[str, Tuple[str, ...]] = field(default_factory=dict)

    def expressions(self, rel: Rel) -> Tuple[Expression, ...]:
        return self.relations.get(rel, ())

    def indicator_surfaces(self, rel: Rel) -> FrozenSet[str]:
        return frozenset(s for e in self.expressions(rel) for s in e.indicator_forms())

    def relations_for_indicator(self, surface: str) -> FrozenSet[Rel]:
        return frozenset(r for r in self.relations if surface in self.indicator_surfaces(r))


def _check_expression(rel: str, template: str, indicator: str, line: int) -> Expression:
    m = _TEMPLATE.match(template)
    if not m:
        raise LexiconError(f"{rel}: template must look like '{{tr}} {{be}} ... {{lm}}', got {template!r}", line)
    rest = m.group(2)
    if template.count("{tr}") != 1 or rest.count("{lm}") != 1:
        raise LexiconError(f"{rel}: template needs exactly one {{tr}} and one {{lm}}", line)
    if re.search(r"\{(?!lm\})[^}]*\}", rest):
        raise LexiconError(f"{rel}: unknown slot in template {template!r}", line)
    if indicator == "{have}":
        if m.group(1) != "have":
            raise LexiconError(f"{rel}: indicator '{{have}}' needs a {{have}} template", line)
    elif not indicator or "{" in indicator or indicator not in rest.replace("{lm}", "\0"):
        raise LexiconError(f"{rel}: indicator {indicator!r} must occur verbatim in {template!r}", line)
    return Expression(template, indicator)


def _line(node) -> int:
    return node.start_mark.line + 1


def _scalar(node, what: str) -> str:
    if not isinstance(node, yaml.ScalarNode):
        raise LexiconError(f"{what} must be a string", _line(node))
    return node.value


def _parse(text: str, source: str = "<string>"):
    try:
        root = yaml.compose(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        raise LexiconError(f"{source}: {getattr(e, 'problem', e)}", mark.line + 1 if mark else None) from None
    if not isinstance(root, yaml.MappingNode):
        raise LexiconError(f"{source}: top level must be a mapping", _line(root) if root else 1)
    doc = {_scalar(k, "key"): v for k, v in root.value}

    variant = _scalar(doc["variant"], "variant") if "variant" in doc else "custom"
    extends = _scalar(doc["extends"], "extends") if "extends" in doc else None

    properties: Dict[str, Tuple[str, ...]] = {}
    if "properties" in doc:
        node = doc["properties"]
        if not isinstance(node, yaml.MappingNode):
            raise LexiconError("properties must be a mapping", _line(node))
        for k, v in node.value:
            if not isinstance(v, yaml.SequenceNode):
                raise LexiconError("property values must be a list", _line(v))
            properties[_scalar(k, "property")] = tuple(_scalar(x, "property value") for x in v.value)

    relations: Dict[Rel, List[Expression]] = {}
    node = doc.get("relations")
    if not isinstance(node, yaml.MappingNode):
        raise LexiconError(f"{source}: missing 'relations' mapping", _line(node) if node else 1)
    for k, v in node.value:
        name = _scalar(k, "relation name")
        try:
            rel = Rel.parse(name)
        except ValueError:
            raise LexiconError(f"unknown relation {name!r}", _line(k)) from None
        if not isinstance(v, yaml.SequenceNode):
            raise LexiconError(f"{name}: expressions must be a list", _line(v))
        exprs = relations.setdefault(rel, [])
        for item in v.value:
            if not isinstance(item, yaml.MappingNode):
                raise LexiconError(f"{name}: each expression needs 'template' and 'indicator'", _line(item))
            fields = {_scalar(a, "field"): _scalar(b, "field value") for a, b in item.value}
            missing = {"template", "indicator"} - fields.keys()
            if missing:
                raise LexiconError(f"{name}: expression missing {sorted(missing)}", _line(item))
            exprs.append(_check_expression(name, fields["template"], fields["indicator"], _line(item)))
    return variant, extends, properties, relations


def _builtin_text(variant: str) -> str:
    try:
        return resources.files("spatialqa.data").joinpath(f"lexicon_{variant}.yaml").read_text("utf-8")
    except FileNotFoundError:
        raise LexiconError(f"no built-in lexicon variant {variant!r}") from None


def loads_lexicon(text: str, source: str = "<string>", _depth: int = 0) -> Lexicon:
    variant, extends, properties, relations = _parse(text, source)
    if extends is not None:
        if _depth > 4:
            raise LexiconError("lexicon 'extends' chain is too deep")
        parent = loads_lexicon(_builtin_text(extends), extends, _depth + 1)
        merged = {r: list(e) for r, e in parent.relations.items()}
        for r, exprs in relations.items():
            merged.setdefault(r, [])
            merged[r].extend(e for e in exprs if e not in merged[r])
        relations = merged
        properties = {**parent.properties, **properties}
    missing = [r.value for r in CANDIDATE_LABELS if not relations.get(r)]
    if missing:
        raise LexiconError(f"{source}: no expressions for {', '.join(missing)}")
    if variant == "simple":
        multi = [r.value for r, e in relations.items() if len(e) != 1]
        if multi:
            raise LexiconError(f"{source}: simple lexicon needs exactly one expression for {', '.join(multi)}")
    return Lexicon(variant, {r: tuple(e) for r, e in relations.items()}, properties)


def load_lexicon(source: Union[str, Path] = "full") -> Lexicon:
    """Load a built-in variant by name (simple, full, clock) or a YAML file path."""
    if isinstance(source, str) and source in VARIANTS:
        return loads_lexicon(_builtin_text(source), source)
    path = Path(source)
    if not path.exists():
        raise LexiconError(f"lexicon file not found: {path}")
    return loads_lexicon(path.read_text("utf-8"), str(path))
