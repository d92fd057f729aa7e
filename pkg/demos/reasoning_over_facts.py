"""
Asking the spatial reasoner questions
=====================================

A small tour of the rule-based reasoner: load facts, close them, query
them, and find out which facts an answer really depends on.
"""

from spatialqa.reasoner import (
    Fact, FactBase, Truth, all_relations, check_consistency, close,
    minimal_support, parse_facts, query,
)
from spatialqa.relations import Rel

# Facts use the same one-atom-per-line format as the ``query`` command.
facts = parse_facts("""
ntpp(a,x)      % a is inside box x
front(x,y)     % box x is in front of box y
tppi(y,b)      % box y contains b, touching its border
above(y,z)
""")
base = FactBase.of(facts)

# The closure holds every fact derivable by the rules, with a derivation each.
closure = close(base)
print(len(closure), "facts after closing", len(facts), "given ones")
print("front(a,b):", query(base, Fact(Rel.FRONT, "a", "b")).value)
print("front(b,a):", query(base, Fact(Rel.FRONT, "b", "a")).value)
print("left(a,b): ", query(base, Fact(Rel.LEFT, "a", "b")).value)

# Everything the reasoner knows between two entities.
print("a -> b:", sorted(r.value for r in all_relations(base, "a", "b")))

# The smallest set of given facts that still yields front(a,b).
support, k = minimal_support(base, Fact(Rel.FRONT, "a", "b"))
print(f"needs {k} facts:", sorted(str(f) for f in support))

# Derivations can be walked back to the given facts.
d = closure[Fact(Rel.FRONT, "a", "b")]
print("derived by", d.rule.value, "at depth", d.depth)

# Contradictory input is caught before it reaches a corpus.
clash = FactBase.of(facts + [Fact(Rel.BEHIND, "a", "b")])
print("contradiction:", check_consistency(clash))
assert query(base, Fact(Rel.BEHIND, "a", "b")) is Truth.FALSE
