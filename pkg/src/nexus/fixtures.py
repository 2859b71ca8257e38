"""Generated knowledge bases used by the test suite, the docs, and the
``fixture`` CLI command.

Three families:

* ``themepark`` — a small hand-written base of parks, regions and an
  ``isa``-transitivity rule; the running example everywhere.
* ``prime-cycles`` — one directed cycle of prime length per factor, with a
  summary table mapping each cycle's anchor tuple to exactly its own cycle.
  Characterizing all anchors together produces, by the Chinese remainder
  theorem, a single product cycle whose length is the product of the primes
  — and nothing in it folds, so the core keeps every atom.  That makes the
  family a sharp calibration target for canonical-characterization sizes.
* ``random`` — seed-deterministic noise for property suites.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .errors import SemanticError
from .kb import (
    DatalogRule,
    KnowledgeBase,
    SelectiveKB,
    Unit,
    make_selector,
    render_kb,
    render_summaries,
    render_unit,
    unit_of,
)
from .relcore import TOP, Atom, Dataset, Term, atom, const, var

PRIMES = (2, 3, 5)


@dataclass(frozen=True)
class Fixture:
    """A knowledge base, a chosen selector, and a suggested starting unit."""

    label: str
    skb: SelectiveKB
    unit: Unit
    summaries: Optional[dict] = None  # populated only for table selectors

    @property
    def kb(self) -> KnowledgeBase:
        return self.skb.kb

    def write_files(self, directory) -> dict[str, Path]:
        """Emit facts/rules (and summaries, if any) as parseable files."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        facts_text, rules_text = render_kb(self.kb)
        paths = {
            "facts": directory / f"{self.label}_facts.txt",
            "rules": directory / f"{self.label}_rules.txt",
        }
        paths["facts"].write_text(facts_text)
        paths["rules"].write_text(rules_text)
        if self.summaries is not None:
            paths["summaries"] = directory / f"{self.label}_summaries.txt"
            paths["summaries"].write_text(render_summaries(self.summaries))
        paths["unit"] = directory / f"{self.label}_unit.txt"
        paths["unit"].write_text(render_unit(self.unit) + "\n")
        return paths


# ---------------------------------------------------------------------------
# Theme parks
# ---------------------------------------------------------------------------

_THEMEPARK_FACTS = [
    ("located", "discovery_cove", "florida"),
    ("part_of", "florida", "us"),
    ("isa", "discovery_cove", "theme_park"),
    ("isa", "theme_park", "amusement_park"),
    ("located", "epcot", "florida"),
    ("isa", "epcot", "theme_park"),
    ("isa", "prater", "amusement_park"),
    ("located", "prater", "austria"),
    ("located", "pacific_park", "california"),
    ("part_of", "california", "us"),
    ("isa", "pacific_park", "amusement_park"),
    ("located", "gardaland", "italy"),
    ("isa", "leolandia", "amusement_park"),
    ("located", "leolandia", "italy"),
    ("isa", "gardaland", "theme_park"),
]


def make_themepark(selector: str = "neighborhood") -> Fixture:
    facts = frozenset(atom(p, const(a), const(b)) for p, a, b in _THEMEPARK_FACTS)
    transitivity = DatalogRule(
        atom("isa", var("X"), var("Z")),
        (atom("isa", var("X"), var("Y")), atom("isa", var("Y"), var("Z"))),
    )
    kb = KnowledgeBase(Dataset(facts), (transitivity,))
    skb = SelectiveKB(kb, make_selector(selector))
    unit = unit_of([(const("discovery_cove"),), (const("epcot"),)])
    return Fixture("themepark", skb, unit)


# ---------------------------------------------------------------------------
# Prime cycles
# ---------------------------------------------------------------------------


def make_prime_cycles(m: int, max_product: int = 1000) -> Fixture:
    """``m`` disjoint directed cycles whose lengths are the first ``m``
    primes, plus a summary table sending each cycle's anchor to the cycle."""
    if not 1 <= m <= len(PRIMES):
        raise SemanticError(f"m must be between 1 and {len(PRIMES)}")
    product = 1
    for p in PRIMES[:m]:
        product *= p
    if product > max_product:
        raise SemanticError(
            f"product cycle length {product} exceeds the limit of {max_product}"
        )
    facts: set[Atom] = set()
    summaries: dict[tuple[Term, ...], frozenset[Atom]] = {}
    anchors: list[tuple[Term, ...]] = []
    for i, p in enumerate(PRIMES[:m]):
        nodes = [const(f"g{i}_{j}") for j in range(p)]
        cycle = {atom("next", nodes[j], nodes[(j + 1) % p]) for j in range(p)}
        tops = {Atom(TOP, (n,)) for n in nodes}
        facts |= cycle | tops
        anchors.append((nodes[0],))
        summaries[(nodes[0],)] = frozenset(cycle | tops)
    kb = KnowledgeBase(Dataset(frozenset(facts)))
    skb = SelectiveKB(kb, make_selector("table", table=summaries))
    return Fixture(f"prime_cycles_{m}", skb, unit_of(anchors), summaries)


# ---------------------------------------------------------------------------
# Random knowledge bases
# ---------------------------------------------------------------------------


def make_random(
    seed: int,
    entities: int = 8,
    predicates: int = 3,
    density: float = 0.5,
    rule_count: int = 0,
    selector: str = "neighborhood",
) -> Fixture:
    """Seed-deterministic random knowledge base.

    Every entity always gets its ``top`` fact, so density 0 still yields a
    valid (top-only) dataset.  Each predicate then receives about
    ``density * entities`` random binary atoms.
    """
    if entities < 1 or predicates < 1:
        raise SemanticError("need at least one entity and one predicate")
    if not 0.0 <= density <= 1.0:
        raise SemanticError("density must lie in [0, 1]")
    rng = random.Random(seed)
    pool = [const(f"e{i}") for i in range(entities)]
    facts: set[Atom] = {Atom(TOP, (e,)) for e in pool}
    preds = [f"p{i}" for i in range(predicates)]
    per_pred = round(density * entities)
    for p in preds:
        for _ in range(per_pred):
            facts.add(atom(p, rng.choice(pool), rng.choice(pool)))
    rules = []
    for _ in range(rule_count):
        a, b = rng.choice(preds), rng.choice(preds)
        head = rng.choice(preds)
        rules.append(
            DatalogRule(
                atom(head, var("X"), var("Z")),
                (atom(a, var("X"), var("Y")), atom(b, var("Y"), var("Z"))),
            )
        )
    kb = KnowledgeBase(Dataset(frozenset(facts)), tuple(rules))
    skb = SelectiveKB(kb, make_selector(selector))
    k = rng.randint(2, min(4, entities)) if entities >= 2 else 1
    chosen = rng.sample(pool, k)
    unit = unit_of([(e,) for e in chosen])
    return Fixture(f"random_{seed}", skb, unit)


FIXTURES = {
    "themepark": make_themepark,
    "prime-cycles": make_prime_cycles,
    "random": make_random,
}
