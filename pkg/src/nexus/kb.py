"""Knowledge bases: ground facts, positive Datalog rules, entailment, and
per-tuple summaries.

A knowledge base couples a nonempty fact set with (possibly zero) rules of
the shape ``head(...) :- b1(...), ..., bk(...).``.  Entailment is the least
fixpoint of applying the rules, computed semi-naively (each round only joins
against atoms derived in the previous round).

A *selective* knowledge base adds a summary selector: a function assigning
every entity tuple a small dataset that stands in for the whole entailment
when that tuple is characterized.  Three selectors ship:

* ``full`` — every tuple gets the complete top-closed entailment;
* ``neighborhood`` — atoms led by the tuple's entities, one hop of follow-up
  atoms through non-``isa`` binary links, and the matching ``top`` atoms;
* ``table`` — summaries read verbatim from a file, validated against the
  summary contract when first used.

Every summary must satisfy the contract: contained in the top-closed
entailment, closed under ``top``, and covering the tuple's own constants.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Mapping, Optional

from .errors import ParseError, SemanticError
from .formula import EntityTuple, _parse_atom, _Tokens
from .relcore import (
    TOP,
    Atom,
    Dataset,
    Term,
    canonical_atoms,
    close_under_top,
    domain_of,
    predicate_arities,
)

ISA = "isa"


@dataclass(frozen=True)
class DatalogRule:
    head: Atom
    body: tuple[Atom, ...]

    def __post_init__(self) -> None:
        if not self.body:
            raise SemanticError(f"rule for {self.head.pred!r} has an empty body")
        bound = {t for a in self.body for t in a.args if t.is_var}
        for t in self.head.args:
            if t.is_var and t not in bound:
                raise SemanticError(
                    f"unsafe rule: head variable {t.name!r} does not occur in the body"
                )

    def __repr__(self) -> str:
        return f"{self.head!r} :- {', '.join(map(repr, self.body))}"


@dataclass(frozen=True)
class KnowledgeBase:
    dataset: Dataset
    rules: tuple[DatalogRule, ...] = ()

    def __post_init__(self) -> None:
        if len(self.dataset) == 0:
            raise SemanticError("knowledge base has an empty dataset")
        arities = predicate_arities(self.dataset.atoms)
        for r in self.rules:
            predicate_arities([r.head, *r.body], arities)

    @cached_property
    def entailed(self) -> Dataset:
        return _least_fixpoint(self)

    @cached_property
    def entailed_top(self) -> Dataset:
        return close_under_top(self.entailed)

    @property
    def domain(self) -> frozenset[Term]:
        return self.entailed.domain

    def stats(self) -> dict[str, int]:
        return {
            "facts": len(self.dataset),
            "entailed": len(self.entailed),
            "entities": len(self.domain),
            "max_arity": max(len(a.args) for a in self.dataset.atoms | self.entailed.atoms),
        }


# ---------------------------------------------------------------------------
# Entailment (semi-naive least fixpoint)
# ---------------------------------------------------------------------------


def _bind(a: Atom, cand: Atom, binding: dict[Term, Term]) -> Optional[dict[Term, Term]]:
    out = dict(binding)
    for t, image in zip(a.args, cand.args):
        if t.is_const:
            if t != image:
                return None
        elif out.setdefault(t, image) != image:
            return None
    return out


def _least_fixpoint(kb: KnowledgeBase) -> Dataset:
    facts: set[Atom] = set(kb.dataset.atoms)
    by_pred: dict[str, list[Atom]] = {}
    for a in facts:
        by_pred.setdefault(a.pred, []).append(a)

    def matches(rule: DatalogRule, pivot: int, delta: set[Atom]):
        """Bindings of the rule body with atom ``pivot`` matched in delta."""

        def extend(j: int, binding: dict[Term, Term]):
            if j == len(rule.body):
                yield binding
                return
            a = rule.body[j]
            pool = delta_by_pred.get(a.pred, ()) if j == pivot else by_pred.get(a.pred, ())
            for cand in pool:
                if len(cand.args) != len(a.args):
                    continue
                got = _bind(a, cand, binding)
                if got is not None:
                    yield from extend(j + 1, got)

        delta_by_pred: dict[str, list[Atom]] = {}
        for a in delta:
            delta_by_pred.setdefault(a.pred, []).append(a)
        yield from extend(0, {})

    delta = set(facts)
    while delta:
        fresh: set[Atom] = set()
        for rule in kb.rules:
            for pivot in range(len(rule.body)):
                for binding in matches(rule, pivot, delta):
                    head = Atom(
                        rule.head.pred,
                        tuple(binding.get(t, t) for t in rule.head.args),
                    )
                    if head not in facts:
                        fresh.add(head)
        for a in fresh:
            by_pred.setdefault(a.pred, []).append(a)
        facts |= fresh
        delta = fresh
    return Dataset(frozenset(facts))


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------


def parse_kb(text: str) -> KnowledgeBase:
    """Parse facts and rules from one text.

    Facts are ground atoms ending with a period; rules use ``:-`` between
    head and body.  ``%`` starts a comment.  The first occurrence of a
    predicate fixes its arity; conflicts, unsafe rules, non-ground facts and
    an empty fact set are all rejected.
    """
    facts, rules = parse_kb_parts(text)
    if not facts:
        raise ParseError("knowledge base text contains no facts")
    return KnowledgeBase(Dataset(frozenset(facts)), tuple(rules))


def parse_kb_parts(text: str) -> tuple[list[Atom], list[DatalogRule]]:
    toks = _Tokens(text)
    facts: list[Atom] = []
    rules: list[DatalogRule] = []
    arities: dict[str, int] = {}
    while True:
        toks.skip_ws()
        if toks.pos >= len(toks.text):
            break
        line, col = toks.line, toks.col
        head = _parse_atom(toks)
        if toks.take(":-"):
            body = [_parse_atom(toks)]
            while toks.take(","):
                body.append(_parse_atom(toks))
            toks.expect(".")
            try:
                rule = DatalogRule(head, tuple(body))
                arities = predicate_arities([head, *body], arities)
            except SemanticError as err:
                raise ParseError(str(err), line, col) from err
            rules.append(rule)
        else:
            toks.expect(".")
            if not head.is_ground:
                raise ParseError(
                    f"fact {head.pred}/{len(head.args)} contains a variable", line, col
                )
            try:
                arities = predicate_arities([head], arities)
            except SemanticError as err:
                raise ParseError(str(err), line, col) from err
            facts.append(head)
    return facts, rules


def render_kb(kb: KnowledgeBase) -> tuple[str, str]:
    """Facts text and rules text, canonically ordered, reparseable."""
    fact_lines = [_atom_text(a) + "." for a in kb.dataset]
    rule_lines = [
        f"{_atom_text(r.head)} :- {', '.join(_atom_text(b) for b in r.body)}."
        for r in kb.rules
    ]
    return "\n".join(fact_lines) + "\n", "\n".join(rule_lines) + ("\n" if rule_lines else "")


def _atom_text(a: Atom) -> str:
    from .formula import _PLAIN_CONST

    def t_text(t: Term) -> str:
        if t.is_var:
            return f"?{t.name}" if not t.name[0].isupper() else t.name
        return t.name if _PLAIN_CONST.match(t.name) else f"'{t.name}'"

    return f"{a.pred}({','.join(t_text(t) for t in a.args)})"


# ---------------------------------------------------------------------------
# Units: finite sets of same-arity entity tuples
# ---------------------------------------------------------------------------


def tuple_sort_key(tup: EntityTuple) -> tuple:
    return tuple(t.sort_key() for t in tup)


@dataclass(frozen=True)
class Unit:
    """A nonempty set of entity tuples sharing one arity."""

    arity: int
    tuples: frozenset[EntityTuple]

    def __post_init__(self) -> None:
        if self.arity < 1:
            raise SemanticError("unit arity must be at least 1")
        if not self.tuples:
            raise SemanticError("unit must contain at least one tuple")
        for tup in self.tuples:
            if len(tup) != self.arity:
                raise SemanticError(
                    f"unit tuple {render_tuple(tup)} has length {len(tup)}, expected {self.arity}"
                )
            for t in tup:
                if not t.is_const:
                    raise SemanticError(f"unit tuples hold constants, got {t!r}")

    @property
    def sorted_tuples(self) -> tuple[EntityTuple, ...]:
        return tuple(sorted(self.tuples, key=tuple_sort_key))

    def with_tuple(self, tup: EntityTuple) -> "Unit":
        return Unit(self.arity, self.tuples | {tuple(tup)})

    def __len__(self) -> int:
        return len(self.tuples)

    def __contains__(self, tup: EntityTuple) -> bool:
        return tuple(tup) in self.tuples

    def __repr__(self) -> str:
        return "{" + "; ".join(render_tuple(t) for t in self.sorted_tuples) + "}"


def unit_of(tuples: Iterable[EntityTuple]) -> Unit:
    tuples = [tuple(t) for t in tuples]
    if not tuples:
        raise SemanticError("unit must contain at least one tuple")
    return Unit(len(tuples[0]), frozenset(tuples))


def parse_unit(text: str) -> Unit:
    """Parse the ``c1,c2;c3,c4`` unit syntax (``;`` between tuples)."""
    toks = _Tokens(text)
    tuples: list[EntityTuple] = []
    while True:
        entries = [toks.name()]
        while toks.take(","):
            entries.append(toks.name())
        for t in entries:
            if not t.is_const:
                raise ParseError(f"unit entries are constants, got variable {t.name!r}")
        tuples.append(tuple(entries))
        if not toks.take(";"):
            break
    toks.skip_ws()
    if toks.pos != len(toks.text):
        raise ParseError("trailing input after unit", toks.line, toks.col)
    return unit_of(tuples)


def render_unit(u: Unit) -> str:
    return ";".join(",".join(t.name for t in tup) for tup in u.sorted_tuples)


# ---------------------------------------------------------------------------
# Summary selectors
# ---------------------------------------------------------------------------


class Selector:
    """Assigns each entity tuple its summary dataset."""

    name: str = "?"

    def select(self, skb: "SelectiveKB", tup: EntityTuple) -> frozenset[Atom]:
        raise NotImplementedError


class FullSelector(Selector):
    name = "full"

    def select(self, skb: "SelectiveKB", tup: EntityTuple) -> frozenset[Atom]:
        return skb.kb.entailed_top.atoms


class NeighborhoodSelector(Selector):
    """One hop of leading atoms plus follow-ups through non-isa binary links.

    For a single entity ``e``: every entailed atom whose first argument is
    ``e``; then, for each non-``isa`` binary atom ``p(e, e')`` among those,
    every entailed atom whose first argument is ``e'``; finally ``top`` atoms
    for every entity mentioned so far.  An entity leading no atom at all
    summarizes to just its own ``top`` atom.  Longer tuples take the union of
    their entries' summaries.
    """

    name = "neighborhood"

    def select(self, skb: "SelectiveKB", tup: EntityTuple) -> frozenset[Atom]:
        if len(tup) > 1:
            out: set[Atom] = set()
            for e in tup:
                out |= self.select(skb, (e,))
            return frozenset(out)
        (e,) = tup
        entailed = skb.kb.entailed
        leading = _leading_index(skb)
        first_hop = set(leading.get(e, ()))
        atoms = set(first_hop)
        for a in first_hop:
            if a.pred != ISA and len(a.args) == 2:
                atoms |= leading.get(a.args[1], set())
        mentioned = {t for a in atoms for t in a.args} | {e}
        atoms |= {Atom(TOP, (t,)) for t in mentioned}
        return frozenset(atoms)


def _leading_index(skb: "SelectiveKB") -> dict[Term, set[Atom]]:
    def build() -> dict[Term, set[Atom]]:
        index: dict[Term, set[Atom]] = {}
        for a in skb.kb.entailed.atoms:
            index.setdefault(a.args[0], set()).add(a)
        return index

    return skb._memo("leading-index", build)


class TableSelector(Selector):
    """Summaries read from a prepared table, one block per tuple."""

    name = "table"

    def __init__(self, table: Mapping[EntityTuple, frozenset[Atom]]):
        self.table = dict(table)

    def select(self, skb: "SelectiveKB", tup: EntityTuple) -> frozenset[Atom]:
        if tup not in self.table:
            raise SemanticError(
                f"summary table has no entry for tuple {render_tuple(tup)}"
            )
        return self.table[tup]


class SelectiveKB:
    """A knowledge base paired with a summary selector.

    Summaries are memoized and validated against the summary contract the
    first time each tuple is requested.  All caches fill idempotently under
    a lock, so instances are safe to share between threads.
    """

    def __init__(self, kb: KnowledgeBase, selector: Selector):
        self.kb = kb
        self.selector = selector
        self._cache: dict = {}
        self._lock = threading.Lock()

    def _memo(self, key, build: Callable):
        # Build outside the lock: fills are idempotent, so a duplicate
        # concurrent build is harmless, and build functions may re-enter.
        with self._lock:
            if key in self._cache:
                return self._cache[key]
        value = build()
        with self._lock:
            return self._cache.setdefault(key, value)

    def summary(self, tup: EntityTuple) -> Dataset:
        tup = tuple(tup)
        known = self.kb.domain
        for t in tup:
            if not t.is_const:
                raise SemanticError(f"summary tuples hold constants, got {t!r}")
            if t not in known:
                raise SemanticError(f"unknown constant {t.name!r}")
        return self._memo(("summary", tup), lambda: self._checked_summary(tup))

    def _checked_summary(self, tup: EntityTuple) -> Dataset:
        atoms = self.selector.select(self, tup)
        summary = Dataset(frozenset(atoms))
        _check_summary_contract(summary, self.kb, tup)
        return summary


def _check_summary_contract(summary: Dataset, kb: KnowledgeBase, tup: EntityTuple) -> None:
    label = render_tuple(tup)
    closed = kb.entailed_top
    for a in summary:
        if a not in closed:
            raise SemanticError(
                f"summary for {label} violates the containment clause: "
                f"{_atom_text(a)} is not entailed"
            )
    for t in summary.domain:
        if Atom(TOP, (t,)) not in summary:
            raise SemanticError(
                f"summary for {label} violates the top-closure clause: "
                f"missing top({t.name})"
            )
    missing = [t for t in tup if t not in summary.domain]
    if missing:
        raise SemanticError(
            f"summary for {label} violates the domain clause: "
            f"constant {missing[0].name!r} is not covered"
        )


# ---------------------------------------------------------------------------
# Summary tables: text form
# ---------------------------------------------------------------------------


def render_tuple(tup: EntityTuple) -> str:
    return "<" + ",".join(t.name for t in tup) + ">"


def parse_summaries(text: str) -> dict[EntityTuple, frozenset[Atom]]:
    """Parse ``summary <c1,...,cn>:`` blocks of atom lines."""
    toks = _Tokens(text)
    table: dict[EntityTuple, frozenset[Atom]] = {}
    while True:
        toks.skip_ws()
        if toks.pos >= len(toks.text):
            break
        line, col = toks.line, toks.col
        if not toks.take("summary"):
            raise ParseError("expected a 'summary <...>:' header", line, col)
        toks.expect("<")
        entries = [toks.name()]
        while toks.take(","):
            entries.append(toks.name())
        toks.expect(">")
        toks.expect(":")
        for t in entries:
            if not t.is_const:
                raise ParseError(
                    f"summary tuples hold constants, got variable {t.name!r}", line, col
                )
        tup = tuple(entries)
        atoms: set[Atom] = set()
        while True:
            toks.skip_ws()
            if toks.pos >= len(toks.text) or toks.text.startswith("summary", toks.pos):
                break
            a = _parse_atom(toks)
            toks.expect(".")
            if not a.is_ground:
                raise ParseError(f"summary atom {a.pred!r} contains a variable", line, col)
            atoms.add(a)
        if tup in table:
            raise ParseError(f"duplicate summary block for {render_tuple(tup)}", line, col)
        table[tup] = frozenset(atoms)
    return table


def render_summaries(table: Mapping[EntityTuple, frozenset[Atom]]) -> str:
    blocks = []
    for tup in sorted(table, key=lambda tp: tuple(t.sort_key() for t in tp)):
        lines = [f"summary {render_tuple(tup)}:"]
        lines += [_atom_text(a) + "." for a in canonical_atoms(table[tup])]
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"


# ---------------------------------------------------------------------------
# Selector construction
# ---------------------------------------------------------------------------


def make_selector(
    kind: str, table: Optional[Mapping[EntityTuple, frozenset[Atom]]] = None
) -> Selector:
    if kind == "full":
        return FullSelector()
    if kind == "neighborhood":
        return NeighborhoodSelector()
    if kind == "table":
        if table is None:
            raise SemanticError("table selector needs a summary table")
        return TableSelector(table)
    raise SemanticError(f"unknown selector {kind!r}")
