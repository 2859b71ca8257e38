"""Conjunctive formulas over relational vocabulary.

A formula pairs an ordered list of free (answer) variables with a nonempty
conjunction of atoms.  The text form reads::

    X1,X2 <- works_at(X1,Y1), located(Y1,X2), top(X1).

Left of ``<-`` are the free variables; the body is a comma-separated atom
list ending with a period.  Names starting with an uppercase letter or ``?``
are variables, everything else (or anything quoted) is a constant.

Free variables may repeat; a repeated position simply constrains two answer
columns to coincide.  Evaluation is complete enumeration of the answers over
a ground dataset, where a tuple answers the formula exactly when pinning the
free variables positionwise to its entries extends to a homomorphism of the
body into the dataset that fixes constants.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Optional

from .errors import ParseError, SemanticError
from .relcore import (
    Atom,
    Dataset,
    Term,
    canonical_atoms,
    const,
    constant_pins,
    domain_of,
    find_homomorphism,
    is_connected,
    is_isomorphic,
    predicate_arities,
    var,
)

EntityTuple = tuple[Term, ...]


@dataclass(frozen=True)
class ConjunctiveFormula:
    """Free variables plus a conjunction of body atoms.

    The body is stored deduplicated in canonical order, so two formulas
    built from the same atoms in any order compare equal.
    """

    free_vars: tuple[Term, ...]
    body: tuple[Atom, ...]

    def __post_init__(self) -> None:
        if not self.body:
            raise SemanticError("formula body must contain at least one atom")
        object.__setattr__(self, "body", canonical_atoms(set(self.body)))
        predicate_arities(self.body)
        occurring = domain_of(self.body)
        for v in self.free_vars:
            if not v.is_var:
                raise SemanticError(f"free term {v!r} is not a variable")
            if v not in occurring:
                raise SemanticError(f"free variable {v!r} does not occur in the body")

    @property
    def arity(self) -> int:
        return len(self.free_vars)

    @property
    def is_open(self) -> bool:
        return self.arity > 0

    @cached_property
    def existential_vars(self) -> frozenset[Term]:
        return frozenset(
            t for t in domain_of(self.body) if t.is_var and t not in set(self.free_vars)
        )

    def __repr__(self) -> str:
        return f"<{render_formula(self)}>"


def formula(free_vars: Iterable[Term], body: Iterable[Atom]) -> ConjunctiveFormula:
    return ConjunctiveFormula(tuple(free_vars), tuple(body))


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

_BARE = re.compile(r"[A-Za-z0-9_?][A-Za-z0-9_]*")
_PLAIN_CONST = re.compile(r"[a-z0-9_][a-z0-9_]*\Z")


class _Tokens:
    """Hand-rolled scanner that keeps 1-based line/column for errors."""

    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.line = 1
        self.col = 1

    def error(self, message: str) -> ParseError:
        return ParseError(message, self.line, self.col)

    def _advance(self, n: int) -> None:
        for ch in self.text[self.pos : self.pos + n]:
            if ch == "\n":
                self.line += 1
                self.col = 1
            else:
                self.col += 1
        self.pos += n

    def skip_ws(self) -> None:
        while self.pos < len(self.text):
            ch = self.text[self.pos]
            if ch in " \t\r\n":
                self._advance(1)
            elif ch == "%":  # comment to end of line
                end = self.text.find("\n", self.pos)
                self._advance((end if end != -1 else len(self.text)) - self.pos)
            else:
                return

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def take(self, literal: str) -> bool:
        self.skip_ws()
        if self.text.startswith(literal, self.pos):
            self._advance(len(literal))
            return True
        return False

    def expect(self, literal: str) -> None:
        if not self.take(literal):
            got = self.peek() or "end of input"
            raise self.error(f"expected {literal!r}, found {got!r}")

    def name(self) -> Term:
        self.skip_ws()
        ch = self.peek()
        if ch and ch in "'\"":
            quote = ch
            self._advance(1)
            end = self.text.find(quote, self.pos)
            if end == -1:
                raise self.error("unterminated quoted constant")
            raw = self.text[self.pos : end]
            self._advance(end + 1 - self.pos)
            if not raw:
                raise self.error("empty quoted constant")
            return const(raw)
        m = _BARE.match(self.text, self.pos)
        if not m:
            raise self.error(f"expected a name, found {ch or 'end of input'!r}")
        raw = m.group(0)
        self._advance(len(raw))
        if raw.startswith("?"):
            if len(raw) == 1:
                raise self.error("'?' must be followed by a variable name")
            return var(raw[1:])
        if raw[0].isupper():
            return var(raw)
        return const(raw)


def parse_formula(text: str) -> ConjunctiveFormula:
    """Parse the ``x1,...,xn <- atom, ... .`` concrete syntax.

    Malformed input raises :class:`ParseError` carrying line and column;
    a well-formed text that breaks a formula invariant (free variable
    missing from the body) raises :class:`SemanticError`.
    """
    toks = _Tokens(text)
    free: list[Term] = []
    if not toks.take("<-"):
        while True:
            t = toks.name()
            if not t.is_var:
                raise toks.error(f"free position holds constant {t.name!r}, expected a variable")
            free.append(t)
            if toks.take(","):
                continue
            toks.expect("<-")
            break
    body = [_parse_atom(toks)]
    while toks.take(","):
        body.append(_parse_atom(toks))
    toks.expect(".")
    toks.skip_ws()
    if toks.pos != len(toks.text):
        raise toks.error("trailing input after final '.'")
    return ConjunctiveFormula(tuple(free), tuple(body))


def _parse_atom(toks: _Tokens) -> Atom:
    toks.skip_ws()
    pred = toks.name()
    if pred.is_var:
        raise toks.error(f"predicate name {pred.name!r} must be lowercase")
    toks.expect("(")
    args = [toks.name()]
    while toks.take(","):
        args.append(toks.name())
    toks.expect(")")
    return Atom(pred.name, tuple(args))


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------


def _term_text(t: Term, names: dict[Term, str]) -> str:
    if t.is_var:
        return names[t]
    if _PLAIN_CONST.match(t.name):
        return t.name
    return f"'{t.name}'"


def render_formula(f: ConjunctiveFormula) -> str:
    """Deterministic canonical text: free vars become X1..Xn (a repeated
    variable keeps the name of its first position), existential variables
    become Y1.. in order of first appearance over the pre-sorted body, and
    atoms are emitted sorted by predicate then argument names."""
    names: dict[Term, str] = {}
    for i, v in enumerate(f.free_vars):
        names.setdefault(v, f"X{i + 1}")
    counter = 0
    for a in f.body:  # body is already canonically sorted
        for t in a.args:
            if t.is_var and t not in names:
                counter += 1
                names[t] = f"Y{counter}"
    rendered = sorted(
        (a.pred, tuple(_term_text(t, names) for t in a.args)) for a in f.body
    )
    body_text = ", ".join(f"{p}({','.join(args)})" for p, args in rendered)
    head = ",".join(names[v] for v in f.free_vars)
    return f"{head} <- {body_text}." if head else f"<- {body_text}."


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def _var_candidates(body: tuple[Atom, ...], data: frozenset[Atom]) -> dict[Term, set[Term]]:
    at_pos: dict[tuple[str, int, int], set[Term]] = {}
    for a in data:
        for pos, t in enumerate(a.args):
            at_pos.setdefault((a.pred, len(a.args), pos), set()).add(t)
    cands: dict[Term, set[Term]] = {}
    for a in body:
        for pos, t in enumerate(a.args):
            if not t.is_var:
                continue
            here = at_pos.get((a.pred, len(a.args), pos), set())
            if t in cands:
                cands[t] &= here
            else:
                cands[t] = set(here)
    return cands


def evaluate(f: ConjunctiveFormula, data: Dataset | Iterable[Atom]) -> set[EntityTuple]:
    """All answer tuples of ``f`` over a ground dataset.

    Complete enumeration: every joint assignment of the free variables is
    tried, and one counts when it extends to a constant-fixing homomorphism
    of the body into the data.  A closed formula answers with the empty
    tuple when its body maps in at all.
    """
    atoms = data.atoms if isinstance(data, Dataset) else frozenset(data)
    base_pins = constant_pins(f.body)
    distinct = list(dict.fromkeys(f.free_vars))
    cands = _var_candidates(f.body, atoms)
    answers: set[EntityTuple] = set()

    def assign(i: int, pins: dict[Term, Term]) -> None:
        if i == len(distinct):
            if find_homomorphism(f.body, atoms, pins) is not None:
                answers.add(tuple(pins[v] for v in f.free_vars))
            return
        v = distinct[i]
        for image in sorted(cands.get(v, ()), key=Term.sort_key):
            pins[v] = image
            assign(i + 1, pins)
            del pins[v]

    assign(0, dict(base_pins))
    return answers


def satisfies(
    f: ConjunctiveFormula, data: Dataset | Iterable[Atom], tup: EntityTuple
) -> bool:
    """Whether one specific tuple answers the formula over the data.

    Cheaper than :func:`evaluate` when only a single membership matters: the
    free variables are pinned positionwise to the tuple's entries and a
    single homomorphism search decides.
    """
    if len(tup) != f.arity:
        raise SemanticError(
            f"tuple of length {len(tup)} cannot answer a formula of arity {f.arity}"
        )
    pins = dict(constant_pins(f.body))
    for v, image in zip(f.free_vars, tup):
        if pins.setdefault(v, image) != image:
            return False
    atoms = data.atoms if isinstance(data, Dataset) else frozenset(data)
    return find_homomorphism(f.body, atoms, pins) is not None


# ---------------------------------------------------------------------------
# Comparison and cores
# ---------------------------------------------------------------------------


class HomRelation(enum.Enum):
    MAPS_TO_ONLY = "maps_to_only"
    MAPPED_FROM_ONLY = "mapped_from_only"
    EQUIVALENT = "equivalent"
    INCOMPARABLE = "incomparable"
    ISOMORPHIC = "isomorphic"


def _positional_pins(f: ConjunctiveFormula, g: ConjunctiveFormula) -> Optional[dict[Term, Term]]:
    """Pins sending f's free variables positionwise onto g's, plus f's
    constants to themselves; None when a repeated variable would need two
    distinct images (no such mapping can exist)."""
    pins = dict(constant_pins(f.body))
    for mine, theirs in zip(f.free_vars, g.free_vars):
        if pins.setdefault(mine, theirs) != theirs:
            return None
    return pins


def maps_to(f: ConjunctiveFormula, g: ConjunctiveFormula) -> bool:
    """Whether f's body maps homomorphically into g's, respecting answer
    positions (so every answer of g is an answer of f)."""
    if f.arity != g.arity:
        raise SemanticError(
            f"cannot compare formulas of arity {f.arity} and {g.arity}"
        )
    pins = _positional_pins(f, g)
    if pins is None:
        return False
    return find_homomorphism(f.body, g.body, pins) is not None


def equivalent(f: ConjunctiveFormula, g: ConjunctiveFormula) -> bool:
    return maps_to(f, g) and maps_to(g, f)


def formulas_isomorphic(f: ConjunctiveFormula, g: ConjunctiveFormula) -> bool:
    if f.arity != g.arity:
        raise SemanticError(
            f"cannot compare formulas of arity {f.arity} and {g.arity}"
        )
    pins = _positional_pins(f, g)
    back = _positional_pins(g, f)
    if pins is None or back is None:
        return False
    return is_isomorphic(f.body, g.body, pins)


def hom_relation(f: ConjunctiveFormula, g: ConjunctiveFormula) -> HomRelation:
    forward = maps_to(f, g)
    backward = maps_to(g, f)
    if forward and backward:
        if formulas_isomorphic(f, g):
            return HomRelation.ISOMORPHIC
        return HomRelation.EQUIVALENT
    if forward:
        return HomRelation.MAPS_TO_ONLY
    if backward:
        return HomRelation.MAPPED_FROM_ONLY
    return HomRelation.INCOMPARABLE


_NC_MARKER = "__near_con__"


def is_nearly_connected(f: ConjunctiveFormula) -> bool:
    """Whether every body atom reaches some free variable through shared
    terms.  Checked by linking all free variables with one fresh marker atom
    and asking for plain connectivity."""
    if not f.is_open:
        raise SemanticError("nearly-connectedness requires an open formula")
    marker = Atom(_NC_MARKER, tuple(dict.fromkeys(f.free_vars)))
    return is_connected(list(f.body) + [marker])


def core_of(f: ConjunctiveFormula) -> ConjunctiveFormula:
    """Equivalent formula with no redundant atom.

    Single pass over the body in canonical order: drop an atom whenever the
    remaining body still admits a homomorphism from the current one that
    fixes every free variable and constant.  One pass suffices — an atom
    that survives its attempt can never become droppable later, because the
    later removal homomorphisms would compose into one that justified
    dropping it at its own attempt.
    """
    pins = {v: v for v in f.free_vars}
    pins.update(constant_pins(f.body))
    body = list(f.body)
    for a in f.body:
        trial = [b for b in body if b != a]
        if trial and find_homomorphism(body, trial, pins) is not None:
            body = trial
    return ConjunctiveFormula(f.free_vars, tuple(body))
