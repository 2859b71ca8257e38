"""Canonical characterization of a unit of entity tuples.

Given a unit ``U = {τ₁,…,τ_m}`` over a selective knowledge base, the
canonical characterization ``can(U)`` is the most specific nearly-connected
conjunctive formula every tuple of the unit answers within its own summary.
It is built from the direct product of the tuples' summaries:

1. every atom combination, one per summary and same predicate, yields one
   product atom whose arguments are index tuples of source constants;
2. the ``n`` answer columns (position ``s`` holds ``(τ₁[s],…,τ_m[s])``)
   become the free variables — a repeated column repeats the variable;
3. index tuples whose entries all agree on one constant collapse back to
   that constant; every other index tuple becomes an existential variable;
4. a column whose entries all agree is *dual* — it is kept in both guises,
   so an atom containing ``d`` dual terms contributes ``2^d`` variants;
5. finally only atoms connected (through shared terms, constants included)
   to at least one free variable survive, plus one ``top`` atom per free
   variable.

For a one-tuple unit the product is the summary itself: the columns still
become free variables and everything else stays constant, with no duals.

``core(U)`` is the canonical characterization with every redundant atom
folded away; it is the formula the navigation layer exposes.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Optional

from .errors import CapacityError, InvariantError, SemanticError
from .formula import (
    ConjunctiveFormula,
    EntityTuple,
    core_of,
    equivalent,
    is_nearly_connected,
    satisfies,
)
from .kb import SelectiveKB, Unit, render_tuple, tuple_sort_key
from .relcore import TOP, Atom, Dataset, Term, const, var

DEFAULT_PRODUCT_CAP = 10_000_000


def _index_name(entries: tuple[str, ...]) -> str:
    # str() of a tuple of strings is injective thanks to repr escaping, so
    # distinct index tuples can never alias one another.
    return str(entries)


def product_term(entries: tuple[str, ...]) -> Term:
    return const(_index_name(entries), index=entries)


def tuple_product(*tuples: EntityTuple) -> tuple[Term, ...]:
    """Columnwise product of same-arity tuples into index-tuple terms."""
    if not tuples:
        raise SemanticError("tuple product needs at least one tuple")
    arity = len(tuples[0])
    for tup in tuples:
        if len(tup) != arity:
            raise SemanticError(
                f"tuple product over mixed arities: {len(tup)} vs {arity}"
            )
    return tuple(
        product_term(tuple(tup[s].name for tup in tuples)) for s in range(arity)
    )


def dataset_product(*datasets: Dataset, cap: int = DEFAULT_PRODUCT_CAP) -> Dataset:
    """Direct product of ground datasets over index-tuple terms."""
    atoms = set()
    for combo in _iter_product_atoms([d.atoms for d in datasets], cap):
        atoms.add(combo)
    return Dataset(frozenset(atoms))


def _iter_product_atoms(
    factor_atoms: list[frozenset[Atom]], cap: int
) -> Iterable[Atom]:
    """Stream the product atoms predicate by predicate, counting against cap."""
    by_pred: list[dict[tuple[str, int], list[Atom]]] = []
    for atoms in factor_atoms:
        index: dict[tuple[str, int], list[Atom]] = {}
        for a in sorted(atoms, key=Atom.sort_key):
            index.setdefault((a.pred, len(a.args)), []).append(a)
        by_pred.append(index)
    shared = set(by_pred[0])
    for index in by_pred[1:]:
        shared &= set(index)
    produced = 0
    for pred, arity in sorted(shared):
        pools = [index[(pred, arity)] for index in by_pred]
        expected = 1
        for pool in pools:
            expected *= len(pool)
        produced += expected
        if produced > cap:
            raise CapacityError(
                f"product would stream {produced} atoms for predicate {pred!r}, "
                f"exceeding the cap of {cap}"
            )
        for combo in itertools.product(*pools):
            args = tuple(
                product_term(tuple(a.args[pos].name for a in combo))
                for pos in range(arity)
            )
            yield Atom(pred, args)


# ---------------------------------------------------------------------------
# The characterization builder
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _BuildContext:
    """Classification of index-tuple terms for one build.

    ``columns[s]`` is the index term of answer position ``s``; ``free[s]``
    the variable it becomes.  ``duals`` are column terms whose entries all
    coincide (only possible with two or more tuples), which get the
    two-guise treatment.
    """

    m: int
    columns: tuple[Term, ...]
    free: tuple[Term, ...]
    duals: frozenset[Term]

    @classmethod
    def for_unit(cls, unit: Unit) -> "_BuildContext":
        tuples = unit.sorted_tuples
        columns = tuple_product(*tuples)
        free: dict[Term, Term] = {}
        for s, col in enumerate(columns):
            free.setdefault(col, var(f"x{s + 1}", index=col.index))
        m = len(tuples)
        duals = frozenset(
            col for col in columns if m > 1 and len(set(col.index)) == 1
        )
        return cls(m, columns, tuple(free[c] for c in columns), duals)

    def general(self, t: Term) -> Optional[Term]:
        """The collapsed constant for an all-equal index term, if any."""
        entries = t.index
        if entries is not None and len(set(entries)) == 1:
            return const(entries[0])
        return None

    def rename(self, t: Term, dual_as_const: frozenset[Term]) -> Term:
        if t in dual_as_const:
            collapsed = self.general(t)
            assert collapsed is not None
            return collapsed
        try:
            s = self.columns.index(t)
        except ValueError:
            pass
        else:
            return self.free[s]
        collapsed = self.general(t)
        if collapsed is not None and self.m >= 1:
            return collapsed
        return var(f"y{t.name}", index=t.index)

    def variants(self, a: Atom) -> Iterable[Atom]:
        """All guise choices for the dual terms of one product atom."""
        present = sorted({t for t in a.args if t in self.duals}, key=Term.sort_key)
        for k in range(len(present) + 1):
            for chosen in itertools.combinations(present, k):
                as_const = frozenset(chosen)
                yield Atom(a.pred, tuple(self.rename(t, as_const) for t in a.args))


class _Components:
    """Union-find over the terms of the candidate atoms."""

    def __init__(self) -> None:
        self._parent: dict[Term, Term] = {}

    def find(self, x: Term) -> Term:
        parent = self._parent
        root = parent.setdefault(x, x)
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(self, a: Term, b: Term) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self._parent[ra] = rb


def build_can(
    unit: Unit,
    skb: SelectiveKB,
    product_cap: Optional[int] = None,
) -> ConjunctiveFormula:
    """The canonical characterization of a unit (memoized on the base)."""
    cap = DEFAULT_PRODUCT_CAP if product_cap is None else product_cap
    return skb._memo(("can", unit, cap), lambda: _build_can(unit, skb, cap))


def _build_can(unit: Unit, skb: SelectiveKB, cap: int) -> ConjunctiveFormula:
    ctx = _BuildContext.for_unit(unit)
    summaries = [skb.summary(tup).atoms for tup in unit.sorted_tuples]

    candidates: set[Atom] = set()
    for product_atom in _iter_product_atoms(summaries, cap):
        for variant in ctx.variants(product_atom):
            candidates.add(variant)
    if len(candidates) > cap:
        raise CapacityError(
            f"candidate atom set reached {len(candidates)}, exceeding the cap of {cap}"
        )

    comps = _Components()
    for a in candidates:
        first = a.args[0]
        for t in a.args[1:]:
            comps.union(first, t)
    anchored = {comps.find(v) for v in ctx.free}
    body = {a for a in candidates if comps.find(a.args[0]) in anchored}
    body |= {Atom(TOP, (v,)) for v in dict.fromkeys(ctx.free)}

    can = ConjunctiveFormula(ctx.free, tuple(body))
    if not is_nearly_connected(can):
        raise InvariantError(
            f"canonical characterization of {unit!r} is not nearly connected"
        )
    return can


def build_core(
    unit: Unit, skb: SelectiveKB, product_cap: Optional[int] = None
) -> ConjunctiveFormula:
    """Core of the canonical characterization (memoized on the base)."""
    cap = DEFAULT_PRODUCT_CAP if product_cap is None else product_cap
    return skb._memo(
        ("core", unit, cap), lambda: core_of(build_can(unit, skb, product_cap))
    )


# ---------------------------------------------------------------------------
# What a formula says about a unit
# ---------------------------------------------------------------------------


def explains(f: ConjunctiveFormula, unit: Unit, skb: SelectiveKB) -> bool:
    """Whether every tuple of the unit answers ``f`` within its own summary."""
    if f.arity != unit.arity:
        raise SemanticError(
            f"formula arity {f.arity} does not match unit arity {unit.arity}"
        )
    return all(satisfies(f, skb.summary(tup), tup) for tup in unit.sorted_tuples)


def characterizes(f: ConjunctiveFormula, unit: Unit, skb: SelectiveKB) -> bool:
    """Whether ``f`` explains the unit and is equivalent to its canonical
    characterization (i.e. pins down exactly the same answers everywhere)."""
    return explains(f, unit, skb) and equivalent(f, build_can(unit, skb))
