"""Relational structures and term mappings.

The vocabulary everything else is built from: terms (constants and
variables), atoms over named predicates, ground datasets, and the search
primitives on top of them — connectivity, homomorphisms that may be required
to fix a set of terms ("pins"), and isomorphism.

The reserved unary predicate ``top`` asserts that a term belongs to a
structure's domain; :func:`close_under_top` materializes it.

Everything here is immutable and every operation is pure, so values can be
shared freely across threads.  All orderings are explicit (never relying on
set iteration order), which is what makes rendered output byte-stable.
"""

from __future__ import annotations

from collections import abc
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Optional, Sequence

from .errors import SemanticError

# Surface name of the reserved domain-membership predicate.
TOP = "top"

CONST = "const"
VAR = "var"


@dataclass(frozen=True)
class Term:
    """A constant or a variable.

    ``index`` carries the index sequence of terms created by direct products
    (one source constant per factor); it is preserved through renamings so
    product bookkeeping can classify terms after the fact.  Equality
    deliberately ignores it: two terms with the same kind and name are the
    same term.
    """

    kind: str
    name: str
    index: tuple[str, ...] | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.kind not in (CONST, VAR):
            raise SemanticError(f"unknown term kind {self.kind!r}")
        if not self.name:
            raise SemanticError("term name must be nonempty")
        if self.index is not None and len(self.index) < 1:
            raise SemanticError("product index sequence must be nonempty")

    @property
    def is_const(self) -> bool:
        return self.kind == CONST

    @property
    def is_var(self) -> bool:
        return self.kind == VAR

    def sort_key(self) -> tuple[str, str]:
        return (self.name, self.kind)

    def __repr__(self) -> str:  # compact, for test failure output
        tag = "" if self.is_const else "?"
        return f"{tag}{self.name}"


def const(name: str, index: tuple[str, ...] | None = None) -> Term:
    return Term(CONST, name, index)


def var(name: str, index: tuple[str, ...] | None = None) -> Term:
    return Term(VAR, name, index)


# Pins may be given as a mapping or as (term, image) pairs; the pair form is
# checked for collisions before any search starts.
Pins = Optional[Mapping["Term", "Term"] | Iterable[tuple["Term", "Term"]]]


@dataclass(frozen=True)
class Atom:
    """A predicate applied to an ordered tuple of terms."""

    pred: str
    args: tuple[Term, ...]

    def __post_init__(self) -> None:
        if not self.pred:
            raise SemanticError("predicate name must be nonempty")
        if len(self.args) == 0:
            raise SemanticError(f"atom {self.pred} must have at least one argument")
        if self.pred == TOP and len(self.args) != 1:
            raise SemanticError(f"reserved predicate {TOP!r} has arity exactly 1")

    @property
    def terms(self) -> tuple[Term, ...]:
        return self.args

    @property
    def is_ground(self) -> bool:
        return all(t.is_const for t in self.args)

    def sort_key(self) -> tuple:
        return (self.pred, len(self.args), tuple(t.sort_key() for t in self.args))

    def __repr__(self) -> str:
        return f"{self.pred}({','.join(map(repr, self.args))})"


def atom(pred: str, *args: Term) -> Atom:
    return Atom(pred, tuple(args))


def canonical_atoms(atoms: Iterable[Atom]) -> tuple[Atom, ...]:
    """Atoms in the canonical order: predicate name, then argument names."""
    return tuple(sorted(atoms, key=Atom.sort_key))


def predicate_arities(
    atoms: Iterable[Atom], base: Optional[Mapping[str, int]] = None
) -> dict[str, int]:
    """Arity map where the first occurrence fixes each predicate's arity.

    Raises on a conflict, and enforces the reserved ``top``/1 contract even
    against a caller-provided base map.
    """
    arities: dict[str, int] = dict(base or {})
    if arities.get(TOP, 1) != 1:
        raise SemanticError(f"reserved predicate {TOP!r} has arity exactly 1")
    for a in atoms:
        seen = arities.setdefault(a.pred, len(a.args))
        if seen != len(a.args):
            raise SemanticError(
                f"arity conflict for predicate {a.pred!r}: {seen} vs {len(a.args)}"
            )
    return arities


@dataclass(frozen=True)
class Dataset:
    """A finite set of ground atoms."""

    atoms: frozenset[Atom]

    def __post_init__(self) -> None:
        for a in self.atoms:
            if not a.is_ground:
                raise SemanticError(f"dataset atom {a!r} contains a variable")
        predicate_arities(self.atoms)

    @cached_property
    def domain(self) -> frozenset[Term]:
        return frozenset(t for a in self.atoms for t in a.args)

    def __iter__(self) -> Iterator[Atom]:
        return iter(canonical_atoms(self.atoms))

    def __len__(self) -> int:
        return len(self.atoms)

    def __contains__(self, a: Atom) -> bool:
        return a in self.atoms

    def union(self, other: "Dataset | Iterable[Atom]") -> "Dataset":
        extra = other.atoms if isinstance(other, Dataset) else frozenset(other)
        return Dataset(self.atoms | extra)


def dataset(atoms: Iterable[Atom]) -> Dataset:
    return Dataset(frozenset(atoms))


def domain_of(s: Dataset | Iterable[Atom]) -> frozenset[Term]:
    """Exactly the terms appearing in the atoms of ``s``."""
    if isinstance(s, Dataset):
        return s.domain
    return frozenset(t for a in s for t in a.args)


def close_under_top(s: Dataset) -> Dataset:
    """``s`` plus one ``top`` atom per domain term.  Idempotent."""
    tops = {Atom(TOP, (t,)) for t in s.domain}
    return Dataset(s.atoms | tops)


class _UnionFind:
    """Plain union-find over hashable keys (used for connectivity checks)."""

    def __init__(self) -> None:
        self._parent: dict = {}

    def find(self, x):
        parent = self._parent
        root = parent.setdefault(x, x)
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:  # path compression
            parent[x], x = root, parent[x]
        return root

    def union(self, a, b) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self._parent[ra] = rb

    def same(self, a, b) -> bool:
        return self.find(a) == self.find(b)


def is_connected(s: Dataset | Iterable[Atom]) -> bool:
    """Whether atoms sharing terms form a single connected component.

    Constants count as shared terms, exactly like variables.
    """
    atoms = list(s.atoms) if isinstance(s, Dataset) else list(s)
    if not atoms:
        raise SemanticError("empty structure")
    uf = _UnionFind()
    for a in atoms:
        for t in a.args:
            uf.union(a, t)
    first = atoms[0]
    return all(uf.same(first, a) for a in atoms[1:])


# --------------------------------------------------------------------------
# Homomorphism search
# --------------------------------------------------------------------------
#
# Backtracking over source terms in a fixed order (descending atom-degree,
# ties broken lexicographically by term name), with forward pruning on
# per-predicate candidate sets.  Pruning cascades: whenever a candidate set
# collapses to a single value the assignment is propagated immediately, which
# keeps chain- and cycle-shaped structures linear instead of exponential.
# The search is complete and, given identical inputs, fully deterministic.


class _Frame:
    __slots__ = ("assignment", "domains", "queue")

    def __init__(self, assignment: dict, domains: dict, queue: list):
        self.assignment = assignment
        self.domains = domains
        self.queue = queue


def _occurrences(atoms: Sequence[Atom]) -> dict[Term, list[tuple[int, int]]]:
    occ: dict[Term, list[tuple[int, int]]] = {}
    for ai, a in enumerate(atoms):
        for pos, t in enumerate(a.args):
            occ.setdefault(t, []).append((ai, pos))
    return occ


class _HomSearch:
    def __init__(
        self,
        src: Sequence[Atom],
        dst: Iterable[Atom],
        pins: Pins = None,
        injective: bool = False,
    ):
        self.src = canonical_atoms(src)
        self.dst = frozenset(dst)
        self.injective = injective
        self.occ = _occurrences(self.src)

        pairs = pins.items() if isinstance(pins, abc.Mapping) else (pins or ())
        self.pins: dict[Term, Term] = {}
        for t, image in pairs:
            if self.pins.get(t, image) != image:
                raise SemanticError(f"inconsistent pins: {t!r} has two images")
            self.pins[t] = image

        # Index destination atoms and the terms seen at each (pred, position).
        self.dst_by_pred: dict[tuple[str, int], list[Atom]] = {}
        at_position: dict[tuple[str, int, int], set[Term]] = {}
        for a in sorted(self.dst, key=Atom.sort_key):
            self.dst_by_pred.setdefault((a.pred, len(a.args)), []).append(a)
            for pos, t in enumerate(a.args):
                at_position.setdefault((a.pred, len(a.args), pos), set()).add(t)

        # Static candidate sets from per-predicate position occurrences.
        self.base_domains: dict[Term, tuple[Term, ...]] = {}
        self.feasible = True
        for t, places in self.occ.items():
            cands: Optional[set[Term]] = None
            for ai, pos in places:
                a = self.src[ai]
                here = at_position.get((a.pred, len(a.args), pos), set())
                cands = set(here) if cands is None else cands & here
                if not cands:
                    break
            assert cands is not None
            if t in self.pins:
                cands &= {self.pins[t]}
            if not cands:
                self.feasible = False
                return
            self.base_domains[t] = tuple(sorted(cands, key=Term.sort_key))

        degree = {t: len(places) for t, places in self.occ.items()}
        self.order = sorted(
            self.occ, key=lambda t: (-degree[t], t.sort_key())
        )

    # -- constraint propagation -------------------------------------------

    def _check_and_prune(self, frame: _Frame, just: Term) -> bool:
        """Forward-check every source atom containing ``just``.

        Fully-assigned atoms are verified outright; partially-assigned ones
        narrow their unassigned terms' candidate sets.  Collapsed (singleton)
        sets are queued for unit propagation.
        """
        assignment, domains = frame.assignment, frame.domains
        for ai, _pos in self.occ[just]:
            a = self.src[ai]
            unassigned = [t for t in a.args if t not in assignment]
            if not unassigned:
                image = Atom(a.pred, tuple(assignment[t] for t in a.args))
                if image not in self.dst:
                    return False
                continue
            # Viable values per unassigned term, given the partial image.
            viable: dict[Term, set[Term]] = {t: set() for t in unassigned}
            for cand in self.dst_by_pred.get((a.pred, len(a.args)), ()):
                ok = True
                for pos, t in enumerate(a.args):
                    got = assignment.get(t)
                    if got is not None and got != cand.args[pos]:
                        ok = False
                        break
                    if got is None and cand.args[pos] not in domains[t]:
                        ok = False
                        break
                if not ok:
                    continue
                # One destination atom may support several consistent
                # bindings of a repeated term; require agreement.
                binding: dict[Term, Term] = {}
                consistent = True
                for pos, t in enumerate(a.args):
                    if t in assignment:
                        continue
                    if binding.setdefault(t, cand.args[pos]) != cand.args[pos]:
                        consistent = False
                        break
                if consistent:
                    for t, v in binding.items():
                        viable[t].add(v)
            for t in unassigned:
                narrowed = tuple(v for v in domains[t] if v in viable[t])
                if not narrowed:
                    return False
                if len(narrowed) < len(domains[t]):
                    domains[t] = narrowed
                    if len(narrowed) == 1:
                        frame.queue.append(t)
        return True

    def _assign(self, frame: _Frame, t: Term, v: Term) -> bool:
        if self.injective and v in frame.assignment.values():
            return False
        frame.assignment[t] = v
        if not self._check_and_prune(frame, t):
            return False
        while frame.queue:
            u = frame.queue.pop()
            if u in frame.assignment:
                if frame.assignment[u] != frame.domains[u][0]:
                    return False
                continue
            if not self._assign(frame, u, frame.domains[u][0]):
                return False
        return True

    # -- search -------------------------------------------------------------

    def solutions(self) -> Iterator[dict[Term, Term]]:
        if not self.feasible:
            return
        root = _Frame({}, dict(self.base_domains), [])
        # Pins on terms that do occur in src are folded into base domains;
        # dangling pins (term absent from src) are simply carried through.
        dangling = {t: v for t, v in self.pins.items() if t not in self.occ}
        yield from self._extend(root, 0, dangling)

    def _extend(
        self, frame: _Frame, depth: int, dangling: dict[Term, Term]
    ) -> Iterator[dict[Term, Term]]:
        while depth < len(self.order) and self.order[depth] in frame.assignment:
            depth += 1
        if depth == len(self.order):
            solution = dict(frame.assignment)
            solution.update(dangling)
            if self.injective and len(set(solution.values())) != len(solution):
                return
            yield solution
            return
        t = self.order[depth]
        for v in frame.domains[t]:
            child = _Frame(dict(frame.assignment), dict(frame.domains), [])
            if self._assign(child, t, v):
                yield from self._extend(child, depth + 1, dangling)


def find_homomorphism(
    src: Iterable[Atom],
    dst: Iterable[Atom],
    pins: Pins = None,
) -> Optional[dict[Term, Term]]:
    """First homomorphism from ``src`` into ``dst`` extending ``pins``.

    A homomorphism maps every term of ``src`` so that each atom's image is an
    atom of ``dst``.  Terms listed in ``pins`` must map to the given images —
    pass constant pins to require the constant-fixing flavor.  Returns None
    when no such map exists; the result is deterministic for equal inputs.
    """
    for solution in _HomSearch(list(src), dst, pins).solutions():
        return solution
    return None


def iter_homomorphisms(
    src: Iterable[Atom],
    dst: Iterable[Atom],
    pins: Pins = None,
    injective: bool = False,
) -> Iterator[dict[Term, Term]]:
    """All homomorphisms from ``src`` into ``dst`` extending ``pins``."""
    return _HomSearch(list(src), dst, pins, injective=injective).solutions()


def constant_pins(atoms: Iterable[Atom]) -> dict[Term, Term]:
    """Pins fixing every constant occurring in ``atoms`` to itself."""
    return {t: t for a in atoms for t in a.args if t.is_const}


def is_isomorphic(
    s1: Iterable[Atom],
    s2: Iterable[Atom],
    pins: Pins = None,
) -> bool:
    """Whether a constant-fixing isomorphism maps ``s1`` onto ``s2``.

    The witness must be a bijection between the two domains whose forward and
    inverse maps are both homomorphisms; with equal atom and domain counts an
    injective homomorphism suffices and is what we search for.
    """
    a1, a2 = frozenset(s1), frozenset(s2)
    if len(a1) != len(a2):
        return False
    d1, d2 = domain_of(a1), domain_of(a2)
    if len(d1) != len(d2):
        return False
    all_pins = constant_pins(a1)
    for t, v in (pins or {}).items():
        if all_pins.setdefault(t, v) != v:
            return False
    for h in iter_homomorphisms(a1, a2, all_pins, injective=True):
        image = {Atom(a.pred, tuple(h[t] for t in a.args)) for a in a1}
        if image == a2:
            return True
    return False
