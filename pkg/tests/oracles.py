"""Independent brute-force oracles used to validate the search routines.

Everything in here trades speed for obviousness: mappings are enumerated
outright with itertools, entailment is a naive fixpoint, cores come from
exhaustive sub-body search.  None of it shares code with the package's own
algorithms, which is the whole point — agreement between the two is the
evidence.  Keep inputs tiny (~8 terms / ~12 atoms) or these will never finish.
"""

from __future__ import annotations

import itertools
import random
from typing import Iterable, Mapping, Optional

from nexus.relcore import Atom, Term, atom, const, domain_of, var


def apply_mapping(atoms: Iterable[Atom], h: Mapping[Term, Term]) -> set[Atom]:
    return {Atom(a.pred, tuple(h.get(t, t) for t in a.args)) for a in atoms}


def brute_homomorphisms(
    src: Iterable[Atom],
    dst: Iterable[Atom],
    pins: Optional[Mapping[Term, Term]] = None,
) -> list[dict[Term, Term]]:
    """Every homomorphism src -> dst extending pins, by total enumeration."""
    src = list(src)
    dst_set = frozenset(dst)
    pins = dict(pins or {})
    src_terms = sorted(domain_of(src), key=Term.sort_key)
    dst_terms = sorted(domain_of(dst_set), key=Term.sort_key)
    found = []
    for images in itertools.product(dst_terms, repeat=len(src_terms)):
        h = dict(zip(src_terms, images))
        if any(h.get(t, v) != v for t, v in pins.items()):
            continue
        h.update(pins)
        if apply_mapping(src, h) <= dst_set:
            found.append(h)
    return found


def brute_has_homomorphism(src, dst, pins=None) -> bool:
    return bool(brute_homomorphisms(src, dst, pins))


def brute_is_isomorphic(s1: Iterable[Atom], s2: Iterable[Atom]) -> bool:
    """Constant-fixing isomorphism test by checking every bijection."""
    a1, a2 = frozenset(s1), frozenset(s2)
    d1 = sorted(domain_of(a1), key=Term.sort_key)
    d2 = sorted(domain_of(a2), key=Term.sort_key)
    if len(a1) != len(a2) or len(d1) != len(d2):
        return False
    for images in itertools.permutations(d2):
        h = dict(zip(d1, images))
        if any(t.is_const and h[t] != t for t in d1):
            continue
        if apply_mapping(a1, h) == a2:
            return True
    return False


# ---------------------------------------------------------------------------
# Random instance generators shared by the oracle suites
# ---------------------------------------------------------------------------

PREDS = [("p", 2), ("q", 2), ("r", 1), ("s", 3)]


def random_structure(
    rng: random.Random,
    max_terms: int = 8,
    max_atoms: int = 12,
    allow_consts: bool = True,
) -> list[Atom]:
    n_terms = rng.randint(1, max_terms)
    pool = []
    for i in range(n_terms):
        if allow_consts and rng.random() < 0.4:
            pool.append(const(f"c{i}"))
        else:
            pool.append(var(f"v{i}"))
    n_atoms = rng.randint(1, max_atoms)
    atoms = set()
    for _ in range(n_atoms):
        pred, arity = rng.choice(PREDS)
        atoms.add(atom(pred, *(rng.choice(pool) for _ in range(arity))))
    return sorted(atoms, key=Atom.sort_key)


def random_ground_structure(rng: random.Random, max_terms=8, max_atoms=12) -> list[Atom]:
    n_terms = rng.randint(1, max_terms)
    pool = [const(f"c{i}") for i in range(n_terms)]
    atoms = set()
    for _ in range(rng.randint(1, max_atoms)):
        pred, arity = rng.choice(PREDS)
        atoms.add(atom(pred, *(rng.choice(pool) for _ in range(arity))))
    return sorted(atoms, key=Atom.sort_key)


# ---------------------------------------------------------------------------
# Entailment oracle: naive fixpoint over brute-force rule matching
# ---------------------------------------------------------------------------


def naive_entailment(kb) -> frozenset[Atom]:
    """Least fixpoint by re-deriving everything from scratch each round."""
    facts = set(kb.dataset.atoms)
    while True:
        new = set()
        for rule in kb.rules:
            pins = {t: t for a in rule.body for t in a.args if t.is_const}
            for h in brute_homomorphisms(rule.body, facts, pins):
                new.add(Atom(rule.head.pred, tuple(h.get(t, t) for t in rule.head.args)))
        if new <= facts:
            return frozenset(facts)
        facts |= new


# ---------------------------------------------------------------------------
# Formula-level oracles
# ---------------------------------------------------------------------------


def brute_evaluate(f, data) -> set[tuple[Term, ...]]:
    """Answers of a conjunctive formula by trying every tuple outright."""
    atoms = frozenset(data)
    dom = sorted(domain_of(atoms), key=Term.sort_key)
    base = {t: t for a in f.body for t in a.args if t.is_const}
    out = set()
    for tup in itertools.product(dom, repeat=f.arity):
        pins = dict(base)
        ok = True
        for v, image in zip(f.free_vars, tup):
            if pins.setdefault(v, image) != image:
                ok = False
                break
        if ok and brute_has_homomorphism(f.body, atoms, pins):
            out.add(tup)
    return out


def brute_min_equivalent_size(f) -> int:
    """Size of the smallest sub-body equivalent to the formula.

    A sub-body S is equivalent iff the full body maps into S fixing free
    variables and constants (the other direction is set inclusion).
    """
    pins = {v: v for v in f.free_vars}
    pins.update({t: t for a in f.body for t in a.args if t.is_const})
    body = list(f.body)
    for size in range(1, len(body) + 1):
        for sub in itertools.combinations(body, size):
            if brute_has_homomorphism(body, frozenset(sub), pins):
                return size
    return len(body)


def random_formula(rng: random.Random, max_terms: int = 5, max_atoms: int = 6):
    from nexus.formula import ConjunctiveFormula

    body = random_structure(rng, max_terms, max_atoms)
    vars_present = sorted(
        {t for a in body for t in a.args if t.is_var}, key=Term.sort_key
    )
    if vars_present and rng.random() < 0.9:
        k = rng.randint(1, min(2, len(vars_present)))
        free = tuple(rng.choice(vars_present) for _ in range(k))
    else:
        free = ()
    return ConjunctiveFormula(free, tuple(body))


def random_pins(
    rng: random.Random, src: list[Atom], dst: list[Atom]
) -> dict[Term, Term]:
    src_terms = sorted(domain_of(src), key=Term.sort_key)
    dst_terms = sorted(domain_of(dst), key=Term.sort_key)
    if not src_terms or not dst_terms or rng.random() < 0.5:
        return {}
    k = rng.randint(1, min(2, len(src_terms)))
    return {t: rng.choice(dst_terms) for t in rng.sample(src_terms, k)}
