"""Characterize what a set of entity tuples has in common, and explore how
that characterization loosens as the set grows.

The package is layered bottom-up:

* :mod:`nexus.relcore` — terms, atoms, ground datasets, homomorphisms.
* :mod:`nexus.formula` — conjunctive formulas: parsing, rendering,
  evaluation, comparison, cores.
* :mod:`nexus.kb` — Datalog knowledge bases, entailment, and per-tuple
  summary selectors.
* :mod:`nexus.charact` — the canonical characterization of a tuple set and
  its core.
* :mod:`nexus.expansion` — essential expansions, tuple comparison, and the
  expansion graph.
* :mod:`nexus.fixtures` — generated example knowledge bases.
* :mod:`nexus.service` / :mod:`nexus.cli` — the HTTP and command-line
  frontends.
"""

__version__ = "0.1.0"
