"""Navigating a unit's expansions.

Everything here asks one underlying question — "which tuples could join the
unit without loosening what it has in common?" — and packages the answers:

* :func:`inst` — the tuples answering a formula within their own summaries;
* :func:`ess` — the essential expansion of a unit: instances of its core;
* :func:`in_ess` — membership of one tuple in a unit's essential expansion;
* :func:`compare` — how two candidate tuples relate relative to a unit
  (one precedes the other, they are similar, or incomparable);
* :func:`build_expansion_graph` — the whole landscape at once: every
  one-tuple expansion of the unit, merged up to equivalence, ordered from
  specific to general, with each node owning the tuples it directly
  explains.

The graph is a DAG whose unique source is the unit's own core; arcs point
from more specific formulas to strictly more general ones, with transitive
shortcuts removed.  These structural facts are asserted at construction and
raise :class:`~nexus.errors.InvariantError` when violated rather than
returning a malformed graph.
"""

from __future__ import annotations

import enum
import itertools
import json
from dataclasses import dataclass
from typing import Iterable, Optional

from .charact import build_can, build_core
from .errors import CapacityError, InvariantError, SemanticError
from .formula import (
    ConjunctiveFormula,
    EntityTuple,
    equivalent,
    evaluate,
    maps_to,
    parse_formula,
    render_formula,
    satisfies,
)
from .kb import SelectiveKB, Unit, render_tuple, tuple_sort_key
from .relcore import Term, const

DEFAULT_TUPLE_CAP = 50_000


def inst(
    f: ConjunctiveFormula,
    skb: SelectiveKB,
    candidates: Optional[Iterable[EntityTuple]] = None,
) -> frozenset[EntityTuple]:
    """Tuples that answer ``f`` within their own summaries.

    Candidates default to the answers of ``f`` over the whole top-closed
    entailment; each is then re-checked against its own summary, which can
    only shrink the set.
    """
    if candidates is None:
        candidates = evaluate(f, skb.kb.entailed_top)
    return frozenset(
        tup for tup in candidates if satisfies(f, skb.summary(tup), tup)
    )


def ess(unit: Unit, skb: SelectiveKB) -> frozenset[EntityTuple]:
    """The essential expansion: instances of the unit's core."""
    return inst(build_core(unit, skb), skb)


def in_ess(tup: EntityTuple, unit: Unit, skb: SelectiveKB) -> bool:
    """Whether ``tup`` belongs to the unit's essential expansion.

    Decided by one pinned homomorphism search of the unit's canonical
    characterization into the tuple's own summary — no enumeration.
    """
    tup = tuple(tup)
    if tup in unit:
        raise SemanticError(f"tuple {render_tuple(tup)} is already in the unit")
    if len(tup) != unit.arity:
        raise SemanticError(
            f"tuple {render_tuple(tup)} has length {len(tup)}, unit arity is {unit.arity}"
        )
    return satisfies(build_can(unit, skb), skb.summary(tup), tup)


class NavRelation(enum.Enum):
    PRECEDES = "precedes"
    PRECEDED_BY = "preceded_by"
    SIMILAR = "similar"
    INCOMPARABLE = "incomparable"


@dataclass(frozen=True)
class ComparisonResult:
    relation: NavRelation
    tau_in_ess_prime: bool  # tau joins once tau' is in the unit
    tau_prime_in_ess: bool  # tau' joins once tau is in the unit


def compare(
    tau: EntityTuple, tau_prime: EntityTuple, unit: Unit, skb: SelectiveKB
) -> ComparisonResult:
    """Order two candidate tuples relative to a unit.

    ``tau`` precedes ``tau_prime`` when adding ``tau_prime`` keeps ``tau``
    essential but not the other way around; both directions mean the two are
    similar, neither means incomparable.  Exactly two membership checks run.
    """
    tau, tau_prime = tuple(tau), tuple(tau_prime)
    if tau == tau_prime:
        raise SemanticError("cannot compare a tuple with itself")
    if tau in unit or tau_prime in unit:
        raise SemanticError("cannot compare tuples already in the unit")
    a = in_ess(tau, unit.with_tuple(tau_prime), skb)
    b = in_ess(tau_prime, unit.with_tuple(tau), skb)
    if a and b:
        relation = NavRelation.SIMILAR
    elif a:
        relation = NavRelation.PRECEDES
    elif b:
        relation = NavRelation.PRECEDED_BY
    else:
        relation = NavRelation.INCOMPARABLE
    return ComparisonResult(relation, a, b)


# ---------------------------------------------------------------------------
# The expansion graph
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExpansionNode:
    node_id: str
    formula: ConjunctiveFormula
    direct_instances: tuple[EntityTuple, ...]
    is_source: bool


@dataclass(frozen=True)
class ExpansionGraph:
    arity: int
    nodes: tuple[ExpansionNode, ...]
    arcs: tuple[tuple[str, str], ...]  # (specific, general)

    def node(self, node_id: str) -> ExpansionNode:
        for n in self.nodes:
            if n.node_id == node_id:
                return n
        raise SemanticError(f"no node {node_id!r} in the graph")

    @property
    def source(self) -> ExpansionNode:
        for n in self.nodes:
            if n.is_source:
                return n
        raise InvariantError("expansion graph lost its source node")

    def generalizations(self, node_id: str) -> tuple[str, ...]:
        self.node(node_id)
        return tuple(b for a, b in self.arcs if a == node_id)

    def specializations(self, node_id: str) -> tuple[str, ...]:
        self.node(node_id)
        return tuple(a for a, b in self.arcs if b == node_id)


def build_expansion_graph(
    unit: Unit,
    skb: SelectiveKB,
    tuple_cap: Optional[int] = None,
    partial: bool = False,
) -> ExpansionGraph:
    """Every one-tuple expansion of the unit, up to equivalence.

    Candidate tuples are all ``arity``-length combinations of the base's
    entities.  When there are more than ``tuple_cap`` (default 50,000), a
    :class:`CapacityError` is raised unless ``partial=True``, which instead
    builds the graph over the first ``tuple_cap`` candidates in canonical
    order (the result is then a faithful graph of a truncated landscape).
    """
    cap = DEFAULT_TUPLE_CAP if tuple_cap is None else tuple_cap
    entities = sorted(skb.kb.domain, key=Term.sort_key)
    total = len(entities) ** unit.arity
    if total > cap and not partial:
        raise CapacityError(
            f"{total} candidate tuples exceed the cap of {cap}; "
            f"pass partial=True for a truncated graph"
        )
    all_tuples = list(
        itertools.islice(itertools.product(entities, repeat=unit.arity), cap)
    )
    truncated = total > cap

    source_core = build_core(unit, skb)
    classes: list[dict] = []  # {"formula", "taus": set}

    def class_of(f: ConjunctiveFormula) -> Optional[dict]:
        for cls in classes:
            if equivalent(cls["formula"], f):
                return cls
        return None

    for tau in all_tuples:
        f = build_core(unit.with_tuple(tau), skb)
        cls = class_of(f)
        if cls is None:
            classes.append({"formula": f, "taus": {tau}})
        else:
            cls["taus"].add(tau)

    source_cls = class_of(source_core)
    if source_cls is None:  # unit tuples always produce it, but be explicit
        source_cls = {"formula": source_core, "taus": set()}
        classes.append(source_cls)

    # Strict specific-to-general order between representatives.
    n = len(classes)
    stricter = [[False] * n for _ in range(n)]  # stricter[i][j]: i strictly more specific
    for i, j in itertools.permutations(range(n), 2):
        f_i, f_j = classes[i]["formula"], classes[j]["formula"]
        stricter[i][j] = maps_to(f_j, f_i) and not maps_to(f_i, f_j)

    # Deterministic ids: topological layers from the source, rendered text
    # breaking ties inside a layer.
    order = _topological_order(classes, stricter)
    ids = {idx: f"n{k}" for k, idx in enumerate(order)}

    # Direct instances: a node keeps the instances none of its strict
    # specializations already explain.
    insts = [inst(cls["formula"], skb) for cls in classes]
    direct: list[frozenset[EntityTuple]] = []
    for j in range(n):
        shadow: set[EntityTuple] = set()
        for i in range(n):
            if stricter[i][j]:
                shadow |= insts[i]
        direct.append(insts[j] - shadow)

    # Arcs: transitive reduction of the strict order.
    arcs = []
    for i, j in itertools.permutations(range(n), 2):
        if not stricter[i][j]:
            continue
        if any(stricter[i][k] and stricter[k][j] for k in range(n)):
            continue
        arcs.append((ids[i], ids[j]))
    arcs.sort(key=lambda ab: (int(ab[0][1:]), int(ab[1][1:])))

    nodes = tuple(
        ExpansionNode(
            node_id=ids[idx],
            formula=parse_formula(render_formula(classes[idx]["formula"])),
            direct_instances=tuple(sorted(direct[idx], key=tuple_sort_key)),
            is_source=classes[idx] is source_cls,
        )
        for idx in order
    )
    graph = ExpansionGraph(unit.arity, nodes, tuple(arcs))
    _assert_invariants(graph, unit, skb, all_tuples if not truncated else None)
    return graph


def _topological_order(classes: list[dict], stricter: list[list[bool]]) -> list[int]:
    n = len(classes)
    remaining = set(range(n))
    order: list[int] = []
    while remaining:
        ready = [
            i
            for i in remaining
            if not any(stricter[j][i] for j in remaining if j != i)
        ]
        if not ready:
            raise InvariantError("expansion order contains a cycle")
        ready.sort(key=lambda i: render_formula(classes[i]["formula"]))
        head = ready[0]
        order.append(head)
        remaining.remove(head)
    return order


def _assert_invariants(
    graph: ExpansionGraph,
    unit: Unit,
    skb: SelectiveKB,
    all_tuples: Optional[list[EntityTuple]],
) -> None:
    sources = [node for node in graph.nodes if not graph.specializations(node.node_id)]
    if len(sources) != 1 or not sources[0].is_source:
        raise InvariantError(
            f"expansion graph of {unit!r} must have exactly one arc-free node "
            f"and it must be the unit's own core; found {[s.node_id for s in sources]}"
        )
    flagged = [node for node in graph.nodes if node.is_source]
    if len(flagged) != 1:
        raise InvariantError("expansion graph must flag exactly one source node")
    if set(flagged[0].direct_instances) != set(ess(unit, skb)):
        raise InvariantError(
            "the source node's direct instances must be the unit's essential expansion"
        )
    reached = {flagged[0].node_id}
    frontier = [flagged[0].node_id]
    while frontier:
        here = frontier.pop()
        for nxt in graph.generalizations(here):
            if nxt not in reached:
                reached.add(nxt)
                frontier.append(nxt)
    if reached != {node.node_id for node in graph.nodes}:
        raise InvariantError("every node must be reachable from the source")
    if all_tuples is not None:
        # On a full build the direct-instance sets partition the whole
        # candidate space: each tuple lands exactly at the node its own
        # expansion core produces.  A truncated build skips this check.
        seen: dict[EntityTuple, str] = {}
        for node in graph.nodes:
            for tup in node.direct_instances:
                if tup in seen:
                    raise InvariantError(
                        f"tuple {render_tuple(tup)} is a direct instance of both "
                        f"{seen[tup]} and {node.node_id}"
                    )
                seen[tup] = node.node_id
        if set(seen) != set(all_tuples):
            raise InvariantError(
                "direct instances must jointly cover every candidate tuple"
            )


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def export_graph(graph: ExpansionGraph) -> dict:
    """Plain-JSON form of the graph (stable key order, sorted content)."""
    return {
        "arity": graph.arity,
        "nodes": [
            {
                "id": node.node_id,
                "formula": render_formula(node.formula),
                "direct_instances": [
                    [t.name for t in tup] for tup in node.direct_instances
                ],
                "is_source": node.is_source,
            }
            for node in graph.nodes
        ],
        "arcs": [[a, b] for a, b in graph.arcs],
    }


def parse_graph(data: dict) -> ExpansionGraph:
    """Inverse of :func:`export_graph`: ``parse_graph(export_graph(g)) == g``."""
    try:
        nodes = tuple(
            ExpansionNode(
                node_id=entry["id"],
                formula=parse_formula(entry["formula"]),
                direct_instances=tuple(
                    tuple(const(name) for name in tup)
                    for tup in entry["direct_instances"]
                ),
                is_source=bool(entry["is_source"]),
            )
            for entry in data["nodes"]
        )
        arcs = tuple((a, b) for a, b in data["arcs"])
        return ExpansionGraph(int(data["arity"]), nodes, arcs)
    except (KeyError, TypeError) as err:
        raise SemanticError(f"malformed graph document: {err}") from err


def export_dot(graph: ExpansionGraph) -> str:
    """Graphviz text; arrows run from specializations to generalizations."""
    lines = ["digraph expansion {", "  rankdir=BT;"]
    for node in graph.nodes:
        label = render_formula(node.formula).replace('"', '\\"')
        shape = "doubleoctagon" if node.is_source else "box"
        inst_text = " | ".join(
            ",".join(t.name for t in tup) for tup in node.direct_instances
        )
        if inst_text:
            label = f"{label}\\n[{inst_text}]"
        lines.append(f'  {node.node_id} [shape={shape}, label="{label}"];')
    for a, b in graph.arcs:
        lines.append(f"  {a} -> {b};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def graph_to_json(graph: ExpansionGraph) -> str:
    return json.dumps(export_graph(graph), indent=2, sort_keys=False) + "\n"


# ---------------------------------------------------------------------------
# Report rendering (delimited files + a figure)
# ---------------------------------------------------------------------------


def write_report(graph: ExpansionGraph, directory) -> dict:
    """Write nodes.tsv, arcs.tsv, graph.json, graph.dot and graph.png."""
    from pathlib import Path

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    node_rows = ["id\tis_source\tformula\tdirect_instances"]
    for node in graph.nodes:
        tuples = ";".join(
            ",".join(t.name for t in tup) for tup in node.direct_instances
        )
        node_rows.append(
            f"{node.node_id}\t{str(node.is_source).lower()}\t"
            f"{render_formula(node.formula)}\t{tuples}"
        )
    arc_rows = ["from\tto"] + [f"{a}\t{b}" for a, b in graph.arcs]
    paths = {
        "nodes": directory / "nodes.tsv",
        "arcs": directory / "arcs.tsv",
        "json": directory / "graph.json",
        "dot": directory / "graph.dot",
        "figure": directory / "graph.png",
    }
    paths["nodes"].write_text("\n".join(node_rows) + "\n")
    paths["arcs"].write_text("\n".join(arc_rows) + "\n")
    paths["json"].write_text(graph_to_json(graph))
    paths["dot"].write_text(export_dot(graph))
    render_graph_figure(graph, paths["figure"])
    return paths


def render_graph_figure(graph: ExpansionGraph, path) -> None:
    """Layered drawing: the source at the bottom, generality rising upward."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    depth: dict[str, int] = {graph.source.node_id: 0}
    changed = True
    while changed:  # longest-path layering over the DAG
        changed = False
        for a, b in graph.arcs:
            if a in depth and depth.get(b, -1) < depth[a] + 1:
                depth[b] = depth[a] + 1
                changed = True
    layers: dict[int, list[str]] = {}
    for node in graph.nodes:
        layers.setdefault(depth.get(node.node_id, 0), []).append(node.node_id)
    positions: dict[str, tuple[float, float]] = {}
    for level, members in sorted(layers.items()):
        members.sort()
        for k, node_id in enumerate(members):
            positions[node_id] = (k - (len(members) - 1) / 2.0, level)

    fig, ax = plt.subplots(figsize=(max(6, 2.2 * max(len(m) for m in layers.values())),
                                    max(4, 1.6 * (max(layers) + 1))))
    for a, b in graph.arcs:
        (x1, y1), (x2, y2) = positions[a], positions[b]
        ax.annotate(
            "",
            xy=(x2, y2 - 0.12),
            xytext=(x1, y1 + 0.12),
            arrowprops={"arrowstyle": "-|>", "color": "#555555"},
        )
    for node in graph.nodes:
        x, y = positions[node.node_id]
        face = "#ffe9a8" if node.is_source else "#dbe9f6"
        text = node.node_id + "\n" + _wrap(render_formula(node.formula), 38)
        ax.text(
            x,
            y,
            text,
            ha="center",
            va="center",
            fontsize=7,
            bbox={"boxstyle": "round,pad=0.35", "facecolor": face, "edgecolor": "#333333"},
        )
    ax.set_xlim(min(x for x, _ in positions.values()) - 1,
                max(x for x, _ in positions.values()) + 1)
    ax.set_ylim(-0.7, max(layers) + 0.7)
    ax.axis("off")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def _wrap(text: str, width: int) -> str:
    words = text.split(" ")
    lines, line = [], ""
    for w in words:
        if line and len(line) + 1 + len(w) > width:
            lines.append(line)
            line = w
        else:
            line = f"{line} {w}".strip()
    if line:
        lines.append(line)
    return "\n".join(lines)
