/** The exploration state machine.
 *
 * All transitions are pure: they take a state plus service-response data and
 * return a new state, throwing {@link StateInvariantError} when a transition
 * would break the exploration contract.  Nothing here computes a formula,
 * a membership or an order — those values arrive as service responses and
 * are only arranged.  The two structural rules enforced locally are set
 * arithmetic on the user's own selections, not reasoning:
 *
 * - breadcrumb units strictly grow (each step's unit is a proper superset
 *   of its predecessor's);
 * - once the expansion graph is loaded, each step's node must be reachable
 *   from its predecessor's node along the graph's specific-to-general arcs.
 */

import type {
  CompareResponse,
  EntityTuple,
  GraphDoc,
  GraphNode,
  Relation,
  SessionStats,
} from "./types.js";
import { sameTuple, tupleIn, unitText } from "./types.js";

export class StateInvariantError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "StateInvariantError";
  }
}

export interface ExplorationStep {
  /** The unit at this step, in the order tuples were added. */
  unit: EntityTuple[];
  /** The service-rendered core formula for this unit. */
  formula: string;
  /** The tuple whose addition created this step; null for the first step. */
  added: EntityTuple | null;
  /** Home node in the expansion graph, when the graph has been fetched. */
  nodeId: string | null;
}

export interface CandidateEntry {
  tau: EntityTuple;
  relativeTo: EntityTuple;
  relation: Relation;
  witness: CompareResponse["witness"];
}

export interface ExplorationState {
  sessionId: string;
  stats: SessionStats;
  breadcrumb: ExplorationStep[];
  candidates: CandidateEntry[];
  /** Essential-expansion members of the current unit, per the service. */
  essMembers: string[][] | null;
  graph: GraphDoc | null;
}

/** A fresh exploration: new session, previous breadcrumb discarded. */
export function startExploration(
  sessionId: string,
  stats: SessionStats,
): ExplorationState {
  return {
    sessionId,
    stats,
    breadcrumb: [],
    candidates: [],
    essMembers: null,
    graph: null,
  };
}

export function currentStep(state: ExplorationState): ExplorationStep | null {
  if (state.breadcrumb.length === 0) return null;
  return state.breadcrumb[state.breadcrumb.length - 1]!;
}

function dedupe(unit: readonly EntityTuple[]): EntityTuple[] {
  const seen: EntityTuple[] = [];
  for (const tau of unit) {
    if (!tupleIn(seen, tau)) seen.push(tau);
  }
  return seen;
}

/** Proper-superset test on units viewed as sets of tuples. */
export function strictlyIncludes(
  next: readonly EntityTuple[],
  prev: readonly EntityTuple[],
): boolean {
  const a = dedupe(next);
  const b = dedupe(prev);
  return b.every((t) => tupleIn(a, t)) && a.length > b.length;
}

/** Start the breadcrumb at its first unit.  Replaces any prior path. */
export function pickUnit(
  state: ExplorationState,
  unit: readonly EntityTuple[],
  formula: string,
): ExplorationState {
  const clean = dedupe(unit);
  if (clean.length === 0) {
    throw new StateInvariantError("a unit needs at least one tuple");
  }
  const nodeId = state.graph === null ? null : sourceNode(state.graph).id;
  return {
    ...state,
    breadcrumb: [{ unit: clean, formula, added: null, nodeId }],
    candidates: [],
    essMembers: null,
  };
}

/** Append one expansion step: the unit grows by exactly `tau`. */
export function expandWith(
  state: ExplorationState,
  tau: EntityTuple,
  formula: string,
): ExplorationState {
  const step = currentStep(state);
  if (step === null) {
    throw new StateInvariantError("pick a unit before expanding");
  }
  if (tupleIn(step.unit, tau)) {
    throw new StateInvariantError(
      `"${tau.join(",")}" is already in the unit — breadcrumb units must strictly grow`,
    );
  }
  const unit = [...step.unit, tau];
  if (!strictlyIncludes(unit, step.unit)) {
    throw new StateInvariantError("expansion must strictly grow the unit");
  }
  let nodeId: string | null = null;
  if (state.graph !== null) {
    nodeId = homeNode(state.graph, tau)?.id ?? null;
    if (nodeId !== null && step.nodeId !== null) {
      assertReachable(state.graph, step.nodeId, nodeId);
    }
  }
  return {
    ...state,
    breadcrumb: [...state.breadcrumb, { unit, formula, added: tau, nodeId }],
    essMembers: null,
  };
}

/** Drop the last expansion step, returning to the prior breadcrumb unit. */
export function undo(state: ExplorationState): ExplorationState {
  if (state.breadcrumb.length <= 1) {
    throw new StateInvariantError("nothing to undo");
  }
  return {
    ...state,
    breadcrumb: state.breadcrumb.slice(0, -1),
    essMembers: null,
  };
}

/** Record one service comparison in the candidate panel. */
export function recordComparison(
  state: ExplorationState,
  tau: EntityTuple,
  relativeTo: EntityTuple,
  response: CompareResponse,
): ExplorationState {
  const entry: CandidateEntry = {
    tau,
    relativeTo,
    relation: response.relation,
    witness: response.witness,
  };
  const kept = state.candidates.filter(
    (e) => !(sameTuple(e.tau, tau) && sameTuple(e.relativeTo, relativeTo)),
  );
  return { ...state, candidates: [...kept, entry] };
}

export function setEssMembers(
  state: ExplorationState,
  tuples: string[][],
): ExplorationState {
  return { ...state, essMembers: tuples };
}

/** Attach a fetched expansion graph and locate every breadcrumb step in it. */
export function attachGraph(
  state: ExplorationState,
  doc: GraphDoc,
): ExplorationState {
  const breadcrumb = state.breadcrumb.map((step) => {
    const nodeId =
      step.added === null
        ? sourceNode(doc).id
        : homeNode(doc, step.added)?.id ?? null;
    return { ...step, nodeId };
  });
  for (let i = 1; i < breadcrumb.length; i += 1) {
    const prev = breadcrumb[i - 1]!;
    const here = breadcrumb[i]!;
    if (prev.nodeId !== null && here.nodeId !== null) {
      assertReachable(doc, prev.nodeId, here.nodeId);
    }
  }
  return { ...state, graph: doc, breadcrumb };
}

export function sourceNode(doc: GraphDoc): GraphNode {
  const found = doc.nodes.filter((n) => n.is_source);
  if (found.length !== 1) {
    throw new StateInvariantError(
      `graph document has ${found.length} source nodes`,
    );
  }
  return found[0]!;
}

/** The node whose direct instances contain `tau` — pure data lookup. */
export function homeNode(doc: GraphDoc, tau: EntityTuple): GraphNode | null {
  for (const node of doc.nodes) {
    if (node.direct_instances.some((t) => sameTuple(t, tau))) {
      return node;
    }
  }
  return null;
}

export function nodeById(doc: GraphDoc, id: string): GraphNode {
  const node = doc.nodes.find((n) => n.id === id);
  if (node === undefined) {
    throw new StateInvariantError(`no node "${id}" in the graph document`);
  }
  return node;
}

/** Reachability along zero or more specific-to-general arcs. */
export function reachable(doc: GraphDoc, from: string, to: string): boolean {
  if (from === to) return true;
  const out = new Map<string, string[]>();
  for (const [a, b] of doc.arcs) {
    const row = out.get(a);
    if (row === undefined) out.set(a, [b]);
    else row.push(b);
  }
  const queue = [from];
  const seen = new Set(queue);
  while (queue.length > 0) {
    const here = queue.shift()!;
    for (const next of out.get(here) ?? []) {
      if (next === to) return true;
      if (!seen.has(next)) {
        seen.add(next);
        queue.push(next);
      }
    }
  }
  return false;
}

function assertReachable(doc: GraphDoc, from: string, to: string): void {
  if (!reachable(doc, from, to)) {
    throw new StateInvariantError(
      `step node "${to}" is not a generalization target of "${from}" in the graph`,
    );
  }
}

export interface Subgraph {
  /** Nodes to draw: every visited node plus its one-hop neighbors. */
  nodes: GraphNode[];
  /** Arcs with both endpoints drawn. */
  arcs: GraphDoc["arcs"];
  /** Ids of the non-visited neighbors, for dimmed rendering. */
  preview: Set<string>;
}

/** The lazily explored portion: visited nodes plus one-hop neighbors. */
export function subgraphFor(
  doc: GraphDoc,
  visited: ReadonlySet<string>,
): Subgraph {
  const keep = new Set<string>();
  for (const id of visited) keep.add(id);
  for (const [a, b] of doc.arcs) {
    if (visited.has(a)) keep.add(b);
    if (visited.has(b)) keep.add(a);
  }
  const nodes = doc.nodes.filter((n) => keep.has(n.id));
  const arcs = doc.arcs.filter(([a, b]) => keep.has(a) && keep.has(b));
  const preview = new Set([...keep].filter((id) => !visited.has(id)));
  return { nodes, arcs, preview };
}

/** Breadcrumb node ids that are known, oldest first. */
export function visitedNodeIds(state: ExplorationState): Set<string> {
  const ids = new Set<string>();
  for (const step of state.breadcrumb) {
    if (step.nodeId !== null) ids.add(step.nodeId);
  }
  return ids;
}

/** Human-readable strict-inclusion chain, for display alongside the path. */
export function breadcrumbText(state: ExplorationState): string {
  return state.breadcrumb
    .map((step) => `{${unitText(step.unit)}}`)
    .join(" ⊂ ");
}
