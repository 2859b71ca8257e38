/** Wire types for the nexus service JSON API, plus shared UI aliases.
 *
 * Everything the explorer displays comes from these payloads; the UI holds
 * no reasoning logic of its own, so these shapes are the whole contract.
 */

/** A tuple of entity constants, e.g. ["epcot"] or ["a", "b"]. */
export type EntityTuple = readonly string[];

export interface SessionStats {
  facts: number;
  entailed: number;
  entities: number;
  max_arity: number;
}

export interface SessionResponse {
  session_id: string;
  stats: SessionStats;
}

export interface RootResponse {
  name: string;
  version: string;
}

export interface FormulaResponse {
  formula: string;
  atom_count: number;
}

export interface EssListResponse {
  tuples: string[][];
}

export interface EssMemberResponse {
  member: boolean;
}

export type Relation =
  | "precedes"
  | "preceded_by"
  | "similar"
  | "incomparable";

export interface CompareWitness {
  tau_in_ess_prime: boolean;
  tau_prime_in_ess: boolean;
}

export interface CompareResponse {
  relation: Relation;
  witness: CompareWitness;
}

export interface ExplainsResponse {
  explains: boolean;
  characterizes: boolean | null;
}

export interface GraphNode {
  id: string;
  formula: string;
  direct_instances: string[][];
  is_source: boolean;
}

/** Arcs point from the more specific node to the more general one. */
export type GraphArc = [string, string];

export interface GraphDoc {
  arity: number;
  nodes: GraphNode[];
  arcs: GraphArc[];
}

export interface JobR {
  job_id: string;
  status: "pending" | "running" | "done" | "failed";
  result?: GraphDoc;
  error?: ErrorInfo;
}

export interface ErrorInfo {
  code: string;
  message: string;
  detail: unknown;
}

export interface ErrorBody {
  error: ErrorInfo;
}

/** Render a tuple the way the service accepts it: comma-joined constants. */
export function tupleText(tau: EntityTuple): string {
  return tau.join(",");
}

/** Render a unit the way the service accepts it: ';'-separated tuples. */
export function unitText(unit: readonly EntityTuple[]): string {
  return unit.map(tupleText).join(";");
}

export function sameTuple(a: EntityTuple, b: EntityTuple): boolean {
  return a.length === b.length && a.every((x, i) => x === b[i]);
}

export function tupleIn(unit: readonly EntityTuple[], tau: EntityTuple): boolean {
  return unit.some((t) => sameTuple(t, tau));
}
