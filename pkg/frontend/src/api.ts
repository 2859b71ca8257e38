/** Typed client for the nexus service.
 *
 * Two behaviors matter beyond plain fetch wrappers:
 *
 * - identical in-flight requests are deduplicated per (method, path, body),
 *   so double-clicks and overlapping renders never stampede the service;
 * - every non-2xx response is raised as an {@link ApiError} carrying the
 *   service's structured error body, which the UI renders verbatim.
 */

import type {
  CompareResponse,
  EntityTuple,
  ErrorBody,
  EssListResponse,
  EssMemberResponse,
  ExplainsResponse,
  FormulaResponse,
  GraphDoc,
  JobR,
  RootResponse,
  SessionResponse,
} from "./types.js";
import { tupleText, unitText } from "./types.js";

export class ApiError extends Error {
  readonly code: string;
  readonly status: number;
  readonly detail: unknown;

  constructor(code: string, message: string, status: number, detail: unknown) {
    super(message);
    this.name = "ApiError";
    this.code = code;
    this.status = status;
    this.detail = detail;
  }
}

function isErrorBody(v: unknown): v is ErrorBody {
  return (
    typeof v === "object" &&
    v !== null &&
    typeof (v as { error?: unknown }).error === "object" &&
    (v as { error: unknown }).error !== null
  );
}

export interface SessionPayload {
  facts: string;
  rules?: string;
  selector?: string;
  summaries?: string;
}

export class NexusClient {
  readonly base: string;
  private readonly inflight = new Map<string, Promise<unknown>>();

  constructor(base = "http://127.0.0.1:7878") {
    this.base = base.replace(/\/$/, "");
  }

  /** Number of requests currently on the wire (after deduplication). */
  get pending(): number {
    return this.inflight.size;
  }

  private request<T>(method: string, path: string, payload?: unknown): Promise<T> {
    const body = payload === undefined ? undefined : JSON.stringify(payload);
    const key = `${method} ${path} ${body ?? ""}`;
    const hit = this.inflight.get(key);
    if (hit !== undefined) {
      return hit as Promise<T>;
    }
    const work = this.send<T>(method, path, body).finally(() => {
      this.inflight.delete(key);
    });
    this.inflight.set(key, work);
    return work;
  }

  private async send<T>(method: string, path: string, body?: string): Promise<T> {
    let resp: Response;
    try {
      resp = await fetch(this.base + path, {
        method,
        headers: body === undefined ? {} : { "content-type": "application/json" },
        body,
      });
    } catch (err) {
      throw new ApiError(
        "network",
        `cannot reach the service at ${this.base}: ${String(err)}`,
        0,
        null,
      );
    }
    let parsed: unknown = null;
    const text = await resp.text();
    if (text !== "") {
      try {
        parsed = JSON.parse(text);
      } catch {
        throw new ApiError("malformed", "service returned non-JSON", resp.status, text);
      }
    }
    if (!resp.ok) {
      if (isErrorBody(parsed)) {
        const e = parsed.error;
        throw new ApiError(e.code, e.message, resp.status, e.detail);
      }
      throw new ApiError("http-error", `HTTP ${resp.status}`, resp.status, parsed);
    }
    return parsed as T;
  }

  root(): Promise<RootResponse> {
    return this.request("GET", "/");
  }

  createSession(payload: SessionPayload): Promise<SessionResponse> {
    return this.request("POST", "/sessions", payload);
  }

  getSession(id: string): Promise<SessionResponse> {
    return this.request("GET", `/sessions/${id}`);
  }

  core(id: string, unit: readonly EntityTuple[]): Promise<FormulaResponse> {
    return this.request("POST", `/sessions/${id}/core`, { unit: unitText(unit) });
  }

  can(id: string, unit: readonly EntityTuple[]): Promise<FormulaResponse> {
    return this.request("POST", `/sessions/${id}/can`, { unit: unitText(unit) });
  }

  ess(id: string, unit: readonly EntityTuple[]): Promise<EssListResponse> {
    return this.request("POST", `/sessions/${id}/ess`, { unit: unitText(unit) });
  }

  essMember(
    id: string,
    unit: readonly EntityTuple[],
    tau: EntityTuple,
  ): Promise<EssMemberResponse> {
    return this.request("POST", `/sessions/${id}/ess`, {
      unit: unitText(unit),
      tuple: tupleText(tau),
    });
  }

  explains(
    id: string,
    unit: readonly EntityTuple[],
    formula: string,
  ): Promise<ExplainsResponse> {
    return this.request("POST", `/sessions/${id}/explains`, {
      unit: unitText(unit),
      formula,
    });
  }

  compare(
    id: string,
    unit: readonly EntityTuple[],
    tau: EntityTuple,
    tauPrime: EntityTuple,
  ): Promise<CompareResponse> {
    return this.request("POST", `/sessions/${id}/compare`, {
      unit: unitText(unit),
      tau: tupleText(tau),
      tau_prime: tupleText(tauPrime),
    });
  }

  graph(
    id: string,
    unit: readonly EntityTuple[],
    opts: { tupleCap?: number; partial?: boolean } = {},
  ): Promise<GraphDoc> {
    const payload: Record<string, unknown> = { unit: unitText(unit) };
    if (opts.tupleCap !== undefined) payload["tuple_cap"] = opts.tupleCap;
    if (opts.partial !== undefined) payload["partial"] = opts.partial;
    return this.request("POST", `/sessions/${id}/graph`, payload);
  }

  startGraphJob(
    id: string,
    unit: readonly EntityTuple[],
    opts: { tupleCap?: number; partial?: boolean } = {},
  ): Promise<JobR> {
    const payload: Record<string, unknown> = { unit: unitText(unit), mode: "async" };
    if (opts.tupleCap !== undefined) payload["tuple_cap"] = opts.tupleCap;
    if (opts.partial !== undefined) payload["partial"] = opts.partial;
    return this.request("POST", `/sessions/${id}/graph`, payload);
  }

  pollJob(id: string, jobId: string): Promise<JobR> {
    return this.request("GET", `/sessions/${id}/jobs/${jobId}`);
  }
}
