/** Shared test plumbing: the recorded walkthrough and a fake fetch.
 *
 * The fixtures in `fixtures/walkthrough.json` were recorded against the real
 * HTTP service by `record_fixtures.py`; the fake fetch serves them back by
 * matching (method, path, canonicalized body), so a test request that drifts
 * from what was actually sent fails loudly instead of silently passing.
 */

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

export interface RecordedCall {
  method: string;
  path: string;
  status: number;
  request?: unknown;
  response: unknown;
}

export type Walkthrough = Record<string, RecordedCall>;

export function loadWalkthrough(): Walkthrough {
  const here = dirname(fileURLToPath(import.meta.url));
  const raw = readFileSync(join(here, "fixtures", "walkthrough.json"), "utf8");
  return JSON.parse(raw) as Walkthrough;
}

/** JSON text with object keys sorted, so key order never affects matching. */
export function stableStringify(value: unknown): string {
  if (Array.isArray(value)) {
    return `[${value.map(stableStringify).join(",")}]`;
  }
  if (typeof value === "object" && value !== null) {
    const entries = Object.entries(value as Record<string, unknown>)
      .sort(([a], [b]) => (a < b ? -1 : a > b ? 1 : 0))
      .map(([k, v]) => `${JSON.stringify(k)}:${stableStringify(v)}`);
    return `{${entries.join(",")}}`;
  }
  return JSON.stringify(value);
}

export interface FakeFetch {
  /** Raw invocations, before any client-side deduplication. */
  calls: string[];
  restore(): void;
}

/** Replace global fetch with one that serves the recorded calls. */
export function installFakeFetch(entries: readonly RecordedCall[]): FakeFetch {
  const original = globalThis.fetch;
  const calls: string[] = [];
  globalThis.fetch = (async (input: RequestInfo | URL, init?: RequestInit) => {
    const url = new URL(String(input));
    const method = init?.method ?? "GET";
    const body =
      init?.body === undefined || init?.body === null
        ? undefined
        : JSON.parse(String(init.body));
    calls.push(`${method} ${url.pathname}`);
    for (const entry of entries) {
      if (entry.method !== method || entry.path !== url.pathname) continue;
      const wanted =
        entry.request === undefined ? undefined : stableStringify(entry.request);
      const got = body === undefined ? undefined : stableStringify(body);
      if (wanted !== got) continue;
      return new Response(JSON.stringify(entry.response), {
        status: entry.status,
        headers: { "content-type": "application/json" },
      });
    }
    throw new Error(
      `no recorded call matches ${method} ${url.pathname} ${JSON.stringify(body)}`,
    );
  }) as typeof fetch;
  return {
    calls,
    restore() {
      globalThis.fetch = original;
    },
  };
}
