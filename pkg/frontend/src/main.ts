/** DOM wiring for the explorer page.
 *
 * This layer only moves data between the page and the tested modules: every
 * displayed value comes from a service response via `api.ts`, arranged by
 * `state.ts` and formatted by `render.ts`.  Each failed action stores its
 * thunk so the inline error's Retry button can re-issue the same request.
 */

import { ApiError, NexusClient } from "./api.js";
import type { EntityTuple, ErrorInfo, GraphNode } from "./types.js";
import {
  attachGraph,
  currentStep,
  expandWith,
  pickUnit,
  recordComparison,
  setEssMembers,
  sourceNode,
  startExploration,
  StateInvariantError,
  subgraphFor,
  undo,
  visitedNodeIds,
  type ExplorationState,
} from "./state.js";
import {
  renderBreadcrumb,
  renderCandidates,
  renderCapNotice,
  renderError,
  renderEss,
  renderFormula,
  renderGraphPane,
  renderNodePreview,
  renderStats,
} from "./render.js";

function el<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (found === null) throw new Error(`missing element #${id}`);
  return found as T;
}

function parseUnitInput(text: string): EntityTuple[] {
  return text
    .split(";")
    .map((part) => part.trim())
    .filter((part) => part !== "")
    .map((part) => part.split(",").map((c) => c.trim()).filter((c) => c !== ""));
}

function parseTupleInput(text: string): EntityTuple {
  return text.split(",").map((c) => c.trim()).filter((c) => c !== "");
}

let client = new NexusClient();
let state: ExplorationState | null = null;
let lastFailed: (() => Promise<void>) | null = null;
let fullView = false;

function errorInfo(err: unknown): ErrorInfo {
  if (err instanceof ApiError) {
    return { code: err.code, message: err.message, detail: err.detail };
  }
  if (err instanceof StateInvariantError) {
    return { code: "state-invariant", message: err.message, detail: null };
  }
  return { code: "unexpected", message: String(err), detail: null };
}

function showError(target: HTMLElement, err: unknown, retry?: () => Promise<void>): void {
  lastFailed = retry ?? null;
  target.innerHTML = renderError(errorInfo(err), retry !== undefined);
  const button = target.querySelector<HTMLButtonElement>("[data-retry]");
  if (button !== null && retry !== undefined) {
    button.addEventListener("click", () => {
      target.innerHTML = "";
      void retry();
    });
  }
}

async function guarded(target: HTMLElement, action: () => Promise<void>): Promise<void> {
  try {
    target.innerHTML = "";
    await action();
  } catch (err) {
    showError(target, err, () => guarded(target, action));
  }
}

function redraw(): void {
  const crumbs = el("breadcrumb");
  const formulaBox = el("formula");
  const candBox = el("candidates");
  const essBox = el("ess");
  const paneBox = el("pane");
  if (state === null) {
    crumbs.innerHTML = "";
    return;
  }
  el("stats").innerHTML = renderStats(state.stats);
  crumbs.innerHTML = renderBreadcrumb(state);
  const step = currentStep(state);
  formulaBox.innerHTML = step === null ? "" : renderFormula(step.formula);
  candBox.innerHTML = renderCandidates(state.candidates);
  essBox.innerHTML =
    state.essMembers === null || step === null
      ? `<p class="hint">refresh to list the essential expansion</p>`
      : renderEss(state.essMembers, step.unit);
  if (state.graph === null) {
    paneBox.innerHTML = renderGraphPane(null, { formula: step?.formula ?? "" });
  } else {
    const visited = visitedNodeIds(state);
    const sub = fullView ? null : subgraphFor(state.graph, visited);
    paneBox.innerHTML = renderGraphPane(state.graph, {
      drawn: sub === null ? undefined : new Set(sub.nodes.map((n) => n.id)),
      preview: sub === null ? undefined : sub.preview,
      currentId: step?.nodeId ?? null,
    });
    for (const g of paneBox.querySelectorAll<SVGGElement>("[data-node-id]")) {
      g.addEventListener("click", () => {
        const id = g.getAttribute("data-node-id");
        const node = state?.graph?.nodes.find((n: GraphNode) => n.id === id);
        if (node !== undefined) el("preview-box").innerHTML = renderNodePreview(node);
      });
    }
  }
}

function wireUpload(inputId: string, areaId: string): void {
  el<HTMLInputElement>(inputId).addEventListener("change", (event) => {
    const file = (event.target as HTMLInputElement).files?.[0];
    if (file === undefined) return;
    void file.text().then((text) => {
      el<HTMLTextAreaElement>(areaId).value = text;
    });
  });
}

function currentUnitOrThrow(): EntityTuple[] {
  if (state === null) throw new StateInvariantError("load a knowledge base first");
  const step = currentStep(state);
  if (step === null) throw new StateInvariantError("pick a unit first");
  return step.unit;
}

async function refreshEss(): Promise<void> {
  if (state === null) return;
  const unit = currentUnitOrThrow();
  const resp = await client.ess(state.sessionId, unit);
  state = setEssMembers(state, resp.tuples);
  redraw();
}

function setup(): void {
  wireUpload("facts-file", "facts");
  wireUpload("rules-file", "rules");

  el("load").addEventListener("click", () => {
    void guarded(el("load-error"), async () => {
      client = new NexusClient(el<HTMLInputElement>("base-url").value);
      const payload = {
        facts: el<HTMLTextAreaElement>("facts").value,
        rules: el<HTMLTextAreaElement>("rules").value,
        selector: el<HTMLSelectElement>("selector").value,
      };
      const session = await client.createSession(payload);
      state = startExploration(session.session_id, session.stats);
      fullView = false;
      el("preview-box").innerHTML = "";
      redraw();
    });
  });

  el("pick").addEventListener("click", () => {
    void guarded(el("step-error"), async () => {
      if (state === null) throw new StateInvariantError("load a knowledge base first");
      const unit = parseUnitInput(el<HTMLInputElement>("unit").value);
      const core = await client.core(state.sessionId, unit);
      state = pickUnit(state, unit, core.formula);
      await refreshEss();
    });
  });

  el("expand").addEventListener("click", () => {
    void guarded(el("step-error"), async () => {
      if (state === null) throw new StateInvariantError("load a knowledge base first");
      const tau = parseTupleInput(el<HTMLInputElement>("expand-tuple").value);
      const unit = [...currentUnitOrThrow(), tau];
      const core = await client.core(state.sessionId, unit);
      state = expandWith(state, tau, core.formula);
      await refreshEss();
    });
  });

  el("undo").addEventListener("click", () => {
    void guarded(el("step-error"), async () => {
      if (state === null) throw new StateInvariantError("nothing to undo");
      state = undo(state);
      await refreshEss();
    });
  });

  el("compare").addEventListener("click", () => {
    void guarded(el("compare-error"), async () => {
      if (state === null) throw new StateInvariantError("load a knowledge base first");
      const unit = currentUnitOrThrow();
      const tau = parseTupleInput(el<HTMLInputElement>("tau").value);
      const tauPrime = parseTupleInput(el<HTMLInputElement>("tau-prime").value);
      const resp = await client.compare(state.sessionId, unit, tau, tauPrime);
      state = recordComparison(state, tau, tauPrime, resp);
      redraw();
    });
  });

  el("refresh-ess").addEventListener("click", () => {
    void guarded(el("step-error"), refreshEss);
  });

  el("fetch-graph").addEventListener("click", () => {
    void guarded(el("graph-error"), async () => {
      if (state === null) throw new StateInvariantError("load a knowledge base first");
      const unit = state.breadcrumb[0]?.unit;
      if (unit === undefined) throw new StateInvariantError("pick a unit first");
      const capText = el<HTMLInputElement>("tuple-cap").value.trim();
      const partial = el<HTMLInputElement>("partial").checked;
      const opts: { tupleCap?: number; partial?: boolean } = {};
      if (capText !== "") opts.tupleCap = Number(capText);
      if (partial) opts.partial = true;
      try {
        const doc = await client.graph(state.sessionId, unit, opts);
        state = attachGraph(state, doc);
        el("preview-box").innerHTML = renderNodePreview(sourceNode(doc));
        redraw();
      } catch (err) {
        if (err instanceof ApiError && err.code === "capacity-error") {
          el("pane").innerHTML = renderCapNotice(errorInfo(err));
          return;
        }
        throw err;
      }
    });
  });

  el("toggle-view").addEventListener("click", () => {
    fullView = !fullView;
    el("toggle-view").textContent = fullView ? "explored view" : "full view";
    redraw();
  });

  el("retry-last").addEventListener("click", () => {
    const thunk = lastFailed;
    if (thunk !== null) void thunk();
  });

  void client
    .root()
    .then((info) => {
      el("service-info").textContent = `${info.name} ${info.version}`;
    })
    .catch(() => {
      el("service-info").textContent = "service offline";
    });
}

document.addEventListener("DOMContentLoaded", setup);
