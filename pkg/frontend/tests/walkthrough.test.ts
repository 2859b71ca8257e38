/** The recorded theme-park walkthrough, replayed end to end.
 *
 * This is the explorer's contract suite: the fake fetch serves responses
 * recorded from the real service, the UI modules arrange them, and every
 * assertion checks a rendered value against the recorded payload — never
 * against a locally computed result.  The walkthrough is the one the
 * package's acceptance gate also exercises from the Python side:
 * load the theme-park base, compare gardaland with leolandia, expand the
 * unit with prater, and watch leolandia join the essential expansion.
 */

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiError, NexusClient } from "../src/api.js";
import type {
  CompareResponse,
  EssListResponse,
  EssMemberResponse,
  FormulaResponse,
  GraphDoc,
  SessionResponse,
} from "../src/types.js";
import {
  attachGraph,
  currentStep,
  expandWith,
  homeNode,
  pickUnit,
  recordComparison,
  setEssMembers,
  sourceNode,
  startExploration,
  subgraphFor,
  undo,
  visitedNodeIds,
  type ExplorationState,
} from "../src/state.js";
import {
  escapeHtml,
  layoutGraph,
  renderBadge,
  renderBreadcrumb,
  renderCandidates,
  renderCapNotice,
  renderError,
  renderEss,
  renderFormula,
  renderGraphPane,
  renderNodePreview,
  renderStats,
} from "../src/render.js";
import type { FakeFetch, RecordedCall } from "./helpers.js";
import { installFakeFetch, loadWalkthrough } from "./helpers.js";

const W = loadWalkthrough();
const U0 = [["discovery_cove"], ["epcot"]];
const SESSION = W["session"]!;
const FACTS = (SESSION.request as { facts: string }).facts;
const RULES = (SESSION.request as { rules: string }).rules;

let fake: FakeFetch;
let client: NexusClient;

beforeAll(() => {
  fake = installFakeFetch(Object.values(W) as RecordedCall[]);
  client = new NexusClient("http://127.0.0.1:7878");
});

afterAll(() => {
  fake.restore();
});

describe("theme-park walkthrough against recorded responses", () => {
  let state: ExplorationState;
  let sid: string;

  it("loads the base and renders the recorded stats", async () => {
    const session: SessionResponse = await client.createSession({
      facts: FACTS,
      rules: RULES,
    });
    expect(session).toEqual(SESSION.response);
    sid = session.session_id;
    state = startExploration(sid, session.stats);
    const html = renderStats(state.stats);
    const recorded = (SESSION.response as SessionResponse).stats;
    expect(html).toContain(`<b>${recorded.facts}</b> facts`);
    expect(html).toContain(`<b>${recorded.entailed}</b> entailed atoms`);
    expect(html).toContain(`<b>${recorded.entities}</b> entities`);
  });

  it("re-loading would discard the breadcrumb", async () => {
    const again: SessionResponse = await client.createSession({
      facts: FACTS,
      rules: RULES,
    });
    const other = startExploration(again.session_id, again.stats);
    expect(other.breadcrumb).toHaveLength(0);
  });

  it("surfaces parse diagnostics inline on a bad base", async () => {
    const attempt = client.createSession({
      facts: (W["parse_error"]!.request as { facts: string }).facts,
    });
    const err = (await attempt.catch((e: unknown) => e)) as ApiError;
    expect(err).toBeInstanceOf(ApiError);
    const html = renderError(
      { code: err.code, message: err.message, detail: err.detail },
      true,
    );
    const recorded = (W["parse_error"]!.response as { error: { message: string } })
      .error;
    expect(html).toContain("parse-error");
    expect(html).toContain(escapeHtml(recorded.message));
    expect(html).toContain("line 1, column 7");
    expect(html).toContain("data-retry");
  });

  it("picks the worked unit and shows the recorded core formula", async () => {
    const core: FormulaResponse = await client.core(sid, U0);
    expect(core).toEqual(W["core_u0"]!.response);
    state = pickUnit(state, U0, core.formula);
    expect(renderFormula(currentStep(state)!.formula)).toContain(
      escapeHtml((W["core_u0"]!.response as FormulaResponse).formula),
    );
  });

  it("renders the single-node pane before the graph is fetched", () => {
    const html = renderGraphPane(null, { formula: currentStep(state)!.formula });
    expect(html).toContain("pane-single");
    expect(html).toContain(escapeHtml(currentStep(state)!.formula));
  });

  it("badges gardaland as preceding relative to leolandia", async () => {
    const resp: CompareResponse = await client.compare(
      sid,
      U0,
      ["gardaland"],
      ["leolandia"],
    );
    expect(resp).toEqual(W["compare_gardaland_leolandia"]!.response);
    state = recordComparison(state, ["gardaland"], ["leolandia"], resp);
    const html = renderCandidates(state.candidates);
    expect(html).toContain(renderBadge(resp.relation));
    expect(resp.relation).toBe("precedes");
    expect(html).toContain("≺");
    expect(html).toContain("gardaland");
    expect(html).toContain("vs leolandia");
  });

  it("badges the rest of the recorded trio", async () => {
    const similar: CompareResponse = await client.compare(
      sid,
      U0,
      ["prater"],
      ["leolandia"],
    );
    expect(similar).toEqual(W["compare_prater_leolandia"]!.response);
    const incomparable: CompareResponse = await client.compare(
      sid,
      U0,
      ["pacific_park"],
      ["gardaland"],
    );
    expect(incomparable).toEqual(W["compare_pacific_gardaland"]!.response);
    state = recordComparison(state, ["prater"], ["leolandia"], similar);
    state = recordComparison(state, ["pacific_park"], ["gardaland"], incomparable);
    const html = renderCandidates(state.candidates);
    expect(html).toContain(renderBadge(similar.relation));
    expect(html).toContain(renderBadge(incomparable.relation));
  });

  it("lists the essential expansion of the worked unit", async () => {
    const resp: EssListResponse = await client.ess(sid, U0);
    expect(resp).toEqual(W["ess_u0"]!.response);
    state = setEssMembers(state, resp.tuples);
    const html = renderEss(resp.tuples, currentStep(state)!.unit);
    for (const tau of resp.tuples) {
      expect(html).toContain(escapeHtml(tau.join(",")));
    }
  });

  it("reports pacific_park outside the essential expansion", async () => {
    const resp: EssMemberResponse = await client.essMember(sid, U0, [
      "pacific_park",
    ]);
    expect(resp).toEqual(W["ess_u0_pacific_park"]!.response);
    expect(resp.member).toBe(false);
  });

  it("expands with prater and gets the recorded loosened core", async () => {
    const unit = [...U0, ["prater"]];
    const core: FormulaResponse = await client.core(sid, unit);
    expect(core).toEqual(W["core_u1"]!.response);
    state = expandWith(state, ["prater"], core.formula);
    expect(state.breadcrumb).toHaveLength(2);
    const html = renderBreadcrumb(state);
    expect(html).toContain("⊂");
    expect(html).toContain("{discovery_cove; epcot; prater}");
  });

  it("observes leolandia joining the essential expansion", async () => {
    const unit = currentStep(state)!.unit;
    const resp: EssListResponse = await client.ess(sid, unit);
    expect(resp).toEqual(W["ess_u1"]!.response);
    state = setEssMembers(state, resp.tuples);
    expect(resp.tuples).toContainEqual(["leolandia"]);
    const member: EssMemberResponse = await client.essMember(sid, unit, [
      "leolandia",
    ]);
    expect(member).toEqual(W["ess_u1_leolandia"]!.response);
    expect(member.member).toBe(true);
    const html = renderEss(resp.tuples, unit);
    const leolandia = html.split("<li").find((p) => p.includes("leolandia"));
    expect(leolandia).toContain("tag-joined");
  });

  it("fetches the full expansion graph: six nodes, the worked arc set", async () => {
    const doc: GraphDoc = await client.graph(sid, U0);
    expect(doc).toEqual(W["graph_u0"]!.response);
    expect(doc.nodes).toHaveLength(6);
    expect(new Set(doc.arcs.map(([a, b]) => `${a}>${b}`))).toEqual(
      new Set(["n0>n1", "n0>n2", "n1>n3", "n2>n3", "n3>n4", "n4>n5"]),
    );
    state = attachGraph(state, doc);
  });

  it("locates the breadcrumb in the graph and matches the node formula", () => {
    expect(state.breadcrumb.map((s) => s.nodeId)).toEqual(["n0", "n3"]);
    const doc = state.graph!;
    const home = homeNode(doc, ["prater"])!;
    expect(home.id).toBe("n3");
    // The current step's formula, served by /core, is byte-identical to the
    // graph node's formula — the end-to-end agreement the walkthrough is for.
    expect(currentStep(state)!.formula).toBe(home.formula);
    expect(sourceNode(doc).formula).toBe(
      (W["core_u0"]!.response as FormulaResponse).formula,
    );
  });

  it("previews every node with dinst identical to the graph JSON", () => {
    for (const node of state.graph!.nodes) {
      const html = renderNodePreview(node);
      expect(html).toContain(escapeHtml(node.formula));
      for (const tau of node.direct_instances) {
        expect(html).toContain(`<li>${escapeHtml(tau.join(","))}</li>`);
      }
      expect(html).toContain(
        `direct instances (${node.direct_instances.length})`,
      );
    }
  });

  it("draws the explored subgraph with the source at the bottom", () => {
    const visited = visitedNodeIds(state);
    expect(visited).toEqual(new Set(["n0", "n3"]));
    const sub = subgraphFor(state.graph!, visited);
    const drawn = new Set(sub.nodes.map((n) => n.id));
    expect(drawn).toEqual(new Set(["n0", "n1", "n2", "n3", "n4"]));
    const html = renderGraphPane(state.graph!, {
      drawn,
      preview: sub.preview,
      currentId: currentStep(state)!.nodeId,
    });
    expect(html).not.toContain(`data-node-id="n5"`);
    const layout = layoutGraph(state.graph!, drawn);
    const at = new Map(layout.boxes.map((b) => [b.id, b]));
    const maxY = Math.max(...layout.boxes.map((b) => b.y));
    expect(at.get("n0")!.y).toBe(maxY);
    for (const [a, b] of sub.arcs) {
      expect(at.get(b)!.y).toBeLessThan(at.get(a)!.y);
    }
  });

  it("shows the capacity notice when the graph build is capped", async () => {
    const attempt = client.graph(sid, U0, { tupleCap: 1 });
    const err = (await attempt.catch((e: unknown) => e)) as ApiError;
    expect(err).toBeInstanceOf(ApiError);
    expect(err.code).toBe("capacity-error");
    expect(err.status).toBe(413);
    const recorded = (
      W["graph_cap_notice"]!.response as { error: { message: string } }
    ).error;
    const html = renderCapNotice({
      code: err.code,
      message: err.message,
      detail: err.detail,
    });
    expect(html).toContain(escapeHtml(recorded.message));
  });

  it("undo returns to the worked unit with its original formula", () => {
    state = undo(state);
    expect(currentStep(state)!.unit).toEqual(U0);
    expect(currentStep(state)!.formula).toBe(
      (W["core_u0"]!.response as FormulaResponse).formula,
    );
    expect(currentStep(state)!.nodeId).toBe("n0");
  });
});
