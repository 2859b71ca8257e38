/** Pure rendering: service data in, HTML/SVG strings out.
 *
 * Every value shown — formulas, badges, member lists, node previews — is a
 * verbatim service response arranged for display.  The only computation here
 * is layout: a deterministic longest-path layering that puts the most
 * specific characterization (the source) at the bottom of the pane and the
 * most general one at the top.
 */

import type {
  EntityTuple,
  ErrorInfo,
  GraphDoc,
  GraphNode,
  Relation,
  SessionStats,
} from "./types.js";
import { tupleIn, tupleText } from "./types.js";
import type { CandidateEntry, ExplorationState } from "./state.js";
import { breadcrumbText, sourceNode } from "./state.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

const BADGES: Record<Relation, { glyph: string; label: string }> = {
  precedes: { glyph: "≺", label: "precedes" },
  preceded_by: { glyph: "≻", label: "preceded by" },
  similar: { glyph: "∼", label: "similar" },
  incomparable: { glyph: "∥", label: "incomparable" },
};

export function badgeGlyph(relation: Relation): string {
  return BADGES[relation].glyph;
}

export function renderBadge(relation: Relation): string {
  const b = BADGES[relation];
  return `<span class="badge badge-${relation}" title="${b.label}">${b.glyph}</span>`;
}

export function renderStats(stats: SessionStats): string {
  const chip = (label: string, value: number) =>
    `<span class="chip"><b>${value}</b> ${label}</span>`;
  return [
    chip("facts", stats.facts),
    chip("entailed atoms", stats.entailed),
    chip("entities", stats.entities),
    chip("max arity", stats.max_arity),
  ].join("");
}

export function renderFormula(formula: string): string {
  return `<code class="formula">${escapeHtml(formula)}</code>`;
}

/** The strict-inclusion chain, one crumb per step, displayed with ⊂. */
export function renderBreadcrumb(state: ExplorationState): string {
  if (state.breadcrumb.length === 0) {
    return `<span class="crumb-empty">no unit picked yet</span>`;
  }
  const crumbs = state.breadcrumb
    .map((step, i) => {
      const label = escapeHtml(`{${step.unit.map(tupleText).join("; ")}}`);
      const current = i === state.breadcrumb.length - 1 ? " crumb-current" : "";
      return `<span class="crumb${current}" data-step="${i}">${label}</span>`;
    })
    .join(`<span class="crumb-sub">⊂</span>`);
  return `<span class="crumb-chain" title="${escapeHtml(breadcrumbText(state))}">${crumbs}</span>`;
}

export function renderCandidates(entries: readonly CandidateEntry[]): string {
  if (entries.length === 0) {
    return `<p class="hint">compare two candidate tuples to fill this panel</p>`;
  }
  const rows = entries
    .map((e) => {
      const tau = escapeHtml(tupleText(e.tau));
      const ref = escapeHtml(tupleText(e.relativeTo));
      const witness =
        `${tau} joins once ${ref} is added: ${e.witness.tau_in_ess_prime}; ` +
        `${ref} joins once ${tau} is added: ${e.witness.tau_prime_in_ess}`;
      return (
        `<tr class="cand-row" title="${witness}">` +
        `<td class="cand-tau">${tau}</td>` +
        `<td class="cand-badge">${renderBadge(e.relation)}</td>` +
        `<td class="cand-ref">vs ${ref}</td></tr>`
      );
    })
    .join("");
  return `<table class="cand-table"><tbody>${rows}</tbody></table>`;
}

/** Essential-expansion members; tuples beyond the unit are called out. */
export function renderEss(
  tuples: readonly string[][],
  unit: readonly EntityTuple[],
): string {
  if (tuples.length === 0) {
    return `<p class="hint">the essential expansion is empty</p>`;
  }
  const items = tuples
    .map((tau) => {
      const text = escapeHtml(tupleText(tau));
      if (tupleIn(unit, tau)) {
        return `<li class="ess-member">${text}<span class="tag">in unit</span></li>`;
      }
      return `<li class="ess-member ess-joined">${text}<span class="tag tag-joined">joins essentially</span></li>`;
    })
    .join("");
  return `<ul class="ess-list">${items}</ul>`;
}

export function renderError(err: ErrorInfo, retryable = false): string {
  let where = "";
  if (
    typeof err.detail === "object" &&
    err.detail !== null &&
    "line" in err.detail &&
    "column" in err.detail
  ) {
    const d = err.detail as { line: number; column: number };
    where = `<span class="err-where">line ${d.line}, column ${d.column}</span>`;
  }
  const retry = retryable
    ? `<button class="retry" data-retry="1">Retry</button>`
    : "";
  return (
    `<div class="error-box" data-code="${escapeHtml(err.code)}">` +
    `<span class="err-code">${escapeHtml(err.code)}</span>` +
    `<span class="err-message">${escapeHtml(err.message)}</span>` +
    `${where}${retry}</div>`
  );
}

/** Node preview: the formula and direct instances verbatim from the graph. */
export function renderNodePreview(node: GraphNode): string {
  const instances = node.direct_instances
    .map((tau) => `<li>${escapeHtml(tupleText(tau))}</li>`)
    .join("");
  const sourceTag = node.is_source ? `<span class="tag">source</span>` : "";
  return (
    `<div class="preview" data-node-id="${escapeHtml(node.id)}">` +
    `<h3>${escapeHtml(node.id)}${sourceTag}</h3>` +
    renderFormula(node.formula) +
    `<h4>direct instances (${node.direct_instances.length})</h4>` +
    `<ul class="dinst">${instances}</ul></div>`
  );
}

// --- deterministic layout ---------------------------------------------------

export interface LayoutBox {
  id: string;
  /** 0 = bottom row (the source); larger = more general, drawn higher. */
  layer: number;
  /** Row from the top of the drawing, for y placement. */
  row: number;
  col: number;
  x: number;
  y: number;
}

export interface GraphLayout {
  boxes: LayoutBox[];
  width: number;
  height: number;
}

export const BOX_W = 150;
export const BOX_H = 46;
const GAP_X = 36;
const GAP_Y = 64;
const PAD = 20;

/** Longest-path layering from the source; same node set, same layout. */
export function layoutGraph(
  doc: GraphDoc,
  drawn?: ReadonlySet<string>,
): GraphLayout {
  const layer = new Map<string, number>();
  layer.set(sourceNode(doc).id, 0);
  const incoming = new Map<string, number>();
  for (const node of doc.nodes) incoming.set(node.id, 0);
  for (const [, b] of doc.arcs) incoming.set(b, (incoming.get(b) ?? 0) + 1);
  const ready = doc.nodes
    .filter((n) => (incoming.get(n.id) ?? 0) === 0)
    .map((n) => n.id)
    .sort();
  const order: string[] = [];
  const pending = new Map(incoming);
  while (ready.length > 0) {
    const here = ready.shift()!;
    order.push(here);
    for (const [a, b] of doc.arcs) {
      if (a !== here) continue;
      const left = (pending.get(b) ?? 0) - 1;
      pending.set(b, left);
      if (left === 0) {
        ready.push(b);
        ready.sort();
      }
    }
  }
  for (const id of order) {
    for (const [a, b] of doc.arcs) {
      if (a !== id) continue;
      const next = (layer.get(id) ?? 0) + 1;
      if (next > (layer.get(b) ?? 0)) layer.set(b, next);
    }
  }
  const keep = doc.nodes.filter((n) => drawn === undefined || drawn.has(n.id));
  const maxLayer = Math.max(0, ...keep.map((n) => layer.get(n.id) ?? 0));
  const byRow = new Map<number, string[]>();
  for (const node of keep) {
    const row = maxLayer - (layer.get(node.id) ?? 0);
    const bucket = byRow.get(row);
    if (bucket === undefined) byRow.set(row, [node.id]);
    else bucket.push(node.id);
  }
  const widest = Math.max(1, ...[...byRow.values()].map((r) => r.length));
  const width = PAD * 2 + widest * BOX_W + (widest - 1) * GAP_X;
  const height = PAD * 2 + (maxLayer + 1) * BOX_H + maxLayer * GAP_Y;
  const boxes: LayoutBox[] = [];
  for (const [row, ids] of [...byRow.entries()].sort((a, b) => a[0] - b[0])) {
    ids.sort();
    const rowWidth = ids.length * BOX_W + (ids.length - 1) * GAP_X;
    const left = (width - rowWidth) / 2;
    ids.forEach((id, col) => {
      boxes.push({
        id,
        layer: maxLayer - row,
        row,
        col,
        x: left + col * (BOX_W + GAP_X),
        y: PAD + row * (BOX_H + GAP_Y),
      });
    });
  }
  boxes.sort((a, b) => a.id.localeCompare(b.id));
  return { boxes, width, height };
}

export interface PaneOptions {
  /** Node ids the exploration has visited; others in the doc are one-hop previews. */
  drawn?: ReadonlySet<string>;
  preview?: ReadonlySet<string>;
  currentId?: string | null;
  /** With no graph document yet, show this formula as the single box. */
  formula?: string;
}

/** The graph pane: an SVG of boxes and arrows, or the single-node view. */
export function renderGraphPane(
  doc: GraphDoc | null,
  opts: PaneOptions = {},
): string {
  if (doc === null) {
    const text = opts.formula ?? "";
    return (
      `<div class="pane-single">` +
      `<div class="gnode source current">${escapeHtml(text)}</div>` +
      `<p class="hint">fetch the expansion graph to see the neighborhood</p></div>`
    );
  }
  const layout = layoutGraph(doc, opts.drawn);
  const at = new Map(layout.boxes.map((b) => [b.id, b]));
  const arrows = doc.arcs
    .filter(([a, b]) => at.has(a) && at.has(b))
    .map(([a, b]) => {
      const from = at.get(a)!;
      const to = at.get(b)!;
      const x1 = from.x + BOX_W / 2;
      const y1 = from.y;
      const x2 = to.x + BOX_W / 2;
      const y2 = to.y + BOX_H;
      return (
        `<line class="arc" data-arc="${a}-${b}" x1="${x1}" y1="${y1}"` +
        ` x2="${x2}" y2="${y2}" marker-end="url(#arrow)"/>`
      );
    })
    .join("");
  const nodes = doc.nodes.filter((n) => at.has(n.id));
  const boxes = nodes
    .map((node) => {
      const box = at.get(node.id)!;
      const classes = ["gnode"];
      if (node.is_source) classes.push("source");
      if (opts.preview?.has(node.id)) classes.push("preview");
      if (opts.currentId === node.id) classes.push("current");
      const label = `${node.id} · ${node.direct_instances.length} direct`;
      return (
        `<g class="${classes.join(" ")}" data-node-id="${node.id}"` +
        ` transform="translate(${box.x},${box.y})">` +
        `<rect width="${BOX_W}" height="${BOX_H}" rx="8"/>` +
        `<text x="${BOX_W / 2}" y="${BOX_H / 2 + 4}" text-anchor="middle">` +
        `${escapeHtml(label)}</text>` +
        `<title>${escapeHtml(node.formula)}</title></g>`
      );
    })
    .join("");
  return (
    `<svg class="graph-pane" viewBox="0 0 ${layout.width} ${layout.height}"` +
    ` width="${layout.width}" height="${layout.height}">` +
    `<defs><marker id="arrow" viewBox="0 0 10 10" refX="9" refY="5"` +
    ` markerWidth="7" markerHeight="7" orient="auto-start-reverse">` +
    `<path d="M 0 0 L 10 5 L 0 10 z"/></marker></defs>` +
    `${arrows}${boxes}</svg>`
  );
}

/** Capacity notice for graph builds that exceeded the tuple budget. */
export function renderCapNotice(err: ErrorInfo): string {
  return (
    `<div class="cap-notice" data-code="${escapeHtml(err.code)}">` +
    `<b>graph capped:</b> ${escapeHtml(err.message)} ` +
    `<span class="hint">raise the cap or request a partial build</span></div>`
  );
}
