/**
 * Pure renderers: every function maps API payloads to an HTML string.
 *
 * Nothing in here touches the DOM or fetches; the app layer injects the
 * output and routes clicks through data-select attributes. Keeping these
 * pure means the whole visual contract is testable on strings.
 */

import type { ColorBook } from "./colors.js";
import type {
  Direction,
  E2EPayload,
  LinkMetrics,
  NodeInfo,
  NodeMetrics,
  Overview,
  Triplet,
} from "./types.js";

const MAP_W = 1000;
const MAP_H = 620;
const PAD = 60;

// fills for hop-count areas; route changes alternate through these
const HOP_FILLS = ["#7fb3d5", "#f5b041", "#82e0aa", "#c39bd3", "#f1948a", "#76d7c4"];

export function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function mapX(x: number): number {
  return PAD + x * (MAP_W - 2 * PAD);
}

function mapY(y: number): number {
  return PAD + y * (MAP_H - 2 * PAD);
}

function statusChip(status: string, colors: ColorBook): string {
  return `<span class="status-chip" style="background:${colors.hex(status)}">${esc(status)}</span>`;
}

export function renderNotReady(): string {
  return `<div class="banner error" data-state="notready">Monitor has not published a cycle yet. Retrying.</div>`;
}

export function renderEmptyState(message: string): string {
  return `<div class="empty-state">${esc(message)}</div>`;
}

export function renderPollErrors(overview: Overview): string {
  const entries = Object.entries(overview.poll_errors);
  if (entries.length === 0) return "";
  const items = entries
    .map(([domain, error]) => `<li><strong>${esc(domain)}</strong>: ${esc(error)}</li>`)
    .join("");
  return `<div class="banner">Measurement points unreachable:<ul>${items}</ul></div>`;
}

export function renderOverview(overview: Overview, colors: ColorBook): string {
  const nodeById = new Map<string, NodeInfo>();
  for (const node of overview.nodes) nodeById.set(node.id, node);

  const linkShapes = overview.links
    .map((link) => {
      const [a, b] = link.endpoints;
      const na = nodeById.get(a);
      const nb = nodeById.get(b);
      if (!na || !nb) return "";
      const x1 = mapX(na.x);
      const y1 = mapY(na.y);
      const x2 = mapX(nb.x);
      const y2 = mapY(nb.y);
      const core = `<line class="map-link" data-select="link:${esc(link.id)}" ` +
        `x1="${x1}" y1="${y1}" x2="${x2}" y2="${y2}" ` +
        `stroke="${link.hex}" stroke-width="6">` +
        `<title>${esc(link.id)}: ${esc(link.status)}</title></line>`;
      if (!link.protected) return core;
      // protected pairs read as a doubled line
      const overlay = `<line x1="${x1}" y1="${y1}" x2="${x2}" y2="${y2}" ` +
        `stroke="#ffffff" stroke-width="1.5" pointer-events="none"/>`;
      return core + overlay;
    })
    .join("\n    ");

  const nodeShapes = overview.nodes
    .map((node) => {
      const cx = mapX(node.x);
      const cy = mapY(node.y);
      const r = node.tier === 0 ? 17 : 12;
      return (
        `<g class="map-node" data-select="node:${esc(node.id)}">` +
        `<circle cx="${cx}" cy="${cy}" r="${r}" fill="${node.tier === 0 ? "#20242b" : "#3d4654"}" stroke="#fff" stroke-width="2"/>` +
        `<text x="${cx}" y="${cy + r + 14}" text-anchor="middle" font-size="13">${esc(node.id)}</text></g>`
      );
    })
    .join("\n    ");

  const legend = colors
    .known()
    .map(
      ([name, hex]) =>
        `<span><span class="swatch" style="background:${hex}"></span>${esc(name)}</span>`,
    )
    .join("");

  const rows = overview.links
    .map((link) => {
      const members = Object.entries(link.e2e)
        .map(([e2eId, summary]) => {
          if (!summary) return `${esc(e2eId)}: absent`;
          const marks =
            (summary.uncertain ? " ±" : "") +
            (summary.gaps > 0 ? ` <span class="gap-icon" title="gaps">&#9888;</span>${summary.gaps}` : "");
          return `${esc(e2eId)}: ${esc(summary.operational)}${marks}`;
        })
        .join("<br>");
      return (
        `<tr data-select="link:${esc(link.id)}">` +
        `<td>${esc(link.id)}${link.protected ? " (protected)" : ""}</td>` +
        `<td>${statusChip(link.status, colors)}</td>` +
        `<td>${members}</td></tr>`
      );
    })
    .join("\n      ");

  return `<div class="map-wrap">
  <svg class="map" viewBox="0 0 ${MAP_W} ${MAP_H}" role="img">
    ${linkShapes}
    ${nodeShapes}
  </svg>
  <div class="legend">${legend}</div>
</div>
<div class="panel">
  <table class="link-table">
    <thead><tr><th>Abstract link</th><th>Status</th><th>E2E members</th></tr></thead>
    <tbody>
      ${rows}
    </tbody>
  </table>
</div>`;
}

function sparkline(values: (number | null)[], width: number, height: number): string {
  const present = values.filter((v): v is number => v !== null);
  const top = present.length > 0 ? Math.max(...present, 1e-9) : 1;
  const step = width / Math.max(values.length, 1);
  const runs: string[] = [];
  let points: string[] = [];
  values.forEach((value, i) => {
    if (value === null) {
      if (points.length > 0) runs.push(points.join(" "));
      points = [];
      return;
    }
    const x = (i + 0.5) * step;
    const y = height - (value / top) * (height - 4) - 2;
    points.push(`${x.toFixed(1)},${y.toFixed(1)}`);
  });
  if (points.length > 0) runs.push(points.join(" "));
  const lines = runs
    .map((run) => `<polyline points="${run}" fill="none" stroke="#3465a4" stroke-width="1.2"/>`)
    .join("");
  return `<svg width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">${lines}</svg>`;
}

function tripletChart(
  values: (Triplet | number | null)[],
  width: number,
  height: number,
): string {
  const tops = values
    .filter((v): v is Triplet => v !== null && typeof v === "object")
    .map((t) => t.max);
  const top = tops.length > 0 ? Math.max(...tops, 1e-9) : 1;
  const step = width / Math.max(values.length, 1);
  const scale = (v: number) => height - (v / top) * (height - 6) - 3;
  const marks = values
    .map((value, i) => {
      if (value === null || typeof value !== "object") return "";
      const x = ((i + 0.5) * step).toFixed(1);
      return (
        `<line x1="${x}" y1="${scale(value.min).toFixed(1)}" x2="${x}" y2="${scale(value.max).toFixed(1)}" stroke="#888" stroke-width="1"/>` +
        `<circle cx="${x}" cy="${scale(value.med).toFixed(1)}" r="1.6" fill="#1a5fb4"/>`
      );
    })
    .join("");
  return `<svg width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">${marks}</svg>`;
}

function hopChart(direction: Direction, windowStart: number, windowEnd: number): string {
  const width = 288;
  const height = 70;
  const span = Math.max(windowEnd - windowStart, 1);
  const segments = direction.hop_segments;
  if (segments.length === 0) {
    return `<svg class="hop-chart" width="${width}" height="${height}"></svg>`;
  }
  const maxHops = Math.max(...segments.map((s) => s.hop_count), 1);
  const rects = segments
    .map((seg, i) => {
      const x = ((Math.max(seg.start, windowStart) - windowStart) / span) * width;
      const w = ((Math.min(seg.end, windowEnd) - Math.max(seg.start, windowStart)) / span) * width;
      const h = (seg.hop_count / maxHops) * (height - 16);
      const fill = HOP_FILLS[i % HOP_FILLS.length];
      return (
        `<rect class="hop-area" x="${x.toFixed(1)}" y="${(height - h).toFixed(1)}" width="${Math.max(w, 1).toFixed(1)}" height="${h.toFixed(1)}" fill="${fill}">` +
        `<title>${seg.hop_count} hops: ${esc(seg.route.join(" > "))}</title></rect>` +
        `<text x="${(x + 3).toFixed(1)}" y="${(height - h + 12).toFixed(1)}" font-size="10">${seg.hop_count}</text>`
      );
    })
    .join("");
  return `<svg class="hop-chart" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">${rects}</svg>`;
}

function chartFigure(caption: string, svg: string, cssClass = ""): string {
  return `<figure class="chart ${cssClass}">${svg}<figcaption>${esc(caption)}</figcaption></figure>`;
}

export function renderStatusTimeline(metrics: LinkMetrics, colors: ColorBook): string {
  const { statuses } = metrics.status_timeline;
  const n = Math.max(statuses.length, 1);
  const cells = statuses
    .map((status, i) => {
      const cls = status === null ? ' class="bin-null"' : "";
      return `<rect${cls} x="${i}" y="0" width="1" height="10" fill="${colors.hex(status)}"/>`;
    })
    .join("");
  return `<div class="timeline"><svg viewBox="0 0 ${n} 10" preserveAspectRatio="none">${cells}</svg></div>`;
}

export function renderLinkMetrics(metrics: LinkMetrics, colors: ColorBook): string {
  const interfaces = Object.entries(metrics.interfaces)
    .map(([address, series]) => {
      const charts = Object.entries(series)
        .map(([kind, values]) => chartFigure(kind, sparkline(values, 288, 60), kind))
        .join("");
      return `<div class="panel interface"><h3>${esc(address)}</h3><div class="chart-row">${charts}</div></div>`;
    })
    .join("");
  return `<div class="panel">
  <h3>${esc(metrics.link_id)} status, last 24h</h3>
  ${renderStatusTimeline(metrics, colors)}
</div>
${interfaces}`;
}

export function renderNodeMetrics(metrics: NodeMetrics): string {
  if (metrics.bundles.length === 0) {
    return renderEmptyState("No links at this node.");
  }
  const bundles = metrics.bundles
    .map((bundle) => {
      const directions = bundle.directions
        .map((direction) => {
          const charts = [
            chartFigure(
              "hop count",
              hopChart(direction, metrics.window.start, metrics.window.end),
            ),
            chartFigure("owd ms", tripletChart(direction.series["owd"] ?? [], 288, 60), "owd"),
            chartFigure("jitter ms", tripletChart(direction.series["jitter"] ?? [], 288, 60), "jitter"),
            chartFigure(
              "loss",
              sparkline((direction.series["loss"] ?? []) as (number | null)[], 288, 60),
              "loss",
            ),
            chartFigure(
              "throughput bps",
              tripletChart(direction.series["throughput"] ?? [], 120, 60),
              "throughput",
            ),
          ].join("");
          return `<div class="direction"><h4>${esc(direction.src)} &rarr; ${esc(direction.dst)}</h4><div class="chart-row">${charts}</div></div>`;
        })
        .join("");
      return `<div class="bundle panel" data-select="link:${esc(bundle.link_id)}"><h3>${esc(bundle.link_id)}</h3>${directions}</div>`;
    })
    .join("");
  return `<h2>${esc(metrics.node_id)}: probe mesh</h2>${bundles}`;
}

export function renderE2ETab(payload: E2EPayload, colors: ColorBook): string {
  const entries = payload.e2e
    .map((entry) => {
      if (!entry.present || entry.view === null) {
        return `<div class="e2e-entry panel"><h3>${esc(entry.e2e_link_id)}</h3>${renderEmptyState(
          "Not reported this cycle.",
        )}</div>`;
      }
      const view = entry.view;
      const pieces: string[] = [];
      view.fragments.forEach((fragment, index) => {
        if (index > 0) {
          const gap = view.gaps[index - 1];
          const where = gap ? `${gap.after} .. ${gap.before}` : "unreported span";
          pieces.push(`<span class="gap-icon" title="gap: ${esc(where)}">&#9888;</span>`);
        }
        for (const section of fragment) {
          pieces.push(
            `<div class="section-box" style="background:${colors.hex(section.operational)}">` +
              `${esc(section.domains.join("+"))}` +
              `<small>${esc(section.dp_a)} &rarr; ${esc(section.dp_b)}</small></div>`,
          );
        }
      });
      const flags = [
        view.fully_reconstructed ? "" : "incomplete",
        view.has_unknown ? "has unknown" : "",
      ]
        .filter(Boolean)
        .join(", ");
      const diags = view.diagnostics
        .map((d) => `<div class="diag">${esc(d.kind)}: ${esc(d.detail)}</div>`)
        .join("");
      return `<div class="e2e-entry panel">
  <h3>${esc(entry.e2e_link_id)} ${statusChip(view.aggregated_operational, colors)} ${esc(
    view.aggregated_administrative,
  )}${flags ? ` <small>(${esc(flags)})</small>` : ""}</h3>
  <div class="sections">${pieces.join("")}</div>
  ${diags}
</div>`;
    })
    .join("\n");
  return `<h2>${esc(payload.link_id)}: e2e links</h2>\n${entries}`;
}
