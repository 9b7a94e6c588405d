/**
 * App shell: selection state, tab routing, poll loop, DOM glue.
 *
 * All state lives in one object; every repaint is a straight call into the
 * pure renderers with the latest payloads. Overlapping fetches resolve
 * latest-wins inside ApiClient, so a stale reply can never repaint.
 */

import { ApiClient } from "./api.js";
import { ColorBook } from "./colors.js";
import {
  renderE2ETab,
  renderEmptyState,
  renderLinkMetrics,
  renderNodeMetrics,
  renderNotReady,
  renderOverview,
  renderPollErrors,
} from "./render.js";
import type { E2EPayload, LinkMetrics, NodeMetrics, Overview, UiSelection } from "./types.js";

export type TabName = "overview" | "metrics" | "e2e";

export interface AppState {
  tab: TabName;
  selection: UiSelection | null;
  overview: Overview | null;
  notReady: boolean;
}

export function initialState(): AppState {
  return { tab: "overview", selection: null, overview: null, notReady: true };
}

/** Decode a data-select attribute ("link:CERN--DE-KIT", "node:CERN"). */
export function parseSelect(attr: string | null): UiSelection | null {
  if (!attr) return null;
  const colon = attr.indexOf(":");
  if (colon <= 0) return null;
  const kind = attr.slice(0, colon);
  const id = attr.slice(colon + 1);
  if ((kind !== "link" && kind !== "node") || id === "") return null;
  return { kind, id };
}

/** Abstract links a selection covers: itself, or every link at the node. */
export function scopedLinkIds(overview: Overview | null, selection: UiSelection): string[] {
  if (selection.kind === "link") return [selection.id];
  if (!overview) return [];
  return overview.links
    .filter((link) => link.endpoints.includes(selection.id))
    .map((link) => link.id)
    .sort();
}

export function metricsPath(selection: UiSelection): string {
  return selection.kind === "link"
    ? `/links/${encodeURIComponent(selection.id)}/metrics`
    : `/nodes/${encodeURIComponent(selection.id)}/metrics`;
}

class App {
  state: AppState = initialState();
  colors = new ColorBook();
  private timer: ReturnType<typeof setInterval> | null = null;

  constructor(
    private client: ApiClient,
    private view: HTMLElement,
    private banner: HTMLElement,
    private cycleLabel: HTMLElement,
    private tabs: HTMLElement,
  ) {}

  start(): void {
    this.tabs.addEventListener("click", (event) => {
      const button = (event.target as HTMLElement).closest("button[data-tab]");
      if (button) this.setTab(button.getAttribute("data-tab") as TabName);
    });
    this.view.addEventListener("click", (event) => {
      const el = (event.target as HTMLElement).closest("[data-select]");
      const selection = parseSelect(el ? el.getAttribute("data-select") : null);
      if (selection) this.select(selection);
    });
    void this.refresh();
  }

  setTab(tab: TabName): void {
    this.state.tab = tab;
    for (const button of this.tabs.querySelectorAll("button[data-tab]")) {
      button.classList.toggle("active", button.getAttribute("data-tab") === tab);
    }
    void this.paintActiveTab();
  }

  select(selection: UiSelection): void {
    this.state.selection = selection;
    // a new selection lands the operator on the metric tab
    this.setTab("metrics");
  }

  async refresh(): Promise<void> {
    const result = await this.client.get<Overview>("overview", "/overview");
    if (result.kind === "stale") return;
    if (result.kind === "notready") {
      this.state.notReady = true;
      this.banner.innerHTML = renderNotReady();
      this.schedule(2);
      return;
    }
    if (result.kind !== "ok") return;
    this.state.notReady = false;
    this.state.overview = result.body;
    this.colors.learn(result.body);
    this.banner.innerHTML = renderPollErrors(result.body);
    this.cycleLabel.textContent =
      `cycle ${result.body.cycle_index} at ` +
      new Date(result.body.cycle_start * 1000).toISOString();
    await this.paintActiveTab();
    this.schedule(result.body.period);
  }

  private schedule(seconds: number): void {
    if (this.timer !== null) clearInterval(this.timer);
    this.timer = setInterval(() => void this.refresh(), Math.max(seconds, 2) * 1000);
  }

  private async paintActiveTab(): Promise<void> {
    if (this.state.notReady || !this.state.overview) {
      this.view.innerHTML = "";
      return;
    }
    const { tab, selection, overview } = this.state;
    if (tab === "overview") {
      this.view.innerHTML = renderOverview(overview, this.colors);
      return;
    }
    if (!selection) {
      this.view.innerHTML = renderEmptyState("Select a node or link on the overview map.");
      return;
    }
    if (tab === "metrics") {
      const result = await this.client.get<LinkMetrics | NodeMetrics>(
        "metrics",
        metricsPath(selection),
      );
      if (result.kind === "stale") return;
      if (result.kind === "missing") {
        this.view.innerHTML = renderEmptyState(`No data for ${selection.id}.`);
        return;
      }
      if (result.kind !== "ok") return;
      this.view.innerHTML =
        selection.kind === "link"
          ? renderLinkMetrics(result.body as LinkMetrics, this.colors)
          : renderNodeMetrics(result.body as NodeMetrics);
      return;
    }
    // e2e tab: one section per abstract link in scope
    const ids = scopedLinkIds(overview, selection);
    const results = await Promise.all(
      ids.map((id) =>
        this.client.get<E2EPayload>(`e2e:${id}`, `/links/${encodeURIComponent(id)}/e2e`),
      ),
    );
    const parts: string[] = [];
    results.forEach((result, i) => {
      if (result.kind === "ok") parts.push(renderE2ETab(result.body, this.colors));
      else if (result.kind === "missing") parts.push(renderEmptyState(`No data for ${ids[i]}.`));
    });
    this.view.innerHTML = parts.length > 0 ? parts.join("\n") : renderEmptyState("Nothing in scope.");
  }
}

export function boot(doc: Document): App | null {
  const view = doc.getElementById("view");
  const banner = doc.getElementById("banner");
  const cycleLabel = doc.getElementById("cycle-label");
  const tabs = doc.getElementById("tabs");
  if (!view || !banner || !cycleLabel || !tabs) return null;
  const apiBase = new URLSearchParams(doc.location?.search ?? "").get("api") ?? "/api";
  const app = new App(new ApiClient(apiBase), view, banner, cycleLabel, tabs);
  app.start();
  return app;
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  boot(document);
}
