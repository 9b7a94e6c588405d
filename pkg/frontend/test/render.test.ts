import { describe, expect, it } from "vitest";

import { ColorBook } from "../src/colors.js";
import {
  renderE2ETab,
  renderEmptyState,
  renderLinkMetrics,
  renderNodeMetrics,
  renderNotReady,
  renderOverview,
  renderPollErrors,
} from "../src/render.js";
import {
  allUpOverview,
  e2eGapFixture,
  linkMetricsFixture,
  nodeMetricsFixture,
  overviewFixture,
} from "./fixtures.js";

const ALL_HEXES = ["#1faa00", "#f5c211", "#d7191c", "#2166ac", "#c000c0"];

function learned(): ColorBook {
  const colors = new ColorBook();
  colors.learn(overviewFixture());
  return colors;
}

describe("overview map", () => {
  it("renders all five status colors", () => {
    const html = renderOverview(overviewFixture(), learned());
    for (const hex of ALL_HEXES) {
      expect(html).toContain(`stroke="${hex}"`);
    }
  });

  it("renders every node and link as a selectable element", () => {
    const overview = overviewFixture();
    const html = renderOverview(overview, learned());
    for (const node of overview.nodes) {
      expect(html).toContain(`data-select="node:${node.id}"`);
    }
    for (const link of overview.links) {
      expect(html).toContain(`data-select="link:${link.id}"`);
    }
  });

  it("an all-UP federation paints only green links", () => {
    const colors = new ColorBook();
    const overview = allUpOverview();
    colors.learn(overview);
    const html = renderOverview(overview, colors);
    expect(html).toContain('stroke="#1faa00"');
    for (const hex of ALL_HEXES.slice(1)) {
      expect(html).not.toContain(`stroke="${hex}"`);
    }
  });

  it("a status change between polls changes the rendered color", () => {
    const colors = learned();
    const before = renderOverview(allUpOverview(), colors);
    const after = renderOverview(overviewFixture(), colors);
    expect(before).not.toContain('stroke="#d7191c"');
    expect(after).toContain('stroke="#d7191c"');
  });

  it("marks protected links", () => {
    const html = renderOverview(overviewFixture(), learned());
    expect(html).toContain("CERN--DE-KIT (protected)");
  });

  it("lists unreachable measurement points in the banner", () => {
    const html = renderPollErrors(overviewFixture());
    expect(html).toContain("NDGF");
    expect(html).toContain("connection refused");
    expect(renderPollErrors(allUpOverview())).toBe("");
  });

  it("escapes hostile identifiers", () => {
    const overview = overviewFixture();
    overview.links[0].id = 'X"><script>alert(1)</script>';
    const html = renderOverview(overview, learned());
    expect(html).not.toContain("<script>alert(1)</script>");
  });
});

describe("metric tab", () => {
  it("selecting the hub shows one bundle per abstract link", () => {
    const html = renderNodeMetrics(nodeMetricsFixture("CERN"));
    const bundles = html.match(/class="bundle/g) ?? [];
    expect(bundles.length).toBe(11);
  });

  it("selecting a tier-1 site shows exactly one bundle", () => {
    const html = renderNodeMetrics(nodeMetricsFixture("US-BNL"));
    const bundles = html.match(/class="bundle/g) ?? [];
    expect(bundles.length).toBe(1);
  });

  it("shows both directions of each bundle", () => {
    const html = renderNodeMetrics(nodeMetricsFixture("US-BNL"));
    expect(html).toContain("CERN &rarr; US-BNL");
    expect(html).toContain("US-BNL &rarr; CERN");
  });

  it("draws differently colored hop-count areas per route", () => {
    const html = renderNodeMetrics(nodeMetricsFixture("US-BNL"));
    const fills = [...html.matchAll(/class="hop-area"[^>]*fill="([^"]+)"/g)].map(
      (m) => m[1],
    );
    expect(fills.length).toBe(2);
    expect(new Set(fills).size).toBe(2);
  });

  it("archive gaps stay visible: no interpolation across null bins", () => {
    const html = renderNodeMetrics(nodeMetricsFixture("US-BNL"));
    // owd fixture has nulls every 7th bin, so the scatter must skip marks
    const owd = html.match(/class="chart owd"[\s\S]*?<\/figure>/)?.[0] ?? "";
    const marks = owd.match(/<circle/g) ?? [];
    expect(marks.length).toBeLessThan(288);
    expect(marks.length).toBeGreaterThan(200);
  });

  it("status timeline uses the palette the API taught us", () => {
    const html = renderLinkMetrics(linkMetricsFixture(), learned());
    expect(html).toContain('fill="#d7191c"');
    expect(html).toContain('fill="#1faa00"');
    // unobserved bins render neutral, not interpolated
    expect(html).toContain('class="bin-null"');
  });

  it("renders a sparkline per interface counter", () => {
    const html = renderLinkMetrics(linkMetricsFixture(), learned());
    expect(html).toContain("192.0.2.1");
    expect(html).toContain("192.0.2.2");
    for (const kind of ["utilization", "input_errors", "output_drops"]) {
      expect(html).toContain(`<figcaption>${kind}</figcaption>`);
    }
  });
});

describe("e2e tab", () => {
  it("renders a gap icon between fragments", () => {
    const html = renderE2ETab(e2eGapFixture(), learned());
    const icons = html.match(/class="gap-icon"/g) ?? [];
    expect(icons.length).toBe(1);
    expect(html).toContain("CERN-DE-KIT-LHCOPN-001.dp2 .. CERN-DE-KIT-LHCOPN-001.dp3");
  });

  it("stacks one row per protection member", () => {
    const html = renderE2ETab(e2eGapFixture(), learned());
    const rows = html.match(/class="e2e-entry/g) ?? [];
    expect(rows.length).toBe(2);
  });

  it("renders each section as a colored box in path order", () => {
    const html = renderE2ETab(e2eGapFixture(), learned());
    const boxes = html.match(/class="section-box"/g) ?? [];
    expect(boxes.length).toBe(5); // 2 torn + 3 intact
    const intact = html.indexOf("CERN-DE-KIT-LHCOPN-002.dp1");
    const next = html.indexOf("CERN-DE-KIT-LHCOPN-002.dp2");
    expect(intact).toBeGreaterThan(-1);
    expect(next).toBeGreaterThan(intact);
  });

  it("flags incomplete reconstruction", () => {
    const html = renderE2ETab(e2eGapFixture(), learned());
    expect(html).toContain("incomplete");
    expect(html).toContain("has unknown");
  });

  it("absent members get an empty state, not a fabricated view", () => {
    const payload = e2eGapFixture();
    payload.e2e[1] = { e2e_link_id: payload.e2e[1].e2e_link_id, present: false, view: null };
    const html = renderE2ETab(payload, learned());
    expect(html).toContain("Not reported this cycle.");
  });
});

describe("state banners", () => {
  it("not-ready banner", () => {
    expect(renderNotReady()).toContain('data-state="notready"');
  });

  it("empty state escapes its message", () => {
    expect(renderEmptyState("<b>x</b>")).toContain("&lt;b&gt;");
  });
});
