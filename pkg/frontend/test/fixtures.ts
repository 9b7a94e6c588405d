/** Mocked API payloads shaped like the real service's replies. */

import type {
  Bundle,
  E2EPayload,
  LinkMetrics,
  NodeMetrics,
  NodeInfo,
  Overview,
  OverviewLink,
  Triplet,
} from "../src/types.js";

export const HUB = "CERN";

export const SITES = [
  "CA-TRIUMF",
  "DE-KIT",
  "ES-PIC",
  "FR-CCIN2P3",
  "IT-INFN-CNAF",
  "NDGF",
  "NL-T1",
  "TW-ASGC",
  "UK-T1-RAL",
  "US-BNL",
  "US-FNAL",
];

const HEX: Record<string, string> = {
  UP: "#1faa00",
  WARNING: "#f5c211",
  DOWN: "#d7191c",
  UNKNOWN: "#2166ac",
  TOPOLOGY_UNKNOWN: "#c000c0",
};

const COLOR: Record<string, string> = {
  UP: "GREEN",
  WARNING: "YELLOW",
  DOWN: "RED",
  UNKNOWN: "BLUE",
  TOPOLOGY_UNKNOWN: "MAGENTA",
};

export const EPOCH = 1275868800;

export function linkId(site: string): string {
  return `${HUB}--${site}`;
}

export function e2eId(site: string, ordinal = 1): string {
  return `${HUB}-${site}-LHCOPN-00${ordinal}`;
}

function nodes(): NodeInfo[] {
  const out: NodeInfo[] = [{ id: HUB, tier: 0, x: 0.5, y: 0.5 }];
  SITES.forEach((site, i) => {
    const angle = (2 * Math.PI * i) / SITES.length;
    out.push({
      id: site,
      tier: 1,
      x: 0.5 + 0.38 * Math.cos(angle),
      y: 0.5 + 0.38 * Math.sin(angle),
    });
  });
  return out;
}

/** One of each color on the map: DOWN, UNKNOWN, MAGENTA, WARNING, rest UP. */
export function overviewFixture(): Overview {
  const statusFor = (site: string): string => {
    if (site === "UK-T1-RAL") return "DOWN";
    if (site === "NDGF") return "UNKNOWN";
    if (site === "TW-ASGC") return "TOPOLOGY_UNKNOWN";
    if (site === "DE-KIT") return "WARNING";
    return "UP";
  };
  const links: OverviewLink[] = SITES.map((site) => {
    const status = statusFor(site);
    const isProtected = site === "DE-KIT";
    const e2e: OverviewLink["e2e"] = {};
    if (status === "TOPOLOGY_UNKNOWN") {
      e2e[e2eId(site)] = null;
    } else {
      e2e[e2eId(site)] = {
        operational: status === "WARNING" ? "UP" : status,
        administrative: "NORMAL_OPERATION",
        uncertain: status === "UNKNOWN",
        gaps: 0,
      };
      if (isProtected) e2e[e2eId(site, 2)] = null;
    }
    return {
      id: linkId(site),
      endpoints: [HUB, site],
      status,
      color: COLOR[status],
      hex: HEX[status],
      protected: isProtected,
      e2e,
    };
  });
  return {
    cycle_index: 7,
    cycle_start: EPOCH + 7 * 300,
    period: 300,
    poll_errors: { NDGF: "connection refused" },
    nodes: nodes(),
    links,
  };
}

export function allUpOverview(): Overview {
  const base = overviewFixture();
  for (const link of base.links) {
    link.status = "UP";
    link.color = "GREEN";
    link.hex = HEX["UP"];
  }
  base.poll_errors = {};
  return base;
}

const triplet = (v: number): Triplet => ({ min: v - 1, med: v, max: v + 2 });

function directionSeries(bins: number): Bundle["directions"][number]["series"] {
  return {
    owd: Array.from({ length: bins }, (_, i) => (i % 7 === 0 ? null : triplet(20))),
    jitter: Array.from({ length: bins }, () => triplet(2)),
    loss: Array.from({ length: bins }, () => 0),
    throughput: [triplet(3e9), null, triplet(3.1e9)],
  };
}

export function nodeMetricsFixture(nodeId: string): NodeMetrics {
  const scoped = nodeId === HUB ? SITES : [SITES.find((s) => s === nodeId) ?? nodeId];
  const bins = 288;
  const start = EPOCH - 86100;
  const bundles: Bundle[] = scoped.map((site) => ({
    link_id: linkId(site),
    endpoints: [HUB, site],
    directions: [
      {
        src: HUB,
        dst: site,
        series: directionSeries(bins),
        hop_segments: [
          { start, end: start + 43200, hop_count: 3, route: [HUB, "rtr-1", site] },
          {
            start: start + 43200,
            end: start + 86400,
            hop_count: 4,
            route: [HUB, "rtr-1", "rtr-2", site],
          },
        ],
      },
      {
        src: site,
        dst: HUB,
        series: directionSeries(bins),
        hop_segments: [],
      },
    ],
  }));
  return {
    node_id: nodeId,
    cycle_index: 7,
    window: { start, end: start + 86400, step: 300 },
    throughput_window: { start: EPOCH - 57600, end: EPOCH + 28800, step: 28800 },
    bundles,
  };
}

export function linkMetricsFixture(): LinkMetrics {
  const bins = 288;
  const statuses: (string | null)[] = Array.from({ length: bins }, () => null);
  statuses[bins - 1] = "DOWN";
  statuses[bins - 2] = "UP";
  const timestamps = Array.from({ length: bins }, (_, i) => EPOCH - 86100 + i * 300);
  const counters = Array.from({ length: bins }, (_, i) =>
    i % 11 === 0 ? null : 1e9 + i * 1e6,
  );
  return {
    link_id: linkId("UK-T1-RAL"),
    cycle_index: 7,
    window: { start: EPOCH - 86100, end: EPOCH + 300, step: 300 },
    status_timeline: { timestamps, statuses },
    interfaces: {
      "192.0.2.1": { utilization: counters, input_errors: counters, output_drops: counters },
      "192.0.2.2": { utilization: counters, input_errors: counters, output_drops: counters },
    },
  };
}

/** Protection pair: first member torn in two with one gap, second intact. */
export function e2eGapFixture(): E2EPayload {
  const site = "DE-KIT";
  const first = e2eId(site, 1);
  const second = e2eId(site, 2);
  const section = (id: string, n: number, operational: string, domains: string[]) => ({
    dp_a: `${id}.dp${n}`,
    dp_b: `${id}.dp${n + 1}`,
    operational,
    administrative: "NORMAL_OPERATION",
    domains,
  });
  return {
    link_id: linkId(site),
    cycle_index: 7,
    cycle_start: EPOCH + 7 * 300,
    e2e: [
      {
        e2e_link_id: first,
        present: true,
        view: {
          e2e_link_id: first,
          fragments: [
            [section(first, 1, "UP", [HUB])],
            [section(first, 3, "UP", [site])],
          ],
          gaps: [{ after: `${first}.dp2`, before: `${first}.dp3` }],
          aggregated_operational: "UP",
          aggregated_administrative: "NORMAL_OPERATION",
          has_unknown: true,
          fully_reconstructed: false,
          diagnostics: [],
        },
      },
      {
        e2e_link_id: second,
        present: true,
        view: {
          e2e_link_id: second,
          fragments: [
            [
              section(second, 1, "UP", [HUB]),
              section(second, 2, "UP", [HUB, site]),
              section(second, 3, "UP", [site]),
            ],
          ],
          gaps: [],
          aggregated_operational: "UP",
          aggregated_administrative: "NORMAL_OPERATION",
          has_unknown: false,
          fully_reconstructed: true,
          diagnostics: [],
        },
      },
    ],
  };
}
