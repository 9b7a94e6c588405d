/** Payload shapes of the monitoring API, mirrored field by field. */

export interface NodeInfo {
  id: string;
  tier: number;
  x: number;
  y: number;
}

export interface E2ESummary {
  operational: string;
  administrative: string;
  uncertain: boolean;
  gaps: number;
}

export interface OverviewLink {
  id: string;
  endpoints: [string, string];
  status: string;
  color: string;
  hex: string;
  protected: boolean;
  e2e: Record<string, E2ESummary | null>;
}

export interface Overview {
  cycle_index: number;
  cycle_start: number;
  period: number;
  poll_errors: Record<string, string>;
  nodes: NodeInfo[];
  links: OverviewLink[];
}

export interface Window {
  start: number;
  end: number;
  step: number;
}

export interface StatusTimeline {
  timestamps: number[];
  statuses: (string | null)[];
}

export type CounterSeries = (number | null)[];

export interface LinkMetrics {
  link_id: string;
  cycle_index: number;
  window: Window;
  status_timeline: StatusTimeline;
  interfaces: Record<string, Record<string, CounterSeries>>;
}

export interface Triplet {
  min: number;
  med: number;
  max: number;
}

export interface HopSegment {
  start: number;
  end: number;
  hop_count: number;
  route: string[];
}

export interface Direction {
  src: string;
  dst: string;
  series: Record<string, (Triplet | number | null)[]>;
  hop_segments: HopSegment[];
}

export interface Bundle {
  link_id: string;
  endpoints: [string, string];
  directions: Direction[];
}

export interface NodeMetrics {
  node_id: string;
  cycle_index: number;
  window: Window;
  throughput_window: Window;
  bundles: Bundle[];
}

export interface Section {
  dp_a: string;
  dp_b: string;
  operational: string;
  administrative: string;
  domains: string[];
}

export interface GapInfo {
  after: string;
  before: string;
}

export interface LinkView {
  e2e_link_id: string;
  fragments: Section[][];
  gaps: GapInfo[];
  aggregated_operational: string;
  aggregated_administrative: string;
  has_unknown: boolean;
  fully_reconstructed: boolean;
  diagnostics: { kind: string; detail: string }[];
}

export interface E2EEntry {
  e2e_link_id: string;
  present: boolean;
  view: LinkView | null;
}

export interface E2EPayload {
  link_id: string;
  cycle_index: number;
  cycle_start: number;
  e2e: E2EEntry[];
}

export interface UiSelection {
  kind: "node" | "link";
  id: string;
}
