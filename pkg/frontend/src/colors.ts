import type { Overview } from "./types.js";

/**
 * Status-name to hex mapping learned from API payloads.
 *
 * The server is the single source of truth for colors; the client only
 * remembers pairs it has already been shown, so timeline cells and e2e
 * sections reuse exactly the hexes the overview delivered. Anything never
 * seen renders neutral.
 */
export class ColorBook {
  private hexes = new Map<string, string>();

  learn(overview: Overview): void {
    for (const link of overview.links) {
      this.hexes.set(link.status, link.hex);
    }
  }

  hex(status: string | null | undefined): string {
    if (!status) return "#c9ced6";
    return this.hexes.get(status) ?? this.fallback(status);
  }

  /**
   * Raw operational states (UP/DEGRADED/...) appear in timelines before
   * every abstract status has been observed on some link. Map the common
   * aliases onto already-learned names rather than inventing hexes.
   */
  private fallback(status: string): string {
    const alias: Record<string, string> = {
      DEGRADED: "WARNING",
      NORMAL_OPERATION: "UP",
    };
    const mapped = alias[status];
    if (mapped) {
      const hex = this.hexes.get(mapped);
      if (hex) return hex;
    }
    return "#c9ced6";
  }

  known(): [string, string][] {
    return [...this.hexes.entries()];
  }
}
