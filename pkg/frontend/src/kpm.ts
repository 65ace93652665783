/** Rolling per-gNB KPM series assembled from stream events. */

import type { KpmPayload, KpmReportEvent, StreamEvent } from "./types.js";

export interface KpmPoint {
  sim_time_ms: number;
  /** sum of per-UE spectral efficiency at this report, bps/Hz */
  throughput: number;
  connected_ues: number;
}

export function isKpmReport(ev: StreamEvent): ev is KpmReportEvent {
  return (
    ev.kind === "KPM_REPORT" &&
    typeof (ev as KpmReportEvent).payload === "object" &&
    (ev as KpmReportEvent).payload !== null
  );
}

export function cellThroughput(payload: KpmPayload): number {
  return payload.per_ue.reduce((acc, u) => acc + u.throughput_bps_per_hz, 0);
}

export class KpmHistory {
  private series = new Map<string, KpmPoint[]>();

  constructor(private readonly limit = 120) {}

  add(ev: StreamEvent): boolean {
    if (!isKpmReport(ev)) return false;
    const point: KpmPoint = {
      sim_time_ms: ev.payload.sim_time_ms,
      throughput: cellThroughput(ev.payload),
      connected_ues: ev.payload.connected_ue_count,
    };
    let points = this.series.get(ev.payload.gnb_id) ?? [];
    const last = points[points.length - 1];
    if (last) {
      // replayed duplicate: drop; clock went backwards: scenario restarted
      if (point.sim_time_ms === last.sim_time_ms) return false;
      if (point.sim_time_ms < last.sim_time_ms) points = [];
    }
    points.push(point);
    if (points.length > this.limit) points.splice(0, points.length - this.limit);
    this.series.set(ev.payload.gnb_id, points);
    return true;
  }

  gnbs(): string[] {
    return [...this.series.keys()].sort();
  }

  points(gnbId: string): KpmPoint[] {
    return this.series.get(gnbId) ?? [];
  }

  /** y-axis upper bound covering every series (min 1 to avoid a flat chart). */
  maxThroughput(): number {
    let max = 1;
    for (const points of this.series.values()) {
      for (const p of points) if (p.throughput > max) max = p.throughput;
    }
    return max;
  }

  clear(): void {
    this.series.clear();
  }
}
