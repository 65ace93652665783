import { describe, expect, it } from "vitest";
import { KpmHistory, cellThroughput, isKpmReport } from "../src/kpm.js";
import type { KpmPayload, StreamEvent } from "../src/types.js";

function report(gnb: string, t: number, throughputs: number[]): StreamEvent {
  const payload: KpmPayload = {
    gnb_id: gnb,
    period_ms: 2000,
    connected_ue_count: throughputs.length,
    per_ue: throughputs.map((thr, i) => ({
      ue_id: `ue-${i + 1}`,
      rsrp_dbm: -70,
      throughput_bps_per_hz: thr,
    })),
    subscription_id: "sub-1",
    sim_time_ms: t,
  };
  return { kind: "KPM_REPORT", sim_time_ms: t, gnb, payload };
}

describe("cellThroughput", () => {
  it("sums spectral efficiency over connected UEs", () => {
    const ev = report("gnb-1", 2000, [1.5, 2.5]);
    expect(cellThroughput((ev as { payload: KpmPayload }).payload)).toBeCloseTo(4.0);
  });

  it("is zero for an empty cell", () => {
    const ev = report("gnb-1", 2000, []);
    expect(cellThroughput((ev as { payload: KpmPayload }).payload)).toBe(0);
  });
});

describe("KpmHistory", () => {
  it("keeps one ordered series per gNB", () => {
    const h = new KpmHistory();
    h.add(report("gnb-1", 2000, [1]));
    h.add(report("gnb-2", 2000, [2]));
    h.add(report("gnb-1", 4000, [3]));
    expect(h.gnbs()).toEqual(["gnb-1", "gnb-2"]);
    expect(h.points("gnb-1").map((p) => p.sim_time_ms)).toEqual([2000, 4000]);
    expect(h.points("gnb-2")).toHaveLength(1);
  });

  it("ignores non-KPM events", () => {
    const h = new KpmHistory();
    expect(h.add({ kind: "HANDOVER" })).toBe(false);
    expect(h.add({ kind: "KPM_REPORT" })).toBe(false); // no payload
    expect(h.gnbs()).toEqual([]);
  });

  it("drops duplicate reports on stream replay", () => {
    const h = new KpmHistory();
    h.add(report("gnb-1", 2000, [1]));
    expect(h.add(report("gnb-1", 2000, [1]))).toBe(false);
    expect(h.points("gnb-1")).toHaveLength(1);
  });

  it("resets a series when the simulation clock restarts", () => {
    const h = new KpmHistory();
    h.add(report("gnb-1", 8000, [1]));
    h.add(report("gnb-1", 2000, [2])); // scenario was reloaded
    expect(h.points("gnb-1").map((p) => p.sim_time_ms)).toEqual([2000]);
  });

  it("bounds series length to the configured limit", () => {
    const h = new KpmHistory(5);
    for (let i = 1; i <= 12; i++) h.add(report("gnb-1", i * 1000, [i]));
    const points = h.points("gnb-1");
    expect(points).toHaveLength(5);
    expect(points[0].sim_time_ms).toBe(8000);
    expect(points[4].sim_time_ms).toBe(12000);
  });

  it("reports the max throughput across all series", () => {
    const h = new KpmHistory();
    h.add(report("gnb-1", 2000, [1.2]));
    h.add(report("gnb-2", 2000, [3.7, 1.0]));
    expect(h.maxThroughput()).toBeCloseTo(4.7);
  });

  it("isKpmReport guards on payload shape", () => {
    expect(isKpmReport(report("g", 1000, [1]))).toBe(true);
    expect(isKpmReport({ kind: "KPM_REPORT", payload: null } as unknown as StreamEvent)).toBe(false);
  });
});
