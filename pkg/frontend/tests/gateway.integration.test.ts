/** End-to-end check against a real gateway process: everything the dashboard
 * does (catalog, report, deploy, scenario control, SSE) over a live socket. */

import { spawn, spawnSync, type ChildProcess } from "node:child_process";
import { mkdtempSync, readFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join, resolve } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";
import { StoreApi } from "../src/api.js";
import { KpmHistory } from "../src/kpm.js";
import { SseParser } from "../src/sse.js";
import type { StreamEvent } from "../src/types.js";

const REPO_ROOT = resolve(__dirname, "..", "..");

let server: ChildProcess;
let base: string;
let api: StoreApi;

async function waitFor<T>(
  fn: () => Promise<T>,
  pred: (v: T) => boolean,
  timeoutMs = 30000,
): Promise<T> {
  const deadline = Date.now() + timeoutMs;
  let last: T;
  for (;;) {
    last = await fn();
    if (pred(last)) return last;
    if (Date.now() > deadline) throw new Error(`timeout; last=${JSON.stringify(last)}`);
    await new Promise((r) => setTimeout(r, 200));
  }
}

beforeAll(async () => {
  const workDir = mkdtempSync(join(tmpdir(), "xappstore-ui-"));
  server = spawn(
    "python3",
    ["-m", "xappstore.cli", "serve", "--port", "0", "--data-dir", join(workDir, "data")],
    { cwd: REPO_ROOT, stdio: ["ignore", "pipe", "pipe"] },
  );
  const port = await new Promise<number>((resolvePort, reject) => {
    let out = "";
    const timer = setTimeout(() => reject(new Error(`server never announced a port: ${out}`)), 20000);
    server.stdout!.on("data", (chunk: Buffer) => {
      out += chunk.toString();
      const m = out.match(/(\d+)/);
      if (m) {
        clearTimeout(timer);
        resolvePort(Number(m[1]));
      }
    });
    server.on("exit", (code) => reject(new Error(`server exited early (${code})`)));
  });
  base = `http://127.0.0.1:${port}`;
  api = new StoreApi(base);
  await waitFor(() => api.ricStatus().then(() => true).catch(() => false), (ok) => ok);
}, 60000);

afterAll(() => {
  server?.kill();
});

describe("dashboard against a live gateway", () => {
  let recordId: string;

  it("submits an archive and watches it reach AVAILABLE with a PASS report", async () => {
    const zipPath = join(tmpdir(), `kpm-monitor-${Date.now()}.zip`);
    const packed = spawnSync(
      "python3",
      ["-m", "xappstore.cli", "pack", "packages/kpm-monitor", "-o", zipPath],
      { cwd: REPO_ROOT },
    );
    expect(packed.status).toBe(0);

    const summary = await api.submit(readFileSync(zipPath));
    recordId = summary.id;
    // the async pipeline may already have picked it up
    expect(["SUBMITTED", "VALIDATING", "TESTING", "AVAILABLE"]).toContain(summary.state);

    const detail = await waitFor(
      () => api.getXapp(recordId),
      (d) => d.state === "AVAILABLE" || d.state.endsWith("FAILED"),
    );
    expect(detail.state).toBe("AVAILABLE");
    expect(detail.manifest?.name).toBe("kpm-monitor");

    const report = await api.getReport(recordId);
    expect(report.verdict).toBe("PASS");
    expect(report.checks.length).toBeGreaterThan(0);
  }, 60000);

  it("lists and filters the catalog the way the UI does", async () => {
    const available = await api.listXapps({ state: "AVAILABLE" });
    expect(available.map((x) => x.id)).toContain(recordId);
    const none = await api.listXapps({ q: "definitely-not-onboarded" });
    expect(none).toHaveLength(0);
  });

  it("deploys, observes KPM on the SSE stream, then undeploys", async () => {
    await api.deploy(recordId);
    const status = await api.ricStatus();
    expect(status.running_xapps.some((x) => x.record_id === recordId)).toBe(true);

    // consume the SSE stream while stepping the scenario
    const controller = new AbortController();
    const parser = new SseParser();
    const kpm = new KpmHistory();
    const events: StreamEvent[] = [];
    const streamDone = (async () => {
      const resp = await fetch(`${base}/events/stream`, { signal: controller.signal });
      const reader = resp.body!.getReader();
      const decoder = new TextDecoder();
      try {
        for (;;) {
          const { done, value } = await reader.read();
          if (done) break;
          for (const ev of parser.push(decoder.decode(value, { stream: true }))) {
            events.push(ev);
            kpm.add(ev);
          }
        }
      } catch {
        /* aborted */
      }
    })();

    await api.stepScenario(10); // 10 s of simulation, 2 s KPM cadence
    await waitFor(
      async () => kpm.gnbs(),
      (gnbs) => gnbs.length === 2,
      15000,
    );
    controller.abort();
    await streamDone;

    let totalThroughput = 0;
    for (const gnb of kpm.gnbs()) {
      expect(kpm.points(gnb).length).toBeGreaterThanOrEqual(4);
      for (const p of kpm.points(gnb)) totalThroughput += p.throughput;
    }
    // the single UE is served by one cell at a time; the serving cell reports
    // positive spectral efficiency, the idle one reports an empty cell
    expect(totalThroughput).toBeGreaterThan(0);
    expect(events.some((e) => e.kind === "STREAM_OPEN")).toBe(true);

    await api.undeploy(recordId);
    const after = await api.getXapp(recordId);
    expect(after.state).toBe("AVAILABLE");
  }, 60000);

  it("maps gateway refusals to typed errors the UI can show", async () => {
    const err = await api.getXapp("ffffffffffffffff").catch((e) => e);
    expect(err.status).toBe(404);
    expect(err.code).toBe("UNKNOWN_ID");
  });

  it("reports scenario state with everything the map needs", async () => {
    const state = await api.scenarioState();
    expect(state.arena.width_m).toBeGreaterThan(0);
    expect(state.gnbs.length).toBeGreaterThan(0);
    expect(Object.keys(state.ue_positions).length).toBeGreaterThan(0);
    for (const serving of Object.values(state.serving_map)) {
      expect(state.gnbs.map((g) => g.id)).toContain(serving);
    }
  });
});
