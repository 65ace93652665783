/** Dashboard wiring: catalog table, report drawer, live RIC map and KPM
 * chart. State comes from polling; the SSE stream nudges refreshes and feeds
 * the KPM series. */

import { ApiError, StoreApi } from "./api.js";
import {
  fmtMtypes,
  fmtSimTime,
  fmtThroughput,
  severityClass,
  shortId,
  stateBadgeClass,
  verdictClass,
} from "./format.js";
import { KpmHistory } from "./kpm.js";
import { drawScene, gnbColor } from "./map.js";
import { openEventStream } from "./sse.js";
import type { Report, ScenarioState, StreamEvent, XAppDetail } from "./types.js";

const api = new StoreApi("");
const kpm = new KpmHistory();

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

let selectedId: string | null = null;
let feed: StreamEvent[] = [];

// --- catalog ---------------------------------------------------------------

async function refreshCatalog(): Promise<void> {
  const q = ($("search") as HTMLInputElement).value.trim();
  const state = ($("state-filter") as HTMLSelectElement).value;
  const xapps = await api.listXapps({
    q: q || undefined,
    state: state || undefined,
  });
  const tbody = $("catalog-body");
  tbody.innerHTML = "";
  for (const x of xapps) {
    const tr = document.createElement("tr");
    tr.className = x.id === selectedId ? "selected" : "";
    tr.innerHTML = `
      <td><code>${shortId(x.id)}</code></td>
      <td>${x.name}</td>
      <td>${x.version}</td>
      <td><span class="badge ${stateBadgeClass(x.state)}">${x.state}</span></td>
      <td class="actions"></td>`;
    tr.addEventListener("click", () => selectXapp(x.id));
    const actions = tr.querySelector(".actions") as HTMLElement;
    if (x.state === "AVAILABLE") {
      actions.appendChild(actionButton("deploy", () => api.deploy(x.id)));
    } else if (x.state === "DEPLOYED") {
      actions.appendChild(actionButton("undeploy", () => api.undeploy(x.id)));
    }
    tbody.appendChild(tr);
  }
  $("catalog-empty").style.display = xapps.length ? "none" : "block";
}

function actionButton(label: string, action: () => Promise<unknown>): HTMLElement {
  const btn = document.createElement("button");
  btn.textContent = label;
  btn.addEventListener("click", async (ev) => {
    ev.stopPropagation();
    btn.disabled = true;
    try {
      await action();
    } catch (err) {
      showError(err);
    } finally {
      btn.disabled = false;
      void refreshCatalog();
      void refreshRic();
    }
  });
  return btn;
}

async function selectXapp(id: string): Promise<void> {
  selectedId = id;
  let detail: XAppDetail;
  try {
    detail = await api.getXapp(id);
  } catch (err) {
    showError(err);
    return;
  }
  $("detail-title").textContent = `${detail.name} ${detail.version}`;
  $("detail-meta").innerHTML = detail.manifest
    ? `<dl>
        <dt>author</dt><dd>${detail.manifest.author}</dd>
        <dt>license</dt><dd>${detail.manifest.license}</dd>
        <dt>rx mtypes</dt><dd>${fmtMtypes(detail.manifest.rx_mtypes)}</dd>
        <dt>tx mtypes</dt><dd>${fmtMtypes(detail.manifest.tx_mtypes)}</dd>
      </dl>`
    : "<p>manifest not parsed (submission was rejected before validation)</p>";
  await renderReport(id);
  void refreshCatalog();
}

async function renderReport(id: string): Promise<void> {
  const panel = $("report-panel");
  let report: Report;
  try {
    report = await api.getReport(id);
  } catch (err) {
    panel.innerHTML =
      err instanceof ApiError && err.status === 404
        ? "<p>no conformance report yet</p>"
        : `<p class="error">${String(err)}</p>`;
    return;
  }
  const rows = report.checks
    .map(
      (c) => `<tr class="${severityClass(c.severity)}">
        <td>${c.code}</td><td>${c.severity}</td><td>${c.detail}</td>
        <td>${c.evidence.length ? `<details><summary>${c.evidence.length}</summary>
          <pre>${JSON.stringify(c.evidence, null, 1)}</pre></details>` : "—"}</td>
      </tr>`,
    )
    .join("");
  panel.innerHTML = `
    <p>verdict <span class="badge ${verdictClass(report.verdict)}">${report.verdict}</span>
       <code>${report.report_id}</code></p>
    <table><thead><tr><th>check</th><th>severity</th><th>detail</th><th>evidence</th></tr></thead>
    <tbody>${rows}</tbody></table>`;
}

// --- RIC view --------------------------------------------------------------

async function refreshRic(): Promise<void> {
  let state: ScenarioState;
  try {
    state = await api.scenarioState();
  } catch {
    return; // no scenario loaded yet
  }
  $("sim-clock").textContent = fmtSimTime(state.sim_time_ms);
  $("sim-running").textContent = state.running ? "running" : "paused";

  const canvas = $("map") as unknown as HTMLCanvasElement;
  const ctx = canvas.getContext("2d");
  if (ctx) drawScene(ctx, state, canvas.width, canvas.height);

  const status = await api.ricStatus().catch(() => null);
  if (status) {
    $("ric-xapps").innerHTML = status.running_xapps.length
      ? status.running_xapps
          .map(
            (x) =>
              `<li><code>${x.endpoint_id}</code> rx ${sumCounts(x.observed_rx)} / tx ${sumCounts(x.observed_tx)}</li>`,
          )
          .join("")
      : "<li>none deployed</li>";
  }
  drawKpmChart();
}

function sumCounts(counts: Record<string, number>): number {
  return Object.values(counts).reduce((a, b) => a + b, 0);
}

function drawKpmChart(): void {
  const canvas = $("kpm-chart") as unknown as HTMLCanvasElement;
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const { width, height } = canvas;
  ctx.clearRect(0, 0, width, height);
  const gnbs = kpm.gnbs();
  if (!gnbs.length) {
    ctx.fillStyle = "#8b949e";
    ctx.font = "12px sans-serif";
    ctx.fillText("no KPM reports yet — deploy an xApp and run the scenario", 12, height / 2);
    return;
  }
  const maxY = kpm.maxThroughput();
  const allTimes = gnbs.flatMap((g) => kpm.points(g).map((p) => p.sim_time_ms));
  const tMin = Math.min(...allTimes);
  const tMax = Math.max(...allTimes, tMin + 1);
  const pad = 28;
  const sx = (t: number) => pad + ((t - tMin) / (tMax - tMin)) * (width - 2 * pad);
  const sy = (v: number) => height - pad - (v / maxY) * (height - 2 * pad);

  ctx.strokeStyle = "#30363d";
  ctx.strokeRect(pad, pad, width - 2 * pad, height - 2 * pad);
  let legendX = pad;
  for (const gnb of gnbs) {
    const points = kpm.points(gnb);
    ctx.strokeStyle = gnbColor(gnbs, gnb);
    ctx.beginPath();
    points.forEach((p, i) => {
      const x = sx(p.sim_time_ms);
      const y = sy(p.throughput);
      if (i === 0) ctx.moveTo(x, y);
      else ctx.lineTo(x, y);
    });
    ctx.stroke();
    ctx.fillStyle = gnbColor(gnbs, gnb);
    const last = points[points.length - 1];
    ctx.font = "11px sans-serif";
    ctx.fillText(`${gnb} ${last ? fmtThroughput(last.throughput) : ""}`, legendX, 16);
    legendX += 150;
  }
}

// --- event feed ------------------------------------------------------------

function pushFeed(ev: StreamEvent): void {
  if (ev.kind === "STREAM_OPEN" || ev.kind === "MOVE") return;
  feed.unshift(ev);
  feed = feed.slice(0, 40);
  $("event-feed").innerHTML = feed
    .map((e) => {
      const t = typeof e.sim_time_ms === "number" ? fmtSimTime(e.sim_time_ms) : "";
      return `<li><span class="feed-kind">${e.kind}</span> <span class="feed-t">${t}</span> ${feedDetail(e)}</li>`;
    })
    .join("");
}

function feedDetail(e: StreamEvent): string {
  switch (e.kind) {
    case "LIFECYCLE":
      return `<code>${shortId(String(e.id ?? ""))}</code> ${e.from} → ${e.to}`;
    case "HANDOVER":
      return `${e.ue}: ${e.from} → ${e.to}`;
    case "KPM_REPORT":
      return `${e.gnb}`;
    case "XAPP_DEPLOYED":
    case "XAPP_UNDEPLOYED":
    case "XAPP_DIED":
      return `<code>${shortId(String(e.record_id ?? ""))}</code>`;
    default:
      return "";
  }
}

function showError(err: unknown): void {
  const box = $("error-box");
  box.textContent = err instanceof Error ? err.message : String(err);
  box.style.display = "block";
  setTimeout(() => (box.style.display = "none"), 5000);
}

// --- bootstrap -------------------------------------------------------------

function wireControls(): void {
  $("search").addEventListener("input", () => void refreshCatalog());
  $("state-filter").addEventListener("change", () => void refreshCatalog());
  $("btn-start").addEventListener("click", () =>
    api.startScenario().then(refreshRic).catch(showError),
  );
  $("btn-stop").addEventListener("click", () =>
    api.stopScenario().then(refreshRic).catch(showError),
  );
  $("btn-step").addEventListener("click", () =>
    api.stepScenario(1).then(refreshRic).catch(showError),
  );

  const upload = $("upload") as HTMLInputElement;
  upload.addEventListener("change", async () => {
    const file = upload.files?.[0];
    if (!file) return;
    try {
      const summary = await api.submit(await file.arrayBuffer());
      await selectXapp(summary.id);
    } catch (err) {
      showError(err);
    } finally {
      upload.value = "";
    }
  });
}

export function start(): void {
  wireControls();
  openEventStream(
    "/events/stream",
    (ev) => {
      kpm.add(ev);
      pushFeed(ev);
      if (ev.kind === "LIFECYCLE") {
        void refreshCatalog();
        if (selectedId && ev.id === selectedId) void renderReport(selectedId);
      }
    },
    (connected) => {
      $("stream-dot").className = connected ? "dot dot-on" : "dot dot-off";
    },
  );
  void refreshCatalog();
  void refreshRic();
  setInterval(() => void refreshRic(), 1000);
  setInterval(() => void refreshCatalog(), 5000);
}

start();
