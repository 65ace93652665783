/** Shapes of the JSON documents the store gateway serves. */

export interface XAppSummary {
  id: string;
  name: string;
  version: string;
  state: string;
  submitted_at: number;
  updated_at: number;
  reports: string[];
  version_lineage: string[];
}

export interface Manifest {
  name: string;
  version: string;
  author: string;
  license: string;
  contact: string;
  rx_mtypes: number[];
  tx_mtypes: number[];
  service_models: string[];
  [key: string]: unknown;
}

export interface XAppDetail extends XAppSummary {
  manifest?: Manifest;
  deployed: boolean;
}

export interface Check {
  code: string;
  severity: "error" | "warning" | "info";
  detail: string;
  evidence: Record<string, unknown>[];
}

export interface Report {
  report_id: string;
  record_id: string;
  verdict: "PASS" | "FAIL";
  checks: Check[];
  started_at: number;
  finished_at: number;
}

export interface GnbPosition {
  id: string;
  x_m: number;
  y_m: number;
}

export interface ScenarioState {
  sim_time_ms: number;
  arena: { width_m: number; height_m: number };
  gnbs: GnbPosition[];
  ue_positions: Record<string, { x_m: number; y_m: number }>;
  serving_map: Record<string, string>;
  event_count: number;
  recent_events: Record<string, unknown>[];
  running: boolean;
}

export interface RunningXApp {
  record_id: string;
  endpoint_id: string;
  probe_state: Record<string, unknown>;
  observed_tx: Record<string, number>;
  observed_rx: Record<string, number>;
}

export interface RicStatus {
  sim_time_ms: number;
  running_xapps: RunningXApp[];
  subscriptions: Record<string, unknown>[];
  scenario_running: boolean;
}

export interface LogEntry {
  seq: number;
  sim_time_ms: number;
  mtype: number;
  source: string;
  delivered_to: string[];
  dropped: boolean;
}

export interface KpmPerUe {
  ue_id: string;
  rsrp_dbm: number;
  throughput_bps_per_hz: number;
}

export interface KpmPayload {
  gnb_id: string;
  period_ms: number;
  connected_ue_count: number;
  per_ue: KpmPerUe[];
  subscription_id: string;
  sim_time_ms: number;
}

/** One event on the /events/stream SSE channel. */
export type StreamEvent = { kind: string } & Record<string, unknown>;

export interface KpmReportEvent extends StreamEvent {
  kind: "KPM_REPORT";
  sim_time_ms: number;
  gnb: string;
  payload: KpmPayload;
}
