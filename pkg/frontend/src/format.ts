/** Small display helpers shared by the dashboard views. */

const STATE_CLASSES: Record<string, string> = {
  SUBMITTED: "badge-muted",
  VALIDATING: "badge-busy",
  VALIDATION_FAILED: "badge-bad",
  TESTING: "badge-busy",
  TEST_FAILED: "badge-bad",
  AVAILABLE: "badge-good",
  DEPLOYED: "badge-deployed",
  RETIRED: "badge-muted",
};

export function stateBadgeClass(state: string): string {
  return STATE_CLASSES[state] ?? "badge-muted";
}

export function verdictClass(verdict: string): string {
  return verdict === "PASS" ? "badge-good" : "badge-bad";
}

export function severityClass(severity: string): string {
  if (severity === "error") return "sev-error";
  if (severity === "warning") return "sev-warning";
  return "sev-info";
}

export function fmtSimTime(ms: number): string {
  return `${(ms / 1000).toFixed(1)} s`;
}

export function fmtMtypes(mtypes: number[]): string {
  return mtypes.length ? mtypes.join(", ") : "—";
}

export function shortId(id: string, len = 8): string {
  return id.length > len ? id.slice(0, len) + "…" : id;
}

export function fmtThroughput(bpsPerHz: number): string {
  return `${bpsPerHz.toFixed(2)} bps/Hz`;
}
