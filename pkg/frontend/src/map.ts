/** Geometry + drawing for the arena map. The coordinate transform is kept
 * separate from canvas work so it can be tested headlessly. */

import type { ScenarioState } from "./types.js";

export interface Viewport {
  scale: number;
  offsetX: number;
  offsetY: number;
}

const MARGIN = 24;

/** Uniform world→canvas scale that fits the arena with a margin. */
export function fitViewport(
  arena: { width_m: number; height_m: number },
  canvasW: number,
  canvasH: number,
): Viewport {
  const usableW = Math.max(canvasW - 2 * MARGIN, 1);
  const usableH = Math.max(canvasH - 2 * MARGIN, 1);
  const scale = Math.min(usableW / arena.width_m, usableH / arena.height_m);
  return {
    scale,
    offsetX: (canvasW - arena.width_m * scale) / 2,
    offsetY: (canvasH - arena.height_m * scale) / 2,
  };
}

export function toCanvas(
  vp: Viewport,
  pt: { x_m: number; y_m: number },
): { x: number; y: number } {
  return { x: vp.offsetX + pt.x_m * vp.scale, y: vp.offsetY + pt.y_m * vp.scale };
}

const GNB_COLORS = ["#2f81f7", "#3fb950", "#d29922", "#f85149", "#a371f7"];

export function gnbColor(gnbs: string[], gnbId: string): string {
  const idx = gnbs.indexOf(gnbId);
  return GNB_COLORS[(idx >= 0 ? idx : gnbs.length) % GNB_COLORS.length];
}

export function drawScene(
  ctx: CanvasRenderingContext2D,
  state: ScenarioState,
  canvasW: number,
  canvasH: number,
): void {
  const vp = fitViewport(state.arena, canvasW, canvasH);
  const gnbIds = state.gnbs.map((g) => g.id).sort();

  ctx.clearRect(0, 0, canvasW, canvasH);
  ctx.strokeStyle = "#30363d";
  ctx.strokeRect(
    vp.offsetX,
    vp.offsetY,
    state.arena.width_m * vp.scale,
    state.arena.height_m * vp.scale,
  );

  for (const gnb of state.gnbs) {
    const p = toCanvas(vp, gnb);
    ctx.fillStyle = gnbColor(gnbIds, gnb.id);
    ctx.beginPath();
    ctx.moveTo(p.x, p.y - 8);
    ctx.lineTo(p.x - 7, p.y + 6);
    ctx.lineTo(p.x + 7, p.y + 6);
    ctx.closePath();
    ctx.fill();
    ctx.fillStyle = "#8b949e";
    ctx.font = "11px sans-serif";
    ctx.fillText(gnb.id, p.x + 9, p.y + 4);
  }

  for (const [ueId, pos] of Object.entries(state.ue_positions)) {
    const p = toCanvas(vp, pos);
    const serving = state.serving_map[ueId];
    ctx.fillStyle = serving ? gnbColor(gnbIds, serving) : "#8b949e";
    ctx.beginPath();
    ctx.arc(p.x, p.y, 5, 0, Math.PI * 2);
    ctx.fill();
    ctx.fillStyle = "#c9d1d9";
    ctx.font = "11px sans-serif";
    ctx.fillText(`${ueId} → ${serving ?? "?"}`, p.x + 8, p.y - 6);
  }
}
