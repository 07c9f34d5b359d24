/**
 * Canvas drawing for the annotator.
 *
 * The canvas is sized to the image's natural pixel grid (CSS scales it up),
 * so every coordinate here is an image pixel and the cutoff handles land
 * exactly on the rows the session quantizes to.
 */

import { sectionBoundaries } from "./session";

export interface SceneState {
  k: number;
  /** Normalized cutoffs, one per section (0 = top, 1 = bottom). */
  cutoffs: readonly number[];
  /** Index of the section the keyboard currently controls. */
  selected: number;
}

/** Paint the frame, the section grid, and one cutoff handle per section. */
export function drawScene(
  ctx: CanvasRenderingContext2D,
  image: CanvasImageSource,
  state: SceneState,
): void {
  const { width, height } = ctx.canvas;
  ctx.clearRect(0, 0, width, height);
  ctx.drawImage(image, 0, 0, width, height);

  const edges = sectionBoundaries(width, state.k);
  for (let i = 0; i < state.k; i++) {
    const x0 = edges[i] ?? 0;
    const x1 = edges[i + 1] ?? width;
    const y = Math.round((state.cutoffs[i] ?? 0) * height);
    // Tint the region the annotation calls traversable (below the cutoff).
    ctx.fillStyle =
      i === state.selected ? "rgba(80, 220, 100, 0.35)" : "rgba(80, 220, 100, 0.18)";
    ctx.fillRect(x0, y, x1 - x0, height - y);
    ctx.strokeStyle = i === state.selected ? "#ffffff" : "rgba(255, 255, 255, 0.7)";
    ctx.lineWidth = i === state.selected ? 2 : 1;
    ctx.beginPath();
    ctx.moveTo(x0, y + 0.5);
    ctx.lineTo(x1, y + 0.5);
    ctx.stroke();
  }

  ctx.strokeStyle = "rgba(0, 0, 0, 0.45)";
  ctx.lineWidth = 1;
  for (let i = 1; i < state.k; i++) {
    const x = edges[i] ?? 0;
    ctx.beginPath();
    ctx.moveTo(x + 0.5, 0);
    ctx.lineTo(x + 0.5, height);
    ctx.stroke();
  }

  const sx0 = edges[state.selected] ?? 0;
  const sx1 = edges[state.selected + 1] ?? width;
  ctx.strokeStyle = "#ffd84d";
  ctx.lineWidth = 2;
  ctx.strokeRect(sx0 + 1, 1, sx1 - sx0 - 2, height - 2);
}

/** Section index under image-pixel column x (clamped to the valid range). */
export function sectionAt(x: number, width: number, k: number): number {
  const edges = sectionBoundaries(width, k);
  for (let i = 0; i < k; i++) {
    const right = edges[i + 1] ?? width;
    if (x < right) return i;
  }
  return k - 1;
}
