/**
 * Grid-cell canvas painter. Scenarios are abstract rasters at desk
 * scale, so cells are painted directly; there is no tile server.
 *
 * The surface is a structural subset of CanvasRenderingContext2D, which
 * keeps the painter testable without a DOM.
 */

import { cellKey } from "./types";
import { MapViewModel } from "./mapView";

export interface CellSurface {
  fillStyle: string;
  strokeStyle: string;
  lineWidth: number;
  fillRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  stroke(): void;
}

export interface PaintOptions {
  cellPx?: number;
}

export interface PaintCounts {
  heatRects: number;
  coveredRects: number;
  boundaryLines: number;
  facilityMarks: number;
}

const COVERED_FILL = "rgba(46, 125, 50, 0.45)";
const EXISTING_FILL = "#1a4f8a";
const PLANNED_FILL = "#d2691e";
const BOUNDARY_STROKE = "#222222";
const MISSING_FILL = "#d8d8d8";

function heatColor(shade: number): string {
  const warm = Math.round(235 * shade);
  return `rgb(${235}, ${235 - warm}, ${180 - Math.round(160 * shade)})`;
}

/** Paint a map view model; returns how many marks of each kind landed. */
export function paintGrid(
  surface: CellSurface,
  model: MapViewModel,
  options?: PaintOptions
): PaintCounts {
  const px = options?.cellPx ?? 16;
  const counts: PaintCounts = {
    heatRects: 0,
    coveredRects: 0,
    boundaryLines: 0,
    facilityMarks: 0,
  };

  for (let r = 0; r < model.rows; r += 1) {
    for (let c = 0; c < model.cols; c += 1) {
      surface.fillStyle = model.heat ? heatColor(model.heat[r][c]) : MISSING_FILL;
      surface.fillRect(c * px, r * px, px, px);
      counts.heatRects += 1;
    }
  }

  if (model.covered) {
    surface.fillStyle = COVERED_FILL;
    for (let r = 0; r < model.rows; r += 1) {
      for (let c = 0; c < model.cols; c += 1) {
        if (model.covered.has(cellKey([r, c]))) {
          surface.fillRect(c * px, r * px, px, px);
          counts.coveredRects += 1;
        }
      }
    }
  }

  surface.strokeStyle = BOUNDARY_STROKE;
  surface.lineWidth = 2;
  for (const segment of model.boundaries) {
    const [r, c] = segment.cell;
    surface.beginPath();
    if (segment.edge === "right") {
      surface.moveTo((c + 1) * px, r * px);
      surface.lineTo((c + 1) * px, (r + 1) * px);
    } else {
      surface.moveTo(c * px, (r + 1) * px);
      surface.lineTo((c + 1) * px, (r + 1) * px);
    }
    surface.stroke();
    counts.boundaryLines += 1;
  }

  const inset = Math.max(2, Math.floor(px / 4));
  for (const marker of model.facilities) {
    const [r, c] = marker.cell;
    surface.fillStyle = marker.kind === "existing" ? EXISTING_FILL : PLANNED_FILL;
    surface.fillRect(c * px + inset, r * px + inset, px - 2 * inset, px - 2 * inset);
    counts.facilityMarks += 1;
  }

  return counts;
}
