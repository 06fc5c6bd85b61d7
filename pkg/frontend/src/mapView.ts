/**
 * Render model for the region map: population heat, district boundaries,
 * facility markers, and the covered-cell overlay for the selected year.
 *
 * The overlay is exactly the covered-cell union the service returns for
 * the plan's first t years; the browser never recomputes reachability.
 */

import { PlannerClient } from "./api";
import {
  Cell,
  cellKey,
  CoverageResponse,
  parseAlpha,
  PlanResult,
  ScenarioDetail,
} from "./types";

export interface MapLayers {
  population?: number[][];
  districts?: number[][];
}

export interface FacilityMarker {
  cell: Cell;
  kind: "existing" | "planned";
  year?: number;
}

/** A cell edge to stroke because the district changes across it. */
export interface BoundarySegment {
  cell: Cell;
  edge: "right" | "bottom";
}

export interface MapViewModel {
  rows: number;
  cols: number;
  year: number;
  heat: number[][] | null;
  boundaries: BoundarySegment[];
  facilities: FacilityMarker[];
  covered: Set<string> | null;
  missing: string[];
}

export interface MapViewOptions {
  year: number;
  result?: PlanResult | null;
  coverage?: CoverageResponse | null;
}

/** Log-scale shades in [0, 1], so dense clusters do not wash out the map. */
export function heatShades(population: number[][]): number[][] {
  let top = 0;
  for (const row of population) {
    for (const v of row) top = Math.max(top, v);
  }
  const scale = top > 0 ? Math.log1p(top) : 1;
  return population.map((row) => row.map((v) => Math.log1p(Math.max(v, 0)) / scale));
}

export function districtBoundaries(districts: number[][]): BoundarySegment[] {
  const out: BoundarySegment[] = [];
  for (let r = 0; r < districts.length; r += 1) {
    for (let c = 0; c < districts[r].length; c += 1) {
      if (c + 1 < districts[r].length && districts[r][c] !== districts[r][c + 1]) {
        out.push({ cell: [r, c], edge: "right" });
      }
      if (r + 1 < districts.length && districts[r][c] !== districts[r + 1][c]) {
        out.push({ cell: [r, c], edge: "bottom" });
      }
    }
  }
  return out;
}

/** Facilities standing in year t: existing ones plus picks from years 1..t. */
export function facilitiesForYear(
  scenario: ScenarioDetail,
  result: PlanResult | null | undefined,
  year: number
): FacilityMarker[] {
  const out: FacilityMarker[] = scenario.existing.map((cell) => ({
    cell,
    kind: "existing" as const,
  }));
  if (result) {
    for (const row of result.years) {
      if (row.year > year) continue;
      for (const cell of row.cells) {
        out.push({ cell, kind: "planned", year: row.year });
      }
    }
  }
  return out;
}

/** Plan picks from years 1..t in pick order, for the coverage query. */
export function coverageCellsForYear(result: PlanResult, year: number): Cell[] {
  const out: Cell[] = [];
  for (const row of result.years) {
    if (row.year <= year) out.push(...row.cells);
  }
  return out;
}

/** Ask the service which cells the first t years of a plan cover. */
export async function loadCoverage(
  client: PlannerClient,
  sid: string,
  result: PlanResult,
  year: number
): Promise<CoverageResponse | null> {
  const cells = coverageCellsForYear(result, year);
  if (cells.length === 0) return null;
  return client.getCoverage(sid, cells);
}

export function buildMapView(
  scenario: ScenarioDetail,
  layers: MapLayers,
  options: MapViewOptions
): MapViewModel {
  const missing: string[] = [];
  let heat: number[][] | null = null;
  if (layers.population) {
    heat = heatShades(layers.population);
  } else {
    missing.push("population");
  }
  let boundaries: BoundarySegment[] = [];
  if (layers.districts) {
    boundaries = districtBoundaries(layers.districts);
  } else {
    missing.push("districts");
  }
  const covered = options.coverage
    ? new Set(options.coverage.union.map(cellKey))
    : null;
  return {
    rows: scenario.rows,
    cols: scenario.cols,
    year: options.year,
    heat,
    boundaries,
    facilities: facilitiesForYear(scenario, options.result, options.year),
    covered,
    missing,
  };
}

export interface RunComparison {
  year: number;
  leftValue: number;
  rightValue: number;
  deltaValue: number;
  leftAlpha: number | null;
  rightAlpha: number | null;
  deltaAlpha: number | null;
}

/** Side-by-side deltas for two runs at year t, from their result payloads. */
export function compareRuns(left: PlanResult, right: PlanResult, year: number): RunComparison {
  const a = left.years.find((row) => row.year === year);
  const b = right.years.find((row) => row.year === year);
  if (!a || !b) {
    throw new RangeError(`year ${year} missing from a result`);
  }
  const leftAlpha = parseAlpha(a.alpha_min);
  const rightAlpha = parseAlpha(b.alpha_min);
  let deltaAlpha: number | null = null;
  if (leftAlpha !== null && rightAlpha !== null) {
    deltaAlpha =
      leftAlpha === rightAlpha ? 0 : rightAlpha - leftAlpha;
  }
  return {
    year,
    leftValue: a.value,
    rightValue: b.value,
    deltaValue: b.value - a.value,
    leftAlpha,
    rightAlpha,
    deltaAlpha,
  };
}
