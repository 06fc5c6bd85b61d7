/**
 * Types mirroring the planning service's REST schema.
 *
 * Every numeric quantity the console displays originates in one of these
 * payloads; the browser never recomputes coverage or plans.
 */

export type Cell = [number, number];

export interface ScenarioSummary {
  id: string;
  name: string;
  rows: number;
  cols: number;
  years: number;
  districts: number;
}

export interface GridPage {
  name: string;
  year: number;
  offset: number;
  total_rows: number;
  rows: number[][];
}

export interface ScenarioDetail extends ScenarioSummary {
  budgets: number[];
  policy_mode: string;
  tau: number;
  cell_km: number;
  existing: Cell[];
  impassable: Cell[];
  candidates: Cell[] | null;
  advice: Record<string, Cell[]>;
  grid?: GridPage;
}

export interface GenerateSpec {
  seed?: number;
  rows?: number;
  cols?: number;
  districts?: number;
  years?: number;
  budget?: number;
}

export interface PlanRequestBody {
  policy: string;
  algorithm: string;
  budgets: number[] | null;
  use_advice: boolean;
}

export interface RefineRequestBody {
  year: number;
  advice: Cell[];
  permutations: number;
  seed: number;
}

export type JobState = "queued" | "running" | "done" | "failed";

export interface JobStatus {
  id: string;
  kind: "plan" | "refine";
  scenario_id: string;
  status: JobState;
  progress: number;
  error: string | null;
}

export interface PlanYearRow {
  year: number;
  cells: Cell[];
  value: number;
  alpha_min: string;
}

export interface PlanResult {
  scenario: string;
  algorithm: string;
  policy: string;
  budgets: number[];
  baseline: number;
  years: PlanYearRow[];
  quotas: number[][] | null;
  diagnostics: string[];
  gain_evals: number;
}

export interface RefineResult {
  scenario: string;
  year: number;
  advice_value: number;
  greedy_value: number;
  refined_value: number;
  strictly_ordered: boolean;
  best_permutation: number;
  permutations: number;
  seed: number;
  greedy_cells: Cell[];
  refined_cells: Cell[];
  advice_cells: Cell[] | null;
  surviving_advice: Cell[] | null;
}

export interface CoverageEntry {
  cell: Cell;
  covered: Cell[];
}

export interface CoverageResponse {
  cells: CoverageEntry[];
  union: Cell[];
}

export interface Health {
  status: string;
  backend: string;
  version: string;
}

/** Canonical map key for a cell, stable across payload round-trips. */
export function cellKey(cell: Cell): string {
  return `${cell[0]},${cell[1]}`;
}

export function sameCell(a: Cell, b: Cell): boolean {
  return a[0] === b[0] && a[1] === b[1];
}

/**
 * Parse the service's satisfaction-ratio strings: "-" means undefined
 * (empty prefix), "inf" means unconstrained, "n/d" is an exact ratio.
 */
export function parseAlpha(text: string): number | null {
  if (text === "-") return null;
  if (text === "inf") return Infinity;
  const slash = text.indexOf("/");
  if (slash >= 0) {
    return Number(text.slice(0, slash)) / Number(text.slice(slash + 1));
  }
  return Number(text);
}
