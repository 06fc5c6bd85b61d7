/**
 * Equity dashboard: worst district satisfaction per year for each run,
 * plus how each quota row was filled.
 *
 * Satisfaction ratios come verbatim from plan results; the dashboard's
 * own arithmetic is limited to counting picks per district and dividing
 * by the service-provided quota targets.
 */

import { Cell, parseAlpha, PlanResult } from "./types";

export interface PolicyRun {
  policy: string;
  result: PlanResult;
}

export interface EquityRow {
  policy: string;
  year: number;
  value: number;
  alphaDisplay: string;
  alpha: number | null;
}

export interface QuotaFill {
  policy: string;
  year: number;
  targets: number[];
  counts: number[];
  met: boolean;
}

export type PolicyBadge = "unconstrained" | "quota";

export interface EquityDashboard {
  rows: EquityRow[];
  badges: Record<string, PolicyBadge>;
  quotaFills: QuotaFill[];
  warnings: string[];
}

function districtOf(districts: number[][], cell: Cell): number {
  return Math.round(districts[cell[0]][cell[1]]);
}

/** Picks per district (1-based ids) for one year's cells. */
export function countsPerDistrict(
  cells: Cell[],
  districts: number[][],
  numDistricts: number
): number[] {
  const counts = new Array<number>(numDistricts).fill(0);
  for (const cell of cells) {
    const q = districtOf(districts, cell);
    if (q >= 1 && q <= numDistricts) counts[q - 1] += 1;
  }
  return counts;
}

/**
 * Score one run's picks against another run's quota table: per year, the
 * worst cumulative fill ratio across quota-bearing districts.
 */
export function crossScore(
  run: PlanResult,
  scoring: PlanResult,
  districts: number[][]
): number[] | null {
  if (!scoring.quotas) return null;
  const numDistricts = scoring.quotas[0].length;
  const cumCounts = new Array<number>(numDistricts).fill(0);
  const cumTargets = new Array<number>(numDistricts).fill(0);
  const out: number[] = [];
  for (let t = 0; t < scoring.quotas.length; t += 1) {
    const row = run.years[t];
    const yearCounts = row
      ? countsPerDistrict(row.cells, districts, numDistricts)
      : new Array<number>(numDistricts).fill(0);
    for (let q = 0; q < numDistricts; q += 1) {
      cumCounts[q] += yearCounts[q];
      cumTargets[q] += scoring.quotas[t][q];
    }
    let worst = Infinity;
    for (let q = 0; q < numDistricts; q += 1) {
      if (cumTargets[q] > 0) worst = Math.min(worst, cumCounts[q] / cumTargets[q]);
    }
    out.push(worst);
  }
  return out;
}

export function buildEquityDashboard(
  runs: PolicyRun[],
  districts: number[][] | null
): EquityDashboard {
  const rows: EquityRow[] = [];
  const badges: Record<string, PolicyBadge> = {};
  const quotaFills: QuotaFill[] = [];
  const warnings: string[] = [];

  for (const run of runs) {
    const { policy, result } = run;
    badges[policy] = result.quotas === null ? "unconstrained" : "quota";
    for (const row of result.years) {
      rows.push({
        policy,
        year: row.year,
        value: row.value,
        alphaDisplay: row.alpha_min,
        alpha: parseAlpha(row.alpha_min),
      });
    }
    for (const diagnostic of result.diagnostics) {
      warnings.push(`${policy}: ${diagnostic}`);
    }
    if (result.quotas && districts) {
      const numDistricts = result.quotas[0].length;
      for (let t = 0; t < result.quotas.length; t += 1) {
        const targets = result.quotas[t];
        const cells = result.years[t]?.cells ?? [];
        const counts = countsPerDistrict(cells, districts, numDistricts);
        quotaFills.push({
          policy,
          year: t + 1,
          targets,
          counts,
          met: targets.every((target, q) => counts[q] >= target),
        });
      }
    }
  }

  return { rows, badges, quotaFills, warnings };
}
