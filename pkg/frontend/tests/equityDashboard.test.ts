import { describe, expect, it } from "vitest";

import {
  buildEquityDashboard,
  countsPerDistrict,
  crossScore,
} from "../src/equityDashboard";
import { parseAlpha, PlanResult } from "../src/types";
import { gridRows, loadRecordings, planResult } from "./replay";

const recordings = loadRecordings();
const region = recordings.scenarios.region;
const dp0 = planResult(recordings, region, "dp0");
const dp1 = planResult(recordings, region, "dp1");
const dp2 = planResult(recordings, region, "dp2");
const districts = gridRows(recordings, region, "districts");

const runs = [
  { policy: "dp0", result: dp0 },
  { policy: "dp1", result: dp1 },
  { policy: "dp2", result: dp2 },
];

describe("dashboard rows", () => {
  const dashboard = buildEquityDashboard(runs, districts);

  it("tabulates one row per run per year", () => {
    expect(dashboard.rows).toHaveLength(15);
    const dp1Rows = dashboard.rows.filter((row) => row.policy === "dp1");
    expect(dp1Rows.map((row) => row.alphaDisplay)).toEqual(
      dp1.years.map((row) => row.alpha_min)
    );
    expect(dp1Rows.map((row) => row.alpha)).toEqual(
      dp1.years.map((row) => parseAlpha(row.alpha_min))
    );
  });

  it("badges quota-free runs as unconstrained", () => {
    expect(dashboard.badges).toEqual({
      dp0: "unconstrained",
      dp1: "quota",
      dp2: "quota",
    });
    const dp0Rows = dashboard.rows.filter((row) => row.policy === "dp0");
    expect(dp0Rows.every((row) => row.alpha === Infinity)).toBe(true);
  });

  it("shows every quota row of a feasible run as met", () => {
    const dp1Fills = dashboard.quotaFills.filter((fill) => fill.policy === "dp1");
    expect(dp1Fills).toHaveLength(5);
    expect(dp1Fills.map((fill) => fill.targets)).toEqual(dp1.quotas);
    for (const fill of dp1Fills) {
      expect(fill.counts).toEqual(fill.targets);
      expect(fill.met).toBe(true);
    }
  });

  it("carries no warnings when runs report no diagnostics", () => {
    expect(dashboard.warnings).toEqual([]);
  });

  it("surfaces availability-shortfall diagnostics as warnings", () => {
    const short: PlanResult = {
      ...dp1,
      diagnostics: ["year 3: district 2 supply exhausted, quota redistributed"],
    };
    const noisy = buildEquityDashboard([{ policy: "dp1", result: short }], districts);
    expect(noisy.warnings).toEqual([
      "dp1: year 3: district 2 supply exhausted, quota redistributed",
    ]);
  });
});

describe("cross scoring", () => {
  it("counts picks per district from the service layers", () => {
    const counts = countsPerDistrict(dp1.years[0].cells, districts, 3);
    expect(counts).toEqual(dp1.quotas![0]);
  });

  it("scores the quota-following run at full fill every year", () => {
    expect(crossScore(dp1, dp1, districts)).toEqual([1, 1, 1, 1, 1]);
  });

  it("shows the unconstrained run underfilling the dp1 quotas", () => {
    const scores = crossScore(dp0, dp1, districts)!;
    expect(scores).toHaveLength(5);
    expect(scores[0]).toBe(1);
    expect(scores[1]).toBeCloseTo(2 / 3, 12);
    expect(scores[2]).toBeCloseTo(1 / 2, 12);
    expect(scores[3]).toBeCloseTo(1 / 3, 12);
    expect(scores[4]).toBeCloseTo(1 / 3, 12);
    expect(Math.min(...scores)).toBeLessThan(1);
  });

  it("returns null against an unconstrained scoring run", () => {
    expect(crossScore(dp1, dp0, districts)).toBeNull();
  });
});
