/**
 * Advice editor: turn map pins into a refinement request, run the job,
 * and summarise how the refined plan relates to the advice.
 *
 * With no pins for the selected year the editor degrades to a plain
 * planning run, so "refine with nothing pinned" equals "plan".
 */

import { PlannerClient, PollOptions } from "./api";
import {
  recordRun,
  SessionState,
  snapshotParams,
} from "./session";
import {
  Cell,
  cellKey,
  PlanRequestBody,
  PlanResult,
  RefineRequestBody,
  RefineResult,
} from "./types";

export interface RefineOptions extends PollOptions {
  permutations?: number;
  seed?: number;
}

export function groupPinsByRound(state: SessionState): Map<number, Cell[]> {
  const grouped = new Map<number, Cell[]>();
  for (const pin of state.pins) {
    const cells = grouped.get(pin.round) ?? [];
    cells.push(pin.cell);
    grouped.set(pin.round, cells);
  }
  return grouped;
}

function sameBudgets(a: number[], b: number[]): boolean {
  return a.length === b.length && a.every((v, i) => v === b[i]);
}

export function buildPlanBody(state: SessionState): PlanRequestBody {
  return {
    policy: state.policy,
    algorithm: "multistep",
    budgets: sameBudgets(state.budgets, state.scenario.budgets)
      ? null
      : [...state.budgets],
    use_advice: false,
  };
}

export type Submission =
  | { kind: "plan"; body: PlanRequestBody }
  | { kind: "refine"; body: RefineRequestBody };

/** What submitting the editor would send for the selected year. */
export function buildSubmission(state: SessionState, options?: RefineOptions): Submission {
  const pinned = groupPinsByRound(state).get(state.year) ?? [];
  if (pinned.length === 0) {
    return { kind: "plan", body: buildPlanBody(state) };
  }
  return {
    kind: "refine",
    body: {
      year: state.year,
      advice: pinned,
      permutations: options?.permutations ?? 10,
      seed: options?.seed ?? 0,
    },
  };
}

export interface RefineSummary {
  adviceValue: number;
  greedyValue: number;
  refinedValue: number;
  improvementOverAdvice: number;
  /** The refined plan is never worse than the advice or plain greedy. */
  guaranteeHolds: boolean;
  survivingPins: Cell[];
  droppedPins: Cell[];
}

export function summarizeRefine(result: RefineResult): RefineSummary {
  const surviving = result.surviving_advice ?? [];
  const survivingKeys = new Set(surviving.map(cellKey));
  const dropped = (result.advice_cells ?? []).filter(
    (cell) => !survivingKeys.has(cellKey(cell))
  );
  return {
    adviceValue: result.advice_value,
    greedyValue: result.greedy_value,
    refinedValue: result.refined_value,
    improvementOverAdvice: result.refined_value - result.advice_value,
    guaranteeHolds:
      result.refined_value >= result.advice_value &&
      result.refined_value >= result.greedy_value,
    survivingPins: surviving,
    droppedPins: dropped,
  };
}

export interface SubmitOutcome {
  state: SessionState;
  kind: "plan" | "refine";
  jobId: string;
  planResult?: PlanResult;
  refineResult?: RefineResult;
  summary?: RefineSummary;
}

/** Run the editor's submission to completion and record it in history. */
export async function submitAdvice(
  client: PlannerClient,
  state: SessionState,
  options?: RefineOptions
): Promise<SubmitOutcome> {
  const submission = buildSubmission(state, options);
  const sid = state.scenario.id;
  const poll: PollOptions = {
    intervalMs: options?.intervalMs,
    timeoutMs: options?.timeoutMs,
  };
  if (submission.kind === "plan") {
    const jobId = await client.startPlan(sid, submission.body);
    await client.pollJob(jobId, poll);
    const planResult = await client.getPlanResult(jobId);
    const next = recordRun(state, {
      jobId,
      kind: "plan",
      params: snapshotParams(state),
      result: planResult,
    });
    return { state: next, kind: "plan", jobId, planResult };
  }
  const jobId = await client.startRefine(sid, submission.body);
  await client.pollJob(jobId, poll);
  const refineResult = await client.getRefineResult(jobId);
  const next = recordRun(state, {
    jobId,
    kind: "refine",
    params: snapshotParams(state),
    result: refineResult,
  });
  return {
    state: next,
    kind: "refine",
    jobId,
    refineResult,
    summary: summarizeRefine(refineResult),
  };
}
