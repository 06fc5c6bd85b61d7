/**
 * What-if session state for one planner sitting.
 *
 * Updates are pure: every mutation returns a fresh state so a planner
 * can branch and compare runs. History is append-only and entries are
 * frozen once recorded.
 */

import { Cell, cellKey, PlanResult, RefineResult, ScenarioDetail } from "./types";

export type PolicyChoice = "dp0" | "dp1" | "dp2";

export const POLICY_CHOICES: readonly PolicyChoice[] = ["dp0", "dp1", "dp2"];

export interface AdvicePin {
  cell: Cell;
  round: number;
}

export interface RunParams {
  policy: PolicyChoice;
  budgets: number[];
  year: number;
  pins: AdvicePin[];
}

export interface RunRecord {
  jobId: string;
  kind: "plan" | "refine";
  params: RunParams;
  result: PlanResult | RefineResult;
}

export interface SessionState {
  scenario: ScenarioDetail;
  year: number;
  budgets: number[];
  policy: PolicyChoice;
  mass: number;
  pins: AdvicePin[];
  history: readonly RunRecord[];
}

const DEFAULT_MASS = 0.9;

export function createSession(scenario: ScenarioDetail): SessionState {
  const mode = scenario.policy_mode as PolicyChoice;
  return {
    scenario,
    year: 1,
    budgets: [...scenario.budgets],
    policy: POLICY_CHOICES.includes(mode) ? mode : "dp0",
    mass: DEFAULT_MASS,
    pins: [],
    history: [],
  };
}

export function setYear(state: SessionState, year: number): SessionState {
  const clamped = Math.min(Math.max(Math.round(year), 1), state.scenario.years);
  return { ...state, year: clamped };
}

export function setBudget(state: SessionState, yearIndex: number, value: number): SessionState {
  if (yearIndex < 0 || yearIndex >= state.budgets.length) {
    throw new RangeError(`no year index ${yearIndex}`);
  }
  const budgets = [...state.budgets];
  budgets[yearIndex] = Math.max(0, Math.round(value));
  return { ...state, budgets };
}

export function setPolicy(state: SessionState, policy: PolicyChoice, mass?: number): SessionState {
  return { ...state, policy, mass: mass ?? state.mass };
}

/** Cells a pin may land on: candidates (or all cells) minus impassable. */
export function passableCandidates(scenario: ScenarioDetail): Set<string> {
  const blocked = new Set(scenario.impassable.map(cellKey));
  const keys = new Set<string>();
  if (scenario.candidates !== null) {
    for (const cell of scenario.candidates) {
      const key = cellKey(cell);
      if (!blocked.has(key)) keys.add(key);
    }
    return keys;
  }
  for (let r = 0; r < scenario.rows; r += 1) {
    for (let c = 0; c < scenario.cols; c += 1) {
      const key = cellKey([r, c]);
      if (!blocked.has(key)) keys.add(key);
    }
  }
  return keys;
}

/** Inline validation message for a prospective pin, or null if it is fine. */
export function pinError(state: SessionState, pin: AdvicePin): string | null {
  const { scenario } = state;
  const [r, c] = pin.cell;
  if (pin.round < 1 || pin.round > scenario.years) {
    return `year ${pin.round} is outside 1..${scenario.years}`;
  }
  if (r < 0 || r >= scenario.rows || c < 0 || c >= scenario.cols) {
    return `cell ${cellKey(pin.cell)} is outside the ${scenario.rows}x${scenario.cols} grid`;
  }
  const key = cellKey(pin.cell);
  if (scenario.impassable.some((cell) => cellKey(cell) === key)) {
    return `cell ${key} is impassable`;
  }
  if (!passableCandidates(scenario).has(key)) {
    return `cell ${key} is not a candidate site`;
  }
  if (state.pins.some((p) => p.round === pin.round && cellKey(p.cell) === key)) {
    return `cell ${key} is already pinned in year ${pin.round}`;
  }
  return null;
}

export interface PinUpdate {
  state: SessionState;
  error: string | null;
}

export function addPin(state: SessionState, pin: AdvicePin): PinUpdate {
  const error = pinError(state, pin);
  if (error !== null) return { state, error };
  return { state: { ...state, pins: [...state.pins, pin] }, error: null };
}

export function removePin(state: SessionState, cell: Cell, round: number): SessionState {
  const key = cellKey(cell);
  const pins = state.pins.filter((p) => !(p.round === round && cellKey(p.cell) === key));
  return { ...state, pins };
}

export function clearPins(state: SessionState): SessionState {
  return { ...state, pins: [] };
}

/** Append a finished run; the record is frozen and history never edited. */
export function recordRun(state: SessionState, run: RunRecord): SessionState {
  const frozen = Object.freeze({
    ...run,
    params: Object.freeze({
      ...run.params,
      budgets: Object.freeze([...run.params.budgets]) as unknown as number[],
      pins: Object.freeze(run.params.pins.map((p) => Object.freeze({ ...p }))) as unknown as AdvicePin[],
    }),
  });
  return { ...state, history: Object.freeze([...state.history, frozen]) };
}

export function snapshotParams(state: SessionState): RunParams {
  return {
    policy: state.policy,
    budgets: [...state.budgets],
    year: state.year,
    pins: state.pins.map((p) => ({ cell: [...p.cell] as Cell, round: p.round })),
  };
}
