/**
 * Replay recorded service exchanges as a fetch implementation.
 *
 * Requests must match a recording exactly (method, URL, canonicalised
 * JSON body); anything unrecorded throws, so the client cannot drift
 * from the service schema without a test noticing.
 */

import { readFileSync } from "node:fs";
import { fileURLToPath } from "node:url";

import { FetchLike, HttpInit, HttpResponse } from "../src/api";
import {
  Cell,
  CoverageResponse,
  PlanRequestBody,
  PlanResult,
  RefineResult,
  ScenarioDetail,
} from "../src/types";

export interface Exchange {
  method: string;
  url: string;
  status: number;
  body?: unknown;
  text?: string;
  response?: unknown;
  response_text?: string;
}

export interface Recordings {
  scenarios: { region: string; advised: string; tiny: string };
  exchanges: Exchange[];
}

const FIXTURE_PATH = fileURLToPath(new URL("./fixtures/recordings.json", import.meta.url));

export function loadRecordings(): Recordings {
  return JSON.parse(readFileSync(FIXTURE_PATH, "utf8")) as Recordings;
}

/** JSON with object keys sorted, so body matching ignores key order. */
function canonical(value: unknown): string {
  if (Array.isArray(value)) {
    return `[${value.map(canonical).join(",")}]`;
  }
  if (value !== null && typeof value === "object") {
    const entries = Object.entries(value as Record<string, unknown>)
      .sort(([a], [b]) => (a < b ? -1 : 1))
      .map(([k, v]) => `${JSON.stringify(k)}:${canonical(v)}`);
    return `{${entries.join(",")}}`;
  }
  return JSON.stringify(value);
}

function bodyMatches(exchange: Exchange, init?: HttpInit): boolean {
  if (exchange.body !== undefined) {
    return init?.body !== undefined && canonical(JSON.parse(init.body)) === canonical(exchange.body);
  }
  if (exchange.text !== undefined) {
    return init?.body === exchange.text;
  }
  return true;
}

export function replayFetch(recordings: Recordings): FetchLike {
  return async (url: string, init?: HttpInit): Promise<HttpResponse> => {
    const method = init?.method ?? "GET";
    const hit = recordings.exchanges.find(
      (e) => e.method === method && e.url === url && bodyMatches(e, init)
    );
    if (!hit) {
      throw new Error(`unrecorded request: ${method} ${url}`);
    }
    return {
      ok: hit.status >= 200 && hit.status < 300,
      status: hit.status,
      json: async () => hit.response ?? {},
    };
  };
}

export function findExchange(
  recordings: Recordings,
  method: string,
  url: string,
  body?: unknown
): Exchange {
  const hit = recordings.exchanges.find(
    (e) =>
      e.method === method &&
      e.url === url &&
      (body === undefined || canonical(e.body) === canonical(body))
  );
  if (!hit) throw new Error(`missing recording: ${method} ${url}`);
  return hit;
}

export function scenarioDetail(recordings: Recordings, sid: string): ScenarioDetail {
  return findExchange(recordings, "GET", `/scenarios/${sid}`).response as ScenarioDetail;
}

export function gridRows(
  recordings: Recordings,
  sid: string,
  name: string,
  year?: number
): number[][] {
  const query = year === undefined ? `grid=${name}` : `grid=${name}&year=${year}`;
  const doc = findExchange(recordings, "GET", `/scenarios/${sid}?${query}&offset=0&limit=64`)
    .response as ScenarioDetail;
  return doc.grid!.rows;
}

export function planResult(recordings: Recordings, sid: string, policy: string): PlanResult {
  const body: PlanRequestBody = {
    policy,
    algorithm: "multistep",
    budgets: null,
    use_advice: false,
  };
  const post = findExchange(recordings, "POST", `/scenarios/${sid}/plan`, body);
  const jobId = (post.response as { job_id: string }).job_id;
  return findExchange(recordings, "GET", `/jobs/${jobId}/result?format=json`)
    .response as PlanResult;
}

export function refineResult(recordings: Recordings, sid: string): RefineResult {
  const post = recordings.exchanges.find(
    (e) => e.method === "POST" && e.url === `/scenarios/${sid}/refine` && e.status === 202
  );
  if (!post) throw new Error(`no refine recording for ${sid}`);
  const jobId = (post.response as { job_id: string }).job_id;
  return findExchange(recordings, "GET", `/jobs/${jobId}/result?format=json`)
    .response as RefineResult;
}

export function coverageFor(recordings: Recordings, sid: string, cells: Cell[]): CoverageResponse {
  const param = cells.map(([r, c]) => `${r},${c}`).join(";");
  return findExchange(recordings, "GET", `/scenarios/${sid}/coverage?cells=${param}`)
    .response as CoverageResponse;
}
