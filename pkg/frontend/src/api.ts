/**
 * Thin typed client over the planning service's REST schema.
 *
 * The fetch implementation is injectable so contract tests can replay
 * recorded service exchanges without a network.
 */

import {
  Cell,
  CoverageResponse,
  GenerateSpec,
  GridPage,
  Health,
  JobStatus,
  PlanRequestBody,
  PlanResult,
  RefineRequestBody,
  RefineResult,
  ScenarioDetail,
  ScenarioSummary,
} from "./types";

export interface HttpResponse {
  ok: boolean;
  status: number;
  json(): Promise<unknown>;
}

export interface HttpInit {
  method?: string;
  headers?: Record<string, string>;
  body?: string;
}

export type FetchLike = (url: string, init?: HttpInit) => Promise<HttpResponse>;

export class ServiceError extends Error {
  readonly status: number;

  constructor(status: number, message: string) {
    super(message);
    this.name = "ServiceError";
    this.status = status;
  }
}

export interface PollOptions {
  intervalMs?: number;
  timeoutMs?: number;
}

export interface GridOptions {
  year?: number;
  pageSize?: number;
}

const sleep = (ms: number) => new Promise((resolve) => setTimeout(resolve, ms));

export class PlannerClient {
  private readonly baseUrl: string;
  private readonly fetchFn: FetchLike;

  constructor(baseUrl = "", fetchFn?: FetchLike) {
    this.baseUrl = baseUrl.replace(/\/$/, "");
    this.fetchFn = fetchFn ?? (globalThis.fetch as unknown as FetchLike);
  }

  private async request(url: string, init?: HttpInit): Promise<unknown> {
    const resp = await this.fetchFn(this.baseUrl + url, init);
    const payload = (await resp.json().catch(() => ({}))) as {
      error?: string;
    };
    if (!resp.ok) {
      throw new ServiceError(resp.status, payload.error ?? `HTTP ${resp.status}`);
    }
    return payload;
  }

  private post(url: string, body: unknown): Promise<unknown> {
    return this.request(url, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  async uploadScenario(text: string): Promise<ScenarioSummary> {
    return (await this.request("/scenarios", {
      method: "POST",
      headers: { "content-type": "text/plain" },
      body: text,
    })) as ScenarioSummary;
  }

  async generateScenario(spec: GenerateSpec): Promise<ScenarioSummary> {
    return (await this.post("/scenarios", { generate: spec })) as ScenarioSummary;
  }

  async getScenario(sid: string): Promise<ScenarioDetail> {
    return (await this.request(`/scenarios/${sid}`)) as ScenarioDetail;
  }

  async getGridPage(
    sid: string,
    name: string,
    offset: number,
    limit: number,
    year?: number
  ): Promise<GridPage> {
    let query = `grid=${name}`;
    if (year !== undefined) query += `&year=${year}`;
    query += `&offset=${offset}&limit=${limit}`;
    const doc = (await this.request(`/scenarios/${sid}?${query}`)) as ScenarioDetail;
    if (!doc.grid) throw new ServiceError(500, `no grid in ${name} page`);
    return doc.grid;
  }

  /** Fetch a full raster layer, paging until every row has arrived. */
  async getGrid(sid: string, name: string, options?: GridOptions): Promise<number[][]> {
    const pageSize = options?.pageSize ?? 64;
    const rows: number[][] = [];
    for (;;) {
      const page = await this.getGridPage(sid, name, rows.length, pageSize, options?.year);
      rows.push(...page.rows);
      if (rows.length >= page.total_rows || page.rows.length === 0) {
        return rows;
      }
    }
  }

  async startPlan(sid: string, body: PlanRequestBody): Promise<string> {
    const doc = (await this.post(`/scenarios/${sid}/plan`, body)) as {
      job_id: string;
    };
    return doc.job_id;
  }

  async startRefine(sid: string, body: RefineRequestBody): Promise<string> {
    const doc = (await this.post(`/scenarios/${sid}/refine`, body)) as {
      job_id: string;
    };
    return doc.job_id;
  }

  async getJob(jid: string): Promise<JobStatus> {
    return (await this.request(`/jobs/${jid}`)) as JobStatus;
  }

  async getPlanResult(jid: string): Promise<PlanResult> {
    return (await this.request(`/jobs/${jid}/result?format=json`)) as PlanResult;
  }

  async getRefineResult(jid: string): Promise<RefineResult> {
    return (await this.request(`/jobs/${jid}/result?format=json`)) as RefineResult;
  }

  /** Poll a job until it finishes; resolves on done, throws on failure. */
  async pollJob(jid: string, options?: PollOptions): Promise<JobStatus> {
    const intervalMs = options?.intervalMs ?? 500;
    const timeoutMs = options?.timeoutMs ?? 120_000;
    const startedAt = Date.now();
    for (;;) {
      const job = await this.getJob(jid);
      if (job.status === "done") return job;
      if (job.status === "failed") {
        throw new ServiceError(422, job.error ?? `job ${jid} failed`);
      }
      if (Date.now() - startedAt > timeoutMs) {
        throw new ServiceError(408, `job ${jid} timed out after ${timeoutMs}ms`);
      }
      await sleep(intervalMs);
    }
  }

  /** Cells the service reports covered by the given facilities. */
  async getCoverage(sid: string, cells: Cell[]): Promise<CoverageResponse> {
    const param = cells.map(([r, c]) => `${r},${c}`).join(";");
    return (await this.request(
      `/scenarios/${sid}/coverage?cells=${param}`
    )) as CoverageResponse;
  }

  async health(): Promise<Health> {
    return (await this.request("/healthz")) as Health;
  }
}
