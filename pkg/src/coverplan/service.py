"""HTTP service around the planner.

Scenarios are immutable once uploaded; replacing one mints a new id (and
is refused while jobs on the old id are still pending).  Planning and
refinement run as background jobs with polled status; plan results are
served byte-identical to the CLI's output files.
"""

from __future__ import annotations

import itertools
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse
from pydantic import BaseModel

from . import __version__, report
from .algorithms import multistep_planning, multistep_planning_with_advice, retrospective_compare
from .coverage import compute_covered
from .kernels import backend
from .model import PlanningError
from .scenario import (POLICY_MODES, BuiltScenario, ScenarioFile, ScenarioFormatError,
                       advice_ids, build_instance, dumps_scenario,
                       generate_synthetic_region, loads_scenario)


class PlanRequest(BaseModel):
    policy: str = "dp1"
    algorithm: str = "multistep"
    budgets: list[int] | None = None
    use_advice: bool = False


class RefineRequest(BaseModel):
    year: int = 1
    advice: list[list[int]]
    permutations: int = 10
    seed: int = 0


class GenerateRequest(BaseModel):
    seed: int = 0
    rows: int = 16
    cols: int = 16
    districts: int = 3
    years: int = 5
    budget: int = 3


@dataclass
class ScenarioRecord:
    id: str
    text: str
    scenario: ScenarioFile
    built: BuiltScenario | None = None  # default build, for coverage queries
    lock: threading.Lock = field(default_factory=threading.Lock)


@dataclass
class Job:
    id: str
    kind: str
    scenario_id: str
    status: str = "queued"  # queued | running | done | failed
    progress: float = 0.0
    error: str | None = None
    result_text: str | None = None
    result_json: dict | None = None

    def public(self) -> dict:
        return {"id": self.id, "kind": self.kind, "scenario_id": self.scenario_id,
                "status": self.status, "progress": self.progress, "error": self.error}


class Store:
    def __init__(self, workers: int = 2):
        self.lock = threading.Lock()
        self.scenarios: dict[str, ScenarioRecord] = {}
        self.jobs: dict[str, Job] = {}
        self.pool = ThreadPoolExecutor(max_workers=workers)
        self._sid = itertools.count(1)
        self._jid = itertools.count(1)

    def add_scenario(self, text: str, sid: str | None = None) -> ScenarioRecord:
        scenario = loads_scenario(text)
        with self.lock:
            sid = sid or f"s{next(self._sid)}"
            rec = ScenarioRecord(sid, text, scenario)
            self.scenarios[sid] = rec
        return rec

    def pending_jobs(self, sid: str) -> list[str]:
        with self.lock:
            return [j.id for j in self.jobs.values()
                    if j.scenario_id == sid and j.status in ("queued", "running")]

    def new_job(self, kind: str, sid: str) -> Job:
        with self.lock:
            job = Job(f"j{next(self._jid)}", kind, sid)
            self.jobs[job.id] = job
        return job

    def built(self, rec: ScenarioRecord) -> BuiltScenario:
        with rec.lock:
            if rec.built is None:
                rec.built = build_instance(rec.scenario, policy_mode="dp0")
            return rec.built


def _error(status: int, message: str) -> JSONResponse:
    return JSONResponse({"error": message}, status_code=status)


def create_app(workers: int = 2) -> FastAPI:
    app = FastAPI(title="coverplan service")
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
                       allow_headers=["*"])
    store = Store(workers)
    app.state.store = store

    async def _scenario_text(request: Request) -> str:
        ctype = request.headers.get("content-type", "")
        if ctype.startswith("application/json"):
            payload = await request.json()
            if "text" in payload:
                return payload["text"]
            if "generate" in payload:
                gen = GenerateRequest(**payload["generate"])
                return dumps_scenario(generate_synthetic_region(
                    seed=gen.seed, rows=gen.rows, cols=gen.cols,
                    districts=gen.districts, years=gen.years, budget=gen.budget))
            raise ScenarioFormatError("JSON body needs a 'text' or 'generate' key")
        return (await request.body()).decode()

    @app.post("/scenarios", status_code=201)
    async def post_scenario(request: Request):
        try:
            text = await _scenario_text(request)
            rec = store.add_scenario(text)
        except (ScenarioFormatError, ValueError, KeyError) as exc:
            return _error(400, str(exc))
        sf = rec.scenario
        return {"id": rec.id, "name": sf.name, "rows": sf.friction.rows,
                "cols": sf.friction.cols, "years": sf.years,
                "districts": sf.num_districts}

    @app.put("/scenarios/{sid}", status_code=201)
    async def put_scenario(sid: str, request: Request):
        if sid not in store.scenarios:
            return _error(404, f"no scenario {sid}")
        pending = store.pending_jobs(sid)
        if pending:
            return _error(409, f"scenario {sid} has pending jobs {pending}; "
                               "retry when they finish")
        try:
            text = await _scenario_text(request)
            rec = store.add_scenario(text, sid=f"{sid}v{next(store._sid)}")
        except (ScenarioFormatError, ValueError, KeyError) as exc:
            return _error(400, str(exc))
        return {"id": rec.id, "replaces": sid}

    @app.get("/scenarios/{sid}")
    def get_scenario(sid: str, grid: str | None = None, year: int = 1,
                     offset: int = 0, limit: int = 64):
        rec = store.scenarios.get(sid)
        if rec is None:
            return _error(404, f"no scenario {sid}")
        sf = rec.scenario
        body: dict[str, Any] = {
            "id": rec.id, "name": sf.name, "rows": sf.friction.rows,
            "cols": sf.friction.cols, "years": sf.years,
            "districts": sf.num_districts, "budgets": list(sf.budgets),
            "policy_mode": sf.policy_mode, "tau": sf.tau,
            "cell_km": sf.friction.cell_km,
            "existing": [list(c) for c in sf.existing],
            "impassable": [[int(r), int(c)]
                           for r, c in np.argwhere(sf.friction.passable == 0)],
            "candidates": (None if sf.candidates is None
                           else [list(c) for c in sf.candidates]),
            "advice": {str(t): [list(c) for c in cells]
                       for t, cells in sf.advice.items()},
        }
        if grid is not None:
            if grid == "friction":
                g = sf.friction.minutes_per_km
            elif grid == "districts":
                g = sf.districts
            elif grid == "population":
                if not (1 <= year <= sf.years):
                    return _error(422, f"year {year} outside 1..{sf.years}")
                g = sf.population.people[year - 1]
            else:
                return _error(422, f"unknown grid {grid!r}")
            rows = g[offset:offset + limit]
            body["grid"] = {"name": grid, "year": year, "offset": offset,
                            "total_rows": int(g.shape[0]),
                            "rows": [[float(v) for v in row] for row in rows]}
        return body

    @app.post("/scenarios/{sid}/plan", status_code=202)
    def post_plan(sid: str, req: PlanRequest):
        rec = store.scenarios.get(sid)
        if rec is None:
            return _error(404, f"no scenario {sid}")
        if req.policy not in POLICY_MODES:
            return _error(422, f"unknown policy {req.policy!r}")
        if req.algorithm not in ("multistep", "multistep+advice"):
            return _error(422, f"unknown algorithm {req.algorithm!r}")
        if req.budgets is not None:
            if len(req.budgets) != rec.scenario.years:
                return _error(422, f"{len(req.budgets)} budgets for "
                                   f"{rec.scenario.years} years")
            if any(b < 0 for b in req.budgets):
                return _error(422, "budgets must be non-negative")
        use_advice = req.use_advice or req.algorithm == "multistep+advice"
        if use_advice and not rec.scenario.advice:
            return _error(422, "scenario carries no advice")
        job = store.new_job("plan", sid)

        def run():
            job.status = "running"
            try:
                built = build_instance(rec.scenario, policy_mode=req.policy,
                                       budgets=req.budgets)

                def progress(t, h):
                    job.progress = t / h

                if use_advice:
                    result = multistep_planning_with_advice(
                        built.instance, advice_ids(built), progress=progress)
                else:
                    result = multistep_planning(built.instance, progress=progress)
                job.result_text = report.format_plan_result(result, built)
                job.result_json = report.plan_result_json(result, built)
                job.progress = 1.0
                job.status = "done"
            except (PlanningError, ValueError) as exc:
                job.error = str(exc)
                job.status = "failed"

        store.pool.submit(run)
        return {"job_id": job.id}

    @app.post("/scenarios/{sid}/refine", status_code=202)
    def post_refine(sid: str, req: RefineRequest):
        rec = store.scenarios.get(sid)
        if rec is None:
            return _error(404, f"no scenario {sid}")
        sf = rec.scenario
        if not (1 <= req.year <= sf.years):
            return _error(422, f"year {req.year} outside 1..{sf.years}")
        if not req.advice:
            return _error(422, "advice is empty")
        cells = [tuple(c) for c in req.advice]
        if len(set(cells)) != len(cells):
            return _error(422, "advice repeats a cell")
        job = store.new_job("refine", sid)

        def run():
            job.status = "running"
            try:
                built = store.built(rec)
                try:
                    ids = [built.id_of[(req.year, cell)] for cell in cells]
                except KeyError as exc:
                    raise ValueError(f"advice cell {exc.args[0][1]} is not a candidate")
                cands = [e.id for e in built.instance.by_round[req.year - 1]]
                rep = retrospective_compare(cands, len(ids), built.instance.objective,
                                            ids, permutations=req.permutations,
                                            seed=req.seed)
                job.result_json = report.retro_report_json(
                    rep, built, req.year, [list(c) for c in cells])
                job.result_text = report.format_retro_report(rep, built, req.year)
                job.progress = 1.0
                job.status = "done"
            except (PlanningError, ValueError) as exc:
                job.error = str(exc)
                job.status = "failed"

        store.pool.submit(run)
        return {"job_id": job.id}

    @app.get("/jobs/{jid}")
    def get_job(jid: str):
        job = store.jobs.get(jid)
        if job is None:
            return _error(404, f"no job {jid}")
        return job.public()

    @app.get("/jobs/{jid}/result")
    def get_result(jid: str, format: str | None = None):
        job = store.jobs.get(jid)
        if job is None:
            return _error(404, f"no job {jid}")
        if job.status == "failed":
            return _error(422, job.error or "job failed")
        if job.status != "done":
            return _error(404, f"job {jid} is {job.status}; result not ready")
        want_json = format == "json" or (format is None and job.kind == "refine")
        if want_json:
            return JSONResponse(job.result_json)
        return PlainTextResponse(job.result_text)

    @app.get("/scenarios/{sid}/coverage")
    def get_coverage(sid: str, cells: str):
        rec = store.scenarios.get(sid)
        if rec is None:
            return _error(404, f"no scenario {sid}")
        sf = rec.scenario
        try:
            parsed = []
            for part in cells.split(";"):
                r, c = part.split(",")
                parsed.append((int(r), int(c)))
        except ValueError:
            return _error(422, "cells must look like 'r,c;r,c'")
        built = store.built(rec)
        out = []
        union: set[tuple[int, int]] = set()
        for cell in parsed:
            if not (0 <= cell[0] < sf.friction.rows and 0 <= cell[1] < sf.friction.cols):
                return _error(422, f"cell {list(cell)} outside the grid")
            try:
                cov = built.model.covered_for(cell)
            except PlanningError:
                cov = compute_covered(sf.friction, cell, sf.tau)
            here = [sf.friction.unflat(i) for i in cov]
            union.update(here)
            out.append({"cell": list(cell), "covered": [list(c) for c in here]})
        return {"cells": out, "union": sorted([list(c) for c in union])}

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "backend": backend(), "version": __version__}

    return app


app = create_app()


def run(host: str = "127.0.0.1", port: int = 8000, workers: int = 2) -> None:
    import uvicorn

    uvicorn.run(create_app(workers), host=host, port=port)
