"""Record live service exchanges into tests/fixtures/recordings.json.

The browser client is tested against these recordings, so every URL and
request body here is built exactly the way src/api.ts builds it.  Rerun
after changing the service schema:

    python frontend/scripts/record-fixtures.py
"""

import json
import time
from pathlib import Path

from fastapi.testclient import TestClient

from coverplan.service import create_app

HERE = Path(__file__).resolve().parent
FIXTURES = HERE.parent / "tests" / "fixtures"
SCEN = HERE.parent.parent / "tests" / "fixtures"

TINY = """\
coverplan scenario v1
[meta]
name tiny-valid
rows 2
cols 2
years 1
districts 1
cell_km 1
tau 120
[budgets]
1
[policy]
mode dp0
mass 0.9
sigma 1
[friction]
10 10
10 10
[impassable]
0 1
[districts]
1 1
1 1
[population year=1]
5 5
5 5
[existing]
none
[candidates]
0 0
1 1
[end]
"""

exchanges = []


def record(client, method, url, *, body=None, text=None):
    if method == "GET":
        resp = client.get(url)
    elif body is not None:
        resp = client.post(url, json=body)
    else:
        resp = client.post(url, content=text)
    entry = {"method": method, "url": url, "status": resp.status_code}
    if body is not None:
        entry["body"] = body
    if text is not None:
        entry["text"] = text
    ctype = resp.headers.get("content-type", "")
    if ctype.startswith("application/json"):
        entry["response"] = resp.json()
    else:
        entry["response_text"] = resp.text
    exchanges.append(entry)
    return entry["response" if "response" in entry else "response_text"]


def wait(client, jid):
    for _ in range(6000):
        if client.get(f"/jobs/{jid}").json()["status"] in ("done", "failed"):
            return
        time.sleep(0.01)
    raise RuntimeError(f"job {jid} never finished")


def grid_url(sid, name, offset, limit, year=None):
    q = f"grid={name}"
    if year is not None:
        q += f"&year={year}"
    return f"/scenarios/{sid}?{q}&offset={offset}&limit={limit}"


def main():
    client = TestClient(create_app())

    s1 = client.post("/scenarios",
                     content=(SCEN / "golden16.scen").read_text()).json()["id"]
    s2 = client.post("/scenarios",
                     content=(SCEN / "retro8.scen").read_text()).json()["id"]

    record(client, "GET", "/healthz")
    record(client, "GET", f"/scenarios/{s1}")
    record(client, "GET", f"/scenarios/{s2}")
    record(client, "GET", "/scenarios/nope")
    record(client, "GET", "/jobs/nope")

    # grid layers: one default-sized page per layer, plus a 6-row paging
    # sequence over the friction grid for the assembly test
    record(client, "GET", grid_url(s1, "friction", 0, 64))
    for offset in (0, 6, 12):
        record(client, "GET", grid_url(s1, "friction", offset, 6))
    record(client, "GET", grid_url(s1, "districts", 0, 64))
    for year in range(1, 6):
        record(client, "GET", grid_url(s1, "population", 0, 64, year=year))

    def plan_body(policy):
        return {"policy": policy, "algorithm": "multistep", "budgets": None,
                "use_advice": False}

    plans = {}
    for policy in ("dp1", "dp0", "dp2"):
        resp = record(client, "POST", f"/scenarios/{s1}/plan",
                      body=plan_body(policy))
        wait(client, resp["job_id"])
        record(client, "GET", f"/jobs/{resp['job_id']}")
        plans[policy] = record(
            client, "GET", f"/jobs/{resp['job_id']}/result?format=json")

    # covered cells for every plan prefix, cells in pick order
    picked = []
    for row in plans["dp1"]["years"]:
        picked.extend(row["cells"])
        param = ";".join(f"{r},{c}" for r, c in picked)
        record(client, "GET", f"/scenarios/{s1}/coverage?cells={param}")

    # refinement against the recorded advice pins
    advice = record(client, "GET", f"/scenarios/{s2}")["advice"]["1"]
    refine_body = {"year": 1, "advice": advice, "permutations": 6, "seed": 3}
    resp = record(client, "POST", f"/scenarios/{s2}/refine", body=refine_body)
    wait(client, resp["job_id"])
    record(client, "GET", f"/jobs/{resp['job_id']}")
    retro = record(client, "GET", f"/jobs/{resp['job_id']}/result?format=json")

    # with no pins the editor falls back to a plain plan
    resp = record(client, "POST", f"/scenarios/{s2}/plan", body=plan_body("dp0"))
    wait(client, resp["job_id"])
    record(client, "GET", f"/jobs/{resp['job_id']}")
    plain = record(client, "GET", f"/jobs/{resp['job_id']}/result?format=json")

    record(client, "POST", f"/scenarios/{s2}/refine",
           body={"year": 1, "advice": [], "permutations": 6, "seed": 3})

    # a refine the client-side validator would have refused: the job fails
    s3 = record(client, "POST", "/scenarios", text=TINY)["id"]
    record(client, "GET", f"/scenarios/{s3}")
    resp = record(client, "POST", f"/scenarios/{s3}/refine",
                  body={"year": 1, "advice": [[0, 1]], "permutations": 1,
                        "seed": 0})
    wait(client, resp["job_id"])
    record(client, "GET", f"/jobs/{resp['job_id']}")
    record(client, "GET", f"/jobs/{resp['job_id']}/result?format=json")

    assert retro["refined_value"] >= retro["advice_value"]
    assert retro["greedy_value"] == plain["years"][0]["value"]

    out = FIXTURES / "recordings.json"
    out.write_text(json.dumps({"scenarios": {"region": s1, "advised": s2,
                                             "tiny": s3},
                               "exchanges": exchanges}, indent=1) + "\n")
    print(f"{len(exchanges)} exchanges -> {out}")
    print("refine:", retro["advice_value"], retro["greedy_value"],
          retro["refined_value"])


if __name__ == "__main__":
    main()
