"""Plan-result serialisation.

One writer feeds both the CLI and the HTTP service so a plan saved from
either is byte-identical.  The format mirrors the scenario files: line
oriented, `[section]` headers, cells as 0-based `row col`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .algorithms import PlanResult, RetroReport
from .scenario import BuiltScenario, _fmt_num

RESULT_HEADER = "coverplan result v1"
RETRO_HEADER = "coverplan retro v1"


def _fmt_alpha(a) -> str:
    if a is None:
        return "-"
    if isinstance(a, float) and math.isinf(a):
        return "inf"
    if isinstance(a, Fraction):
        return f"{a.numerator}/{a.denominator}" if a.denominator != 1 else str(a.numerator)
    return _fmt_num(a)


def parse_alpha(s: str):
    if s == "-":
        return None
    if s == "inf":
        return math.inf
    if "/" in s:
        return Fraction(s)
    return Fraction(s)


def format_plan_result(result: PlanResult, built: BuiltScenario) -> str:
    sf = built.scenario
    out = [RESULT_HEADER, "[params]"]
    out.append(f"scenario {sf.name}")
    out.append(f"algorithm {result.algorithm}")
    out.append(f"policy {result.policy_name}")
    out.append("budgets " + " ".join(str(b) for b in built.instance.budgets))
    out.append(f"tau {_fmt_num(sf.tau)}")
    out.append(f"baseline {_fmt_num(built.model.baseline)}")
    for t, picks in enumerate(result.selection.per_round, 1):
        out.append(f"[selection year={t}]")
        for eid in picks:
            r, c = built.cell_of[eid]
            out.append(f"{r} {c}")
    out.append("[trajectory]")
    out.append("year value alpha_min")
    for t in range(len(result.values)):
        out.append(f"{t + 1} {_fmt_num(result.values[t])} {_fmt_alpha(result.alpha[t])}")
    if result.quotas is not None and not result.quotas.unconstrained:
        out.append("[quotas]")
        for row in result.quotas.rows:
            out.append(" ".join(str(x) for x in row))
    out.append("[diagnostics]")
    if result.diagnostics:
        out.extend(result.diagnostics)
    else:
        out.append("none")
    out.append("[counters]")
    out.append(f"gain_evals {result.gain_evals}")
    out.append("[end]")
    return "\n".join(out) + "\n"


@dataclass
class ParsedPlan:
    """A plan result read back from its text form."""

    scenario: str
    algorithm: str
    policy: str
    budgets: tuple[int, ...]
    baseline: float
    cells: tuple[tuple[tuple[int, int], ...], ...]
    values: tuple[float, ...]
    alpha: tuple[object, ...]
    quotas: tuple[tuple[int, ...], ...] | None
    diagnostics: tuple[str, ...]
    gain_evals: int


def parse_plan_result(text: str) -> ParsedPlan:
    lines = [ln for ln in text.splitlines()]
    if not lines or lines[0] != RESULT_HEADER:
        raise ValueError(f"not a plan result file (expected {RESULT_HEADER!r})")
    params: dict[str, str] = {}
    cells: list[list[tuple[int, int]]] = []
    values: list[float] = []
    alpha: list[object] = []
    quotas: list[tuple[int, ...]] = []
    diagnostics: list[str] = []
    gain_evals = 0
    section = ""
    for ln in lines[1:]:
        if not ln.strip():
            continue
        if ln.startswith("["):
            section = ln
            if ln.startswith("[selection"):
                cells.append([])
            continue
        if section == "[params]":
            key, _, val = ln.partition(" ")
            params[key] = val
        elif section.startswith("[selection"):
            r, c = ln.split()
            cells[-1].append((int(r), int(c)))
        elif section == "[trajectory]":
            if ln.startswith("year "):
                continue
            _, val, a = ln.split()
            values.append(float(val))
            alpha.append(parse_alpha(a))
        elif section == "[quotas]":
            quotas.append(tuple(int(x) for x in ln.split()))
        elif section == "[diagnostics]":
            if ln != "none":
                diagnostics.append(ln)
        elif section == "[counters]":
            key, _, val = ln.partition(" ")
            if key == "gain_evals":
                gain_evals = int(val)
    return ParsedPlan(
        scenario=params.get("scenario", ""),
        algorithm=params.get("algorithm", ""),
        policy=params.get("policy", ""),
        budgets=tuple(int(b) for b in params.get("budgets", "").split()),
        baseline=float(params.get("baseline", "0")),
        cells=tuple(tuple(c) for c in cells),
        values=tuple(values),
        alpha=tuple(alpha),
        quotas=tuple(quotas) if quotas else None,
        diagnostics=tuple(diagnostics),
        gain_evals=gain_evals)


def plan_result_json(result: PlanResult, built: BuiltScenario) -> dict:
    """JSON-friendly view of a plan result for API clients."""
    sf = built.scenario
    years = []
    for t, picks in enumerate(result.selection.per_round, 1):
        years.append({
            "year": t,
            "cells": [list(built.cell_of[eid]) for eid in picks],
            "value": result.values[t - 1],
            "alpha_min": _fmt_alpha(result.alpha[t - 1]),
        })
    quotas = None
    if result.quotas is not None and not result.quotas.unconstrained:
        quotas = [list(row) for row in result.quotas.rows]
    return {
        "scenario": sf.name,
        "algorithm": result.algorithm,
        "policy": result.policy_name,
        "budgets": list(built.instance.budgets),
        "baseline": built.model.baseline,
        "years": years,
        "quotas": quotas,
        "diagnostics": list(result.diagnostics),
        "gain_evals": result.gain_evals,
    }


def format_retro_report(report: RetroReport, built: BuiltScenario,
                        year: int = 1) -> str:
    out = [RETRO_HEADER, "[params]"]
    out.append(f"scenario {built.scenario.name}")
    out.append(f"year {year}")
    out.append(f"budget {len(report.refined_picks)}")
    out.append(f"permutations {report.permutations}")
    out.append(f"seed {report.seed}")
    out.append("[values]")
    out.append(f"advice {_fmt_num(report.advice_value)}")
    out.append(f"greedy {_fmt_num(report.greedy_value)}")
    out.append(f"refined {_fmt_num(report.refined_value)}")
    out.append(f"strictly_ordered {'true' if report.strictly_ordered else 'false'}")
    out.append(f"best_permutation {report.best_permutation}")
    out.append("[selection greedy]")
    for eid in report.greedy_picks:
        r, c = built.cell_of[eid]
        out.append(f"{r} {c}")
    out.append("[selection refined]")
    for eid in report.refined_picks:
        r, c = built.cell_of[eid]
        out.append(f"{r} {c}")
    out.append("[end]")
    return "\n".join(out) + "\n"


def retro_report_json(report: RetroReport, built: BuiltScenario, year: int = 1,
                      advice_cells: list | None = None) -> dict:
    refined = [list(built.cell_of[eid]) for eid in report.refined_picks]
    survivors = None
    if advice_cells is not None:
        refined_set = {tuple(c) for c in refined}
        survivors = [list(c) for c in advice_cells if tuple(c) in refined_set]
    return {
        "scenario": built.scenario.name,
        "year": year,
        "advice_value": _num(report.advice_value),
        "greedy_value": _num(report.greedy_value),
        "refined_value": _num(report.refined_value),
        "strictly_ordered": report.strictly_ordered,
        "best_permutation": report.best_permutation,
        "permutations": report.permutations,
        "seed": report.seed,
        "greedy_cells": [list(built.cell_of[eid]) for eid in report.greedy_picks],
        "refined_cells": refined,
        "advice_cells": advice_cells,
        "surviving_advice": survivors,
    }


def _num(x):
    return float(x) if not isinstance(x, (int, float)) else x


def save_text(text: str, path: str | Path) -> None:
    Path(path).write_text(text)
