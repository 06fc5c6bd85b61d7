"""Scenario files: a self-contained text description of a planning region.

Format (all cells 0-based `row col`, values space-separated):

    coverplan scenario v1
    [meta]            rows/cols/years/districts, cell_km, tau, name, seed
    [budgets]         one integer per year
    [policy]          mode dp0|dp1|dp2|explicit, mass, sigma (rank per district)
    [rates need]      per-district unmet-need rate (drives dp1 shares)
    [rates coverage]  per-district current service coverage (drives dp2 shares)
    [proportions]     explicit per-district shares (mode explicit)
    [friction]        rows x cols minutes-per-km grid
    [impassable]      cells travel cannot cross (optional)
    [districts]       rows x cols district ids, 1..districts
    [population year=t]  one grid per year
    [existing]        cells with a facility already standing (or `none`)
    [candidates]      `all` or explicit cells
    [advice year=t]   suggested cells for year t (optional)
    [end]

The writer is canonical (fixed section order and number formatting), so
load -> dump round-trips canonical files byte-for-byte.  Shares and rates
are exact decimals on a 10^-6 grid; population weights should be
integers if exact objective comparisons matter downstream.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .coverage import (Cell, CoverageModel, CoverageObjective, FrictionGrid,
                       PopulationSeries, build_coverage_model)
from .model import Element, Instance, Policy, snap_proportion, validate_instance

HEADER = "coverplan scenario v1"
POLICY_MODES = ("dp0", "dp1", "dp2", "explicit")
DEFAULT_MASS = Fraction(9, 10)


class ScenarioFormatError(Exception):
    """A scenario file violates the format; message carries the line number."""


@dataclass(frozen=True)
class ScenarioFile:
    """Parsed scenario, geometry plus planning inputs."""

    name: str
    friction: FrictionGrid
    population: PopulationSeries
    districts: np.ndarray
    budgets: tuple[int, ...]
    policy_mode: str = "dp1"
    mass: Fraction = DEFAULT_MASS
    sigma: tuple[int, ...] = ()
    rates_need: tuple[Fraction, ...] | None = None
    rates_coverage: tuple[Fraction, ...] | None = None
    proportions: tuple[Fraction, ...] | None = None
    existing: tuple[Cell, ...] = ()
    candidates: tuple[Cell, ...] | None = None
    advice: Mapping[int, tuple[Cell, ...]] = field(default_factory=dict)
    tau: float = 120.0
    seed: int | None = None

    @property
    def num_districts(self) -> int:
        return int(self.districts.max())

    @property
    def years(self) -> int:
        return self.population.years


def _fmt_frac(v: Fraction) -> str:
    """Exact decimal for a fraction on the 10^-6 grid."""
    n = v * 1_000_000
    if n.denominator != 1:
        raise ValueError(f"{v} does not sit on the 10^-6 grid")
    digits = f"{int(n):07d}"
    s = digits[:-6] + "." + digits[-6:]
    return s.rstrip("0").rstrip(".")


def _fmt_num(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


def dumps_scenario(sf: ScenarioFile) -> str:
    rows, cols = sf.friction.rows, sf.friction.cols
    out: list[str] = [HEADER, "[meta]"]
    out.append(f"name {sf.name}")
    out.append(f"rows {rows}")
    out.append(f"cols {cols}")
    out.append(f"years {sf.years}")
    out.append(f"districts {sf.num_districts}")
    out.append(f"cell_km {_fmt_num(sf.friction.cell_km)}")
    out.append(f"tau {_fmt_num(sf.tau)}")
    if sf.seed is not None:
        out.append(f"seed {sf.seed}")
    out.append("[budgets]")
    out.append(" ".join(str(b) for b in sf.budgets))
    out.append("[policy]")
    out.append(f"mode {sf.policy_mode}")
    out.append(f"mass {_fmt_frac(sf.mass)}")
    out.append("sigma " + " ".join(str(s) for s in sf.sigma))
    if sf.rates_need is not None:
        out.append("[rates need]")
        out.append(" ".join(_fmt_frac(v) for v in sf.rates_need))
    if sf.rates_coverage is not None:
        out.append("[rates coverage]")
        out.append(" ".join(_fmt_frac(v) for v in sf.rates_coverage))
    if sf.proportions is not None:
        out.append("[proportions]")
        out.append(" ".join(_fmt_frac(v) for v in sf.proportions))
    out.append("[friction]")
    for r in range(rows):
        out.append(" ".join(_fmt_num(v) for v in sf.friction.minutes_per_km[r]))
    blocked = np.argwhere(sf.friction.passable == 0)
    if len(blocked):
        out.append("[impassable]")
        for r, c in blocked:
            out.append(f"{r} {c}")
    out.append("[districts]")
    for r in range(rows):
        out.append(" ".join(str(int(v)) for v in sf.districts[r]))
    for t in range(sf.years):
        out.append(f"[population year={t + 1}]")
        for r in range(rows):
            out.append(" ".join(_fmt_num(v) for v in sf.population.people[t, r]))
    out.append("[existing]")
    if sf.existing:
        for r, c in sf.existing:
            out.append(f"{r} {c}")
    else:
        out.append("none")
    out.append("[candidates]")
    if sf.candidates is None:
        out.append("all")
    else:
        for r, c in sf.candidates:
            out.append(f"{r} {c}")
    for t in sorted(sf.advice):
        out.append(f"[advice year={t}]")
        for r, c in sf.advice[t]:
            out.append(f"{r} {c}")
    out.append("[end]")
    return "\n".join(out) + "\n"


def save_scenario(sf: ScenarioFile, path: str | Path) -> None:
    Path(path).write_text(dumps_scenario(sf))


class _Reader:
    def __init__(self, text: str):
        self.lines = text.splitlines()
        self.pos = 0

    def fail(self, msg: str):
        raise ScenarioFormatError(f"line {self.pos}: {msg}")

    def next_line(self) -> str | None:
        while self.pos < len(self.lines):
            line = self.lines[self.pos].strip()
            self.pos += 1
            if line:
                return line
        return None

    def peek(self) -> str | None:
        save = self.pos
        line = self.next_line()
        self.pos = save
        return line


def _parse_cells(reader: _Reader, rows: int, cols: int) -> list[Cell]:
    cells: list[Cell] = []
    while True:
        line = reader.peek()
        if line is None or line.startswith("["):
            return cells
        reader.next_line()
        m = re.fullmatch(r"(\d+)\s+(\d+)", line)
        if not m:
            reader.fail(f"expected 'row col', got {line!r}")
        r, c = int(m.group(1)), int(m.group(2))
        if not (0 <= r < rows and 0 <= c < cols):
            reader.fail(f"cell {r} {c} outside the {rows}x{cols} grid")
        cells.append((r, c))


def _parse_grid(reader: _Reader, rows: int, cols: int, kind: str) -> np.ndarray:
    grid = np.empty((rows, cols), dtype=np.float64)
    for r in range(rows):
        line = reader.next_line()
        if line is None or line.startswith("["):
            reader.fail(f"{kind} grid ended early at row {r}")
        vals = line.split()
        if len(vals) != cols:
            reader.fail(f"{kind} row {r} has {len(vals)} values, expected {cols}")
        try:
            grid[r] = [float(v) for v in vals]
        except ValueError:
            reader.fail(f"{kind} row {r} has a non-numeric value")
    return grid


def loads_scenario(text: str) -> ScenarioFile:
    reader = _Reader(text)
    if reader.next_line() != HEADER:
        reader.fail(f"first line must be {HEADER!r}")
    if reader.next_line() != "[meta]":
        reader.fail("expected [meta]")
    meta: dict[str, str] = {}
    while True:
        line = reader.peek()
        if line is None:
            reader.fail("unexpected end of file in [meta]")
        if line.startswith("["):
            break
        reader.next_line()
        key, _, val = line.partition(" ")
        meta[key] = val.strip()
    for need in ("rows", "cols", "years", "districts"):
        if need not in meta:
            reader.fail(f"[meta] is missing {need}")
    try:
        rows, cols = int(meta["rows"]), int(meta["cols"])
        years, districts = int(meta["years"]), int(meta["districts"])
    except ValueError:
        reader.fail("rows/cols/years/districts must be integers")
    if min(rows, cols, years, districts) < 1:
        reader.fail("rows, cols, years and districts must be positive")
    name = meta.get("name", "unnamed")
    cell_km = float(meta.get("cell_km", "1"))
    tau = float(meta.get("tau", "120"))
    seed = int(meta["seed"]) if "seed" in meta else None

    budgets: tuple[int, ...] | None = None
    policy_mode = "dp1"
    mass = DEFAULT_MASS
    sigma: tuple[int, ...] = tuple(range(1, districts + 1))
    rates_need = rates_coverage = proportions = None
    friction_grid = None
    impassable: list[Cell] = []
    district_grid = None
    pop_grids: dict[int, np.ndarray] = {}
    existing: list[Cell] = []
    candidates: list[Cell] | None = None
    advice: dict[int, tuple[Cell, ...]] = {}
    ended = False

    while True:
        line = reader.next_line()
        if line is None:
            break
        if not line.startswith("["):
            reader.fail(f"expected a [section], got {line!r}")
        if line == "[end]":
            ended = True
            break
        elif line == "[budgets]":
            vals = reader.next_line()
            if vals is None:
                reader.fail("missing budget values")
            try:
                budgets = tuple(int(v) for v in vals.split())
            except ValueError:
                reader.fail("budgets must be integers")
            if len(budgets) != years:
                reader.fail(f"{len(budgets)} budgets for {years} years")
            if any(b < 0 for b in budgets):
                reader.fail("budgets must be non-negative")
        elif line == "[policy]":
            while True:
                nxt = reader.peek()
                if nxt is None or nxt.startswith("["):
                    break
                reader.next_line()
                key, _, val = nxt.partition(" ")
                if key == "mode":
                    if val not in POLICY_MODES:
                        reader.fail(f"unknown policy mode {val!r}")
                    policy_mode = val
                elif key == "mass":
                    mass = snap_proportion(val)
                elif key == "sigma":
                    sigma = tuple(int(v) for v in val.split())
                else:
                    reader.fail(f"unknown policy key {key!r}")
        elif line in ("[rates need]", "[rates coverage]", "[proportions]"):
            vals = reader.next_line()
            if vals is None:
                reader.fail("missing values")
            try:
                fr = tuple(snap_proportion(v) for v in vals.split())
            except ValueError:
                reader.fail("values must be decimals")
            if len(fr) != districts:
                reader.fail(f"{len(fr)} values for {districts} districts")
            if line == "[rates need]":
                rates_need = fr
            elif line == "[rates coverage]":
                rates_coverage = fr
            else:
                proportions = fr
        elif line == "[friction]":
            friction_grid = _parse_grid(reader, rows, cols, "friction")
        elif line == "[impassable]":
            impassable = _parse_cells(reader, rows, cols)
        elif line == "[districts]":
            district_grid = _parse_grid(reader, rows, cols, "districts")
        elif line.startswith("[population"):
            m = re.fullmatch(r"\[population year=(\d+)\]", line)
            if not m:
                reader.fail(f"bad population header {line!r}")
            year = int(m.group(1))
            if not (1 <= year <= years):
                reader.fail(f"population year {year} outside 1..{years}")
            pop_grids[year] = _parse_grid(reader, rows, cols, f"population year {year}")
        elif line == "[existing]":
            if reader.peek() == "none":
                reader.next_line()
            else:
                existing = _parse_cells(reader, rows, cols)
        elif line == "[candidates]":
            if reader.peek() == "all":
                reader.next_line()
                candidates = None
            else:
                candidates = _parse_cells(reader, rows, cols)
        elif line.startswith("[advice"):
            m = re.fullmatch(r"\[advice year=(\d+)\]", line)
            if not m:
                reader.fail(f"bad advice header {line!r}")
            year = int(m.group(1))
            if not (1 <= year <= years):
                reader.fail(f"advice year {year} outside 1..{years}")
            advice[year] = tuple(_parse_cells(reader, rows, cols))
        else:
            reader.fail(f"unknown section {line}")

    if not ended:
        raise ScenarioFormatError("missing [end] marker")
    if budgets is None:
        raise ScenarioFormatError("missing [budgets] section")
    if friction_grid is None:
        raise ScenarioFormatError("missing [friction] section")
    if district_grid is None:
        raise ScenarioFormatError("missing [districts] section")
    missing_years = [t for t in range(1, years + 1) if t not in pop_grids]
    if missing_years:
        raise ScenarioFormatError(f"missing population grids for years {missing_years}")

    dist = district_grid.astype(np.int64)
    if (dist != district_grid).any():
        raise ScenarioFormatError("district ids must be integers")
    if dist.min() < 1 or dist.max() > districts:
        raise ScenarioFormatError(f"district ids must lie in 1..{districts}")
    if sorted(sigma) != list(range(1, districts + 1)):
        raise ScenarioFormatError(f"sigma must be a permutation of 1..{districts}")
    if policy_mode == "explicit" and proportions is None:
        raise ScenarioFormatError("mode explicit needs a [proportions] section")
    if any(v <= 0 for v in rates_coverage or ()):
        raise ScenarioFormatError("coverage rates must be positive")

    passable = np.ones((rows, cols), dtype=np.uint8)
    for r, c in impassable:
        passable[r, c] = 0
    friction = FrictionGrid(friction_grid, cell_km, passable)
    population = PopulationSeries(np.stack([pop_grids[t] for t in range(1, years + 1)]))

    # duplicate candidate cells collapse to their first listing
    if candidates is not None:
        candidates = list(dict.fromkeys(candidates))
        cand_set = set(candidates)
    else:
        cand_set = {(r, c) for r in range(rows) for c in range(cols) if passable[r, c]}
    for year, cells in advice.items():
        bad = [cell for cell in cells if cell not in cand_set]
        if bad:
            raise ScenarioFormatError(f"advice year {year} uses non-candidate cells {bad}")

    return ScenarioFile(
        name=name, friction=friction, population=population, districts=dist,
        budgets=budgets, policy_mode=policy_mode, mass=mass, sigma=sigma,
        rates_need=rates_need, rates_coverage=rates_coverage, proportions=proportions,
        existing=tuple(dict.fromkeys(existing)),
        candidates=None if candidates is None else tuple(candidates),
        advice=advice, tau=tau, seed=seed)


def load_scenario(path: str | Path) -> ScenarioFile:
    return loads_scenario(Path(path).read_text())


def derive_policy_proportions(sf: ScenarioFile, mode: str | None = None,
                              mass: Fraction | None = None) -> Policy:
    """Turn district indicator rates into proportionality targets.

    dp0 ignores districts entirely.  dp1 gives each district a share of
    the target mass proportional to its unmet-need rate; dp2 proportional
    to the inverse of its current coverage.
    """
    mode = mode or sf.policy_mode
    mass = sf.mass if mass is None else mass
    r = sf.num_districts
    if mode not in POLICY_MODES:
        raise ValueError(f"unknown policy mode {mode!r}")
    if mode == "dp0":
        props = (Fraction(0),) * r
    elif mode == "explicit":
        if sf.proportions is None:
            raise ValueError("scenario has no explicit proportions")
        props = sf.proportions
    elif mode == "dp1":
        if sf.rates_need is None:
            raise ValueError("dp1 needs a [rates need] section")
        total = sum(sf.rates_need)
        props = tuple(snap_proportion(v / total * mass) for v in sf.rates_need)
    else:
        if sf.rates_coverage is None:
            raise ValueError("dp2 needs a [rates coverage] section")
        inv = [Fraction(1) / v for v in sf.rates_coverage]
        total = sum(inv)
        props = tuple(snap_proportion(v / total * mass) for v in inv)
    return Policy(props, sf.sigma, name=mode)


@dataclass
class BuiltScenario:
    """Scenario lifted into a ready-to-plan instance."""

    scenario: ScenarioFile
    instance: Instance
    model: CoverageModel
    policy: Policy
    cell_of: dict[int, Cell]
    id_of: dict[tuple[int, Cell], int]


def build_instance(sf: ScenarioFile, *, policy_mode: str | None = None,
                   budgets: Sequence[int] | None = None,
                   backend: str | None = None) -> BuiltScenario:
    """Construct the planning instance a scenario describes.

    Candidate cells become one element per (cell, year); the element's
    type is its cell's district.  The same cell may be chosen in whichever
    year the planner prefers, once.
    """
    policy = derive_policy_proportions(sf, policy_mode)
    use_budgets = tuple(int(b) for b in (budgets if budgets is not None else sf.budgets))
    if len(use_budgets) != sf.years:
        raise ValueError(f"{len(use_budgets)} budgets for {sf.years} years")
    if sf.candidates is None:
        cand = [(r, c) for r in range(sf.friction.rows) for c in range(sf.friction.cols)
                if sf.friction.passable[r, c]]
    else:
        cand = list(sf.candidates)
    model = build_coverage_model(sf.friction, sf.population, cand, sf.tau,
                                 sf.existing, backend)
    elements: list[Element] = []
    cell_of: dict[int, Cell] = {}
    id_of: dict[tuple[int, Cell], int] = {}
    eid = 0
    for t in range(1, sf.years + 1):
        for cell in model.candidate_cells:
            r, c = cell
            e = Element(eid, t, int(sf.districts[r, c]), cell)
            elements.append(e)
            cell_of[eid] = cell
            id_of[(t, cell)] = eid
            eid += 1
    objective = CoverageObjective(model, elements, backend)
    instance = Instance(sf.years, sf.num_districts, tuple(elements), use_budgets,
                        policy, objective, distinct_cells=True)
    problems = validate_instance(instance)
    if problems:
        raise ValueError("scenario produced an invalid instance: " + "; ".join(problems))
    return BuiltScenario(sf, instance, model, policy, cell_of, id_of)


def advice_ids(built: BuiltScenario) -> dict[int, list[int]]:
    """Map the scenario's advice cells to element ids per year."""
    out: dict[int, list[int]] = {}
    for year, cells in built.scenario.advice.items():
        out[year] = [built.id_of[(year, cell)] for cell in cells]
    return out


def _smooth_field(rng: np.random.Generator, rows: int, cols: int, bumps: int,
                  amp_lo: float, amp_hi: float) -> np.ndarray:
    rr, cc = np.mgrid[0:rows, 0:cols]
    out = np.zeros((rows, cols))
    for _ in range(bumps):
        cr, cc0 = rng.uniform(0, rows), rng.uniform(0, cols)
        amp = rng.uniform(amp_lo, amp_hi)
        width = rng.uniform(min(rows, cols) / 6, min(rows, cols) / 2.5)
        out += amp * np.exp(-((rr - cr) ** 2 + (cc - cc0) ** 2) / (2 * width ** 2))
    return out


def generate_synthetic_region(seed: int = 0, rows: int = 16, cols: int = 16,
                              districts: int = 3, years: int = 5, budget: int = 3,
                              existing_count: int | None = None,
                              tau: float = 120.0) -> ScenarioFile:
    """Fabricate a deterministic region: smooth friction, clustered
    population with per-district growth, nearest-seed districts."""
    rng = np.random.default_rng(seed)
    n = rows * cols

    seeds = rng.choice(n, size=districts, replace=False)
    seed_pts = np.array([(s // cols, s % cols) for s in seeds], dtype=np.float64)
    rr, cc = np.mgrid[0:rows, 0:cols]
    d2 = ((rr[..., None] - seed_pts[:, 0]) ** 2
          + (cc[..., None] - seed_pts[:, 1]) ** 2)
    district_grid = (d2.argmin(axis=2) + 1).astype(np.int64)

    friction = 12.0 + _smooth_field(rng, rows, cols, 4, 5.0, 45.0)
    friction = np.round(friction, 1)

    base_pop = _smooth_field(rng, rows, cols, districts + 2, 150.0, 900.0)
    base_pop += rng.uniform(0.0, 25.0, size=(rows, cols))
    growth = rng.uniform(1.01, 1.06, size=districts)
    pops = []
    for t in range(years):
        factor = growth[district_grid - 1] ** t
        pops.append(np.round(base_pop * factor))
    population = PopulationSeries(np.stack(pops))

    rates_need = tuple(Fraction(int(v), 100)
                       for v in rng.integers(25, 86, size=districts))
    rates_coverage = tuple(Fraction(int(v), 100)
                           for v in rng.integers(20, 91, size=districts))

    k = existing_count if existing_count is not None else max(1, districts // 2)
    existing_flat = rng.choice(n, size=k, replace=False)
    existing = tuple((int(f) // cols, int(f) % cols) for f in existing_flat)

    return ScenarioFile(
        name=f"synth-{seed}-{rows}x{cols}",
        friction=FrictionGrid(friction),
        population=population,
        districts=district_grid,
        budgets=(budget,) * years,
        policy_mode="dp1",
        mass=DEFAULT_MASS,
        sigma=tuple(range(1, districts + 1)),
        rates_need=rates_need,
        rates_coverage=rates_coverage,
        existing=existing,
        candidates=None,
        advice={},
        tau=tau,
        seed=seed)
