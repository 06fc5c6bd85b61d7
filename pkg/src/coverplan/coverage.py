"""Grid coverage engine.

A facility opened at a cell in round t serves, in every year from t on,
all cells reachable within `tau` minutes of travel over the friction
surface.  The objective of a plan is the total person-years served:
for each year, the summed population weight of cells covered by at least
one facility opened in that year or earlier.

Pre-existing facilities are a frozen baseline: their coverage is unioned
into every year before planning and all reported values are gains over
that baseline.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .model import Element, InvalidSelectionError, ObjectiveState, SetObjective

DEFAULT_TAU = 120.0

Cell = tuple[int, int]


@dataclass(frozen=True)
class FrictionGrid:
    """Travel friction surface: minutes per km crossed, per cell."""

    minutes_per_km: np.ndarray
    cell_km: float = 1.0
    passable: np.ndarray | None = None

    def __post_init__(self):
        m = np.ascontiguousarray(self.minutes_per_km, dtype=np.float64)
        object.__setattr__(self, "minutes_per_km", m)
        if m.ndim != 2:
            raise ValueError("friction grid must be 2-D")
        if self.cell_km <= 0:
            raise ValueError("cell size must be positive")
        if (m <= 0).any():
            raise ValueError("friction must be positive everywhere")
        p = self.passable
        p = np.ones(m.shape, dtype=np.uint8) if p is None else np.ascontiguousarray(p, dtype=np.uint8)
        if p.shape != m.shape:
            raise ValueError("passable mask shape differs from friction grid")
        object.__setattr__(self, "passable", p)

    @property
    def rows(self) -> int:
        return self.minutes_per_km.shape[0]

    @property
    def cols(self) -> int:
        return self.minutes_per_km.shape[1]

    @property
    def size(self) -> int:
        return self.rows * self.cols

    def flat(self, cell: Cell) -> int:
        r, c = cell
        if not (0 <= r < self.rows and 0 <= c < self.cols):
            raise ValueError(f"cell {cell} outside {self.rows}x{self.cols} grid")
        return r * self.cols + c

    def unflat(self, idx: int) -> Cell:
        return divmod(int(idx), self.cols)


@dataclass(frozen=True)
class PopulationSeries:
    """Per-year population weight grids, shape (years, rows, cols)."""

    people: np.ndarray

    def __post_init__(self):
        p = np.ascontiguousarray(self.people, dtype=np.float64)
        object.__setattr__(self, "people", p)
        if p.ndim != 3:
            raise ValueError("population series must be (years, rows, cols)")
        if (p < 0).any():
            raise ValueError("population weights must be non-negative")

    @property
    def years(self) -> int:
        return self.people.shape[0]


def compute_covered(friction: FrictionGrid, cell: Cell, tau: float = DEFAULT_TAU) -> np.ndarray:
    """Flat indices of cells within tau travel minutes of `cell`."""
    src = np.array([friction.flat(cell)], dtype=np.int64)
    return kernels.covered_sets(friction.minutes_per_km, friction.passable, src,
                                friction.cell_km, tau)[0]


class CoverageModel:
    """Precomputed coverage geometry for a scenario.

    Holds the covered-cell set for every candidate (and existing) facility
    and the flattened per-year weights, which is everything the planning
    loops touch.
    """

    def __init__(self, friction: FrictionGrid, population: PopulationSeries,
                 candidates: Sequence[Cell], tau: float = DEFAULT_TAU,
                 existing: Sequence[Cell] = (), backend: str | None = None):
        if population.people.shape[1:] != friction.minutes_per_km.shape:
            raise ValueError("population grids do not match the friction grid")
        self.friction = friction
        self.population = population
        self.tau = float(tau)
        self.warnings: list[str] = []
        impl = kernels.get_impl(backend)

        seen: set[int] = set()
        flats: list[int] = []
        for cell in candidates:
            f = friction.flat(cell)
            if f not in seen:  # duplicate listings collapse to one candidate
                seen.add(f)
                flats.append(f)
        self.candidate_cells = tuple(friction.unflat(f) for f in flats)
        self.existing_cells = tuple(dict.fromkeys(existing))

        all_src = np.array(flats + [friction.flat(c) for c in self.existing_cells],
                           dtype=np.int64)
        sets = impl.covered_sets(friction.minutes_per_km, friction.passable, all_src,
                                 friction.cell_km, self.tau)
        self.covered = sets[:len(flats)]
        self._existing_covered = sets[len(flats):]
        self._index = {f: i for i, f in enumerate(flats)}

        for cell, cov in zip(self.candidate_cells, self.covered):
            if len(cov) == 0:
                self.warnings.append(f"candidate at {cell} is unreachable and covers nothing")
        for cell, cov in zip(self.existing_cells, self._existing_covered):
            if len(cov) == 0:
                self.warnings.append(f"existing facility at {cell} is unreachable and covers nothing")

        years = population.years
        n = friction.size
        self.weights = population.people.reshape(years, n)
        self.base_mask = np.zeros((years, n), dtype=np.uint8)
        for cov in self._existing_covered:
            if len(cov):
                self.base_mask[:, cov] = 1
        self.baseline = float((self.weights * self.base_mask).sum())

    @property
    def years(self) -> int:
        return self.population.years

    def covered_for(self, cell: Cell) -> np.ndarray:
        """Covered set of a candidate cell (flat indices)."""
        f = self.friction.flat(cell)
        try:
            return self.covered[self._index[f]]
        except KeyError:
            raise InvalidSelectionError(f"{cell} is not a candidate cell") from None

    def objective_f(self, cells_by_round: Sequence[Iterable[Cell]]) -> float:
        """Person-years gained over the baseline by a per-round cell plan."""
        if len(cells_by_round) > self.years:
            raise InvalidSelectionError("plan has more rounds than the population series")
        mask = self.base_mask.copy()
        for t, cells in enumerate(cells_by_round, 1):
            for cell in cells:
                cov = self.covered_for(cell)
                if len(cov):
                    mask[t - 1:, cov] = 1
        return float((self.weights * mask).sum()) - self.baseline


def build_coverage_model(friction: FrictionGrid, population: PopulationSeries,
                         candidates: Sequence[Cell] | None = None,
                         tau: float = DEFAULT_TAU, existing: Sequence[Cell] = (),
                         backend: str | None = None) -> CoverageModel:
    """Build the model; candidates default to every passable cell."""
    if candidates is None:
        flat = np.flatnonzero(friction.passable.ravel())
        candidates = [friction.unflat(i) for i in flat]
    return CoverageModel(friction, population, candidates, tau, existing, backend)


class CoverageObjective(SetObjective):
    """Objective over instance elements backed by a CoverageModel.

    Values are gains over the existing-facility baseline, so the empty
    selection evaluates to 0.
    """

    def __init__(self, model: CoverageModel, elements: Sequence[Element],
                 backend: str | None = None):
        self.model = model
        self._impl = kernels.get_impl(backend)
        self._cov: dict[int, np.ndarray] = {}
        self._round: dict[int, int] = {}
        for e in elements:
            if e.cell is None:
                raise ValueError(f"element {e.id} has no cell")
            self._cov[e.id] = model.covered_for(e.cell)
            self._round[e.id] = e.round
        if model.years < max(self._round.values(), default=1):
            raise ValueError("element rounds extend past the population series")

    def value(self, ids: Iterable[int]):
        mask = self.model.base_mask.copy()
        for eid in ids:
            cov = self._cov[eid]
            if len(cov):
                mask[self._round[eid] - 1:, cov] = 1
        return float((self.model.weights * mask).sum()) - self.model.baseline

    def make_state(self) -> "CoverageState":
        return CoverageState(self)


class CoverageState(ObjectiveState):
    def __init__(self, objective: CoverageObjective, _copy_from: "CoverageState | None" = None):
        self.objective = objective
        if _copy_from is None:
            self.mask = objective.model.base_mask.copy()
            self._value = 0.0
        else:
            self.mask = _copy_from.mask.copy()
            self._value = _copy_from._value

    @property
    def value(self) -> float:
        return self._value

    def gain(self, eid: int) -> float:
        o = self.objective
        return o._impl.coverage_gain(o._cov[eid], self.mask, o.model.weights, o._round[eid])

    def add(self, eid: int) -> float:
        o = self.objective
        g = o._impl.coverage_commit(o._cov[eid], self.mask, o.model.weights, o._round[eid])
        self._value += g
        return g

    def clone(self) -> "CoverageState":
        return CoverageState(self.objective, _copy_from=self)


def marginal_gain(state: ObjectiveState, eid: int):
    """Marginal value of adding `eid` on top of the state's selection."""
    return state.gain(eid)
