"""Core data model: elements, policies, instances, selections, objectives.

An instance describes a multi-round selection problem: a ground set of
elements partitioned by round and labelled with a type, per-round budgets,
and a proportionality policy over the types.  The objective is any
non-decreasing submodular set function over element ids; two concrete
implementations live here (explicit table) and in :mod:`coverplan.coverage`
(grid coverage).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable, Iterable, Mapping, Sequence


class PlanningError(Exception):
    """Base class for errors raised by the planning toolkit."""


class InvalidSelectionError(PlanningError):
    """A selection references unknown elements or breaks instance structure."""


class ShortfallError(PlanningError):
    """Not enough eligible elements to fill a budget."""


@dataclass(frozen=True)
class Element:
    """One candidate action: open a facility at `cell` in round `round`.

    `cell` is None for abstract instances that have no geometry.
    Types and rounds are 1-based to match the reporting conventions.
    """

    id: int
    round: int
    type_id: int
    cell: tuple[int, int] | None = None


@dataclass(frozen=True)
class Policy:
    """Proportionality targets: type q should get at least a `proportions[q-1]`
    share of every prefix, ties between types broken by `sigma` rank
    (lower rank preferred).

    Proportions are exact fractions; parsing snaps decimals onto a 10**-6
    grid so file round-trips stay exact.
    """

    proportions: tuple[Fraction, ...]
    sigma: tuple[int, ...] = ()
    name: str = ""

    def __post_init__(self):
        if not self.sigma:
            object.__setattr__(self, "sigma", tuple(range(1, len(self.proportions) + 1)))
        if sorted(self.sigma) != list(range(1, len(self.proportions) + 1)):
            raise ValueError(f"sigma must be a permutation of 1..{len(self.proportions)}")
        for p in self.proportions:
            if not (0 <= p <= 1):
                raise ValueError(f"proportion {p} outside [0, 1]")
        if sum(self.proportions) > 1:
            raise ValueError("proportions sum to more than 1")

    @property
    def num_types(self) -> int:
        return len(self.proportions)

    @property
    def constrained_types(self) -> tuple[int, ...]:
        """Types with a positive target share (1-based)."""
        return tuple(q for q, p in enumerate(self.proportions, 1) if p > 0)

    @property
    def is_unconstrained(self) -> bool:
        return not self.constrained_types

    def rank(self, q: int) -> int:
        return self.sigma[q - 1]


def snap_proportion(value: float | str | Fraction) -> Fraction:
    """Snap a share onto the 10**-6 grid used by scenario files."""
    if isinstance(value, Fraction):
        f = value
    else:
        f = Fraction(str(value))
    return Fraction(round(f * 1_000_000), 1_000_000)


class SetObjective:
    """Interface of a set function over element ids.

    `value` evaluates from scratch; `make_state` returns an incremental
    evaluator used by the planning loops.
    """

    def value(self, ids: Iterable[int]):
        raise NotImplementedError

    def make_state(self) -> "ObjectiveState":
        raise NotImplementedError


class ObjectiveState:
    """Incremental evaluation of an objective along a growing selection."""

    @property
    def value(self):
        raise NotImplementedError

    def gain(self, eid: int):
        """Marginal value of adding `eid` to the current selection."""
        raise NotImplementedError

    def add(self, eid: int):
        """Commit `eid`; returns its marginal value."""
        raise NotImplementedError

    def clone(self) -> "ObjectiveState":
        raise NotImplementedError


class TableObjective(SetObjective):
    """Set function given by an explicit table.

    Keys are canonical sorted id tuples.  Values may be ints, Fractions or
    floats; arithmetic preserves the given type, so adversarial fixtures
    can be evaluated exactly.
    """

    def __init__(self, table: Mapping[Sequence[int], object]):
        self.table = {tuple(sorted(k)): v for k, v in table.items()}
        if () not in self.table:
            self.table[()] = 0

    def value(self, ids: Iterable[int]):
        key = tuple(sorted(set(ids)))
        try:
            return self.table[key]
        except KeyError:
            raise InvalidSelectionError(f"no table entry for {key}") from None

    def make_state(self) -> "TableState":
        return TableState(self)


class TableState(ObjectiveState):
    def __init__(self, objective: TableObjective, members: frozenset[int] = frozenset(), value=None):
        self.objective = objective
        self.members = members
        self._value = objective.value(members) if value is None else value

    @property
    def value(self):
        return self._value

    def gain(self, eid: int):
        if eid in self.members:
            return 0
        return self.objective.value(self.members | {eid}) - self._value

    def add(self, eid: int):
        g = self.gain(eid)
        self.members = self.members | {eid}
        self._value = self._value + g
        return g

    def clone(self) -> "TableState":
        return TableState(self.objective, self.members, self._value)


class CallableObjective(SetObjective):
    """Wrap an arbitrary callable f(frozenset of ids) -> value.

    Evaluation is from scratch on every call; useful for oracles and small
    adversarial instances, not for planning loops on real grids.
    """

    def __init__(self, fn: Callable[[frozenset[int]], object]):
        self.fn = fn

    def value(self, ids: Iterable[int]):
        return self.fn(frozenset(ids))

    def make_state(self) -> "CallableState":
        return CallableState(self)


class CallableState(ObjectiveState):
    def __init__(self, objective: CallableObjective, members: frozenset[int] = frozenset()):
        self.objective = objective
        self.members = members
        self._value = objective.value(members)

    @property
    def value(self):
        return self._value

    def gain(self, eid: int):
        if eid in self.members:
            return 0
        return self.objective.value(self.members | {eid}) - self._value

    def add(self, eid: int):
        g = self.gain(eid)
        self.members = self.members | {eid}
        self._value = self._value + g
        return g

    def clone(self) -> "CallableState":
        c = CallableState.__new__(CallableState)
        c.objective = self.objective
        c.members = self.members
        c._value = self._value
        return c


@dataclass(frozen=True)
class Instance:
    """A full planning instance.

    `distinct_cells` applies to grid-backed instances: once a cell hosts a
    facility, elements at the same cell in later rounds become ineligible
    (a second facility on a cell adds nothing).
    """

    horizon: int
    num_types: int
    elements: tuple[Element, ...]
    budgets: tuple[int, ...]
    policy: Policy
    objective: SetObjective
    distinct_cells: bool = False

    @cached_property
    def by_id(self) -> dict[int, Element]:
        return {e.id: e for e in self.elements}

    @cached_property
    def by_round(self) -> tuple[tuple[Element, ...], ...]:
        rounds: list[list[Element]] = [[] for _ in range(self.horizon)]
        for e in self.elements:
            rounds[e.round - 1].append(e)
        return tuple(tuple(r) for r in rounds)

    def value(self, ids: Iterable[int]):
        return self.objective.value(ids)

    def element(self, eid: int) -> Element:
        try:
            return self.by_id[eid]
        except KeyError:
            raise InvalidSelectionError(f"unknown element id {eid}") from None


@dataclass(frozen=True)
class Selection:
    """Per-round picks, in pick order."""

    per_round: tuple[tuple[int, ...], ...]

    @classmethod
    def from_lists(cls, rounds: Iterable[Iterable[int]]) -> "Selection":
        return cls(tuple(tuple(r) for r in rounds))

    def prefix(self, t: int) -> tuple[int, ...]:
        """All ids picked in rounds 1..t, flattened."""
        out: list[int] = []
        for r in self.per_round[:t]:
            out.extend(r)
        return tuple(out)

    @property
    def all_ids(self) -> tuple[int, ...]:
        return self.prefix(len(self.per_round))

    def __len__(self) -> int:
        return sum(len(r) for r in self.per_round)


def type_counts(selection: Selection | Iterable[int], instance: Instance) -> tuple[int, ...]:
    """Count selected elements per type (index q-1 for type q)."""
    ids = selection.all_ids if isinstance(selection, Selection) else tuple(selection)
    counts = [0] * instance.num_types
    for eid in ids:
        counts[instance.element(eid).type_id - 1] += 1
    return tuple(counts)


def validate_instance(instance: Instance) -> list[str]:
    """Return a list of structural violations; empty means valid."""
    problems: list[str] = []
    if instance.horizon < 1:
        problems.append("horizon must be at least 1")
    if len(instance.budgets) != instance.horizon:
        problems.append(f"{len(instance.budgets)} budgets for horizon {instance.horizon}")
    for t, b in enumerate(instance.budgets, 1):
        if b < 0:
            problems.append(f"negative budget in round {t}")
    if instance.policy.num_types != instance.num_types:
        problems.append(
            f"policy covers {instance.policy.num_types} types, instance has {instance.num_types}"
        )
    seen: set[int] = set()
    for e in instance.elements:
        if e.id in seen:
            problems.append(f"duplicate element id {e.id}")
        seen.add(e.id)
        if not (1 <= e.round <= instance.horizon):
            problems.append(f"element {e.id} in round {e.round} outside 1..{instance.horizon}")
        if not (1 <= e.type_id <= instance.num_types):
            problems.append(f"element {e.id} has type {e.type_id} outside 1..{instance.num_types}")
    for t, b in enumerate(instance.budgets, 1):
        avail = sum(1 for e in instance.elements if e.round == t)
        if avail < b:
            problems.append(f"round {t} offers {avail} elements for budget {b}")
    return problems
