"""Shared builders for randomized test instances.

Everything is deterministic in the seed so failures reproduce.  Objectives
are weighted point-coverage functions with integer weights: non-decreasing,
submodular, and exactly representable in floats (sums stay far below 2**53).
"""

from __future__ import annotations

from fractions import Fraction
from pathlib import Path

import numpy as np

from coverplan.model import CallableObjective, Element, Instance, Policy

FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = Path(__file__).parent / "golden"

PROPORTION_GRID = 10**6


def cover_function(rng: np.random.Generator, ids, *, universe: int = 12,
                   max_cover: int = 5, max_weight: int = 9):
    """Random weighted point-coverage function over an abstract universe.

    Returns (objective, weights, covers); weights may be replaced to build
    perturbed twins over the same cover structure.
    """
    weights = [int(w) for w in rng.integers(0, max_weight + 1, size=universe)]
    covers = {}
    for eid in ids:
        k = int(rng.integers(1, max_cover + 1))
        covers[eid] = frozenset(int(p) for p in rng.choice(universe, size=k, replace=False))
    return coverage_objective(weights, covers), weights, covers


def coverage_objective(weights, covers) -> CallableObjective:
    def f(members: frozenset[int]):
        seen = set()
        for eid in members:
            seen |= covers[eid]
        return sum(weights[p] for p in seen)

    return CallableObjective(f)


def random_policy(rng: np.random.Generator, num_types: int, *,
                  constrained: bool = True) -> Policy:
    """Random proportions on the millionth grid with a random tie order.

    Constrained policies give every type a positive share with the shares
    summing to at most one; unconstrained policies are all zeros.
    """
    if constrained:
        raw = rng.integers(1, PROPORTION_GRID, size=num_types)
        scale = int(rng.integers(PROPORTION_GRID // 2, PROPORTION_GRID - num_types))
        total = int(raw.sum())
        units = [max(1, int(v) * scale // total) for v in raw]
        proportions = tuple(Fraction(u, PROPORTION_GRID) for u in units)
    else:
        proportions = (Fraction(0),) * num_types
    sigma = tuple(int(q) + 1 for q in rng.permutation(num_types))
    return Policy(proportions, sigma)


def random_instance(seed: int, *, max_rounds: int = 3, max_types: int = 3,
                    max_budget: int = 3, max_candidates: int = 8,
                    universe: int = 12, constrained: bool = True,
                    pad: bool = True) -> Instance:
    """Random instance whose pools hold a full budget of every type per round.

    A quota row never asks one type for more than the round budget, so full
    supply keeps every fill feasible without quota redistribution.
    """
    rng = np.random.default_rng(seed)
    horizon = int(rng.integers(1, max_rounds + 1))
    num_types = int(rng.integers(1, max_types + 1))
    budgets = []
    for _ in range(horizon):
        cap = min(max_budget, max_candidates // num_types)
        budgets.append(int(rng.integers(1, cap + 1)))
    elements = []
    eid = 0
    for t, b in enumerate(budgets, start=1):
        for q in range(1, num_types + 1):
            for _ in range(b):
                elements.append(Element(id=eid, round=t, type_id=q, cell=(0, eid)))
                eid += 1
        if pad:
            room = max_candidates - num_types * b
            for _ in range(int(rng.integers(0, room + 1))):
                q = int(rng.integers(1, num_types + 1))
                elements.append(Element(id=eid, round=t, type_id=q, cell=(0, eid)))
                eid += 1
    objective, _, _ = cover_function(rng, [e.id for e in elements], universe=universe)
    policy = random_policy(rng, num_types, constrained=constrained)
    return Instance(horizon=horizon, num_types=num_types, elements=tuple(elements),
                    budgets=tuple(budgets), policy=policy, objective=objective)


def exact(v) -> Fraction:
    """Value as an exact Fraction; floats must carry integer values."""
    if isinstance(v, float):
        assert v == int(v), f"non-integral float {v!r}"
        return Fraction(int(v))
    return Fraction(v)


# 1 - 1/e from below, so bounds scaled by it remain valid lower bounds.
ONE_MINUS_INV_E = 1 - Fraction(10**15, 2718281828459045)
