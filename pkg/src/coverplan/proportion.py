"""Proportionality machinery: satisfaction ratios, the min-ratio type
sequence, quota tables and feasibility checks.

All ratio arithmetic is exact (fractions), so sequence generation and
feasibility checks never depend on float rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .model import Instance, InvalidSelectionError, Policy, Selection, type_counts

INF = math.inf


def satisfaction_ratio(selection: Selection | Iterable[int], instance: Instance, q: int,
                       policy: Policy | None = None) -> Fraction | float:
    """Share of type q in the selection relative to its target share.

    Returns +inf for unconstrained types (target share zero).  Undefined on
    an empty selection.
    """
    policy = policy or instance.policy
    counts = type_counts(selection, instance)
    size = sum(counts)
    if size == 0:
        raise InvalidSelectionError("satisfaction ratio undefined for an empty selection")
    p = policy.proportions[q - 1]
    if p == 0:
        return INF
    return Fraction(counts[q - 1]) / (p * size)


def alpha_min(selection: Selection | Iterable[int], instance: Instance,
              policy: Policy | None = None) -> Fraction | float:
    """Worst satisfaction ratio across types."""
    policy = policy or instance.policy
    counts = type_counts(selection, instance)
    return ratio_min(counts, policy)


def ratio_min(counts: Sequence[int], policy: Policy) -> Fraction | float:
    """alpha_min computed from a per-type count vector."""
    size = sum(counts)
    if size == 0:
        raise InvalidSelectionError("satisfaction ratio undefined for an empty selection")
    best: Fraction | float = INF
    for q in policy.constrained_types:
        r = Fraction(counts[q - 1]) / (policy.proportions[q - 1] * size)
        if r < best:
            best = r
    return best


@dataclass(frozen=True)
class TypeSequence:
    """The min-ratio type sequence for a policy at a fixed denominator.

    entries[i] is the type (1-based) appended at step i+1.
    """

    entries: tuple[int, ...]
    denominator: int
    num_types: int

    def counts(self, n: int | None = None) -> tuple[int, ...]:
        """Per-type counts of the length-n prefix."""
        n = len(self.entries) if n is None else n
        out = [0] * self.num_types
        for q in self.entries[:n]:
            out[q - 1] += 1
        return tuple(out)


def min_ratio_sequence(policy: Policy, length: int, denominator: int | None = None) -> TypeSequence:
    """Build the sequence that greedily keeps per-type shares balanced.

    Each step appends the constrained type whose current count divided by
    its target (scaled by `denominator`) is smallest, ties broken by sigma
    rank.  The choice is invariant to the denominator, which only rescales
    every ratio; it is kept as an explicit argument because callers reason
    about length-d sequences.

    With no constrained types the sequence just cycles the types in sigma
    order.
    """
    d = length if denominator is None else denominator
    if length < 0:
        raise ValueError("sequence length must be non-negative")
    r = policy.num_types
    counts = [0] * r
    entries: list[int] = []
    constrained = policy.constrained_types
    if not constrained:
        order = sorted(range(1, r + 1), key=policy.rank)
        for i in range(length):
            entries.append(order[i % r])
        return TypeSequence(tuple(entries), d, r)
    for _ in range(length):
        best_q = None
        best_ratio: Fraction | None = None
        for q in constrained:
            ratio = Fraction(counts[q - 1]) / (policy.proportions[q - 1] * d)
            if (best_ratio is None or ratio < best_ratio
                    or (ratio == best_ratio and policy.rank(q) < policy.rank(best_q))):
                best_q = q
                best_ratio = ratio
        entries.append(best_q)
        counts[best_q - 1] += 1
    return TypeSequence(tuple(entries), d, r)


def beta(policy: Policy, b: int) -> Fraction | float:
    """Best achievable alpha_min over count vectors summing to b.

    This is the abstract optimum: it assumes every type has enough
    candidates available.  Use `availability_shortfall` to detect when an
    instance cannot realise it.
    """
    if b < 1:
        raise ValueError("beta needs a positive size")
    if policy.is_unconstrained:
        return INF
    counts = min_ratio_sequence(policy, b, b).counts()
    return ratio_min(counts, policy)


def availability_shortfall(policy: Policy, budgets: Sequence[int],
                           available: Sequence[Sequence[int]]) -> list[tuple[int, int, int, int]]:
    """Quota entries an instance cannot fill.

    `available[t-1][q-1]` counts round-t candidates of type q.  Returns
    (round, type, needed, available) tuples; empty means every quota is
    realisable.
    """
    table = quota_table(policy, budgets)
    out: list[tuple[int, int, int, int]] = []
    if table.unconstrained:
        return out
    for t, row in enumerate(table.rows, 1):
        for q, need in enumerate(row, 1):
            have = available[t - 1][q - 1]
            if need > have:
                out.append((t, q, need, have))
    return out


@dataclass(frozen=True)
class QuotaTable:
    """Per-round, per-type pick quotas derived from the min-ratio sequence.

    rows[t-1][q-1] is how many type-q elements round t must take.  Each row
    sums to that round's budget.  `unconstrained` marks the degenerate
    all-zero-shares policy, where rounds carry a bare cardinality budget.
    """

    rows: tuple[tuple[int, ...], ...]
    budgets: tuple[int, ...]
    unconstrained: bool = False

    def row(self, t: int) -> tuple[int, ...]:
        return self.rows[t - 1]


def quota_table(policy: Policy, budgets: Sequence[int]) -> QuotaTable:
    """Split each round's budget into per-type quotas.

    Round t's row is the count difference between the min-ratio sequences
    at the cumulative sizes through rounds t and t-1, so prefixes of any
    quota-respecting selection reproduce the sequence counts exactly.
    """
    budgets = tuple(int(b) for b in budgets)
    if any(b < 0 for b in budgets):
        raise ValueError("budgets must be non-negative")
    r = policy.num_types
    if policy.is_unconstrained:
        zeros = tuple(tuple(0 for _ in range(r)) for _ in budgets)
        return QuotaTable(zeros, budgets, unconstrained=True)
    rows: list[tuple[int, ...]] = []
    prev = (0,) * r
    total = 0
    for b in budgets:
        total += b
        cur = min_ratio_sequence(policy, total, total).counts() if total else prev
        rows.append(tuple(c - p for c, p in zip(cur, prev)))
        prev = cur
    table = QuotaTable(tuple(rows), budgets)
    for row, b in zip(table.rows, budgets):
        assert sum(row) == b and all(x >= 0 for x in row)
    return table


def is_sigma_type_feasible(selection: Selection, instance: Instance,
                           policy: Policy | None = None) -> tuple[bool, int | None]:
    """Check that every prefix's type counts match the min-ratio sequence.

    Cumulative prefix sizes are taken from the selection itself, so the
    check is meaningful for partial plans too.  Returns (ok, first bad
    round).  An all-zero-shares policy accepts everything.
    """
    policy = policy or instance.policy
    if policy.is_unconstrained:
        return True, None
    n = 0
    for t, picks in enumerate(selection.per_round, 1):
        n += len(picks)
        if n == 0:
            continue
        want = min_ratio_sequence(policy, n, n).counts()
        got = type_counts(selection.prefix(t), instance)
        if got != want:
            return False, t
    return True, None
