"""Exhaustive reference implementations.

Everything here trades speed for trustworthiness: optima come from raw
enumeration, feasibility classes are expanded from their definitions, and
ratio comparisons use integer cross-multiplication.  The planning
algorithms are never called.  Guards abort enumerations that would exceed
a work bound instead of silently grinding.

The module doubles as the fixture generator: `write_expectations` emits
the derived-value files the test suite freezes (one `key value` pair per
line, `#` comments, values parsed by the consumer).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

from .model import Instance, Policy, Selection, SetObjective

INF = math.inf


class EnumerationGuardError(Exception):
    """The requested enumeration exceeds the work guard."""


def _evaluator(objective) -> Callable[[frozenset[int]], object]:
    if isinstance(objective, SetObjective):
        return lambda ids: objective.value(ids)
    if callable(objective):
        return objective
    raise TypeError("objective must be a SetObjective or a callable on frozensets")


def _ratio_less(count_a: int, p_a: Fraction, count_b: int, p_b: Fraction) -> bool:
    """count_a / p_a < count_b / p_b via integer cross-multiplication."""
    return (count_a * p_a.denominator * p_b.numerator
            < count_b * p_b.denominator * p_a.numerator)


def sequence_counts(policy: Policy, n: int) -> tuple[int, ...]:
    """Per-type counts after n steps of the balanced-shares recursion.

    Deliberately a from-scratch reimplementation (integer arithmetic, no
    shared code) so it can vouch for the production sequence generator.
    """
    counts = [0] * policy.num_types
    constrained = policy.constrained_types
    if not constrained:
        order = sorted(range(1, policy.num_types + 1), key=policy.rank)
        for i in range(n):
            counts[order[i % len(order)] - 1] += 1
        return tuple(counts)
    props = policy.proportions
    for _ in range(n):
        best = constrained[0]
        for q in constrained[1:]:
            if _ratio_less(counts[q - 1], props[q - 1], counts[best - 1], props[best - 1]):
                best = q
            elif (not _ratio_less(counts[best - 1], props[best - 1], counts[q - 1], props[q - 1])
                  and policy.rank(q) < policy.rank(best)):
                best = q
        counts[best - 1] += 1
    return tuple(counts)


def _compositions(total: int, caps: Sequence[int]):
    """All ways to split `total` into len(caps) bounded non-negative parts."""
    r = len(caps)

    def rec(i: int, left: int, acc: list[int]):
        if i == r - 1:
            if left <= caps[i]:
                yield tuple(acc + [left])
            return
        for v in range(min(left, caps[i]) + 1):
            yield from rec(i + 1, left - v, acc + [v])

    yield from rec(0, total, [])


def _alpha_of_counts(counts: Sequence[int], policy: Policy) -> Fraction | float:
    size = sum(counts)
    best: Fraction | float = INF
    for q in policy.constrained_types:
        r = Fraction(counts[q - 1], 1) / (policy.proportions[q - 1] * size)
        if r < best:
            best = r
    return best


def brute_force_beta(policy: Policy, b: int, available: Sequence[int] | None = None,
                     guard: int = 1_000_000):
    """Best achievable worst-ratio over all per-type count splits of b.

    `available` caps each type's count (per-type candidate supply); omit
    it for the unconstrained-supply value.
    """
    if b < 1:
        raise ValueError("need a positive selection size")
    if policy.is_unconstrained:
        return INF
    caps = list(available) if available is not None else [b] * policy.num_types
    est = math.comb(b + policy.num_types - 1, policy.num_types - 1)
    if est > guard:
        raise EnumerationGuardError(f"{est} compositions exceed the guard ({guard})")
    best = None
    for counts in _compositions(b, caps):
        a = _alpha_of_counts(counts, policy)
        if best is None or a > best:
            best = a
    if best is None:
        raise ValueError("supply cannot realise any size-b selection")
    return best


def _tie_set_size(counts: Sequence[int], policy: Policy, beta_value,
                  types_present: Sequence[int]) -> int:
    """|{q : ratio == beta and round t offers type q}|."""
    n = 0
    for q in policy.constrained_types:
        if q not in types_present:
            continue
        r = Fraction(counts[q - 1], 1) / (policy.proportions[q - 1] * sum(counts))
        if r == beta_value:
            n += 1
    return n


@dataclass
class OracleResult:
    value: object
    selection: Selection
    evaluations: int
    feasible_count: int


CONSTRAINTS = ("cardinality", "partition-matroid", "sigma-type-feasible", "type-feasible")


def brute_force_opt(instance: Instance, constraint: str = "cardinality", *,
                    caps_per_round: Sequence[Sequence[int]] | None = None,
                    per_prefix: bool = False, guard: int = 10_000_000):
    """Exact optimum over all selections of the given feasibility class.

    Classes:
      cardinality          exactly the round budget, any types
      partition-matroid    per-round per-type caps (`caps_per_round`)
      sigma-type-feasible  per-prefix type counts equal the balanced-shares
                           recursion (quota rows, expanded here)
      type-feasible        every prefix attains the best worst-ratio for
                           its size and, among those, the fewest types
                           stuck at that ratio

    With per_prefix=True returns one OracleResult per round t, each the
    optimum over feasible prefixes through round t.
    """
    if constraint not in CONSTRAINTS:
        raise ValueError(f"unknown constraint class {constraint!r}")
    evalf = _evaluator(instance.objective)
    policy = instance.policy
    h = instance.horizon
    rounds = [sorted(e.id for e in instance.by_round[t]) for t in range(h)]
    type_of = {e.id: e.type_id for e in instance.elements}

    if constraint == "partition-matroid" and caps_per_round is None:
        raise ValueError("partition-matroid needs caps_per_round")
    if constraint == "sigma-type-feasible":
        if policy.is_unconstrained:
            constraint = "cardinality"
        else:
            prev = (0,) * policy.num_types
            caps_rows = []
            total = 0
            for b in instance.budgets:
                total += b
                cur = sequence_counts(policy, total)
                caps_rows.append(tuple(c - p for c, p in zip(cur, prev)))
                prev = cur
            caps_per_round = caps_rows
            constraint = "partition-matroid"

    combos: list[list[tuple[int, ...]]] = []
    for t in range(h):
        b = instance.budgets[t]
        if constraint == "partition-matroid":
            want = tuple(caps_per_round[t])
            cs = [c for c in combinations(rounds[t], b)
                  if _counts_of(c, type_of, instance.num_types) == want]
        else:
            cs = list(combinations(rounds[t], b))
        if not cs:
            raise ValueError(f"round {t + 1} admits no feasible selection")
        combos.append(cs)

    work = 1
    total_work = 0
    for cs in combos:
        work *= len(cs)
        total_work += work
    if total_work > guard:
        raise EnumerationGuardError(f"{total_work} prefixes exceed the guard ({guard})")

    prefix_targets = None
    if constraint == "type-feasible":
        prefix_targets = []
        cum_avail = [0] * instance.num_types
        total = 0
        for t in range(h):
            for eid in rounds[t]:
                cum_avail[type_of[eid] - 1] += 1
            total += instance.budgets[t]
            if policy.is_unconstrained:
                prefix_targets.append(None)
                continue
            types_present = sorted({type_of[eid] for eid in rounds[t]})
            best_alpha = None
            best_tie = None
            for counts in _compositions(total, cum_avail):
                a = _alpha_of_counts(counts, policy)
                if best_alpha is None or a > best_alpha:
                    best_alpha = a
            for counts in _compositions(total, cum_avail):
                if _alpha_of_counts(counts, policy) != best_alpha:
                    continue
                tie = _tie_set_size(counts, policy, best_alpha, types_present)
                if best_tie is None or tie < best_tie:
                    best_tie = tie
            prefix_targets.append((best_alpha, best_tie, types_present))

    best_at: list[OracleResult | None] = [None] * h
    evaluations = 0
    feasible = [0] * h

    def ok_prefix(t: int, counts: list[int]) -> bool:
        if prefix_targets is None or prefix_targets[t] is None:
            return True
        best_alpha, best_tie, types_present = prefix_targets[t]
        if _alpha_of_counts(counts, policy) != best_alpha:
            return False
        return _tie_set_size(counts, policy, best_alpha, types_present) == best_tie

    def rec(t: int, chosen: list[tuple[int, ...]], counts: list[int]):
        nonlocal evaluations
        for combo in combos[t]:
            new_counts = list(counts)
            for eid in combo:
                new_counts[type_of[eid] - 1] += 1
            if constraint == "type-feasible" and not ok_prefix(t, new_counts):
                continue
            chosen.append(combo)
            feasible[t] += 1
            if per_prefix or t == h - 1:
                ids = frozenset(e for c in chosen for e in c)
                val = evalf(ids)
                evaluations += 1
                cur = best_at[t]
                if cur is None or val > cur.value:
                    best_at[t] = OracleResult(val, Selection.from_lists(chosen), 0, 0)
            if t + 1 < h:
                rec(t + 1, chosen, new_counts)
            chosen.pop()

    rec(0, [], [0] * instance.num_types)
    for t in range(h):
        if best_at[t] is not None:
            best_at[t].evaluations = evaluations
            best_at[t].feasible_count = feasible[t]
    if per_prefix:
        return best_at
    return best_at[h - 1]


def _counts_of(ids: Iterable[int], type_of: Mapping[int, int], r: int) -> tuple[int, ...]:
    counts = [0] * r
    for eid in ids:
        counts[type_of[eid] - 1] += 1
    return tuple(counts)


def brute_force_matroid_opt(ground: Sequence[int], objective,
                            can_add: Sequence[Callable[[list[int], int], bool]],
                            guard: int = 10_000_000) -> OracleResult:
    """Optimum over all subsets independent in every given oracle.

    Independence of a set is checked by inserting its elements in
    ascending order, which is exact for matroids (and anything else whose
    independent sets are order-insensitive).
    """
    ground = sorted(ground)
    if 2 ** len(ground) > guard:
        raise EnumerationGuardError(f"2^{len(ground)} subsets exceed the guard ({guard})")
    evalf = _evaluator(objective)
    best_val = None
    best_set: tuple[int, ...] = ()
    evaluations = 0
    feasible = 0
    for size in range(len(ground) + 1):
        for combo in combinations(ground, size):
            picked: list[int] = []
            ok = True
            for eid in combo:
                if all(fn(picked, eid) for fn in can_add):
                    picked.append(eid)
                else:
                    ok = False
                    break
            if not ok:
                continue
            feasible += 1
            val = evalf(frozenset(combo))
            evaluations += 1
            if best_val is None or val > best_val:
                best_val = val
                best_set = combo
    return OracleResult(best_val, Selection.from_lists([best_set]), evaluations, feasible)


@dataclass
class ShapeReport:
    """Outcome of the monotone/submodular exhaustive check."""

    is_monotone: bool
    is_submodular: bool
    monotone_witness: tuple[frozenset[int], int] | None = None
    submodular_witness: tuple[frozenset[int], frozenset[int], int] | None = None


def check_submodular_monotone(objective, ground: Sequence[int],
                              guard: int = 1 << 20) -> ShapeReport:
    """Exhaustively test non-decreasing marginal structure on a ground set.

    Monotonicity is checked on single-element removals and submodularity
    via the local exchange characterisation (drop one element of B, the
    marginal gain of e must not grow), both of which imply the global
    properties.  Witnesses are returned for the first violation found.
    """
    ground = sorted(ground)
    n = len(ground)
    if 2 ** n > guard:
        raise EnumerationGuardError(f"2^{n} subsets exceed the guard ({guard})")
    evalf = _evaluator(objective)
    vals = [None] * (1 << n)
    for mask in range(1 << n):
        vals[mask] = evalf(frozenset(ground[i] for i in range(n) if mask >> i & 1))

    mono_witness = None
    for mask in range(1, 1 << n):
        for i in range(n):
            if mask >> i & 1:
                if vals[mask] < vals[mask ^ (1 << i)]:
                    mono_witness = (
                        frozenset(ground[j] for j in range(n) if (mask ^ (1 << i)) >> j & 1),
                        ground[i])
                    break
        if mono_witness:
            break

    sub_witness = None
    for mask in range(1 << n):
        for e in range(n):
            if mask >> e & 1:
                continue
            gain_b = vals[mask | (1 << e)] - vals[mask]
            for x in range(n):
                if not (mask >> x & 1):
                    continue
                small = mask ^ (1 << x)
                gain_a = vals[small | (1 << e)] - vals[small]
                if gain_b > gain_a:
                    sub_witness = (
                        frozenset(ground[j] for j in range(n) if small >> j & 1),
                        frozenset(ground[j] for j in range(n) if mask >> j & 1),
                        ground[e])
                    break
            if sub_witness:
                break
        if sub_witness:
            break

    return ShapeReport(mono_witness is None, sub_witness is None,
                       mono_witness, sub_witness)


def write_expectations(path: str | Path, values: Mapping[str, object],
                       header: str = "") -> None:
    """Emit a derived-values file: `key value` per line, # comments.

    Fractions serialise as num/den, floats via repr, so reading the file
    back reproduces the exact objects.
    """
    lines = []
    if header:
        for h in header.splitlines():
            lines.append(f"# {h}")
    for key, val in values.items():
        if " " in key:
            raise ValueError(f"key {key!r} contains a space")
        lines.append(f"{key} {format_value(val)}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_expectations(path: str | Path) -> dict[str, str]:
    out: dict[str, str] = {}
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, val = line.partition(" ")
        out[key] = val
    return out


def format_value(val) -> str:
    if isinstance(val, Fraction):
        return f"{val.numerator}/{val.denominator}"
    if isinstance(val, float):
        return repr(val)
    if isinstance(val, (list, tuple)):
        return ",".join(format_value(v) for v in val)
    return str(val)
