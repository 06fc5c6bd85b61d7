"""Planning algorithms.

All selection routines share one greedy core with two interchangeable
evaluation strategies: a naive full re-scan and a lazy priority-queue scan
that exploits diminishing returns.  Both produce identical picks
(including tie-breaks: highest gain, then lowest element id); the lazy
variant just skips gain evaluations whose cached upper bound cannot win.

Eligibility predicates passed to the core must be monotone: once an
element becomes ineligible during a fill it must stay ineligible.  Quota
caps and the one-facility-per-cell rule both have this shape.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .model import (Instance, InvalidSelectionError, ObjectiveState, Selection,
                    ShortfallError, type_counts)
from .proportion import QuotaTable, quota_table, ratio_min


class _Counter:
    __slots__ = ("n",)

    def __init__(self):
        self.n = 0


def _greedy_fill(state: ObjectiveState, candidates: Sequence[int], slots: int,
                 eligible: Callable[[int], bool] | None, counter: _Counter,
                 lazy: bool, on_pick: Callable[[int], None] | None = None) -> list[int]:
    """Pick up to `slots` elements maximising marginal gain.

    Stops early when nothing eligible remains.  `eligible` may change as
    picks are committed (via on_pick) but only from True to False.
    """
    picks: list[int] = []
    if slots <= 0:
        return picks
    if lazy:
        heap: list[tuple[object, int, int]] = []
        step = 0
        for eid in candidates:
            if eligible is None or eligible(eid):
                counter.n += 1
                heap.append((_neg(state.gain(eid)), eid, step))
        heapq.heapify(heap)
        while heap and len(picks) < slots:
            negg, eid, when = heapq.heappop(heap)
            if eligible is not None and not eligible(eid):
                continue
            if when == step:
                state.add(eid)
                picks.append(eid)
                if on_pick is not None:
                    on_pick(eid)
                step += 1
            else:
                counter.n += 1
                heapq.heappush(heap, (_neg(state.gain(eid)), eid, step))
    else:
        remaining = [eid for eid in candidates if eligible is None or eligible(eid)]
        while remaining and len(picks) < slots:
            best = None
            best_gain = None
            for eid in remaining:
                counter.n += 1
                g = state.gain(eid)
                if best_gain is None or g > best_gain:
                    best, best_gain = eid, g
            state.add(best)
            picks.append(best)
            if on_pick is not None:
                on_pick(best)
            remaining = [eid for eid in remaining
                         if eid != best and (eligible is None or eligible(eid))]
    return picks


def _neg(value):
    """Negate a gain for min-heap ordering, keeping exact types exact."""
    return -value


@dataclass
class GreedyResult:
    picks: list[int]
    value: object
    evals: int


def greedy_cardinality(candidates: Sequence[int], budget: int, state: ObjectiveState,
                       *, lazy: bool = True) -> GreedyResult:
    """Plain budget-b greedy on the given objective state (mutated in place)."""
    counter = _Counter()
    cands = sorted(candidates)
    if budget > len(set(cands)):
        raise ShortfallError(f"budget {budget} exceeds the {len(set(cands))} available candidates")
    picks = _greedy_fill(state, cands, budget, None, counter, lazy)
    return GreedyResult(picks, state.value, counter.n)


@dataclass
class PartitionMatroid:
    """Independence by per-type caps: at most caps[q-1] elements of type q."""

    caps: tuple[int, ...]
    type_of: Mapping[int, int]

    def can_add(self, picked: Iterable[int], eid: int) -> bool:
        q = self.type_of[eid]
        used = sum(1 for p in picked if self.type_of[p] == q)
        return used < self.caps[q - 1]


def local_greedy(candidates: Sequence[int], state: ObjectiveState,
                 can_add: Sequence[Callable[[list[int], int], bool]],
                 *, max_picks: int | None = None, lazy: bool = True) -> GreedyResult:
    """Greedy under an intersection of independence oracles.

    Each oracle is called as can_add(current_picks, candidate); an element
    is eligible while every oracle accepts it.  Returns when no eligible
    element remains or max_picks is hit.  With k matroid oracles this is
    the classic 1/(k+1)-approximate local greedy.
    """
    counter = _Counter()
    cands = sorted(candidates)
    picks_so_far: list[int] = []

    def ok(eid: int) -> bool:
        return all(fn(picks_so_far, eid) for fn in can_add)

    slots = len(cands) if max_picks is None else max_picks
    picks = _greedy_fill(state, cands, slots, ok, counter, lazy,
                         on_pick=picks_so_far.append)
    return GreedyResult(picks, state.value, counter.n)


@dataclass
class PlanResult:
    """Outcome of a multi-round planning run."""

    selection: Selection
    algorithm: str
    policy_name: str
    values: tuple[float, ...]
    alpha: tuple[object, ...]          # Fraction, inf, or None for empty prefixes
    gain_evals: int
    diagnostics: tuple[str, ...] = ()
    quotas: QuotaTable | None = None
    baseline: float = 0.0

    @property
    def value(self):
        return self.values[-1] if self.values else 0


def _cell_guard(instance: Instance, taken_cells: set) -> Callable[[int], bool] | None:
    if not instance.distinct_cells:
        return None

    def ok(eid: int) -> bool:
        return instance.element(eid).cell not in taken_cells

    return ok


def _round_fill(instance: Instance, t: int, state: ObjectiveState, caps: list[int] | None,
                taken_cells: set, counter: _Counter, lazy: bool,
                diagnostics: list[str], picked_out: list[int]) -> None:
    """Fill round t's budget under quota caps, shifting quota units when a
    type runs out of eligible candidates."""
    budget = instance.budgets[t - 1]
    policy = instance.policy
    cell_ok = _cell_guard(instance, taken_cells)
    used = [0] * instance.num_types
    picked_set: set[int] = set()

    def eligible(eid: int) -> bool:
        if eid in picked_set:
            return False
        if cell_ok is not None and not cell_ok(eid):
            return False
        if caps is None:
            return True
        q = instance.element(eid).type_id
        return used[q - 1] < caps[q - 1]

    def on_pick(eid: int) -> None:
        e = instance.element(eid)
        used[e.type_id - 1] += 1
        picked_set.add(eid)
        if instance.distinct_cells:
            taken_cells.add(e.cell)

    cands = sorted(e.id for e in instance.by_round[t - 1])
    remaining = budget
    while remaining > 0:
        got = _greedy_fill(state, cands, remaining, eligible, counter, lazy, on_pick)
        picked_out.extend(got)
        remaining -= len(got)
        if remaining == 0:
            break
        if caps is None:
            raise ShortfallError(f"round {t}: only {budget - remaining} of {budget} "
                                 "budget slots could be filled")
        # some quota units point at types with no eligible candidates left;
        # move one unit to the sigma-preferred type that still has supply
        open_types = [q for q in range(1, instance.num_types + 1)
                      if any(instance.element(eid).type_id == q and
                             eid not in picked_set and
                             (cell_ok is None or cell_ok(eid))
                             for eid in cands)]
        if not open_types:
            raise ShortfallError(f"round {t}: only {budget - remaining} of {budget} "
                                 "budget slots could be filled")
        target = min(open_types, key=policy.rank)
        unmet = [q for q in range(1, instance.num_types + 1) if used[q - 1] < caps[q - 1]]
        donor = max(unmet, key=policy.rank)
        caps[donor - 1] -= 1
        caps[target - 1] += 1
        diagnostics.append(
            f"round {t}: moved one quota unit from type {donor} to type {target} "
            f"(type {donor} has no eligible candidates)")


def multistep_planning(instance: Instance, *, lazy: bool = True,
                       progress: Callable[[int, int], None] | None = None) -> PlanResult:
    """Quota-partitioned greedy over the rounds.

    Each round's budget is split into per-type quotas from the min-ratio
    sequence, then filled greedily conditioned on everything already
    built.  With sufficient per-type supply every prefix matches the
    sequence's type counts exactly.
    """
    state = instance.objective.make_state()
    table = quota_table(instance.policy, instance.budgets)
    counter = _Counter()
    taken_cells: set = set()
    diagnostics: list[str] = []
    per_round: list[list[int]] = []
    values: list[float] = []
    alphas: list[object] = []
    for t in range(1, instance.horizon + 1):
        caps = None if table.unconstrained else list(table.row(t))
        picked: list[int] = []
        _round_fill(instance, t, state, caps, taken_cells, counter, lazy,
                    diagnostics, picked)
        per_round.append(picked)
        values.append(state.value)
        alphas.append(_prefix_alpha(instance, per_round))
        if progress is not None:
            progress(t, instance.horizon)
    return PlanResult(Selection.from_lists(per_round), "multistep",
                      instance.policy.name or "custom", tuple(values), tuple(alphas),
                      counter.n, tuple(diagnostics), table)


def _prefix_alpha(instance: Instance, per_round: list[list[int]]):
    flat = [eid for r in per_round for eid in r]
    if not flat:
        return None
    return ratio_min(type_counts(flat, instance), instance.policy)


@dataclass
class RefineResult:
    """Outcome of a chain-refinement run (advice plus greedy completions)."""

    picks: list[int]
    value: object
    chain_index: int
    chain_values: tuple
    advice_value: object
    evals: int
    dropped_advice: tuple[int, ...] = ()


def la_single_step(candidates: Sequence[int], budget: int, base_state: ObjectiveState,
                   advice: Sequence[int], *, chain: Sequence[Sequence[int]] | None = None,
                   lazy: bool = True) -> RefineResult:
    """Try every advice prefix, complete each greedily, keep the best.

    The default chain is the prefixes of `advice` (length 0..b), so index
    0 is the pure greedy solution and index b is the advice itself; ties
    resolve toward the smaller index.  `base_state` is not modified.
    """
    advice = list(advice)
    if len(set(advice)) != len(advice):
        raise InvalidSelectionError("advice repeats an element")
    unknown = set(advice) - set(candidates)
    if unknown:
        raise InvalidSelectionError(f"advice elements {sorted(unknown)} are not candidates")
    if chain is None:
        if len(advice) != budget:
            raise InvalidSelectionError(f"advice size {len(advice)} differs from budget {budget}")
        chain = [advice[:i] for i in range(len(advice) + 1)]
    counter = _Counter()
    best: RefineResult | None = None
    chain_values = []
    for i, prefix in enumerate(chain):
        prefix = list(prefix)
        if len(prefix) > budget:
            raise InvalidSelectionError(f"chain set {i} is larger than the budget")
        state = base_state.clone()
        for eid in prefix:
            state.add(eid)
        pool = sorted(set(candidates) - set(prefix))
        fill = _greedy_fill(state, pool, budget - len(prefix), None, counter, lazy)
        chain_values.append(state.value)
        if best is None or state.value > best.value:
            best = RefineResult(prefix + fill, state.value, i, (), 0, counter.n)
    adv_state = base_state.clone()
    for eid in advice:
        adv_state.add(eid)
    best.chain_values = tuple(chain_values)
    best.advice_value = adv_state.value
    best.evals = counter.n
    return best


def la_many_types(candidates: Sequence[int], caps: Sequence[int],
                  type_of: Mapping[int, int], base_state: ObjectiveState,
                  advice: Sequence[int], *, chain: Sequence[Sequence[int]] | None = None,
                  lazy: bool = True) -> RefineResult:
    """Chain refinement under per-type caps.

    The advice must itself respect the caps (and fill them exactly, since
    the caps partition the budget); completions run the capped greedy.
    """
    budget = sum(caps)
    advice = list(advice)
    counts = [0] * len(caps)
    for eid in advice:
        counts[type_of[eid] - 1] += 1
    if counts != list(caps):
        raise InvalidSelectionError(f"advice type counts {counts} do not match caps {list(caps)}")
    if chain is None:
        chain = [advice[:i] for i in range(len(advice) + 1)]
    counter = _Counter()
    best: RefineResult | None = None
    chain_values = []
    for i, prefix in enumerate(chain):
        prefix = list(prefix)
        state = base_state.clone()
        used = [0] * len(caps)
        for eid in prefix:
            state.add(eid)
            used[type_of[eid] - 1] += 1

        def eligible(eid: int, used=used) -> bool:
            q = type_of[eid]
            return used[q - 1] < caps[q - 1]

        def on_pick(eid: int, used=used) -> None:
            used[type_of[eid] - 1] += 1

        pool = sorted(set(candidates) - set(prefix))
        fill = _greedy_fill(state, pool, budget - len(prefix), eligible, counter,
                            lazy, on_pick)
        chain_values.append(state.value)
        if best is None or state.value > best.value:
            best = RefineResult(prefix + fill, state.value, i, (), 0, counter.n)
    adv_state = base_state.clone()
    for eid in advice:
        adv_state.add(eid)
    best.chain_values = tuple(chain_values)
    best.advice_value = adv_state.value
    best.evals = counter.n
    return best


def multistep_planning_with_advice(instance: Instance,
                                   advice: Mapping[int, Sequence[int]],
                                   *, lazy: bool = True,
                                   progress: Callable[[int, int], None] | None = None
                                   ) -> PlanResult:
    """Multi-round planning that folds per-round advice into each fill.

    Advice elements that would breach a quota cap (or reuse a built cell)
    are dropped from the chain with a diagnostic; the rest form prefix
    chains whose capped completions compete on conditional value.  Output
    keeps the exact quota counts of the plain multistep planner.
    """
    state = instance.objective.make_state()
    table = quota_table(instance.policy, instance.budgets)
    counter = _Counter()
    taken_cells: set = set()
    diagnostics: list[str] = []
    per_round: list[list[int]] = []
    values: list[float] = []
    alphas: list[object] = []
    for t in range(1, instance.horizon + 1):
        budget = instance.budgets[t - 1]
        caps = None if table.unconstrained else list(table.row(t))
        round_ids = {e.id for e in instance.by_round[t - 1]}
        cell_ok = _cell_guard(instance, taken_cells)
        raw = list(advice.get(t, ()))
        filtered: list[int] = []
        used = [0] * instance.num_types
        for eid in raw:
            if eid not in round_ids:
                diagnostics.append(f"round {t}: advice {eid} is not a round-{t} candidate")
                continue
            e = instance.element(eid)
            if cell_ok is not None and not cell_ok(eid):
                diagnostics.append(f"round {t}: advice {eid} reuses an occupied cell")
                continue
            if caps is not None and used[e.type_id - 1] >= caps[e.type_id - 1]:
                diagnostics.append(f"round {t}: advice {eid} dropped, type {e.type_id} "
                                   "quota already filled by earlier advice")
                continue
            if eid in filtered:
                continue
            if len(filtered) >= budget:
                diagnostics.append(f"round {t}: advice {eid} dropped, budget exhausted")
                continue
            filtered.append(eid)
            used[e.type_id - 1] += 1

        best_state = None
        best_picks: list[int] = []
        best_value = None
        for i in range(len(filtered) + 1):
            st = state.clone()
            local_taken = set(taken_cells)
            local_caps = None if caps is None else list(caps)
            picked: list[int] = []
            cnt = [0] * instance.num_types
            for eid in filtered[:i]:
                st.add(eid)
                picked.append(eid)
                e = instance.element(eid)
                cnt[e.type_id - 1] += 1
                if instance.distinct_cells:
                    local_taken.add(e.cell)

            def eligible(eid: int, cnt=cnt, local_caps=local_caps,
                         local_taken=local_taken, picked=picked) -> bool:
                if eid in picked:
                    return False
                e = instance.element(eid)
                if instance.distinct_cells and e.cell in local_taken:
                    return False
                if local_caps is None:
                    return True
                return cnt[e.type_id - 1] < local_caps[e.type_id - 1]

            def on_pick(eid: int, cnt=cnt, local_taken=local_taken, picked=picked) -> None:
                e = instance.element(eid)
                cnt[e.type_id - 1] += 1
                picked.append(eid)
                if instance.distinct_cells:
                    local_taken.add(e.cell)

            cands = sorted(round_ids)
            remaining = budget - i
            while remaining > 0:
                got = _greedy_fill(st, cands, remaining, eligible, counter, lazy, on_pick)
                remaining -= len(got)
                if remaining == 0:
                    break
                if local_caps is None:
                    raise ShortfallError(f"round {t}: budget cannot be filled")
                open_types = [q for q in range(1, instance.num_types + 1)
                              if any(instance.element(c).type_id == q and eligible(c)
                                     for c in cands)]
                if not open_types:
                    raise ShortfallError(f"round {t}: budget cannot be filled")
                target = min(open_types, key=instance.policy.rank)
                unmet = [q for q in range(1, instance.num_types + 1)
                         if cnt[q - 1] < local_caps[q - 1]]
                donor = max(unmet, key=instance.policy.rank)
                local_caps[donor - 1] -= 1
                local_caps[target - 1] += 1
                diagnostics.append(
                    f"round {t}: moved one quota unit from type {donor} to type {target} "
                    f"(type {donor} has no eligible candidates)")
            if best_value is None or st.value > best_value:
                best_state, best_picks, best_value = st, picked, st.value
        state = best_state
        for eid in best_picks:
            if instance.distinct_cells:
                taken_cells.add(instance.element(eid).cell)
        per_round.append(best_picks)
        values.append(state.value)
        alphas.append(_prefix_alpha(instance, per_round))
        if progress is not None:
            progress(t, instance.horizon)
    return PlanResult(Selection.from_lists(per_round), "multistep+advice",
                      instance.policy.name or "custom", tuple(values), tuple(alphas),
                      counter.n, tuple(diagnostics), table)


@dataclass
class RetroReport:
    """Hindsight comparison: advice as-is vs greedy vs refined."""

    advice_value: object
    greedy_value: object
    refined_value: object
    refined_picks: tuple[int, ...]
    greedy_picks: tuple[int, ...]
    best_permutation: int
    permutations: int
    seed: int
    evals: int

    @property
    def strictly_ordered(self) -> bool:
        """refined > greedy > advice, the pattern worth reporting."""
        return self.refined_value > self.greedy_value > self.advice_value


def retrospective_compare(candidates: Sequence[int], budget: int, objective,
                          advice: Sequence[int], *, permutations: int = 10,
                          seed: int = 0, lazy: bool = True) -> RetroReport:
    """Replay a historical selection against greedy and chain refinement.

    The chain order matters, so the refinement is retried under seeded
    shuffles of the advice and the best completion wins (ties keep the
    earliest permutation).
    """
    advice = list(advice)
    if len(advice) != budget:
        raise InvalidSelectionError(f"advice size {len(advice)} differs from budget {budget}")
    base = objective.make_state()
    rng = np.random.default_rng(seed)
    best: RefineResult | None = None
    best_perm = 0
    evals = 0
    for p in range(max(1, permutations)):
        order = [advice[j] for j in rng.permutation(len(advice))]
        res = la_single_step(candidates, budget, base, order, lazy=lazy)
        evals += res.evals
        if best is None or res.value > best.value:
            best = res
            best_perm = p
    # chain index 0 is the pure greedy completion; recover its picks
    g = la_single_step(candidates, budget, base, advice, chain=[[]], lazy=lazy)
    evals += g.evals
    return RetroReport(best.advice_value, g.value, best.value, tuple(best.picks),
                       tuple(g.picks), best_perm, max(1, permutations), seed, evals)
