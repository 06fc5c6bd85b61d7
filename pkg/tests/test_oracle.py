"""The reference implementations must agree with the production code and
with direct enumeration done here, since the rest of the suite trusts them."""

from fractions import Fraction
from itertools import combinations, product

import numpy as np
import pytest

from coverplan.model import CallableObjective, Element, Instance, Policy, Selection
from coverplan.oracle import (
    EnumerationGuardError,
    brute_force_beta,
    brute_force_matroid_opt,
    brute_force_opt,
    check_submodular_monotone,
    format_value,
    read_expectations,
    sequence_counts,
    write_expectations,
)
from coverplan.proportion import beta, is_sigma_type_feasible, min_ratio_sequence

from helpers import random_instance, random_policy


def modular(weights: dict[int, int]) -> CallableObjective:
    return CallableObjective(lambda members: sum(weights[e] for e in members))


# ---------------------------------------------------------------- sequences


@pytest.mark.parametrize("seed", range(50))
def test_sequence_counts_matches_production_sequence(seed):
    rng = np.random.default_rng(seed)
    policy = random_policy(rng, int(rng.integers(1, 5)))
    n = int(rng.integers(1, 13))
    seq = min_ratio_sequence(policy, n, n)
    for m in range(n + 1):
        assert sequence_counts(policy, m) == seq.counts(m)


@pytest.mark.parametrize("seed", range(10))
def test_sequence_counts_unconstrained_cycles_rank_order(seed):
    rng = np.random.default_rng(seed)
    policy = random_policy(rng, 3, constrained=False)
    seq = min_ratio_sequence(policy, 9)
    for m in range(10):
        assert sequence_counts(policy, m) == seq.counts(m)
    assert sequence_counts(policy, 3) == (1, 1, 1)


# --------------------------------------------------------------------- beta


@pytest.mark.parametrize("seed", range(30))
def test_brute_force_beta_matches_beta(seed):
    rng = np.random.default_rng(seed)
    policy = random_policy(rng, int(rng.integers(1, 5)))
    b = int(rng.integers(1, 8))
    assert brute_force_beta(policy, b) == beta(policy, b)


def test_brute_force_beta_unconstrained_is_unbounded():
    policy = Policy((Fraction(0), Fraction(0)))
    assert brute_force_beta(policy, 3) == float("inf")


def test_brute_force_beta_respects_supply_caps():
    policy = Policy((Fraction(1, 2), Fraction(1, 2)))
    # only one element of type 1 exists, so the balanced split is out
    assert brute_force_beta(policy, 4) == beta(policy, 4) == Fraction(1)
    assert brute_force_beta(policy, 4, available=(1, 4)) == Fraction(1, 2)


def test_brute_force_beta_rejects_empty_and_impossible():
    policy = Policy((Fraction(1, 2), Fraction(1, 2)))
    with pytest.raises(ValueError):
        brute_force_beta(policy, 0)
    with pytest.raises(ValueError):
        brute_force_beta(policy, 4, available=(1, 1))


def test_brute_force_beta_guard():
    rng = np.random.default_rng(0)
    policy = random_policy(rng, 4)
    with pytest.raises(EnumerationGuardError):
        brute_force_beta(policy, 20, guard=10)


# -------------------------------------------------------------- brute force


def tiny_instance() -> Instance:
    weights = {0: 5, 1: 3, 2: 4}
    elements = (
        Element(id=0, round=1, type_id=1, cell=(0, 0)),
        Element(id=1, round=1, type_id=2, cell=(0, 1)),
        Element(id=2, round=2, type_id=1, cell=(0, 2)),
    )
    policy = Policy((Fraction(0), Fraction(0)))
    return Instance(horizon=2, num_types=2, elements=elements,
                    budgets=(1, 1), policy=policy, objective=modular(weights))


def test_cardinality_optimum_by_hand():
    res = brute_force_opt(tiny_instance(), "cardinality")
    assert res.value == 9
    assert res.selection.per_round == ((0,), (2,))
    assert res.feasible_count == 2


def test_per_prefix_results_are_monotone():
    out = brute_force_opt(tiny_instance(), "cardinality", per_prefix=True)
    assert [r.value for r in out] == [5, 9]
    assert out[0].selection.per_round == ((0,),)
    assert out[1].evaluations == 4  # every prefix of every chain


@pytest.mark.parametrize("seed", range(12))
def test_cardinality_optimum_matches_direct_enumeration(seed):
    inst = random_instance(seed, max_rounds=2, max_budget=2, max_candidates=6)
    rounds = [sorted(e.id for e in inst.by_round[t]) for t in range(inst.horizon)]
    best = None
    for picks in product(*[combinations(r, b) for r, b in zip(rounds, inst.budgets)]):
        val = inst.objective.value(frozenset(e for c in picks for e in c))
        best = val if best is None else max(best, val)
    assert brute_force_opt(inst, "cardinality").value == best


@pytest.mark.parametrize("seed", range(12))
def test_sigma_optimum_matches_filtered_enumeration(seed):
    inst = random_instance(seed, max_rounds=2, max_budget=2, max_candidates=6)
    rounds = [sorted(e.id for e in inst.by_round[t]) for t in range(inst.horizon)]
    best = None
    for picks in product(*[combinations(r, b) for r, b in zip(rounds, inst.budgets)]):
        sel = Selection.from_lists(picks)
        ok, _ = is_sigma_type_feasible(sel, inst)
        if not ok:
            continue
        val = inst.objective.value(frozenset(sel.all_ids))
        best = val if best is None else max(best, val)
    res = brute_force_opt(inst, "sigma-type-feasible")
    assert res.value == best
    assert is_sigma_type_feasible(res.selection, inst) == (True, None)


def test_partition_matroid_requires_caps():
    with pytest.raises(ValueError):
        brute_force_opt(tiny_instance(), "partition-matroid")


def test_partition_matroid_respects_caps():
    res = brute_force_opt(tiny_instance(), "partition-matroid",
                          caps_per_round=[(0, 1), (1, 0)])
    assert res.value == 7
    assert res.selection.per_round == ((1,), (2,))


def test_infeasible_round_is_reported():
    with pytest.raises(ValueError, match="admits no feasible selection"):
        brute_force_opt(tiny_instance(), "partition-matroid",
                        caps_per_round=[(0, 1), (0, 1)])


def test_type_feasible_class_is_within_cardinality():
    for seed in range(6):
        inst = random_instance(seed, max_rounds=2, max_budget=2, max_candidates=6)
        loose = brute_force_opt(inst, "cardinality")
        tight = brute_force_opt(inst, "type-feasible")
        assert tight.value <= loose.value
        assert tight.feasible_count >= 1


def test_unknown_constraint_class():
    with pytest.raises(ValueError):
        brute_force_opt(tiny_instance(), "everything")


def test_enumeration_guard_trips():
    with pytest.raises(EnumerationGuardError):
        brute_force_opt(tiny_instance(), "cardinality", guard=1)


def test_matroid_oracle_optimum():
    weights = {1: 5, 2: 4, 3: 3, 4: 2, 5: 1}
    res = brute_force_matroid_opt(
        [1, 2, 3, 4, 5], modular(weights),
        [lambda picked, e: len(picked) < 2])
    assert res.value == 9
    assert sorted(res.selection.all_ids) == [1, 2]
    assert res.feasible_count == 16  # sizes 0, 1 and 2


def test_matroid_oracle_guard():
    with pytest.raises(EnumerationGuardError):
        brute_force_matroid_opt(range(10), modular({i: 1 for i in range(10)}),
                                [lambda picked, e: True], guard=4)


# ------------------------------------------------------------ shape checks


def test_shape_check_accepts_weighted_coverage():
    weights = [3, 1, 4, 1, 5]
    covers = {0: frozenset({0, 1}), 1: frozenset({1, 2}), 2: frozenset({3, 4})}
    f = CallableObjective(
        lambda m: sum(weights[p] for p in set().union(*(covers[e] for e in m))) if m else 0)
    report = check_submodular_monotone(f, [0, 1, 2])
    assert report.is_monotone and report.is_submodular
    assert report.monotone_witness is None and report.submodular_witness is None


def test_shape_check_finds_monotonicity_witness():
    f = CallableObjective(lambda m: 5 - len(m))
    report = check_submodular_monotone(f, [0, 1, 2])
    assert not report.is_monotone
    assert report.is_submodular
    base, added = report.monotone_witness
    assert f.value(base | {added}) < f.value(base)


def test_shape_check_finds_submodularity_witness():
    f = CallableObjective(lambda m: len(m) ** 2)
    report = check_submodular_monotone(f, [0, 1, 2])
    assert report.is_monotone
    assert not report.is_submodular
    small, big, e = report.submodular_witness
    assert small < big and e not in big
    assert (f.value(big | {e}) - f.value(big)
            > f.value(small | {e}) - f.value(small))


def test_shape_check_guard():
    f = CallableObjective(len)
    with pytest.raises(EnumerationGuardError):
        check_submodular_monotone(f, range(5), guard=8)


# ------------------------------------------------------- expectation files


def test_expectations_round_trip(tmp_path):
    path = tmp_path / "derived.txt"
    values = {
        "ratio": Fraction(2, 3),
        "gain": 0.1,
        "count": 7,
        "row": (Fraction(1, 2), 3),
    }
    write_expectations(path, values, header="derived on 2026-08-15\nseed 0")
    text = path.read_text()
    assert text.startswith("# derived on 2026-08-15\n# seed 0\n")
    raw = read_expectations(path)
    assert Fraction(raw["ratio"]) == Fraction(2, 3)
    assert float(raw["gain"]) == 0.1
    assert int(raw["count"]) == 7
    assert raw["row"] == "1/2,3"


def test_expectations_reject_spaced_keys(tmp_path):
    with pytest.raises(ValueError):
        write_expectations(tmp_path / "bad.txt", {"two words": 1})


def test_format_value_forms():
    assert format_value(Fraction(7, 2)) == "7/2"
    assert format_value(0.5) == "0.5"
    assert format_value((1, 2, Fraction(1, 3))) == "1,2,1/3"
    assert format_value(12) == "12"
