"""Core domain types: elements, policies, selections, objectives."""

from fractions import Fraction

import pytest

from coverplan.model import (CallableObjective, Element, Instance, InvalidSelectionError,
                             Policy, Selection, TableObjective, snap_proportion,
                             type_counts, validate_instance)

from helpers import random_instance


def make_policy(*props, sigma=()):
    return Policy(tuple(Fraction(p) for p in props), tuple(sigma))


class TestPolicy:
    def test_default_sigma_is_identity(self):
        p = make_policy("1/2", "1/2")
        assert p.sigma == (1, 2)

    def test_rank_maps_type_to_sigma_position(self):
        p = make_policy("1/2", "1/4", "1/4", sigma=(3, 1, 2))
        assert p.rank(2) < p.rank(3) < p.rank(1)

    def test_rejects_non_permutation_sigma(self):
        with pytest.raises(ValueError):
            make_policy("1/2", "1/2", sigma=(1, 1))

    def test_rejects_oversubscribed_proportions(self):
        with pytest.raises(ValueError):
            make_policy("3/4", "1/2")

    def test_rejects_negative_proportion(self):
        with pytest.raises(ValueError):
            make_policy("-1/4", "1/2")

    def test_unconstrained_detection(self):
        assert make_policy(0, 0).is_unconstrained
        assert not make_policy(0, "1/4").is_unconstrained

    def test_constrained_types(self):
        p = make_policy(0, "1/4", "1/2")
        assert p.constrained_types == (2, 3)

    def test_snap_proportion(self):
        assert snap_proportion(Fraction(1, 3)) == Fraction(333333, 10**6)
        assert snap_proportion(Fraction(1, 2)) == Fraction(1, 2)


class TestTableObjective:
    def test_exact_fraction_values(self):
        eps = Fraction(1, 1000)
        f = TableObjective({(1,): 1 + eps, (1, 2): 2 + eps})
        assert f.value([2, 1]) == 2 + eps
        assert isinstance(f.value([1]), Fraction)

    def test_missing_key_raises(self):
        f = TableObjective({(1,): 1})
        with pytest.raises(InvalidSelectionError):
            f.value([9])

    def test_state_tracks_incremental_gains(self):
        f = TableObjective({(): 0, (1,): 3, (2,): 2, (1, 2): 4})
        st = f.make_state()
        assert st.gain(1) == 3
        assert st.add(1) == 3
        assert st.gain(2) == 1
        other = st.clone()
        st.add(2)
        assert st.value == 4
        assert other.value == 3


class TestCallableObjective:
    def test_matches_callable(self):
        f = CallableObjective(lambda s: len(s) ** 2)
        st = f.make_state()
        st.add(5)
        assert st.gain(6) == 3
        assert f.value([5, 6]) == 4


class TestSelection:
    def test_prefix_and_ids(self):
        s = Selection(((1, 2), (3,), ()))
        assert s.prefix(1) == (1, 2)
        assert s.prefix(2) == (1, 2, 3)
        assert s.all_ids == (1, 2, 3)
        assert len(s) == 3

    def test_type_counts(self):
        inst = random_instance(0)
        ids = [e.id for e in inst.elements[:3]]
        counts = type_counts(ids, inst)
        assert sum(counts) == 3
        assert len(counts) == inst.num_types


class TestValidateInstance:
    def test_random_instances_are_valid(self):
        for seed in range(5):
            assert validate_instance(random_instance(seed)) == []

    def test_flags_budget_beyond_pool(self):
        inst = random_instance(0)
        bad = Instance(horizon=inst.horizon, num_types=inst.num_types,
                       elements=inst.elements,
                       budgets=tuple(99 for _ in inst.budgets),
                       policy=inst.policy, objective=inst.objective)
        assert any("budget" in msg for msg in validate_instance(bad))

    def test_flags_duplicate_ids(self):
        e = Element(id=1, round=1, type_id=1, cell=(0, 0))
        dup = Element(id=1, round=1, type_id=1, cell=(0, 1))
        inst = Instance(horizon=1, num_types=1, elements=(e, dup), budgets=(1,),
                        policy=make_policy(0), objective=CallableObjective(len))
        assert any("id" in msg for msg in validate_instance(inst))

    def test_flags_round_out_of_range(self):
        e = Element(id=1, round=5, type_id=1, cell=(0, 0))
        inst = Instance(horizon=1, num_types=1, elements=(e,), budgets=(1,),
                        policy=make_policy(0), objective=CallableObjective(len))
        assert validate_instance(inst)
