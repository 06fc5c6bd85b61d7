"""Scenario file parsing, canonical writing, policy derivation and the
lift into a planning instance."""

from fractions import Fraction

import numpy as np
import pytest

from coverplan.scenario import (
    BuiltScenario,
    ScenarioFormatError,
    advice_ids,
    build_instance,
    derive_policy_proportions,
    dumps_scenario,
    generate_synthetic_region,
    load_scenario,
    loads_scenario,
)

from helpers import FIXTURES

TINY = """\
coverplan scenario v1
[meta]
name tiny
rows 2
cols 2
years 2
districts 2
cell_km 1
tau 120
[budgets]
1 1
[policy]
mode dp1
mass 0.9
sigma 1 2
[rates need]
0.5 0.5
[friction]
10 10
10 10
[districts]
1 1
2 2
[population year=1]
5 0
0 7
[population year=2]
5 0
0 7
[existing]
none
[candidates]
all
[end]
"""


def broken(old: str, new: str) -> str:
    assert old in TINY
    return TINY.replace(old, new, 1)


# ------------------------------------------------------------- round trips


@pytest.mark.parametrize("name", ["example5.scen", "golden16.scen",
                                  "golden50.scen", "retro8.scen"])
def test_fixture_files_round_trip_byte_identical(name):
    path = FIXTURES / name
    assert dumps_scenario(load_scenario(path)) == path.read_text()


def test_tiny_round_trips_byte_identical():
    assert dumps_scenario(loads_scenario(TINY)) == TINY


def test_generated_scenario_round_trips():
    sf = generate_synthetic_region(seed=3, rows=6, cols=5, districts=2, years=2)
    text = dumps_scenario(sf)
    assert dumps_scenario(loads_scenario(text)) == text


def test_parsed_fields():
    sf = loads_scenario(TINY)
    assert sf.name == "tiny"
    assert sf.years == 2 and sf.num_districts == 2
    assert sf.budgets == (1, 1)
    assert sf.mass == Fraction(9, 10)
    assert sf.rates_need == (Fraction(1, 2), Fraction(1, 2))
    assert sf.candidates is None and sf.existing == ()
    assert sf.population.people[1, 1, 1] == 7


# ------------------------------------------------------------ parse errors


@pytest.mark.parametrize("old,new,message", [
    ("coverplan scenario v1", "coverplan scenario v2", "first line must be"),
    ("[meta]", "[metadata]", "expected \\[meta\\]"),
    ("rows 2", "stories 2", "missing rows"),
    ("rows 2", "rows x", "must be integers"),
    ("rows 2", "rows 0", "must be positive"),
    ("1 1\n[policy]", "1 1 1\n[policy]", "3 budgets for 2 years"),
    ("1 1\n[policy]", "1 -1\n[policy]", "budgets must be non-negative"),
    ("1 1\n[policy]", "1 x\n[policy]", "budgets must be integers"),
    ("mode dp1", "mode dp9", "unknown policy mode"),
    ("mode dp1", "tempo dp1", "unknown policy key"),
    ("sigma 1 2", "sigma 2 2", "sigma must be a permutation"),
    ("0.5 0.5", "0.5 0.5 0.5", "3 values for 2 districts"),
    ("10 10\n10 10", "10 10\n10", "friction row 1 has 1 values"),
    ("10 10\n10 10", "10 10\n10 soup", "friction row 1 has a non-numeric value"),
    ("[districts]\n1 1\n2 2", "[districts]\n1 1\n2 9", "district ids must lie in 1..2"),
    ("[districts]\n1 1\n2 2", "[districts]\n1 1\n2 1.5", "district ids must be integers"),
    ("[population year=1]", "[population year=3]", "population year 3 outside 1..2"),
    ("[population year=1]", "[population year=x]", "bad population header"),
    ("[existing]\nnone", "[existing]\n5 5", "outside the 2x2 grid"),
    ("[existing]\nnone", "[existing]\nhere", "expected 'row col'"),
    ("[end]", "[finish]", "unknown section"),
    ("[end]\n", "", "missing \\[end\\]"),
])
def test_parse_errors(old, new, message):
    with pytest.raises(ScenarioFormatError, match=message):
        loads_scenario(broken(old, new))


def test_missing_sections_reported():
    no_budgets = TINY.replace("[budgets]\n1 1\n", "")
    with pytest.raises(ScenarioFormatError, match="missing \\[budgets\\]"):
        loads_scenario(no_budgets)
    no_pop = TINY.replace("[population year=2]\n5 0\n0 7\n", "")
    with pytest.raises(ScenarioFormatError, match="population grids for years \\[2\\]"):
        loads_scenario(no_pop)


def test_errors_carry_line_numbers():
    with pytest.raises(ScenarioFormatError, match="line 1:"):
        loads_scenario("not a scenario")
    with pytest.raises(ScenarioFormatError, match="line 11:"):
        loads_scenario(broken("1 1\n[policy]", "1 x\n[policy]"))


def test_advice_must_name_candidates():
    text = broken("[candidates]\nall", "[candidates]\n0 0\n1 1")
    text = text.replace("[end]", "[advice year=1]\n0 1\n[end]")
    with pytest.raises(ScenarioFormatError, match="non-candidate cells"):
        loads_scenario(text)


def test_explicit_mode_needs_proportions():
    with pytest.raises(ScenarioFormatError, match="needs a \\[proportions\\]"):
        loads_scenario(broken("mode dp1", "mode explicit"))


def test_zero_coverage_rate_rejected():
    text = broken("[friction]", "[rates coverage]\n0 0.5\n[friction]")
    with pytest.raises(ScenarioFormatError, match="must be positive"):
        loads_scenario(text)


# -------------------------------------------------------- policy derivation


def test_dp0_ignores_districts():
    policy = derive_policy_proportions(loads_scenario(TINY), "dp0")
    assert policy.proportions == (Fraction(0), Fraction(0))
    assert policy.is_unconstrained
    assert policy.name == "dp0"


def test_dp1_shares_follow_need_rates():
    policy = derive_policy_proportions(loads_scenario(TINY))
    assert policy.proportions == (Fraction(9, 20), Fraction(9, 20))
    assert policy.sigma == (1, 2)


def test_dp1_snaps_to_the_grid():
    text = TINY.replace("districts 2", "districts 3")
    text = text.replace("sigma 1 2", "sigma 1 2 3")
    text = text.replace("0.5 0.5", "0.1 0.2 0.4")
    text = text.replace("[districts]\n1 1\n2 2", "[districts]\n1 2\n3 3")
    policy = derive_policy_proportions(loads_scenario(text))
    grid = Fraction(1, 1_000_000)
    assert policy.proportions == (128571 * grid, 257143 * grid, 514286 * grid)


def test_dp2_shares_follow_inverse_coverage():
    text = broken("[friction]", "[rates coverage]\n0.25 0.75\n[friction]")
    policy = derive_policy_proportions(loads_scenario(text), "dp2")
    assert policy.proportions == (Fraction(27, 40), Fraction(9, 40))


def test_explicit_mode_uses_listed_shares():
    text = broken("[friction]", "[proportions]\n0.3 0.6\n[friction]")
    policy = derive_policy_proportions(loads_scenario(text), "explicit")
    assert policy.proportions == (Fraction(3, 10), Fraction(3, 5))


def test_mass_override():
    policy = derive_policy_proportions(loads_scenario(TINY), mass=Fraction(1, 2))
    assert policy.proportions == (Fraction(1, 4), Fraction(1, 4))


def test_missing_rate_sections_raise():
    sf = loads_scenario(TINY)
    with pytest.raises(ValueError, match="rates coverage"):
        derive_policy_proportions(sf, "dp2")
    no_need = loads_scenario(TINY.replace("[rates need]\n0.5 0.5\n", ""))
    with pytest.raises(ValueError, match="rates need"):
        derive_policy_proportions(no_need, "dp1")
    with pytest.raises(ValueError, match="no explicit proportions"):
        derive_policy_proportions(sf, "explicit")
    with pytest.raises(ValueError, match="unknown policy mode"):
        derive_policy_proportions(sf, "dp7")


# ---------------------------------------------------------------- generator


def test_generator_is_deterministic():
    a = generate_synthetic_region(seed=5, rows=5, cols=4, districts=2, years=3)
    b = generate_synthetic_region(seed=5, rows=5, cols=4, districts=2, years=3)
    assert dumps_scenario(a) == dumps_scenario(b)
    c = generate_synthetic_region(seed=6, rows=5, cols=4, districts=2, years=3)
    assert dumps_scenario(a) != dumps_scenario(c)


def test_generator_shapes():
    sf = generate_synthetic_region(seed=2, rows=7, cols=5, districts=3, years=4,
                                   budget=2, existing_count=2)
    assert sf.friction.rows == 7 and sf.friction.cols == 5
    assert sf.years == 4 and sf.budgets == (2, 2, 2, 2)
    assert sorted(np.unique(sf.districts)) == [1, 2, 3]
    assert len(sf.existing) == 2
    assert len(sf.rates_need) == 3 and len(sf.rates_coverage) == 3
    assert all(v > 0 for v in sf.rates_coverage)


# ------------------------------------------------------------ instance lift


def test_build_instance_enumerates_year_major():
    text = broken("[candidates]\nall", "[candidates]\n0 0\n1 1")
    built = build_instance(loads_scenario(text))
    inst = built.instance
    assert inst.horizon == 2 and inst.num_types == 2
    assert inst.distinct_cells
    got = [(e.id, e.round, e.type_id, e.cell) for e in inst.elements]
    assert got == [
        (0, 1, 1, (0, 0)), (1, 1, 2, (1, 1)),
        (2, 2, 1, (0, 0)), (3, 2, 2, (1, 1)),
    ]
    assert built.id_of[(2, (1, 1))] == 3
    assert built.cell_of[3] == (1, 1)


def test_duplicate_candidates_collapse():
    text = broken("[candidates]\nall", "[candidates]\n0 0\n1 1\n0 0")
    sf = loads_scenario(text)
    assert sf.candidates == ((0, 0), (1, 1))
    built = build_instance(sf)
    assert len(built.instance.elements) == 4


def test_budget_override_must_match_years():
    sf = loads_scenario(TINY)
    with pytest.raises(ValueError, match="1 budgets for 2 years"):
        build_instance(sf, budgets=(1,))
    built = build_instance(sf, budgets=(2, 0))
    assert built.instance.budgets == (2, 0)


def test_advice_ids_map_to_year_elements():
    text = broken("[candidates]\nall", "[candidates]\n0 0\n1 1")
    text = text.replace("[end]", "[advice year=2]\n1 1\n[end]")
    built = build_instance(loads_scenario(text))
    assert advice_ids(built) == {2: [3]}


def test_build_instance_is_a_built_scenario():
    built = build_instance(loads_scenario(TINY))
    assert isinstance(built, BuiltScenario)
    # every passable cell becomes a candidate in each of the two years
    assert len(built.instance.elements) == 8
