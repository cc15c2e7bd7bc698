from __future__ import annotations

from decimal import Decimal
from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from deenkit.faraid import (
    KINDS,
    TREASURY,
    MadhhabPolicy,
    assign_fard,
    distribute,
    extract_estate,
    regex_estate,
    validate_heirs,
)
from deenkit.providers import FailingTextGenerator

# Representative fixed shares: (heirs present, heir checked, share)
FARD_ROWS = [
    ({"husband": 1, "father": 1}, "husband", F(1, 2)),
    ({"husband": 1, "son": 1}, "husband", F(1, 4)),
    ({"wife": 1, "father": 1}, "wife", F(1, 4)),
    ({"wife": 1, "son": 1}, "wife", F(1, 8)),
    ({"father": 1, "son": 1}, "father", F(1, 6)),
    ({"mother": 1, "son": 1}, "mother", F(1, 6)),
    ({"daughter": 1, "full_brother": 1}, "daughter", F(1, 2)),
    ({"daughter": 2, "full_brother": 1}, "daughter", F(2, 3)),
]


@pytest.mark.parametrize("heirs,heir,share", FARD_ROWS)
def test_fixed_share_rows(heirs, heir, share):
    assert assign_fard(heirs)[heir] == share


def test_awl_case():
    (o,) = distribute({"husband": 1, "daughter": 2, "father": 1, "mother": 1})
    assert dict(o.shares) == {"husband": F(3, 15), "daughter": F(8, 15), "father": F(2, 15), "mother": F(2, 15)}
    assert "awl" in o.applied


def test_radd_case():
    (o,) = distribute({"mother": 1, "daughter": 1})
    assert dict(o.shares) == {"mother": F(1, 4), "daughter": F(3, 4)}
    assert "radd" in o.applied


def test_umariyyatan_mother_takes_third_of_remainder():
    (o,) = distribute({"husband": 1, "father": 1, "mother": 1})
    assert o.shares["mother"] == F(1, 6)
    (o,) = distribute({"wife": 1, "father": 1, "mother": 1})
    assert o.shares["mother"] == F(1, 4)


def test_son_blocks_siblings():
    (o,) = distribute({"son": 1, "full_brother": 2, "uterine_sibling": 1})
    assert set(o.shares) == {"son"}
    assert {k for k, _r in o.blocked} == {"full_brother", "uterine_sibling"}


def test_son_and_daughter_split_two_to_one():
    (o,) = distribute({"son": 1, "daughter": 1})
    assert o.shares == {"son": F(2, 3), "daughter": F(1, 3)}


@pytest.mark.parametrize(
    "heirs",
    [
        {"paternal_grandfather": 1, "full_brother": 1},
        {"paternal_grandfather": 1, "full_sister": 2, "mother": 1},
        {"husband": 1},
        {"wife": 2},
    ],
)
def test_disputed_cases_return_labelled_outcomes(heirs):
    outcomes = distribute(heirs)
    assert len(outcomes) >= 2
    assert {o.policy for o in outcomes} == {MadhhabPolicy.HANAFI, MadhhabPolicy.JUMHUR}
    for o in outcomes:
        assert o.total() == 1


def test_pinned_policy_returns_one_outcome():
    (o,) = distribute({"paternal_grandfather": 1, "full_brother": 1}, "jumhur")
    assert o.policy is MadhhabPolicy.JUMHUR
    assert o.shares == {"paternal_grandfather": F(1, 2), "full_brother": F(1, 2)}


def test_spouse_alone_under_jumhur_leaves_treasury_share():
    hanafi, jumhur = distribute({"husband": 1})
    assert hanafi.shares == {"husband": F(1)}
    assert jumhur.shares == {"husband": F(1, 2), TREASURY: F(1, 2)}


def test_amounts_are_exact_until_rounding():
    (o,) = distribute({"husband": 1, "daughter": 2, "father": 1, "mother": 1})
    amounts = o.amounts("150000")
    assert sum(amounts.values()) == Decimal(150000)
    rows = {r["heir"]: r for r in o.to_dict("150000")["shares"]}
    assert rows["daughter"]["amount"] == "80000.00"
    assert rows["daughter"]["amount_per_head"] == "40000.00"


@pytest.mark.parametrize(
    "heirs",
    [{"husband": 1, "wife": 1}, {"father": 2}, {"wife": 5}, {"son": -1}, {}],
)
def test_invalid_heir_sets(heirs):
    with pytest.raises(ValueError):
        distribute(heirs)


def test_unknown_heirs_only_go_to_treasury():
    (o,) = distribute({"cousin": 1})
    assert o.shares == {TREASURY: F(1)}


def test_validate_merges_record_forms():
    assert validate_heirs([{"kind": "daughter", "count": 1}, ("daughter", 1), ("son", 0)]) == {"daughter": 2}


capped = {"husband": 1, "wife": 4, "father": 1, "mother": 1, "paternal_grandfather": 1, "grandmother": 2}
heir_sets = st.fixed_dictionaries(
    {}, optional={k: st.integers(1, capped.get(k, 4)) for k in KINDS}
).filter(lambda h: h and not ("husband" in h and "wife" in h))


@given(heir_sets)
def test_every_outcome_sums_to_one(heirs):
    outcomes = distribute(heirs)
    assert outcomes
    for o in outcomes:
        assert o.total() == 1
        assert all(v > 0 for v in o.shares.values())


@given(heir_sets)
def test_distribution_is_order_independent(heirs):
    forward = distribute(heirs)
    backward = distribute(dict(reversed(list(heirs.items()))))
    assert [dict(o.shares) for o in forward] == [dict(o.shares) for o in backward]


# --- extraction from text ---------------------------------------------------------------


def test_regex_estate_english():
    got = regex_estate("My father died leaving a wife, 2 sons and a daughter. The estate is $120,000.")
    assert got.heirs == {"wife": 1, "son": 2, "daughter": 1}
    assert got.net_estate == Decimal(120000)


def test_regex_estate_arabic():
    got = regex_estate("توفي رجل وترك زوجة و2 بنت وأب والتركة 90000")
    assert got.heirs == {"wife": 1, "daughter": 2, "father": 1}
    assert got.net_estate == Decimal(90000)


def test_plural_without_count_is_noted():
    got = regex_estate("she left her husband and daughters")
    assert got.heirs["daughter"] == 2
    assert got.notes


def test_extract_estate_falls_back_on_provider_failure():
    got = extract_estate("husband, mother and 2 daughters, estate 60000", FailingTextGenerator())
    assert got.heirs == {"husband": 1, "mother": 1, "daughter": 2}
