from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from finexch.approx import ht_approx, ml_approx
from finexch.combinat import LabelMerge
from finexch.model import ZeroProbabilitySampleError, iid_weights, uniform_weights
from finexch.oracle import random_model
from finexch.population import (
    EXACT,
    HT,
    GroupSample,
    grouped_prediction,
    population_prediction,
    resolution_advice,
    route_comparison,
)

from conftest import FIG1, goldstein

F = Fraction


def test_population_example():
    pred = population_prediction(FIG1, 100)
    assert pred.values == tuple(F(x) for x in ("0.27", "0.20", "0.06", "0.41", "0.06"))
    assert pred.method == HT
    assert pred.sample_fraction == F(1, 10)


def test_census_returns_ml():
    assert population_prediction(FIG1, 10).values == ml_approx(FIG1)
    assert population_prediction(FIG1, 10, "exact", uniform_weights(10, 5)).values == ml_approx(FIG1)


def test_empty_sample_returns_predictive():
    assert population_prediction((0, 0, 0), 5).values == (F(1, 3),) * 3


def test_exact_goldstein():
    pred = population_prediction((2, 0), 5, "exact", goldstein(5))
    assert pred.values == (1, 0)
    assert pred.method == EXACT


def test_exact_uniform_matches_ht():
    assert (population_prediction(FIG1, 100, "exact", uniform_weights(100, 5)).values
            == population_prediction(FIG1, 100).values)


def test_population_errors():
    with pytest.raises(ValueError):
        population_prediction(FIG1, 9)
    with pytest.raises(ValueError):
        population_prediction(FIG1, 100, "exact")
    with pytest.raises(ValueError):
        population_prediction(FIG1, 100, "exact", uniform_weights(50, 5))
    with pytest.raises(ValueError):
        population_prediction(FIG1, 100, "bayes")
    with pytest.raises(ZeroProbabilitySampleError):
        population_prediction((1, 1), 4, "exact", goldstein(4))


def test_float_population():
    pred = population_prediction(FIG1, 100, mode="float")
    assert pred.values == pytest.approx([0.27, 0.20, 0.06, 0.41, 0.06], rel=1e-12)


@given(st.lists(st.integers(0, 20), min_size=1, max_size=6).filter(any), st.integers(0, 200))
def test_population_lies_between_ml_and_ht(h, extra):
    m = sum(h) + extra
    values = population_prediction(h, m).values
    assert sum(values) == 1
    for v, a, b in zip(values, ml_approx(h), ht_approx(h)):
        assert min(a, b) <= v <= max(a, b)


@pytest.mark.parametrize("m, weight", [(10, 1), (20, F(1, 2)), (1000, F(1, 100))])
def test_sample_fraction_limits(m, weight):
    pred = population_prediction(FIG1, m).values
    expected = [weight * a + (1 - weight) * b for a, b in zip(ml_approx(FIG1), ht_approx(FIG1))]
    assert list(pred) == expected


def test_grouped_example():
    groups = [GroupSample("a", 60, FIG1), GroupSample("b", 40, (1, 1, 1, 1, 1))]
    pred = grouped_prediction(groups)
    assert pred.values[0] == F(73, 300)
    assert float(pred.values[0]) == pytest.approx(0.243333333333)
    assert pred.groups["a"].values[0] == F(49, 180)
    assert pred.groups["b"].values == (F(1, 5),) * 5
    assert sum(pred.values) == 1
    assert pred.n == 15 and pred.m == 100


def test_grouped_single_and_identical_groups():
    single = grouped_prediction([GroupSample("all", 100, FIG1)])
    assert single.values == population_prediction(FIG1, 100).values
    twins = grouped_prediction([GroupSample("x", 50, FIG1), GroupSample("y", 50, FIG1)])
    assert twins.values == population_prediction(FIG1, 50).values


def test_grouped_exact_uses_group_models():
    g = GroupSample("x", 5, (2, 0), goldstein(5))
    assert grouped_prediction([g], "exact").values == (1, 0)


def test_grouped_errors():
    with pytest.raises(ValueError):
        grouped_prediction([GroupSample("x", 10, (1, 2)), GroupSample("y", 10, (1, 2, 3))])
    with pytest.raises(ValueError):
        grouped_prediction([GroupSample("x", 10, (1, 2)), GroupSample("x", 10, (1, 2))])
    with pytest.raises(ValueError):
        grouped_prediction([GroupSample("x", 10, (1, 2))], m=11)
    with pytest.raises(ValueError):
        grouped_prediction([])
    with pytest.raises(ValueError):
        GroupSample("x", 2, (2, 1))


def test_route_comparison_example():
    cmp = route_comparison((2, 1, 0, 1, 1, 0), LabelMerge((0, 0, 1, 1, 2, 2), 3))
    assert cmp.predict_then_sum == (F(5, 11), F(3, 11), F(3, 11))
    assert cmp.merge_then_predict == (F(1, 2), F(1, 4), F(1, 4))
    assert cmp.tv == F(1, 22)
    assert cmp.exact_routes_agree is None


def test_identity_merge_routes_identical():
    cmp = route_comparison(FIG1, LabelMerge.identity(5), uniform_weights(11, 5))
    assert cmp.predict_then_sum == cmp.merge_then_predict
    assert cmp.tv == 0
    assert cmp.exact_routes_agree


def test_exact_routes_for_iid_and_uniform():
    merge = LabelMerge((0, 0, 1, 1, 2, 2), 3)
    h = (2, 1, 0, 1, 1, 0)
    for model in (uniform_weights(6, 6), iid_weights(6, [F(1, 6)] * 6)):
        assert route_comparison(h, merge, model).exact_routes_agree
    assert route_comparison(h, merge, uniform_weights(6, 6), "float").exact_routes_agree


def test_exact_routes_can_differ():
    w = random_model(2113654276, 3, 4)
    cmp = route_comparison((0, 0, 0, 1), LabelMerge((0, 0, 1, 0), 2), w)
    assert cmp.exact_routes_agree is False


@pytest.mark.parametrize("n, k, under, rec", [(90, 10, False, 10), (50, 10, True, 5), (1000, 3, False, 111),
                                              (0, 1, True, 1), (8, 1, True, 1)])
def test_resolution_advice(n, k, under, rec):
    advice = resolution_advice(n, k)
    assert advice.under_powered is under
    assert advice.recommended_k == rec


def test_resolution_advice_errors():
    with pytest.raises(ValueError):
        resolution_advice(-1, 2)
    with pytest.raises(ValueError):
        resolution_advice(5, 0)
