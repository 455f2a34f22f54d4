import itertools
import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from finexch.combinat import CapExceededError, LabelMerge, histogram_of, iter_histograms, merge_histogram
from finexch.model import (
    REVISE_MESSAGE,
    ExchangeableModel,
    LabelDistribution,
    ZeroProbabilitySampleError,
    histogram_pmf,
    iid_weights,
    load_prior,
    marginal_histogram_pmf,
    merge_model,
    predictive_exact,
    sample_sequence,
    sequence_pmf,
    uniform_weights,
    weights_from_atoms,
)
from finexch.oracle import build_sequence_table, random_model

from conftest import goldstein

F = Fraction


def test_uniform_weights_examples():
    w = uniform_weights(2, 2)
    assert dict(w.atoms) == {(0, 2): F(1, 3), (1, 1): F(1, 3), (2, 0): F(1, 3)}
    big = uniform_weights(10, 5)
    assert big.space_size == 1001
    assert sum(big.atoms.values()) == 1


def test_uniform_weights_cap():
    with pytest.raises(CapExceededError):
        uniform_weights(10, 5, cap=1000)


def test_iid_weights_examples():
    w = iid_weights(2, [F(1, 2), F(1, 2)])
    assert dict(w.atoms) == {(0, 2): F(1, 4), (1, 1): F(1, 2), (2, 0): F(1, 4)}
    assert dict(iid_weights(3, [1, 0]).atoms) == {(3, 0): 1}


@given(st.lists(st.integers(0, 9), min_size=1, max_size=4).filter(any), st.integers(0, 7))
@settings(max_examples=60)
def test_iid_weights_sum_to_one(raw, m):
    p = [F(r, sum(raw)) for r in raw]
    assert sum(iid_weights(m, p).atoms.values()) == 1


def test_weights_from_atoms_validation():
    assert weights_from_atoms(2, 2, {(2, 0): "1/2", (0, 2): F(1, 2)}).weight((2, 0)) == F(1, 2)
    with pytest.raises(ValueError):
        weights_from_atoms(2, 2, {(2, 0): F(1, 2)})
    with pytest.raises(ValueError):
        weights_from_atoms(2, 2, {(1, 0): 1})
    with pytest.raises(ValueError):
        weights_from_atoms(2, 2, [((2, 0), F(3, 2)), ((0, 2), F(-1, 2))])
    with pytest.raises(ValueError):
        weights_from_atoms(2, 2, [((2, 0), F(1, 2)), ((2, 0), F(1, 2))])
    w = weights_from_atoms(2, 2, {(2, 0): 3, (1, 1): 1}, renormalize=True)
    assert w.weight((2, 0)) == F(3, 4) and w.weight((0, 2)) == 0


def test_float_weights_tolerance():
    w = weights_from_atoms(1, 2, {(1, 0): 0.1 + 0.2, (0, 1): 0.7})
    assert not w.exact
    with pytest.raises(ValueError):
        weights_from_atoms(1, 2, {(1, 0): 0.5, (0, 1): 0.4})


def test_closed_forms_match_dense_copies():
    for w in (uniform_weights(5, 3), iid_weights(5, [F(1, 2), F(1, 3), F(1, 6)])):
        dense = w.densify()
        assert dense == w
        for n in range(5):
            for h in iter_histograms(n, 3):
                assert histogram_pmf(w, h) == histogram_pmf(dense, h)
                assert histogram_pmf(w, h, "float") == pytest.approx(histogram_pmf(dense, h, "float"), rel=1e-12)


def test_sequence_pmf_examples():
    g = goldstein(2)
    assert sequence_pmf(g, [0, 0]) == F(1, 2)
    assert sequence_pmf(g, [0, 1]) == 0
    assert sequence_pmf(g, []) == 1
    p = [F(1, 5), F(4, 5)]
    assert sequence_pmf(iid_weights(4, p), [0, 1, 1, 0]) == F(1, 5) ** 2 * F(4, 5) ** 2
    assert sequence_pmf(uniform_weights(3, 2), [0]) == F(1, 2)


def test_sequence_pmf_rejects_long_sequence():
    with pytest.raises(ValueError):
        sequence_pmf(uniform_weights(2, 2), [0, 0, 0])


@pytest.mark.parametrize("seed", range(12))
def test_sequence_pmf_is_permutation_invariant(seed):
    m, k = 3 + seed % 4, 1 + seed % 3
    w = random_model(seed, m, k)
    for n in range(m + 1):
        for x in itertools.product(range(k), repeat=min(n, 4)):
            values = {sequence_pmf(w, y) for y in set(itertools.permutations(x))}
            assert len(values) == 1


def test_marginal_examples():
    assert marginal_histogram_pmf(uniform_weights(4, 2), 2) == {(0, 2): F(1, 3), (1, 1): F(1, 3), (2, 0): F(1, 3)}
    w = random_model(3, 4, 3)
    assert marginal_histogram_pmf(w, 0) == {(0, 0, 0): 1}
    full = marginal_histogram_pmf(w, 4)
    assert {u: p for u, p in full.items() if p} == {u: p for u, p in w.atoms.items() if p}


@pytest.mark.parametrize("seed", range(8))
def test_marginal_matches_sequence_table(seed):
    w = random_model(seed, 4, 3)
    table = build_sequence_table(w)
    for n in range(5):
        brute = {}
        for x, p in table.marginal(n).items():
            h = histogram_of(x, 3)
            brute[h] = brute.get(h, 0) + p
        got = marginal_histogram_pmf(w, n)
        assert sum(got.values()) == 1
        assert {h: p for h, p in got.items() if p} == {h: p for h, p in brute.items() if p}


def test_predictive_examples():
    u = uniform_weights(11, 5)
    assert predictive_exact(u, (3, 2, 0, 5, 0)) == (F(4, 15), F(3, 15), F(1, 15), F(6, 15), F(1, 15))
    assert predictive_exact(goldstein(4), (2, 0)) == (1, 0)
    assert predictive_exact(goldstein(4), (0, 0)) == (F(1, 2), F(1, 2))


def test_zero_probability_sample():
    with pytest.raises(ZeroProbabilitySampleError) as exc:
        predictive_exact(goldstein(4), (1, 1))
    assert REVISE_MESSAGE in str(exc.value)
    assert "f_H^m would need to be revised" in str(exc.value)


@pytest.mark.parametrize("seed", range(10))
def test_predictive_is_a_sequence_quotient(seed):
    m, k = 2 + seed % 5, 1 + seed % 4
    w = random_model(seed, m, k)
    for n in range(m):
        for h in iter_histograms(n, k):
            x = [j for j, c in enumerate(h) for _ in range(c)]
            base = sequence_pmf(w, x)
            if base == 0:
                continue
            assert list(predictive_exact(w, h)) == [sequence_pmf(w, x + [j]) / base for j in range(k)]


def test_float_mode_agrees_with_rational():
    w = random_model(11, 12, 4, "dense")
    for n in (0, 3, 7, 11):
        for h in list(iter_histograms(n, 4))[::5]:
            exact = predictive_exact(w, h)
            approx = predictive_exact(w, h, "float")
            assert all(math.isclose(a, r, rel_tol=1e-10) for a, r in zip(approx, exact))
            assert math.isclose(histogram_pmf(w, h, "float"), histogram_pmf(w, h), rel_tol=1e-10)


def test_label_distribution_validation():
    with pytest.raises(ValueError):
        LabelDistribution([F(1, 2), F(1, 3)])
    with pytest.raises(ValueError):
        LabelDistribution([])
    d = LabelDistribution([F(1, 4), F(3, 4)])
    assert d.exact and d.argmax() == 1
    assert d.to_float() == (0.25, 0.75)


def test_merge_model_examples():
    u = uniform_weights(4, 3)
    ident = merge_model(u, LabelMerge.identity(3))
    assert ident.weights == u
    collapsed = merge_model(u, LabelMerge((0, 0, 0), 1))
    assert dict(collapsed.weights.atoms) == {(4,): 1}
    p = [F(1, 2), F(1, 3), F(1, 6)]
    merged = merge_model(iid_weights(4, p), LabelMerge((0, 1, 0), 2))
    assert merged.weights == iid_weights(4, [F(2, 3), F(1, 3)]).densify()
    assert merged.labels.names == ("1+3", "2")


def test_merging_commutes_for_iid_and_uniform():
    merge = LabelMerge((0, 1, 1), 2)
    for w in (iid_weights(5, [F(1, 5), F(3, 10), F(1, 2)]), uniform_weights(5, 3)):
        for n in range(5):
            for h in iter_histograms(n, 3):
                summed = merge.merge_vector(list(predictive_exact(w, h)))
                coarse = predictive_exact(merge_model(w, merge), merge_histogram(h, merge))
                assert list(coarse) == summed


def test_merging_need_not_commute_in_general():
    # half the weight on urn (2,0,0), half on (0,1,1); merge labels 0 and 2
    w = weights_from_atoms(2, 3, {(2, 0, 0): F(1, 2), (0, 1, 1): F(1, 2)})
    merge = LabelMerge((0, 1, 0), 2)
    summed = merge.merge_vector(list(predictive_exact(w, (1, 0, 0))))
    coarse = predictive_exact(merge_model(w, merge), (1, 0))
    assert summed == [1, 0]
    assert list(coarse) == [F(2, 3), F(1, 3)]


def test_load_prior(tmp_path):
    doc = {"m": 2, "k": 2, "labels": ["yes", "no"],
           "atoms": [{"histogram": [2, 0], "weight": 0.25}, {"histogram": [0, 2], "weight": "3/4"}]}
    path = tmp_path / "prior.json"
    path.write_text(json.dumps(doc))
    model = load_prior(path)
    assert isinstance(model, ExchangeableModel)
    assert model.labels.names == ("yes", "no")
    assert model.weights.weight((2, 0)) == F(1, 4)
    assert load_prior(json.dumps(doc)).weights == model.weights
    assert load_prior(doc).m == 2
    with pytest.raises(ValueError):
        load_prior({"m": 2, "k": 2})


def test_sample_sequence_is_deterministic():
    w = random_model(5, 6, 3)
    assert sample_sequence(w, 6, seed=42) == sample_sequence(w, 6, seed=42)
    assert sample_sequence(goldstein(5), 5, seed=1) in ([0] * 5, [1] * 5)
    assert sample_sequence(w, 0, seed=1) == []
    with pytest.raises(ValueError):
        sample_sequence(w, 7)


@pytest.mark.parametrize("weights", [
    random_model(21, 4, 2, "dense"),
    uniform_weights(4, 2),
    iid_weights(4, [F(1, 3), F(2, 3)]),
], ids=["dense", "uniform", "iid"])
def test_sample_sequence_frequencies(weights):
    draws = 100_000
    rng = np.random.default_rng(2024)
    counts = {}
    for _ in range(draws):
        x = tuple(sample_sequence(weights, 2, rng))
        counts[x] = counts.get(x, 0) + 1
    for x in itertools.product(range(2), repeat=2):
        p = float(sequence_pmf(weights, x))
        se = math.sqrt(p * (1 - p) / draws)
        assert abs(counts.get(x, 0) / draws - p) <= 3 * se + 1e-12, x
