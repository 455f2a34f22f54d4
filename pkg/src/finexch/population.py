"""Population proportions from a sample, overall and within groups."""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from fractions import Fraction

from .approx import ht_approx, ml_approx, tv_distance
from .combinat import Histogram, LabelMerge, merge_histogram
from .model import LabelDistribution, _check_mode, merge_model, predictive_exact

__all__ = [
    "EXACT",
    "HT",
    "GroupSample",
    "PopulationPrediction",
    "ResolutionAdvice",
    "RouteComparison",
    "grouped_prediction",
    "population_prediction",
    "resolution_advice",
    "route_comparison",
]

HT = "HT-approx"
EXACT = "exact"
_METHODS = {"ht": HT, "ht-approx": HT, "exact": EXACT}


def _method(name: str) -> str:
    try:
        return _METHODS[name.lower()]
    except KeyError:
        raise ValueError(f"unknown method {name!r}; expected 'ht' or 'exact'") from None


@dataclass
class PopulationPrediction:
    """Expected population proportions for each label.

    ``groups`` is empty for an ungrouped prediction; otherwise it maps each
    group id to that group's own prediction and ``values`` is their
    size-weighted average.
    """

    values: LabelDistribution
    method: str
    n: int
    m: int
    sample_fraction: Fraction | float
    groups: dict[str, PopulationPrediction] = field(default_factory=dict)


@dataclass
class GroupSample:
    group: str
    size: int
    histogram: Histogram
    model: object = None

    def __post_init__(self):
        self.histogram = Histogram(self.histogram)
        if self.histogram.total > self.size:
            raise ValueError(
                f"group {self.group!r}: sample of {self.histogram.total} exceeds group size {self.size}"
            )


def population_prediction(h: Sequence[int], m: int, method: str = "ht", model=None,
                          mode: str = "rational") -> PopulationPrediction:
    """Expected proportion of the population carrying each label.

    The sampled ``n`` items contribute their observed frequencies and the
    ``m - n`` unsampled ones contribute the predictive distribution, exact
    (``method="exact"``, needs ``model``) or add-one (``method="ht"``).
    """
    _check_mode(mode)
    method = _method(method)
    h = Histogram(h)
    n = h.total
    if n > m:
        raise ValueError(f"sample size {n} exceeds population size {m}")
    if method == EXACT and model is None:
        raise ValueError("exact prediction needs a model")
    exact = mode == "rational"
    frac = Fraction(n, m) if exact else n / m
    if n == m:
        values = ml_approx(h, mode)
    else:
        if method == EXACT:
            if model.k != h.k or model.m != m:
                raise ValueError(
                    f"model is for m={model.m}, k={model.k}; sample needs m={m}, k={h.k}"
                )
            pred = predictive_exact(model, h, mode)
        else:
            pred = ht_approx(h, mode)
        if n == 0:
            values = pred
        else:
            fhat = ml_approx(h, mode)
            values = LabelDistribution(_renorm([frac * a + (1 - frac) * b for a, b in zip(fhat, pred)], exact))
    return PopulationPrediction(values, method, n, m, frac)


def _renorm(values: list, exact: bool) -> list:
    if exact:
        return values
    total = math.fsum(values)
    return [v / total for v in values]


def grouped_prediction(groups: Sequence[GroupSample], method: str = "ht", m: int | None = None,
                       mode: str = "rational") -> PopulationPrediction:
    """Stratified prediction: each group predicted on its own sample, then
    averaged with weights ``m_g / m``.

    Groups are treated as carrying no information about one another.
    """
    method = _method(method)
    if not groups:
        raise ValueError("at least one group is required")
    ks = {g.histogram.k for g in groups}
    if len(ks) != 1:
        raise ValueError(f"groups disagree on the number of labels: {sorted(ks)}")
    ids = [str(g.group) for g in groups]
    if len(set(ids)) != len(ids):
        raise ValueError(f"duplicate group ids: {ids}")
    total = sum(g.size for g in groups)
    if m is None:
        m = total
    elif m != total:
        raise ValueError(f"group sizes sum to {total}, but the population size is {m}")
    exact = mode == "rational"
    per_group = {}
    for g in groups:
        per_group[str(g.group)] = population_prediction(g.histogram, g.size, method, g.model, mode)
    k = ks.pop()
    overall = [Fraction(0) if exact else 0.0] * k
    for g in groups:
        share = Fraction(g.size, m) if exact else g.size / m
        for j, p in enumerate(per_group[str(g.group)].values):
            overall[j] += share * p
    n = sum(g.histogram.total for g in groups)
    return PopulationPrediction(
        LabelDistribution(_renorm(overall, exact)), method, n, m,
        Fraction(n, m) if exact else n / m, per_group,
    )


@dataclass
class RouteComparison:
    """The two ways of predicting merged labels.

    ``predict_then_sum`` smooths over the original labels and then adds
    within merge groups; ``merge_then_predict`` smooths the merged
    histogram.  The exact routes are filled in when a model is given.
    """

    predict_then_sum: LabelDistribution
    merge_then_predict: LabelDistribution
    tv: Fraction | float
    exact_predict_then_sum: LabelDistribution | None = None
    exact_merge_then_predict: LabelDistribution | None = None

    @property
    def exact_routes_agree(self) -> bool | None:
        if self.exact_predict_then_sum is None:
            return None
        a, b = self.exact_predict_then_sum, self.exact_merge_then_predict
        if a.exact and b.exact:
            return a == b
        return all(math.isclose(x, y, rel_tol=1e-10, abs_tol=1e-15) for x, y in zip(a, b))


def route_comparison(h: Sequence[int], merge: LabelMerge, model=None,
                     mode: str = "rational") -> RouteComparison:
    h = Histogram(h)
    if merge.k != h.k:
        raise ValueError(f"merge is over {merge.k} labels, histogram has {h.k}")
    summed = LabelDistribution(merge.merge_vector(list(ht_approx(h, mode))))
    merged = ht_approx(merge_histogram(h, merge), mode)
    out = RouteComparison(summed, merged, tv_distance(summed, merged))
    if model is not None:
        fine = predictive_exact(model, h, mode)
        out.exact_predict_then_sum = LabelDistribution(_renorm(merge.merge_vector(list(fine)), mode == "rational"))
        out.exact_merge_then_predict = predictive_exact(merge_model(model, merge), merge_histogram(h, merge), mode)
    return out


@dataclass(frozen=True)
class ResolutionAdvice:
    under_powered: bool
    recommended_k: int


def resolution_advice(n: int, k: int) -> ResolutionAdvice:
    """Flag ``n < 9k`` as under-powered and suggest ``k = max(1, n // 9)`` labels."""
    if n < 0 or k < 1:
        raise ValueError(f"need n >= 0 and k >= 1, got n={n}, k={k}")
    return ResolutionAdvice(n < 9 * k, max(1, n // 9))
