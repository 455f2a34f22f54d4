"""Exact and approximate prediction for finite exchangeable populations.

Models are weight vectors over urn compositions (histograms of the whole
population); the exact predictive distribution of an unsampled member is
compared with add-one smoothing, whose total variation error is bounded
by the spread of the add-one histogram probabilities.
"""

__version__ = "0.1.0"

from .approx import (
    ApproxReport,
    beta,
    gamma,
    gamma_crude_bound,
    ht_approx,
    ht_report,
    ml_approx,
    ml_modified,
    tv_distance,
)
from .combinat import (
    CapExceededError,
    Histogram,
    LabelMerge,
    LabelSet,
    add_one,
    enumerate_histograms,
    histogram_of,
    histogram_space_size,
    hypergeometric_pmf,
    merge_histogram,
    multinomial_coeff,
)
from .model import (
    ExchangeableModel,
    LabelDistribution,
    SimplexWeights,
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
from .population import (
    GroupSample,
    grouped_prediction,
    population_prediction,
    resolution_advice,
    route_comparison,
)
