"""Exchangeable models as mixtures of urns.

An exchangeable PMF for ``m`` items over ``k`` labels is a weight vector
on the simplex of ``m``-histograms: ``w[u]`` is the prior probability that
the whole population has histogram ``u``.  Every marginal of the first
``n`` items is the corresponding mixture of multivariate hypergeometric
draws from those urns.

All routines accept ``mode="rational"`` (exact :class:`Fraction`
arithmetic) or ``mode="float"`` (log-space accumulation in doubles).
"""

from __future__ import annotations

import json
import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from pathlib import Path

import numpy as np

from .combinat import (
    DEFAULT_CAP,
    CapExceededError,
    Histogram,
    LabelMerge,
    LabelSet,
    add_one,
    histogram_of,
    histogram_space_size,
    iter_histograms,
    merge_histogram,
    multinomial_coeff,
)

__all__ = [
    "ExchangeableModel",
    "IIDWeights",
    "LabelDistribution",
    "SimplexWeights",
    "UniformWeights",
    "ZeroProbabilitySampleError",
    "adjacent_masses",
    "histogram_pmf",
    "iid_weights",
    "load_prior",
    "marginal_histogram_pmf",
    "merge_model",
    "predictive_exact",
    "sample_sequence",
    "sequence_pmf",
    "uniform_weights",
    "weights_from_atoms",
]

REVISE_MESSAGE = "f_H^m would need to be revised in the light of the sample"


class ZeroProbabilitySampleError(ValueError):
    """The observed sample has probability zero under the model."""

    def __init__(self, h):
        super().__init__(
            f"sample histogram {tuple(h)} has zero probability under the model; {REVISE_MESSAGE}"
        )
        self.histogram = tuple(h)


def _is_exact(x) -> bool:
    return isinstance(x, Rational) and not isinstance(x, bool)


def _check_mode(mode: str) -> None:
    if mode not in ("rational", "float"):
        raise ValueError(f"unknown numeric mode {mode!r}; expected 'rational' or 'float'")


class LabelDistribution(tuple):
    """Probability vector over the ``k`` labels.

    Entries are all exact rationals or all floats; exact vectors must sum
    to one exactly, float vectors within 1e-12.
    """

    __slots__ = ()

    def __new__(cls, probs: Iterable):
        probs = tuple(probs)
        if not probs:
            raise ValueError("a label distribution needs at least one label")
        exact = all(_is_exact(p) for p in probs)
        if exact:
            probs = tuple(Fraction(p) for p in probs)
        else:
            probs = tuple(float(p) for p in probs)
        if any(p < 0 for p in probs):
            raise ValueError(f"probabilities must be nonnegative: {probs}")
        total = sum(probs)
        if exact and total != 1:
            raise ValueError(f"probabilities sum to {total}, not 1")
        if not exact and abs(total - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {total!r}, not 1")
        return super().__new__(cls, probs)

    @property
    def k(self) -> int:
        return len(self)

    @property
    def exact(self) -> bool:
        return isinstance(self[0], Fraction)

    def to_float(self) -> LabelDistribution:
        return LabelDistribution(float(p) for p in self)

    def argmax(self) -> int:
        return max(range(len(self)), key=self.__getitem__)

    def __repr__(self) -> str:
        return f"LabelDistribution({', '.join(str(p) for p in self)})"


class SimplexWeights:
    """Sparse weights on the ``m``-histograms over ``k`` labels.

    ``atoms`` maps histograms (each summing to ``m``) to nonnegative
    weights.  Histograms not listed have weight zero, so sparse priors
    work however large the histogram space is.
    """

    family: str | None = None

    def __init__(self, m: int, k: int, atoms: Mapping | Iterable | None = None):
        if m < 0 or k < 1:
            raise ValueError(f"need m >= 0 and k >= 1, got m={m}, k={k}")
        self.m = m
        self.k = k
        self._atoms: dict[Histogram, Fraction | float] | None = None
        self._cache: dict = {}
        if atoms is not None:
            self._atoms = self._validate(atoms)

    def _validate(self, atoms) -> dict:
        pairs = atoms.items() if isinstance(atoms, Mapping) else atoms
        out: dict[Histogram, Fraction | float] = {}
        for u, w in pairs:
            u = Histogram(u)
            if u.k != self.k:
                raise ValueError(f"atom {tuple(u)} has {u.k} labels, expected {self.k}")
            if u.total != self.m:
                raise ValueError(f"atom {tuple(u)} has total {u.total}, expected m={self.m}")
            if u in out:
                raise ValueError(f"duplicate atom {tuple(u)}")
            if w < 0:
                raise ValueError(f"atom {tuple(u)} has negative weight {w}")
            out[u] = w
        if not out:
            raise ValueError("at least one atom is required")
        if all(_is_exact(w) for w in out.values()):
            out = {u: Fraction(w) for u, w in out.items()}
            total = sum(out.values())
            if total != 1:
                raise ValueError(f"weights sum to {total}, not 1")
        else:
            out = {u: float(w) for u, w in out.items()}
            total = math.fsum(out.values())
            if abs(total - 1.0) > 1e-9:
                raise ValueError(f"weights sum to {total!r}, not 1")
        return dict(sorted(out.items()))

    def _materialize(self) -> dict:
        raise NotImplementedError

    @property
    def atoms(self) -> Mapping[Histogram, Fraction | float]:
        if self._atoms is None:
            self._atoms = self._materialize()
        return self._atoms

    @property
    def exact(self) -> bool:
        return all(isinstance(w, Fraction) for w in self.atoms.values())

    @property
    def space_size(self) -> int:
        return histogram_space_size(self.m, self.k)

    def weight(self, u: Sequence[int]):
        return self.atoms.get(Histogram(u), 0)

    def support(self) -> list[Histogram]:
        return [u for u, w in self.atoms.items() if w > 0]

    def densify(self) -> SimplexWeights:
        """A plain atom-list copy, with no closed-form shortcuts."""
        return SimplexWeights(self.m, self.k, dict(self.atoms))

    def __len__(self) -> int:
        return len(self.atoms)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SimplexWeights):
            return NotImplemented
        if (self.m, self.k) != (other.m, other.k):
            return False
        mine = {u: w for u, w in self.atoms.items() if w != 0}
        theirs = {u: w for u, w in other.atoms.items() if w != 0}
        return mine == theirs

    __hash__ = None

    def __repr__(self) -> str:
        atoms = "lazy" if self._atoms is None else len(self._atoms)
        return f"{type(self).__name__}(m={self.m}, k={self.k}, atoms={atoms})"


class UniformWeights(SimplexWeights):
    """Equal weight on every ``m``-histogram.

    Marginals have the closed form ``f_H^n(h) = 1 / C(n+k-1, k-1)``, so
    the atom list is only built if something asks for it.
    """

    family = "uniform"

    def __init__(self, m: int, k: int, cap: int = DEFAULT_CAP):
        super().__init__(m, k)
        c = histogram_space_size(m, k)
        if c > cap:
            raise CapExceededError(c, cap)
        self.cap = cap

    @property
    def exact(self) -> bool:
        return True

    def _materialize(self) -> dict:
        c = histogram_space_size(self.m, self.k)
        w = Fraction(1, c)
        return {u: w for u in iter_histograms(self.m, self.k)}


class IIDWeights(SimplexWeights):
    """Multinomial weights ``w[u] = M(u; p)``: the IID model embedded in the simplex."""

    family = "iid"

    def __init__(self, m: int, p: Sequence, cap: int = DEFAULT_CAP):
        p = LabelDistribution(p)
        super().__init__(m, len(p))
        self.p = p
        self.cap = cap
        support = sum(1 for pj in p if pj > 0)
        c = histogram_space_size(m, support)
        if c > cap:
            raise CapExceededError(c, cap)

    @property
    def exact(self) -> bool:
        return self.p.exact

    def _materialize(self) -> dict:
        p = self.p
        support = [j for j, pj in enumerate(p) if pj > 0]
        out = {}
        for v in iter_histograms(self.m, len(support)):
            counts = [0] * self.k
            for j, c in zip(support, v):
                counts[j] = c
            u = Histogram(counts)
            out[u] = _multinomial_mass(u, p)
        return dict(sorted(out.items()))


def _multinomial_mass(h: Histogram, p: LabelDistribution):
    if p.exact:
        w = Fraction(multinomial_coeff(h))
        for hj, pj in zip(h, p):
            w *= pj**hj
        return w
    logw = math.lgamma(h.total + 1)
    for hj, pj in zip(h, p):
        if hj:
            if pj == 0:
                return 0.0
            logw += hj * math.log(pj) - math.lgamma(hj + 1)
    return math.exp(logw)


def uniform_weights(m: int, k: int, cap: int = DEFAULT_CAP) -> UniformWeights:
    return UniformWeights(m, k, cap)


def iid_weights(m: int, p: Sequence, cap: int = DEFAULT_CAP) -> IIDWeights:
    """Weights of the IID model with label probabilities ``p``.

    Labels with zero probability prune the atoms, so the cap applies to
    the histogram space over the support of ``p`` only.
    """
    return IIDWeights(m, p, cap)


def _parse_weight(w):
    if isinstance(w, str):
        return Fraction(w)
    return w


def weights_from_atoms(m: int, k: int, atoms, renormalize: bool = False) -> SimplexWeights:
    """Validated weights from ``(histogram, weight)`` pairs or a mapping.

    With ``renormalize`` the weights are divided by their sum; otherwise
    they must already sum to one (exactly for rationals, within 1e-9 for
    floats).
    """
    pairs = list(atoms.items() if isinstance(atoms, Mapping) else atoms)
    if not pairs:
        raise ValueError("at least one atom is required")
    pairs = [(Histogram(u), _parse_weight(w)) for u, w in pairs]
    if renormalize:
        if all(_is_exact(w) for _, w in pairs):
            total = sum(Fraction(w) for _, w in pairs)
            if total <= 0:
                raise ValueError("cannot renormalize weights with zero total")
            pairs = [(u, Fraction(w) / total) for u, w in pairs]
        else:
            total = math.fsum(float(w) for _, w in pairs)
            if total <= 0:
                raise ValueError("cannot renormalize weights with zero total")
            pairs = [(u, float(w) / total) for u, w in pairs]
    return SimplexWeights(m, k, pairs)


@dataclass(frozen=True)
class ExchangeableModel:
    """An exchangeable model: simplex weights plus label names."""

    weights: SimplexWeights
    labels: LabelSet = field(default=None)

    def __post_init__(self):
        if self.labels is None:
            object.__setattr__(self, "labels", LabelSet.default(self.weights.k))
        if self.labels.k != self.weights.k:
            raise ValueError(
                f"label set has {self.labels.k} labels but weights are over {self.weights.k}"
            )

    @property
    def m(self) -> int:
        return self.weights.m

    @property
    def k(self) -> int:
        return self.weights.k


def _weights_of(model) -> SimplexWeights:
    if isinstance(model, ExchangeableModel):
        return model.weights
    if isinstance(model, SimplexWeights):
        return model
    raise TypeError(f"expected an ExchangeableModel or SimplexWeights, got {type(model).__name__}")


def load_prior(source) -> ExchangeableModel:
    """Read a prior atoms document (path, JSON text, or already-parsed dict).

    Decimal literals are read as exact rationals, so ``0.1`` means 1/10;
    weights may also be given as ``"p/q"`` strings.
    """
    if isinstance(source, Mapping):
        doc = source
    else:
        text = source
        if isinstance(source, Path) or (isinstance(source, str) and not source.lstrip().startswith("{")):
            text = Path(source).read_text(encoding="utf-8")
        doc = json.loads(text, parse_float=Fraction)
    try:
        m, k = int(doc["m"]), int(doc["k"])
        atoms = [(a["histogram"], a["weight"]) for a in doc["atoms"]]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed prior document: missing {exc}") from None
    weights = weights_from_atoms(m, k, atoms, bool(doc.get("renormalize", False)))
    labels = doc.get("labels")
    return ExchangeableModel(weights, LabelSet(tuple(labels)) if labels else None)


# -- mixture kernels --------------------------------------------------------

def _rational_kernel(weights: SimplexWeights):
    """Atoms as integer numerators over one common denominator."""
    kernel = weights._cache.get("rational")
    if kernel is None:
        fracs = [(u, Fraction(w)) for u, w in weights.atoms.items() if w != 0]
        denom = math.lcm(*(w.denominator for _, w in fracs))
        kernel = (denom, [(u, int(w * denom)) for u, w in fracs])
        weights._cache["rational"] = kernel
    return kernel


def _float_kernel(weights: SimplexWeights):
    kernel = weights._cache.get("float")
    if kernel is None:
        live = [(u, float(w)) for u, w in weights.atoms.items() if w != 0]
        urns = np.array([u for u, _ in live], dtype=np.int64).reshape(len(live), weights.k)
        logw = np.log(np.array([w for _, w in live], dtype=float))
        logfact = np.array([math.lgamma(i + 1) for i in range(weights.m + 1)])
        kernel = (urns, logw, logfact)
        weights._cache["float"] = kernel
    return kernel


def _exact_mass(weights: SimplexWeights, g: Histogram) -> Fraction:
    key = ("q", g)
    cached = weights._cache.get(key)
    if cached is not None:
        return cached
    n, m = g.total, weights.m
    if weights.family == "uniform":
        value = Fraction(1, histogram_space_size(n, weights.k))
    elif weights.family == "iid":
        value = Fraction(_multinomial_mass(g, weights.p))
    else:
        denom, atoms = _rational_kernel(weights)
        comb = math.comb
        num = 0
        for u, wu in atoms:
            term = wu
            for uj, gj in zip(u, g):
                if gj > uj:
                    break
                term *= comb(uj, gj)
            else:
                num += term
        value = Fraction(num, denom * comb(m, n))
    weights._cache[key] = value
    return value


def _log_mass(weights: SimplexWeights, g: Histogram) -> float:
    key = ("f", g)
    cached = weights._cache.get(key)
    if cached is not None:
        return cached
    n, m = g.total, weights.m
    if weights.family == "uniform":
        value = -math.log(histogram_space_size(n, weights.k))
    elif weights.family == "iid":
        mass = _multinomial_mass(g, weights.p.to_float() if weights.p.exact else weights.p)
        value = math.log(mass) if mass > 0 else -math.inf
    else:
        urns, logw, logfact = _float_kernel(weights)
        ga = np.asarray(g, dtype=np.int64)
        ok = np.all(urns >= ga, axis=1)
        if not ok.any():
            value = -math.inf
        else:
            u = urns[ok]
            terms = logw[ok] + (logfact[u] - logfact[ga] - logfact[u - ga]).sum(axis=1)
            top = terms.max()
            value = float(top + np.log(np.exp(terms - top).sum()))
            value -= logfact[m] - logfact[n] - logfact[m - n]
    weights._cache[key] = value
    return value


def _check_histogram(weights: SimplexWeights, h, max_total: int) -> Histogram:
    h = Histogram(h)
    if h.k != weights.k:
        raise ValueError(f"histogram has {h.k} labels, model has {weights.k}")
    if h.total > max_total:
        raise ValueError(f"histogram total {h.total} exceeds {max_total}")
    return h


def histogram_pmf(model, g: Sequence[int], mode: str = "rational"):
    """``f_H^n(g)``: probability that the first ``n = sum(g)`` items have histogram ``g``."""
    _check_mode(mode)
    weights = _weights_of(model)
    g = _check_histogram(weights, g, weights.m)
    if mode == "rational":
        return _exact_mass(weights, g)
    return math.exp(_log_mass(weights, g))


def marginal_histogram_pmf(model, n: int, mode: str = "rational", cap: int = DEFAULT_CAP) -> dict:
    """The full PMF of the ``n``-item histogram, ascending lexicographically (zeros included)."""
    _check_mode(mode)
    weights = _weights_of(model)
    if not 0 <= n <= weights.m:
        raise ValueError(f"need 0 <= n <= m={weights.m}, got n={n}")
    c = histogram_space_size(n, weights.k)
    if c > cap:
        raise CapExceededError(c, cap)
    return {g: histogram_pmf(weights, g, mode) for g in iter_histograms(n, weights.k)}


def sequence_pmf(model, x: Sequence[int], mode: str = "rational"):
    """Probability of the label sequence ``x`` as the first ``len(x)`` items."""
    _check_mode(mode)
    weights = _weights_of(model)
    if len(x) > weights.m:
        raise ValueError(f"sequence of length {len(x)} is longer than m={weights.m}")
    h = histogram_of(x, weights.k)
    mh = multinomial_coeff(h)
    if mode == "rational":
        return _exact_mass(weights, h) / mh
    return math.exp(_log_mass(weights, h) - math.log(mh))


def adjacent_masses(model, h: Sequence[int], mode: str = "rational") -> list:
    """Values proportional to ``f_H^{n+1}(h + e_j)`` for each label ``j``.

    Exact in rational mode.  In float mode they are rescaled so the
    largest is one, which keeps every ratio intact without underflow;
    all entries are zero when every add-one histogram is impossible.
    """
    _check_mode(mode)
    weights = _weights_of(model)
    h = _check_histogram(weights, h, weights.m - 1)
    plus = [add_one(h, j) for j in range(weights.k)]
    if mode == "rational":
        return [_exact_mass(weights, g) for g in plus]
    logs = [_log_mass(weights, g) for g in plus]
    top = max(logs)
    if top == -math.inf:
        return [0.0] * weights.k
    return [math.exp(v - top) for v in logs]


def predictive_exact(model, h: Sequence[int], mode: str = "rational") -> LabelDistribution:
    """Exact predictive distribution of the next item given sample histogram ``h``.

    ``f*_j`` is proportional to ``f_H^{n+1}(h + e_j) * (h_j + 1)``; only the
    ``k`` add-one histograms are evaluated.
    """
    h = Histogram(h)
    masses = adjacent_masses(model, h, mode)
    scores = [mj * (hj + 1) for mj, hj in zip(masses, h)]
    total = sum(scores)
    if total == 0:
        raise ZeroProbabilitySampleError(h)
    if mode == "rational":
        return LabelDistribution(s / total for s in scores)
    total = math.fsum(scores)
    return LabelDistribution(s / total for s in scores)


def merge_model(model, merge: LabelMerge, names: Sequence[str] | None = None) -> ExchangeableModel:
    """The exchangeable model of the relabelled sequence.

    Merged weights collect the weight of every urn that maps onto the
    same merged urn.
    """
    if isinstance(model, SimplexWeights):
        model = ExchangeableModel(model)
    weights = model.weights
    if merge.k != weights.k:
        raise ValueError(f"merge is over {merge.k} labels, model has {weights.k}")
    if names is None:
        names = ["+".join(model.labels.names[j] for j in grp) for grp in merge.groups()]
    labels = LabelSet(tuple(names))
    if weights.family == "iid":
        p = merge.merge_vector(list(weights.p))
        return ExchangeableModel(IIDWeights(weights.m, p, weights.cap), labels)
    merged: dict[Histogram, Fraction | float] = {}
    for u, w in weights.atoms.items():
        v = merge_histogram(u, merge)
        merged[v] = merged.get(v, 0) + w
    return ExchangeableModel(SimplexWeights(weights.m, merge.k_merged, merged), labels)


def sample_sequence(model, n: int, seed=None) -> list[int]:
    """Draw the first ``n`` labels of an exchangeable sequence.

    An urn is drawn from the weights, then ``n`` balls are taken from it
    without replacement.  ``seed`` may be an int or a numpy ``Generator``.
    """
    weights = _weights_of(model)
    if not 0 <= n <= weights.m:
        raise ValueError(f"need 0 <= n <= m={weights.m}, got n={n}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    k = weights.k
    if weights.family == "iid":
        p = np.array([float(pj) for pj in weights.p])
        return [int(x) for x in rng.choice(k, size=n, p=p / p.sum())]
    if weights.family == "uniform":
        # uniform over histograms is the Polya urn with one ball per label
        p = rng.dirichlet(np.ones(k))
        return [int(x) for x in rng.choice(k, size=n, p=p)]
    urns = list(weights.atoms)
    probs = np.array([float(w) for w in weights.atoms.values()])
    u = urns[rng.choice(len(urns), p=probs / probs.sum())]
    balls = np.repeat(np.arange(k), u)
    return [int(x) for x in rng.permutation(balls)[:n]]
