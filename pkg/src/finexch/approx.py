"""Add-one (HT), maximum-likelihood and modified-ML approximations to the
exact predictive, with the ratio spreads that bound their error.

``beta`` and ``gamma`` are both reported as excess ratios (``max/min - 1``)
and are ``math.inf`` when the smallest term is zero.  With that
convention the total variation error of the add-one approximation is at
most ``beta / 2`` and that of the modified ML approximation at most
``gamma / 2``.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from fractions import Fraction

from .combinat import Histogram
from .model import (
    LabelDistribution,
    ZeroProbabilitySampleError,
    _check_mode,
    _weights_of,
    adjacent_masses,
)

__all__ = [
    "ApproxReport",
    "Certificate",
    "beta",
    "gamma",
    "gamma_crude_bound",
    "ht_approx",
    "ht_report",
    "ml_approx",
    "ml_modified",
    "tv_distance",
]

_FLOAT_SLACK = 1e-12


def _finish(values: Sequence, total, mode: str) -> LabelDistribution:
    _check_mode(mode)
    if mode == "rational":
        return LabelDistribution(Fraction(v, total) for v in values)
    return LabelDistribution(v / total for v in values)


def ht_approx(h: Sequence[int], mode: str = "rational") -> LabelDistribution:
    """Add-one smoothing: ``(h_j + 1) / (n + k)``."""
    h = Histogram(h)
    return _finish([hj + 1 for hj in h], h.total + h.k, mode)


def ml_approx(h: Sequence[int], mode: str = "rational") -> LabelDistribution:
    """Empirical frequencies ``h_j / n``."""
    h = Histogram(h)
    if h.total == 0:
        raise ValueError("the ML approximation is undefined for an empty sample")
    return _finish(list(h), h.total, mode)


def ml_modified(h: Sequence[int], mode: str = "rational") -> LabelDistribution:
    """``max(h_j, 1) / (n + v)`` where ``v`` counts the empty labels."""
    h = Histogram(h)
    v = sum(1 for hj in h if hj == 0)
    return _finish([max(hj, 1) for hj in h], h.total + v, mode)


def tv_distance(f: Sequence, g: Sequence):
    """Total variation distance, half the L1 distance between ``f`` and ``g``."""
    if len(f) != len(g):
        raise ValueError(f"dimension mismatch: {len(f)} vs {len(g)} labels")
    diffs = [abs(a - b) for a, b in zip(f, g)]
    if all(isinstance(d, Fraction) or isinstance(d, int) for d in diffs):
        return Fraction(sum(diffs), 2)
    return math.fsum(float(d) for d in diffs) / 2


def _spread(values: Sequence, h: Histogram):
    hi, lo = max(values), min(values)
    if hi == 0:
        raise ZeroProbabilitySampleError(h)
    if lo == 0:
        return math.inf
    return hi / lo - 1


def beta(model, h: Sequence[int], mode: str = "rational"):
    """Excess ratio of the most to the least probable add-one histogram."""
    h = Histogram(h)
    return _spread(adjacent_masses(model, h, mode), h)


def _gamma_terms(masses: Sequence, h: Histogram) -> list:
    return [mj * Fraction(hj + 1, max(hj, 1)) if isinstance(mj, Fraction)
            else mj * (hj + 1) / max(hj, 1)
            for mj, hj in zip(masses, h)]


def gamma(model, h: Sequence[int], mode: str = "rational"):
    """Excess ratio of the add-one masses reweighted by ``(h_j + 1) / max(h_j, 1)``."""
    h = Histogram(h)
    return _spread(_gamma_terms(adjacent_masses(model, h, mode), h), h)


def gamma_crude_bound(beta_value, h: Sequence[int]):
    """``beta * [(h_lo + 1) / max(h_lo, 1)] / [(h_hi + 1) / h_hi]``.

    This uses only the smallest and largest counts.  It is informational:
    it does not reliably bound ``gamma`` (under a uniform prior ``beta`` is
    zero while ``gamma`` need not be).
    """
    h = Histogram(h)
    lo, hi = min(h), max(h)
    if hi == 0:
        raise ValueError("the crude gamma bound is undefined for an empty sample")
    factor = Fraction(lo + 1, max(lo, 1)) / Fraction(hi + 1, hi)
    if beta_value == math.inf:
        return math.inf
    if isinstance(beta_value, (Fraction, int)):
        return beta_value * factor
    return float(beta_value) * float(factor)


@dataclass
class Certificate:
    name: str
    holds: bool
    lhs: object = None
    rhs: object = None
    trivial: bool = False

    def to_dict(self) -> dict:
        return {"name": self.name, "holds": self.holds, "trivial": self.trivial,
                "lhs": self.lhs, "rhs": self.rhs}


@dataclass
class ApproxReport:
    """Exact predictive, its approximations, error bounds and their checks.

    ``u`` and ``v`` are the add-one mass ratios and count ratios relative
    to a reference label (the first label whose add-one histogram has
    positive mass), so that ``fstar`` is proportional to ``u * v``.
    ``adjacent`` holds the add-one masses themselves in rational mode and
    the same masses rescaled to a maximum of one in float mode.
    """

    histogram: Histogram
    mode: str
    fstar: LabelDistribution
    ftilde: LabelDistribution
    fhat: LabelDistribution | None
    fhatprime: LabelDistribution
    beta: object
    gamma: object
    gamma_crude: object
    tv_star_tilde: object
    tv_star_hatprime: object
    tv_tilde_hat: object
    tv_hat_uniform: object
    adjacent: list
    u: list
    v: list
    reference_label: int
    ratios: list
    certificates: list[Certificate] = field(default_factory=list)

    def certificate(self, name: str) -> Certificate:
        for c in self.certificates:
            if c.name == name:
                return c
        raise KeyError(name)

    @property
    def passed(self) -> bool:
        """True when every asserted certificate holds (informational ones excluded)."""
        return all(c.holds for c in self.certificates if not c.name.startswith("info:"))


def _le(a, b, exact: bool) -> bool:
    if exact:
        return a <= b
    return a <= b + _FLOAT_SLACK * max(1.0, abs(b))


def _eq(a, b, exact: bool) -> bool:
    if exact:
        return a == b
    return abs(a - b) <= _FLOAT_SLACK * max(1.0, abs(a), abs(b))


def ht_report(model, h: Sequence[int], mode: str = "rational") -> ApproxReport:
    """Compute every approximation and check each bound against the exact predictive."""
    _check_mode(mode)
    weights = _weights_of(model)
    h = Histogram(h)
    exact = mode == "rational"
    n, k = h.total, h.k
    masses = adjacent_masses(weights, h, mode)
    scores = [mj * (hj + 1) for mj, hj in zip(masses, h)]
    total = sum(scores) if exact else math.fsum(scores)
    if total == 0:
        raise ZeroProbabilitySampleError(h)
    fstar = LabelDistribution(s / total for s in scores)
    ftilde = ht_approx(h, mode)
    fhat = ml_approx(h, mode) if n > 0 else None
    fhatprime = ml_modified(h, mode)
    b = _spread(masses, h)
    g = _spread(_gamma_terms(masses, h), h)
    crude = gamma_crude_bound(b, h) if n > 0 else None

    ref = next(j for j, mj in enumerate(masses) if mj > 0)
    u = [mj / masses[ref] for mj in masses]
    v = [Fraction(hj + 1, h[ref] + 1) if exact else (hj + 1) / (h[ref] + 1) for hj in h]
    ratios = [fs / ft for fs, ft in zip(fstar, ftilde)]

    tv_st = tv_distance(fstar, ftilde)
    tv_sp = tv_distance(fstar, fhatprime)
    uniform = [Fraction(1, k) if exact else 1.0 / k] * k
    tv_th = tv_distance(ftilde, fhat) if fhat is not None else None
    tv_hu = tv_distance(fhat, uniform) if fhat is not None else None

    certs = []
    if b == math.inf:
        certs.append(Certificate("tv_star_tilde<=beta/2", True, tv_st, math.inf, trivial=True))
        certs.append(Certificate("ratio_bounds", True, None, None, trivial=True))
    else:
        certs.append(Certificate("tv_star_tilde<=beta/2", _le(tv_st, b / 2, exact), tv_st, b / 2))
        lo = 1 / (1 + b)
        ok = all(_le(lo, r, exact) and _le(r, 1 + b, exact) for r in ratios)
        certs.append(Certificate("ratio_bounds", ok, lo, 1 + b))
    if g == math.inf:
        certs.append(Certificate("tv_star_hatprime<=gamma/2", True, tv_sp, math.inf, trivial=True))
    else:
        certs.append(Certificate("tv_star_hatprime<=gamma/2", _le(tv_sp, g / 2, exact), tv_sp, g / 2))
    if fhat is not None:
        scaled = (Fraction(k, n + k) if exact else k / (n + k)) * tv_hu
        certs.append(Certificate("shrinkage_identity", _eq(tv_th, scaled, exact), tv_th, scaled))
        if g == math.inf:
            crude_ok = crude == math.inf
        else:
            crude_ok = _le(g, crude, exact)
        certs.append(Certificate("info:gamma<=crude_bound", crude_ok, g, crude))

    return ApproxReport(
        histogram=h, mode=mode, fstar=fstar, ftilde=ftilde, fhat=fhat, fhatprime=fhatprime,
        beta=b, gamma=g, gamma_crude=crude, tv_star_tilde=tv_st, tv_star_hatprime=tv_sp,
        tv_tilde_hat=tv_th, tv_hat_uniform=tv_hu, adjacent=list(masses), u=u, v=v,
        reference_label=ref, ratios=ratios, certificates=certs,
    )
