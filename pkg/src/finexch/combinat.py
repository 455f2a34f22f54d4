"""Exact combinatorics of label histograms.

Histograms are count vectors over a fixed, ordered set of ``k`` labels.
Label indices are 0-based throughout the Python API.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

__all__ = [
    "DEFAULT_CAP",
    "CapExceededError",
    "Histogram",
    "LabelMerge",
    "LabelSet",
    "add_one",
    "enumerate_histograms",
    "histogram_of",
    "histogram_space_size",
    "hypergeometric_pmf",
    "iter_histograms",
    "log_binomial",
    "merge_histogram",
    "multinomial_coeff",
]

DEFAULT_CAP = 10**7


class CapExceededError(ValueError):
    """Raised when an enumeration would exceed the configured size cap."""

    def __init__(self, size: int, cap: int, what: str = "histogram space"):
        super().__init__(f"{what} has {size} elements, exceeding the cap of {cap}")
        self.size = size
        self.cap = cap


@dataclass(frozen=True)
class LabelSet:
    names: tuple[str, ...]

    def __post_init__(self):
        names = tuple(str(x) for x in self.names)
        object.__setattr__(self, "names", names)
        if not names:
            raise ValueError("a label set needs at least one label")
        if len(set(names)) != len(names):
            raise ValueError(f"label names must be distinct: {names}")

    @classmethod
    def default(cls, k: int) -> LabelSet:
        """Labels named ``"1"`` .. ``"k"``."""
        return cls(tuple(str(j + 1) for j in range(k)))

    @property
    def k(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"unknown label {name!r}") from None

    def __len__(self) -> int:
        return len(self.names)

    def __iter__(self) -> Iterator[str]:
        return iter(self.names)


class Histogram(tuple):
    """Immutable vector of nonnegative label counts.

    >>> h = Histogram((3, 2, 0, 5, 0))
    >>> h.total, h.k
    (10, 5)
    """

    __slots__ = ()

    def __new__(cls, counts: Iterable[int]):
        counts = tuple(counts)
        for c in counts:
            if isinstance(c, bool) or int(c) != c or c < 0:
                raise ValueError(f"histogram counts must be nonnegative integers, got {counts}")
        return super().__new__(cls, (int(c) for c in counts))

    @property
    def k(self) -> int:
        return len(self)

    @property
    def total(self) -> int:
        return sum(self)

    def __repr__(self) -> str:
        return f"Histogram({tuple(self)!r})"


def _as_histogram(h) -> Histogram:
    return h if isinstance(h, Histogram) else Histogram(h)


def histogram_space_size(m: int, k: int) -> int:
    """Number of distinct histograms of ``m`` items over ``k`` labels (stars and bars)."""
    if m < 0 or k < 1:
        raise ValueError(f"need m >= 0 and k >= 1, got m={m}, k={k}")
    return math.comb(m + k - 1, k - 1)


def iter_histograms(m: int, k: int) -> Iterator[Histogram]:
    """Yield every ``m``-histogram over ``k`` labels in ascending lexicographic order."""
    if m < 0 or k < 1:
        raise ValueError(f"need m >= 0 and k >= 1, got m={m}, k={k}")
    counts = [0] * k

    def fill(pos: int, remaining: int) -> Iterator[Histogram]:
        if pos == k - 1:
            counts[pos] = remaining
            yield Histogram(counts)
            return
        for c in range(remaining + 1):
            counts[pos] = c
            yield from fill(pos + 1, remaining - c)

    yield from fill(0, m)


def enumerate_histograms(m: int, k: int, cap: int = DEFAULT_CAP) -> list[Histogram]:
    """All ``m``-histograms over ``k`` labels, ascending lexicographically.

    The position in the returned list is the atom index used by simplex
    weight vectors.
    """
    c = histogram_space_size(m, k)
    if c > cap:
        raise CapExceededError(c, cap)
    return list(iter_histograms(m, k))


def multinomial_coeff(h: Sequence[int]) -> int:
    """Number of distinct sequences with histogram ``h``: n! / (h_1! ... h_k!)."""
    h = _as_histogram(h)
    result = 1
    running = 0
    for c in h:
        running += c
        result *= math.comb(running, c)
    return result


@lru_cache(maxsize=4096)
def _log_factorial(n: int) -> float:
    return math.lgamma(n + 1)


def log_binomial(a: int, b: int) -> float:
    """log C(a, b); ``-inf`` when ``b`` is outside ``0..a``."""
    if b < 0 or b > a:
        return -math.inf
    return _log_factorial(a) - _log_factorial(b) - _log_factorial(a - b)


def hypergeometric_pmf(h: Sequence[int], u: Sequence[int], mode: str = "rational"):
    """Probability of drawing histogram ``h`` without replacement from urn ``u``.

    Returns a :class:`~fractions.Fraction` in ``"rational"`` mode and a
    float (computed in log space) in ``"float"`` mode.  The value is
    exactly zero whenever ``h`` is not componentwise below ``u``.
    """
    h, u = _as_histogram(h), _as_histogram(u)
    if len(h) != len(u):
        raise ValueError(f"dimension mismatch: h has {len(h)} labels, u has {len(u)}")
    n, m = h.total, u.total
    if n > m:
        raise ValueError(f"sample size {n} exceeds urn size {m}")
    if any(hj > uj for hj, uj in zip(h, u)):
        return Fraction(0) if mode == "rational" else 0.0
    if mode == "rational":
        num = 1
        for hj, uj in zip(h, u):
            num *= math.comb(uj, hj)
        return Fraction(num, math.comb(m, n))
    if mode == "float":
        logp = sum(log_binomial(uj, hj) for hj, uj in zip(h, u)) - log_binomial(m, n)
        return math.exp(logp)
    raise ValueError(f"unknown numeric mode {mode!r}")


def histogram_of(sequence: Iterable[int], k: int) -> Histogram:
    """Count occurrences of each label index ``0..k-1`` in ``sequence``."""
    counts = [0] * k
    for i, x in enumerate(sequence):
        if not 0 <= x < k:
            raise IndexError(f"label index {x} at position {i} is outside 0..{k - 1}")
        counts[x] += 1
    return Histogram(counts)


def add_one(h: Sequence[int], j: int) -> Histogram:
    """``h`` with one more observation of label ``j``."""
    h = _as_histogram(h)
    if not 0 <= j < len(h):
        raise IndexError(f"label index {j} is outside 0..{len(h) - 1}")
    counts = list(h)
    counts[j] += 1
    return Histogram(counts)


@dataclass(frozen=True)
class LabelMerge:
    """Surjective relabelling of ``k`` labels onto ``k_merged`` labels.

    ``mapping[j]`` is the merged index of original label ``j``.
    """

    mapping: tuple[int, ...]
    k_merged: int

    def __post_init__(self):
        mapping = tuple(int(t) for t in self.mapping)
        object.__setattr__(self, "mapping", mapping)
        if self.k_merged < 1:
            raise ValueError("merged label count must be positive")
        if any(not 0 <= t < self.k_merged for t in mapping):
            raise ValueError(f"merge targets must lie in 0..{self.k_merged - 1}: {mapping}")
        missing = set(range(self.k_merged)) - set(mapping)
        if missing:
            raise ValueError(f"merge is not surjective; no label maps to {sorted(missing)}")

    @classmethod
    def from_mapping(cls, mapping: Sequence[int]) -> LabelMerge:
        mapping = tuple(mapping)
        return cls(mapping, max(mapping) + 1 if mapping else 0)

    @classmethod
    def from_groups(cls, groups: Sequence[Sequence[int]]) -> LabelMerge:
        """Build a merge from a list of groups of original label indices."""
        k = sum(len(g) for g in groups)
        mapping = [-1] * k
        for target, group in enumerate(groups):
            for j in group:
                if not 0 <= j < k or mapping[j] != -1:
                    raise ValueError(f"groups must partition 0..{k - 1}: {groups}")
                mapping[j] = target
        return cls(tuple(mapping), len(groups))

    @classmethod
    def identity(cls, k: int) -> LabelMerge:
        return cls(tuple(range(k)), k)

    @property
    def k(self) -> int:
        return len(self.mapping)

    def groups(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.k_merged)]
        for j, t in enumerate(self.mapping):
            out[t].append(j)
        return out

    def merge_vector(self, values: Sequence):
        """Sum ``values`` (one per original label) within merge groups."""
        if len(values) != self.k:
            raise ValueError(f"expected {self.k} values, got {len(values)}")
        out = [0] * self.k_merged
        for j, t in enumerate(self.mapping):
            out[t] = out[t] + values[j]
        return out


def merge_histogram(h: Sequence[int], merge: LabelMerge) -> Histogram:
    h = _as_histogram(h)
    return Histogram(merge.merge_vector(h))
