"""Brute-force exact reference computations.

Everything here works in exact rationals on explicitly enumerated
sequence tables, so it can certify the production routines in
:mod:`finexch.model` and :mod:`finexch.approx` on small instances.  The
oracle deliberately avoids the production mixture formulas where it can:
sequence probabilities come from the full-population weights and a
direct count of sequences per histogram, and marginals are plain sums
over the table.
"""

from __future__ import annotations

import itertools
import math
import random
from collections import Counter, defaultdict
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction

from .approx import ht_approx, ht_report, tv_distance
from .combinat import (
    DEFAULT_CAP,
    CapExceededError,
    Histogram,
    LabelMerge,
    histogram_space_size,
    iter_histograms,
    merge_histogram,
)
from .model import (
    LabelDistribution,
    SimplexWeights,
    ZeroProbabilitySampleError,
    _weights_of,
    histogram_pmf,
    iid_weights,
    marginal_histogram_pmf,
    merge_model,
    predictive_exact,
    sequence_pmf,
    uniform_weights,
    weights_from_atoms,
)

__all__ = [
    "ExtendabilityVerdict",
    "HTBoundsVerdict",
    "SequenceTable",
    "SuiteResult",
    "Verdict",
    "brute_force_predictive",
    "build_sequence_table",
    "is_extendable",
    "make_manifest",
    "random_iid_p",
    "random_merge",
    "random_model",
    "run_case",
    "run_suite",
    "verify_exchangeable",
    "verify_frt",
    "verify_ht_bounds",
    "verify_merge_commutes",
]

EXTENDABILITY_CAP = 200


@dataclass
class Verdict:
    passed: bool
    checked: int = 0
    counterexample: object = None
    detail: str = ""

    def __bool__(self) -> bool:
        return self.passed


@dataclass
class SequenceTable:
    """Probability of every full sequence of ``m`` labels drawn from ``k``."""

    m: int
    k: int
    probs: dict[tuple[int, ...], Fraction]

    def __post_init__(self):
        if len(self.probs) != self.k**self.m:
            raise ValueError(f"table needs {self.k ** self.m} sequences, got {len(self.probs)}")
        if any(p < 0 for p in self.probs.values()):
            raise ValueError("table probabilities must be nonnegative")
        if sum(self.probs.values()) != 1:
            raise ValueError("table probabilities must sum to exactly 1")

    @classmethod
    def from_function(cls, m: int, k: int, fn) -> SequenceTable:
        return cls(m, k, {x: Fraction(fn(x)) for x in itertools.product(range(k), repeat=m)})

    def marginal(self, n: int) -> dict[tuple[int, ...], Fraction]:
        """Probability of each length-``n`` prefix, by summing the table."""
        out: dict[tuple[int, ...], Fraction] = defaultdict(Fraction)
        for x, p in self.probs.items():
            out[x[:n]] += p
        return dict(out)

    def histogram_masses(self) -> dict[tuple[int, ...], Fraction]:
        out: dict[tuple[int, ...], Fraction] = defaultdict(Fraction)
        for x, p in self.probs.items():
            out[_counts(x, self.k)] += p
        return dict(out)


def _counts(x: Sequence[int], k: int) -> tuple[int, ...]:
    c = [0] * k
    for xi in x:
        c[xi] += 1
    return tuple(c)


def build_sequence_table(model, cap: int = DEFAULT_CAP) -> SequenceTable:
    """Spread each urn's weight evenly over the sequences with that histogram."""
    w = _weights_of(model)
    size = w.k**w.m
    if size > cap:
        raise CapExceededError(size, cap, "sequence table")
    seqs = list(itertools.product(range(w.k), repeat=w.m))
    hists = [_counts(x, w.k) for x in seqs]
    per_hist = Counter(hists)
    atoms = {tuple(u): Fraction(p) for u, p in w.atoms.items()}
    probs = {x: atoms.get(h, Fraction(0)) / per_hist[h] for x, h in zip(seqs, hists)}
    return SequenceTable(w.m, w.k, probs)


def _table_of(source) -> SequenceTable:
    return source if isinstance(source, SequenceTable) else build_sequence_table(source)


def brute_force_predictive(source, x: Sequence[int]) -> LabelDistribution:
    """``Pr(X_{n+1} = j | X_{1:n} = x)`` by summing every completion of ``x``."""
    table = _table_of(source)
    x = tuple(x)
    n = len(x)
    if n >= table.m:
        raise ValueError(f"sample of length {n} leaves nothing to predict (m={table.m})")
    joint = [Fraction(0)] * table.k
    for seq, p in table.probs.items():
        if seq[:n] == x:
            joint[seq[n]] += p
    total = sum(joint)
    if total == 0:
        raise ZeroProbabilitySampleError(_counts(x, table.k))
    return LabelDistribution(j / total for j in joint)


def verify_exchangeable(table: SequenceTable) -> Verdict:
    """Pass iff every two sequences with the same histogram are equally probable."""
    seen: dict[tuple[int, ...], tuple[tuple[int, ...], Fraction]] = {}
    for x, p in table.probs.items():
        h = _counts(x, table.k)
        if h in seen:
            y, q = seen[h]
            if p != q:
                return Verdict(False, len(table.probs), (y, x),
                               f"Pr{y} = {q} but Pr{x} = {p}")
        else:
            seen[h] = (x, p)
    return Verdict(True, len(table.probs))


def verify_frt(source, n: int, table: SequenceTable | None = None) -> Verdict:
    """Compare brute-force ``n``-prefix probabilities with the urn-mixture formula.

    ``source`` is a model (its table is built) or a :class:`SequenceTable`
    (its urn weights are read off the table's histogram masses).
    """
    if isinstance(source, SequenceTable):
        table = source
        weights = weights_from_atoms(table.m, table.k, table.histogram_masses())
    else:
        weights = _weights_of(source)
        table = table or build_sequence_table(weights)
    if not 0 <= n <= table.m:
        raise ValueError(f"need 0 <= n <= m={table.m}")
    brute = table.marginal(n)
    checked = 0
    for x in itertools.product(range(table.k), repeat=n):
        mixture = sequence_pmf(weights, x)
        checked += 1
        if brute[x] != mixture:
            return Verdict(False, checked, x, f"brute force {brute[x]} != mixture {mixture}")
    return Verdict(True, checked)


# -- bound certificates -----------------------------------------------------

def _oracle_mass(weights: SimplexWeights, g: tuple[int, ...]) -> Fraction:
    """``f_H^n(g)`` summed term by term with factorial-based binomials."""
    memo = weights._cache.setdefault("oracle", {})
    if g in memo:
        return memo[g]
    fact = math.factorial
    n, m = sum(g), weights.m
    total = Fraction(0)
    for u, w in weights.atoms.items():
        if w == 0 or any(gj > uj for gj, uj in zip(g, u)):
            continue
        ways = 1
        for gj, uj in zip(g, u):
            ways *= fact(uj) // (fact(gj) * fact(uj - gj))
        total += Fraction(w) * ways
    value = total * Fraction(fact(n) * fact(m - n), fact(m))
    memo[g] = value
    return value


def _sequence_count(h: Sequence[int]) -> int:
    out = math.factorial(sum(h))
    for c in h:
        out //= math.factorial(c)
    return out


@dataclass
class HTBoundsVerdict:
    passed: bool
    fstar: LabelDistribution
    beta: object
    gamma: object
    tv_star_tilde: Fraction
    tv_star_hatprime: Fraction
    ratios_ok: bool
    beta_bound_ok: bool
    gamma_bound_ok: bool
    gamma_crude: object = None
    gamma_crude_held: bool | None = None
    matches_production: bool = True
    notes: list[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.passed


def _excess(values: list[Fraction]):
    lo = min(values)
    return math.inf if lo == 0 else max(values) / lo - 1


def verify_ht_bounds(model, h: Sequence[int]) -> HTBoundsVerdict:
    """Recompute the exact predictive and every bound in rationals, then check them.

    The predictive comes from the quotient of sequence probabilities
    (prefix plus one label over prefix).  The crude gamma bound is
    evaluated and recorded but never asserted.
    """
    weights = _weights_of(model)
    h = tuple(Histogram(h))
    k, n = len(h), sum(h)
    if n >= weights.m:
        raise ValueError(f"sample of size {n} leaves nothing to predict (m={weights.m})")
    prefix = _oracle_mass(weights, h) / _sequence_count(h)
    if prefix == 0:
        raise ZeroProbabilitySampleError(h)
    plus = [tuple(c + (i == j) for i, c in enumerate(h)) for j in range(k)]
    adj = [_oracle_mass(weights, g) for g in plus]
    fstar = LabelDistribution(a / _sequence_count(g) / prefix for a, g in zip(adj, plus))
    ftilde = [Fraction(c + 1, n + k) for c in h]
    empty = sum(1 for c in h if c == 0)
    fprime = [Fraction(max(c, 1), n + empty) for c in h]

    b = _excess(adj)
    g = _excess([a * Fraction(c + 1, max(c, 1)) for a, c in zip(adj, h)])
    tv_t = sum(abs(a - t) for a, t in zip(fstar, ftilde)) / 2
    tv_p = sum(abs(a - t) for a, t in zip(fstar, fprime)) / 2

    if b == math.inf:
        beta_ok = ratios_ok = True
    else:
        beta_ok = tv_t <= b / 2
        ratios_ok = all(1 / (1 + b) <= fs / ft <= 1 + b for fs, ft in zip(fstar, ftilde))
    gamma_ok = True if g == math.inf else tv_p <= g / 2

    crude = crude_held = None
    if n > 0:
        lo, hi = min(h), max(h)
        factor = Fraction(lo + 1, max(lo, 1)) * Fraction(hi, hi + 1)
        crude = math.inf if b == math.inf else b * factor
        crude_held = crude == math.inf if g == math.inf else g <= crude

    report = ht_report(weights, h)
    matches = (report.fstar == fstar and report.beta == b and report.gamma == g
               and report.tv_star_tilde == tv_t and report.tv_star_hatprime == tv_p)
    notes = [] if matches else ["production report disagrees with oracle"]
    return HTBoundsVerdict(
        passed=beta_ok and ratios_ok and gamma_ok and matches,
        fstar=fstar, beta=b, gamma=g, tv_star_tilde=tv_t, tv_star_hatprime=tv_p,
        ratios_ok=ratios_ok, beta_bound_ok=beta_ok, gamma_bound_ok=gamma_ok,
        gamma_crude=crude, gamma_crude_held=crude_held, matches_production=matches, notes=notes,
    )


def verify_merge_commutes(model, merge: LabelMerge, h: Sequence[int]) -> Verdict:
    """Group-summed exact predictive versus the exact predictive of the merged model."""
    fine = predictive_exact(model, h)
    summed = merge.merge_vector(list(fine))
    merged = predictive_exact(merge_model(model, merge), merge_histogram(h, merge))
    ok = list(merged) == summed
    return Verdict(ok, 1, None if ok else tuple(h),
                   "" if ok else f"predict-then-sum {summed} != merge-then-predict {list(merged)}")


# -- extendability ----------------------------------------------------------

@dataclass
class ExtendabilityVerdict:
    feasible: bool
    witness: SimplexWeights | None = None

    def __bool__(self) -> bool:
        return self.feasible


def _phase_one(A: list[list[Fraction]], b: list[Fraction]) -> list[Fraction] | None:
    """A point ``x >= 0`` with ``A x = b`` (``b >= 0``), or None if there is none.

    Phase-one simplex on an exact rational tableau with Bland's rule.
    """
    rows, cols = len(A), len(A[0])
    width = cols + rows
    tab = [A[r] + [Fraction(int(i == r)) for i in range(rows)] + [b[r]] for r in range(rows)]
    basis = [cols + r for r in range(rows)]
    # reduced costs of the auxiliary objective (sum of artificials); last entry is -objective
    obj = [-sum(tab[r][j] for r in range(rows)) for j in range(cols)] + [Fraction(0)] * rows
    obj.append(-sum(b))
    while True:
        enter = next((j for j in range(width) if obj[j] < 0), None)
        if enter is None:
            break
        best = None
        for r in range(rows):
            a = tab[r][enter]
            if a > 0:
                key = (tab[r][-1] / a, basis[r])
                if best is None or key < best[0]:
                    best = (key, r)
        if best is None:  # cannot happen: the auxiliary problem is bounded below
            raise RuntimeError("unbounded auxiliary problem")
        r = best[1]
        piv = tab[r][enter]
        prow = [v / piv for v in tab[r]]
        tab[r] = prow
        for i in range(rows):
            f = tab[i][enter]
            if i != r and f != 0:
                row = tab[i]
                tab[i] = [v - f * pv for v, pv in zip(row, prow)]
        f = obj[enter]
        obj = [v - f * pv for v, pv in zip(obj, prow)]
        basis[r] = enter
    if obj[-1] != 0:
        return None
    x = [Fraction(0)] * cols
    for r, var in enumerate(basis):
        if var < cols:
            x[var] = tab[r][-1]
    return x


def is_extendable(target: Mapping, m: int, cap: int = EXTENDABILITY_CAP) -> ExtendabilityVerdict:
    """Decide whether an ``n``-histogram PMF is the marginal of some exchangeable ``m``-model.

    ``target`` maps ``n``-histograms to probabilities; missing histograms
    have probability zero.  A feasible answer carries witness weights.
    """
    target = {Histogram(g): Fraction(p) for g, p in target.items()}
    if not target:
        raise ValueError("empty target")
    ks = {g.k for g in target}
    ns = {g.total for g in target}
    if len(ks) != 1 or len(ns) != 1:
        raise ValueError("target histograms must share k and total n")
    k, n = ks.pop(), ns.pop()
    if n > m:
        raise ValueError(f"target sample size {n} exceeds m={m}")
    c = histogram_space_size(m, k)
    if c > cap:
        raise CapExceededError(c, cap, "urn space for the feasibility check")
    if any(p < 0 for p in target.values()) or sum(target.values()) != 1:
        return ExtendabilityVerdict(False)
    urns = list(iter_histograms(m, k))
    samples = list(iter_histograms(n, k))
    denom = math.comb(m, n)
    A = []
    for g in samples:
        row = []
        for u in urns:
            ways = 1
            for gj, uj in zip(g, u):
                ways *= math.comb(uj, gj)
            row.append(Fraction(ways, denom))
        A.append(row)
    A.append([Fraction(1)] * len(urns))
    b = [target.get(g, Fraction(0)) for g in samples] + [Fraction(1)]
    x = _phase_one(A, b)
    if x is None:
        return ExtendabilityVerdict(False)
    witness = weights_from_atoms(m, k, [(u, w) for u, w in zip(urns, x) if w != 0])
    return ExtendabilityVerdict(True, witness)


# -- seeded random cases ----------------------------------------------------

def random_model(seed: int, m: int, k: int, kind: str | None = None) -> SimplexWeights:
    """Random exact weights: dense (every urn) or sparse (a few urns).

    Weights are uniform integers, identically distributed across urns,
    normalized to exact fractions.
    """
    rng = random.Random(seed)
    kind = kind or rng.choice(("dense", "sparse"))
    urns = list(iter_histograms(m, k))
    if kind == "dense":
        raw = [rng.randint(0, 20) for _ in urns]
        if not any(raw):
            raw[rng.randrange(len(raw))] = 1
        pairs = list(zip(urns, raw))
    elif kind == "sparse":
        chosen = rng.sample(urns, rng.randint(1, min(len(urns), 5)))
        pairs = [(u, rng.randint(1, 20)) for u in chosen]
    else:
        raise ValueError(f"unknown model kind {kind!r}")
    return weights_from_atoms(m, k, [(u, w) for u, w in pairs if w], renormalize=True)


def random_iid_p(seed: int, k: int) -> list[Fraction]:
    rng = random.Random(seed)
    raw = [rng.randint(0, 10) for _ in range(k)]
    if not any(raw):
        raw[rng.randrange(k)] = 1
    total = sum(raw)
    return [Fraction(r, total) for r in raw]


def random_merge(seed: int, k: int) -> LabelMerge:
    rng = random.Random(seed)
    k_merged = rng.randint(1, k)
    order = list(range(k))
    rng.shuffle(order)
    mapping = [0] * k
    for pos, j in enumerate(order):
        mapping[j] = pos if pos < k_merged else rng.randrange(k_merged)
    return LabelMerge(tuple(mapping), k_merged)


SUITE_LIMITS = {
    # suite: (m_min, m_max, k_min, k_max)
    "ht": (1, 8, 1, 4),
    "frt": (2, 5, 2, 3),
    "iid": (1, 8, 1, 4),
    "uniform": (1, 8, 1, 4),
    "merge": (1, 6, 1, 4),
    "agreement": (1, 6, 1, 3),
    "extend": (1, 5, 1, 3),
    "shrinkage": (0, 50, 1, 10),
}


def make_manifest(suite: str, seed: int, cases: int) -> list[dict]:
    """Deterministic list of ``{seed, m, k, suite}`` cases for ``suite``."""
    if suite not in SUITE_LIMITS:
        raise ValueError(f"unknown suite {suite!r}; choose from {sorted(SUITE_LIMITS)}")
    m_lo, m_hi, k_lo, k_hi = SUITE_LIMITS[suite]
    rng = random.Random(f"{suite}:{seed}")
    return [{"seed": rng.randrange(2**31), "m": rng.randint(m_lo, m_hi),
             "k": rng.randint(k_lo, k_hi), "suite": suite} for _ in range(cases)]


@dataclass
class SuiteResult:
    suite: str
    cases: int = 0
    checks: int = 0
    failures: list[str] = field(default_factory=list)
    notes: Counter = field(default_factory=Counter)

    @property
    def passed(self) -> bool:
        return not self.failures

    def merge(self, other: SuiteResult) -> None:
        self.cases += other.cases
        self.checks += other.checks
        self.failures.extend(other.failures)
        self.notes.update(other.notes)


def _sample_histograms(weights, below: int | None = None):
    """Every positive-probability sample histogram with ``n < m``."""
    top = weights.m if below is None else below
    for n in range(top):
        for h in iter_histograms(n, weights.k):
            if histogram_pmf(weights, h) > 0:
                yield h


def _case_ht(entry, res: SuiteResult) -> None:
    w = random_model(entry["seed"], entry["m"], entry["k"])
    for h in _sample_histograms(w):
        v = verify_ht_bounds(w, h)
        res.checks += 1
        if not v.passed:
            res.failures.append(f"{entry}: h={tuple(h)} beta={v.beta} tv={v.tv_star_tilde} {v.notes}")
        if v.gamma_crude_held is False:
            res.notes["gamma_crude_violated"] += 1


def _case_frt(entry, res: SuiteResult) -> None:
    w = random_model(entry["seed"], entry["m"], entry["k"], "dense")
    table = build_sequence_table(w)
    ex = verify_exchangeable(table)
    res.checks += 1
    if not ex:
        res.failures.append(f"{entry}: table not exchangeable: {ex.detail}")
    for n in range(w.m + 1):
        v = verify_frt(w, n, table)
        res.checks += v.checked
        if not v:
            res.failures.append(f"{entry}: n={n}: {v.detail}")


def _case_iid(entry, res: SuiteResult) -> None:
    p = random_iid_p(entry["seed"], entry["k"])
    w = iid_weights(entry["m"], p).densify()
    for h in _sample_histograms(w):
        res.checks += 1
        got = predictive_exact(w, h)
        if list(got) != p:
            res.failures.append(f"{entry}: h={tuple(h)} predictive {list(got)} != p {p}")


def _case_uniform(entry, res: SuiteResult) -> None:
    w = uniform_weights(entry["m"], entry["k"]).densify()
    for h in _sample_histograms(w):
        res.checks += 1
        report = ht_report(w, h)
        if report.fstar != ht_approx(h) or report.beta != 0:
            res.failures.append(f"{entry}: h={tuple(h)} fstar={report.fstar} beta={report.beta}")


def _case_merge(entry, res: SuiteResult) -> None:
    from .population import route_comparison

    w = random_model(entry["seed"], entry["m"], entry["k"])
    merge = random_merge(entry["seed"] + 1, entry["k"])
    for h in _sample_histograms(w):
        res.checks += 1
        if not verify_merge_commutes(w, merge, h):
            res.failures.append(f"{entry}: h={tuple(h)} merge={merge.mapping} exact routes differ")
        cmp = route_comparison(h, merge)
        if cmp.tv != tv_distance(cmp.predict_then_sum, cmp.merge_then_predict):
            res.failures.append(f"{entry}: h={tuple(h)} reported TV inconsistent")
        if cmp.tv > 0:
            res.notes["ht_routes_differ"] += 1


def _case_agreement(entry, res: SuiteResult) -> None:
    w = random_model(entry["seed"], entry["m"], entry["k"])
    table = build_sequence_table(w)
    rng = random.Random(entry["seed"])
    for h in _sample_histograms(w):
        x = [j for j, c in enumerate(h) for _ in range(c)]
        rng.shuffle(x)
        res.checks += 1
        if brute_force_predictive(table, x) != predictive_exact(w, h):
            res.failures.append(f"{entry}: x={x} oracle and production predictive differ")


def _case_extend(entry, res: SuiteResult) -> None:
    w = random_model(entry["seed"], entry["m"], entry["k"])
    for n in range(w.m + 1):
        target = marginal_histogram_pmf(w, n)
        verdict = is_extendable(target, w.m)
        res.checks += 1
        if not verdict.feasible:
            res.failures.append(f"{entry}: n={n} model marginal reported infeasible")
        elif marginal_histogram_pmf(verdict.witness, n) != target:
            res.failures.append(f"{entry}: n={n} witness does not reproduce the target")


def _case_shrinkage(entry, res: SuiteResult) -> None:
    from .approx import ml_approx

    rng = random.Random(entry["seed"])
    n, k = entry["m"], entry["k"]
    counts = [0] * k
    for _ in range(n):
        counts[rng.randrange(k)] += 1
    if n == 0:
        counts[0] = 1
        n = 1
    fhat = ml_approx(counts)
    lhs = tv_distance(ht_approx(counts), fhat)
    rhs = Fraction(k, n + k) * tv_distance(fhat, [Fraction(1, k)] * k)
    res.checks += 1
    if lhs != rhs:
        res.failures.append(f"{entry}: h={counts} {lhs} != {rhs}")


_CASES = {
    "ht": _case_ht,
    "frt": _case_frt,
    "iid": _case_iid,
    "uniform": _case_uniform,
    "merge": _case_merge,
    "agreement": _case_agreement,
    "extend": _case_extend,
    "shrinkage": _case_shrinkage,
}


def run_case(entry: Mapping) -> SuiteResult:
    res = SuiteResult(entry["suite"], cases=1)
    _CASES[entry["suite"]](entry, res)
    return res


def run_suite(suite: str, entries: Sequence[Mapping]) -> SuiteResult:
    """Run every manifest entry belonging to ``suite``."""
    if suite not in _CASES:
        raise ValueError(f"unknown suite {suite!r}; choose from {sorted(_CASES)}")
    total = SuiteResult(suite)
    for entry in entries:
        if entry["suite"] == suite:
            total.merge(run_case(entry))
    return total
