"""Command-line interface.

Exit codes: 0 success, 1 a verification suite reported failures,
2 invalid input, 3 the sample has zero probability under the prior.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from collections.abc import Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from . import __version__
from .approx import ht_report
from .combinat import CapExceededError, Histogram, LabelMerge, LabelSet, histogram_of
from .model import (
    ExchangeableModel,
    ZeroProbabilitySampleError,
    iid_weights,
    load_prior,
    sample_sequence,
    uniform_weights,
)
from .oracle import SUITE_LIMITS, make_manifest, run_suite
from .population import (
    EXACT,
    HT,
    GroupSample,
    grouped_prediction,
    population_prediction,
    resolution_advice,
    route_comparison,
)

COMMANDS = ("predict", "population", "groups", "merge-demo", "beta", "verify", "simulate")

POPULATION_TITLE = "Prediction based on a survey of size {n}"
POPULATION_AXIS = "Proportion of the electorate"
SAMPLE_TITLE = "Survey of size {n}"
SAMPLE_AXIS = "Number"

_NULLABLE_INT = {"type": ["integer", "null"]}
_VALUE = {"type": ["string", "number"]}

OUTPUT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["command", "n", "m", "k", "labels", "histogram", "mode", "numeric",
                 "prediction", "bounds", "warnings"],
    "properties": {
        "command": {"enum": list(COMMANDS)},
        "n": _NULLABLE_INT,
        "m": _NULLABLE_INT,
        "k": _NULLABLE_INT,
        "labels": {"type": ["array", "null"], "items": {"type": "string"}},
        "histogram": {"type": ["array", "null"], "items": {"type": "integer", "minimum": 0}},
        "mode": {"enum": [EXACT, HT, None]},
        "numeric": {"enum": ["rational", "float"]},
        "prediction": {"type": ["object", "null"]},
        "bounds": {
            "type": ["object", "null"],
            "required": ["beta", "gamma", "tv_star_tilde", "certificates"],
            "properties": {
                "beta": _VALUE,
                "gamma": _VALUE,
                "tv_star_tilde": _VALUE,
                "certificates": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["name", "holds", "trivial"],
                        "properties": {"name": {"type": "string"}, "holds": {"type": "boolean"},
                                       "trivial": {"type": "boolean"}},
                    },
                },
            },
        },
        "warnings": {"type": "array", "items": {"type": "string"}},
        "details": {"type": "object"},
    },
}


class CliError(Exception):
    def __init__(self, message: str, code: int = 2):
        super().__init__(message)
        self.code = code


# -- survey input -----------------------------------------------------------

@dataclass
class SurveyDataset:
    labels: LabelSet
    rows: list[tuple[int, str | None]]

    @property
    def n(self) -> int:
        return len(self.rows)

    @property
    def histogram(self) -> Histogram:
        return histogram_of([r[0] for r in self.rows], self.labels.k)

    @property
    def grouped(self) -> bool:
        return bool(self.rows) and self.rows[0][1] is not None

    def group_histograms(self) -> dict[str, Histogram]:
        by_group: dict[str, list[int]] = {}
        for label, group in self.rows:
            by_group.setdefault(group, []).append(label)
        return {g: histogram_of(by_group[g], self.labels.k) for g in sorted(by_group)}


def parse_survey(text: str, labels: Sequence[str] | None = None) -> SurveyDataset:
    """Read a ``label[,group]`` CSV with one respondent per row.

    Without an explicit label list the label set is the sorted set of
    observed labels.
    """
    reader = csv.reader(io.StringIO(text))
    header = None
    for header in reader:
        if any(cell.strip() for cell in header):
            break
    else:
        raise CliError("empty survey")
    header = [h.strip() for h in header]
    if len(set(header)) != len(header):
        raise CliError(f"duplicate header column in {header}")
    if "label" not in header:
        raise CliError(f"survey header must contain 'label', got {header}")
    li = header.index("label")
    gi = header.index("group") if "group" in header else None
    raw: list[tuple[int, str, str | None]] = []
    for row in reader:
        line = reader.line_num
        if not any(cell.strip() for cell in row):
            continue
        if len(row) != len(header):
            raise CliError(f"line {line}: expected {len(header)} fields, got {len(row)}")
        label = row[li].strip()
        if not label:
            raise CliError(f"line {line}: empty label")
        group = None
        if gi is not None:
            group = row[gi].strip()
            if not group:
                raise CliError(f"line {line}: empty group")
        raw.append((line, label, group))
    if not raw:
        raise CliError("empty survey")
    if labels is None:
        label_set = LabelSet(tuple(sorted({r[1] for r in raw})))
    else:
        label_set = LabelSet(tuple(labels))
    index = {name: j for j, name in enumerate(label_set.names)}
    rows = []
    for line, label, group in raw:
        if label not in index:
            raise CliError(f"line {line}: unknown label {label!r}; expected one of {list(label_set)}")
        rows.append((index[label], group))
    return SurveyDataset(label_set, rows)


def read_labels(path: str) -> list[str]:
    names = [line.strip() for line in Path(path).read_text(encoding="utf-8").splitlines()]
    names = [x for x in names if x]
    if not names:
        raise CliError(f"label file {path} is empty")
    return names


# -- configuration ----------------------------------------------------------

@dataclass
class RunConfig:
    m: int | None = None
    group_sizes: dict[str, int] = field(default_factory=dict)
    prior: str = "uniform"
    mode: str = "rational"
    output: str = "json"
    seed: int = 0
    method: str = "ht"
    merge: str | None = None
    suite: str = "all"
    cases: int = 20
    n: int | None = None
    k: int | None = None
    labels: list[str] | None = None
    plot_data: str | None = None


def parse_group_sizes(spec: str) -> dict[str, int]:
    out = {}
    for part in spec.split(","):
        if not part.strip():
            continue
        name, sep, size = part.partition("=")
        if not sep:
            raise CliError(f"group size {part!r} must look like group=size")
        try:
            out[name.strip()] = int(size)
        except ValueError:
            raise CliError(f"group size for {name!r} is not an integer: {size!r}") from None
    return out


def parse_merge(spec: str, labels: LabelSet) -> tuple[LabelMerge, list[str]]:
    """``a=x,b=x,c=y``: map each original label to a merged label name.

    Merged labels are numbered in order of first appearance; the arrows
    ``->`` and ``→`` are accepted in place of ``=``.
    """
    targets: dict[str, str] = {}
    for part in spec.split(","):
        if not part.strip():
            continue
        for arrow in ("->", "→", "=", ":"):
            if arrow in part:
                src, dst = (s.strip() for s in part.split(arrow, 1))
                break
        else:
            raise CliError(f"merge entry {part!r} must look like label=merged")
        if src not in labels.names:
            raise CliError(f"merge refers to unknown label {src!r}")
        targets[src] = dst
    missing = [x for x in labels.names if x not in targets]
    if missing:
        raise CliError(f"merge does not assign labels {missing}")
    merged: list[str] = []
    for name in labels.names:
        if targets[name] not in merged:
            merged.append(targets[name])
    mapping = tuple(merged.index(targets[name]) for name in labels.names)
    return LabelMerge(mapping, len(merged)), merged


def _parse_probs(text: str) -> list[Fraction]:
    try:
        return [Fraction(p.strip()) for p in text.split(",")]
    except (ValueError, ZeroDivisionError):
        raise CliError(f"cannot parse probabilities {text!r}") from None


def build_model(prior: str, m: int, labels: LabelSet) -> ExchangeableModel:
    kind, _, arg = prior.partition(":")
    if kind == "uniform":
        weights = uniform_weights(m, labels.k)
    elif kind == "iid":
        p = _parse_probs(arg)
        if len(p) != labels.k:
            raise CliError(f"iid prior has {len(p)} probabilities for {labels.k} labels")
        weights = iid_weights(m, p)
    elif kind == "atoms":
        model = load_prior(arg)
        if model.m != m:
            raise CliError(f"atoms prior is for m={model.m}, but m={m}")
        if model.k != labels.k:
            raise CliError(f"atoms prior has k={model.k}, but the survey has {labels.k} labels")
        return ExchangeableModel(model.weights, labels)
    else:
        raise CliError(f"unknown prior {prior!r}; use uniform, iid:p1,..,pk or atoms:PATH")
    return ExchangeableModel(weights, labels)


# -- serialization ----------------------------------------------------------

def _num(x, mode: str):
    if x is None:
        return None
    if x == math.inf:
        return "inf"
    if mode == "rational" and isinstance(x, (Fraction, int)):
        x = Fraction(x)
        return f"{x.numerator}/{x.denominator}"
    return float(x)


def _vec(xs, mode: str):
    return None if xs is None else [_num(x, mode) for x in xs]


def _certs(report, mode: str) -> list[dict]:
    out = []
    for c in report.certificates:
        d = c.to_dict()
        d["lhs"], d["rhs"] = _num(d["lhs"], mode), _num(d["rhs"], mode)
        out.append(d)
    return out


def _bounds(report, mode: str) -> dict:
    return {
        "beta": _num(report.beta, mode),
        "gamma": _num(report.gamma, mode),
        "tv_star_tilde": _num(report.tv_star_tilde, mode),
        "tv_star_hatprime": _num(report.tv_star_hatprime, mode),
        "tv_tilde_hat": _num(report.tv_tilde_hat, mode),
        "gamma_crude": _num(report.gamma_crude, mode),
        "certificates": _certs(report, mode),
    }


def _base(command: str, cfg: RunConfig, data: SurveyDataset | None) -> dict:
    return {
        "command": command,
        "n": data.n if data else None,
        "m": cfg.m,
        "k": data.labels.k if data else None,
        "labels": list(data.labels.names) if data else None,
        "histogram": list(data.histogram) if data else None,
        "mode": None,
        "numeric": cfg.mode,
        "prediction": None,
        "bounds": None,
        "warnings": [],
    }


# -- commands ---------------------------------------------------------------

def _need_data(data, command):
    if data is None:
        raise CliError(f"{command} needs --input")
    return data


def _need_m(cfg: RunConfig, data: SurveyDataset) -> int:
    m = cfg.m
    if m is None and cfg.prior.startswith("atoms:"):
        m = load_prior(cfg.prior[6:]).m
    if m is None:
        raise CliError("population size --m is required")
    if m < data.n:
        raise CliError(f"population size m={m} is smaller than the survey size n={data.n}")
    cfg.m = m
    return m


def _advice_warning(n: int, k: int, out: dict) -> None:
    advice = resolution_advice(n, k)
    out.setdefault("details", {})["resolution"] = {
        "under_powered": advice.under_powered, "recommended_k": advice.recommended_k,
    }
    if advice.under_powered:
        r = advice.recommended_k
        out["warnings"].append(
            f"under-powered: n={n} is less than 9k={9 * k}; "
            f"at most {r} label{'' if r == 1 else 's'} would suit this sample"
        )


def _try_report(model, h, cfg, out, what="bounds"):
    """An approximation report, or None with a warning if the prior is too large."""
    try:
        return ht_report(model, h, cfg.mode)
    except CapExceededError as exc:
        out["warnings"].append(f"{what} skipped: {exc}")
        return None


def _cmd_predict(cfg, data, out):
    data = _need_data(data, "predict")
    m = _need_m(cfg, data)
    if data.n >= m:
        raise CliError("nothing to predict: the survey covers the whole population")
    model = build_model(cfg.prior, m, data.labels)
    report = ht_report(model, data.histogram, cfg.mode)
    out["mode"] = EXACT
    out["prediction"] = {
        "fstar": _vec(report.fstar, cfg.mode),
        "ftilde": _vec(report.ftilde, cfg.mode),
        "fhat": _vec(report.fhat, cfg.mode),
        "fhatprime": _vec(report.fhatprime, cfg.mode),
    }
    out["bounds"] = _bounds(report, cfg.mode)
    _advice_warning(data.n, data.labels.k, out)
    return report


def _cmd_beta(cfg, data, out):
    report = _cmd_predict(cfg, data, out)
    out["prediction"] = None
    out["details"]["diagnostics"] = {
        "adjacent": _vec(report.adjacent, cfg.mode),
        "u": _vec(report.u, cfg.mode),
        "v": _vec(report.v, cfg.mode),
        "reference_label": data.labels.names[report.reference_label],
        "ratios": _vec(report.ratios, cfg.mode),
    }


def _cmd_population(cfg, data, out):
    data = _need_data(data, "population")
    m = _need_m(cfg, data)
    h = data.histogram
    model = None
    if data.n < m:
        try:
            model = build_model(cfg.prior, m, data.labels)
        except CapExceededError as exc:
            if cfg.method == "exact":
                raise
            out["warnings"].append(f"bounds skipped: {exc}")
    pred = population_prediction(h, m, cfg.method, model, cfg.mode)
    out["mode"] = pred.method
    out["prediction"] = {"values": _vec(pred.values, cfg.mode),
                         "sample_fraction": _num(pred.sample_fraction, cfg.mode)}
    if model is not None:
        report = _try_report(model, h, cfg, out)
        if report is not None:
            out["bounds"] = _bounds(report, cfg.mode)
    _advice_warning(data.n, data.labels.k, out)
    return pred


def _cmd_groups(cfg, data, out):
    data = _need_data(data, "groups")
    if not data.grouped:
        raise CliError("groups needs a survey with a 'group' column")
    hists = data.group_histograms()
    sizes = cfg.group_sizes
    missing = [g for g in hists if g not in sizes]
    if missing:
        raise CliError(f"--group-sizes does not give sizes for groups {missing}")
    extra = [g for g in sizes if g not in hists]
    if extra:
        raise CliError(f"--group-sizes names groups absent from the survey: {extra}")
    total = sum(sizes.values())
    if cfg.m is not None and cfg.m != total:
        raise CliError(f"group sizes sum to {total}, but --m is {cfg.m}")
    cfg.m = total
    samples = []
    for g, h in hists.items():
        model = None
        if cfg.method == "exact" and h.total < sizes[g]:
            model = build_model(cfg.prior, sizes[g], data.labels)
        samples.append(GroupSample(g, sizes[g], h, model))
    pred = grouped_prediction(samples, cfg.method, total, cfg.mode)
    out["mode"] = pred.method
    out["prediction"] = {
        "values": _vec(pred.values, cfg.mode),
        "sample_fraction": _num(pred.sample_fraction, cfg.mode),
        "groups": {
            g: {"n": p.n, "m": p.m, "histogram": list(hists[g]), "values": _vec(p.values, cfg.mode)}
            for g, p in pred.groups.items()
        },
    }
    for g, h in hists.items():
        advice = resolution_advice(h.total, data.labels.k)
        if advice.under_powered:
            out["warnings"].append(f"group {g}: n_g={h.total} is less than 9k={9 * data.labels.k}")
    return pred


def _cmd_merge(cfg, data, out):
    data = _need_data(data, "merge-demo")
    if not cfg.merge:
        raise CliError("merge-demo needs --merge")
    merge, merged_names = parse_merge(cfg.merge, data.labels)
    model = None
    if cfg.m is not None:
        m = _need_m(cfg, data)
        if data.n < m:
            model = build_model(cfg.prior, m, data.labels)
    try:
        cmp = route_comparison(data.histogram, merge, model, cfg.mode)
    except CapExceededError as exc:
        out["warnings"].append(f"exact routes skipped: {exc}")
        cmp = route_comparison(data.histogram, merge, None, cfg.mode)
    out["mode"] = HT
    out["prediction"] = {
        "merged_labels": merged_names,
        "predict_then_sum": _vec(cmp.predict_then_sum, cfg.mode),
        "merge_then_predict": _vec(cmp.merge_then_predict, cfg.mode),
        "tv": _num(cmp.tv, cfg.mode),
        "exact_predict_then_sum": _vec(cmp.exact_predict_then_sum, cfg.mode),
        "exact_merge_then_predict": _vec(cmp.exact_merge_then_predict, cfg.mode),
        "exact_routes_agree": cmp.exact_routes_agree,
    }
    if cmp.exact_routes_agree is False:
        out["warnings"].append(
            "exact routes differ: the fine-grained sample carries information the merged counts lose"
        )


def _cmd_verify(cfg, data, out):
    suites = sorted(SUITE_LIMITS) if cfg.suite == "all" else [cfg.suite]
    results = {}
    failed = False
    for suite in suites:
        res = run_suite(suite, make_manifest(suite, cfg.seed, cfg.cases))
        results[suite] = {
            "passed": res.passed, "cases": res.cases, "checks": res.checks,
            "failures": res.failures[:10], "failure_count": len(res.failures),
            "notes": dict(sorted(res.notes.items())),
        }
        failed |= not res.passed
    out["details"] = {"seed": cfg.seed, "suites": results}
    return 1 if failed else 0


def _cmd_simulate(cfg, data, out):
    if data is not None:
        labels = data.labels
    elif cfg.labels:
        labels = LabelSet(tuple(cfg.labels))
    elif cfg.k is not None:
        labels = LabelSet.default(cfg.k)
    else:
        raise CliError("simulate needs --input, --labels or --k to fix the label set")
    if cfg.m is None:
        raise CliError("population size --m is required")
    n = cfg.n if cfg.n is not None else cfg.m
    if not 0 <= n <= cfg.m:
        raise CliError(f"--n must lie in 0..{cfg.m}")
    model = build_model(cfg.prior, cfg.m, labels)
    seq = sample_sequence(model, n, cfg.seed)
    h = histogram_of(seq, labels.k)
    out.update(n=n, k=labels.k, labels=list(labels.names), histogram=list(h))
    out["details"] = {"seed": cfg.seed, "sequence": [labels.names[j] for j in seq]}


_HANDLERS = {
    "predict": _cmd_predict,
    "population": _cmd_population,
    "groups": _cmd_groups,
    "merge-demo": _cmd_merge,
    "beta": _cmd_beta,
    "verify": _cmd_verify,
    "simulate": _cmd_simulate,
}


def run_command(command: str, cfg: RunConfig, data: SurveyDataset | None) -> tuple[dict, int]:
    """Run one command; returns the JSON-ready report and the exit code."""
    if command not in _HANDLERS:
        raise CliError(f"unknown command {command!r}")
    if cfg.mode not in ("rational", "float"):
        raise CliError(f"unknown --mode {cfg.mode!r}")
    if cfg.method not in ("ht", "exact"):
        raise CliError(f"unknown --method {cfg.method!r}")
    out = _base(command, cfg, data)
    result = _HANDLERS[command](cfg, data, out)
    if out["m"] is None:
        out["m"] = cfg.m
    code = result if command == "verify" else 0
    return out, code


# -- text rendering ---------------------------------------------------------

BAR_WIDTH = 40


def barchart(title: str, axis: str, names: Sequence[str], values: Sequence[float],
             fmt: str = "{:g}", scale: float | None = None) -> str:
    """Fixed-width horizontal bar chart; ``axis`` labels the value axis."""
    scale = scale or max(max(values), 1e-300)
    width = max(len(x) for x in names)
    lines = [title, f"{'':>{width}}   {axis}"]
    for name, v in zip(names, values):
        bar = "#" * round(BAR_WIDTH * v / scale)
        lines.append(f"{name:>{width}} | {bar} {fmt.format(v)}")
    return "\n".join(lines)


def _f(x) -> float:
    if isinstance(x, str):
        return math.inf if x == "inf" else float(Fraction(x))
    return float(x)


def _cert_status(cert: dict) -> str:
    if cert["name"].startswith("info:"):
        return "holds" if cert["holds"] else "does not hold"
    return "ok" if cert["holds"] else "FAIL"


def render_text(out: dict) -> str:
    parts = []
    names, n = out["labels"], out["n"]
    if out["histogram"] is not None and out["command"] != "verify":
        parts.append(barchart(SAMPLE_TITLE.format(n=n), SAMPLE_AXIS, names, out["histogram"], "{:d}"))
    pred = out["prediction"] or {}
    if out["command"] in ("population", "groups"):
        vals = [_f(v) for v in pred["values"]]
        parts.append(barchart(POPULATION_TITLE.format(n=n), POPULATION_AXIS, names, vals, "{:.4f}", 1.0))
        for g, gp in pred.get("groups", {}).items():
            gv = [_f(v) for v in gp["values"]]
            title = f"{POPULATION_TITLE.format(n=gp['n'])} (group {g})"
            parts.append(barchart(title, POPULATION_AXIS, names, gv, "{:.4f}", 1.0))
    elif out["command"] == "predict":
        for key in ("fstar", "ftilde", "fhat"):
            if pred.get(key) is not None:
                vals = [_f(v) for v in pred[key]]
                parts.append(barchart(f"Next-respondent prediction ({key})", "Probability",
                                      names, vals, "{:.4f}", 1.0))
    elif out["command"] == "merge-demo":
        merged = pred["merged_labels"]
        for key in ("predict_then_sum", "merge_then_predict"):
            vals = [_f(v) for v in pred[key]]
            parts.append(barchart(key.replace("_", "-"), "Probability", merged, vals, "{:.4f}", 1.0))
        parts.append(f"TV between routes: {_f(pred['tv']):.6f}")
    bounds = out.get("bounds")
    if bounds:
        parts.append("\n".join([
            f"beta = {bounds['beta']}   gamma = {bounds['gamma']}",
            f"TV(f*, f~) = {bounds['tv_star_tilde']}",
            *[f"  [{_cert_status(c)}{', trivial' if c['trivial'] else ''}] {c['name']}"
              for c in bounds["certificates"]],
        ]))
    details = out.get("details", {})
    if "suites" in details:
        for name, s in details["suites"].items():
            parts.append(f"{name}: {'pass' if s['passed'] else 'FAIL'} "
                         f"({s['cases']} cases, {s['checks']} checks, {s['failure_count']} failures)")
    if "sequence" in details:
        parts.append("Sequence: " + " ".join(details["sequence"]))
    for w in out["warnings"]:
        parts.append(f"warning: {w}")
    return "\n\n".join(parts) + "\n"


def plot_rows(out: dict) -> list[dict]:
    """Flat rows (chart, label, value) for external plotting tools."""
    rows = []
    n = out["n"]
    if out["histogram"] is not None:
        title = SAMPLE_TITLE.format(n=n)
        rows += [{"chart": title, "axis": SAMPLE_AXIS, "label": x, "value": c}
                 for x, c in zip(out["labels"], out["histogram"])]
    pred = out["prediction"] or {}
    if out["command"] in ("population", "groups"):
        title = POPULATION_TITLE.format(n=n)
        rows += [{"chart": title, "axis": POPULATION_AXIS, "label": x, "value": _f(v)}
                 for x, v in zip(out["labels"], pred["values"])]
    return rows


# -- entry point ------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="finexch",
        description="Exact and add-one predictions for finite exchangeable survey populations.",
    )
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--input", help="survey CSV with header label[,group]")
    p.add_argument("--labels", help="file listing the labels in order, one per line")
    p.add_argument("--m", type=int, help="population size")
    p.add_argument("--group-sizes", default="", help="group=size,... for the groups command")
    p.add_argument("--prior", default="uniform", help="uniform | iid:p1,...,pk | atoms:PATH")
    p.add_argument("--mode", default="rational", choices=("rational", "float"))
    p.add_argument("--method", default="ht", choices=("ht", "exact"),
                   help="population predictions from the add-one approximation or the exact predictive")
    p.add_argument("--output", default="json", choices=("json", "text"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--merge", help="label=merged,... (also accepts -> as the arrow)")
    p.add_argument("--suite", default="all", choices=("all", *sorted(SUITE_LIMITS)))
    p.add_argument("--cases", type=int, default=20, help="cases per verification suite")
    p.add_argument("--n", type=int, help="sequence length for simulate (default m)")
    p.add_argument("--k", type=int, help="label count for simulate without a survey")
    p.add_argument("--plot-data", help="also write chart data as CSV to this path")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    cfg = RunConfig(
        m=args.m, prior=args.prior, mode=args.mode, output=args.output, seed=args.seed,
        method=args.method, merge=args.merge, suite=args.suite, cases=args.cases,
        n=args.n, k=args.k, plot_data=args.plot_data,
    )
    try:
        cfg.group_sizes = parse_group_sizes(args.group_sizes)
        labels = read_labels(args.labels) if args.labels else None
        data = None
        if args.input:
            data = parse_survey(Path(args.input).read_text(encoding="utf-8"), labels)
        else:
            cfg.labels = labels
        out, code = run_command(args.command, cfg, data)
    except ZeroProbabilitySampleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (ValueError, KeyError, IndexError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if cfg.output == "json":
        sys.stdout.write(json.dumps(out, indent=2, ensure_ascii=False) + "\n")
    else:
        sys.stdout.write(render_text(out))
    if cfg.plot_data:
        rows = plot_rows(out)
        with open(cfg.plot_data, "w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(fh, fieldnames=["chart", "axis", "label", "value"])
            writer.writeheader()
            writer.writerows(rows)
    return code


if __name__ == "__main__":
    sys.exit(main())
