import csv
import json
from fractions import Fraction

import jsonschema
import pytest

from finexch.cli import OUTPUT_SCHEMA, CliError, main, parse_group_sizes, parse_merge, parse_survey
from finexch.combinat import LabelSet

from conftest import DATA

SURVEY = str(DATA / "fig1_likert.csv")
LABELS = str(DATA / "likert_labels.txt")


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    doc = json.loads(out)
    jsonschema.validate(doc, OUTPUT_SCHEMA)
    return doc


def test_parse_survey():
    data = parse_survey("label\n1\n4\n\n4\n", ["1", "2", "3", "4", "5"])
    assert data.n == 3
    assert data.histogram == (1, 0, 0, 2, 0)
    inferred = parse_survey("label,group\nno,a\nyes,b\nyes,a\n")
    assert inferred.labels.names == ("no", "yes")
    assert inferred.group_histograms() == {"a": (1, 1), "b": (0, 1)}


@pytest.mark.parametrize("text, message", [
    ("", "empty survey"),
    ("label\n", "empty survey"),
    ("answer\n1\n", "must contain 'label'"),
    ("label\n1\n7\n", "line 3: unknown label"),
    ("label,group\n1,a\n2\n", "line 3: expected 2 fields"),
    ("label,group\n1,\n", "line 2: empty group"),
])
def test_parse_survey_errors(text, message):
    with pytest.raises(CliError, match=message):
        parse_survey(text, ["1", "2"])


def test_parse_merge():
    merge, names = parse_merge("a=x, b->y, c→x", LabelSet(("a", "b", "c")))
    assert merge.mapping == (0, 1, 0)
    assert names == ["x", "y"]
    with pytest.raises(CliError):
        parse_merge("a=x", LabelSet(("a", "b")))
    with pytest.raises(CliError):
        parse_merge("a=x,b=x,z=y", LabelSet(("a", "b")))


def test_parse_group_sizes():
    assert parse_group_sizes("north=60, south=40") == {"north": 60, "south": 40}
    assert parse_group_sizes("") == {}
    with pytest.raises(CliError):
        parse_group_sizes("north:60")
    with pytest.raises(CliError):
        parse_group_sizes("north=many")


def test_population_json(capsys):
    doc = run_json(capsys, "population", "--input", SURVEY, "--labels", LABELS, "--m", "100")
    assert doc["prediction"]["values"] == ["27/100", "1/5", "3/50", "41/100", "3/50"]
    assert doc["mode"] == "HT-approx"
    assert doc["histogram"] == [3, 2, 0, 5, 0]
    assert doc["bounds"]["beta"] == "0/1"
    assert any("under-powered" in w for w in doc["warnings"])


def test_population_float(capsys):
    doc = run_json(capsys, "population", "--input", SURVEY, "--labels", LABELS, "--m", "100", "--mode", "float")
    values = doc["prediction"]["values"]
    assert abs(sum(values) - 1) <= 1e-9
    assert values == pytest.approx([0.27, 0.2, 0.06, 0.41, 0.06], rel=1e-10)


def test_population_exact_method(capsys):
    doc = run_json(capsys, "population", "--input", SURVEY, "--labels", LABELS, "--m", "100",
                   "--method", "exact", "--prior", "iid:1/5,1/5,1/5,1/5,1/5")
    assert doc["mode"] == "exact"
    # sampled 10 contribute counts; the other 90 follow p exactly
    expected = [Fraction(c, 100) + Fraction(90, 100) * Fraction(1, 5) for c in (3, 2, 0, 5, 0)]
    assert [Fraction(v) for v in doc["prediction"]["values"]] == expected


def test_predict_and_beta(capsys):
    doc = run_json(capsys, "predict", "--input", SURVEY, "--labels", LABELS, "--m", "11")
    assert doc["prediction"]["fstar"] == ["4/15", "1/5", "1/15", "2/5", "1/15"]
    assert doc["bounds"]["gamma"] == "1/2"
    doc = run_json(capsys, "beta", "--input", SURVEY, "--labels", LABELS, "--m", "11")
    assert doc["prediction"] is None
    assert doc["details"]["diagnostics"]["reference_label"] == "1"


def test_output_is_deterministic(capsys):
    argv = ("predict", "--input", SURVEY, "--labels", LABELS, "--m", "40", "--prior", "iid:1/10,2/10,3/10,2/10,2/10")
    first = run(capsys, *argv)
    assert first == run(capsys, *argv)


def test_infinite_beta_serializes_as_string(capsys, tmp_path):
    prior = {"m": 12, "k": 5, "atoms": [
        {"histogram": [3, 2, 1, 6, 0], "weight": "1/2"},
        {"histogram": [4, 3, 0, 5, 0], "weight": "1/2"},
    ]}
    path = tmp_path / "prior.json"
    path.write_text(json.dumps(prior))
    doc = run_json(capsys, "predict", "--input", SURVEY, "--labels", LABELS, "--prior", f"atoms:{path}")
    assert doc["m"] == 12
    assert doc["bounds"]["beta"] == "inf"
    assert doc["prediction"]["fstar"][4] == "0/1"


def test_zero_probability_sample_exit_code(capsys, tmp_path):
    prior = {"m": 20, "k": 5, "atoms": [{"histogram": [20, 0, 0, 0, 0], "weight": 1}]}
    path = tmp_path / "prior.json"
    path.write_text(json.dumps(prior))
    code, out, err = run(capsys, "predict", "--input", SURVEY, "--labels", LABELS, "--prior", f"atoms:{path}")
    assert code == 3
    assert out == ""
    assert "f_H^m would need to be revised in the light of the sample" in err


@pytest.mark.parametrize("argv", [
    ("population", "--input", SURVEY, "--labels", LABELS),
    ("population", "--input", SURVEY, "--labels", LABELS, "--m", "5"),
    ("predict", "--input", SURVEY, "--labels", LABELS, "--m", "10"),
    ("predict", "--input", SURVEY, "--labels", LABELS, "--m", "20", "--prior", "beta"),
    ("predict", "--input", SURVEY, "--labels", LABELS, "--m", "20", "--prior", "iid:1/2,1/2"),
    ("predict", "--input", "does-not-exist.csv", "--m", "20"),
    ("merge-demo", "--input", SURVEY, "--labels", LABELS),
    ("groups", "--input", SURVEY, "--group-sizes", "a=10"),
    ("simulate", "--m", "5"),
])
def test_validation_errors_exit_2(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 2
    assert err.startswith("error: ")


def test_groups_command(capsys, tmp_path):
    survey = tmp_path / "groups.csv"
    rows = [("1", "a"), ("1", "a"), ("1", "a"), ("2", "a"), ("2", "a"), ("4", "a"), ("4", "a"),
            ("4", "a"), ("4", "a"), ("4", "a"), ("1", "b"), ("2", "b"), ("3", "b"), ("4", "b"), ("5", "b")]
    with survey.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["label", "group"])
        writer.writerows(rows)
    doc = run_json(capsys, "groups", "--input", str(survey), "--labels", LABELS, "--group-sizes", "a=60,b=40")
    assert doc["m"] == 100
    assert doc["prediction"]["values"][0] == "73/300"
    assert doc["prediction"]["groups"]["a"]["values"][0] == "49/180"
    code, out, _ = run(capsys, "groups", "--input", str(survey), "--labels", LABELS,
                       "--group-sizes", "a=60,b=40", "--output", "text")
    assert "Prediction based on a survey of size 10 (group a)" in out.splitlines()


def test_merge_demo(capsys, tmp_path):
    survey = tmp_path / "pairs.csv"
    survey.write_text("label\n11\n11\n12\n22\n31\n")
    labels = tmp_path / "pairs.txt"
    labels.write_text("11\n12\n21\n22\n31\n32\n")
    doc = run_json(capsys, "merge-demo", "--input", str(survey), "--labels", str(labels),
                   "--merge", "11=1,12=1,21=2,22=2,31=3,32=3")
    pred = doc["prediction"]
    assert pred["merged_labels"] == ["1", "2", "3"]
    assert pred["predict_then_sum"] == ["5/11", "3/11", "3/11"]
    assert pred["merge_then_predict"] == ["1/2", "1/4", "1/4"]
    assert pred["tv"] == "1/22"
    assert pred["exact_routes_agree"] is None
    doc = run_json(capsys, "merge-demo", "--input", str(survey), "--labels", str(labels),
                   "--merge", "11=1,12=1,21=2,22=2,31=3,32=3", "--m", "8")
    assert doc["prediction"]["exact_routes_agree"] is True


def test_verify_command(capsys):
    doc = run_json(capsys, "verify", "--suite", "frt", "--cases", "3", "--seed", "7")
    assert doc["details"]["suites"]["frt"]["passed"]
    assert doc["details"]["suites"]["frt"]["cases"] == 3


def test_verify_merge_failures_exit_1(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "merge", "--cases", "20", "--seed", "1")
    doc = json.loads(out)
    merge = doc["details"]["suites"]["merge"]
    assert code == (0 if merge["passed"] else 1)
    assert merge["failure_count"] == 0 or code == 1


def test_simulate(capsys):
    a = run_json(capsys, "simulate", "--k", "3", "--m", "12", "--seed", "5")
    b = run_json(capsys, "simulate", "--k", "3", "--m", "12", "--seed", "5")
    assert a == b
    assert sum(a["histogram"]) == 12 == len(a["details"]["sequence"])
    c = run_json(capsys, "simulate", "--labels", LABELS, "--m", "6", "--n", "4", "--prior", "iid:0,0,1,0,0")
    assert c["details"]["sequence"] == ["3"] * 4


def test_text_output_and_plot_data(capsys, tmp_path):
    plot = tmp_path / "plot.csv"
    code, out, _ = run(capsys, "population", "--input", SURVEY, "--labels", LABELS, "--m", "100",
                       "--output", "text", "--plot-data", str(plot))
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "Survey of size 10"
    assert lines[1].strip() == "Number"
    assert "Prediction based on a survey of size 10" in lines
    assert "    Proportion of the electorate" in lines
    assert "4 | " + "#" * 16 + " 0.4100" in lines
    with plot.open() as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 10
    assert rows[5] == {"chart": "Prediction based on a survey of size 10",
                       "axis": "Proportion of the electorate", "label": "1", "value": "0.27"}
