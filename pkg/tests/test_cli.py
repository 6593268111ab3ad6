import json

import pytest

from limitlab.cli import EXAMPLES, main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def result(capsys, *argv):
    code, out, _ = run(capsys, *argv, "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["schema_version"] == 1
    return doc["result"]


def test_ex2_mismatch(capsys):
    r = result(capsys, "example", "ex2")
    assert r["coincidence"]["classification"] == "mismatch"
    assert r["coincidence"]["measure_side_R"] == "1"
    assert r["coincidence"]["numeric_limit"] == 0


def test_ex6_not_tight(capsys):
    r = result(capsys, "example", "ex6", "--q", "0.5")
    assert r["tightness"]["outcome"] == "not_tight"
    assert r["tightness"]["epsilon"] == 0.5
    assert r["tightness"]["witness"]


def test_ex9_extended_limit(capsys):
    r = result(capsys, "example", "ex9")
    assert r["extended_limit"] == {"+inf": "1"}
    assert r["limit_mass_of_R"] == "0"


def test_ex12_is_out_of_scope(capsys):
    code, out, err = run(capsys, "example", "ex12")
    assert code == 2 and out == ""
    assert "out of scope (continuous measures)" in err


def test_unknown_example(capsys):
    code, _, err = run(capsys, "example", "ex99")
    assert code == 2 and "unknown example" in err


@pytest.mark.parametrize("ex", sorted(EXAMPLES))
def test_every_example_runs_in_text(capsys, ex):
    code, out, _ = run(capsys, "example", ex)
    assert code == 0 and out.startswith(f"# example {ex}")


def test_demo_inconsistency(capsys):
    r = result(capsys, "demo-inconsistency", "--q", "1/2", "--N", "50")
    assert all(row["residual"] == "0" for row in r["rows"])
    assert r["extended_pair"] == {"left": "1/2", "right": "0"}
    assert r["numeric_limits"]["left"] == pytest.approx(0.5)


def test_oracle_csv(capsys):
    code, out, _ = run(capsys, "oracle", "--q", "1/2", "--n", "3", "--format", "csv")
    assert code == 0
    assert out.splitlines() == [
        "value,exact,closed_form,empirical,abs_err",
        "1,1/8,1/8,,",
        "2,1/4,1/4,,",
        "3,5/8,5/8,,",
    ]


def test_oracle_capacity_error(capsys):
    code, out, err = run(capsys, "oracle", "--n", "25")
    assert code != 0 and out == "" and "2**25" in err


def test_bad_q_is_an_error(capsys):
    code, _, err = run(capsys, "tightness", "--family", "record_index", "--q", "3/2", "--eps", "0.1")
    assert code != 0 and "q must lie" in err


def test_malformed_flag_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["oracle", "--q", "half"])
    assert exc.value.code == 2


def test_tightness_command(capsys):
    r = result(capsys, "tightness", "--family", "record_index", "--q", "0.5", "--eps", "0.5", "--N", "200")
    assert r["outcome"] == "not_tight"
    r = result(capsys, "tightness", "--family", "running_max", "--eps", "0.01", "--N", "100")
    assert r["outcome"] == "tight" and r["interval"] == "[0,1]"


def test_converge_with_rule(capsys):
    r = result(capsys, "converge", "--family", "bernoulli_marginal", "--rule", "identity", "--event", "{0}", "--N", "60")
    assert r["classification"] == "coincides"
    code, out, _ = run(capsys, "converge", "--family", "record_index", "--rule", "ray_growth", "--N", "60", "--format", "csv")
    assert code == 0 and out.startswith("n,probability\n")


def test_converge_without_rule(capsys):
    r = result(capsys, "converge", "--family", "dirac_recip", "--N", "100")
    assert r["limit_on_R"] == {"0": "1"}


def test_uncertain_command(capsys):
    r = result(capsys, "uncertain", "--prefix", "0.141")
    assert (r["lo"], r["hi"], r["width"]) == ("141/1000", "71/500", "1/1000")
    r = result(capsys, "uncertain", "--prefix", "1.9")
    assert r["transmission_range"] is None


def test_csv_not_available_for_text_reports(capsys):
    code, _, err = run(capsys, "uncertain", "--prefix", "0.1", "--format", "csv")
    assert code == 2 and "no tabular output" in err


def test_json_is_byte_identical(capsys):
    argv = ["simulate", "--n", "4", "--trials", "5000", "--seed", "9", "--format", "json"]
    _, first, _ = run(capsys, *argv)
    _, second, _ = run(capsys, *argv)
    assert first == second
    _, a, _ = run(capsys, "example", "ex7", "--format", "json")
    _, b, _ = run(capsys, "example", "ex7", "--format", "json")
    assert a == b


def test_out_flag_writes_file(capsys, tmp_path):
    path = tmp_path / "r.json"
    code, out, _ = run(capsys, "uncertain", "--prefix", "0.5", "--format", "json", "--out", str(path))
    assert code == 0 and out == ""
    assert json.loads(path.read_text())["command"] == "uncertain"
