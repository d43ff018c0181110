"""End-to-end CLI runs, in process.

Each helper invocation captures stdout/stderr and the exit code; reports
are parsed back from JSON so the assertions hit the machine-readable
surface the tool promises.
"""

import contextlib
import io
import json

from spitefree.cli import (
    EXIT_BUDGET,
    EXIT_INPUT_ERROR,
    EXIT_OK,
    EXIT_PROPERTY_FAIL,
    main,
)

THRESHOLD_SPEC = "kind: threshold\nranking: 1,2\nthresholds: 1,2\n"
SECOND_PRICE_SPEC = "kind: second_price\nn: 2\n"
CLUSTER_SPITE_SPEC = """\
kind: cluster
items: 2
ranking: 1,2
thresholds[1]: 10=1, 01=1, 11=2
thresholds[2]: 10=1, 01=1, 11=2
candidate[1]: 10=1, 01=1
candidate[1]: 01=1
candidate[2]: 01=3/2, 11=3/2
"""


def run_cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = main(list(argv))
    return code, out.getvalue(), err.getvalue()


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_verify_passing_threshold_spec(tmp_path):
    spec = write(tmp_path, "t.spec", THRESHOLD_SPEC)
    code, out, _ = run_cli(
        "verify", "--spec", spec, "--props", "ir,ic,sic,esic,payments,winner_price"
    )
    assert code == EXIT_OK
    report = json.loads(out)
    assert sorted(report) == ["command", "config", "results", "version", "wall_time_s"]
    assert report["command"] == "verify"
    assert report["results"]["all_passed"] is True
    # the grid defaults to the closure of the spec's thresholds
    assert report["config"]["grid"] == "0,1/2,1,3/2,2,5/2"
    # the normalized mechanism text is echoed so the run is reproducible
    assert "kind: threshold" in report["config"]["mechanism"]


def test_verify_reports_a_witness_on_failure(tmp_path):
    spec = write(tmp_path, "sp.spec", SECOND_PRICE_SPEC)
    code, out, _ = run_cli("verify", "--spec", spec, "--grid", "0,1,2", "--props", "sic")
    assert code == EXIT_PROPERTY_FAIL
    report = json.loads(out)
    entry = report["results"]["reports"][0]
    assert entry["property"] == "SIC"
    assert entry["passed"] is False
    assert entry["witness"]["profile"] == ["0", "2"]
    assert entry["witness"]["deviation_profile"] == ["1", "2"]


def test_verify_is_deterministic(tmp_path):
    spec = write(tmp_path, "t.spec", THRESHOLD_SPEC)
    argv = ("verify", "--spec", spec, "--props", "ir,sic")
    _, first, _ = run_cli(*argv)
    _, second, _ = run_cli(*argv)
    a, b = json.loads(first), json.loads(second)
    a.pop("wall_time_s"), b.pop("wall_time_s")
    assert a == b


def test_verify_requires_a_grid_for_benchmarks(tmp_path):
    spec = write(tmp_path, "sp.spec", SECOND_PRICE_SPEC)
    code, _, err = run_cli("verify", "--spec", spec, "--props", "ir")
    assert code == EXIT_INPUT_ERROR
    assert "grid" in err


def test_verify_rejects_malformed_spec_files(tmp_path):
    spec = write(tmp_path, "bad.spec", "kind: junk\n")
    code, _, err = run_cli("verify", "--spec", spec, "--grid", "0,1")
    assert code == EXIT_INPUT_ERROR
    assert "unknown kind" in err


def test_output_file_and_text_format(tmp_path):
    spec = write(tmp_path, "t.spec", THRESHOLD_SPEC)
    target = tmp_path / "report.txt"
    code, out, _ = run_cli(
        "verify", "--spec", spec, "--props", "ir", "--format", "text", "--out", str(target)
    )
    assert code == EXIT_OK
    assert out == ""
    text = target.read_text()
    assert "all_passed: true" in text
    assert "kind: threshold" in text


def test_enumerate_reports_the_characterization(tmp_path):
    code, out, _ = run_cli("enumerate", "--grid", "0,1", "--n", "2")
    assert code == EXIT_OK
    results = json.loads(out)["results"]
    assert results["summary"]["ir_ic_count"] == 30
    assert results["summary"]["sic_count"] == 18
    assert results["summary"]["threshold_form_count"] == 18
    assert results["sic_equals_threshold_form"] is True
    assert results["null_is_only_anonymous_sic"] is True
    assert results["null_is_only_efficient_sic"] is True


def test_enumerate_budget_exhaustion():
    code, _, err = run_cli("enumerate", "--grid", "0,1,2", "--n", "2", "--budget", "10")
    assert code == EXIT_BUDGET
    assert "more than 10" in err


def test_thresholds_exact_values():
    code, out, _ = run_cli("thresholds", "--n", "3")
    assert code == EXIT_OK
    results = json.loads(out)["results"]
    assert results["exact"] is True
    assert results["values_last_to_first"] == ["1/2", "5/8", "89/128"]
    assert results["values_in_line_order"] == ["89/128", "5/8", "1/2"]
    assert results["expected_revenue"] == "7921/16384"


def test_revenue_estimate_is_seeded():
    code, out, _ = run_cli("revenue", "--n", "1", "--samples", "1000000", "--seed", "3")
    assert code == EXIT_OK
    results = json.loads(out)["results"]
    assert results["exact"] == "1/4"
    assert results["estimate"]["mean"] == 0.2497875
    assert results["estimate"]["seed"] == 3
    assert results["abs_error"] < 0.005


def test_regions_with_lattice_classification():
    code, out, _ = run_cli(
        "regions", "--payments", "10=4,01=3,11=6", "--box", "0,8", "--step", "2"
    )
    assert code == EXIT_OK
    results = json.loads(out)["results"]
    by_bundle = {r["bundle"]: r for r in results["regions"]}
    assert [iq["text"] for iq in by_bundle["10"]["inequalities"]] == [
        "x1 > 4",
        "x1 - x2 > 1",
        "x2 < 2",
    ]
    assert len(results["lattice"]) == 25
    corner = [p for p in results["lattice"] if p["point"] == ["8", "8"]]
    assert corner[0]["bundles"] == ["11"]


def test_regions_rejects_malformed_payment_lists():
    code, _, err = run_cli("regions", "--payments", "10=4,oops")
    assert code == EXIT_INPUT_ERROR
    assert err


def test_multi_flags_the_spite_swap(tmp_path):
    spec = write(tmp_path, "cluster.spec", CLUSTER_SPITE_SPEC)
    code, out, _ = run_cli("multi", "--spec", spec, "--props", "ir,ic,sic")
    assert code == EXIT_PROPERTY_FAIL
    results = json.loads(out)["results"]
    verdicts = {r["property"]: r["passed"] for r in results["reports"]}
    assert verdicts == {"IR": True, "IC": True, "SIC": False}
    witness = [r for r in results["reports"] if not r["passed"]][0]["witness"]
    assert witness["agent"] == 1  # rendered 1-based
    assert witness["utilities_before"] == ["0", "1/2"]
    assert witness["utilities_after"] == ["0", "0"]


def test_multi_sequential_uses_the_builtin_menu(tmp_path):
    spec = write(tmp_path, "seq.spec", "kind: sequential\nitems: 2\nranking: 1,2\nthresholds: 2,1\n")
    code, out, _ = run_cli("multi", "--spec", spec, "--max-marginal", "2")
    assert code == EXIT_OK
    results = json.loads(out)["results"]
    assert results["all_passed"] is True


def test_multi_cluster_requires_candidates(tmp_path):
    spec = write(
        tmp_path,
        "c.spec",
        "kind: cluster\nitems: 2\nranking: 1,2\n"
        "thresholds[1]: 10=1, 01=1, 11=2\nthresholds[2]: 10=1, 01=1, 11=2\n",
    )
    code, _, err = run_cli("multi", "--spec", spec)
    assert code == EXIT_INPUT_ERROR
    assert "candidate" in err


def test_unknown_property_name(tmp_path):
    spec = write(tmp_path, "t.spec", THRESHOLD_SPEC)
    code, _, err = run_cli("verify", "--spec", spec, "--props", "ir,bogus")
    assert code == EXIT_INPUT_ERROR
    assert "bogus" in err
