import json

import pytest

from permix import acceptance, cli
from permix.acceptance import Check, CriterionResult
from permix.census import CensusRow, MCEstimate
from permix.permcore import MixingStatus, MixingVerdict
from permix.specmat import RateReport, Spectrum


def run(capsys, *argv):
    code = cli.main([*argv, "--quiet"])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_classify_example(capsys):
    code, out, _ = run(capsys, "classify", "--m", "2", "--N", "4", "--sigma", "[0,2,1,3]")
    assert code == 0
    d = json.loads(out)
    assert d["status"] == "NonMixing" and d["witness"] == [[0, 2], [1, 3]]
    assert MixingVerdict.from_dict(d).status is MixingStatus.NON_MIXING


def test_classify_oracle_and_cycle_literal(capsys):
    code, out, _ = run(capsys, "classify", "--m", "2", "--N", "4", "--sigma", "(1 2)", "--oracle")
    assert code == 0 and json.loads(out)["status"] == "NonMixing"


def test_worst(capsys):
    code, out, _ = run(capsys, "worst", "--m", "2", "--N", "5")
    d = json.loads(out)
    assert code == 0 and d["tau"] == [0, 3, 1, 4, 2]
    assert abs(d["bound"] - 0.8090169943749474) < 1e-12
    assert abs(d["lambda_tau"] - d["bound"]) < 1e-9


def test_rate_and_spectrum_round_trip(capsys):
    _, out, _ = run(capsys, "rate", "--m", "2", "--N", "6", "--sigma", "[1,0,2,3,4,5]")
    r = RateReport.from_dict(json.loads(out))
    assert r.m == 2 and r.N == 6
    _, out, _ = run(capsys, "spectrum", "--m", "2", "--N", "4", "--sigma", "[0,1,2,3]")
    s = Spectrum.from_dict(json.loads(out))
    assert sum(k for _, k in s.eigenvalues) == 4


def test_spectrum_csv(capsys):
    code, out, _ = run(capsys, "spectrum", "--m", "2", "--N", "4", "--matrix", "C", "--output", "csv")
    lines = out.strip().splitlines()
    assert code == 0 and lines[0] == "re,im,mult" and len(lines) >= 2


def test_enumerate_and_sample_round_trip(capsys):
    _, out, _ = run(capsys, "enumerate", "--m", "4", "--N", "6", "--threads", "1")
    row = CensusRow.from_dict(json.loads(out))
    assert row.slow_count == 144 and row.total == 720
    _, out, _ = run(capsys, "sample", "--m", "2", "--N", "8", "--samples", "1000", "--seed", "3")
    e = MCEstimate.from_dict(json.loads(out))
    assert e.samples == 1000 and e.seed == 3
    assert "runtime" not in json.loads(out)


def test_timing_flag_adds_runtime(capsys):
    _, out, _ = run(capsys, "enumerate", "--m", "2", "--N", "4", "--timing")
    assert "runtime" in json.loads(out)


def test_tables_csv(capsys):
    code, out, _ = run(capsys, "tables", "--which", "1", "--output", "csv", "--threads", "2")
    lines = out.strip().splitlines()
    assert code == 0 and lines[0] == "table,N,m,value"
    values = {tuple(map(int, l.split(",")[1:3])): int(l.split(",")[3]) for l in lines[1:]}
    assert values[(6, 4)] == 144 and values[(8, 2)] == 16896 and values[(8, 3)] == 35152
    assert values[(8, 4)] == 18432 and values[(4, 2)] == 0


def test_sample_is_deterministic(capsys, monkeypatch):
    args = ("sample", "--m", "3", "--N", "8", "--samples", "2000", "--seed", "11")
    _, a, _ = run(capsys, *args, "--threads", "1")
    monkeypatch.setenv("PERMIX_THREADS", "3")
    _, b, _ = run(capsys, *args)
    assert a == b


def test_threads_env_validation(capsys, monkeypatch):
    monkeypatch.setenv("PERMIX_THREADS", "many")
    code, _, err = run(capsys, "enumerate", "--m", "2", "--N", "4")
    assert code == 2 and "PERMIX_THREADS" in err


@pytest.mark.parametrize(
    "argv",
    [
        ["classify", "--m", "2"],
        ["classify", "--m", "2", "--N", "4", "--sigma", "[0,1,2,3,4]"],
        ["classify", "--m", "2", "--N", "4", "--sigma", "[0,0,1,2]"],
        ["verify", "--criteria", "99"],
    ],
)
def test_usage_errors_exit_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2 and "error" in err


def test_argparse_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["sample", "--samples", "0"])
    assert exc.value.code == 2


def test_verify_exit_codes(capsys, monkeypatch):
    code, out, _ = run(capsys, "verify", "--criteria", "4")
    assert code == 0 and out.startswith("PASS criterion  4")

    def failing(**_):
        res = CriterionResult(4, "forced failure")
        res.checks.append(Check("always", False, "detail"))
        return res

    monkeypatch.setitem(acceptance.CRITERIA, 4, failing)
    code, out, _ = run(capsys, "verify", "--criteria", "4")
    assert code == 1 and out.startswith("FAIL criterion  4") and "always" in out
    code, out, _ = run(capsys, "verify", "--criteria", "4", "--output", "json")
    assert code == 1 and json.loads(out)[0]["passed"] is False
