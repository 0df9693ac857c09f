import json
import math

import numpy as np
import pytest

from genrlnc.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def parse_kv(out):
    vals = {}
    for line in out.strip().splitlines():
        key, _, rest = line.partition(":")
        vals[key.strip()] = rest.strip()
    return vals


def test_theory_et_trivial(capsys):
    code, out, _ = run_cli(capsys, "theory", "et", "--n", "1", "--m", "7")
    assert code == 0
    vals = parse_kv(out)
    assert float(vals["value"]) == pytest.approx(7.0, abs=1e-8)
    assert vals["method"] == "quadrature"


def test_theory_et_markov_anchor(capsys):
    code, out, _ = run_cli(capsys, "theory", "et", "--n", "2", "--m", "2")
    assert code == 0
    vals = parse_kv(out)
    assert float(vals["value"]) == pytest.approx(5.5, abs=1e-8)
    assert float(vals["abs_error_estimate"]) <= 1e-8


def test_theory_failure_bound(capsys):
    t = 100 * (math.log(100) + math.log(math.log(100)))
    code, out, _ = run_cli(capsys, "theory", "failure-bound", "--n", "100", "--h", "2", "--t", str(t))
    assert code == 0
    vals = parse_kv(out)
    assert float(vals["value"]) == pytest.approx(1 - math.exp(-1), rel=1e-9)
    assert "note" in vals


def test_theory_json_format(capsys):
    code, out, _ = run_cli(capsys, "theory", "eni", "--q", "256", "--h", "2", "--format", "json")
    assert code == 0
    payload = json.loads(out)
    assert payload["value"] == pytest.approx(2.00394, abs=1e-5)
    assert payload["meta"]["params"] == {"q": 256, "h": 2}


def test_theory_general_and_k_of_n(capsys):
    code, out, _ = run_cli(capsys, "theory", "general", "--n", "4", "--spec", "2:2,4:1")
    assert code == 0
    general = float(parse_kv(out)["value"])
    assert general == pytest.approx(8.862268518518519, abs=1e-7)
    code, out, _ = run_cli(capsys, "theory", "k-of-n", "--n", "3", "--k", "2", "--m", "1")
    assert code == 0
    assert float(parse_kv(out)["value"]) == pytest.approx(2.5, abs=1e-8)


def test_theory_usage_errors(capsys):
    code, _, err = run_cli(capsys, "theory", "ccdf-bound", "--q", "2", "--h", "3", "--s", "2")
    assert code == 2
    assert "error:" in err
    code, _, err = run_cli(capsys, "theory", "general", "--n", "3", "--spec", "nonsense")
    assert code == 2


def test_theory_resource_error_exit_code(capsys):
    code, _, err = run_cli(capsys, "theory", "general", "--n", "10000", "--spec", "1:2,2:1")
    assert code == 3
    assert "error:" in err


def test_simulate_coupon_harmonic(capsys):
    code, out, _ = run_cli(
        capsys, "simulate", "coupon", "--n", "10", "--m", "1", "--trials", "10000", "--seed", "0"
    )
    assert code == 0
    vals = parse_kv(out)
    mean, stderr = float(vals["mean"]), float(vals["stderr"])
    expect = 10 * math.fsum(1.0 / i for i in range(1, 11))
    assert abs(mean - expect) <= 3 * stderr


def test_simulate_rlnc_divisibility_usage_error(capsys):
    code, _, err = run_cli(capsys, "simulate", "rlnc", "--N", "10", "--h", "3", "--trials", "5")
    assert code == 2
    assert "divisible" in err


def test_simulate_rlnc_csv_output(tmp_path, capsys):
    out_path = tmp_path / "runs.csv"
    code, out, _ = run_cli(
        capsys, "simulate", "rlnc", "--N", "4", "--h", "2", "--q", "2",
        "--trials", "8", "--seed", "1", "--out", str(out_path),
    )
    assert code == 0
    text = out_path.read_text()
    lines = text.splitlines()
    meta = [l for l in lines if l.startswith("#")]
    assert any("version" in l for l in meta)
    assert any("seed" in l for l in meta)
    header = next(l for l in lines if not l.startswith("#"))
    assert header == "seed,N,h,n,q,d,T,N_1,N_2"
    data = [l for l in lines if not l.startswith("#")][1:]
    assert len(data) == 8
    first = data[0].split(",")
    assert first[1:6] == ["4", "2", "2", "2", "1"]
    assert int(first[6]) >= 4


def test_simulate_general_event_json(capsys):
    code, out, _ = run_cli(
        capsys, "simulate", "general-event", "--n", "4", "--spec", "4:1",
        "--trials", "2000", "--seed", "3", "--format", "json",
    )
    assert code == 0
    payload = json.loads(out)
    expect = 4 * math.fsum(1.0 / i for i in range(1, 5))
    assert abs(payload["mean"] - expect) <= 3 * payload["stderr"]
    assert payload["count"] == 2000


def test_figure_a_small(tmp_path, capsys):
    out_path = tmp_path / "panel_a.csv"
    code, _, _ = run_cli(
        capsys, "figure", "a", "--N", "6", "--q", "2", "--trials", "40",
        "--seed", "5", "--out", str(out_path),
    )
    assert code == 0
    lines = [l for l in out_path.read_text().splitlines() if not l.startswith("#")]
    header = lines[0].split(",")
    assert header == [
        "h", "n", "collection_time", "asymptotic_h", "asymptotic_refined",
        "copies_limit", "sim_mean", "sim_stderr",
    ]
    rows = [l.split(",") for l in lines[1:]]
    assert [int(r[0]) for r in rows] == [1, 2, 3, 6]  # divisors of 6
    # collection_time decreases as h grows at fixed N
    ct = [float(r[2]) for r in rows]
    assert all(a > b for a, b in zip(ct, ct[1:]))
    # n=1 row computes no large-n asymptotic
    assert rows[-1][3] == "nan"
    # simulated mean is at least N
    assert all(float(r[6]) >= 6.0 for r in rows)


def test_figure_a_skips_bad_h(tmp_path, capsys):
    out_path = tmp_path / "panel_a.csv"
    code, _, err = run_cli(
        capsys, "figure", "a", "--N", "6", "--q", "2", "--trials", "10",
        "--seed", "5", "--h", "2,4", "--out", str(out_path),
    )
    assert code == 0
    assert "skipped" in err
    lines = [l for l in out_path.read_text().splitlines() if not l.startswith("#")]
    assert len(lines) == 2  # header + h=2 row only


def test_figure_b_columns_and_monotonicity(tmp_path, capsys):
    out_path = tmp_path / "panel_b.csv"
    code, _, _ = run_cli(
        capsys, "figure", "b", "--n", "20", "--h", "2", "--q", "2",
        "--trials", "300", "--seed", "2", "--out", str(out_path),
    )
    assert code == 0
    lines = [l for l in out_path.read_text().splitlines() if not l.startswith("#")]
    assert lines[0] == "t,failure_lower_bound,empirical_failure"
    rows = [tuple(map(float, l.split(","))) for l in lines[1:]]
    emp = [r[2] for r in rows]
    bound = [r[1] for r in rows]
    assert all(a >= b for a, b in zip(emp, emp[1:]))
    assert all(a >= b for a, b in zip(bound, bound[1:]))


def test_outputs_byte_identical_across_workers(tmp_path, capsys):
    args = ["simulate", "rlnc", "--N", "8", "--h", "2", "--q", "2", "--trials", "30", "--seed", "7"]
    p1, p2 = tmp_path / "w1.csv", tmp_path / "w2.csv"
    assert run_cli(capsys, *args, "--workers", "1", "--out", str(p1))[0] == 0
    assert run_cli(capsys, *args, "--workers", "2", "--out", str(p2))[0] == 0
    assert p1.read_bytes() == p2.read_bytes()

    f1, f2 = tmp_path / "fa1.csv", tmp_path / "fa2.csv"
    fig_args = ["figure", "a", "--N", "4", "--q", "2", "--trials", "12", "--seed", "3"]
    assert run_cli(capsys, *fig_args, "--workers", "1", "--out", str(f1))[0] == 0
    assert run_cli(capsys, *fig_args, "--workers", "2", "--out", str(f2))[0] == 0
    assert f1.read_bytes() == f2.read_bytes()


def test_validate_quick_passes(capsys):
    code, out, _ = run_cli(capsys, "validate", "--quick")
    assert code == 0
    assert "overall: PASS" in out
    assert "specialization-chain: PASS" in out
    assert "markov-oracle-agreement: PASS" in out
    assert "tail-bound-ordering: PASS" in out


def test_validate_detects_tampered_constant(capsys, monkeypatch):
    import genrlnc.theory as theory

    monkeypatch.setattr(theory, "alpha_constant", lambda q, h: 50.0)
    code, out, _ = run_cli(capsys, "validate", "--quick")
    assert code == 1
    assert "tail-bound-ordering: FAIL" in out
    assert "overall: FAIL" in out


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert "genrlnc" in capsys.readouterr().out


def test_unknown_flag_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["theory", "et", "--bogus", "1"])
    assert exc.value.code == 2
