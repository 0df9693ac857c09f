"""Command-line front end: theory evaluation, simulation, figure data, validation.

Commands
  theory {eni|eni-approx|cdf-ni|ccdf-bound|et|general|k-of-n|asymptotic|limit-cdf|failure-bound}
  simulate {coupon|rlnc|general-event}
  figure {a|b}
  validate [--quick]

Exit codes: 0 success, 1 validation failure, 2 usage error, 3 numeric or
resource error.  All file output is deterministic for a fixed seed: headers
carry the tool version and the full parameter echo, never timestamps.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import __version__
from .codec import GenerationConfig, run_trial, trial_csv_header, trial_csv_row
from .errors import ResourceLimitError
from .gf import FieldSpec
from .quadrature import QuadratureError
from .simulate import (
    SamplePlan,
    empirical_failure_curve,
    markov_expected_time,
    sample_codec_times,
    sample_collection_times,
    sample_threshold_times,
    trial_rng,
)
from .theory import (
    ThresholdSpec,
    alpha_binary_limit,
    collection_time_asymptotic,
    collection_time_many_copies_limit,
    decoding_failure_lower_bound,
    draws_to_full_rank_cdf,
    draws_to_full_rank_ccdf_bounds,
    expected_collection_time,
    expected_draws_to_full_rank,
    expected_draws_to_full_rank_approx,
    expected_partial_collection_time,
    expected_threshold_time,
    limit_law_cdf,
)

_FAILURE_BOUND_NOTE = "leading large-n term; slowly decaying correction of order loglog(n)/log(n) omitted"


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _meta(args, command: str, param_names: list[str]) -> dict:
    params = {name: getattr(args, name) for name in param_names if getattr(args, name, None) is not None}
    return {"tool": "genrlnc", "version": __version__, "command": command, "params": params}


def _write_csv(path: str, meta: dict, header: list[str], rows: list[list]) -> None:
    lines = [f"# {k}: {json.dumps(v, sort_keys=True) if isinstance(v, dict) else v}" for k, v in meta.items()]
    lines.append(",".join(header))
    lines.extend(",".join(_fmt(c) for c in row) for row in rows)
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _write_json(path: str, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _emit_scalar(args, command: str, param_names: list[str], result: dict) -> int:
    meta = _meta(args, command, param_names)
    if args.format == "json":
        print(json.dumps({"meta": meta, **result}, sort_keys=True))
    else:
        for key, val in result.items():
            print(f"{key}: {_fmt(val)}")
    if args.out:
        if args.format == "json":
            _write_json(args.out, {"meta": meta, **result})
        else:
            _write_csv(args.out, meta, list(result), [list(result.values())])
    return 0


def _parse_threshold(text: str, n: int) -> ThresholdSpec:
    try:
        pairs = tuple(
            (int(k), int(m)) for k, m in (part.split(":", 1) for part in text.split(",") if part)
        )
    except (ValueError, TypeError) as exc:
        raise ValueError(f"cannot parse threshold spec {text!r}; expected 'k1:m1,k2:m2,...'") from exc
    return ThresholdSpec(n, pairs)


# -- theory -----------------------------------------------------------------


def _cmd_theory(args) -> int:
    sub = args.theory_command
    if sub == "eni":
        r = expected_draws_to_full_rank(args.q, args.h)
        return _emit_scalar(args, "theory eni", ["q", "h"], {
            "value": r.value, "abs_error_estimate": r.abs_error_estimate, "method": r.method,
        })
    if sub == "eni-approx":
        return _emit_scalar(args, "theory eni-approx", ["q", "h"], {
            "value": expected_draws_to_full_rank_approx(args.q, args.h),
        })
    if sub == "cdf-ni":
        return _emit_scalar(args, "theory cdf-ni", ["q", "h", "s"], {
            "value": draws_to_full_rank_cdf(args.q, args.h, args.s),
        })
    if sub == "ccdf-bound":
        exact, field_bound, binary_bound = draws_to_full_rank_ccdf_bounds(args.q, args.h, args.s)
        return _emit_scalar(args, "theory ccdf-bound", ["q", "h", "s"], {
            "exact": exact,
            "field_bound": field_bound,
            "binary_limit_bound": binary_bound,
        })
    if sub == "et":
        r = expected_collection_time(args.n, args.m, args.tol)
        return _emit_scalar(args, "theory et", ["n", "m", "tol"], {
            "value": r.value, "abs_error_estimate": r.abs_error_estimate, "method": r.method,
        })
    if sub == "general":
        spec = _parse_threshold(args.spec, args.n)
        r = expected_threshold_time(spec, args.tol)
        return _emit_scalar(args, "theory general", ["n", "spec", "tol"], {
            "value": r.value, "abs_error_estimate": r.abs_error_estimate, "method": r.method,
        })
    if sub == "k-of-n":
        r = expected_partial_collection_time(args.n, args.k, args.m, args.tol)
        return _emit_scalar(args, "theory k-of-n", ["n", "k", "m", "tol"], {
            "value": r.value, "abs_error_estimate": r.abs_error_estimate, "method": r.method,
        })
    if sub == "asymptotic":
        return _emit_scalar(args, "theory asymptotic", ["n", "m"], {
            "value": collection_time_asymptotic(args.n, args.m), "method": "asymptotic",
        })
    if sub == "limit-cdf":
        return _emit_scalar(args, "theory limit-cdf", ["y", "m"], {
            "value": limit_law_cdf(args.y, args.m),
        })
    if sub == "failure-bound":
        return _emit_scalar(args, "theory failure-bound", ["n", "h", "t"], {
            "value": decoding_failure_lower_bound(args.n, args.h, args.t),
            "note": _FAILURE_BOUND_NOTE,
        })
    raise ValueError(f"unknown theory subcommand {sub!r}")


# -- simulate ----------------------------------------------------------------


def _print_summary(args, meta: dict, summary) -> None:
    if args.format == "json":
        print(json.dumps({"meta": meta, **summary.to_dict()}, sort_keys=True))
        return
    d = summary.to_dict()
    for key in ("mean", "stderr", "count", "min", "max"):
        print(f"{key}: {_fmt(d[key])}")
    print("quantiles: " + " ".join(f"{k}={_fmt(v)}" for k, v in d["quantiles"].items()))


def _cmd_simulate(args) -> int:
    sub = args.simulate_command
    plan = SamplePlan(args.trials, args.seed)
    if sub == "coupon":
        meta = _meta(args, "simulate coupon", ["n", "m", "trials", "seed", "workers"])
        summary = sample_collection_times(args.n, args.m, plan, workers=args.workers)
        samples_header = ["trial", "stopping_time"]
    elif sub == "general-event":
        spec = _parse_threshold(args.spec, args.n)
        meta = _meta(args, "simulate general-event", ["n", "spec", "trials", "seed", "workers"])
        summary = sample_threshold_times(spec, plan, workers=args.workers)
        samples_header = ["trial", "stopping_time"]
    elif sub == "rlnc":
        config = GenerationConfig(args.N, args.h, FieldSpec(args.q), args.d)
        meta = _meta(args, "simulate rlnc", ["N", "h", "q", "d", "trials", "seed", "workers"])
        summary, records = sample_codec_times(config, plan, workers=args.workers, collect_records=True)
        _print_summary(args, meta, summary)
        if args.out:
            if args.format == "json":
                _write_json(args.out, {"meta": meta, **summary.to_dict()})
            else:
                meta_lines = dict(meta)
                meta_lines["per-trial-rng"] = "SeedSequence((seed, row seed value))"
                rows = [trial_csv_row(i, config, rec).split(",") for i, rec in enumerate(records)]
                _write_csv(args.out, meta_lines, trial_csv_header(config.n).split(","), rows)
        return 0
    else:
        raise ValueError(f"unknown simulate subcommand {sub!r}")

    _print_summary(args, meta, summary)
    if args.out:
        if args.format == "json":
            _write_json(args.out, {"meta": meta, **summary.to_dict()})
        else:
            rows = [[i, int(v)] for i, v in enumerate(summary.samples)]
            _write_csv(args.out, meta, samples_header, rows)
    return 0


# -- figure ------------------------------------------------------------------


def _divisors(N: int) -> list[int]:
    return [h for h in range(1, N + 1) if N % h == 0]


def _cmd_figure(args) -> int:
    if args.panel == "a":
        return _figure_a(args)
    return _figure_b(args)


def _figure_a(args) -> int:
    N, q = args.N, args.q
    if args.h_list:
        hs = []
        for part in str(args.h_list).split(","):
            h = int(part)
            if N % h:
                print(f"warning: h={h} does not divide N={N}; row skipped", file=sys.stderr)
                continue
            hs.append(h)
    else:
        hs = _divisors(N)
    if not hs:
        raise ValueError("no usable h values")
    field = FieldSpec(q)
    meta = _meta(args, "figure a", ["N", "q", "d", "trials", "seed", "tol", "workers"])
    header = ["h", "n", "collection_time", "asymptotic_h", "asymptotic_refined", "copies_limit", "sim_mean", "sim_stderr"]
    rows = []
    for h in hs:
        n = N // h
        et = expected_collection_time(n, h, args.tol).value
        if n >= 2:
            asym_h = collection_time_asymptotic(n, h)
            asym_ref = collection_time_asymptotic(n, expected_draws_to_full_rank(q, h).value)
        else:
            asym_h = asym_ref = float("nan")
        config = GenerationConfig(N, h, field, args.d)
        summary = sample_codec_times(config, SamplePlan(args.trials, (args.seed, h)), workers=args.workers)
        rows.append([h, n, et, asym_h, asym_ref, collection_time_many_copies_limit(n, h), summary.mean, summary.stderr])
    _write_table(args, meta, header, rows)
    return 0


def _parse_grid(text: str) -> np.ndarray:
    lo, hi, steps = text.split(":")
    return np.unique(np.rint(np.linspace(float(lo), float(hi), int(steps))))


def _figure_b(args) -> int:
    n, h, q = args.n, args.h, args.q
    if n < 2:
        raise ValueError("panel b needs n >= 2")
    N = n * h
    if args.t_grid:
        grid = _parse_grid(args.t_grid)
    else:
        hi = 2.0 * max(collection_time_asymptotic(n, h), float(N))
        grid = np.unique(np.rint(np.linspace(N, hi, 61)))
    config = GenerationConfig(N, h, FieldSpec(q), args.d)
    summary = sample_codec_times(config, SamplePlan(args.trials, args.seed), workers=args.workers)
    curve = empirical_failure_curve(summary, grid)
    meta = _meta(args, "figure b", ["n", "h", "q", "d", "trials", "seed", "workers", "t_grid"])
    meta["bound-note"] = _FAILURE_BOUND_NOTE
    header = ["t", "failure_lower_bound", "empirical_failure"]
    rows = [[t, decoding_failure_lower_bound(n, h, t), frac] for t, frac in curve]
    _write_table(args, meta, header, rows)
    return 0


def _write_table(args, meta: dict, header: list[str], rows: list[list]) -> None:
    if not args.out:
        print(",".join(header))
        for row in rows:
            print(",".join(_fmt(c) for c in row))
        return
    if args.format == "json":
        payload = {"meta": meta, "rows": [dict(zip(header, row)) for row in rows]}
        _write_json(args.out, payload)
    else:
        _write_csv(args.out, meta, header, rows)


# -- validate ----------------------------------------------------------------


def _check_specialization_chain() -> dict:
    worst = 0.0
    tol = 1e-8
    for n in (2, 3, 5):
        for m in (1, 2, 3):
            base = expected_collection_time(n, m, tol).value
            gen = expected_threshold_time(ThresholdSpec(n, ((n, m),)), tol).value
            kofn = expected_partial_collection_time(n, n, m, tol).value
            worst = max(worst, abs(gen - base), abs(kofn - base))
    return {"name": "specialization-chain", "deviation": worst, "limit": 2 * tol, "pass": worst <= 2 * tol}


def _check_oracle_agreement() -> dict:
    specs = [
        ThresholdSpec(2, ((2, 2),)),
        ThresholdSpec(3, ((3, 1),)),
        ThresholdSpec(4, ((2, 2), (4, 1))),
        ThresholdSpec(4, ((1, 3), (3, 2), (4, 1))),
    ]
    worst = 0.0
    for spec in specs:
        exact = markov_expected_time(spec)
        quad = expected_threshold_time(spec, 2e-7).value
        worst = max(worst, abs(quad - exact))
    return {"name": "markov-oracle-agreement", "deviation": worst, "limit": 1e-6, "pass": worst <= 1e-6}


def _check_tail_bound_ordering() -> dict:
    margin = math.inf
    for q in (2, 16, 256):
        for h in (1, 2, 4, 16):
            for s in range(h + 1, h + 9):
                exact, field_bound, binary_bound = draws_to_full_rank_ccdf_bounds(q, h, s)
                margin = min(margin, field_bound - exact, binary_bound - field_bound)
    return {"name": "tail-bound-ordering", "deviation": margin, "limit": 0.0, "pass": margin > 0.0}


def _check_rank_distribution(trials: int = 100_000) -> dict:
    field = FieldSpec(2)
    worst_z = 0.0
    for h in (1, 2, 3):
        config = GenerationConfig(h, h, field)
        samples = np.array([
            run_trial(config, trial_rng((77, h), i)).total_packets for i in range(trials)
        ])
        for s in range(h, h + 4):
            exact = draws_to_full_rank_cdf(2, h, s)
            emp = float(np.mean(samples <= s))
            sigma = math.sqrt(exact * (1.0 - exact) / trials)
            if sigma > 0:
                worst_z = max(worst_z, abs(emp - exact) / sigma)
    return {"name": "rank-distribution", "deviation": worst_z, "limit": 3.0, "pass": worst_z <= 3.0}


def _cmd_validate(args) -> int:
    checks = [
        _check_specialization_chain(),
        _check_oracle_agreement(),
        _check_tail_bound_ordering(),
    ]
    if not args.quick:
        checks.append(_check_rank_distribution())
    ok = all(c["pass"] for c in checks)
    if args.format == "json":
        print(json.dumps({"checks": checks, "pass": ok}, sort_keys=True))
    else:
        for c in checks:
            status = "PASS" if c["pass"] else "FAIL"
            print(f"{c['name']}: {status} (deviation {c['deviation']:.3e}, limit {_fmt(c['limit'])})")
        print(f"overall: {'PASS' if ok else 'FAIL'}")
    return 0 if ok else 1


# -- parser -------------------------------------------------------------------


def _add_common_output(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", default=None, help="output file path")
    p.add_argument("--format", choices=("csv", "json"), default="csv", help="output format")


def _add_sim_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="genrlnc", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"genrlnc {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    theory = commands.add_parser("theory", help="evaluate a closed-form or quadrature formula")
    theory.set_defaults(handler=_cmd_theory)
    tsub = theory.add_subparsers(dest="theory_command", required=True)
    for name, flags in (
        ("eni", ("q", "h")),
        ("eni-approx", ("q", "h")),
        ("cdf-ni", ("q", "h", "s")),
        ("ccdf-bound", ("q", "h", "s")),
        ("et", ("n", "m", "tol")),
        ("general", ("n", "spec", "tol")),
        ("k-of-n", ("n", "k", "m", "tol")),
        ("asymptotic", ("n", "m")),
        ("limit-cdf", ("y", "m")),
        ("failure-bound", ("n", "h", "t")),
    ):
        sp = tsub.add_parser(name)
        sp.set_defaults(handler=_cmd_theory)
        if "q" in flags:
            sp.add_argument("--q", type=int, default=256)
        if "h" in flags:
            sp.add_argument("--h", type=int, required=True)
        if "s" in flags:
            sp.add_argument("--s", type=int, required=True)
        if "n" in flags:
            sp.add_argument("--n", type=int, required=True)
        if "m" in flags:
            sp.add_argument("--m", type=int, required=True)
        if "k" in flags:
            sp.add_argument("--k", type=int, required=True)
        if "t" in flags:
            sp.add_argument("--t", type=float, required=True)
        if "y" in flags:
            sp.add_argument("--y", type=float, required=True)
        if "spec" in flags:
            sp.add_argument("--spec", required=True, help="threshold pairs 'k1:m1,k2:m2,...'")
        if "tol" in flags:
            sp.add_argument("--tol", type=float, default=1e-8)
        _add_common_output(sp)

    sim = commands.add_parser("simulate", help="Monte Carlo sampling")
    sim.set_defaults(handler=_cmd_simulate)
    ssub = sim.add_subparsers(dest="simulate_command", required=True)
    sc = ssub.add_parser("coupon")
    sc.set_defaults(handler=_cmd_simulate)
    sc.add_argument("--n", type=int, required=True)
    sc.add_argument("--m", type=int, required=True)
    sr = ssub.add_parser("rlnc")
    sr.set_defaults(handler=_cmd_simulate)
    sr.add_argument("--N", type=int, required=True)
    sr.add_argument("--h", type=int, required=True)
    sr.add_argument("--q", type=int, default=256)
    sr.add_argument("--d", type=int, default=1)
    sg = ssub.add_parser("general-event")
    sg.set_defaults(handler=_cmd_simulate)
    sg.add_argument("--n", type=int, required=True)
    sg.add_argument("--spec", required=True, help="threshold pairs 'k1:m1,k2:m2,...'")
    for sp in (sc, sr, sg):
        _add_sim_flags(sp)
        _add_common_output(sp)

    fig = commands.add_parser("figure", help="write figure data files")
    fig.set_defaults(handler=_cmd_figure)
    fsub = fig.add_subparsers(dest="panel", required=True)
    fa = fsub.add_parser("a")
    fa.set_defaults(handler=_cmd_figure, panel="a")
    fa.add_argument("--N", type=int, default=1000)
    fa.add_argument("--q", type=int, default=256)
    fa.add_argument("--d", type=int, default=1)
    fa.add_argument("--tol", type=float, default=1e-8)
    fa.add_argument("--h", dest="h_list", default=None, help="comma-separated h values (default: all divisors of N)")
    fb = fsub.add_parser("b")
    fb.set_defaults(handler=_cmd_figure, panel="b")
    fb.add_argument("--n", type=int, required=True)
    fb.add_argument("--h", type=int, required=True)
    fb.add_argument("--q", type=int, default=256)
    fb.add_argument("--d", type=int, default=1)
    fb.add_argument("--t-grid", dest="t_grid", default=None, help="t grid as 'lo:hi:steps'")
    for sp in (fa, fb):
        _add_sim_flags(sp)
        _add_common_output(sp)

    val = commands.add_parser("validate", help="run the cross-check battery")
    val.set_defaults(handler=_cmd_validate)
    val.add_argument("--quick", action="store_true", help="subset that finishes in well under 30 s")
    val.add_argument("--format", choices=("csv", "json"), default="csv")
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ResourceLimitError, QuadratureError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
