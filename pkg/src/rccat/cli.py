"""Command-line interface.

Subcommands: ``detect`` (CSV in, JSON report out), ``simulate`` (synthetic
series + truth), ``bench`` (benchmark tables), ``estimate`` (robust mean
with deviation radius), ``convert-eta`` (mixture-rate conversion).

Exit codes: 0 success, 1 usage/parameter error, 2 data error.  Any flag can
also be set from a ``key = value`` config file via --config; explicit flags
win.  The RCCAT_SEED environment variable supplies a master seed when
--seed is omitted.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .baseline import RumeConfig, arc_detect
from .datagen import (
    ContaminationSpec,
    FixedOutliers,
    FixedSymmetricOutliers,
    Gaussian,
    MartingaleGarch,
    ParetoOutliers,
    SignalSpec,
    StudentT,
    apply_contamination,
    derived_rng,
    gen_signal,
)
from .detector import (
    DetectorConfig,
    compute_trace_shifted,
    default_threshold,
    detect,
    report_from_trace,
    scan_alpha,
)
from .estimators import (
    EstimatorConfig,
    catoni_estimate,
    deviation_radius,
    huber_to_eta,
    shifted_deviation_radius,
    shifting_device_estimate,
)
from .harness import (
    BenchmarkScenario,
    DataError,
    format_table,
    load_csv,
    result_to_csv,
    run_benchmark,
    write_csv,
    write_report,
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(part) for part in text.split(",") if part.strip())


def _float_list(text: str) -> tuple[float, ...]:
    return tuple(float(part) for part in text.split(",") if part.strip())


def _noise_model(text: str):
    kind, _, params = text.partition(":")
    values = [float(p) for p in params.split(",") if p.strip()] if params else []
    if kind == "student_t":
        return StudentT(*values) if values else StudentT()
    if kind == "gaussian":
        return Gaussian(*values) if values else Gaussian()
    if kind == "garch":
        return MartingaleGarch(*values) if values else MartingaleGarch()
    raise ValueError(f"unknown noise model {kind!r}")


def _outlier_model(text: str):
    kind, _, params = text.partition(":")
    values = [float(p) for p in params.split(",") if p.strip()] if params else []
    if kind == "pareto":
        return ParetoOutliers(*values) if values else ParetoOutliers()
    if kind == "fixed":
        return FixedOutliers(*values) if values else FixedOutliers()
    if kind == "fixed_symmetric":
        return FixedSymmetricOutliers(*values) if values else FixedSymmetricOutliers()
    raise ValueError(f"unknown outlier model {kind!r}")


def _resolve_seed(explicit: int | None) -> int:
    if explicit is not None:
        return explicit
    env = os.environ.get("RCCAT_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"RCCAT_SEED must be an integer, got {env!r}") from None
    return 0


def _add_estimator_flags(parser, with_v=True):
    parser.add_argument("--eta", type=float, required=True, help="contamination rate in [0, 1)")
    parser.add_argument("--M", type=float, required=True, help="second-moment bound")
    parser.add_argument("--delta", type=float, default=0.01, help="confidence parameter")
    parser.add_argument("--A", type=float, default=float(np.log(2.0)), help="influence-function bound")
    parser.add_argument("--B", type=float, default=2.0, help="bias-level constant (> 1)")
    if with_v:
        parser.add_argument("--V", type=float, default=None, help="variance bound (two-stage estimation)")


def build_parser():
    parser = _Parser(prog="rccat", description="Robust offline change detection.")
    sub = parser.add_subparsers(dest="command", required=True)
    subparsers = {}

    p = sub.add_parser("detect", parents=[], help="detect change points in a CSV series")
    p.add_argument("input", help="CSV file with a 'value' or 't,value' layout")
    p.add_argument("--w", type=int, required=True, help="half-window length")
    _add_estimator_flags(p)
    p.add_argument("--b", type=float, default=None, help="detection threshold (default: derived)")
    p.add_argument(
        "--threshold-mode",
        choices=("theory", "practical"),
        default="theory",
        help="derived-threshold flavor when --b is omitted",
    )
    p.add_argument("--lambda", dest="lam", type=float, default=2.0, help="local-maximizer neighborhood factor")
    p.add_argument("--method", choices=("rccat", "arc"), default="rccat")
    p.add_argument(
        "--alpha-mode",
        choices=("thm1", "shifted"),
        default="thm1",
        help="window estimator: plain soft-truncation scale or the two-stage variant (--V required)",
    )
    p.add_argument("--shift-k", type=int, default=None, help="centering sample size for --alpha-mode shifted")
    p.add_argument("--out", default=None, help="write the JSON detection report here")
    p.add_argument("--trace-csv", default=None, help="write position,score,candidate,detected rows here")
    p.add_argument("--config", default=None)
    subparsers["detect"] = p

    p = sub.add_parser("simulate", help="generate a synthetic (optionally contaminated) series")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--tau", type=_int_list, default=(), help="change indices, e.g. 500,1000")
    p.add_argument("--means", type=_float_list, required=True, help="segment means, one more than --tau")
    p.add_argument("--noise", type=_noise_model, default=StudentT(), help="student_t[:df] | gaussian[:sigma] | garch[:base,feedback,cap]")
    p.add_argument("--eta", type=float, default=None, help="contamination rate (omit for a clean series)")
    p.add_argument("--k0", type=int, default=100, help="minimum budget window")
    p.add_argument("--outliers", type=_outlier_model, default=FixedOutliers(), help="pareto[:shape] | fixed[:value] | fixed_symmetric[:magnitude]")
    p.add_argument("--placement", choices=("bernoulli", "block_exact"), default="bernoulli")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--truth-out", default=None, help="write ground truth JSON here")
    p.add_argument("--config", default=None)
    subparsers["simulate"] = p

    p = sub.add_parser("bench", help="run the benchmark grid and print the table")
    p.add_argument("--setting", type=int, choices=(1, 2, 3), default=1)
    p.add_argument("--n", type=int, default=1500)
    p.add_argument("--reps", type=int, default=100)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--w-grid", type=_int_list, default=(80, 100, 120))
    p.add_argument("--eta-grid", type=_float_list, default=(0.05, 0.1, 0.2, 0.3, 0.4))
    p.add_argument("--method", choices=("rccat", "arc", "both"), default="both")
    p.add_argument("--M", type=float, default=5.0)
    p.add_argument("--delta", type=float, default=0.01)
    p.add_argument("--lambda", dest="lam", type=float, default=2.0)
    p.add_argument("--k0", type=int, default=100)
    p.add_argument("--means", type=_float_list, default=(0.0, 2.0, 0.0))
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out-csv", default=None)
    p.add_argument("--out-txt", default=None)
    p.add_argument("--config", default=None)
    subparsers["bench"] = p

    p = sub.add_parser("estimate", help="robust mean of a CSV column with its deviation radius")
    p.add_argument("input")
    _add_estimator_flags(p)
    p.add_argument("--shifted", action="store_true", help="use the two-stage centered estimator (--V required)")
    p.add_argument("--k", type=int, default=None, help="centering sample size for --shifted")
    p.add_argument("--config", default=None)
    subparsers["estimate"] = p

    p = sub.add_parser("convert-eta", help="mixture outlier probability -> window budget rate")
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k0", type=int, required=True)
    p.add_argument("--strict", action="store_true", help="error instead of clamping when the rate exceeds 1")
    p.add_argument("--config", default=None)
    subparsers["convert-eta"] = p

    return parser, subparsers


def _load_config_file(path: str) -> dict:
    entries = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read config {path}: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise DataError(f"{path}: line {lineno}: expected 'key = value'")
        key, _, value = stripped.partition("=")
        entries[key.strip().replace("-", "_")] = value.strip()
    return entries


def _apply_config_defaults(subparser, path: str) -> None:
    entries = _load_config_file(path)
    actions = {}
    for action in subparser._actions:
        for opt in action.option_strings:
            actions[opt.lstrip("-").replace("-", "_")] = action
        actions.setdefault(action.dest, action)
    for key, raw in entries.items():
        action = actions.get(key)
        if action is None or key == "config":
            raise DataError(f"{path}: unknown config key {key!r}")
        if isinstance(action, (argparse._StoreTrueAction, argparse._StoreFalseAction)):
            action.default = raw.lower() in ("1", "true", "yes", "on")
        elif action.type is not None:
            try:
                action.default = action.type(raw)
            except ValueError as exc:
                raise DataError(f"{path}: bad value for {key!r}: {exc}") from exc
        else:
            action.default = raw


def _write_trace_csv(report, path) -> None:
    trace = report.trace
    candidates = set(int(j) for j in report.candidates)
    detected = set(int(j) for j in report.change_points)
    lines = ["position,score,candidate,detected"]
    for pos, score in zip(trace.positions, trace.scores):
        j = int(pos)
        lines.append(
            f"{j},{float(score)!r},{int(j in candidates)},{int(j in detected)}"
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _handle_detect(args) -> int:
    series = load_csv(args.input)
    est_cfg = EstimatorConfig(
        M=args.M, eta=args.eta, delta=args.delta, A=args.A, B=args.B, V=args.V
    )
    if args.b is not None:
        threshold = args.b
    else:
        threshold = default_threshold(est_cfg, practical=args.threshold_mode == "practical")
    cfg = DetectorConfig(
        w=args.w, b=threshold, lam=args.lam, alpha=scan_alpha(est_cfg, args.w)
    )
    if args.method == "arc":
        report = arc_detect(series, cfg, RumeConfig(eta=args.eta))
    elif args.alpha_mode == "shifted":
        trace = compute_trace_shifted(series, args.w, est_cfg, args.shift_k)
        report = report_from_trace(trace, cfg)
    else:
        report = detect(series, cfg)
    print(
        f"n={len(series)} method={args.method} w={args.w} b={threshold:.6g} "
        f"candidates={report.candidates.tolist()} "
        f"change_points={report.change_points.tolist()}"
    )
    if args.out:
        write_report(report, args.out)
        print(f"report written to {args.out}")
    if args.trace_csv:
        _write_trace_csv(report, args.trace_csv)
        print(f"trace written to {args.trace_csv}")
    return 0


def _handle_simulate(args) -> int:
    spec = SignalSpec(n=args.n, tau=args.tau, segment_means=args.means, noise=args.noise)
    seed = _resolve_seed(args.seed)
    series, truth = gen_signal(spec, derived_rng(seed, 0))
    corrupted_indices: list[int] = []
    if args.eta is not None:
        contamination = ContaminationSpec(
            eta=args.eta, k0=args.k0, outliers=args.outliers, placement=args.placement
        )
        series, mask = apply_contamination(series, contamination, derived_rng(seed, 1))
        corrupted_indices = [int(i) for i in np.flatnonzero(mask)]
    write_csv(series, args.out)
    print(f"series written to {args.out} (n={args.n}, seed={seed})")
    if args.truth_out:
        payload = {
            "n": truth.n,
            "tau": list(truth.tau),
            "segment_means": list(truth.segment_means),
            "seed": seed,
            "corrupted_indices": corrupted_indices,
        }
        Path(args.truth_out).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
        print(f"truth written to {args.truth_out}")
    return 0


def _handle_bench(args) -> int:
    scenario = BenchmarkScenario(
        setting=args.setting,
        n=args.n,
        eta_grid=args.eta_grid,
        w_grid=args.w_grid,
        replications=args.reps,
        method=args.method,
        master_seed=_resolve_seed(args.seed),
        M=args.M,
        delta=args.delta,
        lam=args.lam,
        k0=args.k0,
        segment_means=args.means,
        workers=args.workers,
    )
    result = run_benchmark(scenario)
    table = format_table(result)
    sys.stdout.write(table)
    if args.out_txt:
        Path(args.out_txt).write_text(table, encoding="utf-8")
    if args.out_csv:
        Path(args.out_csv).write_text(result_to_csv(result), encoding="utf-8")
    return 0


def _handle_estimate(args) -> int:
    series = load_csv(args.input)
    cfg = EstimatorConfig(
        M=args.M, eta=args.eta, delta=args.delta, A=args.A, B=args.B, V=args.V
    )
    n = len(series)
    if args.shifted:
        k = args.k if args.k is not None else n // 2
        estimate = shifting_device_estimate(series.values, cfg, k)
        bound = shifted_deviation_radius(cfg, n, k)
    else:
        bound = deviation_radius(cfg, n)
        estimate = catoni_estimate(series.values, bound.alpha_used)
    print(
        json.dumps(
            {
                "n": n,
                "estimate": estimate,
                "radius": bound.radius,
                "confidence": bound.confidence,
                "alpha": bound.alpha_used,
            },
            indent=2,
        )
    )
    return 0


def _handle_convert_eta(args) -> int:
    print(huber_to_eta(args.epsilon, args.beta, args.n, args.k0, strict=args.strict))
    return 0


_HANDLERS = {
    "detect": _handle_detect,
    "simulate": _handle_simulate,
    "bench": _handle_bench,
    "estimate": _handle_estimate,
    "convert-eta": _handle_convert_eta,
}


def cli_main(argv=None) -> int:
    parser, subparsers = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "config", None):
            _apply_config_defaults(subparsers[args.command], args.config)
            args = parser.parse_args(argv)
        return _HANDLERS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:
        code = exc.code
        return 0 if code in (None, 0) else int(code)


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
