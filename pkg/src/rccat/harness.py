"""Benchmark harness, detection-error metrics, and CSV/JSON plumbing."""

from __future__ import annotations

import csv
import hashlib
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .baseline import RumeConfig, arc_detect
from .datagen import (
    ContaminationSpec,
    FixedOutliers,
    FixedSymmetricOutliers,
    OutlierModel,
    ParetoOutliers,
    SignalSpec,
    StudentT,
    apply_contamination,
    derived_rng,
    gen_signal,
)
from .detector import (
    DetectionReport,
    DetectorConfig,
    ScanTrace,
    default_threshold,
    detect,
    scan_alpha,
)
from .estimators import LN2, EstimatorConfig
from .series import TimeSeries

SCHEMA_VERSION = 1


class DataError(Exception):
    """Malformed or unusable input data (bad CSV rows, empty files, ...)."""


# ----------------------------------------------------------------------
# CSV input/output


def load_csv(path) -> TimeSeries:
    """Read a series from CSV: a ``value`` column or ``t,value`` columns,
    header row optional.  Parse failures name the offending line."""
    path = Path(path)
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc

    rows = [
        (lineno, [cell.strip() for cell in cells])
        for lineno, cells in enumerate(csv.reader(raw.splitlines()), start=1)
        if any(cell.strip() for cell in cells)
    ]
    if not rows:
        raise DataError(f"{path}: file contains no data")

    def parse_cell(lineno, cell):
        try:
            value = float(cell)
        except ValueError:
            raise DataError(f"{path}: line {lineno}: not a number: {cell!r}") from None
        if not math.isfinite(value):
            raise DataError(f"{path}: line {lineno}: non-finite value {cell!r}")
        return value

    first_lineno, first = rows[0]
    header = None
    try:
        [float(cell) for cell in first]
    except ValueError:
        header = [cell.lower() for cell in first]
        if header not in (["value"], ["t", "value"]):
            raise DataError(
                f"{path}: line {first_lineno}: expected header 'value' or "
                f"'t,value', got {','.join(first)!r}"
            ) from None
        rows = rows[1:]
        if not rows:
            raise DataError(f"{path}: no data rows after header")

    ncols = len(header) if header else len(rows[0][1])
    if ncols not in (1, 2):
        raise DataError(
            f"{path}: line {rows[0][0]}: expected 1 or 2 columns, got {ncols}"
        )
    values, stamps = [], []
    for lineno, cells in rows:
        if len(cells) != ncols:
            raise DataError(
                f"{path}: line {lineno}: expected {ncols} columns, got {len(cells)}"
            )
        parsed = [parse_cell(lineno, cell) for cell in cells]
        values.append(parsed[-1])
        if ncols == 2:
            stamps.append(parsed[0])
    try:
        return TimeSeries(
            np.asarray(values), np.asarray(stamps) if stamps else None
        )
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from exc


def write_csv(series: TimeSeries, path) -> None:
    """Write a series as CSV with a header row, round-trippable exactly."""
    path = Path(path)
    lines = []
    if series.timestamps is None:
        lines.append("value")
        lines.extend(repr(float(v)) for v in series.values)
    else:
        lines.append("t,value")
        lines.extend(
            f"{float(t)!r},{float(v)!r}"
            for t, v in zip(series.timestamps, series.values)
        )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


# ----------------------------------------------------------------------
# detection report serialization


def report_to_dict(report: DetectionReport) -> dict:
    from rccat import __version__

    cfg = report.config_used
    return {
        "schema_version": SCHEMA_VERSION,
        "package_version": __version__,
        "config": {"w": cfg.w, "b": cfg.b, "lambda": cfg.lam, "alpha": cfg.alpha},
        "change_points": [int(j) for j in report.change_points],
        "candidates": [int(j) for j in report.candidates],
        "trace": {
            "start": report.trace.start,
            "w": report.trace.w,
            "scores": [float(s) for s in report.trace.scores],
        },
    }


def report_from_dict(payload: dict) -> DetectionReport:
    if payload.get("schema_version") != SCHEMA_VERSION:
        raise DataError(
            f"unsupported report schema version {payload.get('schema_version')!r}"
        )
    cfg = payload["config"]
    trace = payload["trace"]
    return DetectionReport(
        change_points=np.asarray(payload["change_points"], dtype=np.int64),
        candidates=np.asarray(payload["candidates"], dtype=np.int64),
        trace=ScanTrace(
            scores=np.asarray(trace["scores"], dtype=np.float64),
            w=int(trace["w"]),
            start=int(trace["start"]),
        ),
        config_used=DetectorConfig(
            w=int(cfg["w"]),
            b=float(cfg["b"]),
            lam=float(cfg["lambda"]),
            alpha=float(cfg["alpha"]),
        ),
    )


def write_report(report: DetectionReport, path) -> None:
    Path(path).write_text(
        json.dumps(report_to_dict(report), indent=2) + "\n", encoding="utf-8"
    )


def read_report(path) -> DetectionReport:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot read report {path}: {exc}") from exc
    return report_from_dict(payload)


# ----------------------------------------------------------------------
# detection-error metrics


def hausdorff_distance(a, b) -> float:
    """Symmetric Hausdorff distance between two finite index sets."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.size == 0 and b.size == 0:
        return 0.0
    if a.size == 0 or b.size == 0:
        return float("inf")
    gaps = np.abs(a[:, None] - b[None, :])
    return float(max(gaps.min(axis=1).max(), gaps.min(axis=0).max()))


def detection_error(
    detected,
    truth,
    mode: str = "matched",
    scores=None,
    series_length: int | None = None,
) -> float:
    """Average |detected - true| location error.

    ``topk``: keep the K = len(truth) highest-score detections (stable
    tie-break toward lower index), sort, pair with sorted truth, and average
    the absolute gaps; a shortfall of detections costs series_length/K per
    missing pair.  ``matched``: pair i-th sorted detection with i-th sorted
    truth when the counts agree, else fall back to the Hausdorff distance.
    """
    truth_arr = np.sort(np.asarray(truth, dtype=np.int64))
    det = np.asarray(detected, dtype=np.int64)
    if mode == "topk":
        if truth_arr.size == 0:
            raise ValueError("topk mode needs a non-empty truth")
        if scores is None:
            raise ValueError("topk mode needs the detection scores")
        score_arr = np.asarray(scores, dtype=np.float64)
        if score_arr.shape != det.shape:
            raise ValueError("scores must align with detected indices")
        k = truth_arr.size
        order = np.argsort(-score_arr, kind="stable")
        top = np.sort(det[order[:k]])
        total = float(np.sum(np.abs(top - truth_arr[: top.size])))
        missing = k - top.size
        if missing:
            if series_length is None:
                raise ValueError("series_length needed to score missing detections")
            total += missing * (series_length / k)
        return total / k
    if mode == "matched":
        det = np.sort(det)
        if det.size != truth_arr.size:
            return hausdorff_distance(det, truth_arr)
        if det.size == 0:
            return 0.0
        return float(np.mean(np.abs(det - truth_arr)))
    raise ValueError(f"unknown mode {mode!r}")


# ----------------------------------------------------------------------
# benchmark scenarios


def setting_outliers(setting: int) -> OutlierModel:
    """Outlier model of the three benchmark settings: heavy-tailed Pareto
    draws, a one-sided constant, or a symmetric constant."""
    if setting == 1:
        return ParetoOutliers(shape=2.0)
    if setting == 2:
        return FixedOutliers(value=100.0)
    if setting == 3:
        return FixedSymmetricOutliers(magnitude=100.0)
    raise ValueError(f"unknown setting {setting}; pass explicit outliers instead")


@dataclass(frozen=True)
class BenchmarkScenario:
    """One benchmark run: a contamination setting crossed with eta and w
    grids, replicated with derived seeds.

    The signal protocol is fixed: Student-t(3) inliers around
    ``segment_means`` with changes at ``tau`` (default: two equally spaced
    changes at n/3 and 2n/3).
    """

    setting: int = 1
    n: int = 1500
    eta_grid: tuple[float, ...] = (0.05, 0.1, 0.2, 0.3, 0.4)
    w_grid: tuple[int, ...] = (80, 100, 120)
    replications: int = 100
    method: str = "both"
    master_seed: int = 0
    M: float = 5.0
    delta: float = 0.01
    A: float = LN2
    B: float = 2.0
    lam: float = 2.0
    k0: int = 100
    tau: tuple[int, ...] | None = None
    segment_means: tuple[float, ...] = (0.0, 2.0, 0.0)
    outliers: OutlierModel | None = None
    workers: int = 1

    def __post_init__(self):
        if not self.eta_grid or not self.w_grid:
            raise ValueError("eta and w grids must be non-empty")
        if self.replications < 1:
            raise ValueError("replications must be at least 1")
        if self.method not in ("rccat", "arc", "both"):
            raise ValueError("method must be 'rccat', 'arc', or 'both'")
        if self.outliers is None:
            setting_outliers(self.setting)

    @property
    def resolved_tau(self) -> tuple[int, ...]:
        if self.tau is not None:
            return tuple(int(t) for t in self.tau)
        return (self.n // 3, 2 * self.n // 3)

    @property
    def resolved_outliers(self) -> OutlierModel:
        return self.outliers if self.outliers is not None else setting_outliers(self.setting)

    def methods(self) -> tuple[str, ...]:
        return ("rccat", "arc") if self.method == "both" else (self.method,)

    def fingerprint(self) -> str:
        payload = asdict(self)
        payload.pop("workers")
        payload["outliers"] = repr(self.resolved_outliers)
        return hashlib.sha256(
            json.dumps(payload, sort_keys=True, default=repr).encode()
        ).hexdigest()[:16]


@dataclass(frozen=True)
class CellResult:
    """Aggregate over the replications of one (method, w, eta) cell."""

    method: str
    w: int
    eta: float
    mean_error: float
    se_error: float
    replications: int
    flagged: int
    mean_candidates: float
    mean_detections: float
    runtime_s: float


@dataclass(frozen=True)
class BenchmarkResult:
    setting: int
    n: int
    master_seed: int
    replications: int
    config_hash: str
    w_grid: tuple[int, ...]
    eta_grid: tuple[float, ...]
    methods: tuple[str, ...]
    cells: tuple[CellResult, ...]

    def cell(self, method: str, w: int, eta: float) -> CellResult:
        for cell in self.cells:
            if cell.method == method and cell.w == w and cell.eta == eta:
                return cell
        raise KeyError(f"no cell ({method}, w={w}, eta={eta})")


def _run_cell(scenario: BenchmarkScenario, wi: int, ei: int) -> list[CellResult]:
    w = scenario.w_grid[wi]
    eta = scenario.eta_grid[ei]
    methods = scenario.methods()
    spec = SignalSpec(
        n=scenario.n,
        tau=scenario.resolved_tau,
        segment_means=scenario.segment_means,
        noise=StudentT(3.0),
    )
    contamination = ContaminationSpec(
        eta=eta, k0=scenario.k0, outliers=scenario.resolved_outliers
    )
    est_cfg = EstimatorConfig(
        M=scenario.M, eta=eta, delta=scenario.delta, A=scenario.A, B=scenario.B
    )
    cfg = DetectorConfig(
        w=w,
        b=default_threshold(est_cfg),
        lam=scenario.lam,
        alpha=scan_alpha(est_cfg, w),
    )
    rume = RumeConfig(eta=eta)
    truth = np.asarray(scenario.resolved_tau, dtype=np.int64)

    errors = {m: [] for m in methods}
    candidates = {m: [] for m in methods}
    detections = {m: [] for m in methods}
    flagged = {m: 0 for m in methods}
    runtime = {m: 0.0 for m in methods}
    for rep in range(scenario.replications):
        clean, _ = gen_signal(spec, derived_rng(scenario.master_seed, scenario.setting, ei, rep, 0))
        series, _ = apply_contamination(
            clean, contamination, derived_rng(scenario.master_seed, scenario.setting, ei, rep, 1)
        )
        for m in methods:
            start = time.perf_counter()
            if m == "rccat":
                report = detect(series, cfg)
            else:
                report = arc_detect(series, cfg, rume)
            runtime[m] += time.perf_counter() - start
            cands = report.candidates
            errors[m].append(
                detection_error(
                    cands,
                    truth,
                    mode="topk",
                    scores=report.trace.score_at(cands),
                    series_length=scenario.n,
                )
            )
            candidates[m].append(cands.size)
            detections[m].append(report.change_points.size)
            if cands.size < truth.size:
                flagged[m] += 1

    out = []
    for m in methods:
        errs = np.asarray(errors[m])
        out.append(
            CellResult(
                method=m,
                w=w,
                eta=eta,
                mean_error=float(errs.mean()),
                se_error=float(errs.std(ddof=1) / math.sqrt(errs.size))
                if errs.size > 1
                else 0.0,
                replications=scenario.replications,
                flagged=flagged[m],
                mean_candidates=float(np.mean(candidates[m])),
                mean_detections=float(np.mean(detections[m])),
                runtime_s=runtime[m],
            )
        )
    return out


def run_benchmark(scenario: BenchmarkScenario) -> BenchmarkResult:
    """Run every (w, eta) cell of the scenario; deterministic given the
    master seed (runtimes aside).  ``workers > 1`` fans the cells out to a
    process pool; aggregation is keyed by cell, so the result is identical
    either way."""
    grid = [(wi, ei) for wi in range(len(scenario.w_grid)) for ei in range(len(scenario.eta_grid))]
    if scenario.workers > 1:
        with ProcessPoolExecutor(max_workers=scenario.workers) as pool:
            cell_lists = list(
                pool.map(_run_cell, *zip(*((scenario, wi, ei) for wi, ei in grid)))
            )
    else:
        cell_lists = [_run_cell(scenario, wi, ei) for wi, ei in grid]
    cells = tuple(cell for cell_list in cell_lists for cell in cell_list)
    return BenchmarkResult(
        setting=scenario.setting,
        n=scenario.n,
        master_seed=scenario.master_seed,
        replications=scenario.replications,
        config_hash=scenario.fingerprint(),
        w_grid=scenario.w_grid,
        eta_grid=scenario.eta_grid,
        methods=scenario.methods(),
        cells=cells,
    )


def format_table(result: BenchmarkResult) -> str:
    """Aligned text table: one block per w, one row per method, one column
    per eta.  Deterministic for a given result (no runtimes)."""
    lines = [
        f"Setting {result.setting}  (n={result.n}, "
        f"replications={result.replications}, seed={result.master_seed}, "
        f"config={result.config_hash})"
    ]
    header = "  ".join(f"{eta:>8.2f}" for eta in result.eta_grid)
    for w in result.w_grid:
        lines.append("")
        lines.append(f"w = {w}")
        lines.append(f"{'eta':>8}  {header.strip()}")
        for method in result.methods:
            row = "  ".join(
                f"{result.cell(method, w, eta).mean_error:>8.2f}"
                for eta in result.eta_grid
            )
            lines.append(f"{method:>8}  {row}")
    return "\n".join(lines) + "\n"


def result_to_csv(result: BenchmarkResult) -> str:
    """Flat per-cell CSV of the benchmark result (no runtimes)."""
    lines = [
        "setting,w,eta,method,mean_error,se_error,replications,"
        "flagged,mean_candidates,mean_detections"
    ]
    for cell in result.cells:
        lines.append(
            f"{result.setting},{cell.w},{cell.eta!r},{cell.method},"
            f"{cell.mean_error!r},{cell.se_error!r},{cell.replications},"
            f"{cell.flagged},{cell.mean_candidates!r},{cell.mean_detections!r}"
        )
    return "\n".join(lines) + "\n"
