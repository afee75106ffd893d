"""Offline change detection by scanning robust mean differences.

The scan statistic at position j is the absolute difference between the
soft-truncation mean estimates of the w points to the right of j and the w
points to the left (j itself belongs to neither window).  Detections are
the lambda*w-local maximizers of the scan whose score clears the threshold.

All positions are 0-based; see :mod:`rccat.series` for the indexing
convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import maximum_filter1d

from .estimators import EstimatorConfig, bias_constant, psi, select_alpha, shifting_device_estimate
from .series import GroundTruth, as_values


@dataclass(frozen=True)
class DetectorConfig:
    """Inputs of the scan: half-window w, threshold b, neighborhood factor
    lam (>= 1) for local-maximizer suppression, and the estimator scale
    alpha fed to each window."""

    w: int
    b: float
    lam: float = 2.0
    alpha: float = 1.0

    def __post_init__(self):
        if self.w < 1:
            raise ValueError("w must be a positive integer")
        if self.b <= 0.0:
            raise ValueError("threshold b must be positive")
        if self.lam < 1.0:
            raise ValueError("lam must be at least 1")
        if self.alpha <= 0.0:
            raise ValueError("alpha must be positive")


@dataclass(frozen=True, eq=False)
class ScanTrace:
    """Scan scores for positions start .. start + len(scores) - 1."""

    scores: np.ndarray
    w: int
    start: int

    def __post_init__(self):
        object.__setattr__(self, "scores", np.asarray(self.scores, dtype=np.float64))

    def __len__(self) -> int:
        return int(self.scores.size)

    @property
    def positions(self) -> np.ndarray:
        return np.arange(self.start, self.start + self.scores.size)

    def score_at(self, j):
        """Score(s) at series position(s) j."""
        idx = np.asarray(j) - self.start
        if np.any(idx < 0) or np.any(idx >= self.scores.size):
            raise IndexError("position outside the scan trace")
        out = self.scores[idx]
        return float(out) if np.isscalar(j) else out

    def __eq__(self, other) -> bool:
        if not isinstance(other, ScanTrace):
            return NotImplemented
        return (
            self.w == other.w
            and self.start == other.start
            and np.array_equal(self.scores, other.scores)
        )


@dataclass(frozen=True, eq=False)
class DetectionReport:
    """Detector output: thresholded change points, the full trace, the
    pre-threshold local-maximizer candidates, and the configuration used."""

    change_points: np.ndarray
    candidates: np.ndarray
    trace: ScanTrace
    config_used: DetectorConfig

    def __post_init__(self):
        object.__setattr__(
            self, "change_points", np.asarray(self.change_points, dtype=np.int64)
        )
        object.__setattr__(
            self, "candidates", np.asarray(self.candidates, dtype=np.int64)
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, DetectionReport):
            return NotImplemented
        return (
            np.array_equal(self.change_points, other.change_points)
            and np.array_equal(self.candidates, other.candidates)
            and self.trace == other.trace
            and self.config_used == other.config_used
        )


@dataclass(frozen=True)
class AssumptionReport:
    """Pass/fail diagnostics for the consistency assumptions, with margins."""

    min_spacing: float
    spacing_required: float
    jump_size: float
    jump_required: float

    @property
    def spacing_ok(self) -> bool:
        return self.min_spacing > self.spacing_required

    @property
    def jump_ok(self) -> bool:
        return self.jump_size > self.jump_required

    @property
    def all_ok(self) -> bool:
        return self.spacing_ok and self.jump_ok


def scan_statistic(series, j: int, w: int, alpha: float) -> float:
    """Scan score at position j: |estimate(values[j+1:j+w+1]) -
    estimate(values[j-w:j])|, each window estimated by the soft-truncation
    mean at scale alpha.  Bounded by 2*alpha*ln(2).
    """
    values = as_values(series)
    n = values.size
    if not w <= j <= n - w - 1:
        raise ValueError(f"position {j} leaves no room for both windows (w={w}, n={n})")
    left = alpha * float(np.mean(psi(values[j - w : j] / alpha)))
    right = alpha * float(np.mean(psi(values[j + 1 : j + w + 1] / alpha)))
    return abs(right - left)


def compute_trace(series, cfg: DetectorConfig) -> ScanTrace:
    """Scan scores at every position w .. n-w-1 in O(n).

    The window sums of psi(x/alpha) are taken from one prefix-sum pass, so
    each position costs O(1) after the O(n) warm-up.
    """
    values = as_values(series)
    n = values.size
    w = cfg.w
    if n <= 2 * w:
        raise ValueError(f"need n > 2w (n={n}, w={w})")
    prefix = np.empty(n + 1, dtype=np.float64)
    prefix[0] = 0.0
    np.cumsum(psi(values / cfg.alpha), out=prefix[1:])
    pos = np.arange(w, n - w)
    left = prefix[pos] - prefix[pos - w]
    right = prefix[pos + w + 1] - prefix[pos + 1]
    scores = np.abs(right - left) * (cfg.alpha / w)
    return ScanTrace(scores=scores, w=w, start=w)


def compute_trace_brute(series, cfg: DetectorConfig) -> ScanTrace:
    """O(n*w) reference trace, each window summed independently.

    Kept for oracle testing against the prefix-sum path.
    """
    values = as_values(series)
    n = values.size
    w = cfg.w
    if n <= 2 * w:
        raise ValueError(f"need n > 2w (n={n}, w={w})")
    scores = np.array(
        [scan_statistic(values, j, w, cfg.alpha) for j in range(w, n - w)]
    )
    return ScanTrace(scores=scores, w=w, start=w)


def compute_trace_shifted(
    series, w: int, est_cfg: EstimatorConfig, k: int | None = None
) -> ScanTrace:
    """Scan trace built from the two-stage centered estimator per window.

    Requires est_cfg.V; O(n*w) since the two-stage estimate admits no
    sliding update.
    """
    values = as_values(series)
    n = values.size
    if n <= 2 * w:
        raise ValueError(f"need n > 2w (n={n}, w={w})")

    def est(window):
        return shifting_device_estimate(window, est_cfg, k)

    scores = np.array(
        [
            abs(est(values[j + 1 : j + w + 1]) - est(values[j - w : j]))
            for j in range(w, n - w)
        ]
    )
    return ScanTrace(scores=scores, w=w, start=w)


def local_maximizers(
    trace: ScanTrace,
    h: float,
    valid_lo: int | None = None,
    valid_hi: int | None = None,
) -> np.ndarray:
    """Positions j in [valid_lo, valid_hi] whose score is >= every trace
    score within distance < h; comparisons falling outside the trace are
    skipped.

    Exact score ties are collapsed: of each run of consecutive equal-score
    maximizers the leftmost survives, and any further tied maximizer within
    h of one already kept is dropped, so kept positions are always >= h
    apart.
    """
    if h < 1:
        raise ValueError("h must be at least 1")
    scores = trace.scores
    lo = trace.start if valid_lo is None else max(valid_lo, trace.start)
    hi = trace.start + len(trace) - 1 if valid_hi is None else min(valid_hi, trace.start + len(trace) - 1)
    if lo > hi:
        return np.empty(0, dtype=np.int64)

    reach = math.ceil(h) - 1
    if reach == 0:
        windowed_max = scores
    else:
        windowed_max = maximum_filter1d(
            scores, size=2 * reach + 1, mode="constant", cval=-np.inf
        )
    is_peak = scores >= windowed_max
    lo_i = lo - trace.start
    hi_i = hi - trace.start
    candidate_idx = np.flatnonzero(is_peak[lo_i : hi_i + 1]) + lo_i

    kept: list[int] = []
    for i in candidate_idx:
        if kept and (i + trace.start) - kept[-1] < h:
            continue
        if i > lo_i and is_peak[i - 1] and scores[i - 1] == scores[i]:
            continue
        kept.append(int(i + trace.start))
    return np.asarray(kept, dtype=np.int64)


def report_from_trace(trace: ScanTrace, cfg: DetectorConfig) -> DetectionReport:
    """Run the local-maximizer search and threshold filter on a trace."""
    n = trace.start + len(trace) + trace.w
    margin = math.ceil(cfg.lam * cfg.w)
    candidates = local_maximizers(trace, cfg.lam * cfg.w, margin, n - 1 - margin)
    if candidates.size:
        change_points = candidates[trace.score_at(candidates) > cfg.b]
    else:
        change_points = candidates
    return DetectionReport(
        change_points=change_points,
        candidates=candidates,
        trace=trace,
        config_used=cfg,
    )


def detect(series, cfg: DetectorConfig) -> DetectionReport:
    """Full detection pass: scan trace, lam*w-local maximizers, threshold."""
    values = as_values(series)
    if values.size <= 2 * cfg.lam * cfg.w:
        raise ValueError(
            f"need n > 2*lam*w (n={values.size}, lam={cfg.lam}, w={cfg.w})"
        )
    return report_from_trace(compute_trace(values, cfg), cfg)


def default_threshold(cfg: EstimatorConfig, practical: bool = False) -> float:
    """Detection threshold from the contamination bias level.

    Default is twice the asymptotic bias level, 2*c0*sqrt(M*eta), which
    suppresses false alarms; ``practical`` returns the laxer c0*sqrt(M*eta)/2
    (a quarter of the default), which detects smaller jumps and leans on the
    local-maximizer suppression to control duplicates.
    """
    level = bias_constant(cfg) * math.sqrt(cfg.M * cfg.eta)
    return level / 2.0 if practical else 2.0 * level


def scan_alpha(cfg: EstimatorConfig, w: int) -> float:
    """Estimator scale for the scan: the deviation-optimal alpha at sample
    size w, since each window holds w points."""
    return select_alpha(cfg, w)


def validate_assumptions(gt: GroundTruth, cfg: DetectorConfig) -> AssumptionReport:
    """Check the consistency preconditions against a known ground truth:
    minimal spacing > lam*w and jump size > sqrt(3*b).  Vacuously true when
    there are no change points."""
    return AssumptionReport(
        min_spacing=float(gt.min_spacing),
        spacing_required=float(cfg.lam * cfg.w),
        jump_size=float(gt.jump_size),
        jump_required=math.sqrt(3.0 * cfg.b),
    )
