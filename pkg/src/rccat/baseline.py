"""Comparison detector built on the shortest-interval robust mean (RUME).

The estimator splits a sample in half, finds the shortest interval covering
a (1-eta) fraction of the first half's points, and averages the second-half
points that fall inside it.  Plugged into the same scan/local-maximizer
pipeline as the primary detector (the ARC approach), it serves as the
benchmark baseline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .detector import DetectionReport, DetectorConfig, ScanTrace, report_from_trace
from .series import as_values


@dataclass(frozen=True)
class RumeConfig:
    """Contamination rate and the optional seed for a random half-split.

    With ``split_seed`` unset, the halves are the even- and odd-indexed
    points (deterministic, avoids temporal bias inside a window); with a
    seed, membership is a seeded random partition.  Halves differ in size
    by at most one either way.
    """

    eta: float
    split_seed: int | None = None

    def __post_init__(self):
        if not 0.0 <= self.eta < 1.0:
            raise ValueError("eta must lie in [0, 1)")


def _coverage_count(half_size: int, eta: float) -> int:
    # ceil((1 - eta) * h), guarded against float round-up at exact integers
    return int(math.ceil((1.0 - eta) * half_size - 1e-12))


def _shortest_interval(sorted_first: np.ndarray, need: int) -> tuple[float, float]:
    widths = sorted_first[need - 1 :] - sorted_first[: sorted_first.size - need + 1]
    i = int(np.argmin(widths))
    return float(sorted_first[i]), float(sorted_first[i + need - 1])


def rume_estimate(data, cfg: RumeConfig) -> float:
    """Shortest-interval robust location estimate.

    Sorts the first half, takes the shortest closed interval containing at
    least ceil((1-eta)*h) of its h points (leftmost on ties), and returns
    the mean of the second-half points inside it, or the interval midpoint
    if none land there.  Always lies within [min(data), max(data)].
    """
    values = np.asarray(data, dtype=np.float64)
    m = values.size
    if m < 4:
        raise ValueError("need at least 4 points")
    if cfg.split_seed is None:
        first, second = values[0::2], values[1::2]
    else:
        perm = np.random.default_rng(cfg.split_seed).permutation(m)
        first, second = values[perm[: (m + 1) // 2]], values[perm[(m + 1) // 2 :]]
    need = _coverage_count(first.size, cfg.eta)
    if need < 1:
        raise ValueError("coverage count must be at least 1")
    lo, hi = _shortest_interval(np.sort(first), need)
    inside = second[(second >= lo) & (second <= hi)]
    if inside.size == 0:
        return (lo + hi) / 2.0
    return float(np.mean(inside))


def arc_trace(series, w: int, cfg: RumeConfig) -> ScanTrace:
    """Scan scores from per-window shortest-interval estimates.

    Windows are processed as one batch (sort along the window axis), but
    each window still pays the O(w log w) sort, so the whole trace is
    O(n * w * log w).  With ``split_seed`` set, every window draws its own
    random split from one seeded stream.
    """
    values = as_values(series)
    n = values.size
    if n <= 2 * w:
        raise ValueError(f"need n > 2w (n={n}, w={w})")
    windows = sliding_window_view(values, w)
    left = windows[0 : n - 2 * w]
    right = windows[w + 1 : n - w + 1]
    stacked = np.concatenate([left, right], axis=0)

    if cfg.split_seed is None:
        first, second = stacked[:, 0::2], stacked[:, 1::2]
    else:
        rng = np.random.default_rng(cfg.split_seed)
        perms = rng.permuted(
            np.broadcast_to(np.arange(w), stacked.shape).copy(), axis=1
        )
        half = (w + 1) // 2
        first = np.take_along_axis(stacked, perms[:, :half], axis=1)
        second = np.take_along_axis(stacked, perms[:, half:], axis=1)

    need = _coverage_count(first.shape[1], cfg.eta)
    if need < 1:
        raise ValueError("coverage count must be at least 1")
    sorted_first = np.sort(first, axis=1)
    widths = (
        sorted_first[:, need - 1 :] - sorted_first[:, : first.shape[1] - need + 1]
    )
    pick = np.argmin(widths, axis=1)
    lo = np.take_along_axis(sorted_first, pick[:, None], axis=1)[:, 0]
    hi = np.take_along_axis(sorted_first, (pick + need - 1)[:, None], axis=1)[:, 0]
    inside = (second >= lo[:, None]) & (second <= hi[:, None])
    counts = inside.sum(axis=1)
    sums = np.where(inside, second, 0.0).sum(axis=1)
    estimates = np.where(
        counts > 0, sums / np.maximum(counts, 1), (lo + hi) / 2.0
    )

    m = n - 2 * w
    scores = np.abs(estimates[m:] - estimates[:m])
    return ScanTrace(scores=scores, w=w, start=w)


def arc_detect(series, cfg: DetectorConfig, rume: RumeConfig) -> DetectionReport:
    """Detection pass identical to the primary pipeline, with the scan
    built from shortest-interval estimates."""
    values = as_values(series)
    if values.size <= 2 * cfg.lam * cfg.w:
        raise ValueError(
            f"need n > 2*lam*w (n={values.size}, lam={cfg.lam}, w={cfg.w})"
        )
    return report_from_trace(arc_trace(values, cfg.w, rume), cfg)
