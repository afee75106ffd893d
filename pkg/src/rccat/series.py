"""Shared series containers.

All indices in this package are 0-based. A change index ``tau`` marks the
first observation drawn from the new segment, i.e. ``values[:tau]`` carries
the old mean and ``values[tau:]`` the new one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Ordered sequence of real observations with optional timestamps."""

    values: np.ndarray
    timestamps: np.ndarray | None = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1:
            raise ValueError("series values must be one-dimensional")
        if not np.all(np.isfinite(values)):
            raise ValueError("series values must all be finite")
        object.__setattr__(self, "values", values)
        if self.timestamps is not None:
            ts = np.asarray(self.timestamps, dtype=np.float64)
            if ts.shape != values.shape:
                raise ValueError("timestamps must match values in length")
            if ts.size > 1 and not np.all(np.diff(ts) > 0):
                raise ValueError("timestamps must strictly increase")
            object.__setattr__(self, "timestamps", ts)

    def __len__(self) -> int:
        return int(self.values.size)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TimeSeries):
            return NotImplemented
        if not np.array_equal(self.values, other.values):
            return False
        if (self.timestamps is None) != (other.timestamps is None):
            return False
        return self.timestamps is None or np.array_equal(
            self.timestamps, other.timestamps
        )


def as_values(series) -> np.ndarray:
    """Coerce a TimeSeries, array, or plain sequence to a float64 array."""
    if isinstance(series, TimeSeries):
        return series.values
    values = np.asarray(series, dtype=np.float64)
    if values.ndim != 1:
        raise ValueError("series must be one-dimensional")
    return values


@dataclass(frozen=True)
class GroundTruth:
    """True change locations and per-segment means for a simulated series.

    ``tau`` holds K strictly increasing change indices in (0, n); segment k
    spans ``values[tau[k-1]:tau[k]]`` and has mean ``segment_means[k]``.
    """

    n: int
    tau: tuple[int, ...]
    segment_means: tuple[float, ...]

    def __post_init__(self):
        tau = tuple(int(t) for t in self.tau)
        means = tuple(float(m) for m in self.segment_means)
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "segment_means", means)
        if self.n < 1:
            raise ValueError("n must be positive")
        if len(means) != len(tau) + 1:
            raise ValueError("need exactly one segment mean per segment")
        bounds = (0, *tau, self.n)
        if any(b <= a for a, b in zip(bounds, bounds[1:])):
            raise ValueError("change indices must strictly increase inside (0, n)")
        if any(a == b for a, b in zip(means, means[1:])):
            raise ValueError("consecutive segment means must differ (jump size > 0)")

    @property
    def min_spacing(self) -> int:
        """Smallest gap between change points, with 0 and n as sentinels."""
        bounds = (0, *self.tau, self.n)
        return min(b - a for a, b in zip(bounds, bounds[1:]))

    @property
    def jump_size(self) -> float:
        """Smallest absolute mean shift across a change; inf when K = 0."""
        if not self.tau:
            return float("inf")
        return min(
            abs(b - a) for a, b in zip(self.segment_means, self.segment_means[1:])
        )

    def mean_profile(self) -> np.ndarray:
        """Per-index mean sequence implied by the segments."""
        profile = np.empty(self.n, dtype=np.float64)
        bounds = (0, *self.tau, self.n)
        for mean, lo, hi in zip(self.segment_means, bounds, bounds[1:]):
            profile[lo:hi] = mean
        return profile
