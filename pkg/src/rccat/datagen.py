"""Seeded synthetic series: piecewise-constant means, heavy-tailed or
martingale-difference noise, and window-budgeted adversarial contamination.

Every generator is deterministic given its seed.  Seeds are ordinary ints
fed to numpy's PCG64 via SeedSequence; replication streams are derived with
``derived_rng(master, *key)`` so each replication is independently
re-runnable.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .series import GroundTruth, TimeSeries


def derived_rng(master_seed: int, *key: int) -> np.random.Generator:
    """Independent child stream of ``master_seed`` addressed by ``key``."""
    return np.random.default_rng(
        np.random.SeedSequence(master_seed, spawn_key=tuple(int(k) for k in key))
    )


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


# ----------------------------------------------------------------------
# inlier noise models


@dataclass(frozen=True)
class StudentT:
    """i.i.d. Student-t noise; df=3 gives the heavy-tailed benchmark inliers."""

    df: float = 3.0

    def __post_init__(self):
        if self.df <= 2.0:
            raise ValueError("df must exceed 2 so the second moment is finite")

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.standard_t(self.df, size=n)


@dataclass(frozen=True)
class Gaussian:
    """i.i.d. Gaussian noise; sigma=0 yields a noiseless series."""

    sigma: float = 1.0

    def __post_init__(self):
        if self.sigma < 0.0:
            raise ValueError("sigma must be nonnegative")

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.normal(0.0, self.sigma, size=n)


@dataclass(frozen=True)
class MartingaleGarch:
    """Non-i.i.d. martingale-difference noise z_t = sigma_t * e_t with
    sigma_t^2 = min(base_var + feedback * z_{t-1}^2, var_cap).

    The cap keeps the conditional second moment below ``var_cap``, so the
    estimator guarantees apply with M >= var_cap even though the samples
    are dependent.
    """

    base_var: float = 0.5
    feedback: float = 0.3
    var_cap: float = 4.0

    def __post_init__(self):
        if self.base_var <= 0.0:
            raise ValueError("base_var must be positive")
        if not 0.0 <= self.feedback < 1.0:
            raise ValueError("feedback must lie in [0, 1)")
        if self.var_cap < self.base_var:
            raise ValueError("var_cap must be at least base_var")

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        shocks = rng.standard_normal(n)
        out = np.empty(n)
        prev_sq = 0.0
        for t in range(n):
            var = min(self.base_var + self.feedback * prev_sq, self.var_cap)
            out[t] = math.sqrt(var) * shocks[t]
            prev_sq = out[t] * out[t]
        return out


# ----------------------------------------------------------------------
# signal generation


@dataclass(frozen=True)
class SignalSpec:
    """Piecewise-constant mean signal: K change indices in (0, n) and K+1
    segment means, plus the inlier noise model."""

    n: int
    tau: tuple[int, ...]
    segment_means: tuple[float, ...]
    noise: StudentT | Gaussian | MartingaleGarch = field(default_factory=StudentT)

    def ground_truth(self) -> GroundTruth:
        return GroundTruth(n=self.n, tau=tuple(self.tau), segment_means=tuple(self.segment_means))


def gen_signal(spec: SignalSpec, seed) -> tuple[TimeSeries, GroundTruth]:
    """Generate one series: segment means exactly as specified plus noise."""
    truth = spec.ground_truth()
    rng = _as_rng(seed)
    values = truth.mean_profile() + spec.noise.sample(rng, spec.n)
    return TimeSeries(values), truth


# ----------------------------------------------------------------------
# contamination


@dataclass(frozen=True)
class ParetoOutliers:
    """Classical Pareto draws with minimum 1 (scale 1, used raw)."""

    shape: float = 2.0

    def __post_init__(self):
        if self.shape <= 0.0:
            raise ValueError("shape must be positive")

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.pareto(self.shape, size=n) + 1.0


@dataclass(frozen=True)
class FixedOutliers:
    """Every corrupted point set to one constant."""

    value: float = 100.0

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return np.full(n, self.value)


@dataclass(frozen=True)
class FixedSymmetricOutliers:
    """Corrupted points set to +/-magnitude, sign a fair seeded coin."""

    magnitude: float = 100.0

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        signs = np.where(rng.random(n) < 0.5, -1.0, 1.0)
        return signs * self.magnitude


@dataclass(frozen=True)
class CustomOutliers:
    """Caller-supplied draw function (rng, n) -> values."""

    draw: Callable[[np.random.Generator, int], np.ndarray]

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return np.asarray(self.draw(rng, n), dtype=np.float64)


OutlierModel = ParetoOutliers | FixedOutliers | FixedSymmetricOutliers | CustomOutliers


@dataclass(frozen=True)
class ContaminationSpec:
    """Corruption budget and mechanism.

    ``bernoulli`` placement marks each index independently with probability
    eta (the mixture-model special case).  ``block_exact`` picks
    floor(eta*k0) offsets once and corrupts them in every consecutive
    k0-block; the periodic pattern guarantees the window budget at every
    window length that is a multiple of k0, at any start.
    """

    eta: float
    k0: int
    outliers: OutlierModel = field(default_factory=FixedOutliers)
    placement: str = "bernoulli"

    def __post_init__(self):
        if not 0.0 < self.eta < 1.0:
            raise ValueError("eta must lie in (0, 1)")
        if self.k0 < 1:
            raise ValueError("k0 must be a positive integer")
        if self.placement not in ("bernoulli", "block_exact"):
            raise ValueError("placement must be 'bernoulli' or 'block_exact'")


def apply_contamination(
    series: TimeSeries, spec: ContaminationSpec, seed
) -> tuple[TimeSeries, np.ndarray]:
    """Corrupt the series per the spec; returns the new series and the
    boolean mask of corrupted positions."""
    rng = _as_rng(seed)
    values = series.values.copy()
    n = values.size
    if spec.k0 < math.log(n):
        warnings.warn(
            f"k0={spec.k0} is below log(n)={math.log(n):.1f}; the window "
            "budget is only meaningful for k0 growing like log n",
            stacklevel=2,
        )
    mask = np.zeros(n, dtype=bool)
    if spec.placement == "bernoulli":
        mask = rng.random(n) < spec.eta
    else:
        per_block = int(spec.eta * spec.k0 + 1e-12)
        if per_block > 0:
            offsets = rng.choice(spec.k0, size=per_block, replace=False)
            starts = np.arange(0, n, spec.k0)
            positions = (starts[:, None] + offsets[None, :]).ravel()
            mask[positions[positions < n]] = True
    count = int(mask.sum())
    if count:
        values[mask] = spec.outliers.sample(rng, count)
    return TimeSeries(values, series.timestamps), mask


@dataclass(frozen=True)
class BudgetCheck:
    """Result of the window-budget audit."""

    passed: bool
    sup_fraction: float
    worst_start: int
    worst_length: int
    worst_count: int


def check_budget(mask, eta: float, k0: int, slack: float = 1.0, lengths=None) -> BudgetCheck:
    """Audit a corruption mask against the window budget: over every window
    of length k >= k0 (or only the lengths given), the corrupted fraction
    must stay within eta * slack."""
    flags = np.asarray(mask, dtype=bool)
    n = flags.size
    prefix = np.concatenate([[0], np.cumsum(flags)])
    if lengths is None:
        lengths = range(k0, n + 1)
    sup_fraction = 0.0
    worst = (0, k0, 0)
    for k in lengths:
        if k > n:
            continue
        counts = prefix[k:] - prefix[: n - k + 1]
        i = int(np.argmax(counts))
        fraction = counts[i] / k
        if fraction > sup_fraction:
            sup_fraction = float(fraction)
            worst = (i, k, int(counts[i]))
    return BudgetCheck(
        passed=bool(sup_fraction <= eta * slack + 1e-12),
        sup_fraction=sup_fraction,
        worst_start=worst[0],
        worst_length=worst[1],
        worst_count=worst[2],
    )
