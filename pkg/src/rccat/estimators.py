"""Robust mean estimation with a bounded influence function.

The estimator is the soft-truncation mean (alpha/n) * sum(psi(x_i/alpha)):
every observation passes through the bounded, non-decreasing map ``psi``
after rescaling by ``alpha``, so no single point can move the estimate by
more than 2*ln(2)*alpha/n.  With ``alpha`` chosen from the sample size and
the contamination rate, the estimate stays within an explicit radius of the
true mean with high probability even when an adversary rewrites an
eta-fraction of every long-enough window, and even when the clean data are
merely a bounded-second-moment martingale rather than i.i.d.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

LN2 = math.log(2.0)


@dataclass(frozen=True)
class EstimatorConfig:
    """Constants governing the deviation guarantees.

    Parameters
    ----------
    M : float
        Known bound on the conditional second moment E[X_t^2 | past].
    eta : float
        Contamination rate: the adversary may rewrite at most ``eta * k``
        points of any window of length k >= k0.  ``eta = 0`` means clean
        data.
    delta : float
        Confidence parameter; bounds hold with probability >= 1 - delta.
    A : float
        Bound on |psi|.  The implemented influence function saturates at
        ln(2); any other value merely rescales the bounds.
    B : float
        Constant (> 1) trading the asymptotic-bias level against the
        probability with which it holds.
    V : float, optional
        Bound on the conditional variance, required by the two-stage
        centered estimator.  Must not exceed M; note the converse
        (variance <= raw second moment) is only automatic when the mean
        is bounded accordingly.
    """

    M: float
    eta: float
    delta: float = 0.01
    A: float = LN2
    B: float = 2.0
    V: float | None = None

    def __post_init__(self):
        if not 0.0 <= self.eta < 1.0:
            raise ValueError("eta must lie in [0, 1)")
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")
        if self.A <= 0.0:
            raise ValueError("A must be positive")
        if self.M <= 0.0:
            raise ValueError("M must be positive")
        if self.B <= 1.0:
            raise ValueError("B must exceed 1")
        if self.V is not None:
            if self.V <= 0.0:
                raise ValueError("V must be positive when given")
            if self.V > self.M:
                raise ValueError("V must not exceed M")


@dataclass(frozen=True)
class DeviationBound:
    """High-probability deviation radius together with the scale that attains it."""

    radius: float
    confidence: float
    alpha_used: float

    def __post_init__(self):
        if self.radius < 0.0:
            raise ValueError("radius must be nonnegative")
        if not 0.0 < self.confidence < 1.0:
            raise ValueError("confidence must lie in (0, 1)")
        if self.alpha_used <= 0.0:
            raise ValueError("alpha_used must be positive")


def psi(x):
    """Bounded influence function: the narrowest non-decreasing map
    sandwiched between -log(1 - x + x^2/2) and log(1 + x + x^2/2).

    Piecewise closed form::

        psi(x) = -log(1 - x + x**2 / 2)   0 <= x <= 1
                 log(2)                   x >= 1
                 log(1 + x + x**2 / 2)    -1 <= x <= 0
                 -log(2)                  x <= -1

    Odd, non-decreasing, |psi| <= ln(2).  Accepts scalars or arrays;
    scalar input returns a float.
    """
    arr = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise ValueError("psi requires finite input")
    mag = np.minimum(np.abs(arr), 1.0)
    out = np.sign(arr) * -np.log(1.0 - mag + mag * mag / 2.0)
    if arr.ndim == 0:
        return float(out)
    return out


def select_alpha(cfg: EstimatorConfig, n: int) -> float:
    """Scale for the soft-truncation estimator at sample size ``n``:
    alpha = sqrt(M / (2 * (log(2/delta)/n + 2*A*eta))).
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    load = math.log(2.0 / cfg.delta) / n + 2.0 * cfg.A * cfg.eta
    return math.sqrt(cfg.M / (2.0 * load))


def catoni_estimate(data, alpha: float) -> float:
    """Soft-truncation mean estimate (alpha/n) * sum(psi(x_i / alpha)).

    Bounded by alpha*ln(2) in magnitude and permutation-invariant.
    """
    if alpha <= 0.0:
        raise ValueError("alpha must be positive")
    values = np.asarray(data, dtype=np.float64)
    if values.size == 0:
        raise ValueError("data must be non-empty")
    return float(alpha * np.mean(psi(values / alpha)))


def deviation_radius(cfg: EstimatorConfig, n: int) -> DeviationBound:
    """Deviation guarantee for the soft-truncation estimate at sample size n.

    With alpha from :func:`select_alpha`, the estimate lies within
    sqrt(2*M*(log(2/delta)/n + 2*A*eta)) of the true mean with probability
    at least 1 - delta.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    load = math.log(2.0 / cfg.delta) / n + 2.0 * cfg.A * cfg.eta
    return DeviationBound(
        radius=math.sqrt(2.0 * cfg.M * load),
        confidence=1.0 - cfg.delta,
        alpha_used=math.sqrt(cfg.M / (2.0 * load)),
    )


def bias_constant(cfg: EstimatorConfig) -> float:
    """The constant c0 = sqrt(2*A*(1/B + 2)) in the asymptotic bias level."""
    return math.sqrt(2.0 * cfg.A * (1.0 / cfg.B + 2.0))


def asymptotic_bias(cfg: EstimatorConfig, n: int | None = None) -> float:
    """Contamination-only deviation level c0 * sqrt(M * eta).

    Holds with probability >= 1 - 2*exp(-(A*eta/B)*n) once n is large
    enough; pass ``n`` to get a warning when the simplifying sample-size
    condition n >= (B/(A*eta)) * log(2/delta) is not met.
    """
    if cfg.eta == 0.0:
        return 0.0
    if n is not None:
        n_min = cfg.B / (cfg.A * cfg.eta) * math.log(2.0 / cfg.delta)
        if n < n_min:
            warnings.warn(
                f"sample size {n} below {n_min:.1f}; the bias-level "
                "guarantee uses the weaker finite-n bound",
                stacklevel=2,
            )
    return bias_constant(cfg) * math.sqrt(cfg.M * cfg.eta)


def centering_radius(cfg: EstimatorConfig, k: int) -> float:
    """First-stage deviation radius of the two-stage estimator:
    sqrt(2*M*(log(4/delta)/k + 2*A*eta)).

    The confidence budget is split evenly between the two stages, hence
    log(4/delta) rather than log(2/delta).
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    load = math.log(4.0 / cfg.delta) / k + 2.0 * cfg.A * cfg.eta
    return math.sqrt(2.0 * cfg.M * load)


def shifted_deviation_radius(cfg: EstimatorConfig, n: int, k: int) -> DeviationBound:
    """Deviation guarantee for the two-stage centered estimator.

    Radius sqrt(2*(V + theta_k^2)*(log(4/delta)/(n-k) + 2*A*eta)), where
    theta_k is :func:`centering_radius`; holds with probability 1 - delta.
    """
    if cfg.V is None:
        raise ValueError("shifted estimation requires the variance bound V")
    if not 0 < k < n:
        raise ValueError("k must satisfy 0 < k < n")
    theta_k = centering_radius(cfg, k)
    second_moment = cfg.V + theta_k * theta_k
    load = math.log(4.0 / cfg.delta) / (n - k) + 2.0 * cfg.A * cfg.eta
    return DeviationBound(
        radius=math.sqrt(2.0 * second_moment * load),
        confidence=1.0 - cfg.delta,
        alpha_used=math.sqrt(second_moment / (2.0 * load)),
    )


def shifting_device_estimate(data, cfg: EstimatorConfig, k: int | None = None) -> float:
    """Two-stage centered estimate whose radius depends on the variance
    bound V rather than the raw second moment.

    (i) estimate a coarse center on the first ``k`` points, (ii) estimate
    the residual mean on the remaining points shifted by that center, with
    the scale widened by the first-stage uncertainty, (iii) add the two.
    Each stage spends half the confidence budget.  ``k`` defaults to
    floor(n/2).
    """
    if cfg.V is None:
        raise ValueError("shifting-device estimation requires the variance bound V")
    values = np.asarray(data, dtype=np.float64)
    n = values.size
    if n < 2:
        raise ValueError("need at least 2 points to build a shifting device")
    if k is None:
        k = n // 2
    if not 0 < k < n:
        raise ValueError("k must satisfy 0 < k < n")

    half_delta = EstimatorConfig(
        M=cfg.M, eta=cfg.eta, delta=cfg.delta / 2.0, A=cfg.A, B=cfg.B, V=cfg.V
    )
    center = catoni_estimate(values[:k], select_alpha(half_delta, k))
    alpha_prime = shifted_deviation_radius(cfg, n, k).alpha_used
    residual = catoni_estimate(values[k:] - center, alpha_prime)
    return residual + center


def huber_to_eta(
    epsilon: float, beta: float, n: int, k0: int, strict: bool = False
) -> float:
    """Convert a mixture-model outlier probability into a window budget rate.

    Data drawn as (1-epsilon)*P + epsilon*Q keeps its empirical corrupted
    fraction over every window of length >= k0 below

        eta = epsilon + 1.7 * sqrt(epsilon*(1-epsilon))
                      * sqrt((log(log(2n)) + 0.72*log(10.4n/beta)) / k0)

    with probability at least 1 - beta.  When the bound exceeds 1 it is
    clamped to 1 - 1e-9 with a warning, or raises if ``strict``.
    """
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError("epsilon must lie in [0, 1]")
    if not 0.0 < beta < 1.0:
        raise ValueError("beta must lie in (0, 1)")
    if n < 2:
        raise ValueError("n must be at least 2")
    if k0 < 2:
        raise ValueError("k0 must be at least 2")
    spread = 1.7 * math.sqrt(epsilon * (1.0 - epsilon))
    rate = (math.log(math.log(2.0 * n)) + 0.72 * math.log(10.4 * n / beta)) / k0
    eta = epsilon + spread * math.sqrt(rate)
    if eta > 1.0:
        if strict:
            raise ValueError(f"converted contamination rate {eta:.4f} exceeds 1")
        warnings.warn(
            f"converted contamination rate {eta:.4f} exceeds 1; clamping",
            stacklevel=2,
        )
        eta = 1.0 - 1e-9
    return eta
