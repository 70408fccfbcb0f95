"""Downstream platform metrics and the closed-form quantities they check.

Three equilibrium performance measures, all gated by consumption: user
consumption of quality (winner quality), realized engagement (winner
engagement score), and user welfare (winner utility). Each has a Monte
Carlo estimator over simulated rounds; the homogeneous engagement case
additionally has a closed-form route through the quality CDF and an
expected-maximum quadrature, which the estimators are tested against.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Optional, Sequence

import numpy as np

from ._stats import MetricEstimate, RunningMoments
from .equilibrium import MixedStrategy
from .game import Metric, simulate_rounds
from .model import ModelInstance

SIMPSON_TOL = 1e-8
E_LIMIT_TOP = math.exp(1.0 - 1.0 / math.e)  # upper support of the limit cdf


def _sharded_estimate(values_of: Callable[[np.random.Generator, int], np.ndarray],
                      n: int, rng: np.random.Generator,
                      threads: int = 1) -> MetricEstimate:
    """Split n samples over spawned substreams and merge stable moments."""
    if n < 1:
        raise ValueError("n must be >= 1")
    shards = max(1, min(threads, n))
    counts = [n // shards + (1 if i < n % shards else 0) for i in range(shards)]
    seeds = rng.integers(0, 2 ** 63 - 1, size=shards)
    moments = RunningMoments()
    if shards == 1:
        moments.add_samples(values_of(np.random.default_rng(seeds[0]), n))
    else:
        with ThreadPoolExecutor(max_workers=shards) as pool:
            futures = [pool.submit(values_of, np.random.default_rng(s), m)
                       for s, m in zip(seeds, counts)]
            for fut in futures:  # fixed merge order keeps runs reproducible
                moments.add_samples(fut.result())
    return moments.estimate()


def _round_estimator(field: str):
    def estimator(inst: ModelInstance, metric: Metric, strategy: MixedStrategy,
                  P: int, n: int, rng: np.random.Generator,
                  threads: int = 1) -> MetricEstimate:
        def values(sub: np.random.Generator, m: int) -> np.ndarray:
            batch = simulate_rounds(inst, metric, strategy, P, m, sub)
            return getattr(batch, field)
        return _sharded_estimate(values, n, rng, threads)
    return estimator


def estimate_ucq(inst, metric, strategy, P, n, rng, threads=1) -> MetricEstimate:
    """User consumption of quality: winner quality when consumed, else 0."""
    return _round_estimator("quality")(inst, metric, strategy, P, n, rng, threads)


def estimate_re(inst, metric, strategy, P, n, rng, threads=1) -> MetricEstimate:
    """Realized engagement: winner engagement score when consumed, else 0."""
    return _round_estimator("engagement")(inst, metric, strategy, P, n, rng, threads)


def estimate_uw(inst, metric, strategy, P, n, rng, threads=1) -> MetricEstimate:
    """User welfare: winner utility when consumed, else 0."""
    return _round_estimator("user_utility")(inst, metric, strategy, P, n, rng, threads)


def investment_engagement_cdf(v) -> np.ndarray:
    """Shifted engagement CDF under the investment baseline: uniform on [1, 2]."""
    v = np.asarray(v, dtype=float)
    out = np.clip(v - 1.0, 0.0, 1.0)
    return out if out.ndim else float(out)


def limit_engagement_cdf(v, eps: float = 0.0) -> np.ndarray:
    """Large-type-count limit of the shifted engagement CDF.

    Supported on [1 + eps, (1 + eps) * e^(1 - 1/e)], where it equals
    ln(1 / (1 - ln(v / (1 + eps)))), clamped into [0, 1].
    """
    if eps < 0.0:
        raise ValueError("eps must be >= 0")
    v = np.asarray(v, dtype=float)
    lo = 1.0 + eps
    hi = lo * E_LIMIT_TOP
    with np.errstate(divide="ignore", invalid="ignore"):
        inner = 1.0 - np.log(np.maximum(v, 1e-300) / lo)
        val = np.log(1.0 / np.maximum(inner, 1e-300))
    out = np.where(v <= lo, 0.0, np.where(v >= hi, 1.0, np.clip(val, 0.0, 1.0)))
    return out if out.ndim else float(out)


def _adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, depth):
    m = 0.5 * (a + b)
    lm, rm = 0.5 * (a + m), 0.5 * (m + b)
    flm, frm = f(lm), f(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    if depth <= 0 or abs(left + right - whole) <= 15.0 * tol:
        return left + right + (left + right - whole) / 15.0
    return (_adaptive_simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + _adaptive_simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1))


def expected_max_from_cdf(cdf: Callable, P: int, upper: float,
                          tol: float = SIMPSON_TOL,
                          breakpoints: Sequence[float] = ()) -> float:
    """E[max of P i.i.d. draws] for a nonnegative variable with the given CDF.

    Integrates 1 - F(v)^P over [0, upper] by adaptive Simpson, splitting
    panels at the supplied CDF breakpoints so kinks do not stall the
    refinement. The CDF must be nondecreasing and reach 1 by ``upper``.
    """
    if P < 1:
        raise ValueError("P must be >= 1")
    if upper <= 0.0:
        raise ValueError("upper must be positive")
    nodes = np.unique(np.concatenate([
        np.linspace(0.0, upper, 513),
        np.clip(np.asarray(list(breakpoints), dtype=float), 0.0, upper),
    ]))
    fvals = np.asarray(cdf(nodes), dtype=float)
    if np.any(np.diff(fvals) < -1e-12):
        raise ValueError("cdf is not monotone on the quadrature nodes")
    if fvals[-1] < 1.0 - 1e-9:
        raise ValueError(f"cdf reaches only {fvals[-1]} at upper={upper}")

    def integrand(v):
        return 1.0 - float(np.asarray(cdf(v), dtype=float)) ** P

    panels = np.unique(np.clip(np.asarray([0.0, upper, *breakpoints], dtype=float),
                               0.0, upper))
    total = 0.0
    for a, b in zip(panels, panels[1:]):
        if b - a <= 1e-15:
            continue
        fa, fb = integrand(a), integrand(b)
        m = 0.5 * (a + b)
        fm = integrand(m)
        whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
        total += _adaptive_simpson(integrand, a, b, fa, fm, fb, whole,
                                   tol * (b - a) / upper, depth=48)
    return total


def homogeneous_quality_cdf(alpha: float, gamma: float, t: float,
                            P: int) -> tuple[Callable, float, tuple[float, ...]]:
    """Closed-form quality marginal of the homogeneous engagement equilibrium.

    Returns (cdf, support_top, breakpoints). Negative baselines put an atom
    at quality 0 with mass (-alpha)^(1/(P-1)); positive baselines with
    costly gaming put an atom of mass (gamma * t * alpha)^(1/(P-1)) there.
    """
    if not (alpha > -1.0):
        raise ValueError("alpha must be > -1")
    if not (0.0 <= gamma < 1.0):
        raise ValueError("gamma must be in [0, 1)")
    if P < 2:
        raise ValueError("P must be >= 2")
    beta = max(0.0, -alpha)
    top = (1.0 - gamma * t * alpha) / (1.0 + gamma * t)
    expo = 1.0 / (P - 1)

    def cdf(x):
        x = np.asarray(x, dtype=float)
        rising = np.clip(x + gamma * t * (x + alpha), 0.0, 1.0)
        base = np.where(x < beta, beta, rising)
        out = np.where(x < 0.0, 0.0, base ** expo)
        return out if out.ndim else float(out)

    return cdf, top, (0.0, beta, top)


def closed_form_ucq_homogeneous(alpha: float, gamma: float, t: float,
                                P: int) -> float:
    """Expected consumed quality under homogeneous engagement optimization.

    The winner is the max-quality draw, so this is the expected maximum of
    P i.i.d. draws from the closed-form quality marginal.
    """
    cdf, top, brk = homogeneous_quality_cdf(alpha, gamma, t, P)
    return expected_max_from_cdf(cdf, P, top, breakpoints=brk)


def ks_distance(samples: np.ndarray, cdf: Callable,
                cdf_left: Optional[Callable] = None) -> float:
    """One-sample Kolmogorov-Smirnov distance, atom-aware.

    Compares the empirical CDF against ``cdf`` at each sample point and
    against the CDF's left limits just below each point (``cdf_left``
    defaults to evaluating a hair below, which is exact for piecewise
    Lipschitz CDFs).
    """
    xs = np.sort(np.asarray(samples, dtype=float))
    n = len(xs)
    if n == 0:
        raise ValueError("samples must be nonempty")
    uniq, counts = np.unique(xs, return_counts=True)
    cum = np.cumsum(counts)
    emp_right = cum / n
    emp_left = (cum - counts) / n
    f_right = np.asarray(cdf(uniq), dtype=float)
    if cdf_left is None:
        shift = 1e-9 * np.maximum(1.0, np.abs(uniq))
        f_left = np.asarray(cdf(uniq - shift), dtype=float)
    else:
        f_left = np.asarray(cdf_left(uniq), dtype=float)
    return float(max(np.abs(emp_right - f_right).max(),
                     np.abs(emp_left - f_left).max()))
