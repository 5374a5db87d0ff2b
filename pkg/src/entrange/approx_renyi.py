"""Sampling-based Renyi entropy estimators over query rectangles.

The workhorse is a frequency-moment estimator: with the dual oracle of
:mod:`.approx_shannon`, X = EVAL(SAMP())^(alpha-1) has expectation exactly
sum_i p_i^alpha, so its sample mean estimates the alpha-th moment and the
entropy is -log2(moment)/(alpha-1).

The additive estimator chooses its sample count as the better of the
samples-only and dual-access complexities (both realized through the same
dual oracle, which is always available in the query setting). The
multiplicative estimator splits on a heavy color: without one the entropy
is at least log2(3/2) and an additive call suffices; with one it rewrites
t - 1 = (1 - sum p^alpha)/sum p^alpha, computes 1 - rho^alpha of the heavy
color exactly, and estimates only the light remainder's moment through the
color-excluding sampler.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .approx_shannon import (
    DEFAULT_CONFIG,
    DualAccessOracle,
    EstimatorConfig,
    EstimatorIndex,
    detect_heavy_color,
)
from .core import ColorHistogram, EntropySummary, QueryRect, renyi_kind
from .errors import EmptyRange, InvalidOrder


@dataclass(frozen=True)
class MomentEstimate:
    """Estimate of sum_i p_i^alpha over the range's color distribution."""

    alpha: float
    value: float
    rel_error: float          # requested relative error target
    samples: int              # 0 means the exact fallback was taken


def _check_alpha(alpha: float) -> None:
    if not alpha > 1.0:
        raise InvalidOrder(f"Renyi order must be > 1, got {alpha}")


def _moment_mean(oracle: DualAccessOracle, alpha: float, samples: int,
                 rng: np.random.Generator) -> float:
    acc = 0.0
    for _ in range(samples):
        acc += oracle.eval_color(oracle.sample_color(rng)) ** (alpha - 1.0)
    return acc / samples


def _exact_moment_value(oracle: DualAccessOracle, alpha: float) -> float:
    pts = oracle.index.pts
    mask = oracle.rect.mask(pts)
    if oracle.excluded is not None:
        mask &= pts.colors != oracle.excluded
    hist = ColorHistogram.from_points(pts, mask)
    if hist.total == 0.0:
        raise EmptyRange("no mass in (reduced) query range")
    return sum((w / hist.total) ** alpha for w in hist.entries.values())


def moment_sample_count(index: EstimatorIndex, alpha: float, eps: float,
                        cfg: EstimatorConfig) -> int:
    n = max(2, len(index))
    return math.ceil(cfg.c_mom * alpha * n ** (1.0 - 1.0 / alpha) * math.log2(n) / eps**2)


def _estimate_moment_on(index: EstimatorIndex, oracle: DualAccessOracle, alpha: float,
                        eps: float, cfg: EstimatorConfig, rng: np.random.Generator,
                        samples: Optional[int] = None) -> MomentEstimate:
    if oracle.is_empty:
        raise EmptyRange("no mass in (reduced) query range")
    if samples is None:
        samples = moment_sample_count(index, alpha, eps, cfg)
    n = max(2, len(index))
    if cfg.exact_fallback and samples > n * math.log2(n):
        return MomentEstimate(alpha, _exact_moment_value(oracle, alpha), eps, 0)
    return MomentEstimate(alpha, _moment_mean(oracle, alpha, samples, rng), eps, samples)


def estimate_moment(index: EstimatorIndex, rect: QueryRect, alpha: float, eps: float,
                    cfg: EstimatorConfig = DEFAULT_CONFIG,
                    rng: Optional[np.random.Generator] = None) -> MomentEstimate:
    """Relative-error estimate of the alpha-th frequency moment in the range."""
    _check_alpha(alpha)
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    rng = rng if rng is not None else np.random.default_rng(cfg.seed)
    return _estimate_moment_on(index, index.oracle(rect), alpha, eps, cfg, rng)


def estimate_moment_excluding(index: EstimatorIndex, rect: QueryRect, alpha: float,
                              eps: float, excluded: int,
                              cfg: EstimatorConfig = DEFAULT_CONFIG,
                              rng: Optional[np.random.Generator] = None) -> MomentEstimate:
    """Moment of the range's distribution with one color removed, normalized
    by the reduced total mass."""
    _check_alpha(alpha)
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    rng = rng if rng is not None else np.random.default_rng(cfg.seed)
    return _estimate_moment_on(index, index.oracle(rect, excluded=excluded),
                               alpha, eps, cfg, rng)


def additive_branch_sample_counts(alpha: float, delta: float, n: int,
                                  cfg: EstimatorConfig = DEFAULT_CONFIG) -> tuple[int, int, str]:
    """Sample counts of the two additive strategies and which one wins.

    The samples-only route needs ~ max(1, 1/(alpha-1)^2) * alpha / delta^2
    draws per n^(1-1/alpha); the dual-access route ~ 1/(1-2^((1-alpha)delta))^2.
    """
    n = max(2, n)
    base = n ** (1.0 - 1.0 / alpha) * math.log2(n)
    so_factor = max(1.0, 1.0 / (alpha - 1.0) ** 2) * alpha / delta**2
    dual_factor = 1.0 / (1.0 - 2.0 ** ((1.0 - alpha) * delta)) ** 2
    samples_only = math.ceil(cfg.c_mom * so_factor * base)
    dual = math.ceil(cfg.c_mom * dual_factor * base)
    chosen = "samples-only" if dual_factor >= so_factor else "dual-access"
    return samples_only, dual, chosen


def estimate_additive_renyi(index: EstimatorIndex, rect: QueryRect, alpha: float,
                            delta: float, cfg: EstimatorConfig = DEFAULT_CONFIG,
                            rng: Optional[np.random.Generator] = None,
                            stats: Optional[dict] = None) -> EntropySummary:
    """Renyi entropy within +-delta, with high probability."""
    _check_alpha(alpha)
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    rng = rng if rng is not None else np.random.default_rng(cfg.seed)
    oracle = index.oracle(rect)
    if oracle.is_empty:
        raise EmptyRange("query range holds no mass")
    samples_only, dual, chosen = additive_branch_sample_counts(alpha, delta, len(index), cfg)
    samples = min(samples_only, dual)
    est = _estimate_moment_on(index, oracle, alpha, delta, cfg, rng, samples=samples)
    if stats is not None:
        stats["branch"] = chosen
        stats["samples"] = est.samples
    value = -math.log2(est.value) / (alpha - 1.0)
    return EntropySummary(renyi_kind(alpha), oracle.total_weight, value)


def heavy_combine_renyi(h1: float, h2: float, h_hat: float, alpha: float) -> float:
    """Entropy from the split t-1 = (1 - sum p^alpha)/sum p^alpha: h1 is the
    exact 1 - rho^alpha of the heavy color, h2 the rescaled light moment,
    h_hat the full-moment estimate. The log argument is clamped to the
    feasible t >= 1 (power sums never exceed one)."""
    arg = (h1 - h2) / h_hat + 1.0
    return math.log2(max(arg, 1.0)) / (alpha - 1.0)


def estimate_multiplicative_renyi(index: EstimatorIndex, rect: QueryRect, alpha: float,
                                  eps: float, cfg: EstimatorConfig = DEFAULT_CONFIG,
                                  rng: Optional[np.random.Generator] = None,
                                  stats: Optional[dict] = None) -> EntropySummary:
    """Renyi entropy within a (1+eps) factor, with high probability."""
    _check_alpha(alpha)
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    rng = rng if rng is not None else np.random.default_rng(cfg.seed)
    oracle = index.oracle(rect)
    if oracle.is_empty:
        raise EmptyRange("query range holds no mass")
    heavy = detect_heavy_color(index, rect, rng, cfg)
    kind = renyi_kind(alpha)

    if heavy is None:
        # entropy at least log2(3/2): an additive call gives the factor
        delta = min(0.999, math.log2(1.5) * eps)
        out = estimate_additive_renyi(index, rect, alpha, delta, cfg, rng, stats)
        if stats is not None:
            stats["mode"] = "additive-light"
        return out

    if heavy.count == heavy.total_count:
        if stats is not None:
            stats["mode"] = "single-color"
        return EntropySummary(kind, oracle.total_weight, 0.0)

    rho = heavy.weight / heavy.total
    h1 = 1.0 - rho**alpha
    eps0 = eps / cfg.moment_c1
    eps1 = eps0 / 3.0
    eps2 = (alpha - 1.0) * eps1 / cfg.moment_c2 if alpha <= 2.0 else eps1 / cfg.moment_c2
    eps2 = min(eps2, 0.999)
    light = _estimate_moment_on(index, index.oracle(rect, excluded=heavy.color),
                                alpha, eps2, cfg, rng)
    h2 = light.value * ((heavy.total - heavy.weight) / heavy.total) ** alpha
    full = _estimate_moment_on(index, oracle, alpha, min(eps1, 0.999), cfg, rng)
    value = heavy_combine_renyi(h1, h2, full.value, alpha)
    if stats is not None:
        stats["mode"] = "heavy"
        stats["heavy_color"] = heavy.color
    return EntropySummary(kind, oracle.total_weight, value)
