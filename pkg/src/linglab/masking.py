"""Masking-rate sampling and attribute-mask drawing.

The default strategy draws per-sample masking rates from a shifted,
truncated Pareto distribution on [0, 1]:

    f(m) = b / (1 - 2^-b) * (1 + m)^-(b + 1)
    F(m) = (1 - (1 + m)^-b) / (1 - 2^-b)

i.e. the law of X - 1 with X ~ Pareto(shape b, scale 1) truncated to
[1, 2]. Larger b concentrates mass at low masking rates. The ablation
strategies (no masking, dropout, fixed rate) live here as well.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NoRootError


@dataclass(frozen=True)
class ParetoMaskConfig:
    b: float = 3.0

    def __post_init__(self):
        if not self.b > 0:
            raise ValueError(f"shape parameter must be positive, got {self.b}")


@dataclass(frozen=True)
class NoMasking:
    name = "none"


@dataclass(frozen=True)
class Dropout:
    p: float = 0.3
    name = "dropout"

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"dropout probability must be in [0,1], got {self.p}")


@dataclass(frozen=True)
class FixedRate:
    rate: float = 0.3
    name = "fixed"

    def __post_init__(self):
        if not 0.0 <= self.rate <= 1.0:
            raise ValueError(f"rate must be in [0,1], got {self.rate}")


@dataclass(frozen=True)
class PMasking:
    config: ParetoMaskConfig = field(default_factory=ParetoMaskConfig)
    name = "pmask"


MaskingStrategy = NoMasking | Dropout | FixedRate | PMasking


def strategy_from_name(name: str, *, b: float = 3.0, p: float = 0.3, rate: float = 0.3) -> MaskingStrategy:
    if name == "none":
        return NoMasking()
    if name == "dropout":
        return Dropout(p=p)
    if name == "fixed":
        return FixedRate(rate=rate)
    if name == "pmask":
        return PMasking(ParetoMaskConfig(b=b))
    raise ValueError(f"unknown masking strategy {name!r}")


@dataclass(frozen=True)
class MaskDraw:
    """A sampled masking rate plus the concrete masked index set."""

    rate: float
    masked: tuple[int, ...]


def _check_domain(m, b: float) -> np.ndarray:
    if not b > 0:
        raise ValueError(f"shape parameter must be positive, got {b}")
    m = np.asarray(m, dtype=np.float64)
    if np.any(m < 0) or np.any(m > 1):
        raise ValueError("masking rate outside [0, 1]")
    return m


def pmask_density(m, b: float):
    """Density of the shifted truncated Pareto law on [0, 1]."""
    m = _check_domain(m, b)
    norm = b / (1.0 - 2.0 ** (-b))
    out = norm * (1.0 + m) ** (-(b + 1.0))
    return float(out) if out.ndim == 0 else out

def pmask_cdf(m, b: float):
    """CDF of the shifted truncated Pareto law; F(0)=0, F(1)=1."""
    m = _check_domain(m, b)
    out = (1.0 - (1.0 + m) ** (-b)) / (1.0 - 2.0 ** (-b))
    return float(out) if out.ndim == 0 else out


def pmask_inverse_cdf(u, b: float):
    """Inverse CDF: maps u in [0, 1) to a masking rate in [0, 1)."""
    if not b > 0:
        raise ValueError(f"shape parameter must be positive, got {b}")
    u = np.asarray(u, dtype=np.float64)
    out = (1.0 - u * (1.0 - 2.0 ** (-b))) ** (-1.0 / b) - 1.0
    out = np.clip(out, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def sample_rate(rng: np.random.Generator, config: ParetoMaskConfig) -> float:
    """Draw one masking rate by inverse-transform sampling."""
    return float(pmask_inverse_cdf(rng.random(), config.b))


def sample_rates(rng: np.random.Generator, config: ParetoMaskConfig, n: int) -> np.ndarray:
    """Vectorized rate draws (same transform as :func:`sample_rate`)."""
    return pmask_inverse_cdf(rng.random(n), config.b)


def calibrate_shape(
    target_rate: float = 0.3,
    target_mass: float = 0.6,
    bracket: tuple[float, float] = (1e-3, 64.0),
    tol: float = 1e-6,
) -> float:
    """Find the smallest shape b with F(target_rate, b) >= target_mass.

    F is increasing in b for fixed rate, so plain bisection applies. Raises
    :class:`NoRootError` when the mass is unreachable inside the bracket.
    """
    if not 0.0 < target_rate < 1.0 or not 0.0 < target_mass < 1.0:
        raise ValueError("target_rate and target_mass must lie strictly in (0, 1)")
    lo, hi = bracket
    if pmask_cdf(target_rate, hi) < target_mass:
        raise NoRootError(
            f"F({target_rate}, b) < {target_mass} for every b <= {hi}"
        )
    if pmask_cdf(target_rate, lo) >= target_mass:
        return lo
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if pmask_cdf(target_rate, mid) >= target_mass:
            hi = mid
        else:
            lo = mid
    return hi


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def draw_mask(rng: np.random.Generator, k: int, strategy: MaskingStrategy) -> MaskDraw:
    """Draw the masked index subset of {0..k-1} for one sample.

    Rate-based strategies mask round(m * k) indices chosen uniformly without
    replacement; dropout masks each index independently.
    """
    if k < 0:
        raise ValueError("attribute count must be non-negative")
    if k == 0 or isinstance(strategy, NoMasking):
        return MaskDraw(rate=0.0, masked=())
    if isinstance(strategy, Dropout):
        flags = rng.random(k) < strategy.p
        idx = tuple(int(i) for i in np.flatnonzero(flags))
        return MaskDraw(rate=len(idx) / k, masked=idx)
    if isinstance(strategy, FixedRate):
        m = strategy.rate
    else:
        m = sample_rate(rng, strategy.config)
    n = min(_round_half_up(m * k), k)
    idx = tuple(sorted(int(i) for i in rng.choice(k, size=n, replace=False)))
    return MaskDraw(rate=m, masked=idx)
