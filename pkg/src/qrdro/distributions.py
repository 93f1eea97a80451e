"""Demand-distribution definitions, seeded sampling, and moment estimation.

Sampling uses numpy's Philox generator, a counter-based 64-bit RNG with a
published algorithm, so draws are a pure function of (distribution, n, seed)
and reproduce across platforms. Substreams are derived from integer seed
paths through ``numpy.random.SeedSequence``; disjoint paths give
statistically independent streams, which is how per-trial sampling stays
deterministic regardless of scheduling.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence, Union

import numpy as np
from scipy import integrate


@dataclass(frozen=True)
class Uniform:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"uniform needs lo < hi, got [{self.lo}, {self.hi}]")

    def label(self) -> str:
        return f"uniform({self.lo:g};{self.hi:g})"


@dataclass(frozen=True)
class Lognormal:
    """Market size exp(log_mean + log_std * Z) with Z standard normal.

    The second parameter is the standard deviation of the log, not its
    variance.
    """

    log_mean: float
    log_std: float

    def __post_init__(self):
        if self.log_std <= 0.0:
            raise ValueError(f"lognormal needs log_std > 0, got {self.log_std}")

    def label(self) -> str:
        return f"lognormal({self.log_mean:g};{self.log_std:g})"


@dataclass(frozen=True)
class Beta:
    alpha: float
    beta: float

    def __post_init__(self):
        if self.alpha <= 0.0 or self.beta <= 0.0:
            raise ValueError(f"beta needs positive shapes, got ({self.alpha}, {self.beta})")

    def label(self) -> str:
        return f"beta({self.alpha:g};{self.beta:g})"


@dataclass(frozen=True)
class Empirical:
    """Resampling distribution over a fixed set of observed market sizes."""

    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.values) == 0:
            raise ValueError("empirical distribution needs at least one value")
        if any(v < 0.0 for v in self.values):
            raise ValueError("empirical values must be nonnegative")

    def label(self) -> str:
        return f"empirical(n={len(self.values)})"


DemandDistribution = Union[Uniform, Lognormal, Beta, Empirical]

SeedLike = Union[int, Sequence[int]]


def _seed_path(seed: SeedLike) -> tuple[int, ...]:
    if isinstance(seed, (int, np.integer)):
        return (int(seed),)
    return tuple(int(s) for s in seed)


def generator(seed: SeedLike) -> np.random.Generator:
    """Philox generator for the given seed path."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(_seed_path(seed))))


@dataclass(frozen=True, eq=False)
class SampleSet:
    """Market-size observations plus the seed path that produced them."""

    values: np.ndarray
    seed: tuple[int, ...] = field(default=())

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1 or vals.size == 0:
            raise ValueError("sample set must be a non-empty 1-d array")
        if np.any(vals < 0.0):
            raise ValueError("market-size samples must be nonnegative")
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True)
class MomentSummary:
    """Mean and mean absolute deviation of the market size."""

    mean: float
    mad: float

    def __post_init__(self):
        if self.mad < 0.0:
            raise ValueError(f"mean absolute deviation must be nonnegative, got {self.mad}")


def sample(dist: DemandDistribution, n: int, seed: SeedLike) -> SampleSet:
    """Draw n i.i.d. market sizes; deterministic for fixed (dist, n, seed)."""
    if n < 1:
        raise ValueError(f"sample count must be at least 1, got {n}")
    rng = generator(seed)
    if isinstance(dist, Uniform):
        vals = dist.lo + (dist.hi - dist.lo) * rng.random(n)
    elif isinstance(dist, Lognormal):
        vals = np.exp(dist.log_mean + dist.log_std * rng.standard_normal(n))
    elif isinstance(dist, Beta):
        vals = rng.beta(dist.alpha, dist.beta, n)
    elif isinstance(dist, Empirical):
        arr = np.asarray(dist.values, dtype=float)
        vals = arr[rng.integers(0, arr.size, n)]
    else:
        raise TypeError(f"unknown distribution type: {type(dist).__name__}")
    return SampleSet(vals, _seed_path(seed))


def estimate_moments(samples: SampleSet | np.ndarray) -> MomentSummary:
    """Sample mean and sample mean absolute deviation."""
    vals = samples.values if isinstance(samples, SampleSet) else np.asarray(samples, dtype=float)
    if vals.size == 0:
        raise ValueError("cannot estimate moments from an empty sample set")
    mean = float(np.mean(vals))
    mad = float(np.mean(np.abs(vals - mean)))
    return MomentSummary(mean, mad)


def true_moments(dist: DemandDistribution) -> MomentSummary:
    """Exact (mean, mad) of a distribution; quadrature where no closed form."""
    if isinstance(dist, Uniform):
        return MomentSummary((dist.lo + dist.hi) / 2.0, (dist.hi - dist.lo) / 4.0)
    if isinstance(dist, Empirical):
        return estimate_moments(np.asarray(dist.values, dtype=float))
    if isinstance(dist, Beta):
        from scipy.stats import beta as beta_law

        pdf = beta_law(dist.alpha, dist.beta).pdf
        hi = 1.0
        mean = dist.alpha / (dist.alpha + dist.beta)
    elif isinstance(dist, Lognormal):
        m, s = dist.log_mean, dist.log_std

        def pdf(y):
            return np.exp(-((np.log(y) - m) ** 2) / (2.0 * s * s)) / (y * s * np.sqrt(2.0 * np.pi))

        hi = np.inf
        mean, _ = integrate.quad(lambda y: y * pdf(y), 0.0, hi, epsabs=1e-10, epsrel=1e-10)
    else:
        raise TypeError(f"unknown distribution type: {type(dist).__name__}")
    # mad = 2 * E[(Y - mean)^+], avoiding the |.| kink inside the quadrature
    tail, _ = integrate.quad(lambda y: (y - mean) * pdf(y), mean, hi, epsabs=1e-10, epsrel=1e-10)
    return MomentSummary(float(mean), float(2.0 * tail))


def solver_support(
    dist: DemandDistribution,
    samples: SampleSet | None = None,
    cap_multiplier: float = 3.0,
    cap_floor: float = 1.0,
) -> tuple[float, float]:
    """Support bounds handed to the ambiguity sets.

    Bounded families keep their natural support. For unbounded or purely
    data-defined demand the upper bound is capped at
    max(cap_multiplier * largest in-sample value, cap_floor); evaluation
    samples are never clipped, the cap only shapes the robust
    reformulations.
    """
    if isinstance(dist, Uniform):
        return dist.lo, dist.hi
    if isinstance(dist, Beta):
        return 0.0, 1.0
    if isinstance(dist, (Lognormal, Empirical)):
        if samples is None or len(samples) == 0:
            raise ValueError("support cap rule needs in-sample data")
        return 0.0, max(cap_multiplier * float(np.max(samples.values)), cap_floor)
    raise TypeError(f"unknown distribution type: {type(dist).__name__}")


def save_samples(samples: SampleSet, path: str | Path) -> None:
    """Write one decimal value per line."""
    Path(path).write_text("".join(format(v, ".17g") + "\n" for v in samples.values))


def load_samples(path: str | Path) -> SampleSet:
    """Read a one-value-per-line sample file."""
    lines = [ln.strip() for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not lines:
        raise ValueError(f"sample file {path} is empty")
    return SampleSet(np.array([float(ln) for ln in lines]))
