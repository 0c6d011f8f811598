"""
Bernoulli subsampling of raw rows and the diversity statistics of a plan.

Each raw row (sample i, replica j) is kept with probability R_ij. A draw
yields inverse-probability weights m'_i = sum_j Q_ij / R_ij, whose
expectation is m_i, and the collapsed inclusion bit Q'_i = OR_j Q_ij.

One Philox stream is keyed on (seed, draw index, resample attempt). Row
(i, j) reads the uniform at counter position offsets[i] + j of that stream,
so its bit depends only on the key, its position in the replica layout and
R_ij, never on the other rows' rates. Replay is exact for the same key and
the same layout; datasets with different frequencies do not share bits.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from core.errors import DimensionMismatchError, SamplingError
from dataset.models import SparseDataset
from .loss import GradientVector, ScoreVector, gradient_vector


logger = logging.getLogger(__name__)

MAX_RESAMPLE_ATTEMPTS = 10_000
DEFAULT_TRIALS = 1000


@dataclass(frozen=True, eq=False)
class SamplingPlan:
    """
    Per-replica keep probabilities, flattened sample-major.

    ``rates[offsets[i]:offsets[i + 1]]`` are the rates of sample i's replicas.
    """
    rates: np.ndarray
    offsets: np.ndarray
    uniform_rate: Optional[float] = None

    def __post_init__(self):
        rates = np.asarray(self.rates, dtype=np.float64).copy()
        offsets = np.asarray(self.offsets, dtype=np.int64).copy()
        if offsets.ndim != 1 or offsets.size < 1 or offsets[-1] != rates.size:
            raise SamplingError("offsets must end at the number of rates")
        if rates.size and not ((rates > 0.0) & (rates <= 1.0)).all():
            raise SamplingError("every sampling rate must be in (0, 1]")
        rates.flags.writeable = False
        offsets.flags.writeable = False
        object.__setattr__(self, "rates", rates)
        object.__setattr__(self, "offsets", offsets)

    @classmethod
    def uniform(cls, rate: float, ds: SparseDataset) -> "SamplingPlan":
        if not 0.0 < rate <= 1.0:
            raise SamplingError(f"sampling rate must be in (0, 1], got {rate}")
        return cls(np.full(ds.n_raw, float(rate)), ds.replica_offsets(), float(rate))

    @classmethod
    def per_sample(cls, rates: np.ndarray, ds: SparseDataset) -> "SamplingPlan":
        """One rate per distinct sample, shared by all of its replicas."""
        rates = np.asarray(rates, dtype=np.float64)
        if rates.size != ds.n_samples:
            raise DimensionMismatchError(ds.n_samples, rates.size, "per-sample rates")
        return cls(np.repeat(rates, ds.frequencies), ds.replica_offsets())

    @property
    def n_samples(self) -> int:
        return self.offsets.size - 1

    @property
    def is_full(self) -> bool:
        """True when every rate is 1, i.e. sampling keeps every row."""
        return bool((self.rates == 1.0).all())

    def check(self, ds: SparseDataset) -> None:
        if self.n_samples != ds.n_samples or self.rates.size != ds.n_raw:
            raise DimensionMismatchError(ds.n_raw, self.rates.size, "sampling plan")
        if not np.array_equal(self.offsets, ds.replica_offsets()):
            raise SamplingError("sampling plan replica layout does not match dataset frequencies")


@dataclass(frozen=True, eq=False)
class SampleDraw:
    """One observed value of Q with its derived weights."""
    seed: int
    index: int
    attempt: int
    bits: np.ndarray
    weights: np.ndarray
    included: np.ndarray

    @property
    def support_size(self) -> int:
        return int(self.included.sum())


def _generator(seed: int, index: int, attempt: int) -> np.random.Generator:
    # Philox is counter-based: (seed, index, attempt) fully determines the stream
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, index, attempt])))


def _raw_draw(plan: SamplingPlan, seed: int, index: int, attempt: int = 0) -> SampleDraw:
    starts = plan.offsets[:-1]
    if plan.is_full:
        bits = np.ones(plan.rates.size, dtype=bool)
    else:
        bits = _generator(seed, index, attempt).random(plan.rates.size) < plan.rates

    if starts.size == 0:
        weights = np.zeros(0, dtype=np.float64)
    else:
        weights = np.add.reduceat(bits / plan.rates, starts)
    included = weights > 0.0
    for array in (bits, weights, included):
        array.flags.writeable = False
    return SampleDraw(seed, index, attempt, bits, weights, included)


def draw(
    plan: SamplingPlan,
    ds: SparseDataset,
    seed: int,
    index: int,
    resample_empty: bool = True,
) -> SampleDraw:
    """
    Draw Q for ``(seed, index)``.

    If nothing is kept and ``resample_empty`` is set, the draw is repeated with
    the attempt counter incremented; the attempt is recorded for replay.
    """
    plan.check(ds)
    for attempt in range(MAX_RESAMPLE_ATTEMPTS):
        result = _raw_draw(plan, seed, index, attempt)
        if result.support_size > 0 or not resample_empty or ds.n_samples == 0:
            return result
        logger.debug("Empty draw (seed=%d, index=%d, attempt=%d); resampling", seed, index, attempt)
    raise SamplingError(
        f"no non-empty draw after {MAX_RESAMPLE_ATTEMPTS} attempts (seed={seed}, index={index})"
    )


def weighted_target(d: SampleDraw, ds: SparseDataset, F: ScoreVector) -> GradientVector:
    """Sampled target with components m'_i * 2(p_i - y_i); unsampled rows are 0 and excluded."""
    if d.weights.size != ds.n_samples:
        raise DimensionMismatchError(ds.n_samples, d.weights.size, "sample draw")
    return gradient_vector(ds, F, weights=d.weights)


def analytic_delta(plan: SamplingPlan, ds: SparseDataset) -> float:
    """Largest per-sample inclusion probability, max_i 1 - prod_j (1 - R_ij)."""
    plan.check(ds)
    if ds.n_samples == 0:
        return 0.0
    miss = np.multiply.reduceat(1.0 - plan.rates, plan.offsets[:-1])
    return float(np.max(1.0 - miss))


@dataclass(frozen=True)
class DiversityStats:
    """Monte Carlo diversity statistics of a sampling plan."""
    omega: int
    delta: float
    rho: float
    trials: int
    mean_support: float
    n_samples: int

    def as_dict(self) -> dict:
        return {
            "n_samples": self.n_samples,
            "omega": self.omega,
            "delta": self.delta,
            "rho": self.rho,
            "mean_support": self.mean_support,
            "trials": self.trials,
        }


def estimate_diversity(
    plan: SamplingPlan,
    ds: SparseDataset,
    trials: int = DEFAULT_TRIALS,
    seed: int = 0,
) -> DiversityStats:
    """
    Estimate omega (largest support of Q'), rho (probability that consecutive
    draws share a sample) and delta (analytic) from ``trials`` raw draws.

    Empty draws are kept as observed.
    """
    if trials < 2:
        raise SamplingError(f"trials must be >= 2, got {trials}")
    plan.check(ds)

    supports = np.empty(trials, dtype=np.int64)
    intersections = 0
    previous = None
    for t in range(trials):
        current = _raw_draw(plan, seed, t).included
        supports[t] = current.sum()
        if previous is not None and np.any(previous & current):
            intersections += 1
        previous = current

    stats = DiversityStats(
        omega=int(supports.max()),
        delta=analytic_delta(plan, ds),
        rho=intersections / (trials - 1),
        trials=trials,
        mean_support=float(supports.mean()),
        n_samples=ds.n_samples,
    )
    logger.debug("Diversity estimate: %s", stats)
    return stats


def support_draws(plan: SamplingPlan, ds: SparseDataset, trials: int, seed: int):
    """Yield the same raw draws ``estimate_diversity`` inspects."""
    plan.check(ds)
    for t in range(trials):
        yield _raw_draw(plan, seed, t)
