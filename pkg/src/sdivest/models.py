"""Discrete parametric model families and the built-in Poisson model.

A model exposes pmf/log-pmf/score evaluation that broadcasts over numpy
arrays, support truncation, power sums over the truncated support, a
reproducible sampler, and data-driven initial estimates. Everything is
pure; samplers draw from a caller-supplied generator.
"""
from __future__ import annotations

from abc import ABC, abstractmethod

import numpy as np
from scipy.special import gammaln

from .frequency import FrequencyTable

DEFAULT_TAIL_EPS = 1e-12


class DiscreteModel(ABC):
    """Contract for a parametric family of pmfs on {0, 1, 2, ...}.

    ``theta`` is a scalar for one-parameter families (``param_dim == 1``).
    ``pmf``/``log_pmf`` must broadcast over ``theta`` and ``x`` like numpy
    ufuncs; ``score`` returns an array of shape ``shape(x) + (param_dim,)``.
    """

    param_dim: int = 1

    @abstractmethod
    def log_pmf(self, theta, x):
        ...

    def pmf(self, theta, x):
        return np.exp(self.log_pmf(theta, x))

    @abstractmethod
    def score(self, theta, x):
        """Gradient of the log-pmf in theta, shape ``shape(x) + (param_dim,)``."""

    @abstractmethod
    def support_cutoff(self, theta, tail_eps=DEFAULT_TAIL_EPS, min_cover=0) -> int:
        """Smallest m >= min_cover with upper-tail mass beyond m below tail_eps."""

    def power_sum(self, theta, c, tail_eps=DEFAULT_TAIL_EPS, min_cover=0) -> float:
        """Sum of pmf(theta, x)**c over the truncated support, c > 0."""
        if c <= 0:
            raise ValueError(f"power-sum exponent must be positive, got {c}")
        x_max = self.support_cutoff(theta, tail_eps, min_cover)
        x = np.arange(x_max + 1)
        return float(np.exp(c * self.log_pmf(theta, x)).sum())

    @abstractmethod
    def sample(self, theta, n, rng) -> FrequencyTable:
        """Draw n iid observations, aggregated into a frequency table."""

    @abstractmethod
    def initial_estimate(self, table: FrequencyTable, robust=False) -> float:
        """Data-driven starting value (moment match; robust variant optional)."""


_LGAMMA_TABLE = gammaln(np.arange(1, 1026, dtype=np.float64))


def _lgamma_int(k):
    """gammaln(k) for integer arrays, served from a growing lookup table."""
    global _LGAMMA_TABLE
    k = np.asarray(k)
    top = int(k.max()) if k.size else 0
    if top > _LGAMMA_TABLE.size:
        _LGAMMA_TABLE = gammaln(np.arange(1, 2 * top + 1, dtype=np.float64))
    return _LGAMMA_TABLE[k - 1]


class PoissonModel(DiscreteModel):
    """Poisson family with mean parameter theta > 0."""

    param_dim = 1

    def log_pmf(self, theta, x):
        theta = np.asarray(theta, dtype=np.float64)
        x = np.asarray(x)
        return x * np.log(theta) - theta - _lgamma_int(x + 1)

    def score(self, theta, x):
        x = np.asarray(x, dtype=np.float64)
        return (x / theta - 1.0)[..., np.newaxis]

    def support_cutoff(self, theta, tail_eps=DEFAULT_TAIL_EPS, min_cover=0) -> int:
        if not 0 < tail_eps <= 1e-6:
            raise ValueError(f"tail_eps must lie in (0, 1e-6], got {tail_eps}")
        if min_cover < 0:
            raise ValueError("min_cover must be non-negative")
        # hi is far enough out that the ignored mass beyond it cannot move
        # the tail comparison at any supported tail_eps.
        hi = int(theta + 16.0 * np.sqrt(theta + 1.0) + 90.0)
        x = np.arange(hi + 1)
        p = np.exp(self.log_pmf(theta, x))
        tail = np.cumsum(p[::-1])[::-1]  # tail[m] = P(X >= m) up to hi
        below = np.nonzero(tail[1:] < tail_eps)[0]
        m = int(below[0]) if below.size else hi
        return max(int(min_cover), m)

    # Inverse-CDF sampling keeps draws identical across platforms for a
    # given uniform stream; beyond theta=30 the table gets long and the
    # generator's own Poisson method takes over.
    _INVERSE_CDF_MAX_THETA = 30.0

    def sample(self, theta, n, rng) -> FrequencyTable:
        if theta <= 0:
            raise ValueError("Poisson mean must be positive")
        if n < 1:
            raise ValueError("need at least one draw")
        rng = np.random.default_rng(rng)
        if theta <= self._INVERSE_CDF_MAX_THETA:
            x_max = self.support_cutoff(theta, tail_eps=1e-15)
            cdf = np.cumsum(np.exp(self.log_pmf(theta, np.arange(x_max + 1))))
            draws = np.searchsorted(cdf, rng.random(n), side="left")
            draws = np.minimum(draws, x_max)
        else:
            draws = rng.poisson(theta, n)
        return FrequencyTable.from_samples(draws)

    def initial_estimate(self, table: FrequencyTable, robust=False) -> float:
        if robust:
            # weighted median of the observed support
            cum = np.cumsum(table.freqs)
            idx = int(np.searchsorted(cum, 0.5 * table.n, side="left"))
            value = float(table.support[idx])
        else:
            value = table.mean
        return max(value, 0.05)


def replicate_seed(base_seed, n, theta, replicate) -> np.random.SeedSequence:
    """Seed schedule for Monte-Carlo replicates.

    The derived stream depends only on (base_seed, n, theta, replicate), so
    the same replicate index yields the same dataset in every penalty/tuning
    cell that shares (n, theta) -- common random numbers by construction.
    Theta enters through its IEEE-754 bit pattern to avoid any float
    formatting ambiguity.
    """
    bits = int(np.float64(theta).view(np.uint64))
    key = (int(n), bits >> 32, bits & 0xFFFFFFFF, int(replicate))
    return np.random.SeedSequence(entropy=int(base_seed), spawn_key=key)


def replicate_rng(base_seed, n, theta, replicate) -> np.random.Generator:
    """PCG64 generator for one replicate under the seed schedule."""
    return np.random.Generator(np.random.PCG64(replicate_seed(base_seed, n, theta, replicate)))
