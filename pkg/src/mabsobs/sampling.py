"""Survey sizing and estimation for equal-probability samples of agents.

Sample size follows the Horvitz-Thompson sizing rule

    1/n = d**2 / (4 * S2) + 1/N,    S2 = (1 - p) * p

where ``d`` is the largest accepted absolute error on the in-zone rate and
``p`` the expected rate E(Z)/N. The factor 4 is roughly z**2 at 95 %.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _kernels
from .sim import ConfigurationError


def variance_proxy(p: float) -> float:
    """Bernoulli variance (1 - p) * p of the in-zone indicator."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"rate must lie in [0, 1], got {p}")
    return (1.0 - p) * p


def sample_size(N: int, p: float, d: float) -> int:
    """Smallest sample size meeting error ``d`` at rate ``p``, clamped to [1, N].

    A zero-variance population (p of 0 or 1) needs a single probe.
    """
    if N < 1:
        raise ValueError(f"population must be positive, got {N}")
    if d <= 0:
        raise ValueError(f"accepted error must be positive, got {d}")
    s2 = variance_proxy(p)
    if s2 == 0.0:
        return 1
    # exact rationals: ceil must not flip on round-off at integer boundaries
    fd, fp = Fraction(d), Fraction(p)
    n = math.ceil(1 / (fd * fd / (4 * (1 - fp) * fp) + Fraction(1, N)))
    return min(max(n, 1), N)


def estimate_total(hits: int, n: int, N: int) -> float:
    """Expansion estimate N * hits / n of the in-zone count."""
    if n < 1 or N < 1:
        raise ValueError("sample and population sizes must be positive")
    if not 0 <= hits <= n:
        raise ValueError(f"hits={hits} outside [0, n={n}]")
    if n > N:
        raise ValueError(f"sample size {n} exceeds population {N}")
    return N * hits / n


@dataclass(frozen=True)
class SurveyPlan:
    n: int
    d: float
    p_expected: float
    population: int

    def __post_init__(self):
        if not 1 <= self.n <= self.population:
            raise ConfigurationError(
                f"sample size {self.n} outside [1, {self.population}]")
        if not 0.0 < self.d < 1.0:
            raise ConfigurationError(f"accepted error must lie in (0, 1), got {self.d}")
        if not 0.0 <= self.p_expected <= 1.0:
            raise ConfigurationError(f"expected rate must lie in [0, 1], got {self.p_expected}")

    @classmethod
    def design(cls, population: int, p_expected: float, d: float) -> "SurveyPlan":
        return cls(sample_size(population, p_expected, d), d, p_expected, population)

    def resized(self, p_expected: float) -> "SurveyPlan":
        """Same error target, re-sized for a new expected rate."""
        return SurveyPlan.design(self.population, p_expected, self.d)


class Sampler:
    """Simple random sampling without replacement over ``range(N)``.

    Keeps one permutation buffer alive between draws. A partial
    Fisher-Yates pass is uniform whatever order the buffer starts in, so the
    buffer never needs resetting and each draw costs O(n).
    """

    def __init__(self, population_size: int, rng: np.random.Generator):
        if population_size < 1:
            raise ValueError("population must be positive")
        self.population_size = population_size
        self.rng = rng
        self._buffer = np.arange(population_size, dtype=np.int64)
        self._u = np.empty(0)

    def draw(self, n: int) -> np.ndarray:
        """Return a view of ``n`` distinct ids; valid until the next draw."""
        if not 1 <= n <= self.population_size:
            raise ValueError(f"cannot draw {n} of {self.population_size} without replacement")
        if self._u.shape[0] != n:
            self._u = np.empty(n)
        self.rng.random(out=self._u)
        _kernels.partial_shuffle_uniform(self._buffer, self._u)
        return self._buffer[:n]

    def count_hits(self, n: int, x: np.ndarray, y: np.ndarray, zone_mask: np.ndarray,
                   height: int) -> int:
        """Draw ``n`` ids like :meth:`draw` and count those whose cell is in the mask."""
        if not 1 <= n <= self.population_size:
            raise ValueError(f"cannot draw {n} of {self.population_size} without replacement")
        if self._u.shape[0] != n:
            self._u = np.empty(n)
        self.rng.random(out=self._u)
        return _kernels.sample_hits(self._buffer, self._u, x, y, zone_mask, height)


def srswor(population_size: int, n: int, obs_rng: np.random.Generator) -> np.ndarray:
    """``n`` distinct ids from ``range(population_size)``, every subset equally likely."""
    if n > population_size:
        raise ValueError(f"cannot draw {n} of {population_size} without replacement")
    return Sampler(population_size, obs_rng).draw(n).copy()
