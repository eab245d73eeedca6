"""Truncated probability mass functions and count histograms."""

from dataclasses import dataclass, field
from typing import Dict, Iterable

import numpy as np

from core.exceptions import DomainError


@dataclass(frozen=True, eq=False)
class Pmf:
    """Probability masses on n = 0..n_max plus the mass beyond n_max.

    Attributes:
        masses: Probabilities indexed by count
        tail_mass: Probability of counts above n_max
        diagnostics: Free-form notes from the evaluator that built the pmf
    """

    masses: np.ndarray
    tail_mass: float = 0.0
    diagnostics: Dict[str, object] = field(default_factory=dict)

    def __post_init__(self):
        masses = np.asarray(self.masses, dtype=float)
        if masses.ndim != 1 or masses.size == 0:
            raise DomainError("masses must be a nonempty 1-D array")
        object.__setattr__(self, "masses", masses)

    @property
    def n_max(self) -> int:
        """Return the largest count carried explicitly."""
        return self.masses.size - 1

    @property
    def total(self) -> float:
        """Return the explicit mass plus the tail mass."""
        return float(self.masses.sum()) + self.tail_mass

    def mass(self, n: int) -> float:
        """Return P(n), zero outside 0..n_max."""
        if n < 0 or n > self.n_max:
            return 0.0
        return float(self.masses[n])

    def padded(self, length: int) -> np.ndarray:
        """Return the masses zero-padded (never truncated) to at least length entries."""
        if length <= self.masses.size:
            return self.masses.copy()
        return np.concatenate([self.masses, np.zeros(length - self.masses.size)])

    def cdf(self) -> np.ndarray:
        """Return P(N <= n) for n = 0..n_max."""
        return np.cumsum(self.masses)

    def sf(self) -> np.ndarray:
        """Return P(N > n) for n = 0..n_max, summed from the top for accuracy."""
        above = np.concatenate([np.cumsum(self.masses[::-1])[::-1][1:], [0.0]])
        return above + self.tail_mass

    def mean(self) -> float:
        """Return the mean of the explicit masses."""
        return float(np.dot(np.arange(self.masses.size), self.masses))

    def variance(self) -> float:
        """Return the variance of the explicit masses."""
        n = np.arange(self.masses.size)
        mean = self.mean()
        return float(np.dot((n - mean) ** 2, self.masses))


@dataclass(frozen=True, eq=False)
class CountHistogram:
    """Empirical frequency table of n_c over retained runs.

    Attributes:
        counts: Number of runs observed at each count value, indexed by n_c
    """

    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.ndim != 1:
            raise DomainError("counts must be a 1-D array")
        if counts.size == 0:
            counts = np.zeros(1, dtype=np.int64)
        if np.any(counts < 0):
            raise DomainError("histogram counts must be nonnegative")
        object.__setattr__(self, "counts", counts)

    @classmethod
    def from_values(cls, values: Iterable[int]) -> "CountHistogram":
        """Build a histogram from observed count values.

        Args:
            values: Observed n_c values

        Returns:
            CountHistogram with one bin per count value up to the maximum seen
        """
        arr = np.asarray(list(values), dtype=np.int64)
        if arr.size == 0:
            return cls(np.zeros(1, dtype=np.int64))
        if np.any(arr < 0):
            raise DomainError("count values must be nonnegative")
        return cls(np.bincount(arr))

    @property
    def total(self) -> int:
        """Return the number of runs in the histogram."""
        return int(self.counts.sum())

    @property
    def n_max(self) -> int:
        """Return the largest count bin."""
        return self.counts.size - 1

    def is_empty(self) -> bool:
        """Return True when no runs were recorded."""
        return self.total == 0

    def frequencies(self) -> np.ndarray:
        """Return relative frequencies (all zero for an empty histogram)."""
        total = self.total
        if total == 0:
            return np.zeros(self.counts.size)
        return self.counts / total

    def padded(self, length: int) -> np.ndarray:
        """Return the counts zero-padded to at least length entries."""
        if length <= self.counts.size:
            return self.counts.copy()
        return np.concatenate([self.counts, np.zeros(length - self.counts.size, dtype=np.int64)])

    def mean(self) -> float:
        """Return the sample mean of n_c."""
        total = self.total
        if total == 0:
            return 0.0
        return float(np.dot(np.arange(self.counts.size), self.counts)) / total

    def variance(self, ddof: int = 0) -> float:
        """Return the sample variance of n_c."""
        total = self.total
        if total - ddof <= 0:
            return 0.0
        n = np.arange(self.counts.size)
        mean = self.mean()
        return float(np.dot((n - mean) ** 2, self.counts)) / (total - ddof)

    def detections(self, threshold: int) -> int:
        """Return the number of runs with n_c > threshold."""
        return int(self.counts[threshold + 1 :].sum())

    def to_pmf(self) -> Pmf:
        """Return the empirical distribution as a Pmf."""
        if self.is_empty():
            raise DomainError("cannot build a pmf from an empty histogram")
        return Pmf(self.frequencies(), 0.0, {"source": "histogram", "runs": self.total})
