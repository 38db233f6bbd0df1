"""Success estimation, binomial errors, sigma violations and block histograms.

The error model is the plain binomial (Wald) standard error
sqrt(p(1-p)/n), which reproduces the published uncertainties; Wilson
intervals are available but not the default.  Histograms mimic the published
presentation: accepted runs are cut into consecutive blocks, each block
contributes its success fraction, and the fractions are binned.  The exact
published block structure is not recoverable, so block size is a parameter
(default 500) and comparisons are made in moments, not bar heights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .experiment import RunRecord

DEFAULT_BLOCK_SIZE = 500


@dataclass(frozen=True)
class SuccessStats:
    """Accepted-run tally with its standard error.

    :meth:`from_counts` fills sigma with the Wald value sqrt(p(1-p)/n);
    direct construction accepts an externally quoted sigma (e.g. a published
    rounded uncertainty) but still ties p_hat to the counts.
    """

    n: int
    successes: int
    p_hat: float
    sigma: float

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("need at least one run")
        if not 0 <= self.successes <= self.n:
            raise ValueError("successes must lie in [0, n]")
        if abs(self.p_hat - self.successes / self.n) > 1e-12:
            raise ValueError("p_hat must equal successes/n")
        if self.sigma < 0.0:
            raise ValueError("sigma must be non-negative")

    @classmethod
    def from_counts(cls, n: int, successes: int) -> "SuccessStats":
        if n < 1:
            raise ValueError("need at least one run")
        if not 0 <= successes <= n:
            raise ValueError("successes must lie in [0, n]")
        p = successes / n
        return cls(n=n, successes=successes, p_hat=p, sigma=math.sqrt(p * (1.0 - p) / n))


def success_stats(records: Iterable[RunRecord]) -> SuccessStats:
    """Success statistics over the accepted runs of a record log."""
    accepted = [r for r in records if r.accepted]
    if not accepted:
        raise ValueError("no accepted runs")
    return SuccessStats.from_counts(
        n=len(accepted), successes=sum(r.correct for r in accepted)
    )


def sigma_violation(stats: SuccessStats, classical_p: float) -> float:
    """How many standard errors the estimate sits above the classical bound."""
    if stats.sigma <= 0.0:
        raise ValueError("sigma must be positive")
    return (stats.p_hat - classical_p) / stats.sigma


def wilson_interval(stats: SuccessStats, z: float = 1.0) -> tuple[float, float]:
    """Wilson score interval, the optional alternative to the Wald error."""
    n, p = stats.n, stats.p_hat
    denom = 1.0 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1.0 - p) / n + z * z / (4 * n * n)) / denom
    return centre - half, centre + half


@dataclass(frozen=True, eq=False)
class Histogram:
    """Binned per-block success fractions."""

    bin_edges: np.ndarray
    counts: np.ndarray
    block_size: int

    def __post_init__(self):
        edges = np.asarray(self.bin_edges, dtype=float)
        counts = np.asarray(self.counts, dtype=np.int64)
        if len(counts) != len(edges) - 1:
            raise ValueError("counts length must be edges length - 1")
        if np.any(np.diff(edges) <= 0):
            raise ValueError("bin edges must be strictly increasing")
        if self.block_size < 1:
            raise ValueError("block_size must be >= 1")
        object.__setattr__(self, "bin_edges", edges)
        object.__setattr__(self, "counts", counts)

    @property
    def n_blocks(self) -> int:
        return int(self.counts.sum())


def block_fractions(records: Sequence[RunRecord], block_size: int) -> np.ndarray:
    """Success fraction of each full consecutive block of accepted runs.

    Trailing runs beyond the last full block are dropped, so the number of
    fractions is floor(n/block_size); the mean of the fractions matches the
    overall estimate exactly when block_size divides n.
    """
    if block_size < 1:
        raise ValueError("block_size must be >= 1")
    outcomes = np.array([r.correct for r in records if r.accepted], dtype=float)
    n_blocks = len(outcomes) // block_size
    if n_blocks < 1:
        raise ValueError(f"need at least {block_size} accepted runs for one block")
    trimmed = outcomes[: n_blocks * block_size]
    return trimmed.reshape(n_blocks, block_size).mean(axis=1)


def block_histogram(
    records: Sequence[RunRecord],
    block_size: int = DEFAULT_BLOCK_SIZE,
    bin_width: float = 0.01,
) -> Histogram:
    """Histogram of per-block success fractions over [0, 1]."""
    if not 0.0 < bin_width <= 1.0:
        raise ValueError("bin_width must lie in (0, 1]")
    fractions = block_fractions(records, block_size)
    n_bins = math.ceil(1.0 / bin_width - 1e-9)
    edges = np.linspace(0.0, n_bins * bin_width, n_bins + 1)
    counts, _ = np.histogram(fractions, bins=edges)
    return Histogram(bin_edges=edges, counts=counts, block_size=block_size)
