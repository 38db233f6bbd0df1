"""Seeded input generation and exhaustive enumeration for both tasks.

All randomness flows through numpy Generators created from a
:class:`RandomStream`, a (seed, stream_id) pair.  Equal pairs reproduce the
same draw sequence bit-for-bit across runs and platforms; distinct stream ids
give statistically independent streams, which is how parallel workers are
meant to split work.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .tasks import Task

MAX_ENUM_PARTIES = 10
DEFAULT_MAX_REJECTION_ROUNDS = 10_000


@dataclass(frozen=True)
class RandomStream:
    """Reproducible random source addressed by (seed, stream_id)."""

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,))
        return np.random.default_rng(seq)


def sample_a(n_parties: int, rng: np.random.Generator, size: int | None = None):
    """Draw uniform even-sum quaternary tuples.

    The first N-1 digits are i.i.d. uniform on {0..3}; the last digit is
    drawn uniformly from the two values that fix the parity, which makes the
    distribution exactly uniform over the 4^N/2 admissible tuples.

    Returns a length-N int array, or a (size, N) array when ``size`` is given.
    """
    if n_parties < 1:
        raise ValueError("n_parties must be >= 1")
    squeeze = size is None
    count = 1 if squeeze else int(size)
    out = np.empty((count, n_parties), dtype=np.int64)
    out[:, : n_parties - 1] = rng.integers(0, 4, size=(count, n_parties - 1))
    parity = out[:, : n_parties - 1].sum(axis=1) % 2
    out[:, n_parties - 1] = parity + 2 * rng.integers(0, 2, size=count)
    return out[0] if squeeze else out


def _propose_b(n_parties: int, rng: np.random.Generator, count: int):
    """One rejection round: uniform proposals and their accepted subset."""
    proposals = rng.uniform(0.0, 2.0 * math.pi, size=(count, n_parties))
    accept = rng.random(count) < np.abs(np.cos(proposals.sum(axis=1)))
    return proposals[accept]


def sample_b(
    n_parties: int,
    rng: np.random.Generator,
    size: int | None = None,
    max_rounds: int = DEFAULT_MAX_REJECTION_ROUNDS,
):
    """Draw tuples from the task B density by rejection sampling.

    Proposals are uniform on [0, 2*pi)^N and accepted with probability
    |cos(sum X)|, so the mean acceptance rate is 2/pi.  ``max_rounds`` caps
    the number of rejection rounds; exhausting it signals a broken generator.
    """
    if n_parties < 1:
        raise ValueError("n_parties must be >= 1")
    squeeze = size is None
    needed = 1 if squeeze else int(size)
    chunks: list[np.ndarray] = []
    got = 0
    for _ in range(max_rounds):
        if got >= needed:
            break
        batch = max(16, int((needed - got) / (2.0 / math.pi) * 1.1))
        accepted = _propose_b(n_parties, rng, batch)
        chunks.append(accepted)
        got += len(accepted)
    else:
        raise RuntimeError(
            f"rejection sampler exhausted {max_rounds} rounds; generator broken?"
        )
    samples = np.concatenate(chunks)[:needed]
    return samples[0] if squeeze else samples


def enumerate_a(n_parties: int) -> tuple[np.ndarray, np.ndarray]:
    """All even-sum quaternary tuples with their uniform weights 2/4^N.

    Returns (tuples, weights) with tuples of shape (4^N/2, N).  Supports
    N <= 10 (524288 tuples); larger N should be sampled instead.
    """
    if not 1 <= n_parties <= MAX_ENUM_PARTIES:
        raise ValueError(f"enumeration supports 1 <= N <= {MAX_ENUM_PARTIES}")
    prefixes = np.array(
        list(itertools.product(range(4), repeat=n_parties - 1)), dtype=np.int64
    ).reshape(4 ** (n_parties - 1), n_parties - 1)
    parity = prefixes.sum(axis=1) % 2
    low = np.concatenate([prefixes, parity[:, None]], axis=1)
    high = np.concatenate([prefixes, (parity + 2)[:, None]], axis=1)
    tuples = np.concatenate([low, high], axis=0)
    # canonical row order for reproducible reports
    order = np.lexsort(tuples.T[::-1])
    tuples = tuples[order]
    weights = np.full(len(tuples), 2.0 / 4.0**n_parties)
    return tuples, weights


def enumerate_reduced_a(n_parties: int) -> np.ndarray:
    """All even-parity bit strings of length N, shape (2^(N-1), N)."""
    bits = np.array(
        list(itertools.product((0, 1), repeat=n_parties)), dtype=np.int64
    ).reshape(-1, n_parties)
    return bits[bits.sum(axis=1) % 2 == 0]


def sample_inputs(
    task: Task, n_parties: int, rng: np.random.Generator, size: int | None = None
):
    """Task-dispatching sampler used by Monte Carlo and experiment code."""
    if task is Task.A:
        return sample_a(n_parties, rng, size=size)
    return sample_b(n_parties, rng, size=size)
