"""Target functions, input domains and densities for the two multiparty games.

Task A: each of the N parties holds a quaternary digit X_k in {0,1,2,3},
promised to have an even total.  The goal is the sign ``1 - (sum X_k) mod 4``
(+1 when the sum is 0 mod 4, -1 when it is 2 mod 4).  Everything on this path
is exact integer arithmetic; no floats are involved.

Task B: each party holds a real phase X_k in [0, 2*pi), jointly distributed
with density ``|cos(sum X)| / (4 (2*pi)^(N-1))``.  The goal is the sign of
cos(sum X).

Both tasks admit the same reduction: write X_k as a sign y_k plus a reduced
coordinate x_k (a bit for A, a value in [0, pi) for B).  The target then
factorises as ``prod_k y_k * reduced_value(x)``, which is what confines
optimal one-bit protocols to product form (see :mod:`qccp.classical`).

Task A's distribution is taken UNIFORM over the 4^N/2 even-sum tuples.  Only
the even-sum promise is intrinsic to the task; uniformity is the modelling
assumption under which the quoted classical bound P = 5/8 at N=5 holds, and
every sampler and fidelity sum in this package uses it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

TIE_EPS = 1e-12


class Task(Enum):
    """The two supported games: quaternary modulo-4 sum (A), cosine sign (B)."""

    A = "A"
    B = "B"


class PromiseViolationError(ValueError):
    """Task A input whose digit sum is odd (outside the promised domain)."""


class CosineTieError(ValueError):
    """Task B sign query with |cos(sum)| below tolerance: the sign is undefined.

    The event has probability zero under the task density, so hitting it
    signals bad inputs rather than bad luck.
    """


@dataclass(frozen=True)
class ReducedInput:
    """Per-party decomposition X_k -> (x_k, y_k) with y_k in {-1,+1}."""

    x: tuple
    y: tuple


def _as_digits(inputs: Sequence[int]) -> list[int]:
    digits = [int(v) for v in inputs]
    if len(digits) < 1:
        raise ValueError("need at least one party")
    if any(d < 0 or d > 3 for d in digits):
        raise ValueError(f"task A digits must lie in 0..3, got {digits}")
    return digits


def _as_phases(inputs: Sequence[float]) -> list[float]:
    phases = [float(v) for v in inputs]
    if len(phases) < 1:
        raise ValueError("need at least one party")
    if any(not (0.0 <= v < 2.0 * math.pi) for v in phases):
        raise ValueError("task B inputs must lie in [0, 2*pi)")
    return phases


def task_value(task: Task, inputs: Sequence, tie_eps: float = TIE_EPS) -> int:
    """Evaluate the game's target sign on one input tuple.

    Raises PromiseViolationError for odd-sum task-A tuples and CosineTieError
    when a task-B cosine is within ``tie_eps`` of zero.
    """
    if task is Task.A:
        total = sum(_as_digits(inputs))
        if total % 2:
            raise PromiseViolationError(f"digit sum {total} is odd")
        return 1 - (total % 4)
    phases = _as_phases(inputs)
    c = math.cos(math.fsum(phases))
    if abs(c) < tie_eps:
        raise CosineTieError(f"|cos(sum)| = {abs(c):.3e} below {tie_eps:.1e}")
    return 1 if c > 0.0 else -1


def task_value_batch(task: Task, inputs: np.ndarray, tie_eps: float = TIE_EPS) -> np.ndarray:
    """Vectorised :func:`task_value` over rows of a (runs, N) array."""
    arr = np.asarray(inputs)
    if arr.ndim != 2:
        raise ValueError("expected a (runs, N) array")
    if task is Task.A:
        totals = arr.astype(np.int64).sum(axis=1)
        if np.any(totals % 2):
            raise PromiseViolationError("batch contains odd-sum tuples")
        return 1 - (totals % 4)
    c = np.cos(arr.sum(axis=1))
    if np.any(np.abs(c) < tie_eps):
        raise CosineTieError("batch contains cosine ties")
    return np.where(c > 0.0, 1, -1)


def decompose(task: Task, inputs: Sequence) -> ReducedInput:
    """Split each X_k into its random sign y_k and reduced coordinate x_k.

    Task A: X_k = (1 - y_k) + x_k with x_k = X_k mod 2, y_k = +1 for X_k < 2.
    Task B: X_k = pi (1 - y_k)/2 + x_k with x_k in [0, pi).
    """
    if task is Task.A:
        digits = _as_digits(inputs)
        x = tuple(d % 2 for d in digits)
        y = tuple(1 if d < 2 else -1 for d in digits)
        return ReducedInput(x=x, y=y)
    phases = _as_phases(inputs)
    x = tuple(v if v < math.pi else v - math.pi for v in phases)
    y = tuple(1 if v < math.pi else -1 for v in phases)
    return ReducedInput(x=x, y=y)


def compose(task: Task, reduced: ReducedInput) -> tuple:
    """Inverse of :func:`decompose` (bit-exact for A, within 1 ulp for B)."""
    if task is Task.A:
        return tuple((1 - yk) + xk for xk, yk in zip(reduced.x, reduced.y))
    return tuple(
        xk if yk == 1 else math.pi + xk for xk, yk in zip(reduced.x, reduced.y)
    )


def reduced_value(task: Task, x: Sequence, tie_eps: float = TIE_EPS) -> int:
    """The reduced target on x alone: task_value = prod(y) * reduced_value(x).

    Task A: requires even bit parity, returns ``(-1)^(sum(x)/2)``.
    Task B: sign of cos(sum x) on x in [0, pi)^N.
    """
    if task is Task.A:
        bits = [int(v) for v in x]
        if any(b not in (0, 1) for b in bits):
            raise ValueError("reduced task A inputs are bits")
        total = sum(bits)
        if total % 2:
            raise PromiseViolationError(f"bit parity {total % 2} must be even")
        return -1 if (total // 2) % 2 else 1
    vals = [float(v) for v in x]
    if any(not (0.0 <= v < math.pi) for v in vals):
        raise ValueError("reduced task B inputs must lie in [0, pi)")
    c = math.cos(math.fsum(vals))
    if abs(c) < tie_eps:
        raise CosineTieError(f"|cos(sum)| = {abs(c):.3e} below {tie_eps:.1e}")
    return 1 if c > 0.0 else -1


def density_b(inputs: Sequence[float]) -> float:
    """Task B joint density |cos(sum X)| / (4 (2*pi)^(N-1)) on [0, 2*pi)^N."""
    phases = _as_phases(inputs)
    n = len(phases)
    return abs(math.cos(math.fsum(phases))) / (4.0 * (2.0 * math.pi) ** (n - 1))


def reduced_density(task: Task, x: Sequence) -> float:
    """Density of the reduced coordinates; satisfies p(X) = 2^-N * p'(x).

    Task A: uniform 2^-(N-1) on even-parity bit strings, 0 off support.
    Task B: |cos(sum x)| / (2 pi^(N-1)) on [0, pi)^N.
    """
    if task is Task.A:
        bits = [int(v) for v in x]
        if any(b not in (0, 1) for b in bits):
            raise ValueError("reduced task A inputs are bits")
        n = len(bits)
        if sum(bits) % 2:
            return 0.0
        return 2.0 ** (-(n - 1))
    vals = [float(v) for v in x]
    if any(not (0.0 <= v < math.pi) for v in vals):
        raise ValueError("reduced task B inputs must lie in [0, pi)")
    n = len(vals)
    return abs(math.cos(math.fsum(vals))) / (2.0 * math.pi ** (n - 1))
