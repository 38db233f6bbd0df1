"""Heralded-single-photon experiment model with guess-on-failure accounting.

Each run samples an input tuple, sets the phases, and opens a collection
window.  Trigger photons arrive Poisson(rate * window); only windows with
exactly one trigger are accepted, so the window is best chosen to maximise
P(count = 1), i.e. window = 1/rate with acceptance e^-1.  Within an accepted
run the protocol photon is detected with probability eta (the
coincidence/single ratio).  On detection the answer comes from the
visibility-limited protocol and is correct with conditional probability
gamma; otherwise the last party guesses a fair coin.  Nothing accepted is
ever discarded, which yields the closed form

    P_exp = eta * gamma + (1 - eta) / 2       F_exp = eta * (2 gamma - 1).

All optics below the aggregate (rate, eta, visibility) level is out of scope.
The published parameter sets for the N=5 runs ship as presets A and B.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable, NamedTuple

import numpy as np

from .quantum import run_quantum
from .sampling import RandomStream, sample_inputs
from .tasks import Task, task_value


class WindowChoice(NamedTuple):
    window: float
    accept_prob: float


def optimize_window(trigger_rate: float) -> WindowChoice:
    """Window maximising P(exactly one Poisson trigger): 1/rate, prob e^-1."""
    if trigger_rate <= 0.0:
        raise ValueError("trigger_rate must be positive")
    return WindowChoice(1.0 / trigger_rate, math.exp(-1.0))


def gamma_from_visibility(task: Task, visibility: float) -> float:
    """Conditional correctness given detection, averaged over the inputs.

    With coherence term V cos(sum phases): gamma_A = (1+V)/2 and
    gamma_B = (1 + V pi/4)/2; V = 1 recovers the ideal protocol limits.
    """
    if not 0.0 <= visibility <= 1.0:
        raise ValueError("visibility must lie in [0, 1]")
    if task is Task.A:
        return (1.0 + visibility) / 2.0
    return (1.0 + visibility * math.pi / 4.0) / 2.0


def visibility_from_gamma(task: Task, gamma: float) -> float:
    """Exact inverse of :func:`gamma_from_visibility`; errors off-range."""
    top = gamma_from_visibility(task, 1.0)
    if not 0.5 <= gamma <= top:
        raise ValueError(f"gamma must lie in [0.5, {top:.6f}] for task {task.value}")
    if task is Task.A:
        return 2.0 * gamma - 1.0
    return (2.0 * gamma - 1.0) / (math.pi / 4.0)


@dataclass(frozen=True)
class ExperimentParams:
    """Aggregate description of one experimental configuration."""

    task: Task
    n_parties: int
    trigger_rate: float  # trigger events per second
    window: float  # collection window, seconds
    eta: float  # heralded-photon detection probability
    visibility: float
    n_target: int  # accepted runs to collect

    def __post_init__(self):
        if self.n_parties < 1:
            raise ValueError("n_parties must be >= 1")
        if self.trigger_rate <= 0.0 or self.window <= 0.0:
            raise ValueError("trigger_rate and window must be positive")
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError("eta must lie in [0, 1]")
        if not 0.0 <= self.visibility <= 1.0:
            raise ValueError("visibility must lie in [0, 1]")
        if self.n_target < 1:
            raise ValueError("n_target must be >= 1")

    @property
    def gamma(self) -> float:
        return gamma_from_visibility(self.task, self.visibility)

    @classmethod
    def from_gamma(
        cls,
        task: Task,
        n_parties: int,
        eta: float,
        gamma: float,
        n_target: int,
        trigger_rate: float = 5000.0,
        window: float | None = None,
    ) -> "ExperimentParams":
        if window is None:
            window = optimize_window(trigger_rate).window
        return cls(
            task=task,
            n_parties=n_parties,
            trigger_rate=trigger_rate,
            window=window,
            eta=eta,
            visibility=visibility_from_gamma(task, gamma),
            n_target=n_target,
        )


# published N=5 parameter sets: (eta, gamma, accepted-run count)
PRESETS: dict[str, ExperimentParams] = {
    "A": ExperimentParams.from_gamma(Task.A, 5, eta=0.452, gamma=0.966, n_target=6692),
    "B": ExperimentParams.from_gamma(Task.B, 5, eta=0.471, gamma=0.858, n_target=18169),
}


@dataclass(frozen=True)
class RunRecord:
    """One collection window: its input, trigger tally and answer bookkeeping."""

    inputs: tuple
    trigger_count: int
    accepted: bool
    detected: bool
    guessed: bool
    answer: int
    truth: int

    def __post_init__(self):
        if self.accepted and self.trigger_count != 1:
            raise ValueError("accepted runs must have exactly one trigger")
        if not self.detected and not self.guessed:
            raise ValueError("failed detection forces a guess")
        if self.answer not in (-1, 1) or self.truth not in (-1, 1):
            raise ValueError("answer and truth must be +-1 signs")

    @property
    def correct(self) -> bool:
        return self.answer == self.truth


def predicted_success(eta: float, gamma: float) -> float:
    """Closed-form success probability eta*gamma + (1-eta)/2."""
    if not 0.0 <= eta <= 1.0 or not 0.0 <= gamma <= 1.0:
        raise ValueError("eta and gamma must lie in [0, 1]")
    return eta * gamma + (1.0 - eta) * 0.5


def experimental_fidelity(eta: float, gamma: float) -> float:
    """Closed-form fidelity eta*(2*gamma - 1) = 2*predicted_success - 1."""
    if not 0.0 <= eta <= 1.0 or not 0.0 <= gamma <= 1.0:
        raise ValueError("eta and gamma must lie in [0, 1]")
    return eta * (2.0 * gamma - 1.0)


def simulate_run(params: ExperimentParams, rng: np.random.Generator) -> RunRecord:
    """Simulate one window.  Draw order is fixed and documented for seeding:
    input tuple, trigger count, then (accepted only) detection and answer.
    Unaccepted windows still record a coin-flip guess so every record carries
    an answer; they are excluded from all statistics downstream.
    """
    inputs = sample_inputs(params.task, params.n_parties, rng)
    truth = task_value(params.task, inputs)
    trigger_count = int(rng.poisson(params.trigger_rate * params.window))
    accepted = trigger_count == 1
    detected = bool(accepted and rng.random() < params.eta)
    if detected:
        answer = run_quantum(params.task, inputs, params.visibility, rng)
        guessed = False
    else:
        answer = 1 if rng.random() < 0.5 else -1
        guessed = True
    return RunRecord(
        inputs=tuple(inputs.tolist()),
        trigger_count=trigger_count,
        accepted=accepted,
        detected=detected,
        guessed=guessed,
        answer=answer,
        truth=truth,
    )


def simulate_experiment(
    params: ExperimentParams, rng: np.random.Generator
) -> list[RunRecord]:
    """Run windows until n_target accepted runs are collected.

    Returns every window in order (accepted and not); statistics must be
    computed over the accepted subset only, see :func:`qccp.stats.success_stats`.
    """
    mu = params.trigger_rate * params.window
    p_single = mu * math.exp(-mu)
    if p_single < 1e-6:
        raise ValueError(f"P(single trigger) = {p_single:.2e}; window unusable")
    max_windows = int(50 * params.n_target / p_single) + 1000
    records: list[RunRecord] = []
    accepted = 0
    while accepted < params.n_target:
        if len(records) >= max_windows:
            raise RuntimeError("window budget exhausted; acceptance rate broken?")
        record = simulate_run(params, rng)
        records.append(record)
        accepted += record.accepted
    return records


def split_targets(n_target: int, streams: int) -> list[int]:
    """Deterministic partition of the accepted-run budget across streams."""
    if streams < 1 or n_target < streams:
        raise ValueError("need 1 <= streams <= n_target")
    base = n_target // streams
    extra = n_target % streams
    return [base + (1 if i < extra else 0) for i in range(streams)]


def stream_runs(
    params: ExperimentParams, seed: int, streams: int = 1
) -> list[tuple[int, list[RunRecord]]]:
    """Per-stream record chunks: stream i draws from RandomStream(seed, i).

    The accepted-run budget is split deterministically over the streams, so
    the result is reproducible regardless of how streams would be scheduled.
    """
    chunks: list[tuple[int, list[RunRecord]]] = []
    for i, target in enumerate(split_targets(params.n_target, streams)):
        part = replace(params, n_target=target)
        chunks.append((i, simulate_experiment(part, RandomStream(seed, i).generator())))
    return chunks


def simulate_experiment_streams(
    params: ExperimentParams, seed: int, streams: int = 1
) -> list[RunRecord]:
    """Flat record list of :func:`stream_runs`, folded in stream order."""
    return [r for _, chunk in stream_runs(params, seed, streams) for r in chunk]


def accepted_records(records: Iterable[RunRecord]) -> list[RunRecord]:
    return [r for r in records if r.accepted]
