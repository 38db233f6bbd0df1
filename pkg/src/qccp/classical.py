"""Bounded-communication classical protocols and their certified optima.

The communication model: N parties, each holding one input, exchange exactly
N-1 one-bit messages along a rooted tree whose root (party N-1, 0-based)
announces the answer.  Every non-root party sends exactly once, after hearing
from all of its children.

Because the target factorises as ``prod_k y_k * reduced_value(x)`` and each
y_k is an unbiased coin, any protocol whose answer ignores some y_k is blind
guessing.  Forcing every message to carry its sender's y_k collapses the
answer to the product form ``prod_k a_k(x_k) y_k`` with per-party sign
functions a_k.  This module evaluates such product strategies exactly, and
for small N certifies the reduction itself by enumerating ALL general
message-table protocols, product form or not.

Closed-form optima:
    task A:  F = 2^(1-K), K = ceil(N/2)         (success (1+F)/2, 5/8 at N=5)
    task B:  F = (2/pi)^(N-1)                   (success ~0.582 at N=5)
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .sampling import enumerate_a, enumerate_reduced_a, sample_inputs
from .tasks import Task, decompose, task_value_batch

BRUTE_FORCE_MAX_PARTIES = 3


@dataclass(frozen=True)
class CommTree:
    """Message routing: parents[i] receives party i's bit; root is party N-1."""

    n_parties: int
    parents: tuple[int, ...]

    def __post_init__(self):
        n = self.n_parties
        if n < 1:
            raise ValueError("need at least one party")
        if len(self.parents) != n - 1:
            raise ValueError(f"expected {n - 1} edges, got {len(self.parents)}")
        for i, p in enumerate(self.parents):
            if not 0 <= p < n or p == i:
                raise ValueError(f"invalid recipient {p} for party {i}")
        for i in range(n - 1):
            seen = set()
            k = i
            while k != n - 1:
                if k in seen:
                    raise ValueError(f"cycle through party {k}")
                seen.add(k)
                k = self.parents[k]

    @classmethod
    def chain(cls, n_parties: int) -> "CommTree":
        return cls(n_parties, tuple(i + 1 for i in range(n_parties - 1)))

    @classmethod
    def star(cls, n_parties: int) -> "CommTree":
        return cls(n_parties, tuple(n_parties - 1 for _ in range(n_parties - 1)))

    def children(self, party: int) -> tuple[int, ...]:
        return tuple(i for i, p in enumerate(self.parents) if p == party)

    def send_order(self) -> tuple[int, ...]:
        """Senders ordered so every party speaks after all of its children."""
        depth = [0] * self.n_parties
        for i in range(self.n_parties - 1):
            k, d = i, 0
            while k != self.n_parties - 1:
                k = self.parents[k]
                d += 1
            depth[i] = d
        return tuple(sorted(range(self.n_parties - 1), key=lambda i: (-depth[i], i)))


@dataclass(frozen=True, eq=False)
class ProductStrategyA:
    """Per-party sign tables a_k(x_k) on the reduced bit, shape (N, 2)."""

    signs: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.signs, dtype=np.int64)
        if arr.ndim != 2 or arr.shape[1] != 2 or not np.isin(arr, (-1, 1)).all():
            raise ValueError("signs must be an (N, 2) array of +-1")
        object.__setattr__(self, "signs", arr)

    @property
    def n_parties(self) -> int:
        return self.signs.shape[0]


@dataclass(frozen=True, eq=False)
class ProductStrategyB:
    """Per-party piecewise-constant signs over M uniform cells of [0, pi)."""

    signs: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.signs, dtype=np.int64)
        if arr.ndim != 2 or arr.shape[1] < 2 or not np.isin(arr, (-1, 1)).all():
            raise ValueError("signs must be an (N, M>=2) array of +-1")
        object.__setattr__(self, "signs", arr)

    @property
    def n_parties(self) -> int:
        return self.signs.shape[0]

    @property
    def cells(self) -> int:
        return self.signs.shape[1]

    def cell_index(self, x) -> np.ndarray:
        idx = np.floor(np.asarray(x, dtype=float) * self.cells / math.pi)
        return np.clip(idx.astype(np.int64), 0, self.cells - 1)


@dataclass(frozen=True, eq=False)
class GeneralProtocolA:
    """Arbitrary one-bit message tables for task A over a fixed tree.

    tables[k] has shape (4, 2^c_k) where c_k is party k's child count; the
    entry at (digit, received) is the +-1 bit sent (or, for the root, the
    announced answer).  Received-bit indices pack the children in ascending
    party order, one bit each, with -1 encoding bit value 1.
    """

    tree: CommTree
    tables: tuple[np.ndarray, ...]

    def __post_init__(self):
        if len(self.tables) != self.tree.n_parties:
            raise ValueError("one table per party required")
        fixed = []
        for k, table in enumerate(self.tables):
            want = (4, 1 << len(self.tree.children(k)))
            arr = np.asarray(table, dtype=np.int64)
            if arr.shape != want or not np.isin(arr, (-1, 1)).all():
                raise ValueError(f"party {k} table must be +-1 with shape {want}")
            fixed.append(arr)
        object.__setattr__(self, "tables", tuple(fixed))


Strategy = ProductStrategyA | ProductStrategyB | GeneralProtocolA


def run_protocol(protocol: Strategy, tree: CommTree, inputs: Sequence) -> int:
    """Simulate the actual message passing for one input tuple.

    Product strategies send e_k = y_k a_k(x_k) * (product of received bits);
    general protocols look their message up in the table.  Returns the root's
    announced sign.
    """
    n = tree.n_parties
    if len(inputs) != n:
        raise ValueError(f"expected {n} inputs, got {len(inputs)}")
    if isinstance(protocol, GeneralProtocolA):
        if protocol.tree != tree:
            raise ValueError("protocol was built for a different tree")
        digits = [int(v) for v in inputs]
        if any(d not in (0, 1, 2, 3) for d in digits):
            raise ValueError("task A digits must lie in 0..3")
        messages: dict[int, int] = {}
        for k in (*tree.send_order(), n - 1):
            recv = 0
            for j, child in enumerate(sorted(tree.children(k))):
                recv += ((1 - messages[child]) // 2) << j
            messages[k] = int(protocol.tables[k][digits[k], recv])
        return messages[n - 1]
    task = Task.A if isinstance(protocol, ProductStrategyA) else Task.B
    if protocol.n_parties != n:
        raise ValueError("strategy arity does not match tree")
    reduced = decompose(task, inputs)
    if isinstance(protocol, ProductStrategyA):
        local = [int(protocol.signs[k, reduced.x[k]]) for k in range(n)]
    else:
        cells = protocol.cell_index(reduced.x)
        local = [int(protocol.signs[k, cells[k]]) for k in range(n)]
    messages = {}
    for k in (*tree.send_order(), n - 1):
        m = reduced.y[k] * local[k]
        for child in tree.children(k):
            m *= messages[child]
        messages[k] = m
    return messages[n - 1]


def fidelity_exact_a(strategy: ProductStrategyA) -> float:
    """Exact fidelity of a task A product strategy.

    Sums (-1)^(sum x / 2) * prod_k a_k(x_k) over the 2^(N-1) even-parity bit
    strings with uniform weight 2^(1-N).  All terms are dyadic, so the result
    carries no rounding error and exact comparisons are safe.
    """
    n = strategy.n_parties
    bits = enumerate_reduced_a(n)
    prods = np.prod(
        strategy.signs[np.arange(n)[None, :], bits], axis=1, dtype=np.float64
    )
    f = np.where((bits.sum(axis=1) // 2) % 2 == 1, -1.0, 1.0)
    return abs(float(np.dot(f, prods))) * 2.0 ** (1 - n)


def _cell_integrals(cells: int) -> np.ndarray:
    """Exact integral of e^{ix} over each uniform cell of [0, pi)."""
    edges = np.arange(cells + 1) * (math.pi / cells)
    expo = np.exp(1j * edges)
    return (expo[1:] - expo[:-1]) / 1j


def _party_amplitudes(strategy: ProductStrategyB) -> np.ndarray:
    return strategy.signs.astype(np.float64) @ _cell_integrals(strategy.cells)


def fidelity_exact_b(strategy: ProductStrategyB) -> float:
    """Exact fidelity of a task B product strategy.

    The integrand cos(sum x) * prod a_k splits over parties as the real part
    of prod_k z_k with z_k = sum_c a_k[c] * int_cell e^{ix} dx, so the
    multi-dimensional integral is evaluated from per-cell antiderivatives
    with no quadrature error beyond float rounding.
    """
    n = strategy.n_parties
    z = _party_amplitudes(strategy)
    return abs(float(np.prod(z).real)) / (2.0 * math.pi ** (n - 1))


def _decompose_batch(task: Task, inputs: np.ndarray):
    if task is Task.A:
        x = inputs % 2
        y = np.where(inputs < 2, 1.0, -1.0)
    else:
        flip = inputs >= math.pi
        x = np.where(flip, inputs - math.pi, inputs)
        y = np.where(flip, -1.0, 1.0)
    return x, y


def fidelity_mc(
    protocol: Strategy,
    tree: CommTree,
    task: Task,
    n_samples: int,
    rng: np.random.Generator,
) -> tuple[float, float]:
    """Monte Carlo fidelity |mean(T * answer)| with its binomial standard error.

    Product strategies run fully vectorised; general protocols fall back to
    the per-run message-passing simulator.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    wants = Task.B if isinstance(protocol, ProductStrategyB) else Task.A
    if task is not wants:
        raise ValueError(f"{type(protocol).__name__} plays task {wants.value}")
    if isinstance(protocol, (ProductStrategyA, ProductStrategyB)):
        inputs = sample_inputs(task, tree.n_parties, rng, size=n_samples)
        truth = task_value_batch(task, inputs)
        x, y = _decompose_batch(task, inputs)
        if isinstance(protocol, ProductStrategyA):
            local = protocol.signs[np.arange(tree.n_parties)[None, :], x]
        else:
            cells = protocol.cell_index(x)
            local = protocol.signs[np.arange(tree.n_parties)[None, :], cells]
        answers = np.prod(local, axis=1) * np.prod(y, axis=1)
    else:
        truth = np.empty(n_samples, dtype=np.int64)
        answers = np.empty(n_samples, dtype=np.int64)
        for i in range(n_samples):
            inputs = sample_inputs(task, tree.n_parties, rng)
            truth[i] = task_value_batch(task, inputs[None, :])[0]
            answers[i] = run_protocol(protocol, tree, inputs)
    mean = float(np.mean(truth * answers))
    stderr = math.sqrt(max(0.0, 1.0 - mean * mean) / n_samples)
    return abs(mean), stderr


class ClassicalBound(NamedTuple):
    fidelity: float
    success: float


def classical_bound(task: Task, n_parties: int) -> ClassicalBound:
    """Closed-form optimum over all N-1 bit protocols; success = (1+F)/2."""
    if n_parties < 1:
        raise ValueError("n_parties must be >= 1")
    if task is Task.A:
        k = (n_parties + 1) // 2
        fid = 2.0 ** (1 - k)
    else:
        fid = (2.0 / math.pi) ** (n_parties - 1)
    return ClassicalBound(fid, (1.0 + fid) / 2.0)


# --- exhaustive searches ---------------------------------------------------


def product_strategy_a_from_index(index: int, n_parties: int) -> ProductStrategyA:
    """Decode one of the 4^N product strategies; party 0 is the low digit."""
    signs = np.empty((n_parties, 2), dtype=np.int64)
    for k in range(n_parties):
        t = (index >> (2 * k)) & 3
        signs[k, 0] = 1 - 2 * (t & 1)
        signs[k, 1] = 1 - 2 * ((t >> 1) & 1)
    return ProductStrategyA(signs)


def exhaust_product_strategies_a(n_parties: int) -> tuple[np.ndarray, int]:
    """Exact fidelity of every product strategy, indexed as above.

    Returns (fidelities over all 4^N indices, argmax index); ties resolve to
    the lowest index.
    """
    total = 4**n_parties
    fids = np.empty(total)
    for idx in range(total):
        fids[idx] = fidelity_exact_a(product_strategy_a_from_index(idx, n_parties))
    return fids, int(np.argmax(fids))


class BruteForceResult(NamedTuple):
    max_fidelity: float
    protocol: GeneralProtocolA
    search_space: int


def _decoded_tables(n_children: int) -> np.ndarray:
    """All +-1 tables for a party with the given child count."""
    n_entries = 4 << n_children
    idx = np.arange(1 << n_entries)
    bits = (idx[:, None] >> np.arange(n_entries)[None, :]) & 1
    return (1 - 2 * bits).reshape(-1, 4, 1 << n_children)


def _table_from_int(value: int, n_children: int) -> np.ndarray:
    n_entries = 4 << n_children
    bits = (value >> np.arange(n_entries)) & 1
    return (1 - 2 * bits).reshape(4, 1 << n_children)


def brute_force_bound_a(tree: CommTree) -> BruteForceResult:
    """Certified task A maximum over ALL general one-bit protocols on a tree.

    Every sender table combination is enumerated explicitly; for each one the
    fidelity of every root table is evaluated (the root's entries enter the
    fidelity linearly, so all 2^(4*2^c) values come from one subset-sum pass).
    The search is exhaustive and exact in dyadic arithmetic, which certifies
    both the bound and the product-form reduction at these sizes.  Ties go to
    the lowest protocol index (sender digits high to low, then root table).
    """
    n = tree.n_parties
    if not 2 <= n <= BRUTE_FORCE_MAX_PARTIES:
        raise ValueError(f"brute force supports 2 <= N <= {BRUTE_FORCE_MAX_PARTIES}")
    tuples, weights = enumerate_a(n)
    tw = weights * task_value_batch(Task.A, tuples)
    root = n - 1
    senders = list(tree.send_order())
    child_lists = {k: sorted(tree.children(k)) for k in range(n)}
    sender_tables = {k: _decoded_tables(len(child_lists[k])) for k in senders}
    root_dim = 4 << len(child_lists[root])
    root_bits = (
        np.arange(1 << root_dim)[:, None] >> np.arange(root_dim)[None, :]
    ) & 1
    search_space = (1 << root_dim) * math.prod(
        len(sender_tables[k]) for k in senders
    )

    digit_cols = {k: tuples[:, k] for k in range(n)}
    best_fid = -1.0
    best_combo: tuple[int, ...] = ()
    best_mask = 0
    for combo in itertools.product(
        *(range(len(sender_tables[k])) for k in sorted(senders))
    ):
        table_of = dict(zip(sorted(senders), combo))
        messages: dict[int, np.ndarray] = {}
        for k in senders:
            recv = np.zeros(len(tuples), dtype=np.int64)
            for j, child in enumerate(child_lists[k]):
                recv += ((1 - messages[child]) // 2) << j
            messages[k] = sender_tables[k][table_of[k]][digit_cols[k], recv]
        recv = np.zeros(len(tuples), dtype=np.int64)
        for j, child in enumerate(child_lists[root]):
            recv += ((1 - messages[child]) // 2) << j
        state = digit_cols[root] * (1 << len(child_lists[root])) + recv
        v = np.bincount(state, weights=tw, minlength=root_dim)
        fids = np.abs(v.sum() - 2.0 * (root_bits @ v))
        mask = int(np.argmax(fids))
        if fids[mask] > best_fid:
            best_fid = float(fids[mask])
            best_combo = combo
            best_mask = mask

    tables: list[np.ndarray] = [None] * n  # type: ignore[list-item]
    for k, t in zip(sorted(senders), best_combo):
        tables[k] = _table_from_int(t, len(child_lists[k]))
    tables[root] = _table_from_int(best_mask, len(child_lists[root]))
    protocol = GeneralProtocolA(tree=tree, tables=tuple(tables))
    return BruteForceResult(best_fid, protocol, search_space)


# --- coordinate ascent for task B ------------------------------------------


class AscentResult(NamedTuple):
    strategy: ProductStrategyB
    trace: tuple[float, ...]


class OptimizeResult(NamedTuple):
    strategy: ProductStrategyB
    fidelity: float
    trace: tuple[float, ...]
    restart_fidelities: tuple[float, ...]


def coordinate_ascent_b(init: ProductStrategyB, max_sweeps: int = 500) -> AscentResult:
    """Ascend the task B fidelity over one party's cell signs at a time.

    Holding the other parties fixed, the objective is linear in party k's
    cell signs with coefficients Re(I_c * prod_{j!=k} z_j); each update sets
    every cell to the coefficient's sign, which maximises the conditional
    objective exactly.  Cells whose coefficient is exactly zero keep their
    previous sign (avoids limit cycles).  The per-sweep fidelity trace is
    monotone non-decreasing; iteration stops at the first unchanged sweep.
    """
    if init.cells < 8:
        raise ValueError("need at least 8 cells")
    n = init.n_parties
    cell_int = _cell_integrals(init.cells)
    signs = init.signs.astype(np.float64).copy()
    z = signs @ cell_int
    norm = 2.0 * math.pi ** (n - 1)
    trace = [abs(float(np.prod(z).real)) / norm]
    for _ in range(max_sweeps):
        changed = False
        for k in range(n):
            others = np.prod(np.delete(z, k))
            coeff = (cell_int * others).real
            new = np.where(coeff > 0.0, 1.0, np.where(coeff < 0.0, -1.0, signs[k]))
            if not np.array_equal(new, signs[k]):
                signs[k] = new
                z[k] = new @ cell_int
                changed = True
        trace.append(abs(float(np.prod(z).real)) / norm)
        if not changed:
            break
    return AscentResult(ProductStrategyB(signs.astype(np.int64)), tuple(trace))


def random_strategy_b(
    n_parties: int, cells: int, rng: np.random.Generator
) -> ProductStrategyB:
    return ProductStrategyB(1 - 2 * rng.integers(0, 2, size=(n_parties, cells)))


def half_split_strategy_b(n_parties: int, cells: int) -> ProductStrategyB:
    """The step strategy +1 on [0, pi/2), -1 after: optimal in the continuum."""
    row = np.where(np.arange(cells) < cells // 2, 1, -1)
    return ProductStrategyB(np.tile(row, (n_parties, 1)))


def optimize_strategy_b(
    n_parties: int,
    cells: int,
    restarts: int,
    rng: np.random.Generator,
) -> OptimizeResult:
    """Coordinate ascent from random sign starts; keeps the best fixed point.

    The objective is non-concave over the sign lattice, hence the restarts.
    Ties keep the earliest restart, so results are reproducible for a fixed
    generator state.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    best: OptimizeResult | None = None
    finals: list[float] = []
    for _ in range(restarts):
        strategy, trace = coordinate_ascent_b(random_strategy_b(n_parties, cells, rng))
        finals.append(trace[-1])
        if best is None or trace[-1] > best.fidelity:
            best = OptimizeResult(strategy, trace[-1], trace, ())
    assert best is not None
    return OptimizeResult(best.strategy, best.fidelity, best.trace, tuple(finals))
