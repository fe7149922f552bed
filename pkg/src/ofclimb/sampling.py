"""Fixed-temperature Metropolis sampling over edge colorings.

The chain proposes a uniform (edge, new color) pair and accepts with
probability min(1, epsilon**delta_psi), 0 < epsilon <= 1.  Downhill and
level moves always pass, so epsilon = 1 is the lazy uniform walk on the
full coloring space and smaller epsilon concentrates the stationary law
pi(C) proportional to epsilon**psi(C) on one-factorizations.  At n = 4
the whole space (3^6 states) is enumerated exactly, which pins the
stationary law and detailed balance to machine precision and anchors the
long-run occupancy test.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .core import Coloring, WalkTrace, edge_tables
from .walks import WalkStatus, run_walk, WalkMode

__all__ = [
    "MetropolisResult",
    "StationaryResult",
    "RestartResult",
    "metropolis_step",
    "run_metropolis",
    "exact_stationary",
    "perturb",
    "restart_experiment",
]


def _check_epsilon(epsilon: float) -> float:
    epsilon = float(epsilon)
    if not 0.0 < epsilon <= 1.0:
        raise ValueError(f"epsilon must lie in (0, 1], got {epsilon}")
    return epsilon


def _check_order(n: int) -> None:
    if n < 4:
        raise ValueError("the chain needs at least two colors, so n >= 4")


def _sync(coloring: Coloring, psi: int) -> None:
    prof = coloring.profile
    prof.psi = int(psi)
    prof.phi = 2 * (int(psi) + coloring.n_edges)


def metropolis_step(coloring: Coloring, epsilon: float,
                    rng: np.random.Generator) -> bool:
    """One proposal, applied in place when accepted.  Returns acceptance."""
    epsilon = _check_epsilon(epsilon)
    _check_order(coloring.n)
    tab = edge_tables(coloring.n)
    prof = coloring.profile
    trace = np.empty((1, 5), dtype=np.int64)
    _, psi, *_ = kernels.metropolis_phase(
        coloring.colors, prof.counts, tab.u, tab.v, prof.psi, epsilon, 1,
        rng.bit_generator, trace=trace)
    _sync(coloring, psi)
    return bool(trace[0, 3])


@dataclass
class MetropolisResult:
    terminal: Coloring
    steps: int
    accepts: int
    of_steps: int
    of_entries: int
    distinct_ofs: int
    snapshots_truncated: bool
    snapshots: np.ndarray | None = None
    occupancy: np.ndarray | None = None
    trace: WalkTrace | None = None

    @property
    def acceptance_rate(self) -> float:
        return self.accepts / self.steps if self.steps else 0.0

    @property
    def of_fraction(self) -> float:
        return self.of_steps / self.steps if self.steps else 0.0


def state_weights(n: int) -> np.ndarray:
    """Mixed-radix weights turning a color vector into a state index:
    index = sum over edges of (color - 1) * (n-1)**edge."""
    m = n * (n - 1) // 2
    return (n - 1) ** np.arange(m, dtype=np.int64)


def state_index(coloring: Coloring) -> int:
    return int(np.dot(coloring.colors.astype(np.int64) - 1,
                      state_weights(coloring.n)))


def run_metropolis(start: Coloring, epsilon: float, max_steps: int,
                   rng: np.random.Generator, stop_at_of: bool = False,
                   record_occupancy: bool = False, record_trace: bool = False,
                   snapshot_cap: int = 4096) -> MetropolisResult:
    """Run the chain from a copy of ``start`` for ``max_steps`` proposals
    (or until the first OF when ``stop_at_of``).

    Tracks time spent at psi == 0, entries into that set, and distinct OFs
    seen (via snapshots, up to ``snapshot_cap`` entries).  Full per-state
    occupancy is only available at n = 4.
    """
    epsilon = _check_epsilon(epsilon)
    state = start.copy()
    n = state.n
    _check_order(n)
    tab = edge_tables(n)
    prof = state.profile
    occupancy = None
    weights = None
    idx = 0
    if record_occupancy:
        if n != 4:
            raise ValueError("full occupancy is only tractable at n = 4")
        occupancy = np.zeros((n - 1) ** tab.n_edges, dtype=np.int64)
        weights = state_weights(n)
        idx = state_index(state)
    snaps = np.empty((snapshot_cap, tab.n_edges), dtype=np.int32)
    snap_steps = np.empty(snapshot_cap, dtype=np.int64)
    trace = WalkTrace([]) if record_trace else None

    total = 0
    accepts = 0
    of_steps = 0
    entries = 0
    chunk_cap = 1 << 16 if record_trace else max_steps
    while total < max_steps:
        chunk = min(chunk_cap, max_steps - total)
        buf = np.empty((chunk, 5), dtype=np.int64) if record_trace else None
        room = snaps[min(entries, snapshot_cap):]
        room_steps = snap_steps[min(entries, snapshot_cap):]
        steps, psi, of_k, acc_k, ent_k, idx = kernels.metropolis_phase(
            state.colors, prof.counts, tab.u, tab.v, prof.psi, epsilon,
            chunk, rng.bit_generator, stop_at_of, occupancy, weights, idx,
            room, room_steps, buf)
        _sync(state, psi)
        if record_trace:
            for r in range(steps):
                e = int(buf[r, 0])
                i, j = int(tab.u[e]), int(tab.v[e])
                old, prop = int(buf[r, 1]), int(buf[r, 2])
                if buf[r, 3]:
                    move = ("mh-accept", i, j, old, prop)
                else:
                    move = ("mh-hold", i, j, old, prop)
                trace.append(total + r + 1, int(buf[r, 4]), move)
        room_steps[:min(ent_k, len(room_steps))] += total
        total += steps
        accepts += acc_k
        of_steps += of_k
        entries += ent_k
        if stop_at_of and prof.psi == 0:
            break
        if steps < chunk:
            break

    kept = min(entries, snapshot_cap)
    distinct = len({snaps[r].tobytes() for r in range(kept)})
    return MetropolisResult(state, total, accepts, of_steps, entries,
                            distinct, entries > snapshot_cap,
                            snaps[:kept].copy(), occupancy, trace)


@dataclass
class StationaryResult:
    """Exact chain analysis on the full n = 4 state space."""
    epsilon: float
    pi: np.ndarray
    psi: np.ndarray
    detailed_balance_residual: float
    closed_form_gap: float

    @property
    def pi_closed_form(self) -> np.ndarray:
        w = self.epsilon ** self.psi.astype(np.float64)
        return w / w.sum()


def exact_stationary(epsilon: float, n: int = 4) -> StationaryResult:
    """Stationary distribution of the chain on all (n-1)^C(n,2) colorings.

    Only n = 4 (729 states) is supported.  The distribution is solved from
    the explicit transition matrix and checked two ways: against the
    closed form pi proportional to epsilon**psi, and for detailed balance
    of that closed form, both to near machine precision.
    """
    epsilon = _check_epsilon(epsilon)
    if n != 4:
        raise ValueError("exact enumeration is only tractable at n = 4")
    tab = edge_tables(n)
    m = tab.n_edges
    ncolors = n - 1
    n_states = ncolors ** m
    weights = state_weights(n)

    digits = (np.arange(n_states)[:, None] // weights[None, :]) % ncolors
    psi = np.empty(n_states, dtype=np.int64)
    for s in range(n_states):
        counts = np.zeros((n + 1, n), dtype=np.int64)
        for e in range(m):
            c = int(digits[s, e]) + 1
            counts[tab.u[e], c] += 1
            counts[tab.v[e], c] += 1
        psi[s] = int(np.sum(counts ** 2)) // 2 - m

    proposals = m * (ncolors - 1)
    P = np.zeros((n_states, n_states))
    for s in range(n_states):
        for e in range(m):
            c = int(digits[s, e])
            for new in range(ncolors):
                if new == c:
                    continue
                t = s + (new - c) * int(weights[e])
                d = int(psi[t] - psi[s])
                a = 1.0 if d <= 0 else epsilon ** d
                P[s, t] += a / proposals
                P[s, s] += (1.0 - a) / proposals

    a_mat = np.vstack([P.T - np.eye(n_states), np.ones(n_states)])
    b = np.zeros(n_states + 1)
    b[-1] = 1.0
    pi, *_ = np.linalg.lstsq(a_mat, b, rcond=None)

    w = epsilon ** psi.astype(np.float64)
    pi_cf = w / w.sum()
    flow = pi_cf[:, None] * P
    residual = float(np.abs(flow - flow.T).max())
    gap = float(np.abs(pi - pi_cf).max())
    return StationaryResult(epsilon, pi, psi, residual, gap)


def perturb(coloring: Coloring, p: float, rng: np.random.Generator,
            force_different: bool = False) -> Coloring:
    """Fresh coloring with each edge independently resampled with
    probability ``p``: uniform over all colors, or over the other colors
    when ``force_different``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    n = coloring.n
    state = coloring.copy()
    state._profile = None
    mask = rng.random(state.colors.shape[0]) < p
    k = int(mask.sum())
    if k == 0:
        return state
    if force_different:
        if n < 4:
            raise ValueError("no alternative colors exist below n = 4")
        shift = rng.integers(1, n - 1, size=k, dtype=np.int64)
        state.colors[mask] = ((state.colors[mask] - 1 + shift) % (n - 1) + 1).astype(np.int32)
    else:
        state.colors[mask] = rng.integers(1, n, size=k, dtype=np.int64).astype(np.int32)
    return state


@dataclass
class RestartResult:
    """Where perturbed restarts of a mild walk land, relative to a base OF."""
    n: int
    p: float
    trials: int
    failures: int
    same_of: int
    same_class: int | None
    base: Coloring

    @property
    def completed(self) -> int:
        return self.trials - self.failures

    @property
    def frac_same_of(self) -> float:
        return self.same_of / self.completed if self.completed else 0.0

    @property
    def frac_same_class(self) -> float | None:
        if self.same_class is None or not self.completed:
            return None
        return self.same_class / self.completed


def restart_experiment(n: int, p: float, trials: int,
                       rng: np.random.Generator, max_steps: int | None = None,
                       base: Coloring | None = None) -> RestartResult:
    """Perturb a base OF ``trials`` times and let a mild walk settle:
    how often does it return to the base point, and (at n = 8) to the base
    isomorphism class?  Walks that miss the cap count as failures."""
    from .flips import strict_algorithm

    _check_order(n)
    if max_steps is None:
        max_steps = 100 * n ** 4
    if base is None:
        base = strict_algorithm(Coloring.uniform_random(n, rng), rng).coloring
    if base.psi != 0:
        raise ValueError("base coloring must be a one-factorization")
    classify = None
    base_label = None
    if n == 8:
        from .analysis import classify_of8
        classify = classify_of8
        base_label = classify(base)
    failures = 0
    same_of = 0
    same_class = 0 if classify else None
    for _ in range(trials):
        shaken = perturb(base, p, rng)
        out = run_walk(shaken, WalkMode.MILD, max_steps, rng)
        if out.status is not WalkStatus.REACHED_OF:
            failures += 1
            continue
        if out.terminal == base:
            same_of += 1
        if classify is not None and classify(out.terminal) == base_label:
            same_class += 1
    return RestartResult(n, p, trials, failures, same_of, same_class, base)
