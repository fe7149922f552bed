"""Random descent walks on the recoloring graph of K_n.

States are edge colorings; two states are adjacent when they differ on a
single edge.  A strict walk moves to a uniformly random neighbor with
smaller psi and stops when none exists.  A mild walk prefers the same
improving moves and, only when none exists, takes a uniformly random
equal-psi neighbor instead of stopping, so it drifts across plateaus but
never walks away from available progress.  Improving moves are found by
capped rejection sampling against the full (edge, color) proposal space,
falling back to complete enumeration, which keeps the choice exactly
uniform while staying cheap when many moves qualify.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum, IntEnum

import numpy as np

from ._backend import kernels
from .core import Coloring, WalkTrace, edge_tables

__all__ = [
    "WalkMode",
    "WalkStatus",
    "WalkOutcome",
    "qualifying_moves",
    "walk_step",
    "run_walk",
]


class WalkMode(IntEnum):
    STRICT = 0
    MILD = 1


class WalkStatus(Enum):
    REACHED_OF = "reached-of"
    STUCK_LOCAL_OPT = "stuck-local-opt"
    STEP_LIMIT = "step-limit"


_STATUS_BY_CODE = {
    kernels.PHASE_REACHED: WalkStatus.REACHED_OF,
    kernels.PHASE_STUCK: WalkStatus.STUCK_LOCAL_OPT,
    kernels.PHASE_LIMIT: WalkStatus.STEP_LIMIT,
}


@dataclass
class WalkOutcome:
    terminal: Coloring
    status: WalkStatus
    steps: int
    trace: WalkTrace | None = None


def delta_table(coloring: Coloring) -> np.ndarray:
    """(n_edges, n-1) matrix of psi deltas; column c-1 is the delta for
    recoloring each edge to c, with the edge's current color masked to a
    huge sentinel."""
    n = coloring.n
    tab = edge_tables(n)
    counts = coloring.profile.counts
    cur = coloring.colors
    pair = counts[tab.u].astype(np.int32) + counts[tab.v]
    rows = np.arange(tab.n_edges)
    base = pair[rows, cur]
    delta = pair[:, 1:] - base[:, None] + 2
    delta[rows, cur - 1] = np.iinfo(np.int32).max
    return delta


def qualifying_moves(coloring: Coloring, mode: WalkMode):
    """All moves a walk in ``mode`` may take from this state, as
    ((i, j), new_color, delta) sorted by edge then color.  A mild walk
    prefers improving moves, so its set contains equal-psi moves only when
    no improving one exists."""
    n = coloring.n
    tab = edge_tables(n)
    delta = delta_table(coloring)
    mask = delta < 0
    if mode == WalkMode.MILD and not mask.any():
        mask = delta == 0
    rows, cols = np.nonzero(mask)
    return [((int(tab.u[e]), int(tab.v[e])), int(c) + 1, int(delta[e, c]))
            for e, c in zip(rows, cols)]


def _sync(coloring: Coloring, psi: int) -> None:
    prof = coloring.profile
    prof.psi = int(psi)
    prof.phi = 2 * (int(psi) + coloring.n_edges)


def walk_step(coloring: Coloring, mode: WalkMode, rng: np.random.Generator):
    """Apply one uniformly chosen qualifying move in place.

    Returns ((i, j), new_color, delta) or None when no move qualifies
    (at an OF or a strict local optimum)."""
    n = coloring.n
    tab = edge_tables(n)
    prof = coloring.profile
    trace = np.empty((1, 4), dtype=np.int64)
    steps, psi, _ = kernels.walk_phase(
        coloring.colors, prof.counts, tab.u, tab.v, prof.psi,
        int(mode), 1, rng.bit_generator, trace)
    if steps == 0:
        return None
    before = prof.psi
    _sync(coloring, psi)
    e, _, new = int(trace[0, 0]), int(trace[0, 1]), int(trace[0, 2])
    return ((int(tab.u[e]), int(tab.v[e])), new, int(psi) - before)


def run_walk(start: Coloring, mode: WalkMode, max_steps: int,
             rng: np.random.Generator, record_trace: bool = False) -> WalkOutcome:
    """Walk from a copy of ``start`` until an OF, a dead end, or the cap."""
    if max_steps < 0:
        raise ValueError("max_steps must be nonnegative")
    state = start.copy()
    prof = state.profile
    tab = edge_tables(state.n)
    bg = rng.bit_generator
    total = 0
    trace = WalkTrace([]) if record_trace else None
    chunk_cap = 1 << 16 if record_trace else max_steps
    status_code = kernels.PHASE_REACHED if prof.psi == 0 else kernels.PHASE_LIMIT
    while total < max_steps:
        chunk = min(chunk_cap, max_steps - total)
        buf = np.empty((chunk, 4), dtype=np.int64) if record_trace else None
        steps, psi, status_code = kernels.walk_phase(
            state.colors, prof.counts, tab.u, tab.v, prof.psi,
            int(mode), chunk, bg, buf)
        _sync(state, psi)
        if record_trace:
            for r in range(steps):
                e = int(buf[r, 0])
                trace.append(total + r + 1, int(buf[r, 3]),
                             ("recolor", int(tab.u[e]), int(tab.v[e]),
                              int(buf[r, 1]), int(buf[r, 2])))
        total += steps
        if status_code != kernels.PHASE_LIMIT:
            break
        if steps < chunk:
            break
    return WalkOutcome(state, _STATUS_BY_CODE[status_code], total, trace)
