"""Two-vertex color exchanges and guaranteed escapes from local optima.

A strict walk can only get stuck at a coloring where every monochromatic
component is an edge or a Vee (two same-colored edges at a center).  The
escape move swaps colors between a vertex pair (u, v): for each other
vertex w, the colors of wu and wv may be exchanged.  Which witnesses to
swap is chosen by balancing a conflict multigraph on the colors: one arc
per witness w from color(wu) to color(wv).  Reversing arcs along paths
until every color's in/out degrees differ by at most one realizes the
exchange that strictly lowers phi whenever some color appears twice at u
and never at v.

Two escape cases cover every local optimum: a doubled color that is
missing somewhere (one flip suffices), or, failing that, a single recolor
between two Vees of the same color, followed by a flip if the recolor
alone did not descend.  ``strict_algorithm`` runs descent phases plus
atomic escapes; ``weak_algorithm`` is the same climb with every flip
unrolled into single-edge recolorings, so the whole run lives on the
recoloring graph at the cost of a bounded uphill excursion.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .core import (Coloring, WalkTrace, apply_recolor, delta_psi_recolor,
                   edge_tables)
from .walks import delta_table

__all__ = [
    "ConflictArc",
    "ConflictMultigraph",
    "Reorientation",
    "EscapePlan",
    "ClimbStats",
    "ClimbResult",
    "build_conflict_multigraph",
    "balanced_reorientation",
    "apply_flip",
    "plan_escape",
    "strict_algorithm",
    "weak_algorithm",
]


@dataclass(frozen=True)
class ConflictArc:
    """Arc contributed by witness w: from color(wu) to color(wv)."""
    witness: int
    tail: int
    head: int


@dataclass(frozen=True)
class ConflictMultigraph:
    """Directed multigraph on the colors recording how a (u, v) exchange
    moves color mass between the two vertices."""
    n: int
    u: int
    v: int
    arcs: tuple[ConflictArc, ...]

    def out_degree(self, color: int) -> int:
        return sum(1 for a in self.arcs if a.tail == color)

    def in_degree(self, color: int) -> int:
        return sum(1 for a in self.arcs if a.head == color)


def build_conflict_multigraph(coloring: Coloring, u: int, v: int) -> ConflictMultigraph:
    """One arc per witness w (w != u, v), ordered by witness."""
    n = coloring.n
    if u == v:
        raise ValueError("u and v must be distinct")
    tab = edge_tables(n)
    colors = coloring.colors
    arcs = tuple(
        ConflictArc(w, int(colors[tab.index[w, u]]), int(colors[tab.index[w, v]]))
        for w in range(1, n + 1) if w != u and w != v)
    return ConflictMultigraph(n, u, v, arcs)


@dataclass(frozen=True)
class Reorientation:
    """Outcome of balancing a conflict multigraph.

    ``reversed_witnesses`` identifies the arcs whose net orientation
    flipped (the witnesses whose edge pair actually swaps colors);
    ``paths`` lists every path reversal in production order as witness
    sequences from path start to path end, which is the unrolling order.
    ``arc_colors`` snapshots the (color wu, color wv) pair per witness at
    build time so a stale application can be detected.
    """
    u: int
    v: int
    reversed_witnesses: frozenset[int]
    paths: tuple[tuple[int, ...], ...]
    arc_colors: dict[int, tuple[int, int]]


def _find_cycle(arc_ids, endpoints):
    """A directed cycle (as a list of arc ids) in the given arcs, or None."""
    adj: dict[int, list[tuple[int, int]]] = {}
    nodes: set[int] = set()
    for i in arc_ids:
        t, h = endpoints(i)
        adj.setdefault(t, []).append((h, i))
        nodes.update((t, h))
    for key in adj:
        adj[key].sort()
    state = dict.fromkeys(nodes, 0)  # 0 unvisited, 1 on path, 2 done
    for root in sorted(nodes):
        if state[root]:
            continue
        stack = [(root, 0)]
        on_path = [root]
        arc_path: list[int] = []
        state[root] = 1
        while stack:
            node, idx = stack[-1]
            succ = adj.get(node, ())
            if idx < len(succ):
                stack[-1] = (node, idx + 1)
                head, aid = succ[idx]
                if state[head] == 1:
                    return arc_path[on_path.index(head):] + [aid]
                if state[head] == 0:
                    state[head] = 1
                    stack.append((head, 0))
                    on_path.append(head)
                    arc_path.append(aid)
            else:
                stack.pop()
                state[node] = 2
                on_path.pop()
                if arc_path:
                    arc_path.pop()
    return None


def _longest_path(live, endpoints, anchor, reverse):
    """Arc ids of a longest path from ``anchor`` (or into it when
    ``reverse``), listed start-to-end in the true orientation.  The live
    arcs must be acyclic.  Ties break toward the lowest end color and
    lexicographically first arcs."""
    directed = []
    for i in live:
        t, h = endpoints(i)
        if reverse:
            t, h = h, t
        directed.append((t, h, i))
    nodes = sorted({x for t, h, _ in directed for x in (t, h)})
    out: dict[int, list[tuple[int, int]]] = {x: [] for x in nodes}
    indeg = dict.fromkeys(nodes, 0)
    for t, h, i in sorted(directed):
        out[t].append((h, i))
        indeg[h] += 1
    ready = [x for x in nodes if indeg[x] == 0]
    heapq.heapify(ready)
    topo = []
    while ready:
        x = heapq.heappop(ready)
        topo.append(x)
        for h, i in out[x]:
            indeg[h] -= 1
            if indeg[h] == 0:
                heapq.heappush(ready, h)
    assert len(topo) == len(nodes), "live arcs must be acyclic"
    dist = dict.fromkeys(nodes, -1)
    pred: dict[int, tuple[int, int]] = {}
    dist[anchor] = 0
    for x in topo:
        if dist[x] < 0:
            continue
        for h, i in out[x]:
            if dist[x] + 1 > dist[h]:
                dist[h] = dist[x] + 1
                pred[h] = (x, i)
    best = max(dist.values())
    assert best >= 1, "anchor has no live arc"
    cur = min(x for x in nodes if dist[x] == best)
    path = []
    while cur != anchor:
        cur, aid = pred[cur]
        path.append(aid)
    path.reverse()
    if reverse:
        path.reverse()
    return path


def balanced_reorientation(h: ConflictMultigraph) -> Reorientation:
    """Reverse paths until every color has |out - in| <= 1.

    Directed cycles are frozen in their current orientation before each
    reversal (they contribute nothing to any imbalance); in the acyclic
    remainder, a longest path from a color with surplus >= 2 ends at a
    deficit color, so reversing it lowers the total imbalance by at least
    two, which bounds the number of reversals.  Loops are never reversed.
    The procedure leaves choices open (which cycles to freeze, which
    unbalanced color to serve, which longest path to reverse); ties break
    toward the lowest color so the outcome is a deterministic function of
    the multigraph.
    """
    arcs = h.arcs
    orient = [True] * len(arcs)
    flips = [0] * len(arcs)
    non_loops = [i for i, a in enumerate(arcs) if a.tail != a.head]
    frozen: set[int] = set()
    paths: list[tuple[int, ...]] = []

    def endpoints(i):
        a = arcs[i]
        return (a.tail, a.head) if orient[i] else (a.head, a.tail)

    while True:
        while True:
            cycle = _find_cycle([i for i in non_loops if i not in frozen],
                                endpoints)
            if cycle is None:
                break
            frozen.update(cycle)
        live = [i for i in non_loops if i not in frozen]
        imbalance: dict[int, int] = {}
        for i in live:
            t, hd = endpoints(i)
            imbalance[t] = imbalance.get(t, 0) + 1
            imbalance[hd] = imbalance.get(hd, 0) - 1
        anchors = ([(c, False) for c in sorted(imbalance) if imbalance[c] >= 2]
                   + [(c, True) for c in sorted(imbalance) if imbalance[c] <= -2])
        if not anchors:
            break
        color, into = anchors[0]
        path = _longest_path(live, endpoints, color, reverse=into)
        for i in path:
            orient[i] = not orient[i]
            flips[i] += 1
        paths.append(tuple(arcs[i].witness for i in path))

    reversed_ws = frozenset(arcs[i].witness for i in range(len(arcs))
                            if flips[i] % 2)
    out: dict[int, int] = {}
    inn: dict[int, int] = {}
    for i, a in enumerate(arcs):
        t, hd = (a.tail, a.head) if orient[i] else (a.head, a.tail)
        out[t] = out.get(t, 0) + 1
        inn[hd] = inn.get(hd, 0) + 1
    assert all(abs(out.get(c, 0) - inn.get(c, 0)) <= 1
               for c in set(out) | set(inn)), "reorientation is unbalanced"
    return Reorientation(h.u, h.v, reversed_ws, tuple(paths),
                         {a.witness: (a.tail, a.head) for a in arcs})


def apply_flip(coloring: Coloring, u: int, v: int, reorientation: Reorientation) -> Coloring:
    """Swap the (wu, wv) colors of every net-reversed witness, atomically.

    Raises if the reorientation was planned for a different vertex pair or
    if any witness arc no longer matches the coloring it was built from.
    """
    n = coloring.n
    if (u, v) != (reorientation.u, reorientation.v):
        raise ValueError("reorientation was built for a different vertex pair")
    tab = edge_tables(n)
    colors = coloring.colors
    for w, (a, b) in reorientation.arc_colors.items():
        if colors[tab.index[w, u]] != a or colors[tab.index[w, v]] != b:
            raise ValueError(f"stale reorientation: witness {w} colors changed "
                             "since it was planned")
    prof = coloring.profile
    counts = prof.counts
    row_u = counts[u]
    row_v = counts[v]
    before = int(np.sum(row_u.astype(np.int64) ** 2)
                 + np.sum(row_v.astype(np.int64) ** 2))
    for w in sorted(reorientation.reversed_witnesses):
        a, b = reorientation.arc_colors[w]
        colors[tab.index[w, u]] = b
        colors[tab.index[w, v]] = a
        row_u[a] -= 1
        row_u[b] += 1
        row_v[b] -= 1
        row_v[a] += 1
    after = int(np.sum(row_u.astype(np.int64) ** 2)
                + np.sum(row_v.astype(np.int64) ** 2))
    prof.phi += after - before
    prof.psi = prof.phi // 2 - tab.n_edges
    return coloring


def _flip_delta_psi(coloring: Coloring, reo: Reorientation) -> int:
    """psi change apply_flip would cause, computed without mutating."""
    counts = coloring.profile.counts
    xu = counts[reo.u].astype(np.int64).copy()
    xv = counts[reo.v].astype(np.int64).copy()
    before = int(np.sum(xu ** 2) + np.sum(xv ** 2))
    for w in reo.reversed_witnesses:
        a, b = reo.arc_colors[w]
        xu[a] -= 1
        xu[b] += 1
        xv[b] -= 1
        xv[a] += 1
    after = int(np.sum(xu ** 2) + np.sum(xv ** 2))
    return (after - before) // 2


@dataclass(frozen=True)
class EscapePlan:
    """Moves that leave a local optimum with a net psi decrease.

    ``moves`` holds ("recolor", (i, j), new_color) and
    ("flip", u, v, Reorientation) entries, to be applied in order to the
    exact coloring the plan was built from.
    """
    case: str
    moves: tuple
    net_delta_psi: int


def _pick(rng: np.random.Generator | None, seq):
    """Uniform choice, or the deterministic head without a generator."""
    if rng is None or len(seq) == 1:
        return seq[0]
    return seq[int(rng.integers(len(seq)))]


def plan_escape(coloring: Coloring,
                rng: np.random.Generator | None = None) -> EscapePlan:
    """Escape plan for a strict local optimum.

    Case A: some color alpha is doubled at a vertex u and absent at a
    vertex v; the balanced (u, v) flip strictly descends.  Case B: every
    doubled color is present everywhere, so two Vees of the same doubled
    color are bridged: recolor one Vee end toward a color missing at the
    center, which either descends outright or creates a doubled color that
    case A then flips.  Which feature to escape (the color, the doubled
    and absent vertices, the bridge end) is drawn uniformly from the
    qualifying options via ``rng``; without a generator ties break toward
    the lowest color, lowest center, smallest missing color, and smaller
    end, making the plan a deterministic function of the coloring.  The
    balancing inside each flip is deterministic either way.
    """
    prof = coloring.profile
    n = coloring.n
    if prof.psi == 0:
        raise ValueError("already a one-factorization, nothing to escape")
    if int(delta_table(coloring).min()) < 0:
        raise ValueError("not a local optimum: a decreasing recolor exists")
    counts = prof.counts

    case_a = []
    for alpha in range(1, n):
        doubled = np.flatnonzero(counts[1:, alpha] == 2)
        if doubled.size == 0:
            continue
        absent = np.flatnonzero(counts[1:, alpha] == 0)
        if absent.size == 0:
            continue
        case_a.append((alpha, doubled, absent))
    if case_a:
        alpha, doubled, absent = _pick(rng, case_a)
        u = int(_pick(rng, doubled)) + 1
        v = int(_pick(rng, absent)) + 1
        reo = balanced_reorientation(build_conflict_multigraph(coloring, u, v))
        d = _flip_delta_psi(coloring, reo)
        assert d < 0, "case A flip failed to descend"
        return EscapePlan("A", (("flip", u, v, reo),), d)

    vee_colors = [c for c in range(1, n) if np.any(counts[1:, c] == 2)]
    assert vee_colors, "psi > 0 local optimum must have a doubled color"
    alpha = _pick(rng, vee_colors)
    centers = [int(x) + 1 for x in np.flatnonzero(counts[1:, alpha] == 2)]
    assert len(centers) >= 2, "case B requires two Vees of the same color"

    def vee_ends(center: int) -> list[int]:
        tab = edge_tables(n)
        return sorted(int(w) for w in range(1, n + 1) if w != center
                      and coloring.colors[tab.index[center, w]] == alpha)

    # a recolor choice that descends on its own wins outright
    descending = []
    for v2 in centers:
        missing = [m for m in range(1, n) if counts[v2, m] == 0]
        for beta in missing:
            for v1 in vee_ends(v2):
                if counts[v1, beta] == 0:
                    descending.append((v1, v2, beta))
    if descending:
        v1, v2, beta = _pick(rng, descending)
        d = delta_psi_recolor(coloring, (v1, v2), beta)
        assert d < 0
        return EscapePlan("B", (("recolor", (v1, v2), beta),), d)

    v2 = _pick(rng, centers)
    beta = _pick(rng, [m for m in range(1, n) if counts[v2, m] == 0])
    # an end that is not itself doubled in alpha keeps the follow-up flip
    # strictly decreasing
    v1 = _pick(rng, [w for w in vee_ends(v2) if counts[w, alpha] == 1])
    d1 = delta_psi_recolor(coloring, (v1, v2), beta)
    assert d1 == 0
    scratch = coloring.copy()
    apply_recolor(scratch, (v1, v2), beta)
    c2 = _pick(rng, [c for c in centers if c != v2])
    reo = balanced_reorientation(build_conflict_multigraph(scratch, c2, v1))
    d2 = _flip_delta_psi(scratch, reo)
    assert d2 < 0, "case B follow-up flip failed to descend"
    return EscapePlan("B", (("recolor", (v1, v2), beta),
                            ("flip", c2, v1, reo)), d1 + d2)


@dataclass
class ClimbStats:
    steps: int = 0
    walk_steps: int = 0
    escapes_case_a: int = 0
    escapes_case_b: int = 0
    flips_executed: int = 0
    zero_phi_steps: int = 0
    max_psi_excess: int = 0

    @property
    def dn_steps(self) -> int:
        """Two-vertex moves: each walk recolor and each whole escape counts
        once (an escape may pair a phi-neutral recolor with its flip, and
        only their combined effect drops phi)."""
        return self.walk_steps + self.escapes_case_a + self.escapes_case_b


@dataclass
class ClimbResult:
    coloring: Coloring
    stats: ClimbStats
    trace: WalkTrace | None = None


class _ExcessTracker:
    """Peak of psi above its running minimum along a trajectory."""

    __slots__ = ("run_min", "peak")

    def __init__(self, psi0: int):
        self.run_min = psi0
        self.peak = 0

    def update(self, psi: int) -> None:
        if psi - self.run_min > self.peak:
            self.peak = psi - self.run_min
        if psi < self.run_min:
            self.run_min = psi


def _execute_plan(state: Coloring, plan: EscapePlan, unroll: bool,
                  stats: ClimbStats, trace: WalkTrace | None,
                  excess: _ExcessTracker | None) -> None:
    prof = state.profile

    def record(move: tuple) -> None:
        stats.steps += 1
        if excess is not None:
            excess.update(prof.psi)
        if trace is not None:
            trace.append(stats.steps, prof.psi, move)

    for move in plan.moves:
        if move[0] == "recolor":
            _, edge, newc = move
            old = state.color(*edge)
            d = delta_psi_recolor(state, edge, newc)
            apply_recolor(state, edge, newc)
            if d == 0:
                stats.zero_phi_steps += 1
            record(("recolor", edge[0], edge[1], old, newc))
        else:
            _, u, v, reo = move
            if unroll:
                for path in reo.paths:
                    for w in path:
                        a = state.color(w, u)
                        b = state.color(w, v)
                        du = delta_psi_recolor(state, (w, u), b)
                        dv = delta_psi_recolor(state, (w, v), a)
                        # half-step order: stay nearest the current level,
                        # non-dipping side on magnitude ties; a wide
                        # transient can overshoot the excursion bound and a
                        # dip lowers the floor every later peak is measured
                        # against
                        if (abs(dv), dv < 0) < (abs(du), du < 0):
                            apply_recolor(state, (w, v), a)
                            record(("unroll", min(w, v), max(w, v), b, a))
                            apply_recolor(state, (w, u), b)
                            record(("unroll", min(w, u), max(w, u), a, b))
                        else:
                            apply_recolor(state, (w, u), b)
                            record(("unroll", min(w, u), max(w, u), a, b))
                            apply_recolor(state, (w, v), a)
                            record(("unroll", min(w, v), max(w, v), b, a))
            else:
                swaps = tuple((w, state.color(w, u), state.color(w, v))
                              for w in sorted(reo.reversed_witnesses))
                apply_flip(state, u, v, reo)
                record(("flip", u, v, swaps))
            stats.flips_executed += 1
    if plan.case == "A":
        stats.escapes_case_a += 1
    else:
        stats.escapes_case_b += 1


def _climb(start: Coloring, rng: np.random.Generator, unroll: bool,
           record_trace: bool) -> ClimbResult:
    state = start.copy()
    prof = state.profile
    tab = edge_tables(state.n)
    bg = rng.bit_generator
    stats = ClimbStats()
    trace = WalkTrace([]) if record_trace else None
    excess = _ExcessTracker(prof.psi) if unroll else None
    rounds_left = prof.phi // 2 + 4  # descent removes >= 2 phi per round

    while prof.psi > 0:
        rounds_left -= 1
        if rounds_left < 0:
            raise RuntimeError("climb failed to make progress")
        budget = prof.psi  # a strict phase can never take more steps
        buf = np.empty((budget, 4), dtype=np.int64) if record_trace else None
        steps, psi, code = kernels.walk_phase(
            state.colors, prof.counts, tab.u, tab.v, prof.psi,
            kernels.MODE_STRICT, budget, bg, buf)
        prof.psi = int(psi)
        prof.phi = 2 * (int(psi) + tab.n_edges)
        if record_trace:
            base = stats.steps
            for r in range(steps):
                e = int(buf[r, 0])
                trace.append(base + r + 1, int(buf[r, 3]),
                             ("recolor", int(tab.u[e]), int(tab.v[e]),
                              int(buf[r, 1]), int(buf[r, 2])))
        stats.steps += steps
        stats.walk_steps += steps
        if excess is not None:
            excess.update(prof.psi)
        if code == kernels.PHASE_REACHED:
            break
        if code == kernels.PHASE_LIMIT:
            continue
        plan = plan_escape(state, rng)
        _execute_plan(state, plan, unroll, stats, trace, excess)

    if excess is not None:
        stats.max_psi_excess = excess.peak
    return ClimbResult(state, stats, trace)


def strict_algorithm(start: Coloring, rng: np.random.Generator,
                     record_trace: bool = False) -> ClimbResult:
    """Descend to a one-factorization: strict walk phases with atomic flip
    escapes at local optima.  Every move lowers phi, so the total step
    count is at most phi(start) / 2."""
    return _climb(start, rng, unroll=False, record_trace=record_trace)


def weak_algorithm(start: Coloring, rng: np.random.Generator,
                   record_trace: bool = False) -> ClimbResult:
    """Same climb as ``strict_algorithm`` but every flip is unrolled into
    single-edge recolorings (witness by witness along each reversal path),
    so the whole trajectory lives on the recoloring graph; psi may rise
    above its running minimum during an unrolled flip, by a bounded amount
    recorded in ``stats.max_psi_excess``."""
    return _climb(start, rng, unroll=True, record_trace=record_trace)
