"""Alternative local-search state spaces for building one-factorizations.

Three encodings, each with its own conflict count driven to zero:

* ``PartialColoring``: proper partial edge colorings of K_n; psi is the
  number of uncolored edges.  Step 1 colors an uncolored edge with a color
  missing at one end, displacing at most one conflicting edge; step 2
  completes a deficient color class on two vertices that both miss it,
  overwriting whatever colored edge sits between them.
* ``MatchingFamily``: n-1 perfect matchings, not necessarily disjoint; psi
  is the number of uncovered K_n edges.  A four-switch removes two edges
  of one matching and rewires their four endpoints the better of the two
  possible ways.
* ``RowLatinArray``: n rows, each a permutation of 1..n; psi counts equal
  pairs within columns, zero exactly for Latin squares.  The move swaps
  two entries of one row.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import Coloring, edge_tables

__all__ = [
    "HeuristicStatus",
    "PartialColoring",
    "MatchingFamily",
    "RowLatinArray",
    "HeuristicRun",
    "ds_step1",
    "ds_step2",
    "ds_run",
    "four_switch_step",
    "four_switch_run",
    "latin_strict_walk",
]


class HeuristicStatus(Enum):
    REACHED_OF = "reached-of"
    STEP_LIMIT = "step-limit"
    STUCK = "stuck"
    NO_MOVE = "no-move"


class PartialColoring:
    """Proper partial (n-1)-edge-coloring; color 0 means uncolored."""

    __slots__ = ("n", "colors", "slot", "class_size", "uncolored")

    def __init__(self, n: int):
        if n < 2 or n % 2:
            raise ValueError(f"n must be even and at least 2, got {n}")
        tab = edge_tables(n)
        self.n = n
        self.colors = np.zeros(tab.n_edges, dtype=np.int32)
        # slot[v, c] = edge id of the c-colored edge at v, or -1
        self.slot = np.full((n + 1, n), -1, dtype=np.int64)
        self.class_size = np.zeros(n, dtype=np.int64)
        self.uncolored = tab.n_edges

    @property
    def psi(self) -> int:
        return self.uncolored

    def color_of(self, i: int, j: int) -> int:
        return int(self.colors[edge_tables(self.n).index[i, j]])

    def color_edge(self, i: int, j: int, c: int) -> None:
        tab = edge_tables(self.n)
        e = tab.index[i, j]
        if self.colors[e]:
            raise ValueError(f"edge {i}-{j} is already colored")
        if self.slot[i, c] >= 0 or self.slot[j, c] >= 0:
            raise ValueError(f"color {c} is not free at both {i} and {j}")
        self.colors[e] = c
        self.slot[i, c] = e
        self.slot[j, c] = e
        self.class_size[c] += 1
        self.uncolored -= 1

    def uncolor_edge(self, i: int, j: int) -> int:
        tab = edge_tables(self.n)
        e = tab.index[i, j]
        c = int(self.colors[e])
        if not c:
            raise ValueError(f"edge {i}-{j} is not colored")
        self.colors[e] = 0
        self.slot[i, c] = -1
        self.slot[j, c] = -1
        self.class_size[c] -= 1
        self.uncolored += 1
        return c

    def to_coloring(self) -> Coloring:
        if self.uncolored:
            raise ValueError(f"{self.uncolored} edges are still uncolored")
        return Coloring(self.n, self.colors.copy())


def ds_step1(state: PartialColoring, rng: np.random.Generator) -> PartialColoring:
    """Pick a uniform (vertex, missing color) pair, color a uniform
    uncolored edge there with it, uncoloring the clash at the far end if
    one exists.  psi never increases."""
    n = state.n
    if not state.uncolored:
        raise ValueError("nothing left to color")
    x = c = -1
    for _ in range(8 * n * (n - 1)):
        x = int(rng.integers(1, n + 1))
        c = int(rng.integers(1, n))
        if state.slot[x, c] < 0:
            break
    else:
        pairs = [(v, k) for v in range(1, n + 1) for k in range(1, n)
                 if state.slot[v, k] < 0]
        x, c = pairs[int(rng.integers(len(pairs)))]
    tab = edge_tables(n)
    open_ends = [y for y in range(1, n + 1) if y != x
                 and not state.colors[tab.index[x, y]]]
    # a vertex missing a color always has an uncolored edge
    y = open_ends[int(rng.integers(len(open_ends)))]
    clash = int(state.slot[y, c])
    if clash >= 0:
        state.uncolor_edge(int(tab.u[clash]), int(tab.v[clash]))
    state.color_edge(min(x, y), max(x, y), c)
    return state


def ds_step2(state: PartialColoring, rng: np.random.Generator) -> PartialColoring:
    """Pick a uniform deficient color and a uniform vertex pair missing it;
    color that edge with it, clearing its previous color first."""
    n = state.n
    if not state.uncolored:
        raise ValueError("nothing left to color")
    deficient = [c for c in range(1, n) if state.class_size[c] < n // 2]
    c = deficient[int(rng.integers(len(deficient)))]
    missing = [v for v in range(1, n + 1) if state.slot[v, c] < 0]
    i1 = int(rng.integers(len(missing)))
    i2 = int(rng.integers(len(missing) - 1))
    if i2 >= i1:
        i2 += 1
    x, y = sorted((missing[i1], missing[i2]))
    if state.color_of(x, y):
        state.uncolor_edge(x, y)
    state.color_edge(x, y, c)
    return state


@dataclass
class HeuristicRun:
    state: object
    status: HeuristicStatus
    steps: int


def ds_run(n: int, max_steps: int, rng: np.random.Generator,
           policy: str = "mixed", step1_prob: float = 0.9,
           state: PartialColoring | None = None) -> HeuristicRun:
    """Drive a partial coloring to completion from the empty state (or a
    given one).  ``policy`` is "step1", "step2", or "mixed", which plays
    step 1 with probability ``step1_prob``."""
    if policy not in ("step1", "step2", "mixed"):
        raise ValueError(f"unknown policy {policy!r}")
    if state is None:
        state = PartialColoring(n)
    steps = 0
    while steps < max_steps:
        if not state.uncolored:
            return HeuristicRun(state, HeuristicStatus.REACHED_OF, steps)
        if policy == "step1" or (policy == "mixed" and rng.random() < step1_prob):
            ds_step1(state, rng)
        else:
            ds_step2(state, rng)
        steps += 1
    status = (HeuristicStatus.REACHED_OF if not state.uncolored
              else HeuristicStatus.STEP_LIMIT)
    return HeuristicRun(state, status, steps)


class MatchingFamily:
    """n-1 perfect matchings of K_n, possibly overlapping."""

    __slots__ = ("n", "matchings", "mult", "covered")

    def __init__(self, n: int, matchings):
        if n < 2 or n % 2:
            raise ValueError(f"n must be even and at least 2, got {n}")
        if len(matchings) != n - 1:
            raise ValueError(f"expected {n - 1} matchings")
        tab = edge_tables(n)
        self.n = n
        self.matchings = []
        self.mult = np.zeros(tab.n_edges, dtype=np.int64)
        for m in matchings:
            edges = [tuple(sorted(pair)) for pair in m]
            seen = {x for pair in edges for x in pair}
            if len(edges) != n // 2 or len(seen) != n:
                raise ValueError("each matching must be perfect")
            self.matchings.append(edges)
            for i, j in edges:
                self.mult[tab.index[i, j]] += 1
        self.covered = int(np.count_nonzero(self.mult))

    @classmethod
    def all_copies(cls, n: int) -> "MatchingFamily":
        base = [(i, i + 1) for i in range(1, n, 2)]
        return cls(n, [list(base) for _ in range(n - 1)])

    @property
    def psi(self) -> int:
        return edge_tables(self.n).n_edges - self.covered

    def to_coloring(self) -> Coloring:
        if self.psi:
            raise ValueError(f"{self.psi} edges are uncovered")
        tab = edge_tables(self.n)
        colors = np.zeros(tab.n_edges, dtype=np.int32)
        for idx, edges in enumerate(self.matchings, start=1):
            for i, j in edges:
                colors[tab.index[i, j]] = idx
        return Coloring(self.n, colors)

    def _cover(self, e: int, d: int) -> None:
        was = self.mult[e]
        self.mult[e] = was + d
        if was == 0 and d > 0:
            self.covered += 1
        elif was + d == 0 and d < 0:
            self.covered -= 1


def four_switch_step(family: MatchingFamily, rng: np.random.Generator,
                     strict: bool = False, retry_cap: int | None = None):
    """Try to rewire two edges of one matching; the better of the two
    rewirings is taken (ties at random) when it does not increase psi
    (decreases it, under ``strict``).  Returns a move descriptor, or None
    when every attempt within the cap was rejected."""
    n = family.n
    tab = edge_tables(n)
    half = n // 2
    if half < 2:
        return None
    if retry_cap is None:
        retry_cap = 8 * (n - 1) * (half * (half - 1) // 2)
    mult = family.mult
    for _ in range(retry_cap):
        a = int(rng.integers(n - 1))
        p1 = int(rng.integers(half))
        p2 = int(rng.integers(half - 1))
        if p2 >= p1:
            p2 += 1
        x1, x2 = family.matchings[a][p1]
        x3, x4 = family.matchings[a][p2]
        e12 = tab.index[x1, x2]
        e34 = tab.index[x3, x4]
        gain = (1 if mult[e12] == 1 else 0) + (1 if mult[e34] == 1 else 0)
        pair_a = (tuple(sorted((x1, x3))), tuple(sorted((x2, x4))))
        pair_b = (tuple(sorted((x1, x4))), tuple(sorted((x2, x3))))
        deltas = []
        for new1, new2 in (pair_a, pair_b):
            cost = ((1 if mult[tab.index[new1[0], new1[1]]] == 0 else 0)
                    + (1 if mult[tab.index[new2[0], new2[1]]] == 0 else 0))
            deltas.append(gain - cost)
        if deltas[0] < deltas[1]:
            choice = 0
        elif deltas[1] < deltas[0]:
            choice = 1
        else:
            choice = int(rng.integers(2))
        d = deltas[choice]
        if d < 0 or (not strict and d == 0):
            new1, new2 = (pair_a, pair_b)[choice]
            family._cover(e12, -1)
            family._cover(e34, -1)
            family._cover(tab.index[new1[0], new1[1]], +1)
            family._cover(tab.index[new2[0], new2[1]], +1)
            family.matchings[a][p1] = new1
            family.matchings[a][p2] = new2
            return (a, ((x1, x2), (x3, x4)), (new1, new2), d)
    return None


def four_switch_run(n: int, max_steps: int, rng: np.random.Generator,
                    family: MatchingFamily | None = None,
                    strict: bool = False) -> HeuristicRun:
    """Four-switch until every edge is covered, from n-1 copies of the same
    matching by default."""
    if family is None:
        family = MatchingFamily.all_copies(n)
    steps = 0
    while steps < max_steps:
        if not family.psi:
            return HeuristicRun(family, HeuristicStatus.REACHED_OF, steps)
        if four_switch_step(family, rng, strict=strict) is None:
            return HeuristicRun(family, HeuristicStatus.NO_MOVE, steps)
        steps += 1
    status = (HeuristicStatus.REACHED_OF if not family.psi
              else HeuristicStatus.STEP_LIMIT)
    return HeuristicRun(family, status, steps)


class RowLatinArray:
    """n rows, each a permutation of 1..n; psi counts equal pairs within
    columns, so psi == 0 means a Latin square."""

    __slots__ = ("n", "rows", "col_counts", "psi")

    def __init__(self, n: int, rows: np.ndarray):
        rows = np.array(rows, dtype=np.int32)
        if rows.shape != (n, n):
            raise ValueError(f"expected an {n} x {n} array")
        for r in range(n):
            if sorted(rows[r]) != list(range(1, n + 1)):
                raise ValueError(f"row {r} is not a permutation of 1..{n}")
        self.n = n
        self.rows = rows
        self.col_counts = np.zeros((n, n + 1), dtype=np.int64)
        for r in range(n):
            for p in range(n):
                self.col_counts[p, rows[r, p]] += 1
        self.psi = int(sum(k * (k - 1) // 2
                           for k in self.col_counts.ravel()))

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> "RowLatinArray":
        rows = np.stack([rng.permutation(np.arange(1, n + 1))
                         for _ in range(n)])
        return cls(n, rows)

    def swap_delta(self, r: int, p: int, q: int) -> int:
        a = int(self.rows[r, p])
        b = int(self.rows[r, q])
        cc = self.col_counts
        return int(cc[p, b] + cc[q, a] - cc[p, a] - cc[q, b]) + 2

    def swap(self, r: int, p: int, q: int) -> int:
        d = self.swap_delta(r, p, q)
        a = int(self.rows[r, p])
        b = int(self.rows[r, q])
        self.rows[r, p] = b
        self.rows[r, q] = a
        cc = self.col_counts
        cc[p, a] -= 1
        cc[p, b] += 1
        cc[q, b] -= 1
        cc[q, a] += 1
        self.psi += d
        return d


def latin_strict_walk(n: int, max_steps: int,
                      rng: np.random.Generator,
                      start: RowLatinArray | None = None) -> HeuristicRun:
    """Strict descent on row-permutation arrays by in-row swaps, uniform
    over the improving moves (capped rejection, then enumeration)."""
    array = RowLatinArray.random(n, rng) if start is None else start
    if n < 2:
        raise ValueError("n must be at least 2")
    attempt_cap = 8 * n * (n * (n - 1) // 2)
    steps = 0
    while steps < max_steps:
        if array.psi == 0:
            return HeuristicRun(array, HeuristicStatus.REACHED_OF, steps)
        move = None
        # rows stay permutations, so any two positions hold distinct values
        for _ in range(attempt_cap):
            r = int(rng.integers(n))
            p = int(rng.integers(n))
            q = int(rng.integers(n - 1))
            if q >= p:
                q += 1
            if array.swap_delta(r, p, q) < 0:
                move = (r, p, q)
                break
        if move is None:
            improving = [(r, p, q)
                         for r in range(n)
                         for p in range(n)
                         for q in range(p + 1, n)
                         if array.swap_delta(r, p, q) < 0]
            if not improving:
                return HeuristicRun(array, HeuristicStatus.STUCK, steps)
            move = improving[int(rng.integers(len(improving)))]
        array.swap(*move)
        steps += 1
    status = (HeuristicStatus.REACHED_OF if array.psi == 0
              else HeuristicStatus.STEP_LIMIT)
    return HeuristicRun(array, status, steps)
