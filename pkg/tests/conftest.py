"""Shared fixtures and independent oracles.

Every oracle here recomputes its quantity from the definition, using only
the raw color array, so the incremental bookkeeping in the package is
checked against arithmetic it does not share.  These were written and
frozen before the modules they test.
"""

import itertools

import numpy as np
import pytest

from ofclimb import stream
from ofclimb.core import Coloring, edge_tables


# ---------------------------------------------------------------------------
# oracles

def psi_by_pair_count(coloring: Coloring) -> int:
    """Count pairs of incident same-colored edges by brute enumeration.
    Two distinct edges of a simple graph share at most one vertex, so
    summing per-vertex pair counts hits each incident pair exactly once."""
    n = coloring.n
    tab = edge_tables(n)
    total = 0
    for u in range(1, n + 1):
        edges = [e for e in range(tab.n_edges)
                 if tab.u[e] == u or tab.v[e] == u]
        for e1, e2 in itertools.combinations(edges, 2):
            if coloring.colors[e1] == coloring.colors[e2]:
                total += 1
    return total


def phi_by_count_squares(coloring: Coloring) -> int:
    """Sum over vertices and colors of the squared incidence count."""
    n = coloring.n
    tab = edge_tables(n)
    counts = {}
    for e in range(tab.n_edges):
        c = int(coloring.colors[e])
        counts[(int(tab.u[e]), c)] = counts.get((int(tab.u[e]), c), 0) + 1
        counts[(int(tab.v[e]), c)] = counts.get((int(tab.v[e]), c), 0) + 1
    return sum(v * v for v in counts.values())


def color_classes(coloring: Coloring) -> dict[int, list[tuple[int, int]]]:
    n = coloring.n
    tab = edge_tables(n)
    out: dict[int, list[tuple[int, int]]] = {c: [] for c in range(1, n)}
    for e in range(tab.n_edges):
        out[int(coloring.colors[e])].append((int(tab.u[e]), int(tab.v[e])))
    return out


def is_one_factorization(coloring: Coloring) -> bool:
    """Every class is a perfect matching, checked by degree counting."""
    n = coloring.n
    for edges in color_classes(coloring).values():
        touched = [v for e in edges for v in e]
        if sorted(touched) != list(range(1, n + 1)):
            return False
    return True


def relabel(coloring: Coloring, vperm: dict[int, int],
            cperm: dict[int, int] | None = None) -> Coloring:
    """Image of a coloring under a vertex relabeling and an optional color
    permutation, built edge by edge."""
    n = coloring.n
    tab = edge_tables(n)
    colors = np.zeros(tab.n_edges, dtype=np.int32)
    for e in range(tab.n_edges):
        i, j = vperm[int(tab.u[e])], vperm[int(tab.v[e])]
        if i > j:
            i, j = j, i
        c = int(coloring.colors[e])
        colors[tab.index[i, j]] = cperm[c] if cperm else c
    return Coloring(n, colors)


def cycle_union_eigenvalues(cycle_lengths) -> np.ndarray:
    """Closed-form adjacency spectrum of a disjoint union of cycles:
    2*cos(2*pi*k/L) for k = 0..L-1 per cycle of length L."""
    vals = []
    for L in cycle_lengths:
        vals.extend(2.0 * np.cos(2.0 * np.pi * np.arange(L) / L))
    return np.sort(np.array(vals))[::-1]


def orientation_balance(arcs, orient_reversed: set) -> int:
    """Max |out - in| over vertices of a reoriented arc list, where
    ``orient_reversed`` holds the witnesses flipped head-for-tail."""
    out: dict[int, int] = {}
    inn: dict[int, int] = {}
    for w, t, h in arcs:
        if w in orient_reversed:
            t, h = h, t
        out[t] = out.get(t, 0) + 1
        inn[h] = inn.get(h, 0) + 1
    return max((abs(out.get(c, 0) - inn.get(c, 0))
                for c in set(out) | set(inn)), default=0)


# ---------------------------------------------------------------------------
# fixtures

@pytest.fixture
def rng():
    return stream(20240817)


@pytest.fixture(scope="session")
def of8_table():
    from ofclimb.analysis import load_of8_table
    return load_of8_table()


@pytest.fixture(scope="session")
def of8_reps(of8_table):
    return {cls.label: cls.representative() for cls in of8_table.classes}
