"""Census and structure analysis of one-factorizations.

Small orders are enumerated outright: a one-factorization is stored as an
unordered set of perfect matchings, presented canonically with factor k
holding edge (1, k+1).  Isomorphism classes are separated by an invariant
fingerprint (the multiset of cycle types of all two-factor unions) and
cross-checked by orbit-stabilizer counting, so a fingerprint collision
cannot pass silently.

Unions of k factors are k-regular graphs whose spectra, girth, and edge
density probe how close a factorization is to a random regular graph:
perfect (two-factor unions all Hamiltonian), Ramanujan (nontrivial
eigenvalues within 2*sqrt(k-1)), and small dense vertex sets each get a
checker here.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .core import Coloring, edge_tables

__all__ = [
    "enumerate_ofs",
    "IsoClass",
    "IsoClassTable",
    "isomorphism_classes",
    "count_automorphisms",
    "fingerprint",
    "load_of8_table",
    "classify_of8",
    "generate_of8_table",
    "UnionGraph",
    "union_graph",
    "spectrum",
    "is_ramanujan",
    "girth",
    "moore_bound",
    "kotzig_perfect",
    "deficit",
    "deficit_witness",
    "dense_small_set",
]


# ---------------------------------------------------------------------------
# enumeration

def enumerate_ofs(n: int) -> list[Coloring]:
    """All one-factorizations of K_n (unordered factors), canonically
    colored so factor k contains edge (1, k+1).  Tractable for n <= 8."""
    if n % 2 or not 2 <= n <= 8:
        raise ValueError("enumeration supports even n between 2 and 8")
    tab = edge_tables(n)
    full = (1 << n) - 1
    adj = [full ^ (1 << i) for i in range(n)]  # uncovered partners, 0-based
    results: list[Coloring] = []
    factors: list[list[tuple[int, int]]] = []

    def matchings(mask: int, acc: list[tuple[int, int]]):
        if not mask:
            yield acc
            return
        i = (mask & -mask).bit_length() - 1
        rest = mask ^ (1 << i)
        choices = adj[i] & rest
        while choices:
            j = (choices & -choices).bit_length() - 1
            choices ^= 1 << j
            acc.append((i, j))
            yield from matchings(rest ^ (1 << j), acc)
            acc.pop()

    def build():
        if not adj[0]:
            colors = np.zeros(tab.n_edges, dtype=np.int32)
            for factor in factors:
                c = next(j for i, j in factor if i == 0)
                for i, j in factor:
                    colors[tab.index[i + 1, j + 1]] = c
            results.append(Coloring(n, colors))
            return
        j0 = (adj[0] & -adj[0]).bit_length() - 1
        start_mask = full ^ 1 ^ (1 << j0)
        for matching in matchings(start_mask, [(0, j0)]):
            snapshot = list(matching)
            for i, j in snapshot:
                adj[i] ^= 1 << j
                adj[j] ^= 1 << i
            factors.append(snapshot)
            build()
            factors.pop()
            for i, j in snapshot:
                adj[i] ^= 1 << j
                adj[j] ^= 1 << i

    build()
    return results


# ---------------------------------------------------------------------------
# isomorphism classes

def _partner_arrays(coloring: Coloring) -> np.ndarray:
    """partners[c, v] = vertex matched to v by factor c; requires an OF."""
    n = coloring.n
    if coloring.psi != 0:
        raise ValueError("coloring is not a one-factorization")
    tab = edge_tables(n)
    partners = np.zeros((n, n + 1), dtype=np.int32)
    for e in range(tab.n_edges):
        c = int(coloring.colors[e])
        i, j = int(tab.u[e]), int(tab.v[e])
        partners[c, i] = j
        partners[c, j] = i
    return partners


def _pair_cycle_type(partners: np.ndarray, c1: int, c2: int, n: int) -> tuple:
    seen = [False] * (n + 1)
    lengths = []
    for start in range(1, n + 1):
        if seen[start]:
            continue
        length = 0
        v = start
        use_first = True
        while not seen[v]:
            seen[v] = True
            length += 1
            v = int(partners[c1 if use_first else c2, v])
            use_first = not use_first
        lengths.append(length)
    return tuple(sorted(lengths))


def fingerprint(coloring: Coloring, extended: bool = False) -> tuple:
    """Isomorphism invariant: the multiset of cycle types over all unordered
    factor pairs; ``extended`` adds the multiset of three-factor-union
    girths as a tie-breaker."""
    n = coloring.n
    partners = _partner_arrays(coloring)
    types = sorted(_pair_cycle_type(partners, c1, c2, n)
                   for c1 in range(1, n - 1) for c2 in range(c1 + 1, n))
    if not extended:
        return tuple(types)
    girths = sorted(
        girth(union_graph(coloring, trio))
        for trio in itertools.combinations(range(1, n), 3))
    return (tuple(types), tuple(girths))


def count_automorphisms(coloring: Coloring) -> int:
    """Order of the symmetry group of the unordered factorization under
    vertex relabelings paired with the color transport they induce; the
    (n-1)! free color permutations are included, so
    class size * order == n! * (n-1)!.  Brute force, n <= 8."""
    n = coloring.n
    if n > 8:
        raise ValueError("automorphism counting is brute force, n <= 8 only")
    if coloring.psi != 0:
        raise ValueError("coloring is not a one-factorization")
    tab = edge_tables(n)
    mat = np.zeros((n, n), dtype=np.int64)
    mat[tab.u - 1, tab.v - 1] = coloring.colors
    mat[tab.v - 1, tab.u - 1] = coloring.colors
    off = ~np.eye(n, dtype=bool)
    base = mat[off]
    count = 0
    for perm in itertools.permutations(range(n)):
        p = np.array(perm)
        image = mat[p][:, p][off]
        # the vertex map is a symmetry iff color -> color(image) is a function
        if len(np.unique(base * n + image)) == n - 1:
            count += 1
    return count * math.factorial(n - 1)


@dataclass(frozen=True)
class IsoClass:
    label: str
    size: int
    automorphism_order: int
    fingerprint: tuple
    representative_text: str

    def representative(self) -> Coloring:
        return Coloring.from_text(self.representative_text)


@dataclass
class IsoClassTable:
    n: int
    classes: tuple[IsoClass, ...]

    def __post_init__(self):
        self._by_fingerprint = {c.fingerprint: c for c in self.classes}
        self._by_label = {c.label: c for c in self.classes}

    def by_label(self, label: str) -> IsoClass:
        return self._by_label[label]

    def classify(self, coloring: Coloring) -> str:
        fp = fingerprint(coloring)
        cls = self._by_fingerprint.get(fp)
        if cls is None:
            raise ValueError("coloring matches no class in the table")
        return cls.label

    def to_json(self) -> str:
        return json.dumps({
            "n": self.n,
            "classes": [{
                "label": c.label,
                "size": c.size,
                "automorphism_order": c.automorphism_order,
                "fingerprint": [list(t) for t in c.fingerprint],
                "representative": c.representative_text,
            } for c in self.classes],
        }, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "IsoClassTable":
        raw = json.loads(text)
        classes = tuple(
            IsoClass(c["label"], c["size"], c["automorphism_order"],
                     tuple(tuple(t) for t in c["fingerprint"]),
                     c["representative"])
            for c in raw["classes"])
        return cls(raw["n"], classes)


# the classical names of the six OF(8) classes, keyed by class size
_OF8_LABELS = {30: "A", 2520: "B", 1680: "C", 420: "D", 630: "E", 960: "F"}


def isomorphism_classes(ofs: list[Coloring]) -> IsoClassTable:
    """Partition an exhaustive OF list by fingerprint and verify each class
    size against orbit-stabilizer counting, so a fingerprint collision is
    caught rather than silently merging classes."""
    if not ofs:
        raise ValueError("no factorizations given")
    n = ofs[0].n
    groups: dict[tuple, list[Coloring]] = {}
    for of in ofs:
        groups.setdefault(fingerprint(of), []).append(of)

    total = math.factorial(n) * math.factorial(n - 1)
    checked = []
    for fp, members in groups.items():
        rep = min(members, key=lambda c: c.key())
        order = count_automorphisms(rep)
        if len(members) * order != total:
            raise RuntimeError(
                "fingerprint collision: class size disagrees with "
                "orbit-stabilizer counting; extend the fingerprint")
        checked.append((len(members), fp, order, rep))

    checked.sort(key=lambda item: (item[0], item[1]))
    sizes = sorted(item[0] for item in checked)
    use_names = n == 8 and sizes == sorted(_OF8_LABELS)
    classes = []
    for idx, (size, fp, order, rep) in enumerate(checked, start=1):
        label = _OF8_LABELS[size] if use_names else f"C{idx}"
        classes.append(IsoClass(label, size, order, fp, rep.to_text()))
    return IsoClassTable(n, tuple(classes))


_OF8_TABLE: IsoClassTable | None = None


def _of8_table_path():
    return resources.files("ofclimb").joinpath("data/of8_classes.json")


def load_of8_table() -> IsoClassTable:
    """The shipped OF(8) class table (six classes, 6240 factorizations)."""
    global _OF8_TABLE
    if _OF8_TABLE is None:
        _OF8_TABLE = IsoClassTable.from_json(
            _of8_table_path().read_text(encoding="utf-8"))
    return _OF8_TABLE


def classify_of8(coloring: Coloring) -> str:
    """Class label (A..F) of an OF of K_8."""
    if coloring.n != 8:
        raise ValueError("classification table covers n = 8 only")
    return load_of8_table().classify(coloring)


def generate_of8_table(path=None) -> IsoClassTable:
    """Rebuild the OF(8) class table from scratch; writes JSON to ``path``
    when given.  This is how the shipped data file is produced."""
    table = isomorphism_classes(enumerate_ofs(8))
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(table.to_json() + "\n")
    return table


# ---------------------------------------------------------------------------
# factor unions

@dataclass(frozen=True)
class UnionGraph:
    """Simple graph formed by selected color classes of a coloring."""
    n: int
    colors: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]
    adjacency: tuple[tuple[int, ...], ...]
    degree: int | None

    def adjacency_matrix(self) -> np.ndarray:
        mat = np.zeros((self.n, self.n))
        for i, j in self.edges:
            mat[i - 1, j - 1] = 1.0
            mat[j - 1, i - 1] = 1.0
        return mat


def union_graph(coloring: Coloring, colors) -> UnionGraph:
    """Union of the selected color classes (duplicate edges collapse).
    ``degree`` is set when the result is regular, as it always is for
    factors of an OF."""
    n = coloring.n
    chosen = sorted({int(c) for c in colors})
    if not chosen:
        raise ValueError("need at least one color")
    for c in chosen:
        if not 1 <= c <= n - 1:
            raise ValueError(f"color {c} out of range 1..{n - 1}")
    tab = edge_tables(n)
    mask = np.isin(coloring.colors, chosen)
    edges = sorted({(int(tab.u[e]), int(tab.v[e]))
                    for e in np.flatnonzero(mask)})
    neigh: list[list[int]] = [[] for _ in range(n + 1)]
    for i, j in edges:
        neigh[i].append(j)
        neigh[j].append(i)
    degs = {len(lst) for lst in neigh[1:]}
    degree = degs.pop() if len(degs) == 1 else None
    return UnionGraph(n, tuple(chosen), tuple(edges),
                      tuple(tuple(sorted(lst)) for lst in neigh), degree)


def spectrum(graph: UnionGraph | np.ndarray) -> np.ndarray:
    """Adjacency eigenvalues, descending."""
    mat = graph.adjacency_matrix() if isinstance(graph, UnionGraph) else np.asarray(graph, dtype=np.float64)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError("adjacency matrix must be square")
    return np.linalg.eigvalsh(mat)[::-1]


def is_ramanujan(graph: UnionGraph, tol: float = 1e-9) -> bool:
    """Whether every nontrivial eigenvalue (|lambda| < degree) lies within
    2*sqrt(d-1) of zero.  The +-d band is excluded within ``tol``, which
    also pads the bound."""
    d = graph.degree
    if d is None:
        raise ValueError("graph is not regular")
    if d < 1:
        return True
    bound = 2.0 * math.sqrt(d - 1) + tol
    eig = spectrum(graph)
    nontrivial = eig[np.abs(np.abs(eig) - d) > tol]
    return bool(np.all(np.abs(nontrivial) <= bound))


def girth(graph: UnionGraph) -> float:
    """Length of a shortest cycle, or math.inf for a forest."""
    best = math.inf
    adjacency = graph.adjacency
    for root in range(1, graph.n + 1):
        dist = {root: 0}
        parent = {root: 0}
        queue = [root]
        head = 0
        while head < len(queue):
            x = queue[head]
            head += 1
            if dist[x] * 2 >= best:
                break
            for y in adjacency[x]:
                if y == parent[x]:
                    continue
                if y in dist:
                    best = min(best, dist[x] + dist[y] + 1)
                else:
                    dist[y] = dist[x] + 1
                    parent[y] = x
                    queue.append(y)
    return best


def moore_bound(n: int, d: int) -> float:
    """Girth scale 2*log(n)/log(d-1) of a d-regular graph on n vertices;
    infinite for d = 2 (a cycle's girth is unbounded in n)."""
    if d < 2:
        raise ValueError("degree must be at least 2")
    if d == 2:
        return math.inf
    return 2.0 * math.log(n) / math.log(d - 1)


def kotzig_perfect(coloring: Coloring) -> bool:
    """Whether every two-factor union is a single Hamiltonian cycle."""
    n = coloring.n
    partners = _partner_arrays(coloring)
    return all(
        _pair_cycle_type(partners, c1, c2, n) == (n,)
        for c1 in range(1, n - 1) for c2 in range(c1 + 1, n))


# ---------------------------------------------------------------------------
# deficits and dense sets

def deficit(coloring: Coloring, vertices) -> int:
    """Pairs inside the set minus distinct colors used inside it."""
    n = coloring.n
    S = sorted({int(v) for v in vertices})
    for v in S:
        if not 1 <= v <= n:
            raise ValueError(f"vertex {v} out of range 1..{n}")
    tab = edge_tables(n)
    inner = {int(coloring.colors[tab.index[i, j]])
             for i, j in itertools.combinations(S, 2)}
    return len(S) * (len(S) - 1) // 2 - len(inner)


def _pair_cycles(partners: np.ndarray, c1: int, c2: int, n: int) -> list[list[int]]:
    seen = [False] * (n + 1)
    cycles = []
    for start in range(1, n + 1):
        if seen[start]:
            continue
        cycle = []
        v = start
        use_first = True
        while not seen[v]:
            seen[v] = True
            cycle.append(v)
            v = int(partners[c1 if use_first else c2, v])
            use_first = not use_first
        cycles.append(cycle)
    return cycles


def deficit_witness(coloring: Coloring, k: int) -> tuple[tuple[int, ...], int]:
    """A k-vertex set with deficit at least k - 3, from two-factor unions.

    A run of k consecutive vertices on one union cycle of length >= k
    works outright; otherwise whole cycles of one union plus a partial run
    still pack k vertices with k - 1 internal edges in two colors.
    Returns (vertices, deficit)."""
    n = coloring.n
    if not 2 <= k <= n:
        raise ValueError(f"k must lie in 2..{n}")
    partners = _partner_arrays(coloring)
    pairs = [(c1, c2) for c1 in range(1, n - 1) for c2 in range(c1 + 1, n)]
    for c1, c2 in pairs:
        for cycle in _pair_cycles(partners, c1, c2, n):
            if len(cycle) >= k:
                S = tuple(sorted(cycle[:k]))
                d = deficit(coloring, S)
                assert d >= k - 3
                return S, d
    # all cycles of every union are shorter than k: pack whole cycles
    c1, c2 = pairs[0]
    cycles = sorted(_pair_cycles(partners, c1, c2, n), key=len, reverse=True)
    chosen: list[int] = []
    for cycle in cycles:
        need = k - len(chosen)
        if need <= 0:
            break
        chosen.extend(cycle[:need])
    S = tuple(sorted(chosen))
    d = deficit(coloring, S)
    assert d >= k - 3
    return S, d


def _inner_edges(adjacency, vertices: set[int]) -> int:
    return sum(1 for v in vertices for w in adjacency[v]
               if w in vertices and w > v)


def dense_small_set(graph: UnionGraph, a: int):
    """Try to find W with e(W) >= |W| + a in a cubic graph: grow a union of
    short cycles connected by shortest paths (each extra independent cycle
    adds one to the edge surplus), falling back to exhaustive search for
    n <= 12.  Returns sorted vertices or None."""
    if graph.degree != 3:
        raise ValueError("dense small sets are defined for cubic graphs")
    n = graph.n
    adjacency = graph.adjacency

    def shortest_cycle_through(root: int):
        dist = {root: 0}
        parent = {root: 0}
        queue = [root]
        head = 0
        while head < len(queue):
            x = queue[head]
            head += 1
            for y in adjacency[x]:
                if y == parent[x]:
                    continue
                if y in dist:
                    path_x = _walk_up(parent, x)
                    path_y = _walk_up(parent, y)
                    return path_x + path_y
                dist[y] = dist[x] + 1
                parent[y] = x
                queue.append(y)
        return None

    def _walk_up(parent, x):
        out = []
        while x != 0:
            out.append(x)
            x = parent[x]
        return out

    cycles = []
    seen_sets = set()
    for root in range(1, n + 1):
        cyc = shortest_cycle_through(root)
        if cyc:
            key = frozenset(cyc)
            if key not in seen_sets:
                seen_sets.add(key)
                cycles.append(set(cyc))
    cycles.sort(key=len)
    if cycles:
        W = set(cycles[0])
        for _ in range(len(cycles)):
            if _inner_edges(adjacency, W) >= len(W) + a:
                return tuple(sorted(W))
            best = None
            for cyc in cycles:
                if cyc <= W:
                    continue
                path = _connecting_path(adjacency, W, cyc)
                if path is None:
                    continue
                candidate = W | cyc | set(path)
                surplus = _inner_edges(adjacency, candidate) - len(candidate)
                if best is None or (surplus, -len(candidate)) > best[0]:
                    best = ((surplus, -len(candidate)), candidate)
            if best is None:
                break
            W = best[1]
        if _inner_edges(adjacency, W) >= len(W) + a:
            return tuple(sorted(W))

    if n <= 12:
        verts = list(range(1, n + 1))
        for size in range(3, n + 1):
            for combo in itertools.combinations(verts, size):
                cs = set(combo)
                if _inner_edges(adjacency, cs) >= size + a:
                    return tuple(sorted(cs))
    return None


def _connecting_path(adjacency, source: set[int], target: set[int]):
    """Interior vertices of a shortest path between two vertex sets (empty
    when they touch), or None if disconnected."""
    if source & target:
        return []
    dist = {v: 0 for v in source}
    parent = {v: 0 for v in source}
    queue = list(sorted(source))
    head = 0
    while head < len(queue):
        x = queue[head]
        head += 1
        for y in adjacency[x]:
            if y in dist:
                continue
            dist[y] = dist[x] + 1
            parent[y] = x
            if y in target:
                out = []
                cur = parent[y]
                while cur != 0 and cur not in source:
                    out.append(cur)
                    cur = parent[cur]
                return out
            queue.append(y)
    return None
