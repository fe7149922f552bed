"""Edge colorings of complete graphs and their conflict potential.

A state assigns one of n-1 colors to every edge of K_n, properly or not.
psi counts pairs of incident edges sharing a color; psi == 0 exactly when
every color class is a perfect matching, i.e. the coloring is a
one-factorization.  phi is the companion sum of squared per-vertex color
multiplicities, phi = 2*psi + n*(n-1).  Both are kept incrementally under
single-edge recoloring; ``potential`` recomputes them from scratch and is
the oracle for the incremental path.

Vertices are 1..n and colors are 1..n-1 throughout the public surface;
internal arrays simply reserve a dead 0 row/column so no translation ever
happens.
"""

from __future__ import annotations

import re
from collections import namedtuple
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from ._backend import kernels

__all__ = [
    "Coloring",
    "ColorProfile",
    "FormatError",
    "Vee",
    "Component",
    "StructureReport",
    "TraceEntry",
    "WalkTrace",
    "potential",
    "delta_psi_recolor",
    "apply_recolor",
    "structure",
    "replay_trace",
    "round_robin_coloring",
    "read_coloring",
    "write_coloring",
    "edge_tables",
]

EdgeTables = namedtuple("EdgeTables", ["u", "v", "index", "n_edges"])

_TABLES: dict[int, EdgeTables] = {}


def edge_tables(n: int) -> EdgeTables:
    """Lexicographic edge enumeration of K_n: endpoint arrays and the
    (i, j) -> edge id lookup, shared by every coloring of the same order."""
    tab = _TABLES.get(n)
    if tab is None:
        m = n * (n - 1) // 2
        u = np.empty(m, dtype=np.int32)
        v = np.empty(m, dtype=np.int32)
        index = np.full((n + 1, n + 1), -1, dtype=np.int64)
        e = 0
        for i in range(1, n + 1):
            for j in range(i + 1, n + 1):
                u[e] = i
                v[e] = j
                index[i, j] = e
                index[j, i] = e
                e += 1
        tab = EdgeTables(u, v, index, m)
        _TABLES[n] = tab
    return tab


def _check_vertex(n: int, x) -> int:
    x = int(x)
    if not 1 <= x <= n:
        raise ValueError(f"vertex {x} out of range 1..{n}")
    return x


def _check_edge(n: int, edge) -> tuple[int, int]:
    i, j = edge
    i = _check_vertex(n, i)
    j = _check_vertex(n, j)
    if i == j:
        raise ValueError(f"({i}, {j}) is not an edge")
    return (i, j) if i < j else (j, i)


def _check_color(n: int, c) -> int:
    c = int(c)
    if not 1 <= c <= n - 1:
        raise ValueError(f"color {c} out of range 1..{n - 1}")
    return c


class ColorProfile:
    """Per-vertex color multiplicities plus the running phi/psi totals.

    ``counts[v, c]`` is the number of c-colored edges at vertex v (row 0
    and column 0 are dead).  A profile is owned by its Coloring and is
    mutated in step with it; treat the pair as a single unit.
    """

    __slots__ = ("counts", "phi", "psi")

    def __init__(self, counts: np.ndarray, phi: int, psi: int):
        self.counts = counts
        self.phi = phi
        self.psi = psi

    @classmethod
    def from_coloring(cls, coloring: "Coloring") -> "ColorProfile":
        counts, phi, psi = _tally(coloring)
        return cls(counts, phi, psi)

    def copy(self) -> "ColorProfile":
        return ColorProfile(self.counts.copy(), self.phi, self.psi)


def _tally(coloring: "Coloring"):
    n = coloring.n
    tab = edge_tables(n)
    counts = np.zeros((n + 1, n), dtype=np.int32)
    np.add.at(counts, (tab.u, coloring.colors), 1)
    np.add.at(counts, (tab.v, coloring.colors), 1)
    phi = int(np.sum(counts.astype(np.int64) ** 2))
    psi = phi // 2 - tab.n_edges
    return counts, phi, psi


class Coloring:
    """A (not necessarily proper) (n-1)-edge-coloring of K_n."""

    __slots__ = ("n", "colors", "_profile")

    def __init__(self, n: int, colors: Iterable[int] | np.ndarray):
        n = int(n)
        if n < 2 or n % 2:
            raise ValueError(f"n must be even and at least 2, got {n}")
        arr = np.ascontiguousarray(colors, dtype=np.int32)
        m = n * (n - 1) // 2
        if arr.shape != (m,):
            raise ValueError(f"expected {m} edge colors, got shape {arr.shape}")
        if arr.min() < 1 or arr.max() > n - 1:
            raise ValueError(f"edge colors must lie in 1..{n - 1}")
        self.n = n
        self.colors = arr
        self._profile: ColorProfile | None = None

    @classmethod
    def monochromatic(cls, n: int, color: int = 1) -> "Coloring":
        m = n * (n - 1) // 2
        c = cls(n, np.full(m, 1, dtype=np.int32))
        if color != 1:
            c.colors[:] = _check_color(n, color)
        return c

    @classmethod
    def uniform_random(cls, n: int, rng: np.random.Generator) -> "Coloring":
        """Independent uniform color per edge."""
        if n < 2 or n % 2:
            raise ValueError(f"n must be even and at least 2, got {n}")
        m = n * (n - 1) // 2
        colors = np.empty(m, dtype=np.int32)
        kernels.fill_random_colors(colors, n - 1, rng.bit_generator)
        return cls(n, colors)

    @property
    def profile(self) -> ColorProfile:
        if self._profile is None:
            self._profile = ColorProfile.from_coloring(self)
        return self._profile

    @property
    def psi(self) -> int:
        return self.profile.psi

    @property
    def phi(self) -> int:
        return self.profile.phi

    @property
    def n_edges(self) -> int:
        return self.n * (self.n - 1) // 2

    def color(self, i: int, j: int) -> int:
        i, j = _check_edge(self.n, (i, j))
        return int(self.colors[edge_tables(self.n).index[i, j]])

    def copy(self) -> "Coloring":
        dup = Coloring.__new__(Coloring)
        dup.n = self.n
        dup.colors = self.colors.copy()
        dup._profile = None if self._profile is None else self._profile.copy()
        return dup

    def key(self) -> bytes:
        """Hashable snapshot of the state."""
        return self.colors.tobytes()

    def __eq__(self, other) -> bool:
        return (isinstance(other, Coloring) and self.n == other.n
                and bool(np.array_equal(self.colors, other.colors)))

    __hash__ = None  # mutable; use key()

    def __repr__(self) -> str:
        return f"Coloring(n={self.n}, psi={self.psi})"

    def to_text(self) -> str:
        """Canonical text form: header line, then one line per color with
        its edges as i-j pairs in lexicographic order."""
        n = self.n
        tab = edge_tables(n)
        lines = [f"n {n}"]
        order = np.lexsort((tab.v, tab.u, self.colors))
        by_color: dict[int, list[str]] = {c: [] for c in range(1, n)}
        for e in order:
            by_color[int(self.colors[e])].append(f"{tab.u[e]}-{tab.v[e]}")
        for c in range(1, n):
            pairs = by_color[c]
            lines.append(f"{c}: " + " ".join(pairs) if pairs else f"{c}:")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Coloring":
        return _parse_coloring(text)


class FormatError(ValueError):
    """Malformed coloring text; carries the 1-based line and column."""

    def __init__(self, line: int, column: int, message: str):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


_HEADER_RE = re.compile(r"^n[ \t]+(\S+)\s*$")
_PAIR_RE = re.compile(r"^(\d+)-(\d+)$")


def _parse_coloring(text: str) -> Coloring:
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise FormatError(1, 1, "empty input, expected 'n <order>' header")
    m = _HEADER_RE.match(lines[0])
    if m is None:
        raise FormatError(1, 1, "expected header 'n <order>'")
    try:
        n = int(m.group(1))
    except ValueError:
        raise FormatError(1, m.start(1) + 1, f"order {m.group(1)!r} is not an integer") from None
    if n < 2 or n % 2:
        raise FormatError(1, m.start(1) + 1, f"order must be even and at least 2, got {n}")

    tab = edge_tables(n)
    colors = np.zeros(tab.n_edges, dtype=np.int32)
    seen_labels: set[int] = set()
    assigned = 0
    if len(lines) - 1 != n - 1:
        raise FormatError(len(lines) + 1 if len(lines) - 1 < n - 1 else n + 1, 1,
                          f"expected {n - 1} color lines, found {len(lines) - 1}")
    for ln, line in enumerate(lines[1:], start=2):
        colon = line.find(":")
        if colon < 0:
            raise FormatError(ln, 1, "expected '<color>: <pairs>'")
        label_text = line[:colon].strip()
        if not label_text.isdigit():
            raise FormatError(ln, 1, f"color label {label_text!r} is not an integer")
        label = int(label_text)
        if not 1 <= label <= n - 1:
            raise FormatError(ln, 1, f"color {label} out of range 1..{n - 1}")
        if label in seen_labels:
            raise FormatError(ln, 1, f"duplicate color line for {label}")
        seen_labels.add(label)
        for tok in re.finditer(r"\S+", line[colon + 1:]):
            col = colon + 1 + tok.start() + 1
            pm = _PAIR_RE.match(tok.group())
            if pm is None:
                raise FormatError(ln, col, f"expected 'i-j' pair, got {tok.group()!r}")
            i, j = int(pm.group(1)), int(pm.group(2))
            if not (1 <= i <= n and 1 <= j <= n) or i == j:
                raise FormatError(ln, col, f"({i}, {j}) is not an edge of K_{n}")
            if i > j:
                i, j = j, i
            e = tab.index[i, j]
            if colors[e]:
                raise FormatError(ln, col, f"edge {i}-{j} assigned twice")
            colors[e] = label
            assigned += 1
    if assigned != tab.n_edges:
        missing = int(np.flatnonzero(colors == 0)[0])
        raise FormatError(len(lines) + 1, 1,
                          f"{tab.n_edges - assigned} edges missing, first: "
                          f"{tab.u[missing]}-{tab.v[missing]}")
    return Coloring(n, colors)


def read_coloring(path) -> Coloring:
    with open(path, "r", encoding="utf-8") as fh:
        return Coloring.from_text(fh.read())


def write_coloring(coloring: Coloring, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(coloring.to_text())


def potential(coloring: Coloring) -> tuple[int, int]:
    """(phi, psi) recomputed from scratch; oracle for the incremental path."""
    _, phi, psi = _tally(coloring)
    return phi, psi


def delta_psi_recolor(coloring: Coloring, edge, new_color: int) -> int:
    """Change in psi if ``edge`` were recolored to ``new_color``.

    Equals a(u,new) + a(v,new) - a(u,old) - a(v,old) + 2 taken before the
    move.  The new color must differ from the current one.
    """
    n = coloring.n
    i, j = _check_edge(n, edge)
    new_color = _check_color(n, new_color)
    e = edge_tables(n).index[i, j]
    old = int(coloring.colors[e])
    if new_color == old:
        raise ValueError(f"edge {i}-{j} already has color {old}")
    c = coloring.profile.counts
    return int(c[i, new_color]) + int(c[j, new_color]) \
        - int(c[i, old]) - int(c[j, old]) + 2


def apply_recolor(coloring: Coloring, edge, new_color: int):
    """Recolor one edge, updating the profile in O(1).  Mutates in place and
    returns (coloring, profile)."""
    n = coloring.n
    i, j = _check_edge(n, edge)
    new_color = _check_color(n, new_color)
    e = edge_tables(n).index[i, j]
    old = int(coloring.colors[e])
    if new_color == old:
        raise ValueError(f"edge {i}-{j} already has color {old}")
    prof = coloring.profile
    c = prof.counts
    d = int(c[i, new_color]) + int(c[j, new_color]) \
        - int(c[i, old]) - int(c[j, old]) + 2
    coloring.colors[e] = new_color
    c[i, old] -= 1
    c[i, new_color] += 1
    c[j, old] -= 1
    c[j, new_color] += 1
    prof.phi += 2 * d
    prof.psi += d
    return coloring, prof


@dataclass(frozen=True)
class Component:
    """One connected component of a single color class."""
    color: int
    vertices: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class Vee:
    """Two edges of one color sharing a center vertex."""
    center: int
    ends: tuple[int, int]
    color: int
    missing_at_center: frozenset[int]


@dataclass(frozen=True)
class StructureReport:
    """Monochromatic component census of a coloring."""
    components: dict[int, tuple[Component, ...]]
    vees: tuple[Vee, ...]
    is_iv: bool
    is_of: bool

    @property
    def vee_count(self) -> int:
        return len(self.vees)


def structure(coloring: Coloring) -> StructureReport:
    """Classify every monochromatic component; a coloring is IV when each is
    a single edge or a Vee, and an OF when every class is a perfect matching.

    Vees are listed by ascending (center, color).
    """
    n = coloring.n
    tab = edge_tables(n)
    counts = coloring.profile.counts
    by_color: dict[int, list[tuple[int, int]]] = {c: [] for c in range(1, n)}
    for e in range(tab.n_edges):
        by_color[int(coloring.colors[e])].append((int(tab.u[e]), int(tab.v[e])))

    all_colors = range(1, n)
    components: dict[int, tuple[Component, ...]] = {}
    vees: list[Vee] = []
    is_iv = True
    is_of = True
    half = n // 2
    for c in all_colors:
        edges = by_color[c]
        parent: dict[int, int] = {}

        def find(x: int) -> int:
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for i, j in edges:
            parent.setdefault(i, i)
            parent.setdefault(j, j)
            ri, rj = find(i), find(j)
            if ri != rj:
                parent[ri] = rj
        groups: dict[int, list[tuple[int, int]]] = {}
        for i, j in edges:
            groups.setdefault(find(i), []).append((i, j))
        comps = []
        for group in groups.values():
            verts = tuple(sorted({x for ij in group for x in ij}))
            comp = Component(c, verts, tuple(sorted(group)))
            comps.append(comp)
            if len(group) == 1:
                continue
            if len(group) == 2 and len(verts) == 3:
                is_of = False
                center = next(x for x in verts
                              if sum(x in ij for ij in group) == 2)
                ends = tuple(sorted(x for x in verts if x != center))
                missing = frozenset(m for m in all_colors
                                    if counts[center, m] == 0)
                vees.append(Vee(center, ends, c, missing))
            else:
                is_iv = False
                is_of = False
        if len(edges) != half:
            is_of = False
        components[c] = tuple(sorted(comps, key=lambda k: k.vertices))
    vees.sort(key=lambda w: (w.center, w.color))
    return StructureReport(components, tuple(vees), is_iv, is_of)


def round_robin_coloring(n: int) -> Coloring:
    """The classic rotational one-factorization: fix vertex n, rotate the
    rest; round k pairs n with k+1 and matches positions summing to 2k
    modulo n-1."""
    if n < 2 or n % 2:
        raise ValueError(f"n must be even and at least 2, got {n}")
    tab = edge_tables(n)
    colors = np.zeros(tab.n_edges, dtype=np.int32)
    for k in range(n - 1):
        colors[tab.index[n, k + 1]] = k + 1
        for i in range(1, n // 2):
            a = (k + i) % (n - 1) + 1
            b = (k - i) % (n - 1) + 1
            colors[tab.index[a, b]] = k + 1
    return Coloring(n, colors)


@dataclass(frozen=True)
class TraceEntry:
    """One move of a walk: psi is the value after the move was applied."""
    step: int
    psi: int
    move: tuple


@dataclass
class WalkTrace:
    """Ordered move log, sufficient to replay a run from its start state."""
    entries: list[TraceEntry]

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[TraceEntry]:
        return iter(self.entries)

    def append(self, step: int, psi: int, move: tuple) -> None:
        self.entries.append(TraceEntry(step, psi, move))


def replay_trace(start: Coloring, trace: WalkTrace) -> Coloring:
    """Re-apply a trace to a copy of its start state, checking the recorded
    psi after every entry.  Returns the final state; raises on mismatch."""
    state = start.copy()
    for entry in trace:
        kind = entry.move[0]
        if kind in ("recolor", "unroll", "mh-accept"):
            _, i, j, old, new = entry.move
            if state.color(i, j) != old:
                raise ValueError(f"step {entry.step}: edge {i}-{j} has color "
                                 f"{state.color(i, j)}, trace says {old}")
            apply_recolor(state, (i, j), new)
        elif kind == "flip":
            _, u, v, swaps = entry.move
            for w, cu, cv in swaps:
                if state.color(w, u) != cu or state.color(w, v) != cv:
                    raise ValueError(f"step {entry.step}: witness {w} colors "
                                     "do not match trace")
                apply_recolor(state, (w, u), cv)
                apply_recolor(state, (w, v), cu)
        elif kind == "mh-hold":
            pass
        else:
            raise ValueError(f"unknown move kind {kind!r}")
        if state.psi != entry.psi:
            raise ValueError(f"step {entry.step}: psi {state.psi} != "
                             f"recorded {entry.psi}")
    return state
