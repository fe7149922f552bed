import itertools

import numpy as np
import pytest

import ofclimb as of
from ofclimb.core import Coloring, apply_recolor, edge_tables, structure
from ofclimb.flips import (ConflictArc, ConflictMultigraph, apply_flip,
                           balanced_reorientation, build_conflict_multigraph,
                           plan_escape, strict_algorithm, weak_algorithm)
from ofclimb.walks import WalkMode, WalkStatus, qualifying_moves, run_walk

from conftest import orientation_balance, psi_by_pair_count


def stuck_coloring(n, seed):
    """Run a strict walk into a local optimum; None if it reached an OF."""
    r = of.stream(seed)
    out = run_walk(Coloring.uniform_random(n, r), WalkMode.STRICT, 10**6, r)
    if out.status is WalkStatus.STUCK_LOCAL_OPT:
        return out.terminal
    return None


def some_stuck(n, count, start_seed=0):
    found = []
    seed = start_seed
    while len(found) < count:
        c = stuck_coloring(n, seed)
        if c is not None:
            found.append(c)
        seed += 1
        if seed - start_seed > 100 * count:
            break
    return found


# ---------------------------------------------------------------------------
# conflict multigraph

def test_conflict_multigraph_definition(rng):
    c = Coloring.uniform_random(8, rng)
    h = build_conflict_multigraph(c, 2, 5)
    assert len(h.arcs) == 6
    for arc in h.arcs:
        w = arc.witness
        assert w not in (2, 5)
        assert arc.tail == c.color(w, 2)
        assert arc.head == c.color(w, 5)


def test_conflict_multigraph_degree_identity(rng):
    # out degree of color a = a(u, a) restricted to witness edges
    c = Coloring.uniform_random(8, rng)
    h = build_conflict_multigraph(c, 1, 2)
    for col in range(1, 8):
        expect_out = sum(1 for w in range(3, 9) if c.color(w, 1) == col)
        assert h.out_degree(col) == expect_out


# ---------------------------------------------------------------------------
# balanced reorientation

def check_reorientation(arcs):
    h = ConflictMultigraph(0, 0, 1, tuple(ConflictArc(w, t, hd)
                                          for w, (t, hd) in enumerate(arcs)))
    reo = balanced_reorientation(h)
    triples = [(w, t, hd) for w, (t, hd) in enumerate(arcs)]
    assert orientation_balance(triples, set(reo.reversed_witnesses)) <= 1
    # loops never reverse
    for w, (t, hd) in enumerate(arcs):
        if t == hd:
            assert w not in reo.reversed_witnesses
    # the paths cover exactly the reversed arcs an odd number of times
    flips = {}
    for path in reo.paths:
        for w in path:
            flips[w] = flips.get(w, 0) + 1
    assert {w for w, k in flips.items() if k % 2} == set(reo.reversed_witnesses)
    return reo


def test_reorientation_small_exhaustive():
    # all arc multisets on 3 vertices with up to 4 arcs
    pairs = list(itertools.product(range(3), repeat=2))
    for size in range(5):
        for arcs in itertools.combinations_with_replacement(pairs, size):
            check_reorientation(list(arcs))


def test_reorientation_star_needs_reversals():
    # five parallel arcs out of one vertex: balance forces reversals
    arcs = [(0, 1)] * 5
    h = ConflictMultigraph(0, 0, 1, tuple(ConflictArc(w, a, b)
                                          for w, (a, b) in enumerate(arcs)))
    reo = balanced_reorientation(h)
    assert len(reo.reversed_witnesses) == 2
    triples = [(w, a, b) for w, (a, b) in enumerate(arcs)]
    assert orientation_balance(triples, set(reo.reversed_witnesses)) <= 1


def test_reorientation_random_medium(rng):
    for _ in range(300):
        v = int(rng.integers(2, 9))
        m = int(rng.integers(1, 15))
        arcs = [(int(rng.integers(v)), int(rng.integers(v)))
                for _ in range(m)]
        check_reorientation(arcs)


# ---------------------------------------------------------------------------
# flips on colorings

def test_apply_flip_swaps_reversed_witnesses(rng):
    c = Coloring.uniform_random(8, rng)
    h = build_conflict_multigraph(c, 3, 7)
    reo = balanced_reorientation(h)
    before = {w: (c.color(w, 3), c.color(w, 7)) for w in range(1, 9)
              if w not in (3, 7)}
    flipped = apply_flip(c, 3, 7, reo)
    for w, (cu, cv) in before.items():
        if w in reo.reversed_witnesses:
            assert flipped.color(w, 3) == cv and flipped.color(w, 7) == cu
        else:
            assert flipped.color(w, 3) == cu and flipped.color(w, 7) == cv
    # edges not at u or v are untouched, including (u, v) itself
    assert flipped.color(3, 7) == c.color(3, 7)
    assert flipped.color(1, 2) == c.color(1, 2)
    assert flipped.psi == psi_by_pair_count(flipped)


def test_apply_flip_rejects_stale_reorientation(rng):
    c = Coloring.uniform_random(8, rng)
    h = build_conflict_multigraph(c, 1, 4)
    reo = balanced_reorientation(h)
    moved = c.copy()
    w = next(iter(w for w in range(1, 9) if w not in (1, 4)))
    old = moved.color(w, 1)
    new = next(x for x in range(1, 8) if x != old)
    apply_recolor(moved, (w, 1), new)
    with pytest.raises(ValueError):
        apply_flip(moved, 1, 4, reo)


def test_apply_flip_rejects_wrong_pair(rng):
    c = Coloring.uniform_random(8, rng)
    reo = balanced_reorientation(build_conflict_multigraph(c, 1, 4))
    with pytest.raises(ValueError):
        apply_flip(c, 1, 5, reo)


# ---------------------------------------------------------------------------
# escape plans

def test_plan_escape_requires_local_optimum(rng):
    c = Coloring.monochromatic(8)  # plenty of improving single moves
    with pytest.raises(ValueError):
        plan_escape(c)
    with pytest.raises(ValueError):
        plan_escape(of.round_robin_coloring(8))


def test_plan_escape_on_stuck_states():
    stuck = some_stuck(8, 10)
    assert stuck, "no strict walk got stuck at n=8 in 1000 tries"
    for c in stuck:
        rep = structure(c)
        assert rep.is_iv  # local optima are IV colorings
        plan = plan_escape(c)
        assert plan.net_delta_psi < 0
        assert plan.case in ("A", "B")


def test_plan_escape_net_delta_matches_execution():
    for c in some_stuck(8, 5):
        plan = plan_escape(c)
        state = c.copy()
        for move in plan.moves:
            if move[0] == "recolor":
                _, edge, newc = move
                apply_recolor(state, edge, newc)
            else:
                _, u, v, reo = move
                state = apply_flip(state, u, v, reo)
        assert state.psi - c.psi == plan.net_delta_psi
        assert state.psi == psi_by_pair_count(state)


def test_plan_escape_deterministic():
    for c in some_stuck(8, 3):
        p1 = plan_escape(c)
        p2 = plan_escape(c)
        assert p1.case == p2.case
        assert len(p1.moves) == len(p2.moves)
        for m1, m2 in zip(p1.moves, p2.moves):
            assert m1[0] == m2[0]
            if m1[0] == "recolor":
                assert m1[1:] == m2[1:]


# ---------------------------------------------------------------------------
# full climbs

def test_strict_algorithm_reaches_of():
    for seed in range(20):
        r = of.stream(seed)
        res = strict_algorithm(Coloring.uniform_random(8, r), r)
        assert res.coloring.psi == 0
        assert res.stats.max_psi_excess == 0  # psi never rises in strict mode


def test_strict_algorithm_phi_drop_per_dn_step():
    r = of.stream(77)
    start = Coloring.uniform_random(10, r)
    res = strict_algorithm(start, r, record_trace=True)
    psis = [start.psi] + [e.psi for e in res.trace]
    kinds = [e.move[0] for e in res.trace]
    deltas = [b - a for a, b in zip(psis, psis[1:])]
    for i, (kind, d) in enumerate(zip(kinds, deltas)):
        if kind == "flip":
            assert d <= -1
        elif d >= 0:
            # only a case-B bridge may hold psi; its flip must follow
            assert d == 0
            assert kinds[i + 1] == "flip"
    assert res.stats.dn_steps <= res.stats.steps


def test_weak_algorithm_reaches_of_with_bounded_excess():
    for seed in range(20):
        r = of.stream(seed)
        res = weak_algorithm(Coloring.uniform_random(8, r), r)
        assert res.coloring.psi == 0
        assert res.stats.max_psi_excess <= 4
        assert res.stats.flips_executed == (res.stats.escapes_case_a
                                            + res.stats.escapes_case_b)


def test_weak_algorithm_trace_is_single_edge_moves():
    r = of.stream(13)
    start = Coloring.uniform_random(8, r)
    res = weak_algorithm(start, r, record_trace=True)
    assert all(e.move[0] in ("recolor", "unroll") for e in res.trace)
    assert of.replay_trace(start, res.trace) == res.coloring


def test_strict_algorithm_trace_replays():
    r = of.stream(29)
    start = Coloring.uniform_random(8, r)
    res = strict_algorithm(start, r, record_trace=True)
    assert of.replay_trace(start, res.trace) == res.coloring


def test_climb_does_not_mutate_start():
    r = of.stream(31)
    start = Coloring.uniform_random(8, r)
    snapshot = start.colors.copy()
    strict_algorithm(start, r)
    assert np.array_equal(start.colors, snapshot)


def test_climb_handles_monochromatic_start():
    r = of.stream(1)
    res = strict_algorithm(Coloring.monochromatic(8), r)
    assert res.coloring.psi == 0


def test_climb_small_orders():
    for n in (2, 4, 6):
        r = of.stream(n)
        res = strict_algorithm(Coloring.uniform_random(n, r), r)
        assert res.coloring.psi == 0
        res = weak_algorithm(Coloring.uniform_random(n, of.stream(n, 1)),
                             of.stream(n, 2))
        assert res.coloring.psi == 0


# ---------------------------------------------------------------------------
# exhaustive n=4 state space

def all_colorings_4():
    tab = edge_tables(4)
    for digits in itertools.product((1, 2, 3), repeat=tab.n_edges):
        yield Coloring(4, np.array(digits, dtype=np.int32))


def test_every_n4_local_optimum_is_escapable():
    stuck_states = 0
    for c in all_colorings_4():
        if c.psi == 0:
            continue
        if qualifying_moves(c, WalkMode.STRICT):
            continue
        stuck_states += 1
        rep = structure(c)
        assert rep.is_iv
        assert rep.vee_count == c.psi
        plan = plan_escape(c)
        assert plan.net_delta_psi < 0
    assert stuck_states > 0  # the 3^6 cube does contain strict dead ends
