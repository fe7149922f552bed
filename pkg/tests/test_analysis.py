import json
import math

import numpy as np
import pytest

import ofclimb as of
from ofclimb.analysis import (IsoClassTable, classify_of8,
                              count_automorphisms, deficit, deficit_witness,
                              dense_small_set, enumerate_ofs, fingerprint,
                              girth, is_ramanujan, isomorphism_classes,
                              kotzig_perfect, load_of8_table, moore_bound,
                              spectrum, union_graph)
from ofclimb.core import Coloring, edge_tables

from conftest import cycle_union_eigenvalues, is_one_factorization, relabel


# ---------------------------------------------------------------------------
# enumeration

def test_enumerate_small_orders():
    assert len(enumerate_ofs(2)) == 1
    assert len(enumerate_ofs(4)) == 1
    assert len(enumerate_ofs(6)) == 6


def test_enumerate_rejects_bad_n():
    for n in (3, 5, 10, 0):
        with pytest.raises(ValueError):
            enumerate_ofs(n)


def test_enumerate_results_are_canonical_ofs():
    ofs = enumerate_ofs(6)
    keys = {c.key() for c in ofs}
    assert len(keys) == 6  # all distinct
    for c in ofs:
        assert is_one_factorization(c)
        for k in range(1, 6):
            assert c.color(1, k + 1) == k  # factor k holds edge (1, k+1)


def test_enumerate_n6_matches_relabeling_count():
    # every OF_6 is isomorphic to every other: one class, size 6,
    # so aut order must be 6! * 5! / 6
    ofs = enumerate_ofs(6)
    table = isomorphism_classes(ofs)
    assert len(table.classes) == 1
    cls = table.classes[0]
    assert cls.size == 6
    assert cls.automorphism_order == math.factorial(6) * math.factorial(5) // 6


# ---------------------------------------------------------------------------
# fingerprints and classes

def test_fingerprint_invariant_under_isomorphism(rng, of8_reps):
    for label, rep in of8_reps.items():
        vperm = dict(zip(range(1, 9), (1 + np.asarray(rng.permutation(8))).tolist()))
        cperm = dict(zip(range(1, 8), (1 + np.asarray(rng.permutation(7))).tolist()))
        image = relabel(rep, vperm, cperm)
        assert fingerprint(image) == fingerprint(rep)
        assert classify_of8(image) == label


def test_fingerprints_separate_the_six_classes(of8_reps):
    prints = {label: fingerprint(rep) for label, rep in of8_reps.items()}
    assert len(set(prints.values())) == 6


def test_count_automorphisms_n4():
    c = enumerate_ofs(4)[0]
    # single class of size 1: the stabilizer is everything
    assert count_automorphisms(c) == math.factorial(4) * math.factorial(3)


def test_count_automorphisms_rejects_non_of():
    with pytest.raises(ValueError):
        count_automorphisms(Coloring.monochromatic(4))


def test_table_orbit_stabilizer(of8_table):
    total = math.factorial(8) * math.factorial(7)
    for cls in of8_table.classes:
        assert cls.size * cls.automorphism_order == total


def test_classify_requires_n8():
    with pytest.raises(ValueError):
        classify_of8(of.round_robin_coloring(6))


def test_table_json_roundtrip(of8_table):
    clone = IsoClassTable.from_json(of8_table.to_json())
    assert clone.n == 8
    assert [c.label for c in clone.classes] == [c.label for c in of8_table.classes]
    for a, b in zip(clone.classes, of8_table.classes):
        assert a.fingerprint == b.fingerprint
        assert a.representative() == b.representative()


def test_representatives_belong_to_their_class(of8_reps):
    for label, rep in of8_reps.items():
        assert classify_of8(rep) == label


# ---------------------------------------------------------------------------
# union graphs and spectra

def test_union_graph_basic(of8_reps):
    g = union_graph(of8_reps["A"], (1, 2))
    assert g.degree == 2
    assert len(g.edges) == 8
    assert all(len(g.adjacency[v]) == 2 for v in range(1, 9))


def test_union_graph_validates():
    c = of.round_robin_coloring(6)
    with pytest.raises(ValueError):
        union_graph(c, ())
    with pytest.raises(ValueError):
        union_graph(c, (0,))
    with pytest.raises(ValueError):
        union_graph(c, (6,))


def test_two_class_union_spectrum_closed_form(of8_reps):
    # 2-factor unions are disjoint cycles; their spectra are known exactly
    from ofclimb.analysis import _pair_cycle_type, _partner_arrays
    for rep in of8_reps.values():
        partners = _partner_arrays(rep)
        for c1, c2 in ((1, 2), (3, 5), (6, 7)):
            lengths = _pair_cycle_type(partners, c1, c2, 8)
            got = spectrum(union_graph(rep, (c1, c2)))
            np.testing.assert_allclose(got, cycle_union_eigenvalues(lengths),
                                       atol=1e-9)


def test_spectrum_identities(of8_reps):
    g = union_graph(of8_reps["B"], (1, 2, 3))
    eig = spectrum(g)
    assert abs(eig.sum()) < 1e-9                    # trace of adjacency
    assert abs((eig ** 2).sum() - 2 * len(g.edges)) < 1e-9
    assert eig[0] == pytest.approx(3.0, abs=1e-9)   # regular graph


def test_spectrum_accepts_matrix():
    mat = np.array([[0, 1], [1, 0]], dtype=float)
    np.testing.assert_allclose(spectrum(mat), [1.0, -1.0], atol=1e-12)


def test_is_ramanujan_on_cycles(of8_reps):
    # d=2: every nontrivial eigenvalue is within 2*sqrt(1) = 2
    g = union_graph(of8_reps["F"], (1, 2))
    assert is_ramanujan(g)


def test_is_ramanujan_requires_regular():
    c = of.round_robin_coloring(6).copy()
    of.apply_recolor(c, (1, 2), c.color(1, 3))
    # the class that gained edge (1, 2) now has a degree-2 vertex
    g = union_graph(c, (c.color(1, 2),))
    assert g.degree is None
    with pytest.raises(ValueError):
        is_ramanujan(g)


def test_girth_values(of8_reps):
    # class F: all pair unions are 8-cycles
    assert girth(union_graph(of8_reps["F"], (1, 2))) == 8
    # class A: all pair unions split into two 4-cycles
    assert girth(union_graph(of8_reps["A"], (1, 2))) == 4
    # a single factor is a perfect matching: no cycle at all
    assert girth(union_graph(of8_reps["A"], (1,))) == math.inf
    # the full union is K_8
    assert girth(union_graph(of8_reps["A"], range(1, 8))) == 3


def test_moore_bound():
    assert moore_bound(10, 2) == math.inf
    assert moore_bound(10, 3) == pytest.approx(2 * math.log(10) / math.log(2))
    with pytest.raises(ValueError):
        moore_bound(10, 1)


def test_kotzig_perfect_exactly_class_f(of8_reps):
    verdicts = {label: kotzig_perfect(rep) for label, rep in of8_reps.items()}
    assert verdicts == {"A": False, "B": False, "C": False, "D": False,
                        "E": False, "F": True}


def test_kotzig_perfect_n4():
    # the unique OF_4: any two factors union to a 4-cycle = Hamilton cycle
    assert kotzig_perfect(enumerate_ofs(4)[0])


# ---------------------------------------------------------------------------
# deficits

def test_deficit_direct(of8_reps):
    rep = of8_reps["F"]
    assert deficit(rep, (1, 2)) == 0  # one pair, one color
    full = deficit(rep, range(1, 9))
    assert full == math.comb(8, 2) - 7  # all 7 colors inside


def test_deficit_validates_vertices(of8_reps):
    with pytest.raises(ValueError):
        deficit(of8_reps["A"], (0, 1))
    with pytest.raises(ValueError):
        deficit(of8_reps["A"], (1, 9))


def test_deficit_witness_all_reps(of8_reps):
    for rep in of8_reps.values():
        for k in (4, 6, 8):
            S, d = deficit_witness(rep, k)
            assert len(S) == k
            assert len(set(S)) == k
            assert d == deficit(rep, S)
            assert d >= k - 3


def test_deficit_witness_validates_k(of8_reps):
    with pytest.raises(ValueError):
        deficit_witness(of8_reps["A"], 9)
    with pytest.raises(ValueError):
        deficit_witness(of8_reps["A"], 1)


def test_deficit_witness_requires_of():
    with pytest.raises(ValueError):
        deficit_witness(Coloring.monochromatic(8), 4)


# ---------------------------------------------------------------------------
# dense small sets

def test_dense_small_set_finds_surplus(of8_reps):
    g = union_graph(of8_reps["B"], (1, 2, 3))
    w = dense_small_set(g, 1)
    assert w is not None
    inner = sum(1 for i in w for j in g.adjacency[i] if j in set(w) and j > i)
    assert inner >= len(w) + 1


def test_dense_small_set_impossible_target(of8_reps):
    # a cubic graph on 8 vertices has only 12 edges: surplus > 4 cannot exist
    g = union_graph(of8_reps["B"], (1, 2, 3))
    assert dense_small_set(g, 5) is None


def test_dense_small_set_requires_cubic(of8_reps):
    with pytest.raises(ValueError):
        dense_small_set(union_graph(of8_reps["B"], (1, 2)), 1)


def test_dense_small_set_medium_graph():
    r = of.stream(12)
    res = of.strict_algorithm(Coloring.uniform_random(20, r), r)
    g = union_graph(res.coloring, (1, 2, 3))
    w = dense_small_set(g, 1)
    if w is not None:
        ws = set(w)
        inner = sum(1 for i in w for j in g.adjacency[i] if j in ws and j > i)
        assert inner >= len(w) + 1


# ---------------------------------------------------------------------------
# table regeneration path

def test_generate_table_writes_json(tmp_path):
    from ofclimb.analysis import generate_of8_table
    out = tmp_path / "classes.json"
    table = generate_of8_table(out)
    raw = json.loads(out.read_text())
    assert raw["n"] == 8
    assert len(raw["classes"]) == 6
    assert {c["size"] for c in raw["classes"]} == {30, 420, 630, 960, 1680, 2520}
    assert [c.label for c in table.classes] == ["A", "D", "E", "F", "C", "B"]
