import itertools
from collections import deque

import numpy as np
import pytest

from geoforge.actions import natural_group
from geoforge.construct import FamilySpec, build_family
from geoforge.errors import AttachmentError, NotAFlagError, ParameterError, ResourceLimitError
from geoforge.geometry import (Attachment, ExplicitRelation, Pregeometry, QuotientError, basic_diagram,
                               chambers, components, count_chambers, corank1_counts_exhaustive,
                               diagram_edges, is_chamber, is_connected, is_firm, is_flag, is_geometry,
                               is_thick, isomorphic_rank2, model_geometry, quotient, rank1, rank2_params,
                               residue, truncation, unextendable_flag)


def as_geo(m, b):
    return build_family(FamilySpec("as", m=m, rank=b))


def brute_params(geo):
    """Plain-Python BFS oracle for (n1, n2, s1, s2, d1, d2, g)."""
    s, t = geo.types
    n1, n2 = geo.sizes[s], geo.sizes[t]
    adj = {("a", i): [] for i in range(n1)}
    adj.update({("b", j): [] for j in range(n2)})
    for i in range(n1):
        for j in geo.neighbors((s, i), t).tolist():
            adj[("a", i)].append(("b", j))
            adj[("b", j)].append(("a", i))
    ecc = {}
    girth = None
    for v in adj:
        dist, parent = {v: 0}, {v: None}
        q = deque([v])
        while q:
            u = q.popleft()
            for w in adj[u]:
                if w not in dist:
                    dist[w] = dist[u] + 1
                    parent[w] = u
                    q.append(w)
                elif parent[u] != w:
                    cyc = dist[u] + dist[w] + 1
                    girth = cyc if girth is None else min(girth, cyc)
        ecc[v] = max(dist.values())
    d1 = max(ecc[v] for v in adj if v[0] == "a")
    d2 = max(ecc[v] for v in adj if v[0] == "b")
    s1 = max(len(adj[v]) for v in adj if v[0] == "a") - 1
    s2 = max(len(adj[v]) for v in adj if v[0] == "b") - 1
    return (n1, n2, s1, s2, d1, d2, None if girth is None else girth // 2)


def four_cycles(geo):
    s, t = geo.types
    nb = [set(geo.neighbors((s, i), t).tolist()) for i in range(geo.sizes[s])]
    total = 0
    for x, y in itertools.combinations(range(len(nb)), 2):
        c = len(nb[x] & nb[y])
        total += c * (c - 1) // 2
    return total


def test_rank1():
    g = rank1(5)
    assert g.rank == 1 and count_chambers(g) == 5
    assert sum(1 for _ in chambers(rank1(["p"]))) == 1
    with pytest.raises(ParameterError):
        rank1([])


def test_rank1_large_action():
    from geoforge.actions import wreath_product_action
    W = wreath_product_action(natural_group("sym", 3), 8)
    assert count_chambers(rank1(W)) == 6561


def test_as_chambers_brute_force():
    g = as_geo(5, 3)
    brute = sum(1 for t in itertools.permutations(range(5), 3))
    assert count_chambers(g) == brute == 60
    assert sum(1 for _ in chambers(g)) == 60
    for ch in itertools.islice(chambers(g), 5):
        assert is_chamber(g, ch)


def test_as_incidence_rule():
    # elements of distinct types are incident iff their underlying points differ
    g = as_geo(5, 3)
    for s, t in itertools.combinations(g.types, 2):
        for i in range(5):
            assert g.neighbors((s, i), t).tolist() == [j for j in range(5) if j != i]


def test_geometry_and_thick_modes_agree():
    for g in [as_geo(5, 3), as_geo(6, 3), build_family(FamilySpec("hs", m=5, rank=2))]:
        assert is_geometry(g, "exhaustive") and is_thick(g, "exhaustive") and is_firm(g, "exhaustive")
        g.attached.flag_transitive = True
        assert is_geometry(g, "transitive") and is_thick(g, "transitive")


def test_corank1_counts_as():
    low, counts = corank1_counts_exhaustive(as_geo(5, 3))
    assert low == 3


def test_hs_every_element_in_15_chambers():
    g = build_family(FamilySpec("hs", m=5, rank=2))
    for t in g.types:
        for i in range(g.sizes[t]):
            assert g.neighbors((t, i), 1 - t).size == 15


def test_not_a_geometry_and_budget():
    # path a1 - b1 - a2 : flag {a2} extends, but an isolated element does not
    rel = ExplicitRelation(3, 1, np.array([0, 1]), np.array([0, 0]))
    g = Pregeometry([1, 2], {1: 3, 2: 1}, {(1, 2): rel})
    assert unextendable_flag(g) == ((1, 2),)
    assert not is_geometry(g)
    with pytest.raises(ResourceLimitError):
        unextendable_flag(as_geo(7, 5), budget=10)


def test_flags():
    g = as_geo(5, 3)
    assert is_flag(g, [(1, 0), (2, 1)])
    assert not is_flag(g, [(1, 0), (2, 0)])
    assert not is_flag(g, [(1, 0), (1, 1)])


def test_truncation_connected():
    g = as_geo(5, 3)
    assert is_connected(truncation(g, [1, 2]))


def test_disconnected_components():
    rel = ExplicitRelation(2, 2, np.array([0, 1]), np.array([0, 1]))
    g = Pregeometry([1, 2], {1: 2, 2: 2}, {(1, 2): rel})
    comps = components(g)
    assert len(comps) == 2 and comps[0] == [(1, 0), (2, 0)]
    assert not is_connected(g)


def test_residue_example():
    g = as_geo(5, 3)
    r = residue(g, [(3, 2)])
    assert r.types == (1, 2) and r.sizes == {1: 4, 2: 4}
    assert r.meta["origin"][1].tolist() == [0, 1, 3, 4]
    with pytest.raises(NotAFlagError):
        residue(g, [(1, 0), (2, 0)])


def test_residue_of_geometry_is_geometry():
    g = as_geo(6, 4)
    for flag in [[(1, 0)], [(1, 0), (3, 2)], [(2, 5)]]:
        assert is_geometry(residue(g, flag), "exhaustive")


def test_attach_rejects_bad_generator():
    g = as_geo(5, 2)
    bad = np.array([1, 0, 2, 3, 4])
    att = Attachment([1, 2], {1: [bad], 2: [np.arange(5)]}, {1: 0, 2: 1})
    with pytest.raises(AttachmentError):
        g.with_attachment(att)


@pytest.mark.parametrize("kind,a,b,m,delta,expected", [
    ("U", 2, 4, 6, 1, (15, 15, 5, 5, 3, 3, 2)),
    ("Ubar", 2, 2, 6, 2, (60, 60, 23, 23, 3, 3, 2)),
    ("U", 1, 2, 4, 1, None),
])
def test_model_params_against_bfs_oracle(kind, a, b, m, delta, expected):
    g = model_geometry(kind, a, b, m, delta)
    got = rank2_params(g).as_tuple()
    assert got == brute_params(g)
    if expected is not None:
        assert got == expected


def test_rank2_params_single_source_matches_all_pairs():
    g = model_geometry("U", 2, 3, 6, 2)
    full = rank2_params(g)
    assert rank2_params(g, sources=(0, 0)) == full


def test_rank2_params_acyclic_has_no_gonality():
    rel = ExplicitRelation(2, 1, np.array([0, 1]), np.array([0, 0]))
    g = Pregeometry([1, 2], {1: 2, 2: 1}, {(1, 2): rel})
    assert rank2_params(g).g is None


def test_isomorphism_positive_and_negative():
    u = model_geometry("U", 2, 4, 6, 1)
    ubar = model_geometry("Ubar", 2, 2, 6, 1)
    # containment of a 2-set in a 4-set = disjointness from its complement
    assert isomorphic_rank2(u, ubar)
    # relabelled copy
    rng = np.random.Generator(np.random.Philox(5))
    p1, p2 = rng.permutation(15), rng.permutation(15)
    a, b = u.explicit_relation(1, 2).edges()
    shuffled = Pregeometry([1, 2], {1: 15, 2: 15}, {(1, 2): ExplicitRelation(15, 15, p1[a], p2[b])})
    assert isomorphic_rank2(u, shuffled)
    # a 6-regular circulant on 15+15 with a different 4-cycle count
    a = np.repeat(np.arange(15), 6)
    b = (a + np.tile(np.arange(6), 15)) % 15
    circ = Pregeometry([1, 2], {1: 15, 2: 15}, {(1, 2): ExplicitRelation(15, 15, a, b)})
    assert four_cycles(circ) != four_cycles(ubar)
    assert not isomorphic_rank2(circ, ubar)


def test_basic_diagram_as():
    g = as_geo(5, 3)
    g.attached.flag_transitive = True
    entries = basic_diagram(g)
    assert diagram_edges(entries) == {frozenset(p) for p in [(1, 2), (1, 3), (2, 3)]}
    for e in entries:
        assert e.params.as_tuple() == (4, 4, 2, 2, 3, 3, 2)


def test_quotient_examples():
    g = as_geo(5, 2)
    q = quotient(g, {1: [[0, 1, 2, 3, 4]]})
    assert q.sizes == {1: 1, 2: 5}
    assert q.neighbors((1, 0), 2).tolist() == [0, 1, 2, 3, 4]
    single = quotient(g, {})
    assert isomorphic_rank2(single, g)
    with pytest.raises(QuotientError) as exc:
        quotient(g, {1: [[0, 1], [2], [3], [4]]})
    assert exc.value.counterexample["part"] == [1, 2]
    with pytest.raises(QuotientError):
        quotient(g, {1: [[0, (2, 1)], [1], [2], [3], [4]]})
