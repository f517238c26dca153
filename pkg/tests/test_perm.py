import itertools
import math

import numpy as np
import pytest

from geoforge.actions import hs_action, natural_group, wreath_product_action
from geoforge.errors import HypothesisError
from geoforge.perm import (PermGroup, Permutation, build_chain, generates_whole, is_primitive,
                           orbit, stabilizer)


def sym(m):
    return natural_group("sym", m).group


def brute_blocks_primitive(G: PermGroup) -> bool:
    """Exhaustive block search: no nontrivial block through point 0."""
    n = G.degree
    gens = G.gen_arrays
    for size in range(2, n):
        if n % size:
            continue
        for rest in itertools.combinations(range(1, n), size - 1):
            B = frozenset((0,) + rest)
            ok = True
            for g in gens:
                img = frozenset(int(g[x]) for x in B)
                if img != B and img & B:
                    ok = False
                    break
            if ok:
                # closed under generators as a block system requires all images too
                seen, todo = {B}, [B]
                while todo and ok:
                    cur = todo.pop()
                    for g in gens:
                        img = frozenset(int(g[x]) for x in cur)
                        if any(img != S and img & S for S in seen):
                            ok = False
                            break
                        if img not in seen:
                            seen.add(img)
                            todo.append(img)
                if ok:
                    return False
    return True


def test_composition_left_to_right():
    p = Permutation.parse("(1,2)", 3)
    q = Permutation.parse("(2,3)", 3)
    # x^(pq) = (x^p)^q: 1 -> 2 -> 3
    assert (p * q)(0) == 2
    assert str(p * q) == "(1,3,2)"


def test_parse_format_roundtrip():
    for text in ["()", "(1,2)(3,4)", "(1,5,2)"]:
        assert str(Permutation.parse(text, 6)) == text
    with pytest.raises(ValueError):
        Permutation.parse("(1,2", 3)


def test_inverse_power_order():
    p = Permutation.parse("(1,2,3)(4,5)", 5)
    assert (p * p.inverse()).is_identity()
    assert p.order() == 6
    assert (p ** 6).is_identity()
    assert p ** -1 == p.inverse()


def test_sym5_order_matches_enumeration():
    G = sym(5)
    assert G.order() == 120 == len(G.elements())


@pytest.mark.parametrize("kind,m", [("sym", 4), ("alt", 5), ("alt", 6), ("sym", 6)])
def test_chain_order_equals_enumeration(kind, m):
    space = natural_group(kind, m)
    G = PermGroup(space.group.generators, m)  # no trusted order
    assert G.order() == len(G.elements())


def test_stabilizer_index_law():
    for G in [sym(5), natural_group("alt", 6).group, hs_action(5)[0].group]:
        for p in (0, 1, G.degree - 1):
            assert G.order() == G.stabilizer([p]).order() * len(G.orbit(p))


def test_hs_stabilizer_of_two_points_brute_force():
    space, _ = hs_action(5)
    G = space.group
    x0 = space.encode(tuple(range(5)))
    x1 = space.encode((1, 0, 3, 2, 4))
    # brute force: count group elements fixing both points
    elems = G.elements(limit=4000)
    fixing = [g for g in elems if g(x0) == x0 and g(x1) == x1]
    assert len(fixing) == 4
    assert G.stabilizer([x0, x1]).order() == 4


def test_hs_orbit_is_conjugacy_class():
    space, _ = hs_action(5)
    G = space.group
    x0 = space.encode(tuple(range(5)))
    x1 = space.encode((1, 0, 3, 2, 4))
    orb = stabilizer(G, [x0]).orbit(x1)
    # brute force conjugacy class of (1,2)(3,4) in A5
    A5 = [t for t in itertools.permutations(range(5))
          if sum(1 for i in range(5) for j in range(i) if t[j] > t[i]) % 2 == 0]
    a = (1, 0, 3, 2, 4)

    def inv(t):
        out = [0] * 5
        for i, x in enumerate(t):
            out[x] = i
        return tuple(out)

    def mul(s, t):
        return tuple(t[x] for x in s)

    cls = {mul(mul(inv(t), a), t) for t in A5}
    assert len(cls) == 15
    assert {space.decode(int(p)) for p in orb.point_array()} == cls


def test_wreath_order():
    W = wreath_product_action(natural_group("sym", 3), 4)
    assert W.degree == 81
    assert W.group.order() == 6 ** 4 * 24 == 31104
    # chain built without the trusted order agrees
    assert PermGroup(W.group.generators, 81).order() == 31104


def test_membership_random_words_and_non_members():
    G = wreath_product_action(natural_group("sym", 3), 3).group
    rng = np.random.Generator(np.random.Philox(7))
    for _ in range(100):
        assert G.contains(G.random_word(rng, 15))
    order = G.order()
    rejected = 0
    tries = 0
    while rejected < 100 and tries < 100_000:
        tries += 1
        g = Permutation(rng.permutation(G.degree))
        if order % g.order() != 0:
            assert not G.contains(g)
            rejected += 1
    assert rejected == 100


def test_orbit_partition_and_seeds():
    G = PermGroup([Permutation.parse("(1,2,3)", 6), Permutation.parse("(4,5)", 6)], 6)
    assert sorted(G.orbits()) == [[0, 1, 2], [3, 4], [5]]
    assert set(orbit(G, 0).point_array()) == set(orbit(G, 2).point_array())
    assert len(G.orbit((0, 3))) == 6
    assert len(G.orbit(frozenset({0, 1}))) == 3


def test_orbit_witness_maps_seed_to_member():
    G = sym(6)
    orb = G.orbit((0, 1))
    for member in list(orb)[:10]:
        w = orb.witness(member)
        assert (w(0), w(1)) == member


def test_primitivity_against_exhaustive_search():
    c4 = PermGroup([Permutation.parse("(1,2,3,4)", 4)], 4)
    assert not c4.is_primitive()
    assert sorted(c4.block_witness()) == [0, 2]
    assert not brute_blocks_primitive(c4)
    W = wreath_product_action(natural_group("sym", 3), 2).group
    assert is_primitive(W) and brute_blocks_primitive(W)
    assert sym(5).is_primitive()
    d8 = PermGroup([Permutation.parse("(1,2,3,4)", 4), Permutation.parse("(1,3)", 4)], 4)
    assert d8.is_primitive() == brute_blocks_primitive(d8)


def test_primitivity_needs_transitive():
    G = PermGroup([Permutation.parse("(1,2)", 4)], 4)
    with pytest.raises(HypothesisError):
        G.block_witness()


def test_generates_whole():
    G = sym(5)
    a = G.stabilizer([0]).generators
    b = G.stabilizer([1]).generators
    assert generates_whole(G, a, b)
    assert not generates_whole(G, a, [])
    space, _ = hs_action(5)
    H = space.group
    x0 = space.encode(tuple(range(5)))
    x1 = space.encode((1, 0, 3, 2, 4))
    assert generates_whole(H, H.stabilizer([x0]).generators, H.stabilizer([x1]).generators)


def test_deterministic_replay():
    def run():
        G = PermGroup(wreath_product_action(natural_group("sym", 3), 3).group.generators, 27)
        ch = G.chain
        return (ch.base, ch.orbit_sizes(), [str(g) for g in ch.strong_generators()],
                str(G.orbit(5).witness(20)))
    assert run() == run()


def test_build_chain_with_prefix_and_bound():
    G = sym(6)
    ch = build_chain(G.gen_arrays, 6, prefix=(3, 4))
    assert ch.base[:2] == (3, 4)
    assert ch.order() == 720
    assert math.prod(ch.orbit_sizes()) == 720
