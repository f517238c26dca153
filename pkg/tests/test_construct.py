import itertools

import numpy as np
import pytest

from geoforge.actions import hs_action, natural_group
from geoforge.construct import (FamilySpec, SdBundle, attach_sigma, build_family, decompose,
                                inc_extend, product_power, roundtrip, same_edges,
                                sigma_extension_order)
from geoforge.errors import HypothesisError, ParameterError
from geoforge.geometry import (Attachment, components, count_chambers, is_connected, rank1,
                               truncation)
from geoforge.perm import PermGroup, generates_whole


def start(space, x):
    g = rank1(space)
    g.attached = Attachment.uniform([1], space, {1: x})
    return g


def test_inc_extend_natural_s5():
    S5 = natural_group("sym", 5)
    g = inc_extend(start(S5, 0), S5, 1, 2)
    assert g.rank == 2
    assert g.neighbors((1, 0), 2).tolist() == [1, 2, 3, 4]


def test_inc_extend_hs_is_15_regular():
    space, _ = hs_action(5)
    x0 = space.encode(tuple(range(5)))
    x1 = space.encode((1, 0, 3, 2, 4))
    g = inc_extend(start(space, x0), space, x1, 2)
    rel = g.explicit_relation(1, 2)
    assert set(rel.degrees(0).tolist()) == {15} and set(rel.degrees(1).tolist()) == {15}


def test_as_family_sizes():
    g = build_family(FamilySpec("as", m=5, rank=3))
    assert g.rank == 3 and g.num_elements() == 15
    assert count_chambers(g) == 60


def test_hs_family_sizes():
    g = build_family(FamilySpec("hs", m=5, rank=2))
    assert g.types == (0, 1) and g.num_elements() == 120


@pytest.mark.parametrize("spec", [
    FamilySpec("as", m=5, rank=4),
    FamilySpec("pa", n=8, rank=4, component={"kind": "sym", "m": 3}),
    FamilySpec("hs", m=5, rank=3),
    FamilySpec("sd-symbolic", n=9, rank=3),
    FamilySpec("nope", m=3, rank=1),
])
def test_validation_messages(spec):
    with pytest.raises(ParameterError) as exc:
        spec.validate()
    assert "<=" in str(exc.value) or "unknown" in str(exc.value)


def test_spec_json_roundtrip():
    spec = FamilySpec("product", n=2, inner=FamilySpec("as", m=5, rank=2))
    assert FamilySpec.from_json(spec.to_json()) == spec


@pytest.mark.parametrize("spec,types", [
    (FamilySpec("as", m=5, rank=3), [1, 2, 3]),
    (FamilySpec("hs", m=5, rank=2), [0, 1]),
    (FamilySpec("as", m=7, rank=5), [1, 5]),
])
def test_roundtrip(spec, types):
    g = build_family(spec)
    for j in types:
        assert roundtrip(g, j)


def test_decompose_checks_hypotheses():
    g = build_family(FamilySpec("as", m=5, rank=2))
    # a group too small for incidence-transitivity
    cyc = PermGroup([natural_group("sym", 5).group.generators[0]], 5)
    g.attached = Attachment.uniform(g.types, natural_group("sym", 5), dict(g.attached.chamber), cyc)
    with pytest.raises(HypothesisError):
        decompose(g, 2)


def test_truncation_connectivity_matches_joint_generation():
    for spec in [FamilySpec("as", m=6, rank=3), FamilySpec("hs", m=5, rank=2),
                 FamilySpec("pa", n=6, rank=2, component={"kind": "sym", "m": 3})]:
        g = build_family(spec)
        att = g.attached
        for s, t in itertools.combinations(g.types, 2):
            bfs = is_connected(truncation(g, [s, t]))
            gen = generates_whole(att.group, att.stabilizer([(s, att.chamber[s])]).generators,
                                  att.stabilizer([(t, att.chamber[t])]).generators)
            assert bfs == gen


def test_lazy_and_explicit_relations_agree():
    spec = FamilySpec("pa", n=6, rank=2, component={"kind": "sym", "m": 3})
    g1 = build_family(spec)
    g2 = build_family(spec, force_lazy=True)
    assert g2.is_lazy() and not g1.is_lazy()
    assert same_edges(g1, g2)
    for p in (0, 17, 700):
        assert np.array_equal(g1.neighbors((1, p), 2), g2.neighbors((1, p), 2))


def test_pa_seeds_and_degree():
    g = build_family(FamilySpec("pa", n=6, rank=2, component={"kind": "sym", "m": 3}))
    assert g.sizes == {1: 729, 2: 729}
    space = g.attached.space
    assert space.decode(g.attached.chamber[1]) == (0, 0, 1, 1, 1, 1)


def test_hs_sd_extension():
    g = build_family(FamilySpec("hs-sd", m=5, rank=2))
    H = g.attached.group
    assert H.order() == 7200
    assert H.is_primitive()
    space, sigma = hs_action(5)
    assert sigma_extension_order(space.group, sigma) == 7200
    with pytest.raises(HypothesisError):
        sigma_extension_order(space.group, space.group.generators[0])


def test_product_power_componentwise():
    inner = build_family(FamilySpec("as", m=5, rank=2))
    g = product_power(inner, 2)
    assert g.sizes == {1: 25, 2: 25}
    codec = g.attached.space.codec
    for p in range(25):
        u = codec.decode(p)
        got = {codec.decode(q) for q in g.neighbors((1, p), 2).tolist()}
        brute = {(v1, v2) for v1 in range(5) for v2 in range(5) if v1 != u[0] and v2 != u[1]}
        assert got == brute
    assert count_chambers(g) == count_chambers(inner) ** 2 == 400


def test_product_power_keeps_diagram_edges():
    from geoforge.geometry import basic_diagram, diagram_edges
    inner = build_family(FamilySpec("as", m=5, rank=3))
    g = product_power(inner, 2)
    inner.attached.flag_transitive = True
    g.attached.flag_transitive = True
    assert diagram_edges(basic_diagram(g)) == diagram_edges(basic_diagram(inner))


def test_sd_symbolic_bundle():
    b = build_family(FamilySpec("sd-symbolic", n=9, rank=2))
    assert isinstance(b, SdBundle)
    js = b.to_json()
    assert js["T"] == "A_5" and len(js["seeds"]) == 2
    assert js["seeds"][0][0] == "()"
