"""Family constructions: the Inc extension, its inverse, and the named families.

Every type-class of a family geometry is a copy of the same point set Omega
with the same action of G, and the element index inside a type-class is the
point index in Omega.  Incidence between type i and the new type j is the
G-orbit of the pair (x_i, y): the type-j neighbours of x_i are y^{G_{x_i}},
and those of any other element are transported along the Schreier tree of
x_i's orbit (see :func:`geometry.propagate_rows`).
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np

from . import config
from .actions import (ActionSpace, component_from_descriptor, hs_action, natural_group,
                      parse_component, seed_points, wreath_product_action)
from .errors import HypothesisError, ParameterError
from .geometry import (Attachment, ExplicitRelation, OrbitRelation, Pregeometry, is_chamber,
                       propagate_rows, truncation)
from .perm import PermGroup, Permutation

FAMILIES = ("as", "pa", "hs", "hs-sd", "product", "sd-symbolic")


@dataclass
class FamilySpec:
    """Parameters of a family member.

    ``rank`` is the number of types.  For HS the seeds are x_0..x_b, so
    rank = b + 1.  ``component`` is a descriptor such as {"kind": "sym", "m": 3}.
    """
    family: str
    m: int | None = None
    n: int | None = None
    rank: int | None = None
    component: dict | None = None
    inner: "FamilySpec | None" = None

    def to_json(self) -> dict:
        out = {"family": self.family}
        for key in ("m", "n", "rank", "component"):
            val = getattr(self, key)
            if val is not None:
                out[key] = val
        if self.inner is not None:
            out["inner"] = self.inner.to_json()
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "FamilySpec":
        inner = obj.get("inner")
        return cls(obj["family"], obj.get("m"), obj.get("n"), obj.get("rank"),
                   obj.get("component"), cls.from_json(inner) if inner else None)

    @property
    def b(self) -> int:
        return self.rank - 1 if self.family in ("hs", "hs-sd") else self.rank

    def validate(self):
        f = self.family
        if f not in FAMILIES:
            raise ParameterError(f"unknown family {f!r}; choose from {', '.join(FAMILIES)}")
        if f == "product":
            if self.inner is None or self.n is None or self.n < 1:
                raise ParameterError("product needs an inner family and n >= 1")
            self.inner.validate()
            return
        if self.rank is None or self.rank < 1:
            raise ParameterError("rank must be a positive integer")
        b = self.b
        if f == "as":
            if self.m is None or not 1 <= b <= self.m - 2:
                raise ParameterError(f"AS needs b <= m-2 (got m={self.m}, b={b})")
        elif f == "pa":
            if self.n is None or self.component is None:
                raise ParameterError("PA needs --n and --component")
            if not 1 <= b <= self.n // 2 - 1:
                raise ParameterError(f"PA needs b <= floor(n/2)-1 (got n={self.n}, b={b})")
        elif f in ("hs", "hs-sd"):
            if self.m is None or not 0 <= b <= self.m // 4:
                raise ParameterError(f"HS needs b <= floor(m/4), i.e. rank <= floor(m/4)+1 "
                                     f"(got m={self.m}, rank={self.rank})")
        elif f == "sd-symbolic":
            if self.n is None or not 1 <= b <= (self.n - 1) // 4:
                raise ParameterError(f"SD needs b <= floor((n-1)/4) (got n={self.n}, b={b})")


# ---------------------------------------------------------------------------
# Inc extension and its inverse
# ---------------------------------------------------------------------------

def _space_of(geo: Pregeometry) -> ActionSpace:
    att = geo.attached
    if att is None:
        raise HypothesisError("no group attached")
    if not att.is_uniform or att.space is None:
        raise HypothesisError("extension needs every type-class to carry the same point action")
    return att.space


def orbit_pair_relation(group: PermGroup, x: int, y: int, force_lazy: bool = False):
    """The G-orbit of the pair (x, y), explicit when it fits the edge budget."""
    rel = OrbitRelation(group, x, y)
    if not force_lazy and rel.num_edges <= config.edge_budget():
        return rel.materialize()
    return rel


def inc_extend(geo: Pregeometry, Y: ActionSpace, y: int, j, force_lazy: bool = False) -> Pregeometry:
    """Add a type j whose elements are the points of Y.

    x_i is incident with every point of y^{G_{x_i}}; all other incident pairs
    are images of these under G.
    """
    space = _space_of(geo)
    att = geo.attached
    if Y.group is not space.group:
        raise HypothesisError("Y must carry the same action of G as the existing type-classes")
    if j in geo.sizes:
        raise ParameterError(f"type {j!r} is already in use")
    K = att.chamber_flag()
    if not is_chamber(geo, K):
        raise HypothesisError("K' is not a chamber")
    G = space.group
    y = int(y)
    if len(G.orbit(y)) != G.degree:
        raise HypothesisError("G is not transitive on Y")
    rels = dict(geo.relations)
    for t in geo.types:
        rels[(t, j)] = orbit_pair_relation(G, att.chamber[t], y, force_lazy)
    types = list(geo.types) + [j]
    sizes = dict(geo.sizes)
    sizes[j] = Y.degree
    labels = dict(geo.labels)
    labels[j] = Y
    chamber = dict(att.chamber)
    chamber[j] = y
    new_att = Attachment.uniform(types, space, chamber, G)
    out = Pregeometry(types, sizes, rels, labels, None, geo.meta)
    out.attached = new_att  # orbit relations of G are G-invariant by construction
    return out


def decompose(geo: Pregeometry, j):
    """Split off type j: returns (truncation, its base chamber, y = K_j).

    The hypotheses are checked: K is a chamber, and G is transitive on every
    type-class and on the incident pairs of every type pair.
    """
    if geo.rank < 2:
        raise HypothesisError("a rank-1 pregeometry has no type to split off")
    if j not in geo.sizes:
        raise ParameterError(f"unknown type {j!r}")
    att = geo.attached
    if att is None:
        raise HypothesisError("no group attached")
    K = att.chamber_flag()
    if not is_chamber(geo, K):
        raise HypothesisError("condition failed: the base chamber is not a chamber")
    for t in geo.types:
        orb = att.orbit_in_type(att.group, (t, att.chamber[t]))
        if orb.size != geo.sizes[t]:
            raise HypothesisError(f"condition failed: G is not transitive on type {t}")
    for s in geo.types:
        for t in geo.types:
            if s == t:
                continue
            xs = (s, att.chamber[s])
            stab = att.stabilizer([xs])
            orb = att.orbit_in_type(stab, (t, att.chamber[t]))
            if not np.array_equal(orb, np.sort(geo.neighbors(xs, t))):
                raise HypothesisError(f"condition failed: G is not incidence-transitive on types {s},{t}")
    rest = [t for t in geo.types if t != j]
    sub = truncation(geo, rest)
    return sub, {t: att.chamber[t] for t in rest}, att.chamber[j]


def same_edges(g1: Pregeometry, g2: Pregeometry) -> bool:
    if g1.types != g2.types or g1.sizes != g2.sizes:
        return False
    keys = set(g1.relations) | set(g2.relations)
    for s, t in keys:
        a1, b1 = g1.explicit_relation(s, t).edges()
        a2, b2 = g2.explicit_relation(s, t).edges()
        if not (np.array_equal(a1, a2) and np.array_equal(b1, b2)):
            return False
    return True


def roundtrip(geo: Pregeometry, j) -> bool:
    """decompose then extend again, compared edge for edge."""
    sub, _, y = decompose(geo, j)
    space = geo.attached.space
    again = inc_extend(sub, space, y, j)
    return same_edges(geo, again)


# ---------------------------------------------------------------------------
# families
# ---------------------------------------------------------------------------

def _grow(space: ActionSpace, seeds: list[int], types: list, meta: dict,
          force_lazy: bool = False) -> Pregeometry:
    geo = Pregeometry([types[0]], {types[0]: space.degree}, labels={types[0]: space}, meta=meta)
    geo.attached = Attachment.uniform([types[0]], space, {types[0]: seeds[0]})
    for t, y in zip(types[1:], seeds[1:]):
        geo = inc_extend(geo, space, y, t, force_lazy=force_lazy)
    return geo


def build_family(spec: FamilySpec, force_lazy: bool = False):
    """Build a family member; sd-symbolic returns an :class:`SdBundle`."""
    spec.validate()
    meta = {"spec": spec.to_json()}
    f = spec.family
    if f == "as":
        space = natural_group("sym", spec.m)
        seeds = seed_points("AS", m=spec.m, b=spec.b)
        return _grow(space, seeds, list(range(1, spec.b + 1)), meta, force_lazy)
    if f == "pa":
        H = component_from_descriptor(spec.component)
        space = wreath_product_action(H, spec.n)
        seeds = [space.encode(x) for x in seed_points("PA", n=spec.n, b=spec.b)]
        return _grow(space, seeds, list(range(1, spec.b + 1)), meta, force_lazy)
    if f in ("hs", "hs-sd"):
        space, sigma = hs_action(spec.m)
        seeds = [space.encode(x) for x in seed_points("HS", m=spec.m, b=spec.b)]
        geo = _grow(space, seeds, list(range(0, spec.b + 1)), meta, force_lazy)
        if f == "hs-sd":
            geo = attach_sigma(geo, sigma)
        return geo
    if f == "product":
        inner = build_family(spec.inner)
        return product_power(inner, spec.n, meta)
    if f == "sd-symbolic":
        from .diagonal import SdSystem
        return SdBundle(SdSystem(n=spec.n), spec.b)
    raise ParameterError(f"unknown family {f!r}")


def sigma_extension_order(G: PermGroup, sigma: Permutation) -> int:
    """|<G, sigma>| = 2|G| once sigma^2 = 1, sigma is outside G and normalizes G."""
    if not (sigma * sigma).is_identity():
        raise HypothesisError("sigma is not an involution")
    if G.contains(sigma):
        raise HypothesisError("sigma already lies in G")
    for g in G.generators:
        if not G.contains(sigma * g * sigma):
            raise HypothesisError("sigma does not normalize G")
    return 2 * G.order()


def attach_sigma(geo: Pregeometry, sigma: Permutation) -> Pregeometry:
    """Attach <G, sigma>, sigma acting the same way on every type-copy.

    Every incidence orbit is checked for sigma-invariance before attaching.
    """
    space = geo.attached.space
    G = space.group
    order = sigma_extension_order(G, sigma)
    for (s, t), rel in geo.relations.items():
        a, b = rel.edges()
        sg = sigma.images
        if not rel.contains(sg[a], sg[b]).all():
            raise HypothesisError(f"sigma does not preserve incidence between types {s} and {t}")
    H = PermGroup(list(G.generators) + [sigma], G.degree, known_order=order, name="HS_SD")
    H_space = ActionSpace(H, space.codec, dict(space.descriptor, sigma=True), dict(space.extras))
    att = Attachment.uniform(geo.types, H_space, dict(geo.attached.chamber), H)
    out = geo.with_attachment(att, check=False)
    out.attached = att
    out.meta = dict(geo.meta, sigma_extension=True, base_order=G.order())
    return out


def product_power(geo: Pregeometry, n: int, meta: dict | None = None) -> Pregeometry:
    """Gamma^n: n-tuples per type, incident componentwise, under G Wr S_n."""
    if n < 1:
        raise ParameterError("n must be positive")
    if n == 1:
        return geo
    space = _space_of(geo)
    W = wreath_product_action(space, n)
    d = space.degree
    deg = W.degree
    codec = W.codec
    digits = codec.digits(np.arange(deg))
    weights = np.array([d ** (n - 1 - k) for k in range(n)], dtype=np.int64)
    rels = {}
    for (s, t), rel in geo.relations.items():
        rel = rel.materialize()
        deg_row = rel.degrees(0)
        if deg_row.min() != deg_row.max():
            raise HypothesisError("product power expects constant degrees")
        k = int(deg_row[0])
        # neighbours of (u_1..u_n): all tuples with v_l a neighbour of u_l
        nbr = np.stack([rel.neighbors(0, p) for p in range(d)]).astype(np.int64)  # d x k
        rows = np.zeros((deg, k ** n), dtype=np.int64)
        for pos in range(n):
            comp = nbr[digits[:, pos]]  # deg x k
            rep = k ** (n - 1 - pos)
            tile = k ** pos
            rows += np.tile(np.repeat(comp, rep, axis=1), (1, tile)) * weights[pos]
        rels[(s, t)] = ExplicitRelation.from_rows(deg, deg, rows)
    att = geo.attached
    chamber = {t: codec.encode((att.chamber[t],) * n) for t in geo.types}
    labels = {t: W for t in geo.types}
    out = Pregeometry(geo.types, {t: deg for t in geo.types}, rels, labels, None,
                      meta or {"spec": {"family": "product", "n": n}})
    out.attach(Attachment.uniform(geo.types, W, chamber))
    return out


@dataclass
class SdBundle:
    """Seeds and closures for representative-level checks of the diagonal construction."""
    system: Any
    b: int

    @property
    def seeds(self):
        return [self.system.seed(c) for c in range(1, self.b + 1)]

    def to_json(self) -> dict:
        sysm = self.system
        fmt = sysm.T.to_json
        return {"kind": "sd-symbolic", "T": sysm.descriptor, "n": sysm.n, "b": self.b,
                "alpha": fmt(sysm.alpha),
                "seeds": [[fmt(x) for x in s.entries] for s in self.seeds]}
