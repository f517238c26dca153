"""Pregeometries: typed elements, cross-type incidence, flags and residues.

Elements are ``(type, index)`` pairs.  Incidence between two types is stored
per unordered type pair as a *relation*: either an explicit CSR adjacency in
both directions, or an orbit-defined relation (the orbit of one incident pair
under a group) whose neighbourhoods are produced on demand by transporting
the neighbourhood of the base element along a Schreier tree.  The second form
keeps very large family members (hundreds of millions of incident pairs)
usable for local questions such as residues of the base chamber.

Reflexive incidence is implicit and never stored.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from . import config
from .errors import (AttachmentError, GeoforgeError, HypothesisError, NotAFlagError,
                     ParameterError, ResourceLimitError)
from .perm import IDX, PermGroup, Permutation

Elem = tuple  # (type, index)


# ---------------------------------------------------------------------------
# relations
# ---------------------------------------------------------------------------

class ExplicitRelation:
    """Incidence between two types as CSR adjacency in both directions."""

    explicit = True

    def __init__(self, n1: int, n2: int, a: np.ndarray, b: np.ndarray):
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        key = np.unique(a * n2 + b)
        a, b = np.divmod(key, n2)
        self.n1, self.n2 = n1, n2
        self._fwd = _csr(n1, a, b)
        self._bwd = _csr(n2, b, a)
        self._keys = key

    @classmethod
    def from_rows(cls, n1: int, n2: int, rows: np.ndarray) -> "ExplicitRelation":
        """Constant-degree adjacency: rows[p] lists the neighbours of element p."""
        rows = np.sort(np.asarray(rows, dtype=np.int64), axis=1)
        a = np.repeat(np.arange(n1, dtype=np.int64), rows.shape[1])
        return cls(n1, n2, a, rows.ravel())

    @property
    def num_edges(self) -> int:
        return int(self._keys.size)

    def neighbors(self, side: int, p: int) -> np.ndarray:
        indptr, idx = self._fwd if side == 0 else self._bwd
        return idx[indptr[p]:indptr[p + 1]]

    def degrees(self, side: int) -> np.ndarray:
        indptr = (self._fwd if side == 0 else self._bwd)[0]
        return np.diff(indptr)

    def edges(self) -> tuple[np.ndarray, np.ndarray]:
        return np.divmod(self._keys, self.n2)

    def contains(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        key = np.asarray(a, dtype=np.int64) * self.n2 + np.asarray(b, dtype=np.int64)
        pos = np.searchsorted(self._keys, key)
        pos = np.minimum(pos, max(self._keys.size - 1, 0))
        if self._keys.size == 0:
            return np.zeros(key.shape, dtype=bool)
        return self._keys[pos] == key

    def reversed(self) -> "ExplicitRelation":
        a, b = self.edges()
        return ExplicitRelation(self.n2, self.n1, b, a)

    def restrict(self, keep1: np.ndarray, keep2: np.ndarray) -> "ExplicitRelation":
        """Induced relation on the listed (sorted) elements, renumbered 0.."""
        a, b = self.edges()
        pos1 = np.full(self.n1, -1, dtype=np.int64)
        pos1[keep1] = np.arange(len(keep1))
        pos2 = np.full(self.n2, -1, dtype=np.int64)
        pos2[keep2] = np.arange(len(keep2))
        ra, rb = pos1[a], pos2[b]
        ok = (ra >= 0) & (rb >= 0)
        return ExplicitRelation(len(keep1), len(keep2), ra[ok], rb[ok])

    def materialize(self) -> "ExplicitRelation":
        return self


def _csr(n: int, a: np.ndarray, b: np.ndarray):
    order = np.lexsort((b, a))
    a, b = a[order], b[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, a + 1, 1)
    np.cumsum(indptr, out=indptr)
    return indptr, b.astype(IDX)


class OrbitRelation:
    """The orbit of the incident pair (x, y) under W, both types carrying W's point action.

    Neighbourhoods of the base elements are stabilizer orbits; the
    neighbourhood of any other element p is the image of the base
    neighbourhood under a Schreier-tree witness mapping the base element to p.
    """

    explicit = False

    def __init__(self, group: PermGroup, x: int, y: int):
        self.group = group
        self.n1 = self.n2 = group.degree
        self.x, self.y = int(x), int(y)
        self._base = [None, None]
        self._trees = [None, None]

    def base_neighbors(self, side: int) -> np.ndarray:
        if self._base[side] is None:
            a, b = (self.x, self.y) if side == 0 else (self.y, self.x)
            orb = self.group.stabilizer([a]).orbit(b)
            self._base[side] = np.sort(orb.point_array())
        return self._base[side]

    def _tree(self, side: int):
        if self._trees[side] is None:
            orb = self.group.orbit(self.x if side == 0 else self.y)
            if len(orb) != self.group.degree:
                raise HypothesisError("orbit-defined relation needs a transitive group")
            self._trees[side] = orb
        return self._trees[side]

    def neighbors(self, side: int, p: int) -> np.ndarray:
        base = self.base_neighbors(side)
        if p == (self.x if side == 0 else self.y):
            return base
        arr = base
        gens = self.group.gen_arrays
        for g in self._tree(side).word(int(p)):
            arr = gens[g][arr]
        return np.sort(arr)

    def degrees(self, side: int) -> np.ndarray:
        n = self.n1 if side == 0 else self.n2
        return np.full(n, len(self.base_neighbors(side)), dtype=np.int64)

    @property
    def num_edges(self) -> int:
        return self.n1 * len(self.base_neighbors(0))

    def materialize(self) -> ExplicitRelation:
        budget = config.edge_budget()
        if self.num_edges > budget:
            raise ResourceLimitError(
                f"{self.num_edges} incident pairs exceed the edge budget {budget} (GEOFORGE_EDGE_BUDGET)")
        rows = propagate_rows(self.group, self._tree(0), self.base_neighbors(0))
        return ExplicitRelation.from_rows(self.n1, self.n2, rows)

    def edges(self):
        return self.materialize().edges()

    def contains(self, a, b) -> np.ndarray:
        a = np.atleast_1d(a)
        b = np.atleast_1d(b)
        out = np.zeros(a.shape, dtype=bool)
        for k, (p, q) in enumerate(zip(a.tolist(), b.tolist())):
            nb = self.neighbors(0, p)
            pos = np.searchsorted(nb, q)
            out[k] = pos < nb.size and nb[pos] == q
        return out


def propagate_rows(group: PermGroup, tree, base: np.ndarray) -> np.ndarray:
    """rows[p] = image of ``base`` under the tree witness of p, for all p in the tree.

    Works layer by layer: children reached by generator g get g applied to
    their parent's row, one gather per (layer, generator).
    """
    members = np.asarray(tree.members, dtype=np.int64)
    parent = np.asarray(tree.parent, dtype=np.int64)
    via = np.asarray(tree.via, dtype=np.int64)
    rows = np.empty((members.size, base.size), dtype=IDX)
    rows[0] = base
    gens = group.gen_arrays
    # depth of every node, parents always precede children
    depth = np.zeros(members.size, dtype=np.int64)
    for k in range(1, members.size):
        depth[k] = depth[parent[k]] + 1
    for d in range(1, int(depth.max(initial=0)) + 1):
        layer = np.flatnonzero(depth == d)
        for g in np.unique(via[layer]).tolist():
            sel = layer[via[layer] == g]
            rows[sel] = gens[g][rows[parent[sel]]]
    out = np.empty_like(rows)
    out[members] = rows
    return out


# ---------------------------------------------------------------------------
# attached groups
# ---------------------------------------------------------------------------

class Attachment:
    """A group acting on every type-class, with a base chamber.

    ``actions[t]`` lists the generator image arrays on type t; generator k on
    different types is the same abstract element.  When every type carries the
    same point action (all family constructions), ``space`` holds it and the
    working group is that action itself; otherwise the working group acts on
    the disjoint union of the type-classes.
    """

    def __init__(self, types: Sequence, actions: dict, chamber: dict, *, space=None,
                 known_order: int | None = None):
        self.types = tuple(types)
        self.actions = {t: [np.asarray(a, dtype=IDX) for a in actions[t]] for t in self.types}
        self.chamber = {t: int(chamber[t]) for t in chamber}
        self.space = space
        self.known_order = known_order
        self.flag_transitive: bool | None = None
        self._work = None
        ngens = {len(v) for v in self.actions.values()}
        if len(ngens) > 1:
            raise AttachmentError("every type needs the same number of generators")

    @classmethod
    def uniform(cls, types, space, chamber: dict, group: PermGroup | None = None) -> "Attachment":
        grp = group or space.group
        att = cls(types, {t: grp.gen_arrays for t in types}, chamber, space=space,
                  known_order=grp.known_order)
        att._work = (grp, {t: 0 for t in types})
        return att

    @property
    def is_uniform(self) -> bool:
        return self._work is not None and all(v == 0 for v in self._work[1].values())

    def working(self) -> tuple[PermGroup, dict]:
        if self._work is None:
            offs, total = {}, 0
            for t in self.types:
                offs[t] = total
                total += self.actions[t][0].size
            gens = []
            for k in range(len(self.actions[self.types[0]])):
                gens.append(Permutation._wrap(np.concatenate(
                    [self.actions[t][k] + offs[t] for t in self.types])))
            self._work = (PermGroup(gens, total), offs)
        return self._work

    @property
    def group(self) -> PermGroup:
        return self.working()[0]

    def point(self, e: Elem) -> int:
        return self.working()[1][e[0]] + int(e[1])

    def element(self, t, point: int) -> Elem:
        return (t, int(point) - self.working()[1][t])

    def stabilizer(self, elems: Iterable[Elem]) -> PermGroup:
        return self.group.stabilizer([self.point(e) for e in elems])

    def orbit_in_type(self, grp: PermGroup, e: Elem) -> np.ndarray:
        """Indices of the type-t elements in the orbit of e under grp."""
        off = self.working()[1][e[0]]
        return np.sort(grp.orbit(self.point(e)).point_array() - off)

    def chamber_flag(self) -> tuple:
        return tuple((t, self.chamber[t]) for t in self.types)

    def restrict(self, types) -> "Attachment":
        types = tuple(t for t in self.types if t in set(types))
        att = Attachment(types, {t: self.actions[t] for t in types},
                         {t: self.chamber[t] for t in types}, space=self.space,
                         known_order=self.known_order)
        if self.is_uniform:
            att._work = (self._work[0], {t: 0 for t in types})
        return att


# ---------------------------------------------------------------------------
# labels
# ---------------------------------------------------------------------------

class ListLabels:
    def __init__(self, labels: list):
        self.labels = list(labels)

    def label_json(self, i: int):
        return self.labels[i]

    def format(self, i: int) -> str:
        return str(self.labels[i])


class IndexLabels:
    def label_json(self, i: int):
        return i + 1

    def format(self, i: int) -> str:
        return str(i + 1)


# ---------------------------------------------------------------------------
# pregeometry
# ---------------------------------------------------------------------------

class Pregeometry:
    """Typed elements with symmetric, type-respecting incidence.

    ``relations`` maps ``(s, t)`` with s before t in type order to a relation
    whose side 0 is type s.  Missing pairs have no incident elements.
    """

    def __init__(self, types: Sequence, sizes: dict, relations: dict | None = None,
                 labels: dict | None = None, attached: Attachment | None = None,
                 meta: dict | None = None, check_attach: bool = True):
        types = list(types)
        if not types:
            raise ParameterError("a pregeometry needs at least one type")
        if len(set(types)) != len(types):
            raise ParameterError("repeated type")
        self.types = tuple(sorted(types))
        self.sizes = {t: int(sizes[t]) for t in self.types}
        self.relations = {}
        for (s, t), rel in (relations or {}).items():
            if s == t:
                raise ParameterError("incidence within a type is not allowed")
            if self.types.index(s) > self.types.index(t):
                s, t = t, s
                rel = rel.materialize().reversed()
            if (rel.n1, rel.n2) != (self.sizes[s], self.sizes[t]):
                raise ParameterError(f"relation {s}-{t} has the wrong shape")
            self.relations[(s, t)] = rel
        self.labels = labels or {}
        self.meta = dict(meta or {})
        self.attached = None
        if attached is not None:
            self.attach(attached, check=check_attach)

    # -- basic access --------------------------------------------------------
    @property
    def rank(self) -> int:
        return len(self.types)

    def num_elements(self) -> int:
        return sum(self.sizes.values())

    def elements(self, t) -> range:
        return range(self.sizes[t])

    def relation(self, s, t):
        """(relation, side) for looking up type-t neighbours of type-s elements."""
        if (s, t) in self.relations:
            return self.relations[(s, t)], 0
        if (t, s) in self.relations:
            return self.relations[(t, s)], 1
        return None, 0

    def neighbors(self, e: Elem, t) -> np.ndarray:
        s, i = e
        if s == t:
            raise ValueError("neighbours are only defined across types")
        rel, side = self.relation(s, t)
        if rel is None:
            return np.empty(0, dtype=IDX)
        return rel.neighbors(side, int(i))

    def incident(self, e: Elem, f: Elem) -> bool:
        if e[0] == f[0]:
            return e[1] == f[1]
        nb = self.neighbors(e, f[0])
        pos = np.searchsorted(nb, f[1])
        return bool(pos < nb.size and nb[pos] == f[1])

    def num_edges(self, s, t) -> int:
        rel, _ = self.relation(s, t)
        return 0 if rel is None else rel.num_edges

    def explicit_relation(self, s, t) -> ExplicitRelation:
        """Materialized relation with side 0 = type s."""
        rel, side = self.relation(s, t)
        if rel is None:
            return ExplicitRelation(self.sizes[s], self.sizes[t], np.empty(0), np.empty(0))
        rel = rel.materialize()
        return rel if side == 0 else rel.reversed()

    def label(self, e: Elem):
        lab = self.labels.get(e[0])
        return lab.label_json(e[1]) if lab is not None else e[1] + 1

    def format_element(self, e: Elem) -> str:
        lab = self.labels.get(e[0])
        body = lab.format(e[1]) if lab is not None else str(e[1] + 1)
        return f"{e[0]}:{body}"

    def is_lazy(self) -> bool:
        return any(not r.explicit for r in self.relations.values())

    # -- group attachment ----------------------------------------------------
    def attach(self, att: Attachment, check: bool = True):
        if tuple(att.types) != self.types:
            raise AttachmentError("attachment types differ from the pregeometry's types")
        for t in self.types:
            for a in att.actions[t]:
                if a.size != self.sizes[t]:
                    raise AttachmentError(f"generator acts on {a.size} points, type {t} has {self.sizes[t]}")
        if check:
            bad = incidence_violation(self, att)
            if bad is not None:
                raise AttachmentError(f"generator {bad[0]} does not preserve incidence: "
                                      f"{bad[1]} is incident to {bad[2]} but their images are not")
        self.attached = att

    def with_attachment(self, att: Attachment | None, check: bool = True) -> "Pregeometry":
        g = Pregeometry(self.types, self.sizes, self.relations, self.labels, None, self.meta)
        if att is not None:
            g.attach(att, check=check)
        return g


def incidence_violation(geo: Pregeometry, att: Attachment):
    """First (generator, e, f) with e * f but e^g not * f^g, else None."""
    for (s, t), rel in geo.relations.items():
        if not rel.explicit:
            if att.is_uniform and att.group is rel.group:
                continue
            grp = att.group
            # g preserves the orbit (x,y)^W when it maps the base pair into it and normalizes W
            x, y = rel.x, rel.y
            for k, (gs, gt) in enumerate(zip(att.actions[s], att.actions[t])):
                if not rel.contains(np.array([gs[x]]), np.array([gt[y]]))[0]:
                    return k, (s, x), (t, y)
                gp = Permutation._wrap(gs)
                ginv = gp.inverse()
                for w in rel.group.generators:
                    if not rel.group.contains(ginv * w * gp):
                        raise AttachmentError("cannot certify invariance of an orbit-defined relation")
            continue
        a, b = rel.edges()
        for k, (gs, gt) in enumerate(zip(att.actions[s], att.actions[t])):
            ok = rel.contains(gs[a], gt[b])
            if not ok.all():
                i = int(np.flatnonzero(~ok)[0])
                return k, (s, int(a[i])), (t, int(b[i]))
    return None


def rank1(points) -> Pregeometry:
    """Rank-1 pregeometry on the given points (list of labels, a count, or an ActionSpace)."""
    from .actions import ActionSpace
    if isinstance(points, ActionSpace):
        geo = Pregeometry([1], {1: points.degree}, labels={1: points})
        return geo
    if isinstance(points, int):
        if points < 1:
            raise ParameterError("need at least one point")
        return Pregeometry([1], {1: points})
    points = list(points)
    if not points:
        raise ParameterError("need at least one point")
    return Pregeometry([1], {1: len(points)}, labels={1: ListLabels(points)})


# ---------------------------------------------------------------------------
# flags and chambers
# ---------------------------------------------------------------------------

def common_neighbors(geo: Pregeometry, flag: Sequence[Elem], t) -> np.ndarray:
    """Elements of type t incident with every member of flag."""
    cur = None
    for e in flag:
        if e[0] == t:
            raise ValueError("flag already has an element of that type")
        nb = geo.neighbors(e, t)
        cur = nb if cur is None else np.intersect1d(cur, nb, assume_unique=True)
        if cur.size == 0:
            break
    if cur is None:
        return np.arange(geo.sizes[t], dtype=IDX)
    return cur


def is_flag(geo: Pregeometry, elems: Sequence[Elem]) -> bool:
    elems = list(elems)
    if len({e[0] for e in elems}) != len(elems):
        return False
    for e in elems:
        if e[0] not in geo.sizes or not 0 <= e[1] < geo.sizes[e[0]]:
            return False
    return all(geo.incident(e, f) for e, f in itertools.combinations(elems, 2))


def is_chamber(geo: Pregeometry, elems: Sequence[Elem]) -> bool:
    return len(elems) == geo.rank and is_flag(geo, elems)


class _Budget:
    def __init__(self, limit: int | None):
        self.limit = config.flag_budget() if limit is None else limit
        self.used = 0

    def tick(self, k: int = 1):
        self.used += k
        if self.used > self.limit:
            raise ResourceLimitError(
                f"exhaustive enumeration exceeded the flag budget {self.limit} (GEOFORGE_FLAG_BUDGET)")


def chambers(geo: Pregeometry, budget: int | None = None) -> Iterator[tuple]:
    """All chambers, by depth-first extension in type order."""
    bud = _Budget(budget)
    types = geo.types

    def rec(k, flag):
        if k == len(types):
            yield tuple(flag)
            return
        t = types[k]
        for i in common_neighbors(geo, flag, t).tolist():
            bud.tick()
            flag.append((t, i))
            yield from rec(k + 1, flag)
            flag.pop()

    yield from rec(0, [])


def count_chambers(geo: Pregeometry, budget: int | None = None) -> int:
    """Chamber count; the last type is counted rather than enumerated."""
    bud = _Budget(budget)
    types = geo.types
    if geo.rank == 1:
        return geo.sizes[types[0]]

    def rec(k, flag):
        t = types[k]
        cand = common_neighbors(geo, flag, t)
        if k == len(types) - 1:
            return int(cand.size)
        total = 0
        for i in cand.tolist():
            bud.tick()
            flag.append((t, i))
            total += rec(k + 1, flag)
            flag.pop()
        return total

    return rec(0, [])


def unextendable_flag(geo: Pregeometry, budget: int | None = None):
    """A maximal flag that is not a chamber, or None (exhaustive)."""
    bud = _Budget(budget)
    types = geo.types

    def rec(k, flag, skipped):
        if k == len(types):
            if not skipped:
                return None
            if not flag:
                return None if any(geo.sizes[t] for t in skipped) else ()
            for t in skipped:
                if common_neighbors(geo, flag, t).size:
                    return None
            return tuple(flag)
        t = types[k]
        for i in common_neighbors(geo, flag, t).tolist():
            bud.tick()
            flag.append((t, i))
            hit = rec(k + 1, flag, skipped)
            flag.pop()
            if hit is not None:
                return hit
        return rec(k + 1, flag, skipped + [t])

    return rec(0, [], [])


def corank1_counts_exhaustive(geo: Pregeometry, budget: int | None = None):
    """(minimum chamber count over all co-rank-1 flags, a flag attaining it)."""
    bud = _Budget(budget)
    best = [None, None]
    for t in geo.types:
        rest = [u for u in geo.types if u != t]

        def rec(k, flag):
            if k == len(rest):
                c = int(common_neighbors(geo, flag, t).size)
                if best[0] is None or c < best[0]:
                    best[0], best[1] = c, tuple(flag)
                return
            u = rest[k]
            for i in common_neighbors(geo, flag, u).tolist():
                bud.tick()
                flag.append((u, i))
                rec(k + 1, flag)
                flag.pop()

        rec(0, [])
    return best[0], best[1]


def base_corank1_counts(geo: Pregeometry) -> dict:
    """Chamber counts of the co-rank-1 flags inside the base chamber, by missing type."""
    att = _need_chamber(geo)
    K = att.chamber_flag()
    return {t: int(common_neighbors(geo, [e for e in K if e[0] != t], t).size) for t in geo.types}


def _need_chamber(geo: Pregeometry) -> Attachment:
    if geo.attached is None:
        raise HypothesisError("no group attached")
    K = geo.attached.chamber_flag()
    if not is_chamber(geo, K):
        raise HypothesisError("the attached base chamber is not a chamber")
    return geo.attached


def _transitive_mode(geo: Pregeometry, mode: str) -> bool:
    if mode == "exhaustive":
        return False
    if mode == "transitive":
        return True
    return geo.attached is not None and geo.attached.flag_transitive is True


def is_geometry(geo: Pregeometry, mode: str = "auto", budget: int | None = None) -> bool:
    """Every flag lies in a chamber.

    With a verified flag-transitive group every flag is an image of a subflag
    of the base chamber, so the answer is immediate; otherwise exhaustive.
    """
    if _transitive_mode(geo, mode):
        _need_chamber(geo)
        return True
    return unextendable_flag(geo, budget) is None


def is_thick(geo: Pregeometry, mode: str = "auto", budget: int | None = None) -> bool:
    """Every non-maximal flag lies in at least three chambers.

    In a geometry the minimum is attained on co-rank-1 flags; under a
    flag-transitive group those are images of co-rank-1 subflags of the base chamber.
    """
    if _transitive_mode(geo, mode):
        return min(base_corank1_counts(geo).values()) >= 3
    low, _ = corank1_counts_exhaustive(geo, budget)
    return low is not None and low >= 3


def is_firm(geo: Pregeometry, mode: str = "auto", budget: int | None = None) -> bool:
    if _transitive_mode(geo, mode):
        return min(base_corank1_counts(geo).values()) >= 2
    low, _ = corank1_counts_exhaustive(geo, budget)
    return low is not None and low >= 2


# ---------------------------------------------------------------------------
# truncations, connectivity, residues
# ---------------------------------------------------------------------------

def truncation(geo: Pregeometry, J: Iterable) -> Pregeometry:
    J = list(J)
    if not J:
        raise ParameterError("truncation needs a nonempty type set")
    for t in J:
        if t not in geo.sizes:
            raise ParameterError(f"unknown type {t!r}")
    keep = set(J)
    if keep == set(geo.types):
        return geo
    rels = {k: r for k, r in geo.relations.items() if k[0] in keep and k[1] in keep}
    att = geo.attached.restrict(keep) if geo.attached is not None else None
    out = Pregeometry(sorted(keep), {t: geo.sizes[t] for t in keep}, rels,
                      {t: v for t, v in geo.labels.items() if t in keep}, None, geo.meta)
    if att is not None:
        out.attached = att  # restriction of an invariant relation stays invariant
    return out


def components(geo: Pregeometry, limit: int | None = None) -> list[list[Elem]]:
    """Connected components of the incidence graph (elements listed in type order)."""
    offs, total = {}, 0
    for t in geo.types:
        offs[t] = total
        total += geo.sizes[t]
    if all(r.explicit for r in geo.relations.values()):
        rows, cols = [], []
        for (s, t), rel in geo.relations.items():
            a, b = rel.edges()
            rows.append(a + offs[s])
            cols.append(b + offs[t])
        if rows:
            r = np.concatenate(rows)
            c = np.concatenate(cols)
        else:
            r = c = np.empty(0, dtype=np.int64)
        adj = sparse.coo_matrix((np.ones(r.size, dtype=np.int8), (r, c)), shape=(total, total)).tocsr()
        ncomp, lab = csgraph.connected_components(adj, directed=False)
    else:
        lab = _lazy_components(geo, offs, total)
        ncomp = int(lab.max()) + 1
    # relabel components by their first element
    order = {}
    out = []
    types = geo.types
    for t in types:
        for i in range(geo.sizes[t]):
            c = int(lab[offs[t] + i])
            if c not in order:
                order[c] = len(out)
                out.append([])
            out[order[c]].append((t, i))
            if limit is not None and len(out) > limit:
                return out
    return out


def _lazy_components(geo: Pregeometry, offs: dict, total: int) -> np.ndarray:
    lab = np.full(total, -1, dtype=np.int64)
    comp = 0
    for t0 in geo.types:
        for i0 in range(geo.sizes[t0]):
            if lab[offs[t0] + i0] >= 0:
                continue
            lab[offs[t0] + i0] = comp
            stack = [(t0, i0)]
            while stack:
                e = stack.pop()
                for u in geo.types:
                    if u == e[0]:
                        continue
                    nb = geo.neighbors(e, u)
                    fresh = nb[lab[offs[u] + nb] < 0]
                    lab[offs[u] + fresh] = comp
                    stack.extend((u, int(j)) for j in fresh.tolist())
            comp += 1
    return lab


def is_connected(geo: Pregeometry) -> bool:
    return len(components(geo, limit=1)) == 1


def residue(geo: Pregeometry, flag: Sequence[Elem]) -> Pregeometry:
    """Elements incident with all of the flag, of types outside it, with induced incidence.

    The residue's elements are renumbered; ``meta["origin"][t]`` holds the
    original indices.
    """
    flag = list(flag)
    if not is_flag(geo, flag):
        raise NotAFlagError(f"not a flag: {flag}")
    ftypes = {e[0] for e in flag}
    rtypes = [t for t in geo.types if t not in ftypes]
    if not rtypes:
        return Pregeometry([0], {0: 0}, meta={"origin": {0: np.empty(0, dtype=IDX)}, "empty": True})
    keep = {t: common_neighbors(geo, flag, t) for t in rtypes}
    rels = {}
    for s, t in itertools.combinations(rtypes, 2):
        rel, side = geo.relation(s, t)
        if rel is None:
            continue
        ks, kt = keep[s], keep[t]
        if rel.explicit:
            r = rel if side == 0 else rel.reversed()
            rels[(s, t)] = r.restrict(ks, kt)
        else:
            a, b = [], []
            for pos, p in enumerate(ks.tolist()):
                nb = geo.neighbors((s, p), t)
                hit = np.flatnonzero(np.isin(kt, nb, assume_unique=True))
                a.append(np.full(hit.size, pos, dtype=np.int64))
                b.append(hit)
            a = np.concatenate(a) if a else np.empty(0, dtype=np.int64)
            b = np.concatenate(b) if b else np.empty(0, dtype=np.int64)
            rels[(s, t)] = ExplicitRelation(ks.size, kt.size, a, b)
    labels = {}
    for t in rtypes:
        lab = geo.labels.get(t)
        if lab is not None and keep[t].size <= 100_000:
            labels[t] = ListLabels([lab.label_json(int(i)) for i in keep[t].tolist()])
    meta = {"origin": keep, "flag": tuple(flag)}
    return Pregeometry(rtypes, {t: int(keep[t].size) for t in rtypes}, rels, labels, None, meta)


# ---------------------------------------------------------------------------
# rank-2 parameters
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DiagramEdgeParams:
    n1: int
    n2: int
    s1: int
    s2: int
    d1: int
    d2: int
    g: int | None
    regular: bool = True

    def as_tuple(self) -> tuple:
        return (self.n1, self.n2, self.s1, self.s2, self.d1, self.d2, self.g)

    def to_json(self) -> dict:
        return {"n1": self.n1, "n2": self.n2, "s1": self.s1, "s2": self.s2,
                "d1": self.d1, "d2": self.d2, "g": self.g, "regular": self.regular}

    def swapped(self) -> "DiagramEdgeParams":
        return DiagramEdgeParams(self.n2, self.n1, self.s2, self.s1, self.d2, self.d1, self.g, self.regular)


def _rank2_adjacency(geo: Pregeometry):
    if geo.rank != 2:
        raise ParameterError("rank-2 input required")
    s, t = geo.types
    rel = geo.explicit_relation(s, t)
    n1, n2 = geo.sizes[s], geo.sizes[t]
    a, b = rel.edges()
    n = n1 + n2
    r = np.concatenate([a, b + n1])
    c = np.concatenate([b + n1, a])
    adj = sparse.csr_matrix((np.ones(r.size, dtype=np.float64), (r, c)), shape=(n, n))
    return adj, rel, n1, n2


def is_complete_bipartite(geo: Pregeometry) -> bool:
    s, t = geo.types
    return geo.num_edges(s, t) == geo.sizes[s] * geo.sizes[t]


def rank2_params(geo: Pregeometry, max_nodes: int = 6000, sources=None) -> DiagramEdgeParams:
    """(n1, n2, s1, s2, d1, d2, g) of a connected rank-2 pregeometry.

    d_i is the largest distance from a type-i element; g is half the length of
    a shortest cycle.  The graph is bipartite, so a shortest cycle has length
    2k where k is the least distance d(v,u) at which u has two neighbours one
    step closer to v.

    ``sources`` = (i, j) restricts the searches to type-1 element i and type-2
    element j.  That is exact when a group is transitive on each type (every
    cycle passes through elements of both types), and lets large residues
    through without all-pairs distances.
    """
    adj, rel, n1, n2 = _rank2_adjacency(geo)
    n = n1 + n2
    if sources is None and n > max_nodes:
        raise ResourceLimitError(f"rank-2 parameter search limited to {max_nodes} elements "
                                 "without a transitive group")
    ncomp, _ = csgraph.connected_components(adj, directed=False)
    if ncomp != 1:
        raise HypothesisError("rank2_params needs a connected incidence graph")
    deg1, deg2 = rel.degrees(0), rel.degrees(1)
    regular = bool(deg1.min() == deg1.max() and deg2.min() == deg2.max())
    idx = np.arange(n) if sources is None else np.array([sources[0], n1 + sources[1]])
    D = csgraph.shortest_path(adj, method="D", unweighted=True, indices=idx).astype(np.int64)
    first = idx < n1
    d1 = int(D[first].max())
    d2 = int(D[~first].max())
    g = None
    diam = int(D.max())
    for k in range(0, diam):
        Lk = sparse.csr_matrix((D == k).astype(np.float64))
        cnt = np.asarray((adj @ Lk.T).T.todense())
        if np.any((D == k + 1) & (cnt >= 2)):
            g = k + 1
            break
    return DiagramEdgeParams(n1, n2, int(deg1.max()) - 1, int(deg2.max()) - 1, d1, d2, g, regular)


def degree_sequences(geo: Pregeometry) -> tuple:
    s, t = geo.types
    rel = geo.explicit_relation(s, t)
    return (tuple(sorted(rel.degrees(0).tolist())), tuple(sorted(rel.degrees(1).tolist())))


def _refine(adj, colours: np.ndarray) -> np.ndarray:
    """Colour refinement on a (block-diagonal) graph until the partition is stable.

    New colours are ranks of (old colour, neighbour-colour counts) rows, so the
    numbering depends only on the partition, never on vertex order; two graphs
    refined together get comparable colours.
    """
    k = int(colours.max()) + 1
    while True:
        onehot = sparse.csr_matrix((np.ones(colours.size), (np.arange(colours.size), colours)),
                                   shape=(colours.size, k))
        counts = (adj @ onehot).toarray().astype(np.int64)
        rows = np.column_stack([colours, counts])
        _, new = np.unique(rows, axis=0, return_inverse=True)
        new = new.ravel()
        k2 = int(new.max()) + 1
        if k2 == k:
            return new
        colours, k = new, k2


def _find_isomorphism(adj, colours: np.ndarray, n: int, nodes: int):
    """Individualize-and-refine search for a colour-preserving bijection graph 1 -> graph 2.

    Vertices 0..n-1 form graph 1, n..2n-1 graph 2.  Returns the image array
    or None.  ``nodes`` bounds the number of search nodes.
    """
    budget = [nodes]

    def rec(col):
        budget[0] -= 1
        if budget[0] < 0:
            raise ResourceLimitError("isomorphism search exceeded its node budget")
        col = _refine(adj, col)
        c1 = np.bincount(col[:n], minlength=col.max() + 1)
        c2 = np.bincount(col[n:], minlength=col.max() + 1)
        if not np.array_equal(c1, c2):
            return None
        if c1.max() == 1:
            img = np.empty(n, dtype=np.int64)
            pos2 = np.empty(col.max() + 1, dtype=np.int64)
            pos2[col[n:]] = np.arange(n)
            img[:] = pos2[col[:n]]
            return img
        cell = int(np.flatnonzero(c1 > 1)[np.argmin(c1[c1 > 1])])
        v = int(np.flatnonzero(col[:n] == cell)[0])
        fresh = int(col.max()) + 1
        for w in np.flatnonzero(col[n:] == cell):
            nxt = col.copy()
            nxt[v] = fresh
            nxt[n + w] = fresh
            out = rec(nxt)
            if out is not None:
                return out
        return None

    return rec(colours)


def isomorphic_rank2(g1: Pregeometry, g2: Pregeometry, max_search: int = 100_000) -> bool:
    """Exact type-preserving isomorphism of two rank-2 pregeometries.

    Colour refinement with individualization; a candidate bijection is only
    accepted after every incidence has been checked.
    """
    if g1.rank != 2 or g2.rank != 2:
        raise ParameterError("rank-2 inputs required")
    if [g1.sizes[t] for t in g1.types] != [g2.sizes[t] for t in g2.types]:
        return False
    if degree_sequences(g1) != degree_sequences(g2):
        return False
    a1, r1, n1, n2 = _rank2_adjacency(g1)
    a2, r2, _, _ = _rank2_adjacency(g2)
    n = n1 + n2
    adj = sparse.block_diag([a1, a2], format="csr")
    side = np.r_[np.zeros(n1, dtype=np.int64), np.ones(n2, dtype=np.int64)]
    img = _find_isomorphism(adj, np.r_[side, side], n, max_search)
    if img is None:
        return False
    a, b = r1.edges()
    return bool(r2.contains(img[a], img[b + n1] - n1).all())


@dataclass
class DiagramEntry:
    pair: tuple
    complete_bipartite: bool
    connected: bool
    params: DiagramEdgeParams | None

    @property
    def is_edge(self) -> bool:
        return not self.complete_bipartite

    def to_json(self) -> dict:
        return {"pair": list(self.pair), "edge": self.is_edge,
                "complete_bipartite": self.complete_bipartite, "connected": self.connected,
                "params": self.params.to_json() if self.params else None}


def base_residue(geo: Pregeometry, pair: tuple) -> Pregeometry:
    att = _need_chamber(geo)
    K = att.chamber_flag()
    return residue(geo, [e for e in K if e[0] not in pair])


def basic_diagram(geo: Pregeometry, require_verified: bool = True, pairs=None) -> list[DiagramEntry]:
    """Residue of the base-chamber co-flag for every type pair.

    Under a flag-transitive group all residues of one type are conjugate, so
    one residue per pair decides the diagram.
    """
    att = _need_chamber(geo)
    if require_verified and att.flag_transitive is not True:
        raise HypothesisError("basic_diagram needs a group verified to be flag-transitive")
    out = []
    for pair in (pairs or itertools.combinations(geo.types, 2)):
        res = base_residue(geo, pair)
        complete = is_complete_bipartite(res)
        conn = is_connected(res)
        params = None
        if conn:
            # the flag stabilizer is transitive on each type of the residue
            src = None
            if att.flag_transitive:
                org = res.meta["origin"]
                src = tuple(int(np.searchsorted(org[t], att.chamber[t])) for t in res.types)
            params = rank2_params(res, sources=src)
        out.append(DiagramEntry(tuple(pair), complete, conn, params))
    return out


def diagram_edges(entries: Sequence[DiagramEntry]) -> set:
    return {frozenset(e.pair) for e in entries if e.is_edge}


# ---------------------------------------------------------------------------
# quotients
# ---------------------------------------------------------------------------

class QuotientError(GeoforgeError, ValueError):
    def __init__(self, msg, counterexample=None):
        super().__init__(msg)
        self.counterexample = counterexample


def quotient(geo: Pregeometry, partition: dict) -> Pregeometry:
    """Quotient by a per-type partition ``{type: [[indices], ...]}``.

    Types missing from ``partition`` keep singleton parts.  Parts are incident
    iff some members are.  An attached group must map parts to parts; the
    induced action is attached to the result.
    """
    part_of = {}
    parts = {}
    for t in partition:
        if t not in geo.sizes:
            raise QuotientError(f"partition mentions unknown type {t!r}")
    for t in geo.types:
        n = geo.sizes[t]
        plist = partition.get(t)
        if plist is None:
            plist = [[i] for i in range(n)]
        lab = np.full(n, -1, dtype=np.int64)
        clean = []
        for k, part in enumerate(plist):
            idx = []
            for i in part:
                # members may be plain indices or (type, index) references
                if isinstance(i, (tuple, list)):
                    if i[0] != t:
                        raise QuotientError(f"a part of type {t} contains ({i[0]},{int(i[1]) + 1}); "
                                            "parts may not mix types",
                                            {"part_type": t, "element": [i[0], int(i[1]) + 1]})
                    i = i[1]
                idx.append(int(i))
            part = sorted(idx)
            if not part:
                raise QuotientError(f"empty part in type {t}")
            for i in part:
                if not 0 <= i < n:
                    raise QuotientError(f"element {i + 1} is not of type {t}")
                if lab[i] >= 0:
                    raise QuotientError(f"element ({t},{i + 1}) lies in two parts")
                lab[i] = k
            clean.append(part)
        if (lab < 0).any():
            raise QuotientError(f"partition of type {t} misses element {int(np.flatnonzero(lab < 0)[0])}")
        part_of[t] = lab
        parts[t] = clean
    rels = {}
    for (s, t), rel in geo.relations.items():
        a, b = rel.edges()
        rels[(s, t)] = ExplicitRelation(len(parts[s]), len(parts[t]), part_of[s][a], part_of[t][b])
    labels = {}
    for t in geo.types:
        labels[t] = ListLabels([[geo.label((t, i)) for i in part] for part in parts[t]])
    att = None
    if geo.attached is not None:
        old = geo.attached
        actions = {}
        for t in geo.types:
            acts = []
            for k, g in enumerate(old.actions[t]):
                img = np.empty(len(parts[t]), dtype=IDX)
                for p, part in enumerate(parts[t]):
                    targets = np.unique(part_of[t][g[part]])
                    if targets.size != 1:
                        cyc = str(Permutation._wrap(g)) if old.is_uniform else f"generator {k + 1}"
                        raise QuotientError(
                            f"generator {k + 1} {cyc} splits part {p + 1} of type {t}",
                            {"generator": k + 1, "type": t, "part": [i + 1 for i in part],
                             "image_parts": sorted(int(x) + 1 for x in set(part_of[t][g[part]].tolist()))})
                    img[p] = targets[0]
                if np.unique(img).size != img.size:
                    raise QuotientError(f"generator {k + 1} is not a bijection on the parts of type {t}",
                                        {"generator": k + 1, "type": t})
                acts.append(img)
            actions[t] = acts
        chamber = {t: int(part_of[t][old.chamber[t]]) for t in old.chamber}
        att = Attachment(geo.types, actions, chamber)
    meta = {"quotient_of": geo.meta.get("name"), "parts": parts}
    return Pregeometry(geo.types, {t: len(parts[t]) for t in geo.types}, rels, labels, att, meta)


# ---------------------------------------------------------------------------
# model rank-2 geometries
# ---------------------------------------------------------------------------

def _coloured_subsets(size: int, m: int, delta: int):
    combos = list(itertools.combinations(range(m), size))
    colours = list(itertools.product(range(delta), repeat=size))
    return combos, colours


def model_geometry(kind: str, a: int, b: int, m: int, delta: int = 1) -> Pregeometry:
    """U_{a,b}(m, delta) (containment) or Ubar_{a,b}(m, delta) (disjointness).

    Type 1 elements are a-subsets of {1..m} with a colour from {1..delta} on
    each member, type 2 elements are b-subsets likewise.  For U one set lies in
    the other and colours agree on the smaller set; either of a, b may be the
    smaller.  For Ubar the underlying sets are disjoint.
    """
    kind = kind.lower()
    if delta < 1 or a < 1 or b < 1 or a > m or b > m:
        raise ParameterError("need 1 <= a, b <= m and delta >= 1")
    ca, cola = _coloured_subsets(a, m, delta)
    cb, colb = _coloured_subsets(b, m, delta)
    idx_a = {c: k for k, c in enumerate(ca)}
    idx_b = {c: k for k, c in enumerate(cb)}
    na, nb = len(ca) * len(cola), len(cb) * len(colb)
    ea, eb = [], []
    if kind == "u":
        if a == b:
            raise ParameterError("U_{a,b} needs a != b")
        small, big = (a, b) if a < b else (b, a)
        cs, cbig = (ca, cb) if a < b else (cb, ca)
        idx_s = idx_a if a < b else idx_b
        ncol_s = delta ** small
        for bi, bset in enumerate(cbig):
            for sub_pos in itertools.combinations(range(big), small):
                sset = tuple(bset[p] for p in sub_pos)
                si = idx_s[sset]
                for colk, col in enumerate(itertools.product(range(delta), repeat=big)):
                    scol = tuple(col[p] for p in sub_pos)
                    scolk = 0
                    for c in scol:
                        scolk = scolk * delta + c
                    big_el = bi * delta ** big + colk
                    small_el = si * ncol_s + scolk
                    if a < b:
                        ea.append(small_el)
                        eb.append(big_el)
                    else:
                        ea.append(big_el)
                        eb.append(small_el)
    elif kind in ("ubar", "ū"):
        if a + b > m:
            raise ParameterError("Ubar_{a,b}(m) needs a + b <= m")
        for ai, aset in enumerate(ca):
            rest = [x for x in range(m) if x not in aset]
            for bset in itertools.combinations(rest, b):
                bi = idx_b[bset]
                for ka in range(len(cola)):
                    base_b = bi * len(colb)
                    ea.extend([ai * len(cola) + ka] * len(colb))
                    eb.extend(range(base_b, base_b + len(colb)))
    else:
        raise ParameterError(f"unknown model kind {kind!r}")

    def labels(combos, cols):
        out = []
        for c in combos:
            for col in cols:
                out.append({"set": [x + 1 for x in c], "colours": [x + 1 for x in col]}
                           if delta > 1 else [x + 1 for x in c])
        return ListLabels(out)

    rel = ExplicitRelation(na, nb, np.array(ea, dtype=np.int64), np.array(eb, dtype=np.int64))
    name = f"{'U' if kind == 'u' else 'Ubar'}_{{{a},{b}}}({m},{delta})"
    return Pregeometry([1, 2], {1: na, 2: nb}, {(1, 2): rel},
                       {1: labels(ca, cola), 2: labels(cb, colb)}, meta={"name": name})


def model_params(kind: str, a: int, b: int, m: int, delta: int = 1) -> DiagramEdgeParams:
    return rank2_params(model_geometry(kind, a, b, m, delta))
