"""Permutations, orbits and stabilizer chains.

Points are 0-based internally and 1-based in every text form.  Products act
left to right: ``(p * q)(x) == q(p(x))``, i.e. x^(pq) = (x^p)^q.

The chain builder is a deterministic Schreier-Sims.  When the order of the
group is known in advance (wreath products, HS actions, subgroups cut out of
an already completed chain) the builder sifts Schreier generators by tracking
only the base points and a fixed set of sentinel points, materializes full
permutations only for new strong generators, and stops once the product of
the basic orbit lengths reaches the known order.  Reaching that order
certifies completeness, because every strong generator lies in the group.
If it is never reached the build is redone with exact identity tests.
"""
from __future__ import annotations

import re
import threading
from array import array
from math import gcd
from typing import Iterable, Sequence

import numpy as np

from .errors import DegreeMismatch, GeoforgeError, HypothesisError

IDX = np.int32


# ---------------------------------------------------------------------------
# Permutation
# ---------------------------------------------------------------------------

class Permutation:
    """A permutation of {0, ..., degree-1} stored as an image table."""

    __slots__ = ("_img", "_hash")

    def __init__(self, images, check: bool = True):
        img = np.array(images, dtype=IDX)
        if img.ndim != 1 or img.size == 0:
            raise ValueError("a permutation needs a nonempty 1-d image table")
        if check:
            n = img.size
            if img.min() < 0 or img.max() >= n:
                raise ValueError("image out of range")
            seen = np.zeros(n, dtype=bool)
            seen[img] = True
            if not seen.all():
                raise ValueError("image table is not a bijection")
        img.setflags(write=False)
        self._img = img
        self._hash = None

    @classmethod
    def _wrap(cls, arr: np.ndarray) -> "Permutation":
        p = cls.__new__(cls)
        arr = np.asarray(arr, dtype=IDX)
        arr.setflags(write=False)
        p._img = arr
        p._hash = None
        return p

    @classmethod
    def identity(cls, degree: int) -> "Permutation":
        return cls._wrap(np.arange(degree, dtype=IDX))

    @classmethod
    def from_cycles(cls, cycles: Iterable[Sequence[int]], degree: int) -> "Permutation":
        """Build from 0-based cycles; cycles are applied in order, left to right."""
        img = np.arange(degree, dtype=IDX)
        for cyc in cycles:
            cyc = list(cyc)
            if len(cyc) < 2:
                continue
            if max(cyc) >= degree or min(cyc) < 0:
                raise ValueError(f"cycle {cyc} outside degree {degree}")
            if len(set(cyc)) != len(cyc):
                raise ValueError(f"repeated point in cycle {cyc}")
            step = np.arange(degree, dtype=IDX)
            for a, b in zip(cyc, cyc[1:] + cyc[:1]):
                step[a] = b
            img = step[img]
        return cls._wrap(img)

    @classmethod
    def parse(cls, text: str, degree: int | None = None) -> "Permutation":
        """Parse 1-based cycle notation such as ``"(1,2)(3,4)"``; ``"()"`` is the identity."""
        cycles = parse_cycles(text)
        top = max((max(c) for c in cycles if c), default=-1) + 1
        if degree is None:
            degree = max(top, 1)
        elif top > degree:
            raise ValueError(f"point {top} exceeds degree {degree}")
        return cls.from_cycles(cycles, degree)

    # -- basic protocol ----------------------------------------------------
    @property
    def degree(self) -> int:
        return int(self._img.size)

    @property
    def images(self) -> np.ndarray:
        return self._img

    def __call__(self, x: int) -> int:
        return int(self._img[x])

    def __mul__(self, other: "Permutation") -> "Permutation":
        return compose(self, other)

    def __pow__(self, k: int) -> "Permutation":
        if k < 0:
            return self.inverse() ** (-k)
        result = Permutation.identity(self.degree)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def inverse(self) -> "Permutation":
        inv = np.empty_like(self._img)
        inv[self._img] = np.arange(self.degree, dtype=IDX)
        return Permutation._wrap(inv)

    def __eq__(self, other):
        if not isinstance(other, Permutation):
            return NotImplemented
        return self.degree == other.degree and bool(np.array_equal(self._img, other._img))

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self._img.tobytes())
        return self._hash

    def is_identity(self) -> bool:
        return bool(np.array_equal(self._img, np.arange(self.degree, dtype=IDX)))

    def moved_points(self) -> np.ndarray:
        return np.flatnonzero(self._img != np.arange(self.degree, dtype=IDX))

    def cycles(self) -> list[tuple[int, ...]]:
        """Nontrivial cycles, 0-based, each starting at its smallest point."""
        img = self._img.tolist()
        seen = [False] * len(img)
        out = []
        for start in range(len(img)):
            if seen[start] or img[start] == start:
                seen[start] = True
                continue
            cyc = [start]
            seen[start] = True
            x = img[start]
            while x != start:
                cyc.append(x)
                seen[x] = True
                x = img[x]
            out.append(tuple(cyc))
        return out

    def order(self) -> int:
        o = 1
        for c in self.cycles():
            o = o * len(c) // gcd(o, len(c))
        return o

    def __str__(self):
        return format_cycles(self.cycles())

    def __repr__(self):
        return f"Permutation({self}, degree={self.degree})"


def compose(p: Permutation, q: Permutation) -> Permutation:
    """The product pq: first p, then q."""
    if p.degree != q.degree:
        raise DegreeMismatch(f"degrees differ: {p.degree} vs {q.degree}")
    return Permutation._wrap(q._img[p._img])


def inverse(p: Permutation) -> Permutation:
    return p.inverse()


_CYCLE_RE = re.compile(r"\(([^()]*)\)")


def parse_cycles(text: str) -> list[list[int]]:
    """Parse 1-based cycle text into 0-based cycles."""
    text = text.strip()
    if text in ("", "()", "1", "id"):
        return []
    rest = _CYCLE_RE.sub("", text).strip()
    if rest:
        raise ValueError(f"cannot parse permutation {text!r}")
    cycles = []
    for body in _CYCLE_RE.findall(text):
        parts = [s for s in re.split(r"[,\s]+", body.strip()) if s]
        if not parts:
            continue
        pts = [int(s) - 1 for s in parts]
        if min(pts) < 0:
            raise ValueError(f"points are 1-based in {text!r}")
        cycles.append(pts)
    return cycles


def format_cycles(cycles) -> str:
    if not cycles:
        return "()"
    return "".join("(" + ",".join(str(x + 1) for x in c) + ")" for c in cycles)


# ---------------------------------------------------------------------------
# Orbits
# ---------------------------------------------------------------------------

class Orbit:
    """An orbit together with the Schreier tree that produced it.

    ``members`` is in breadth-first discovery order.  For every member the
    tree stores its parent position and the generator that reached it, so a
    witness element mapping the seed to the member can be rebuilt.
    """

    def __init__(self, gens: list[np.ndarray], kind: str, members: list,
                 parent: list[int], via: list[int]):
        self._gens = gens
        self.kind = kind
        self.members = members
        self.parent = parent
        self.via = via
        self._index = None

    @property
    def seed(self):
        return self.members[0]

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    @property
    def index(self) -> dict:
        if self._index is None:
            self._index = {m: k for k, m in enumerate(self.members)}
        return self._index

    def __contains__(self, item):
        return _canon(item, self.kind) in self.index

    def word(self, member) -> list[int]:
        """Generator indices, applied left to right, taking the seed to member."""
        k = self.index[_canon(member, self.kind)]
        word = []
        while k != 0:
            word.append(self.via[k])
            k = self.parent[k]
        word.reverse()
        return word

    def witness(self, member) -> Permutation:
        deg = self._gens[0].size
        arr = np.arange(deg, dtype=IDX)
        for g in self.word(member):
            arr = self._gens[g][arr]
        return Permutation._wrap(arr)

    def point_array(self) -> np.ndarray:
        if self.kind != "point":
            raise TypeError("not a point orbit")
        return np.asarray(self.members, dtype=IDX)


def _canon(item, kind):
    if kind == "point":
        return int(item)
    if kind == "tuple":
        return tuple(int(x) for x in item)
    return tuple(sorted(int(x) for x in item))


def _point_orbit(gens: list[np.ndarray], degree: int, seed: int) -> Orbit:
    # layered BFS, vectorized per generator; order: layer, generator, frontier position
    seen = np.zeros(degree, dtype=bool)
    seen[seed] = True
    members = [np.array([seed], dtype=IDX)]
    parents = [np.array([-1], dtype=np.int64)]
    vias = [np.array([-1], dtype=np.int64)]
    frontier = members[0]
    front_pos = np.array([0], dtype=np.int64)
    total = 1
    while frontier.size:
        new_pts, new_par, new_via = [], [], []
        for k, g in enumerate(gens):
            img = g[frontier]
            mask = ~seen[img]
            if not mask.any():
                continue
            cand = img[mask]
            par = front_pos[mask]
            _, first = np.unique(cand, return_index=True)
            first.sort()
            cand = cand[first]
            seen[cand] = True
            new_pts.append(cand)
            new_par.append(par[first])
            new_via.append(np.full(cand.size, k, dtype=np.int64))
        if not new_pts:
            break
        frontier = np.concatenate(new_pts)
        members.append(frontier)
        parents.append(np.concatenate(new_par))
        vias.append(np.concatenate(new_via))
        front_pos = np.arange(total, total + frontier.size, dtype=np.int64)
        total += frontier.size
    return Orbit(gens, "point", np.concatenate(members).tolist(),
                 np.concatenate(parents).tolist(), np.concatenate(vias).tolist())


def _seq_orbit(gens: list[np.ndarray], seed, kind: str) -> Orbit:
    glists = [g.tolist() for g in gens]
    start = _canon(seed, kind)
    members = [start]
    index = {start: 0}
    parent, via = [-1], [-1]
    head = 0
    while head < len(members):
        cur = members[head]
        for k, gl in enumerate(glists):
            if kind == "tuple":
                img = tuple(gl[x] for x in cur)
            else:
                img = tuple(sorted(gl[x] for x in cur))
            if img not in index:
                index[img] = len(members)
                members.append(img)
                parent.append(head)
                via.append(k)
        head += 1
    orb = Orbit(gens, kind, members, parent, via)
    orb._index = index
    return orb


# ---------------------------------------------------------------------------
# Stabilizer chains
# ---------------------------------------------------------------------------

class _Level:
    __slots__ = ("point", "gens", "orbit", "sv", "checked")

    def __init__(self, point: int):
        self.point = point
        self.gens: list[int] = []
        self.orbit: list[int] = [point]
        self.sv: dict[int, int] = {point: -1}
        self.checked: dict[int, int] = {}


class _Strong:
    """Shared table of strong generators: arrays for bulk work, arrays of ints for tracing."""

    def __init__(self, degree: int):
        self.degree = degree
        self.fwd: list[np.ndarray] = []
        self.inv: list[np.ndarray] = []
        self.fwd_l: list[array] = []
        self.inv_l: list[array] = []

    def add(self, arr: np.ndarray) -> int:
        arr = np.ascontiguousarray(arr, dtype=IDX)
        inv = np.empty_like(arr)
        inv[arr] = np.arange(arr.size, dtype=IDX)
        self.fwd.append(arr)
        self.inv.append(inv)
        self.fwd_l.append(array("i", arr.tobytes()))
        self.inv_l.append(array("i", inv.tobytes()))
        return len(self.fwd) - 1


class StabilizerChain:
    """Base, strong generators and Schreier trees of a permutation group.

    Level ``l`` stores its base point, the ids of the strong generators that
    fix the earlier base points, the basic orbit in discovery order and a
    Schreier vector (point -> id of the generator that first reached it).
    """

    def __init__(self, degree: int, strong: _Strong, levels: list[_Level]):
        self.degree = degree
        self._strong = strong
        self.levels = levels

    @property
    def base(self) -> tuple[int, ...]:
        return tuple(lv.point for lv in self.levels)

    def orbit_sizes(self) -> list[int]:
        return [len(lv.orbit) for lv in self.levels]

    def order(self) -> int:
        o = 1
        for lv in self.levels:
            o *= len(lv.orbit)
        return o

    def strong_generators(self, level: int = 0) -> list[Permutation]:
        if level >= len(self.levels):
            return []
        return [Permutation._wrap(self._strong.fwd[g]) for g in self.levels[level].gens]

    def tail(self, level: int) -> "StabilizerChain":
        return StabilizerChain(self.degree, self._strong, self.levels[level:])

    # -- transversals ------------------------------------------------------
    def _path(self, lv: _Level, p: int) -> list[int]:
        inv_l = self._strong.inv_l
        sv = lv.sv
        path = []
        c = p
        while c != lv.point:
            g = sv[c]
            path.append(g)
            c = inv_l[g][c]
        path.reverse()
        return path

    def transversal(self, level: int, p: int) -> Permutation:
        """The element u_p of the level's transversal, mapping its base point to p."""
        lv = self.levels[level]
        if p not in lv.sv:
            raise KeyError(f"point {p} not in basic orbit {level}")
        arr = np.arange(self.degree, dtype=IDX)
        for g in self._path(lv, p):
            arr = self._strong.fwd[g][arr]
        return Permutation._wrap(arr)

    def _apply_uinv(self, lv: _Level, q: int, arr: np.ndarray) -> np.ndarray:
        inv, inv_l, sv = self._strong.inv, self._strong.inv_l, lv.sv
        c = q
        while c != lv.point:
            g = sv[c]
            arr = inv[g][arr]
            c = inv_l[g][c]
        return arr

    def sift(self, g: Permutation) -> tuple[Permutation, int]:
        """Strip g through the chain; returns the residue and the level reached."""
        if g.degree != self.degree:
            raise DegreeMismatch("degree mismatch in sift")
        arr = g.images
        for l, lv in enumerate(self.levels):
            x = int(arr[lv.point])
            if x == lv.point:
                continue
            if x not in lv.sv:
                return Permutation._wrap(arr), l
            arr = self._apply_uinv(lv, x, arr)
        return Permutation._wrap(arr), len(self.levels)

    def contains(self, g: Permutation) -> bool:
        res, level = self.sift(g)
        return level == len(self.levels) and res.is_identity()


def _sentinels(degree: int, count: int = 32) -> list[int]:
    if degree <= count:
        return list(range(degree))
    pts = {(k * 2654435761 + 12345) % degree for k in range(count)}
    return sorted(pts)


class _Builder:
    def __init__(self, degree: int, gens: list[np.ndarray], prefix: Sequence[int],
                 target: int | None, exact: bool):
        self.n = degree
        self.strong = _Strong(degree)
        self.target = target
        self.exact = exact
        ident = np.arange(degree, dtype=IDX)
        seen = set()
        for g in gens:
            if np.array_equal(g, ident):
                continue
            key = g.tobytes()
            if key in seen:
                continue
            seen.add(key)
            self.strong.add(g)
        self.levels: list[_Level] = []
        self.prefix = [int(p) for p in prefix]
        self.sentinels = np.array(_sentinels(degree), dtype=IDX)
        self.chain = StabilizerChain(degree, self.strong, self.levels)

    # -- helpers -----------------------------------------------------------
    def _fixes(self, gid: int, pts) -> bool:
        fl = self.strong.fwd_l[gid]
        return all(fl[p] == p for p in pts)

    def _smallest_moved(self, arr: np.ndarray, exclude=()) -> int:
        moved = np.flatnonzero(arr != np.arange(self.n, dtype=IDX))
        for p in moved.tolist():
            if p not in exclude:
                return p
        raise GeoforgeError("expected a nonidentity permutation")

    def _extend_orbit(self, lv: _Level, new_gid: int | None):
        fwd_l = self.strong.fwd_l
        sv, orbit = lv.sv, lv.orbit
        idx = 0
        if new_gid is not None:
            old = len(orbit)
            gl = fwd_l[new_gid]
            for k in range(old):
                q = gl[orbit[k]]
                if q not in sv:
                    sv[q] = new_gid
                    orbit.append(q)
            idx = old
        gls = [(g, fwd_l[g]) for g in lv.gens]
        while idx < len(orbit):
            p = orbit[idx]
            for g, gl in gls:
                q = gl[p]
                if q not in sv:
                    sv[q] = g
                    orbit.append(q)
            idx += 1

    def _order(self) -> int:
        o = 1
        for lv in self.levels:
            o *= len(lv.orbit)
        return o

    def _done(self) -> bool:
        return self.target is not None and self._order() == self.target

    # -- main loop ---------------------------------------------------------
    def run(self) -> StabilizerChain:
        S = self.strong
        base = list(self.prefix)
        if not base and S.fwd:
            base.append(min(self._smallest_moved(g) for g in S.fwd))
        for gid in range(len(S.fwd)):
            if self._fixes(gid, base):
                base.append(self._smallest_moved(S.fwd[gid], exclude=set(base)))
        for l, b in enumerate(base):
            lv = _Level(b)
            lv.gens = [g for g in range(len(S.fwd)) if self._fixes(g, base[:l])]
            self.levels.append(lv)
            self._extend_orbit(lv, None)
        if self.target is not None and self._order() > self.target:
            raise GeoforgeError("orbit product exceeds the stated group order")
        i = len(self.levels) - 1
        while i >= 0 and not self._done():
            j = self._process(i)
            i = i - 1 if j is None else j
        return self.chain

    def _process(self, i: int):
        lv = self.levels[i]
        fwd_l = self.strong.fwd_l
        for gid in list(lv.gens):
            gl = fwd_l[gid]
            k = lv.checked.get(gid, 0)
            sv = lv.sv
            orbit = lv.orbit
            while k < len(orbit):
                p = orbit[k]
                q = gl[p]
                if sv[q] != gid:
                    found = self._sift_schreier(i, p, gid, q)
                    if found is not None:
                        lv.checked[gid] = k + 1
                        return self._install(i, *found)
                k += 1
            lv.checked[gid] = k
        return None

    def _stage_apply(self, stages, arr):
        S = self.strong
        chain = self.chain
        for st in stages:
            if st[0] == "g":
                arr = S.fwd[st[1]][arr]
            elif st[0] == "u":
                lv = self.levels[st[1]]
                for g in chain._path(lv, st[2]):
                    arr = S.fwd[g][arr]
            else:
                arr = chain._apply_uinv(self.levels[st[1]], st[2], arr)
        return arr

    def _sift_schreier(self, i: int, p: int, gid: int, q: int):
        levels = self.levels
        L = len(levels)
        tracked = np.array([lv.point for lv in levels[i + 1:]], dtype=IDX)
        nb = tracked.size
        tracked = np.concatenate([tracked, self.sentinels])
        stages = [("u", i, p), ("g", gid), ("ui", i, q)]
        P = self._stage_apply(stages, tracked)
        for l in range(i + 1, L):
            lv = levels[l]
            x = int(P[l - i - 1])
            if x == lv.point:
                continue
            if x not in lv.sv:
                return stages, l, None
            P = self.chain._apply_uinv(lv, x, P)
            stages.append(("ui", l, x))
        if not np.array_equal(P[nb:], self.sentinels):
            return stages, L, None
        if self.exact:
            h = self._stage_apply(stages, np.arange(self.n, dtype=IDX))
            if not np.array_equal(h, np.arange(self.n, dtype=IDX)):
                return stages, L, h
        return None

    def _install(self, i: int, stages, j: int, h):
        if h is None:
            h = self._stage_apply(stages, np.arange(self.n, dtype=IDX))
        gid = self.strong.add(h)
        L = len(self.levels)
        if j == L:
            b = self._smallest_moved(h)
            lv = _Level(b)
            self.levels.append(lv)
        for l in range(i + 1, j + 1):
            lv = self.levels[l]
            lv.gens.append(gid)
            self._extend_orbit(lv, gid)
        if self.target is not None and self._order() > self.target:
            raise GeoforgeError("orbit product exceeds the stated group order")
        return j


def build_chain(gens: Sequence[np.ndarray], degree: int, prefix: Sequence[int] = (),
                order: int | None = None, order_is_bound: bool = False) -> StabilizerChain:
    """Deterministic Schreier-Sims.

    ``order`` is either the exact group order (trusted, used to stop early)
    or, with ``order_is_bound``, the order of an overgroup: reaching it
    proves equality, falling short triggers an exact run.
    """
    gens = [np.asarray(g, dtype=IDX) for g in gens]
    if order is not None:
        chain = _Builder(degree, gens, prefix, order, exact=False).run()
        if chain.order() == order:
            return chain
    chain = _Builder(degree, gens, prefix, None if order_is_bound else order, exact=True).run()
    if order is not None and not order_is_bound and chain.order() != order:
        raise GeoforgeError(f"group order {chain.order()} differs from the stated order {order}")
    return chain


# ---------------------------------------------------------------------------
# Groups
# ---------------------------------------------------------------------------

class PermGroup:
    """A permutation group given by generators, with a lazily built chain.

    ``known_order`` may be supplied when the order is known structurally;
    it is used to stop the Schreier-Sims loop early and is cross-checked.
    """

    def __init__(self, generators: Sequence[Permutation], degree: int | None = None, *,
                 known_order: int | None = None, name: str | None = None,
                 _chain: StabilizerChain | None = None):
        gens = list(generators)
        if degree is None:
            if not gens:
                raise ValueError("need generators or a degree")
            degree = gens[0].degree
        if not gens:
            gens = [Permutation.identity(degree)]
        for g in gens:
            if g.degree != degree:
                raise DegreeMismatch(f"generator of degree {g.degree} in a group of degree {degree}")
        self.degree = degree
        self.generators: tuple[Permutation, ...] = tuple(gens)
        self.known_order = known_order
        self.name = name
        self._chain = _chain
        self._lock = threading.RLock()
        self._prefix_chains: dict[tuple, StabilizerChain] = {}
        self._stabs: dict[tuple, PermGroup] = {}
        self._gen_arrays = [g.images for g in self.generators]

    def __repr__(self):
        label = self.name or "PermGroup"
        return f"<{label} degree={self.degree} ngens={len(self.generators)}>"

    @property
    def gen_arrays(self) -> list[np.ndarray]:
        return self._gen_arrays

    # -- chain -------------------------------------------------------------
    @property
    def chain(self) -> StabilizerChain:
        if self._chain is None:
            with self._lock:
                if self._chain is None:
                    self._chain = build_chain(self._gen_arrays, self.degree, (), self.known_order)
        return self._chain

    def order(self) -> int:
        return self.chain.order()

    def contains(self, g: Permutation) -> bool:
        return self.chain.contains(g)

    def chain_with_prefix(self, prefix: Sequence[int]) -> StabilizerChain:
        """A chain whose base starts with ``prefix`` (re-based from the generators)."""
        prefix = tuple(int(p) for p in prefix)
        base = self.chain.base
        if base[:len(prefix)] == prefix:
            return self.chain
        with self._lock:
            hit = self._prefix_chains.get(prefix)
            if hit is None:
                for key, ch in self._prefix_chains.items():
                    if key[:len(prefix)] == prefix:
                        hit = ch
                        break
            if hit is None:
                hit = build_chain(self._gen_arrays, self.degree, prefix, self.order())
                self._prefix_chains[prefix] = hit
        return hit

    def stabilizer(self, points: Sequence[int]) -> "PermGroup":
        """Pointwise stabilizer of the listed points."""
        pts = []
        for p in points:
            p = int(p)
            if not 0 <= p < self.degree:
                raise ValueError(f"point {p} outside degree {self.degree}")
            if p not in pts:
                pts.append(p)
        if not pts:
            return self
        key = tuple(pts)
        with self._lock:
            hit = self._stabs.get(key)
        if hit is not None:
            return hit
        chain = self.chain_with_prefix(key)
        sub = chain.tail(len(key))
        gens = sub.strong_generators(0)
        grp = PermGroup(gens, self.degree, known_order=sub.order(), _chain=sub)
        with self._lock:
            self._stabs[key] = grp
        return grp

    # -- orbits ------------------------------------------------------------
    def orbit(self, seed) -> Orbit:
        if isinstance(seed, (int, np.integer)):
            if not 0 <= int(seed) < self.degree:
                raise ValueError("seed outside degree")
            return _point_orbit(self._gen_arrays, self.degree, int(seed))
        if isinstance(seed, (set, frozenset)):
            kind = "set"
        else:
            kind = "tuple"
        pts = [int(x) for x in seed]
        if any(not 0 <= x < self.degree for x in pts):
            raise ValueError("seed outside degree")
        return _seq_orbit(self._gen_arrays, pts, kind)

    def orbits(self) -> list[list[int]]:
        seen = np.zeros(self.degree, dtype=bool)
        out = []
        for p in range(self.degree):
            if not seen[p]:
                orb = self.orbit(p).members
                seen[orb] = True
                out.append(sorted(orb))
        return out

    def is_transitive(self) -> bool:
        return len(self.orbit(0)) == self.degree

    # -- blocks ------------------------------------------------------------
    def minimal_block(self, a: int, b: int) -> list[int]:
        """Smallest block containing a and b (Atkinson's merge closure)."""
        n = self.degree
        parent = list(range(n))
        size = [1] * n

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        def union(x, y):
            x, y = find(x), find(y)
            if x == y:
                return None
            if size[x] < size[y]:
                x, y = y, x
            parent[y] = x
            size[x] += size[y]
            return x, y

        gl = [g.tolist() for g in self._gen_arrays]
        queue = []
        if union(a, b):
            queue.append((a, b))
        while queue:
            x, y = queue.pop()
            for g in gl:
                u, v = find(g[x]), find(g[y])
                if u != v:
                    union(u, v)
                    queue.append((u, v))
        r = find(a)
        return [p for p in range(n) if find(p) == r]

    def is_primitive(self) -> bool:
        return self.block_witness() is None

    def block_witness(self):
        """None if primitive, else a nontrivial block."""
        if not self.is_transitive():
            raise HypothesisError("primitivity is only defined for transitive groups")
        n = self.degree
        if n <= 2:
            return None
        p0 = self.chain.base[0] if self.chain.levels else 0
        stab = self.stabilizer([p0])
        seen = np.zeros(n, dtype=bool)
        seen[p0] = True
        for x in range(n):
            if seen[x]:
                continue
            seen[stab.orbit(x).members] = True
            block = self.minimal_block(p0, x)
            if len(block) < n:
                return block
        return None

    # -- small-group utilities ----------------------------------------------
    def elements(self, limit: int = 10_000) -> list[Permutation]:
        """All elements by closure (oracle for tiny groups)."""
        ident = Permutation.identity(self.degree)
        seen = {ident}
        queue = [ident]
        while queue:
            cur = queue.pop()
            for g in self.generators:
                h = cur * g
                if h not in seen:
                    seen.add(h)
                    if len(seen) > limit:
                        raise GeoforgeError("element enumeration limit exceeded")
                    queue.append(h)
        return sorted(seen, key=lambda p: p.images.tolist())

    def random_word(self, rng, length: int = 20) -> Permutation:
        arr = np.arange(self.degree, dtype=IDX)
        for _ in range(length):
            g = self._gen_arrays[int(rng.integers(len(self._gen_arrays)))]
            arr = g[arr]
        return Permutation._wrap(arr)


def orbit(G: PermGroup, seed) -> Orbit:
    return G.orbit(seed)


def stabilizer(G: PermGroup, pts: Sequence[int]) -> PermGroup:
    return G.stabilizer(pts)


def is_transitive(G: PermGroup) -> bool:
    return G.is_transitive()


def is_primitive(G: PermGroup) -> bool:
    return G.is_primitive()


def generates_whole(G: PermGroup, subgens_a: Sequence[Permutation],
                    subgens_b: Sequence[Permutation]) -> bool:
    """True iff the listed elements of G generate all of G."""
    gens = [g for g in list(subgens_a) + list(subgens_b) if not g.is_identity()]
    for g in gens:
        if g.degree != G.degree:
            raise DegreeMismatch("subgroup generators of the wrong degree")
    if not gens:
        return G.order() == 1
    if any(not G.contains(g) for g in gens):
        raise HypothesisError("generators do not lie in G")
    target = G.order()
    chain = build_chain([g.images for g in gens], G.degree, (), target, order_is_bound=True)
    return chain.order() == target
