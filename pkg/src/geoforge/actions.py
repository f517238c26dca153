"""Concrete transitive actions with point codecs.

An :class:`ActionSpace` couples a :class:`PermGroup` with a codec that maps
point indices to structured labels and back:

* natural points ``0..m-1`` (displayed 1-based);
* tuples over a component's points, for wreath products in product action;
* elements of A_m or S_m, stored as 0-based image tuples, for the HS action.

Seeds for the constructions are produced by :func:`seed_points`.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from . import config
from .errors import ParameterError, ResourceLimitError
from .perm import IDX, Permutation, PermGroup, format_cycles


# ---------------------------------------------------------------------------
# codecs
# ---------------------------------------------------------------------------

class Natural:
    def __init__(self, m: int):
        self.m = m
        self.size = m

    def encode(self, label) -> int:
        x = int(label)
        if not 0 <= x < self.m:
            raise ValueError(f"point {x} outside 0..{self.m - 1}")
        return x

    def decode(self, p: int):
        return int(p)

    def to_json(self, label):
        return int(label) + 1

    def from_json(self, obj):
        return int(obj) - 1

    def format(self, label) -> str:
        return str(int(label) + 1)


class TupleOverDelta:
    """n-tuples over a component codec; the first coordinate is most significant."""

    def __init__(self, inner, n: int):
        self.inner = inner
        self.n = n
        self.d = inner.size
        self.size = self.d ** n
        self._weights = [self.d ** (n - 1 - k) for k in range(n)]

    def encode(self, label) -> int:
        if len(label) != self.n:
            raise ValueError("tuple of the wrong length")
        return sum(self.inner.encode(x) * w for x, w in zip(label, self._weights))

    def decode(self, p: int) -> tuple:
        out = []
        for w in self._weights:
            q, p = divmod(p, w)
            out.append(self.inner.decode(q))
        return tuple(out)

    def digits(self, points: np.ndarray) -> np.ndarray:
        """Coordinate indices (component point numbers) of many points at once."""
        points = np.asarray(points, dtype=np.int64)
        out = np.empty((points.size, self.n), dtype=np.int64)
        rest = points.copy()
        for k, w in enumerate(self._weights):
            out[:, k], rest = np.divmod(rest, w)
        return out

    def to_json(self, label):
        return [self.inner.to_json(x) for x in label]

    def from_json(self, obj):
        return tuple(self.inner.from_json(x) for x in obj)

    def format(self, label) -> str:
        return "(" + ",".join(self.inner.format(x) for x in label) + ")"


def _lex_rank(perm: Sequence[int]) -> int:
    m = len(perm)
    rank = 0
    rest = list(range(m))
    for k, x in enumerate(perm):
        pos = rest.index(x)
        rank += pos * math.factorial(m - 1 - k)
        rest.pop(pos)
    return rank


def _lex_unrank(rank: int, m: int) -> tuple[int, ...]:
    rest = list(range(m))
    out = []
    for k in range(m):
        f = math.factorial(m - 1 - k)
        pos, rank = divmod(rank, f)
        out.append(rest.pop(pos))
    return tuple(out)


def _parity(perm: Sequence[int]) -> int:
    seen = [False] * len(perm)
    par = 0
    for s in range(len(perm)):
        if seen[s]:
            continue
        x, length = s, 0
        while not seen[x]:
            seen[x] = True
            x = perm[x]
            length += 1
        par ^= (length - 1) & 1
    return par


class GroupElementOf:
    """Elements of S_m or A_m in lexicographic order of their image tables.

    Consecutive lexicographic ranks 2k, 2k+1 differ by a transposition of the
    last two entries, so exactly one of them is even; the A_m index is rank // 2.
    """

    def __init__(self, kind: str, m: int):
        if kind not in ("sym", "alt"):
            raise ValueError(kind)
        self.kind = kind
        self.m = m
        self.size = math.factorial(m) // (2 if kind == "alt" else 1)

    @property
    def descriptor(self) -> str:
        return ("A_" if self.kind == "alt" else "S_") + str(self.m)

    def encode(self, label) -> int:
        label = tuple(int(x) for x in label)
        r = _lex_rank(label)
        if self.kind == "sym":
            return r
        if _parity(label):
            raise ValueError("odd permutation is not in A_m")
        return r // 2

    def decode(self, p: int) -> tuple[int, ...]:
        if self.kind == "sym":
            return _lex_unrank(p, self.m)
        t = _lex_unrank(2 * p, self.m)
        if _parity(t):
            t = _lex_unrank(2 * p + 1, self.m)
        return t

    def all_elements(self) -> np.ndarray:
        """Image tables of all elements, row p is the element with index p."""
        rows = [t for t in itertools.permutations(range(self.m))]
        arr = np.array(rows, dtype=np.int64)
        if self.kind == "alt":
            par = np.array([_parity(t) for t in rows])
            arr = arr[par == 0]
        return arr

    def encode_many(self, rows: np.ndarray) -> np.ndarray:
        rows = np.asarray(rows, dtype=np.int64)
        m = self.m
        rank = np.zeros(rows.shape[0], dtype=np.int64)
        for k in range(m):
            smaller_later = (rows[:, k + 1:] < rows[:, k:k + 1]).sum(axis=1)
            rank += smaller_later * math.factorial(m - 1 - k)
        return rank // 2 if self.kind == "alt" else rank

    def to_json(self, label):
        return format_cycles(Permutation(label).cycles())

    def from_json(self, obj):
        return tuple(Permutation.parse(obj, self.m).images.tolist())

    def format(self, label) -> str:
        return self.to_json(label)


# ---------------------------------------------------------------------------
# ActionSpace
# ---------------------------------------------------------------------------

@dataclass
class ActionSpace:
    group: PermGroup
    codec: Any
    descriptor: dict
    extras: dict = field(default_factory=dict)

    @property
    def degree(self) -> int:
        return self.group.degree

    def encode(self, label) -> int:
        return self.codec.encode(label)

    def decode(self, p: int):
        return self.codec.decode(p)

    def label_json(self, p: int):
        return self.codec.to_json(self.codec.decode(p))

    def format(self, p: int) -> str:
        return self.codec.format(self.codec.decode(p))


def _check_degree(deg: int):
    cap = config.degree_cap()
    if deg > cap:
        raise ResourceLimitError(
            f"action degree {deg} exceeds the degree cap {cap} (set GEOFORGE_DEGREE_CAP to raise it)")


def natural_group(kind: str, m: int) -> ActionSpace:
    """S_m or A_m on m points, from the standard two generators."""
    if kind == "sym":
        if m < 2:
            raise ParameterError("S_m needs m >= 2")
        gens = [Permutation.from_cycles([list(range(m))], m),
                Permutation.from_cycles([[0, 1]], m)]
        if m == 2:
            gens = gens[1:]
        order = math.factorial(m)
    elif kind == "alt":
        if m < 3:
            raise ParameterError("A_m needs m >= 3")
        three = Permutation.from_cycles([[0, 1, 2]], m)
        if m == 3:
            gens = [three]
        elif m % 2:
            gens = [three, Permutation.from_cycles([list(range(m))], m)]
        else:
            gens = [three, Permutation.from_cycles([list(range(1, m))], m)]
        order = math.factorial(m) // 2
    else:
        raise ParameterError(f"unknown natural group kind {kind!r}")
    _check_degree(m)
    grp = PermGroup(gens, m, known_order=order, name=f"{kind}({m})")
    return ActionSpace(grp, Natural(m), {"kind": kind, "m": m})


def _primitive_root(p: int) -> int:
    for w in range(2, p):
        if len({pow(w, k, p) for k in range(1, p)}) == p - 1:
            return w
    return 1


def affine_group(p: int) -> ActionSpace:
    """AGL(1,p) on the field of p elements: x -> x+1 and x -> w x."""
    if p < 3 or any(p % q == 0 for q in range(2, int(p ** 0.5) + 1)):
        raise ParameterError("AGL(1,p) needs an odd prime p")
    w = _primitive_root(p)
    shift = Permutation([(x + 1) % p for x in range(p)])
    scale = Permutation([(w * x) % p for x in range(p)])
    grp = PermGroup([shift, scale], p, known_order=p * (p - 1), name=f"AGL(1,{p})")
    # points are field elements; displayed 1-based like every other point
    return ActionSpace(grp, Natural(p), {"kind": "agl", "d": 1, "p": p})


def wreath_product_action(H: ActionSpace, n: int) -> ActionSpace:
    """H Wr S_n on Delta^n in product action.

    (d_1..d_n)^{(h_1..h_n)} = (d_1^{h_1}, ..., d_n^{h_n}); the top group moves
    the entry in coordinate k to coordinate k^pi.
    """
    if n < 2:
        raise ParameterError("wreath product needs n >= 2")
    d = H.degree
    deg = d ** n
    _check_degree(deg)
    if not H.group.is_transitive():
        raise ParameterError("the component must be transitive")
    codec = TupleOverDelta(H.codec, n)
    pts = np.arange(deg, dtype=np.int64)
    digits = codec.digits(pts)
    weights = np.array([d ** (n - 1 - k) for k in range(n)], dtype=np.int64)
    gens = []
    for h in H.group.gen_arrays:
        dig = digits.copy()
        dig[:, 0] = h[dig[:, 0]]
        gens.append(Permutation._wrap((dig @ weights).astype(IDX)))
    # top group: n-cycle k -> k+1, and the transposition of coordinates 1 and 2
    cyc = np.roll(digits, 1, axis=1)
    gens.append(Permutation._wrap((cyc @ weights).astype(IDX)))
    swp = digits.copy()
    swp[:, [0, 1]] = swp[:, [1, 0]]
    gens.append(Permutation._wrap((swp @ weights).astype(IDX)))
    order = H.group.order() ** n * math.factorial(n)
    grp = PermGroup(gens, deg, known_order=order, name=f"wreath({n})")
    desc = {"family": "wreath", "component": H.descriptor, "n": n}
    return ActionSpace(grp, codec, desc, {"component": H, "n": n})


def hs_action(m: int) -> tuple[ActionSpace, Permutation]:
    """T x T acting on T = A_m by t^(t1,t2) = t1^-1 t t2, and the inversion map."""
    if m < 5:
        raise ParameterError("the HS action needs m >= 5")
    codec = GroupElementOf("alt", m)
    _check_degree(codec.size)
    elems = codec.all_elements()
    tgens = [g.images.astype(np.int64) for g in natural_group("alt", m).group.generators]
    gens = []
    for g in tgens:
        ginv = np.argsort(g)
        # t -> g^-1 t : apply g^-1 first, then t; image table row is t[ginv]
        gens.append(Permutation._wrap(codec.encode_many(elems[:, ginv]).astype(IDX)))
    for g in tgens:
        # t -> t g : image table g[t]
        gens.append(Permutation._wrap(codec.encode_many(g[elems]).astype(IDX)))
    inv = np.argsort(elems, axis=1)
    sigma = Permutation._wrap(codec.encode_many(inv).astype(IDX))
    order = codec.size ** 2
    grp = PermGroup(gens, codec.size, known_order=order, name=f"HS({m})")
    space = ActionSpace(grp, codec, {"kind": "hs", "m": m}, {"sigma": sigma, "T": codec})
    return space, sigma


def component_from_descriptor(desc: dict) -> ActionSpace:
    kind = desc.get("kind")
    if kind in ("sym", "alt"):
        return natural_group(kind, int(desc["m"]))
    if kind == "agl":
        if int(desc.get("d", 1)) != 1:
            raise ParameterError("only AGL(1,p) components are provided")
        return affine_group(int(desc["p"]))
    if kind == "hs":
        return hs_action(int(desc["m"]))[0]
    if desc.get("family") == "wreath":
        return wreath_product_action(component_from_descriptor(desc["component"]), int(desc["n"]))
    raise ParameterError(f"unknown action descriptor {desc!r}")


def parse_component(text: str) -> ActionSpace:
    """CLI component syntax: ``sym:3``, ``alt:5``, ``agl:5``, ``hs:5``."""
    try:
        kind, arg = text.split(":")
        val = int(arg)
    except ValueError:
        raise ParameterError(f"component must look like sym:3, got {text!r}") from None
    if kind == "agl":
        return affine_group(val)
    return component_from_descriptor({"kind": kind, "m": val})


# ---------------------------------------------------------------------------
# seeds
# ---------------------------------------------------------------------------

def hs_seed(m: int, i: int) -> tuple[int, ...]:
    """(1,2)(3,4)...(4i-1,4i) as a 0-based image tuple."""
    img = list(range(m))
    for k in range(2 * i):
        a, b = 2 * k, 2 * k + 1
        img[a], img[b] = b, a
    return tuple(img)


def seed_points(family: str, **params) -> list:
    """The seed sequence of a family, as decoded (0-based) labels.

    AS: m, b -> [0, ..., b-1]
    PA: n, b, alpha, beta -> [x_1..x_b], x_c = (alpha x 2c, beta x (n-2c))
    HS: m, b -> [x_0..x_b]
    SD: n, b -> canonical cosets of (alpha x 2c, 1 x (n-2c)), see :mod:`diagonal`
    """
    family = family.upper()
    b = int(params["b"])
    if family == "AS":
        m = int(params["m"])
        if not 1 <= b <= m - 2:
            raise ParameterError(f"AS needs 1 <= b <= m-2 (m={m}, b={b})")
        return list(range(b))
    if family == "PA":
        n = int(params["n"])
        alpha, beta = params.get("alpha", 0), params.get("beta", 1)
        if not 1 <= b <= n // 2 - 1:
            raise ParameterError(f"PA needs 1 <= b <= floor(n/2)-1 (n={n}, b={b})")
        return [(alpha,) * (2 * c) + (beta,) * (n - 2 * c) for c in range(1, b + 1)]
    if family == "HS":
        m = int(params["m"])
        if not 0 <= b <= m // 4:
            raise ParameterError(f"HS needs 0 <= b <= floor(m/4) (m={m}, b={b})")
        return [hs_seed(m, i) for i in range(b + 1)]
    if family == "SD":
        from .diagonal import SdSystem
        n = int(params["n"])
        system = params.get("system") or SdSystem(n=n)
        if not 1 <= b <= (n - 1) // 4:
            raise ParameterError(f"SD needs 1 <= b <= floor((n-1)/4) (n={n}, b={b})")
        return [system.seed(c) for c in range(1, b + 1)]
    raise ParameterError(f"unknown family {family!r}")


def nongamma_count(x: Sequence, gamma, i: int, j: int) -> int:
    """Entries of x in coordinates i..j (1-based, inclusive) different from gamma."""
    if not 1 <= i <= j <= len(x):
        raise ValueError(f"invalid coordinate range [{i},{j}] for length {len(x)}")
    return sum(1 for v in x[i - 1:j] if v != gamma)
