"""Symbolic arithmetic on cosets of the straight diagonal D = {(t,...,t)} in T^n.

Group elements of T are 0-based image tuples and multiply left to right:
``mul(s, t)`` is "s, then t".  A coset D(t_1,...,t_n) is stored in canonical
form, the representative whose first entry is the identity.  No permutation
representation of the action on cosets is ever built; its degree would be
|T|^(n-1).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .actions import GroupElementOf
from .errors import ParameterError

Elem = tuple


def mul(s: Elem, t: Elem) -> Elem:
    return tuple(t[x] for x in s)


def inv(t: Elem) -> Elem:
    out = [0] * len(t)
    for i, x in enumerate(t):
        out[x] = i
    return tuple(out)


def conj(a: Elem, t: Elem) -> Elem:
    """a^t = t^-1 a t."""
    return mul(mul(inv(t), a), t)


@dataclass(frozen=True)
class SdCoset:
    entries: tuple

    def __post_init__(self):
        first = self.entries[0]
        if any(first[k] != k for k in range(len(first))):
            raise ValueError("SdCoset entries must be in canonical form")


class SdSystem:
    """T = A_m (default A_5), n coordinates, alpha = (1,2)(3,4)."""

    def __init__(self, n: int, m: int = 5, kind: str = "alt"):
        if n < 2:
            raise ParameterError("need n >= 2")
        self.n = n
        self.m = m
        self.T = GroupElementOf(kind, m)
        self.one = tuple(range(m))
        a = list(range(m))
        a[0], a[1], a[2], a[3] = 1, 0, 3, 2
        self.alpha = tuple(a)
        self._elements = None

    @property
    def descriptor(self) -> str:
        return self.T.descriptor

    @property
    def elements(self) -> list[Elem]:
        if self._elements is None:
            self._elements = [tuple(r) for r in self.T.all_elements().tolist()]
        return self._elements

    # -- cosets --------------------------------------------------------------
    def canonicalize(self, raw: Sequence[Elem]) -> SdCoset:
        if len(raw) != self.n:
            raise ValueError(f"expected {self.n} entries")
        t = inv(tuple(raw[0]))
        return SdCoset(tuple(mul(t, tuple(x)) for x in raw))

    def support(self, tup: Sequence[Elem]) -> int:
        return sum(1 for x in tup if tuple(x) != self.one)

    def small_support_rep(self, coset: SdCoset):
        """The diagonal translate with support < n/2, or None.

        Every translate (t t_1, ..., t t_n) is scanned; more than one hit would
        contradict uniqueness, so that case raises.
        """
        hits = self.small_support_translates(coset)
        if len(hits) > 1:
            raise AssertionError(f"several small-support representatives for {coset}")
        return hits[0] if hits else None

    def small_support_translates(self, coset: SdCoset) -> list[tuple]:
        hits = []
        for t in self.elements:
            cand = tuple(mul(t, x) for x in coset.entries)
            if 2 * self.support(cand) < self.n:
                hits.append(cand)
        return hits

    def seed_tuple(self, c: int) -> tuple:
        return (self.alpha,) * (2 * c) + (self.one,) * (self.n - 2 * c)

    def seed(self, c: int) -> SdCoset:
        return self.canonicalize(self.seed_tuple(c))

    def h(self, s: int) -> tuple:
        """h_s = (alpha x 2s, 1 x (n-2s)) in T^n."""
        return self.seed_tuple(s)

    # -- group action on representatives -------------------------------------
    @staticmethod
    def right_mul(tup, g) -> tuple:
        return tuple(mul(x, y) for x, y in zip(tup, g))

    @staticmethod
    def permute(tup, sigma: Sequence[int]) -> tuple:
        """Coordinate k moves to coordinate sigma[k]."""
        out = [None] * len(tup)
        for k, x in enumerate(tup):
            out[sigma[k]] = x
        return tuple(out)

    def image_of_seed(self, a: int, s: int, t: Elem, sigma: Sequence[int]) -> tuple:
        """A representative of x_a^(h_s^-1 tbar sigma h_s), computed step by step."""
        r = self.seed_tuple(a)
        hs = self.h(s)
        r = self.right_mul(r, [inv(x) for x in hs])
        r = self.right_mul(r, [t] * self.n)
        r = self.permute(r, sigma)
        return self.right_mul(r, hs)

    def rep(self, s: int, a: int, t: Elem, sigma: Sequence[int]) -> tuple:
        """Closed form for Rep(x_a^(h_s^-1 tbar sigma h_s)).

        (1 x 2s, alpha^t x (2a-2s), 1 x (n-2a)), permuted by sigma, then the
        first 2s entries multiplied on the right by alpha.
        """
        n = self.n
        if not 1 <= s < a <= (n - 1) // 4:
            raise ParameterError(f"need 1 <= s < a <= floor((n-1)/4), got s={s}, a={a}, n={n}")
        at = conj(self.alpha, t)
        v = (self.one,) * (2 * s) + (at,) * (2 * a - 2 * s) + (self.one,) * (n - 2 * a)
        w = list(self.permute(v, sigma))
        for k in range(2 * s):
            w[k] = mul(w[k], self.alpha)
        return tuple(w)


def sd_canonicalize(raw: Sequence[Elem], system: SdSystem | None = None) -> SdCoset:
    system = system or SdSystem(n=len(raw), m=len(raw[0]))
    return system.canonicalize(raw)


def sd_small_support_rep(coset: SdCoset, system: SdSystem | None = None):
    system = system or SdSystem(n=len(coset.entries), m=len(coset.entries[0]))
    return system.small_support_rep(coset)


def sd_apply(system: SdSystem, s: int, t: Elem, sigma: Sequence[int], a: int) -> tuple:
    """Rep(x_a^(h_s^-1 tbar sigma h_s)), checked against the directly computed image coset."""
    rep = system.rep(s, a, t, sigma)
    direct = system.image_of_seed(a, s, t, sigma)
    if system.canonicalize(rep) != system.canonicalize(direct):
        raise AssertionError("closed-form representative is not in the image coset")
    return rep


def random_sigma(rng: np.random.Generator, n: int) -> list[int]:
    return rng.permutation(n).tolist()
