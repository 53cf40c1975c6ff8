"""Prefix-suffix calculus along a simple alternating ray.

The ray walks a_i, a_i a_j, a_i a_j a_i, ... for two non-adjacent letters.
Every shortlex word splits uniquely into an alternating prefix over the two
ray letters and a suffix that cannot be rearranged to begin with either;
the Busemann value is read off that decomposition.
"""
from __future__ import annotations

from dataclasses import dataclass

from .graphdef import DefiningGraph
from .words import Word, WordError, is_shortlex, normalize, pretty


@dataclass(frozen=True)
class Ray:
    """The geodesic ray (a_i a_j)^infinity, given by its two letters."""

    i: int
    j: int

    def validate(self, g: DefiningGraph) -> "Ray":
        if self.i == self.j:
            raise WordError("ray letters must differ")
        if not (0 <= self.i < g.size and 0 <= self.j < g.size):
            raise WordError("ray letter out of range")
        if g.adjacent(self.i, self.j):
            raise WordError(
                f"ray letters {g.names[self.i]},{g.names[self.j]} commute; the ray would not be geodesic"
            )
        return self

    def point(self, n: int) -> Word:
        """The group element gamma(n), as an alternating word of length n."""
        return tuple(self.i if t % 2 == 0 else self.j for t in range(n))

    def alternating(self, first: int, length: int) -> Word:
        other = self.j if first == self.i else self.i
        return tuple(first if t % 2 == 0 else other for t in range(length))


SIGN_POSITIVE = 1
SIGN_NEGATIVE = -1
SIGN_EMPTY = 0


@dataclass(frozen=True)
class PrefixSuffix:
    """Unique prefix-suffix decomposition of a shortlex word.

    ``prefix`` strictly alternates between the ray letters; ``sign`` is
    positive when it starts with a_j (the Busemann-increasing direction),
    negative when it starts with a_i.
    """

    prefix: Word
    suffix: Word
    sign: int

    @property
    def prefix_len(self) -> int:
        return len(self.prefix)

    @property
    def suffix_len(self) -> int:
        return len(self.suffix)


def prefix_suffix_decompose(g: DefiningGraph, ray: Ray, w: Word) -> PrefixSuffix:
    """Split a shortlex word into alternating prefix and suffix.

    Left-to-right scan: a ray letter joins the prefix exactly when it
    commutes with the whole running suffix; everything else joins the
    suffix, which is re-normalized at the end.
    """
    if not is_shortlex(g, w):
        raise WordError(f"input {pretty(g, w)} is not shortlex")
    prefix: list[int] = []
    suffix: list[int] = []
    suffix_mask = 0
    for a in w:
        if (a == ray.i or a == ray.j) and suffix_mask & ~g.link_masks[a] == 0:
            prefix.append(a)
        else:
            suffix.append(a)
            suffix_mask |= 1 << a
    for prev, nxt in zip(prefix, prefix[1:]):
        if prev == nxt:
            raise AssertionError("prefix failed to alternate; input was not geodesic")
    if prefix:
        sign = SIGN_POSITIVE if prefix[0] == ray.j else SIGN_NEGATIVE
    else:
        sign = SIGN_EMPTY
    return PrefixSuffix(prefix=tuple(prefix), suffix=normalize(g, tuple(suffix)), sign=sign)


def busemann(g: DefiningGraph, ray: Ray, w: Word) -> int:
    """Busemann value of a shortlex word: +-|prefix| + |suffix|."""
    ps = prefix_suffix_decompose(g, ray, w)
    if ps.sign == SIGN_NEGATIVE:
        return -ps.prefix_len + ps.suffix_len
    return ps.prefix_len + ps.suffix_len


def assemble_word(g: DefiningGraph, ray: Ray, suffix: Word, k: int) -> Word:
    """The unique horosphere word with the given suffix and Busemann value k.

    Prepends the alternating prefix whose sign and length make the Busemann
    value come out to k. The result is geodesic but not necessarily written
    in shortlex order.
    """
    n = len(suffix)
    if k > n:
        return ray.alternating(ray.j, k - n) + suffix
    if k < n:
        return ray.alternating(ray.i, n - k) + suffix
    return suffix
