"""Word arithmetic in a right-angled Coxeter group.

Words are tuples of letter indices. Generators are involutions, so the
inverse of a word is its reversal and no signed letters exist anywhere in
the package. ``normalize`` is quadratic; it backs oracles and input
sanitation only, never the linear-time generation paths.
"""
from __future__ import annotations

from .graphdef import DefiningGraph, mask_of

Word = tuple[int, ...]


class WordError(ValueError):
    """A word operation was called outside its precondition."""


def geo_last_letters_mask(g: DefiningGraph, w: Word) -> int:
    """Letters that some geodesic representative of ``w`` ends with.

    For a geodesic input this is the geodesic-machine payload: letter ``a``
    is included exactly when its last copy commutes past everything after it.
    """
    after = 0
    res = 0
    for x in reversed(w):
        if after & ~g.link_masks[x] == 0:
            res |= 1 << x
        after |= 1 << x
    return res


def shortlex_insert(g: DefiningGraph, w: Word, a: int) -> Word:
    """Insert ``a`` into the shortlex word ``w`` in a single right-to-left pass.

    Scans from the end remembering the latest position whose letter commutes
    with and follows ``a``; stops at the first letter that does not commute
    with ``a``. The caller guarantees ``a`` does not cancel into ``w``.
    """
    if geo_last_letters_mask(g, w) & (1 << a):
        raise WordError(f"insertion of canceling letter {g.names[a]} into {pretty(g, w)}")
    best = len(w)
    link_a = g.link_masks[a]
    for i in range(len(w) - 1, -1, -1):
        x = w[i]
        if not (link_a >> x) & 1:
            break
        if a < x:
            best = i
    return w[:best] + (a,) + w[best:]


def delete_last_copy(g: DefiningGraph, w: Word, a: int) -> Word:
    """Remove the last copy of ``a`` that commutes to the end of ``w``.

    Requires ``a`` to be a geodesic last letter of ``w``; the result is again
    shortlex, and a suffix whenever ``w`` was one.
    """
    after_mask = 0
    for i in range(len(w) - 1, -1, -1):
        x = w[i]
        if x == a and after_mask & ~g.link_masks[a] == 0:
            return w[:i] + w[i + 1 :]
        after_mask |= 1 << x
    raise WordError(f"{g.names[a]} is not a last letter of {pretty(g, w)}")


def normalize(g: DefiningGraph, w: Word) -> Word:
    """Shortlex normal form of ``w``.

    Processes letters left to right, maintaining a shortlex form: a letter
    that is currently a geodesic last letter cancels its unique reaching
    copy, anything else is placed by ``shortlex_insert``.
    """
    cur: Word = ()
    for a in w:
        if geo_last_letters_mask(g, cur) & (1 << a):
            cur = delete_last_copy(g, cur, a)
        else:
            best = len(cur)
            link_a = g.link_masks[a]
            for i in range(len(cur) - 1, -1, -1):
                x = cur[i]
                if not (link_a >> x) & 1:
                    break
                if a < x:
                    best = i
            cur = cur[:best] + (a,) + cur[best:]
    return cur


def is_shortlex(g: DefiningGraph, w: Word) -> bool:
    return normalize(g, w) == w


def word_distance(g: DefiningGraph, w: Word, v: Word) -> int:
    """Distance in the Cayley graph: the reduced length of w^-1 v."""
    return len(normalize(g, tuple(reversed(w)) + v))


def word_mask(w: Word) -> int:
    return mask_of(w)


def pretty(g: DefiningGraph, w: Word) -> str:
    if not w:
        return "ε"
    if all(len(g.names[a]) == 1 for a in w):
        return "".join(g.names[a] for a in w)
    return ".".join(g.names[a] for a in w)


def parse_word(g: DefiningGraph, text: str) -> Word:
    """Parse a word from vertex names, either concatenated single characters
    or dot/space separated names. 'ε', '1' or '' denotes the empty word."""
    text = text.strip()
    if text in ("", "ε", "1"):
        return ()
    index = {n: i for i, n in enumerate(g.names)}
    if "." in text or " " in text:
        parts = [p for p in text.replace(".", " ").split() if p]
    else:
        parts = list(text)
    try:
        return tuple(index[p] for p in parts)
    except KeyError as exc:
        raise WordError(f"unknown letter {exc.args[0]!r} in word {text!r}") from None
