"""Defining graphs for right-angled Coxeter groups.

Letters are dense integer indices 0..q-1; the input vertex order fixes the
alphabetical order on generators. All commutation queries go through
precomputed star/link bit masks, since every machine transition needs them.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence


def _bit(i: int) -> int:
    return 1 << i


def mask_of(letters: Iterable[int]) -> int:
    m = 0
    for a in letters:
        m |= 1 << a
    return m


def letters_of(mask: int) -> tuple[int, ...]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


class GraphError(ValueError):
    """Structurally malformed defining-graph input."""


@dataclass(frozen=True)
class DefiningGraph:
    """A finite simple graph whose vertices generate the Coxeter group.

    Two generators commute exactly when their vertices are adjacent. The
    instance is immutable after construction and safe to share across
    threads; all caches are computed up front.
    """

    names: tuple[str, ...]
    edges: frozenset[frozenset[int]]
    # caches, filled in __post_init__
    link_masks: tuple[int, ...] = field(default=(), compare=False, repr=False)
    star_masks: tuple[int, ...] = field(default=(), compare=False, repr=False)
    star_lt_masks: tuple[int, ...] = field(default=(), compare=False, repr=False)
    star_gt_masks: tuple[int, ...] = field(default=(), compare=False, repr=False)

    def __post_init__(self) -> None:
        q = len(self.names)
        if len(set(self.names)) != q:
            raise GraphError("duplicate vertex names")
        link = [0] * q
        for e in self.edges:
            pair = sorted(e)
            if len(pair) != 2:
                raise GraphError(f"self-loop or malformed edge: {pair}")
            a, b = pair
            if not (0 <= a < q and 0 <= b < q):
                raise GraphError(f"edge endpoint out of range: {pair}")
            link[a] |= _bit(b)
            link[b] |= _bit(a)
        star = [link[a] | _bit(a) for a in range(q)]
        below = 0
        star_lt, star_gt = [0] * q, [0] * q
        for a in range(q):
            star_lt[a] = link[a] & below
            below |= _bit(a)
            star_gt[a] = link[a] & ~below
        object.__setattr__(self, "link_masks", tuple(link))
        object.__setattr__(self, "star_masks", tuple(star))
        object.__setattr__(self, "star_lt_masks", tuple(star_lt))
        object.__setattr__(self, "star_gt_masks", tuple(star_gt))

    @classmethod
    def from_edges(cls, names: Sequence[str], edge_names: Iterable[tuple[str, str]]) -> "DefiningGraph":
        index = {n: i for i, n in enumerate(names)}
        edges = set()
        for u, v in edge_names:
            if u not in index or v not in index:
                raise GraphError(f"edge references undeclared vertex: ({u}, {v})")
            if u == v:
                raise GraphError(f"self edge on {u}")
            e = frozenset((index[u], index[v]))
            if e in edges:
                raise GraphError(f"duplicate edge ({u}, {v})")
            edges.add(e)
        return cls(names=tuple(names), edges=frozenset(edges))

    @property
    def size(self) -> int:
        return len(self.names)

    @property
    def all_mask(self) -> int:
        return (1 << self.size) - 1

    def adjacent(self, a: int, b: int) -> bool:
        return bool(self.link_masks[a] & _bit(b))

    def commutes_with_all(self, a: int, mask: int) -> bool:
        """True when letter ``a`` commutes with every letter in ``mask``.

        A letter does not commute with itself (equal adjacent letters cancel
        instead), so ``a`` itself must not appear in ``mask``.
        """
        return mask & ~self.link_masks[a] == 0

    def name_of(self, a: int) -> str:
        return self.names[a]

    def letters_named(self, *names: str) -> tuple[int, ...]:
        index = {n: i for i, n in enumerate(self.names)}
        return tuple(index[n] for n in names)

    def canonical_text(self) -> str:
        """Stable text encoding used for hashing in export metadata."""
        lines = ["vertices: " + " ".join(self.names)]
        for e in sorted(tuple(sorted(e)) for e in self.edges):
            lines.append(f"edge: {self.names[e[0]]} {self.names[e[1]]}")
        return "\n".join(lines) + "\n"


def enumerate_cliques(g: DefiningGraph) -> Iterable[tuple[int, ...]]:
    """All cliques of g, including the empty clique, as sorted tuples."""
    q = g.size

    def extend(clique: tuple[int, ...], candidates: int):
        yield clique
        for a in letters_of(candidates):
            yield from extend(clique + (a,), candidates & g.link_masks[a] & ~((_bit(a) << 1) - 1))

    yield from extend((), g.all_mask)


def max_clique_size(g: DefiningGraph) -> int:
    """Size of a maximum clique, by exhaustive search.

    Defining graphs stay small (tens of vertices), so the exponential
    enumeration is acceptable.
    """
    return max(len(c) for c in enumerate_cliques(g))


def _components(g: DefiningGraph, removed: int) -> list[int]:
    """Connected components of g minus the ``removed`` mask, as vertex masks."""
    seen = removed
    comps = []
    for a in range(g.size):
        if seen & _bit(a):
            continue
        comp = 0
        stack = [a]
        seen |= _bit(a)
        while stack:
            x = stack.pop()
            comp |= _bit(x)
            for y in letters_of(g.link_masks[x] & ~seen):
                seen |= _bit(y)
                stack.append(y)
        comps.append(comp)
    return comps


@dataclass(frozen=True)
class ValidationCheck:
    name: str
    passed: bool
    witness: str = ""


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple[ValidationCheck, ...]

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[ValidationCheck]:
        return [c for c in self.checks if not c.passed]

    def summary(self) -> str:
        lines = []
        for c in self.checks:
            status = "pass" if c.passed else "FAIL"
            suffix = f"  ({c.witness})" if c.witness and not c.passed else ""
            lines.append(f"{status}  {c.name}{suffix}")
        return "\n".join(lines)


def validate_defining_graph(g: DefiningGraph) -> ValidationReport:
    """Check the standing assumptions: no induced square, not complete,
    connected, and no separating clique (the empty clique included).

    The separating-clique check enumerates every clique; this is exponential
    in the clique size but defining graphs have well under fifty vertices.
    """
    checks = []

    # Induced squares: a pair of non-adjacent vertices with two non-adjacent
    # common neighbors spans one.
    square = None
    for u, v in itertools.combinations(range(g.size), 2):
        if g.adjacent(u, v):
            continue
        common = letters_of(g.link_masks[u] & g.link_masks[v])
        for x, y in itertools.combinations(common, 2):
            if not g.adjacent(x, y):
                square = (u, x, v, y)
                break
        if square:
            break
    checks.append(
        ValidationCheck(
            "no induced square",
            square is None,
            "" if square is None else "induced 4-cycle " + "-".join(g.names[a] for a in square),
        )
    )

    complete = all(g.adjacent(u, v) for u, v in itertools.combinations(range(g.size), 2)) and g.size > 1
    if g.size <= 1:
        complete = True  # a point is complete; the group would be finite
    checks.append(ValidationCheck("not complete", not complete, "every pair is adjacent" if complete else ""))

    comps = _components(g, 0)
    connected = len(comps) <= 1
    checks.append(
        ValidationCheck(
            "connected",
            connected,
            "" if connected else f"{len(comps)} components",
        )
    )

    separating = None
    for clique in enumerate_cliques(g):
        cmask = mask_of(clique)
        rest = _components(g, cmask)
        if len(rest) > 1:
            a = letters_of(rest[0])[0]
            b = letters_of(rest[1])[0]
            separating = (clique, a, b)
            break
    if separating:
        clique, a, b = separating
        label = "{" + ",".join(g.names[c] for c in clique) + "}"
        witness = f"removing clique {label} separates {g.names[a]} from {g.names[b]}"
    else:
        witness = ""
    checks.append(ValidationCheck("no separating clique", separating is None, witness))

    return ValidationReport(checks=tuple(checks))


def require_valid(g: DefiningGraph) -> DefiningGraph:
    report = validate_defining_graph(g)
    if not report.ok:
        bad = "; ".join(f"{c.name}: {c.witness}" for c in report.failures())
        raise GraphError(f"defining graph violates standing assumptions: {bad}")
    return g
