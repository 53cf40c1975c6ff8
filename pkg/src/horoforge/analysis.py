"""Brute-force oracles and empirical geometry at desk scale.

Everything here prefers exactness over speed. The rewriting normalizer is
deliberately independent of the package's production normal-form code: it
applies the defining rewriting rules (cancel equal neighbors, swap adjacent
commuting descents) to a fixed point, which is a complete rewriting system
for a RACG. Ceilings are configuration, not hardcoded.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass

from .graphdef import DefiningGraph, max_clique_size
from .machines import MachineBundle
from .rays import Ray, busemann, prefix_suffix_decompose
from .rips import HorosphereGraph, RIPS_KIND
from .words import Word, normalize, word_distance

DEFAULT_BALL_CEILING = 2_000_000


def oracle_normalize(g: DefiningGraph, w: Word) -> Word:
    """Shortlex normal form from first principles; the independent oracle.

    First cancels deletion pairs (equal letters separated only by letters
    commuting with them) until none remain, which leaves some geodesic
    representative. Then extracts, over and over, the least letter whose
    copy can commute to the front; greedy front extraction is the lex-least
    linearization of the commutation class. Validated at small lengths
    against exhaustive search over the swap/cancel closure.
    """
    word = list(w)
    # cancellation pass: remove the leftmost deletion pair until geodesic
    reduced = True
    while reduced:
        reduced = False
        n = len(word)
        for i in range(n):
            for j in range(i + 1, n):
                if word[j] == word[i]:
                    del word[j]
                    del word[i]
                    reduced = True
                    break
                if not g.adjacent(word[i], word[j]):
                    break
            if reduced:
                break
    # greedy extraction of the least front-movable letter
    out = []
    while word:
        best_pos = None
        for p, x in enumerate(word):
            if all(g.adjacent(x, word[q]) for q in range(p)):
                if best_pos is None or x < word[best_pos]:
                    best_pos = p
        out.append(word.pop(best_pos))
    return tuple(out)


def commutation_class_least(g: DefiningGraph, w: Word) -> Word:
    """Exhaustive normal form: close under swaps and cancellations, take the
    shortest then lex-least word reached. Exponential; test sizes only."""
    seen = {tuple(w)}
    frontier = [tuple(w)]
    while frontier:
        nxt = []
        for u in frontier:
            for i in range(len(u) - 1):
                if u[i] == u[i + 1]:
                    cand = u[:i] + u[i + 2 :]
                elif g.adjacent(u[i], u[i + 1]):
                    cand = u[:i] + (u[i + 1], u[i]) + u[i + 2 :]
                else:
                    continue
                if cand not in seen:
                    seen.add(cand)
                    nxt.append(cand)
        frontier = nxt
    best_len = min(len(u) for u in seen)
    return min(u for u in seen if len(u) == best_len)


def kernel_oracle_normalizer(g: DefiningGraph):
    """The independent normalizer running through its compiled kernel.

    Same algorithm as ``oracle_normalize`` (the two are compared in tests);
    the kernel keeps the big enumeration oracles inside their time budgets.
    """
    import numpy as np

    from . import _kernels

    link = np.array(g.link_masks, dtype=np.int64)

    def norm(_g: DefiningGraph, w: Word) -> Word:
        if not w:
            return ()
        row = np.array(w, dtype=np.int32)
        out = np.empty(len(w), dtype=np.int32)
        m = int(_kernels.oracle_normalize_row(row, len(w), link, out))
        return tuple(int(x) for x in out[:m])

    return norm


def reduced_words_up_to(g: DefiningGraph, max_len: int, fast: bool = True) -> set[Word]:
    """All geodesic words of length <= max_len, grown along the reduced tree."""
    norm = kernel_oracle_normalizer(g) if fast else oracle_normalize
    out: set[Word] = {()}
    frontier: list[Word] = [()]
    for length in range(1, max_len + 1):
        nxt = []
        for w in frontier:
            for a in range(g.size):
                cand = w + (a,)
                if len(norm(g, cand)) == length:
                    nxt.append(cand)
        out.update(nxt)
        frontier = nxt
    return out


def canonical_words_up_to(g: DefiningGraph, max_len: int, fast: bool = True) -> set[Word]:
    """The shortlex normal forms of all elements in the radius-max_len ball,
    computed purely with the independent oracle normalizer."""
    norm = kernel_oracle_normalizer(g) if fast else oracle_normalize
    seen: set[Word] = {()}
    frontier: list[Word] = [()]
    for _ in range(max_len):
        nxt = []
        for w in frontier:
            for a in range(g.size):
                c = norm(g, w + (a,))
                if c not in seen:
                    seen.add(c)
                    nxt.append(c)
        frontier = nxt
    return seen


def bulk_busemann_check(g: DefiningGraph, ray: Ray, words: list[Word]) -> tuple:
    """Busemann values of shortlex words two ways: the prefix-suffix formula
    and the limit definition, both in bulk. Raises on a non-stabilizing
    limit; returns the two aligned integer arrays."""
    import numpy as np

    from . import _kernels

    max_len = max((len(w) for w in words), default=1)
    mat = np.full((len(words), max(max_len, 1)), -1, dtype=np.int32)
    lens = np.zeros(len(words), dtype=np.int32)
    for i, w in enumerate(words):
        lens[i] = len(w)
        if w:
            mat[i, : len(w)] = w
    link = np.array(g.link_masks, dtype=np.int64)
    formula = np.zeros(len(words), dtype=np.int64)
    limit = np.zeros(len(words), dtype=np.int64)
    _kernels.busemann_formula_bulk(mat, lens, ray.i, ray.j, link, formula)
    bad = int(_kernels.busemann_limit_bulk(mat, lens, ray.i, ray.j, link, limit))
    if bad >= 0:
        raise AssertionError(f"Busemann limit failed to stabilize for word index {bad}")
    return formula, limit


class BallCeilingExceeded(RuntimeError):
    pass


@dataclass
class CayleyBall:
    """Exact ball around the identity: canonical representative per element."""

    graph: DefiningGraph
    radius: int
    distance: dict[Word, int]
    by_distance: list[list[Word]]

    @property
    def size(self) -> int:
        return len(self.distance)


def build_cayley_ball(
    g: DefiningGraph, radius: int, ceiling: int = DEFAULT_BALL_CEILING, canonicalizer=normalize
) -> CayleyBall:
    """BFS from the identity, deduplicating by the canonical form."""
    distance: dict[Word, int] = {(): 0}
    shells: list[list[Word]] = [[()]]
    for r in range(1, radius + 1):
        shell: list[Word] = []
        for w in shells[r - 1]:
            for a in range(g.size):
                c = canonicalizer(g, w + (a,))
                if c not in distance:
                    if len(distance) >= ceiling:
                        raise BallCeilingExceeded(f"ball exceeded {ceiling} elements at radius {r}")
                    distance[c] = r
                    shell.append(c)
        shells.append(shell)
    return CayleyBall(graph=g, radius=radius, distance=distance, by_distance=shells)


def busemann_oracle(g: DefiningGraph, ray: Ray, w: Word) -> int:
    """Busemann value straight from the limit definition.

    Evaluates d(gamma(N), w) - N at two depths past stabilization and
    insists they agree; disagreement means a bug upstream.
    """
    values = []
    for n in (len(w) + 2, len(w) + 4):
        values.append(word_distance(g, ray.point(n), w) - n)
    if values[0] != values[1]:
        raise AssertionError(f"Busemann limit failed to stabilize for {w}: {values}")
    return values[0]


def _stabilization_power(g: DefiningGraph, ray: Ray, w: Word) -> int:
    ps = prefix_suffix_decompose(g, ray, normalize(g, w))
    return ps.prefix_len // 2 + 2


def predecessor_map(g: DefiningGraph, ray: Ray, w: Word) -> Word:
    """The horocyclic predecessor P(w), evaluated literally at stabilization.

    Deep-multiplies by the inverse ray power, deletes the last letter of the
    shortlex form, and multiplies back. Computed at two powers (which must
    agree); the result sits one horosphere inward.
    """
    w = normalize(g, w)
    n0 = _stabilization_power(g, ray, w)
    results = []
    for n in (n0, n0 + 1):
        deep = normalize(g, ray.alternating(ray.j, 2 * n) + w)
        trimmed = deep[:-1] if deep else deep
        results.append(normalize(g, ray.alternating(ray.i, 2 * n) + trimmed))
    if results[0] != results[1]:
        raise AssertionError(f"predecessor did not stabilize for {w}: {results}")
    if busemann(g, ray, results[0]) != busemann_oracle(g, ray, w) - 1:
        raise AssertionError("predecessor failed to step one horosphere inward")
    return results[0]


def limit_state(bundle: MachineBundle, w: Word) -> int:
    """S(w): the shortlex-machine state of deep ray translates, stabilized."""
    g, ray = bundle.graph, bundle.ray
    w = normalize(g, w)
    n0 = _stabilization_power(g, ray, w)
    states = []
    for n in (n0, n0 + 1):
        deep = normalize(g, ray.alternating(ray.j, 2 * n) + w)
        state = bundle.shortlex.run(deep)
        if state is None:
            raise AssertionError("deep translate rejected by the shortlex machine")
        states.append(state)
    if states[0] != states[1]:
        raise AssertionError(f"S-state did not stabilize for {w}")
    return states[0]


def successor_set(bundle: MachineBundle, w: Word) -> set[Word]:
    """P^{-1}(w): every w a_k with a_k outside the limit state, normalized."""
    g = bundle.graph
    forbidden = bundle.shortlex.payloads[limit_state(bundle, w)]
    out = set()
    for a in range(g.size):
        if not forbidden >> a & 1:
            out.add(normalize(g, w + (a,)))
    return out


@dataclass(frozen=True)
class CloseSuccessorVerdict:
    close_up_to: int | None
    diverged_at: int | None
    level_minima: tuple[int, ...]

    @property
    def is_close(self) -> bool:
        return self.diverged_at is None


def close_successors_oracle(
    bundle: MachineBundle,
    w: Word,
    v: Word,
    depth: int,
    bound: int,
    slack: int = 2,
    class_ceiling: int = 200_000,
) -> CloseSuccessorVerdict:
    """Iterate successor level sets, tracking the minimum pairwise distance.

    A successor pair's entire future is determined by the two S-states and
    the reduced difference, so level sets are folded into such classes; the
    per-level minimum over classes equals the minimum over word pairs
    (cross-checked against the literal iteration in the tests). Classes
    whose difference exceeds bound+slack are pruned. A pair that stays close
    forever stays within the bound at every level, so closeness verdicts are
    unaffected by the pruning; divergence is one-sided by nature.
    """
    g = bundle.graph
    lex = bundle.shortlex
    if busemann_oracle(g, bundle.ray, w) != busemann_oracle(g, bundle.ray, v):
        raise ValueError("close-successor oracle needs words on one horosphere")
    w, v = normalize(g, w), normalize(g, v)
    start = (limit_state(bundle, w), limit_state(bundle, v), word_reduce(g, w, v))
    classes = {start}
    minima: list[int] = []
    diverged_at = None
    for level in range(depth + 1):
        if level > 0:
            nxt: set[tuple[int, int, Word]] = set()
            for sx, sy, diff in classes:
                for a in lex.transitions[sx]:
                    left = normalize(g, (a,) + diff)
                    for b in lex.transitions[sy]:
                        d2 = normalize(g, left + (b,))
                        if len(d2) <= bound + slack:
                            nxt.add((lex.transitions[sx][a], lex.transitions[sy][b], d2))
                if len(nxt) > class_ceiling:
                    raise RuntimeError("close-successor oracle exceeded its class ceiling")
            classes = nxt
        if not classes:
            minima.append(-1)
            diverged_at = level
            break
        best = min(len(diff) for _, _, diff in classes)
        minima.append(best)
        if best > bound + 2:
            diverged_at = level
            break
    close_up_to = None if diverged_at is not None else depth
    return CloseSuccessorVerdict(
        close_up_to=close_up_to, diverged_at=diverged_at, level_minima=tuple(minima)
    )


def close_successors_oracle_literal(
    bundle: MachineBundle,
    w: Word,
    v: Word,
    depth: int,
    bound: int,
    slack: int = 2,
    pair_ceiling: int = 200_000,
) -> CloseSuccessorVerdict:
    """The same oracle iterating literal word pairs; cross-check at small depth."""
    g = bundle.graph
    w, v = normalize(g, w), normalize(g, v)
    pairs = {(w, v)}
    minima: list[int] = []
    diverged_at = None
    for level in range(depth + 1):
        if level > 0:
            nxt: set[tuple[Word, Word]] = set()
            for x, y in pairs:
                for x2 in successor_set(bundle, x):
                    for y2 in successor_set(bundle, y):
                        if word_distance(g, x2, y2) <= bound + slack:
                            nxt.add((x2, y2))
                if len(nxt) > pair_ceiling:
                    raise RuntimeError("literal close-successor oracle exceeded its pair ceiling")
            pairs = nxt
        if not pairs:
            minima.append(-1)
            diverged_at = level
            break
        best = min(word_distance(g, x, y) for x, y in pairs)
        minima.append(best)
        if best > bound + 2:
            diverged_at = level
            break
    close_up_to = None if diverged_at is not None else depth
    return CloseSuccessorVerdict(
        close_up_to=close_up_to, diverged_at=diverged_at, level_minima=tuple(minima)
    )


def word_reduce(g: DefiningGraph, w: Word, v: Word) -> Word:
    """normalize(w^-1 v)."""
    return normalize(g, tuple(reversed(w)) + v)


def suffix_of(g: DefiningGraph, ray: Ray, w: Word) -> Word:
    return prefix_suffix_decompose(g, ray, normalize(g, w)).suffix


def fast_normalizer(g: DefiningGraph):
    """The production normalizer through its compiled kernel (same algorithm
    as ``words.normalize``; equality is a unit test)."""
    import numpy as np

    from . import _kernels

    link = np.array(g.link_masks, dtype=np.int64)

    def norm(w: Word) -> Word:
        if not w:
            return ()
        row = np.array(w, dtype=np.int32)
        out = np.empty(len(w), dtype=np.int32)
        m = int(_kernels.normalize_row(row, len(w), link, out))
        return tuple(int(x) for x in out[:m])

    return norm


def _split_shortlex(g: DefiningGraph, ray: Ray, w: Word) -> tuple[int, int, int, Word]:
    """(prefix length, first prefix letter, suffix length, raw suffix) of a
    shortlex word, by the one-pass scan."""
    suffix_mask = 0
    pref_len = 0
    pref_first = -1
    suffix: list[int] = []
    for a in w:
        if (a == ray.i or a == ray.j) and suffix_mask & ~g.link_masks[a] == 0:
            if pref_len == 0:
                pref_first = a
            pref_len += 1
        else:
            suffix.append(a)
            suffix_mask |= 1 << a
    return pref_len, pref_first, len(suffix), tuple(suffix)


def k_rips_edges_oracle(
    g: DefiningGraph,
    ray: Ray,
    k: int,
    vertices: list[Word],
    radius: int = 2,
) -> set[tuple[Word, Word]]:
    """Edges by definition: multiply each vertex by every short word and keep
    products that land on another stored vertex of the horosphere."""
    from .rays import assemble_word

    norm = fast_normalizer(g)
    index = set(vertices)
    edges: set[tuple[Word, Word]] = set()
    for s in vertices:
        base = assemble_word(g, ray, s, k)
        for r in range(1, radius + 1):
            for tail in itertools.product(range(g.size), repeat=r):
                cand = norm(base + tail)
                pref_len, pref_first, suff_len, raw_suffix = _split_shortlex(g, ray, cand)
                value = (-pref_len if pref_first == ray.i else pref_len) + suff_len
                if value != k:
                    continue
                other = norm(raw_suffix)
                if other == s or other not in index:
                    continue
                edges.add(
                    (
                        min(s, other, key=lambda x: (len(x), x)),
                        max(s, other, key=lambda x: (len(x), x)),
                    )
                )
    return edges


def rips_edges_oracle(g: DefiningGraph, ray: Ray, k: int, vertices: list[Word]) -> set[tuple[Word, Word]]:
    return k_rips_edges_oracle(g, ray, k, vertices, radius=2)


@dataclass
class DistortionTable:
    kind: str
    rows: list[tuple[Word, Word, int, int]]  # (u, v, cayley distance, graph distance)

    def violations(self, step_bound: int) -> list[tuple[Word, Word, int, int]]:
        """Rows where the Cayley distance exceeds step_bound per graph edge."""
        return [r for r in self.rows if r[2] > step_bound * r[3]]


@dataclass
class GraphMetrics:
    component_count: int
    distances_from_origin: dict[Word, int]
    growth: list[int]
    distortion: DistortionTable
    edge_step_bound: int
    graph: DefiningGraph | None = None


def _bfs(h: HorosphereGraph, source: int) -> dict[int, int]:
    dist = {source: 0}
    frontier = [source]
    while frontier:
        nxt = []
        for u in frontier:
            for t in h.neighbors(u):
                if t not in dist:
                    dist[t] = dist[u] + 1
                    nxt.append(t)
        frontier = nxt
    return dist


def graph_metrics(
    h: HorosphereGraph,
    *,
    pair_budget: int = 20_000,
    sample_size: int = 10_000,
    seed: int = 0,
) -> GraphMetrics:
    """Components, origin BFS, ball growth, and a distortion table.

    Distortion rows pair the Cayley distance of assembled words with the
    graph distance; all pairs when there are at most ``pair_budget`` of
    them, otherwise a seeded uniform sample.
    """
    from .rays import assemble_word

    g, ray, k = h.graph, h.ray, h.k
    n = h.vertex_count
    seen: set[int] = set()
    components = 0
    for s in range(n):
        if s not in seen:
            components += 1
            seen.update(_bfs(h, s))
    try:
        origin = h.index_of(())
    except KeyError:
        origin = 0  # empty-suffix vertex filtered out; fall back to the first
    from_origin = _bfs(h, origin) if n else {}
    max_r = max(from_origin.values()) if from_origin else 0
    growth = [0] * (max_r + 1)
    for d in from_origin.values():
        growth[d] += 1
    for r in range(1, max_r + 1):
        growth[r] += growth[r - 1]

    if n * (n - 1) // 2 <= pair_budget:
        pair_indices = list(itertools.combinations(range(n), 2))
    else:
        rng = random.Random(seed)
        pair_indices = []
        for _ in range(sample_size):
            i = rng.randrange(n)
            j = rng.randrange(n)
            if i != j:
                pair_indices.append((min(i, j), max(i, j)))
        pair_indices = sorted(set(pair_indices))
    by_source: dict[int, list[int]] = {}
    for i, j in pair_indices:
        by_source.setdefault(i, []).append(j)
    assembled = [assemble_word(g, ray, s, k) for s in h.vertices]
    rows = []
    for i, targets in sorted(by_source.items()):
        dist_i = _bfs(h, i)
        for j in targets:
            if j not in dist_i:
                continue
            rows.append((h.vertices[i], h.vertices[j], word_distance(g, assembled[i], assembled[j]), dist_i[j]))
    step = 2 if h.kind == RIPS_KIND else 2 * max_clique_size(g) - 2
    table = DistortionTable(kind=h.kind, rows=rows)
    return GraphMetrics(
        component_count=components,
        distances_from_origin={h.vertices[i]: d for i, d in from_origin.items()},
        growth=growth,
        distortion=table,
        edge_step_bound=step,
        graph=g,
    )
