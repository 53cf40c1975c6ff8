"""Generation of the 2-Rips graph on a horosphere.

Vertices are shortlex suffixes up to a length cap; the two edge generators
touch only the suffix and the Busemann value, never the assembled word.
Per-vertex work is constant-bounded by clique size times alphabet size and
linear in the suffix length, which is what makes whole-graph generation
O(n log n).

The readable tuple-based generators live here; bulk generation runs the
array kernels in ``_kernels`` (numba-compiled unless HOROFORGE_NO_NUMBA is
set), chunked so the per-vertex loop can run on a thread pool. Kernel and
tuple paths are cross-checked in the test suite.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .graphdef import DefiningGraph
from .machines import MachineBundle
from .rays import Ray
from .words import Word, delete_last_copy, geo_last_letters_mask, pretty, shortlex_insert

RIPS_KIND = "rips2"
DIVERGENCE_KIND = "divergence"


@dataclass(frozen=True)
class HorosphereGraph:
    """A generated finite portion of a horosphere graph.

    ``vertices`` are suffix words sorted by (length, letters); ``edges`` are
    sorted pairs of vertex indices. Both orders are deterministic so exports
    are byte-stable.
    """

    kind: str
    graph: DefiningGraph
    ray: Ray
    k: int
    max_suffix_len: int
    vertices: tuple[Word, ...]
    edges: tuple[tuple[int, int], ...]
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def vertex_count(self) -> int:
        return len(self.vertices)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def vertex_label(self, idx: int) -> str:
        return ".".join(self.graph.names[a] for a in self.vertices[idx])

    def edge_words(self):
        for i, j in self.edges:
            yield self.vertices[i], self.vertices[j]

    def index_of(self, w: Word) -> int:
        return self._index()[w]

    def _index(self) -> dict:
        if "index" not in self.meta:
            self.meta["index"] = {w: i for i, w in enumerate(self.vertices)}
        return self.meta["index"]

    def neighbors(self, idx: int) -> list[int]:
        adj = self.meta.get("adjacency")
        if adj is None:
            adj = [[] for _ in self.vertices]
            for i, j in self.edges:
                adj[i].append(j)
                adj[j].append(i)
            self.meta["adjacency"] = adj
        return adj[idx]


def canonical_sort(words: list[Word]) -> list[Word]:
    return sorted(words, key=lambda w: (len(w), w))


def enumerate_suffixes(bundle: MachineBundle, max_len: int) -> list[Word]:
    """All shortlex suffixes of length <= max_len, in (length, lex) order."""
    return canonical_sort(list(bundle.suffix.enumerate_language(max_len)))


def rips_edges_same_length(bundle: MachineBundle, suffix: Word) -> set[Word]:
    """Neighbors with the same suffix length: delete a geodesic last letter,
    reinsert anything the geodesic suffix machine permits, and drop the
    degenerate reinsertion that reproduces the source."""
    g = bundle.graph
    out: set[Word] = set()
    gs = bundle.geo_suffix
    for a_k in _mask_letters(geo_last_letters_mask(g, suffix)):
        shorter = delete_last_copy(g, suffix, a_k)
        state = gs.run(shorter)
        if state is None:
            raise AssertionError(f"shortened word {pretty(g, shorter)} fell out of the suffix language")
        for a_l in gs.allowed_letters(state):
            candidate = shortlex_insert(g, shorter, a_l)
            if candidate != suffix:
                out.add(candidate)
    return out


def rips_edges_diff_length(bundle: MachineBundle, suffix: Word, k: int) -> set[Word]:
    """Neighbors whose suffix is one letter shorter, on the k-horosphere.

    The prefix changes by the ray letter its alternation dictates; a deleted
    suffix letter yields an edge exactly when that prefix letter commutes
    with everything left.
    """
    g = bundle.graph
    ray = bundle.ray
    n = len(suffix)
    if n == 0:
        return set()
    required = ray.j if (k - n) % 2 == 0 else ray.i
    out: set[Word] = set()
    for a_l in _mask_letters(geo_last_letters_mask(g, suffix)):
        shorter = delete_last_copy(g, suffix, a_l)
        if all(g.adjacent(required, x) for x in set(shorter)):
            out.add(shorter)
    return out


def _mask_letters(mask: int):
    i = 0
    while mask:
        if mask & 1:
            yield i
        mask >>= 1
        i += 1


def _suffix_matrix(bundle: MachineBundle, max_len: int) -> tuple[np.ndarray, np.ndarray]:
    """Enumerate the suffix language into a padded matrix via the fill kernel."""
    if bundle.graph.size > 62:
        raise ValueError("the array kernels pack letter sets into int64; at most 62 letters")
    trans, acc = bundle.suffix.dense_tables()
    counts = bundle.suffix.count_language(max_len)
    total = sum(counts)
    words = np.full((total, max(max_len, 1)), -1, dtype=np.int32)
    lens = np.zeros(total, dtype=np.int32)
    n = _kernels.enum_fill(trans, acc, bundle.suffix.start, max_len, words, lens)
    if int(n) != total:
        raise AssertionError(f"enumeration disagrees with the counting DP: {n} vs {total}")
    order = np.lexsort(tuple(words[:, t] for t in range(words.shape[1] - 1, -1, -1)) + (lens,))
    return words[order], lens[order]


def _edge_arrays(
    bundle: MachineBundle,
    words: np.ndarray,
    lens: np.ndarray,
    k: int,
    threads: int = 1,
) -> np.ndarray:
    g = bundle.graph
    n = words.shape[0]
    base = np.int64(g.size + 1)
    keys = np.empty(n, dtype=np.int64)
    for i in range(n):
        keys[i] = _kernels.word_key(words[i], int(lens[i]), base)
    sort = np.argsort(keys, kind="stable")
    keys_sorted = keys[sort]
    idx_sorted = sort.astype(np.int64)

    trans_geo, _ = bundle.geodesic.dense_tables()
    payload_geo = np.array([int(p) for p in bundle.geodesic.payloads], dtype=np.int64)
    trans_gs, _ = bundle.geo_suffix.dense_tables()
    link_masks = np.array(g.link_masks, dtype=np.int64)

    per_vertex_bound = max(1, g.size * (g.size + 1))
    chunk = 65536

    def run_chunk(start: int) -> np.ndarray:
        end = min(start + chunk, n)
        buf = np.empty(((end - start) * per_vertex_bound, 2), dtype=np.int64)
        wrote = _kernels.rips_edge_chunk(
            words,
            lens,
            keys_sorted,
            idx_sorted,
            start,
            end,
            trans_geo,
            payload_geo,
            bundle.geodesic.start,
            trans_gs,
            bundle.geo_suffix.start,
            link_masks,
            bundle.ray.i,
            bundle.ray.j,
            k,
            base,
            buf,
        )
        return buf[: int(wrote)]

    starts = list(range(0, n, chunk))
    if threads > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            pieces = list(pool.map(run_chunk, starts))
    else:
        pieces = [run_chunk(s) for s in starts]
    if pieces:
        raw = np.concatenate(pieces, axis=0)
    else:
        raw = np.empty((0, 2), dtype=np.int64)
    if raw.shape[0] == 0:
        return raw
    lo = np.minimum(raw[:, 0], raw[:, 1])
    hi = np.maximum(raw[:, 0], raw[:, 1])
    packed = np.unique(lo * np.int64(n) + hi)
    out = np.empty((packed.shape[0], 2), dtype=np.int64)
    out[:, 0] = packed // n
    out[:, 1] = packed % n
    return out


def generate_rips_graph(
    g: DefiningGraph,
    ray: Ray,
    k: int,
    max_suffix_len: int,
    *,
    bundle: MachineBundle | None = None,
    max_vertices: int | None = None,
    threads: int = 1,
) -> HorosphereGraph:
    """Vertices from M_Suff plus both edge generators, deduplicated.

    Edges leading to suffixes longer than the cap are discarded: the result
    is the induced structure on the stored vertices. ``max_vertices`` keeps
    only that many vertices in canonical order (scaling benchmarks); the
    same membership rule then applies.
    """
    bundle = bundle or MachineBundle(g, ray)
    words, lens = _suffix_matrix(bundle, max_suffix_len)
    if max_vertices is not None and words.shape[0] > max_vertices:
        words, lens = words[:max_vertices], lens[:max_vertices]
    edges = _edge_arrays(bundle, words, lens, k, threads=threads)
    vertices = tuple(tuple(int(a) for a in words[i, : lens[i]]) for i in range(words.shape[0]))
    return HorosphereGraph(
        kind=RIPS_KIND,
        graph=g,
        ray=ray,
        k=k,
        max_suffix_len=max_suffix_len,
        vertices=vertices,
        edges=tuple((int(a), int(b)) for a, b in edges),
        meta={"backend": "numba" if _kernels.numba_enabled() else "python", "threads": threads},
    )
