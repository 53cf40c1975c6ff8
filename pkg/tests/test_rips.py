from __future__ import annotations

import os
import subprocess
import sys

from horoforge.analysis import busemann_oracle, rips_edges_oracle
from horoforge.rays import Ray, assemble_word
from horoforge.rips import (
    enumerate_suffixes,
    generate_rips_graph,
    rips_edges_diff_length,
    rips_edges_same_length,
)
from horoforge.words import normalize, word_distance

from conftest import W


def canonical_edge(u, v):
    return tuple(sorted((u, v), key=lambda w: (len(w), w)))


def edges_as_words(h):
    return {canonical_edge(h.vertices[i], h.vertices[j]) for i, j in h.edges}


def test_enumerate_suffixes_examples(c5_bundle):
    assert enumerate_suffixes(c5_bundle, 0) == [()]
    level1 = enumerate_suffixes(c5_bundle, 1)
    assert level1 == [(), (1,), (3,), (4,)]
    assert len(enumerate_suffixes(c5_bundle, 2)) == 11


def test_same_length_edges_examples(c5, c5_bundle):
    nbrs = rips_edges_same_length(c5_bundle, W(c5, "b"))
    assert W(c5, "d") in nbrs and W(c5, "e") in nbrs
    assert W(c5, "b") not in nbrs
    assert rips_edges_same_length(c5_bundle, ()) == set()


def test_same_length_edges_oracle_distance(c5, c5_ray, c5_bundle):
    for s in enumerate_suffixes(c5_bundle, 3):
        base = assemble_word(c5, c5_ray, s, 0)
        for v in rips_edges_same_length(c5_bundle, s):
            assert len(v) == len(s)
            assert word_distance(c5, base, assemble_word(c5, c5_ray, v, 0)) == 2
            assert busemann_oracle(c5, c5_ray, normalize(c5, assemble_word(c5, c5_ray, v, 0))) == 0


def test_diff_length_edges_examples(c5, c5_ray, c5_bundle):
    assert rips_edges_diff_length(c5_bundle, W(c5, "b"), 0) == {()}
    assert word_distance(c5, assemble_word(c5, c5_ray, W(c5, "b"), 0), assemble_word(c5, c5_ray, (), 0)) == 2
    nbrs = rips_edges_diff_length(c5_bundle, W(c5, "bd"), 0)
    assert W(c5, "b") in nbrs  # delete d, the joining letter commutes with b
    assert rips_edges_diff_length(c5_bundle, (), 0) == set()


def test_edge_symmetry(c5, c5_bundle):
    suffixes = enumerate_suffixes(c5_bundle, 4)
    for s in suffixes:
        for v in rips_edges_same_length(c5_bundle, s):
            assert s in rips_edges_same_length(c5_bundle, v)
        # diff-length edges from the longer side match an up-edge from the shorter:
        for k in (-1, 0, 1):
            for v in rips_edges_diff_length(c5_bundle, s, k):
                assert s in {
                    u
                    for u in suffixes
                    if len(u) == len(s) and v in rips_edges_diff_length(c5_bundle, u, k)
                }


def test_generate_rips_graph_small_grid(c6_bundle):
    g, ray = c6_bundle.graph, c6_bundle.ray
    for k in (-1, 0, 1):
        for max_len in (0, 1, 3):
            h = generate_rips_graph(g, ray, k, max_len, bundle=c6_bundle)
            assert edges_as_words(h) == rips_edges_oracle(g, ray, k, list(h.vertices))
    h = generate_rips_graph(g, ray, 0, 0, bundle=c6_bundle)
    assert h.vertex_count == 1 and h.edge_count == 0


def test_generate_matches_tuple_generators(c5, c5_ray, c5_bundle):
    h = generate_rips_graph(c5, c5_ray, 1, 4, bundle=c5_bundle)
    got = edges_as_words(h)
    expected = set()
    vertex_set = set(h.vertices)
    for s in h.vertices:
        for v in rips_edges_same_length(c5_bundle, s):
            if v in vertex_set:
                expected.add(canonical_edge(s, v))
        for v in rips_edges_diff_length(c5_bundle, s, 1):
            if v in vertex_set:
                expected.add(canonical_edge(s, v))
    assert got == expected


def test_vertex_budget_is_induced_prefix(c5, c5_ray, c5_bundle):
    full = generate_rips_graph(c5, c5_ray, 0, 4, bundle=c5_bundle)
    n = full.vertex_count // 2
    part = generate_rips_graph(c5, c5_ray, 0, 4, bundle=c5_bundle, max_vertices=n)
    assert part.vertices == full.vertices[:n]
    kept = {e for e in full.edges if e[0] < n and e[1] < n}
    assert set(part.edges) == kept


def test_threads_do_not_change_output(c6_bundle):
    g, ray = c6_bundle.graph, c6_bundle.ray
    h1 = generate_rips_graph(g, ray, 0, 4, bundle=c6_bundle, threads=1)
    h4 = generate_rips_graph(g, ray, 0, 4, bundle=c6_bundle, threads=4)
    assert h1.vertices == h4.vertices
    assert h1.edges == h4.edges


def test_python_fallback_agrees_subprocess(tmp_path):
    """Run a small generation with numba disabled and compare edge sets."""
    code = (
        "from conftest import cycle_graph\n"
        "from horoforge.rays import Ray\n"
        "from horoforge.rips import generate_rips_graph\n"
        "g = cycle_graph(5)\n"
        "ray = Ray(*g.letters_named('a','c')).validate(g)\n"
        "h = generate_rips_graph(g, ray, 0, 4)\n"
        "print(h.vertex_count, h.edge_count, sorted(h.edges)[:5])\n"
    )
    env = dict(os.environ, HOROFORGE_NO_NUMBA="1", PYTHONPATH="tests")
    out = subprocess.run(
        [sys.executable, "-c", code], capture_output=True, text=True, env=env, cwd=os.path.dirname(os.path.dirname(__file__)) or "."
    )
    assert out.returncode == 0, out.stderr
    from conftest import cycle_graph

    g = cycle_graph(5)
    ray = Ray(*g.letters_named("a", "c")).validate(g)
    h = generate_rips_graph(g, ray, 0, 4)
    assert out.stdout.strip() == f"{h.vertex_count} {h.edge_count} {sorted(h.edges)[:5]}"


def test_per_vertex_candidate_bound(c5, c5_bundle):
    """At most Clique(G) deletions, each with at most |V| reinsertions."""
    from horoforge.graphdef import max_clique_size
    from horoforge.words import geo_last_letters_mask

    bound = max_clique_size(c5) * c5.size
    for s in enumerate_suffixes(c5_bundle, 4):
        deletions = bin(geo_last_letters_mask(c5, s)).count("1")
        assert deletions <= max_clique_size(c5)
        candidates = len(rips_edges_same_length(c5_bundle, s)) + len(
            rips_edges_diff_length(c5_bundle, s, 0)
        )
        assert candidates <= bound


def test_diff_length_preserves_busemann(c5, c5_ray, c5_bundle):
    for k in (-2, 0, 3):
        for s in enumerate_suffixes(c5_bundle, 3):
            for v in rips_edges_diff_length(c5_bundle, s, k):
                w = normalize(c5, assemble_word(c5, c5_ray, v, k))
                assert busemann_oracle(c5, c5_ray, w) == k
