from __future__ import annotations

import pytest

from horoforge.analysis import canonical_words_up_to, reduced_words_up_to
from horoforge.graphdef import DefiningGraph
from horoforge.machines import (
    DeadEndError,
    build_first_letter_excluder,
    build_geo_suffix_machine,
    build_geodesic_machine,
    build_shortlex_machine,
)
from horoforge.rays import Ray, prefix_suffix_decompose
from horoforge.words import normalize

from conftest import W, cycle_graph


def test_geodesic_machine_examples(c5, c5_bundle):
    geo = c5_bundle.geodesic
    assert geo.accepts(W(c5, "ab"))[0]
    assert geo.accepts(W(c5, "ba"))[0]
    assert not geo.accepts(W(c5, "bab"))[0]  # bab = abb = a


def test_geodesic_single_vertex():
    g = DefiningGraph.from_edges("a", [])
    geo = build_geodesic_machine(g)
    assert set(geo.enumerate_language(5)) == {(), (0,)}


def test_shortlex_machine_examples(c5, c5_bundle):
    lex = c5_bundle.shortlex
    assert lex.accepts(W(c5, "ab"))[0]
    assert not lex.accepts(W(c5, "ba"))[0]
    state = lex.run(W(c5, "ab"))
    assert lex.payloads[state] == 0b00011  # forbids exactly {a, b}
    assert lex.payloads[lex.start] == 0


def test_machine_languages_equal_oracle_sets():
    for g in (cycle_graph(5), cycle_graph(6)):
        geo_lang = set(build_geodesic_machine(g).enumerate_language(6))
        lex_lang = set(build_shortlex_machine(g).enumerate_language(6))
        assert geo_lang == reduced_words_up_to(g, 6, fast=False)
        assert lex_lang == canonical_words_up_to(g, 6, fast=False)


def test_geo_payload_equals_normalize_shortening(c5, c5_bundle):
    geo = c5_bundle.geodesic
    for w in c5_bundle.shortlex.enumerate_language(5):
        payload = geo.payloads[geo.run(w)]
        expected = 0
        for a in range(c5.size):
            if len(normalize(c5, w + (a,))) < len(w) + 1:
                expected |= 1 << a
        assert payload == expected


def test_excluder_examples(c5):
    universal = build_first_letter_excluder(c5, 0)
    assert all(universal.accepts(w)[0] for w in [(), W(c5, "a"), W(c5, "ba")])
    f_ac = build_first_letter_excluder(c5, 0b00101)
    assert not f_ac.accepts(W(c5, "bc"))[0]  # bc rearranges to cb
    assert f_ac.accepts(W(c5, "da"))[0]
    assert not f_ac.accepts(W(c5, "a"))[0]


def test_suffix_machine_examples(c5, c5_bundle):
    suff = c5_bundle.suffix
    for name in "bde":
        assert suff.accepts(W(c5, name))[0]
    for name in "ac":
        assert not suff.accepts(W(c5, name))[0]
    assert not suff.accepts(W(c5, "bc"))[0]
    assert suff.accepts(W(c5, "da"))[0]


def test_suffix_language_is_lex_with_empty_prefix(c5, c5_ray, c5_bundle):
    lex_words = set(c5_bundle.shortlex.enumerate_language(5))
    expected = {
        w for w in lex_words if prefix_suffix_decompose(c5, c5_ray, w).prefix == ()
    }
    assert set(c5_bundle.suffix.enumerate_language(5)) == expected


def test_geo_suffix_machine(c5, c5_bundle):
    gs = c5_bundle.geo_suffix
    assert gs.accepts(W(c5, "bd"))[0]
    assert gs.accepts(W(c5, "db"))[0]
    assert not gs.accepts(W(c5, "cb"))[0]
    for s in gs.accepting:
        assert gs.transitions[s], "dead-end state in the geodesic suffix machine"


def test_geo_suffix_dead_end_detection():
    # path graph a-b-c: removing {b} separates, the build must refuse
    g = DefiningGraph.from_edges("abc", [("a", "b"), ("b", "c")])
    ray = Ray(*g.letters_named("a", "c"))
    with pytest.raises(DeadEndError):
        build_geo_suffix_machine(g, ray)


def test_state_count_bounds(c5_bundle, theta_bundle):
    for bundle in (c5_bundle, theta_bundle):
        q = bundle.graph.size
        assert bundle.geodesic.num_states <= 2**q
        assert bundle.shortlex.num_states <= 2**q


def test_state_report_keys(c5_bundle):
    report = c5_bundle.state_report()
    assert set(report) == {
        "geodesic", "shortlex", "suffix", "geo_suffix",
        "horo_1234", "horo_1256", "horo_odd", "horo_even",
        "geo_horo_1234", "geo_horo_1256",
    }
    assert all(v > 0 for v in report.values())


def test_horocyclic_language_inclusion(c5, c5_bundle):
    # shortlex variant is contained in the geodesic variant
    m = c5_bundle.horocyclic.m_1234
    geo_m = c5_bundle.geo_horocyclic[0]
    for w in m.enumerate_language(5):
        assert geo_m.accepts(w)[0]
    # the geodesic variant keeps both orders of a commuting pair
    assert geo_m.accepts(W(c5, "db"))[0] or geo_m.accepts(W(c5, "bd"))[0]
    assert m.accepts(())[0] and geo_m.accepts(())[0]
    for machine in (c5_bundle.horocyclic.m_1256, c5_bundle.horocyclic.m_odd, c5_bundle.horocyclic.m_even):
        assert machine.accepts(())[0]


def test_wheel_bundle_builds(wheel5_bundle):
    report = wheel5_bundle.state_report()
    assert report["horo_odd"] > 0
