from __future__ import annotations

import itertools

import pytest

from horoforge.analysis import close_successors_oracle, word_reduce
from horoforge.divergence import (
    LARGE,
    PRELARGE,
    SMALL,
    DivergenceContext,
    UNCANCELABLE_PAIR,
    check_distance3_condition,
    classify_states,
    close_successors_decision,
    generate_divergence_graph,
)
from horoforge.fsm import Fsm
from horoforge.graphdef import max_clique_size
from horoforge.horocyclic import greedy_segment, horocyclic_form_for
from horoforge.rays import assemble_word
from horoforge.words import normalize, word_distance

from conftest import W


@pytest.fixture(scope="module")
def c5_ctx(c5_bundle):
    return DivergenceContext(c5_bundle)


@pytest.fixture(scope="module")
def c6_ctx(c6_bundle):
    return DivergenceContext(c6_bundle)


# -- classification --------------------------------------------------------


def _chain_machine(block1: int, block2: int) -> Fsm:
    """Block 1 is a directed cycle (radius 1); block 2 has two loops per
    state (radius 2); one edge crosses from block 1 to block 2."""
    n = block1 + block2
    transitions: list[dict[int, int]] = []
    for s in range(block1):
        transitions.append({0: (s + 1) % block1})
    transitions[0][1] = block1  # bridge
    for s in range(block1, n):
        transitions.append({0: s, 1: s})
    return Fsm(2, [f"s{i}" for i in range(n)], 0, frozenset(range(n)), transitions)


def test_classify_single_scc_all_large():
    m = Fsm(2, ["x"], 0, frozenset({0}), [{0: 0, 1: 0}])
    cls = classify_states(m)
    assert cls.labels == (LARGE,)
    assert cls.max_radius == pytest.approx(2.0)


def test_classify_two_block_chain():
    m = _chain_machine(3, 2)
    cls = classify_states(m)
    assert cls.labels[:3] == (PRELARGE, PRELARGE, PRELARGE)
    assert cls.labels[3:] == (LARGE, LARGE)
    assert cls.max_radius == pytest.approx(2.0)


def test_classify_small_states():
    # a dead tail that cannot reach the large block
    transitions = [{0: 1}, {0: 0, 1: 2}, {0: 2, 1: 2}, {0: 3}]
    # state 3 unreachable from the cycle; make it a separate weak component head
    m = Fsm(2, list("abcd"), 0, frozenset(range(4)), transitions)
    cls = classify_states(m)
    assert cls.labels[2] == LARGE
    assert cls.labels[0] == PRELARGE and cls.labels[1] == PRELARGE


def test_c7_classification(c7_bundle):
    cls = classify_states(c7_bundle.shortlex)
    counts = cls.counts()
    assert counts[SMALL] == 0
    assert counts[PRELARGE] == 1
    assert cls.label_of(c7_bundle.shortlex.start) == PRELARGE


def test_distance3_condition(c5, c7):
    ok5, witness5 = check_distance3_condition(c5)
    assert not ok5 and witness5 is not None
    ok7, witness7 = check_distance3_condition(c7)
    assert ok7 and witness7 is None


# -- the cancellation engine -------------------------------------------------


def run_equal(ctx, w_h, v_h):
    return ctx.engine.run(w_h.word, w_h.slot_of_position(), v_h.word, v_h.slot_of_position())


def seg(ctx, k, text):
    g = ctx.graph
    word = W(g, text)
    return greedy_segment(g, ctx.ray, horocyclic_form_for(k, len(word)), word)


def test_engine_identical_words_cancel_fully(c5_ctx):
    h = seg(c5_ctx, 0, "eb")
    result = run_equal(c5_ctx, h, h)
    assert result is not UNCANCELABLE_PAIR
    assert result.uncancelable == frozenset()
    assert result.cancelable == ()


def test_engine_noncommuting_pair(c5_ctx):
    hb, hd = seg(c5_ctx, 1, "b"), seg(c5_ctx, 1, "d")
    assert run_equal(c5_ctx, hb, hd) is UNCANCELABLE_PAIR


def test_engine_cancelable_word_is_sound(c5_ctx):
    g, ray = c5_ctx.graph, c5_ctx.ray
    k = 0
    hw, hv = seg(c5_ctx, k, "eb"), seg(c5_ctx, k, "ec")
    result = run_equal(c5_ctx, hw, hv)
    assert result is not UNCANCELABLE_PAIR
    w_word = normalize(g, assemble_word(g, ray, normalize(g, hw.word), k))
    v_word = normalize(g, assemble_word(g, ray, normalize(g, hv.word), k))
    # appending the cancelable word to the non-owner leaves exactly K
    if result.owner == "w":
        owner_word = w_word
        extended = normalize(g, v_word + result.cancelable)
    else:
        owner_word = v_word
        extended = normalize(g, w_word + result.cancelable)
    diff = word_reduce(g, owner_word, extended)
    assert sorted(diff) == sorted(result.uncancelable)
    assert word_distance(g, owner_word, extended) == len(result.uncancelable)


def test_engine_owner_symmetry(c5_ctx):
    k = 0
    pairs = [("eb", "ec"), ("db", "de"), ("be", "bd")]
    for a, b in pairs:
        ha, hb = seg(c5_ctx, k, a), seg(c5_ctx, k, b)
        r1 = run_equal(c5_ctx, ha, hb)
        r2 = run_equal(c5_ctx, hb, ha)
        assert (r1 is UNCANCELABLE_PAIR) == (r2 is UNCANCELABLE_PAIR)
        if r1 is not UNCANCELABLE_PAIR:
            assert r1.uncancelable == r2.uncancelable
            assert r1.cancelable == r2.cancelable
            assert {r1.owner, r2.owner} in ({"w", "v"}, {"w"}, {"v"})


def test_cancellation_soundness_exhaustive(c5_ctx):
    """Whenever the engine returns (K, cancelable, owner), appending the
    cancelable word to the other side leaves exactly the K letters."""
    g, ray = c5_ctx.graph, c5_ctx.ray
    k = 0
    words = [w for w in c5_ctx.bundle.horocyclic.m_even.enumerate_language(3)]
    suffixes = [seg(c5_ctx, k, "".join(g.names[a] for a in w) if w else "") for w in words]
    by_len = {}
    for h in suffixes:
        by_len.setdefault(len(h.word), []).append(h)
    checked = 0
    for _, group in sorted(by_len.items()):
        for hw, hv in itertools.combinations(group, 2):
            result = run_equal(c5_ctx, hw, hv)
            if result is UNCANCELABLE_PAIR:
                continue
            w_word = normalize(g, assemble_word(g, ray, normalize(g, hw.word), k))
            v_word = normalize(g, assemble_word(g, ray, normalize(g, hv.word), k))
            if result.owner == "w":
                diff = word_reduce(g, w_word, normalize(g, v_word + result.cancelable))
            else:
                diff = word_reduce(g, normalize(g, w_word + result.cancelable), v_word)
            assert sorted(diff) == sorted(result.uncancelable), (hw.word, hv.word)
            checked += 1
    assert checked > 10


def test_cancellation_completeness_exhaustive(c5_ctx, c5_bundle):
    """The oracle never cancels strictly more letters than the engine's
    accounting allows, on all same-length pairs with suffixes <= 3."""
    g, ray = c5_ctx.graph, c5_ctx.ray
    k = 0
    bound = 2 * max_clique_size(g) - 2
    words = list(c5_ctx.bundle.horocyclic.m_even.enumerate_language(3))
    by_len = {}
    for w in words:
        by_len.setdefault(len(w), []).append(w)
    for _, group in sorted(by_len.items()):
        for wa, wb in itertools.combinations(group, 2):
            ha = greedy_segment(g, ray, horocyclic_form_for(k, len(wa)), wa)
            hb = greedy_segment(g, ray, horocyclic_form_for(k, len(wb)), wb)
            result = run_equal(c5_ctx, ha, hb)
            a_word = normalize(g, assemble_word(g, ray, normalize(g, wa), k))
            b_word = normalize(g, assemble_word(g, ray, normalize(g, wb), k))
            verdict = close_successors_oracle(c5_bundle, a_word, b_word, 6, bound)
            # -1 marks an emptied level; real minima can never beat |K|
            reached = [m for m in verdict.level_minima if m >= 0]
            if result is UNCANCELABLE_PAIR:
                assert all(m > 0 for m in reached), (wa, wb)
            else:
                floor = len(result.uncancelable)
                assert all(m >= floor for m in reached), (wa, wb, result)


# -- edge generation ----------------------------------------------------------


def test_same_length_edges_c5_examples(c5_ctx):
    hb = seg(c5_ctx, 0, "b")
    targets = c5_ctx.divergence_edges_same_length(hb, 0)
    assert W(c5_ctx.graph, "d") not in targets  # uncancelable pair
    assert W(c5_ctx.graph, "e") not in targets


def test_diff_length_gates(c5_ctx):
    # a vertex with nonempty third slot has no shorter-suffix edges
    g = c5_ctx.graph
    for word in c5_ctx.bundle.horocyclic.m_even.enumerate_language(3):
        h = greedy_segment(g, c5_ctx.ray, horocyclic_form_for(0, len(word)), word)
        if h.slots[2]:
            assert c5_ctx.divergence_edges_diff_length(h, 0) == set()


def test_divergence_edge_bound(c5_ctx, c6_ctx, wheel5_bundle):
    contexts = [(c5_ctx, 0), (c6_ctx, 0), (DivergenceContext(wheel5_bundle), 0)]
    for ctx, k in contexts:
        g, ray = ctx.graph, ctx.ray
        bound = 2 * max_clique_size(g) - 2
        h = generate_divergence_graph(g, ray, k, 3, ctx=ctx)
        for u, v in h.edge_words():
            du = normalize(g, assemble_word(g, ray, normalize(g, u), k))
            dv = normalize(g, assemble_word(g, ray, normalize(g, v), k))
            d = word_distance(g, du, dv)
            assert 0 < d <= bound
            if max_clique_size(g) == 2:
                assert d == 2


def test_divergence_edges_match_oracle_c5(c5_ctx, c5_bundle):
    g, ray = c5_ctx.graph, c5_ctx.ray
    bound = 2 * max_clique_size(g) - 2
    h = generate_divergence_graph(g, ray, 0, 3, ctx=c5_ctx)
    edges = {(h.vertices[i], h.vertices[j]) for i, j in h.edges}
    asm = {w: normalize(g, assemble_word(g, ray, normalize(g, w), 0)) for w in h.vertices}
    for u, v in itertools.combinations(h.vertices, 2):
        verdict = close_successors_oracle(c5_bundle, asm[u], asm[v], 8, bound)
        is_edge = (u, v) in edges or (v, u) in edges
        assert is_edge == verdict.is_close, (u, v, verdict.level_minima)


def test_divergence_symmetry_and_dedup(c6_ctx):
    g, ray = c6_ctx.graph, c6_ctx.ray
    h = generate_divergence_graph(g, ray, 1, 3, ctx=c6_ctx)
    assert all(i < j for i, j in h.edges)
    assert len(set(h.edges)) == len(h.edges)
    # same-length relation is symmetric
    by_word = {w: i for i, w in enumerate(h.vertices)}
    for w in h.vertices:
        hw = greedy_segment(g, ray, horocyclic_form_for(1, len(w)), w)
        for t in c6_ctx.divergence_edges_same_length(hw, 1):
            if t in by_word:
                ht = greedy_segment(g, ray, horocyclic_form_for(1, len(t)), t)
                assert w in c6_ctx.divergence_edges_same_length(ht, 1)


def test_decision_function_needs_nonadjacent_pair(c5):
    # K = all of a letter's link leaves no commuting non-adjacent pair
    full = (1 << c5.size) - 1
    assert not close_successors_decision(c5, frozenset({0, 1}), 0, 0)  # a,b adjacent? K={a,b}
    assert close_successors_decision(c5, frozenset(), 0, 0)
    assert not close_successors_decision(c5, frozenset(), full, full)


def test_maximal_cancellation_successor_identity(c5_ctx):
    h = seg(c5_ctx, 0, "eb")
    out, k_out = c5_ctx.maximal_cancellation_successor(h, 0, ())
    assert out.word == h.word and k_out == 0


def test_cancellation_entry_points(c5_ctx):
    hw, hv = seg(c5_ctx, 0, "eb"), seg(c5_ctx, 0, "ec")
    result = c5_ctx.run_cancellation_same_length(hw, hv)
    assert result is not UNCANCELABLE_PAIR
    with pytest.raises(ValueError):
        c5_ctx.run_cancellation_same_length(hw, seg(c5_ctx, 1, "b"))
    longer, shorter = seg(c5_ctx, 0, "be"), seg(c5_ctx, 1, "b")
    out = c5_ctx.run_cancellation_diff_length(longer, shorter, 0)
    assert out is UNCANCELABLE_PAIR or out.uncancelable is not None
    with pytest.raises(ValueError):
        c5_ctx.run_cancellation_diff_length(shorter, longer, 0)


def test_wheel_divergence_against_oracle(wheel5_bundle):
    ctx = DivergenceContext(wheel5_bundle)
    g, ray = ctx.graph, ctx.ray
    bound = 2 * max_clique_size(g) - 2
    h = generate_divergence_graph(g, ray, 0, 2, ctx=ctx)
    edges = {(h.vertices[i], h.vertices[j]) for i, j in h.edges}
    asm = {w: normalize(g, assemble_word(g, ray, normalize(g, w), 0)) for w in h.vertices}
    for u, v in itertools.combinations(h.vertices, 2):
        verdict = close_successors_oracle(wheel5_bundle, asm[u], asm[v], 8, bound)
        is_edge = (u, v) in edges or (v, u) in edges
        assert is_edge == verdict.is_close, (u, v, verdict.level_minima)


def test_small_state_warning(wheel5_bundle):
    ctx = DivergenceContext(wheel5_bundle)
    assert ctx.classification.has_small
    with pytest.warns(UserWarning, match="small states"):
        generate_divergence_graph(ctx.graph, ctx.ray, 0, 2, ctx=ctx)


def test_c7_divergence_against_oracle(c7_bundle):
    ctx = DivergenceContext(c7_bundle)
    g, ray = ctx.graph, ctx.ray
    bound = 2 * max_clique_size(g) - 2
    for k in (0, 1):
        h = generate_divergence_graph(g, ray, k, 2, ctx=ctx)
        edges = {(h.vertices[i], h.vertices[j]) for i, j in h.edges}
        asm = {w: normalize(g, assemble_word(g, ray, normalize(g, w), k)) for w in h.vertices}
        for u, v in itertools.combinations(h.vertices, 2):
            verdict = close_successors_oracle(c7_bundle, asm[u], asm[v], 8, bound)
            is_edge = (u, v) in edges or (v, u) in edges
            assert is_edge == verdict.is_close, (k, u, v, verdict.level_minima)


def test_theta_divergence_against_oracle(theta_bundle):
    ctx = DivergenceContext(theta_bundle)
    g, ray = ctx.graph, ctx.ray
    bound = 2 * max_clique_size(g) - 2
    h = generate_divergence_graph(g, ray, 0, 2, ctx=ctx)
    edges = {(h.vertices[i], h.vertices[j]) for i, j in h.edges}
    asm = {w: normalize(g, assemble_word(g, ray, normalize(g, w), 0)) for w in h.vertices}
    for u, v in itertools.combinations(h.vertices, 2):
        verdict = close_successors_oracle(theta_bundle, asm[u], asm[v], 8, bound)
        is_edge = (u, v) in edges or (v, u) in edges
        assert is_edge == verdict.is_close, (u, v, verdict.level_minima)


def test_word_level_decision_wrapper(c5_ctx, c5_bundle):
    from horoforge.analysis import word_reduce
    from horoforge.divergence import close_successors_decision_words

    g, ray = c5_ctx.graph, c5_ctx.ray
    # the edge ("b", eps) at k=0: w = ab, and the successor b of eps leaves
    # the single uncancelable letter a; the decision must confirm closeness
    w = normalize(g, assemble_word(g, ray, W(g, "b"), 0))
    v_prime = W(g, "b")
    k_letters = frozenset(word_reduce(g, w, v_prime))
    assert k_letters == frozenset(W(g, "a"))
    assert close_successors_decision_words(c5_bundle, w, v_prime, k_letters)
