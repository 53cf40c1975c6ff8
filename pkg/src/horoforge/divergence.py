"""The divergence graph: growth classification, the cancellation machine,
and the close-successor edge criterion.

Two horosphere words span a divergence edge when their successor level sets
stay within bounded distance forever. The checkable criterion: feed the two
horocyclic suffixes through the cancellation machine, which either certifies
a permanently non-commuting pair or returns the uncancelable clique K plus
the letters one extra successor can cancel; the pair is an edge exactly when
some non-adjacent letter pair commuting with K is writable from both final
S-states.

The cancellation machine processes letter pairs through five sub-steps
(cursor bookkeeping, owner flips, pending buckets, clique absorption). The
bucket total stays below the clique size, so the memoized transition table
is finite. The step-5 flip test runs before step-4 clique insertions commit;
behavioral equivalence with the brute-force oracle is enforced by tests, not
argued from the write-up.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .fsm import Fsm
from .graphdef import DefiningGraph, letters_of, max_clique_size
from .horocyclic import (
    HorocyclicSuffix,
    SStateCache,
    greedy_segment,
    horocyclic_delete,
    horocyclic_form_for,
    horocyclic_insert,
    segment_by_deep_normal_form,
    startup_self_check,
)
from .machines import FORM_1234, FORM_1256, MachineBundle
from .rays import Ray
from .rips import DIVERGENCE_KIND, HorosphereGraph, canonical_sort
from .words import Word, WordError, geo_last_letters_mask, normalize, pretty

LARGE = "large"
PRELARGE = "prelarge"
SMALL = "small"

RADIUS_TOLERANCE = 1e-9
BORDERLINE_TOLERANCE = 1e-6
POWER_ITERATION_CAP = 100_000
POWER_ITERATION_TOL = 1e-12


class SpectralRadiusError(RuntimeError):
    pass


def _tarjan_sccs(n: int, succ: list[list[int]]) -> list[int]:
    """Iterative Tarjan; returns the SCC id of each node (reverse topological)."""
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    scc_of = [-1] * n
    counter = 0
    scc_count = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        while work:
            node, pi = work.pop()
            if pi == 0:
                index[node] = low[node] = counter
                counter += 1
                stack.append(node)
                on_stack[node] = True
            recurse = False
            for out_i in range(pi, len(succ[node])):
                t = succ[node][out_i]
                if index[t] == -1:
                    work.append((node, out_i + 1))
                    work.append((t, 0))
                    recurse = True
                    break
                if on_stack[t]:
                    low[node] = min(low[node], index[t])
            if recurse:
                continue
            if low[node] == index[node]:
                while True:
                    x = stack.pop()
                    on_stack[x] = False
                    scc_of[x] = scc_count
                    low[x] = low[node]
                    if x == node:
                        break
                scc_count += 1
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
    return scc_of


def _spectral_radius(mat: np.ndarray, label: str) -> float:
    """Perron root by power iteration on mat + I (the shift makes periodic
    blocks converge), all-ones start, then subtract the shift."""
    n = mat.shape[0]
    shifted = mat.astype(np.float64) + np.eye(n)
    vec = np.ones(n)
    prev = 0.0
    for _ in range(POWER_ITERATION_CAP):
        nxt = shifted @ vec
        norm = float(np.max(nxt))
        if norm == 0.0:
            return 0.0
        vec = nxt / norm
        if abs(norm - prev) <= POWER_ITERATION_TOL * max(1.0, norm):
            return norm - 1.0
        prev = norm
    raise SpectralRadiusError(f"power iteration did not converge for SCC {label}")


@dataclass(frozen=True)
class StateClassification:
    labels: tuple[str, ...]  # per machine state id
    scc_of: tuple[int, ...]
    radii: tuple[float, ...]  # per SCC
    max_radius: float

    def label_of(self, state: int) -> str:
        return self.labels[state]

    @property
    def has_small(self) -> bool:
        return SMALL in self.labels

    def counts(self) -> dict[str, int]:
        out = {LARGE: 0, PRELARGE: 0, SMALL: 0}
        for lbl in self.labels:
            out[lbl] += 1
        return out


def classify_states(machine: Fsm) -> StateClassification:
    """Large / pre-large / small classification of the shortlex states.

    Large states sit in an SCC whose Perron root attains the maximum;
    pre-large states reach such an SCC along a directed path.
    """
    n = machine.num_states
    succ = [sorted(set(machine.transitions[s].values())) for s in range(n)]
    scc_of = _tarjan_sccs(n, succ)
    n_scc = max(scc_of) + 1 if n else 0
    members: list[list[int]] = [[] for _ in range(n_scc)]
    for s, c in enumerate(scc_of):
        members[c].append(s)
    radii = []
    for c in range(n_scc):
        nodes = members[c]
        pos = {s: i for i, s in enumerate(nodes)}
        mat = np.zeros((len(nodes), len(nodes)), dtype=np.int64)
        for s in nodes:
            for t in machine.transitions[s].values():
                if scc_of[t] == c:
                    mat[pos[s], pos[t]] += 1
        radii.append(_spectral_radius(mat, label=str(c)))
    max_radius = max(radii) if radii else 0.0
    is_large_scc = [abs(r - max_radius) <= RADIUS_TOLERANCE * max(max_radius, 1.0) for r in radii]
    for c, r in enumerate(radii):
        gap = abs(r - max_radius) / max(max_radius, 1.0)
        if RADIUS_TOLERANCE < gap <= BORDERLINE_TOLERANCE:
            warnings.warn(
                f"SCC {c} has spectral radius within {gap:.2e} of the maximum; "
                "large-state classification may be unstable"
            )
    # condensation reachability toward large SCCs
    reaches_large = list(is_large_scc)
    scc_succ: list[set[int]] = [set() for _ in range(n_scc)]
    for s in range(n):
        for t in machine.transitions[s].values():
            if scc_of[s] != scc_of[t]:
                scc_succ[scc_of[s]].add(scc_of[t])
    # Tarjan emits SCCs in reverse topological order: successors come first
    for c in range(n_scc):
        if not reaches_large[c] and any(reaches_large[d] for d in scc_succ[c]):
            reaches_large[c] = True
    labels = []
    for s in range(n):
        c = scc_of[s]
        if is_large_scc[c]:
            labels.append(LARGE)
        elif reaches_large[c]:
            labels.append(PRELARGE)
        else:
            labels.append(SMALL)
    return StateClassification(
        labels=tuple(labels), scc_of=tuple(scc_of), radii=tuple(radii), max_radius=max_radius
    )


def check_distance3_condition(g: DefiningGraph) -> tuple[bool, int | None]:
    """True when every vertex has another vertex at graph distance >= 3;
    otherwise returns a failing vertex as witness."""
    for v in range(g.size):
        dist = {v: 0}
        frontier = [v]
        while frontier:
            nxt = []
            for x in frontier:
                for y in letters_of(g.link_masks[x]):
                    if y not in dist:
                        dist[y] = dist[x] + 1
                        nxt.append(y)
            frontier = nxt
        if all(d <= 2 for d in dist.values()) and len(dist) == g.size:
            return False, v
    return True, None


@dataclass(frozen=True)
class CancellationResult:
    """Outcome of a cancellation run that did not certify divergence."""

    uncancelable: frozenset[int]  # the clique K
    cancelable: Word  # letters one successor of the other side cancels, in order
    owner: str  # 'w' or 'v': which input word the cancelable letters belong to


UNCANCELABLE_PAIR = None  # sentinel result for a certified non-edge


_FAIL = "FAIL"


class CancellationEngine:
    """The machine computing K(v,w) and the cancelable word.

    States are (buckets, K, owner bit, two slot cursors); inputs are letter
    pairs annotated with each word's slot. Transitions are memoized, which
    realizes the machine lazily instead of enumerating its states up front.
    Inputs are not validated as horocyclic suffixes; callers guarantee that.
    """

    def __init__(self, g: DefiningGraph):
        self.g = g
        self.clique_bound = max_clique_size(g)
        self._memo: dict = {}

    # state tuple: (buckets 4-tuple of letter tuples, K mask, owner, n_w, n_v)

    @staticmethod
    def initial_state():
        return ((), (), (), ()), 0, 0, -1, -1

    def run(self, w_letters, w_slots, v_letters, v_slots):
        """Feed the two slot-annotated streams; None means uncancelable pair."""
        if len(w_letters) != len(v_letters):
            raise ValueError("cancellation engine needs equal-length input streams")
        state = self.initial_state()
        for a_k, s_k, a_l, s_l in zip(w_letters, w_slots, v_letters, v_slots):
            key = (state, a_k, s_k, a_l, s_l)
            nxt = self._memo.get(key)
            if nxt is None:
                nxt = self._step(state, a_k, s_k, a_l, s_l)
                self._memo[key] = nxt
            if nxt == _FAIL:
                return UNCANCELABLE_PAIR
            state = nxt
        return self._conclude(state)

    # -- helpers -------------------------------------------------------------

    def _commutes(self, a: int, b: int) -> bool:
        return bool(self.g.link_masks[a] >> b & 1)

    def _add_to_k(self, k_mask: int, letter: int, buckets) -> int | None:
        """Absorb a letter into the uncancelable clique; None when that
        creates a non-commuting (or duplicated) uncancelable pair."""
        if k_mask & ~self.g.link_masks[letter]:
            return None
        for bucket in buckets:
            for x in bucket:
                if not self._commutes(letter, x):
                    return None
        return k_mask | (1 << letter)

    def _reachable_first(self, bucket) -> list[int]:
        """Positions whose letter commutes past everything before it."""
        out = []
        for i, x in enumerate(bucket):
            if all(self._commutes(x, bucket[j]) for j in range(i)):
                out.append(i)
        return out

    def _step(self, state, a_k, s_k, a_l, s_l):
        buckets, k_mask, owner, n_w, n_v = state
        buckets = [list(b) for b in buckets]
        if owner == 0:
            adding, a_slot = a_k, s_k
            canceling, c_slot = a_l, s_l
            prev_c = n_v
        else:
            adding, a_slot = a_l, s_l
            canceling, c_slot = a_k, s_k
            prev_c = n_w
        n_w2, n_v2 = s_k, s_l

        def pack(owner_bit):
            return tuple(tuple(b) for b in buckets), k_mask, owner_bit, n_w2, n_v2

        # substep 1: the canceling word moved on; owner letters left behind in
        # earlier subwords can no longer cancel
        if c_slot > prev_c:
            for s in range(c_slot):
                moved = buckets[s]
                buckets[s] = []
                for x in moved:
                    k_mask = self._add_to_k(k_mask, x, buckets)
                    if k_mask is None:
                        return _FAIL
        # substep 2: canceling word strictly ahead of the adding word; the
        # laggard's letter cannot cancel anything, ownership passes
        if c_slot > a_slot:
            if any(buckets):
                raise AssertionError("owner buckets survived a cursor overtake")
            k_mask = self._add_to_k(k_mask, adding, buckets)
            if k_mask is None:
                return _FAIL
            if k_mask & ~self.g.link_masks[canceling]:
                return _FAIL
            buckets[c_slot] = [canceling]
            return pack(1 - owner)
        # substep 3: the adding letter joins its bucket
        if k_mask & ~self.g.link_masks[adding]:
            return _FAIL
        buckets[a_slot].append(adding)
        # substep 4: the canceling letter cancels a reachable copy...
        bucket = buckets[c_slot]
        cancel_pos = None
        for i in self._reachable_first(bucket):
            if bucket[i] == canceling:
                cancel_pos = i
                break
        if cancel_pos is not None:
            skipped = bucket[:cancel_pos]
            buckets[c_slot] = bucket[cancel_pos + 1 :]
            for x in skipped:
                k_mask = self._add_to_k(k_mask, x, buckets)
                if k_mask is None:
                    return _FAIL
            return pack(owner)
        # ...or flips the bit (substep 5, checked before the step-4 insertions
        # commit), or becomes uncancelable
        if a_slot == c_slot and all(
            self._commutes(canceling, x) and x < canceling for x in bucket
        ):
            moved = list(bucket)
            buckets[c_slot] = []
            for x in moved:
                k_mask = self._add_to_k(k_mask, x, buckets)
                if k_mask is None:
                    return _FAIL
            if k_mask & ~self.g.link_masks[canceling]:
                return _FAIL
            buckets[c_slot] = [canceling]
            return pack(1 - owner)
        k_mask = self._add_to_k(k_mask, canceling, buckets)
        if k_mask is None:
            return _FAIL
        bucket = buckets[c_slot]
        doomed = [
            i
            for i in self._reachable_first(bucket)
            if self._commutes(bucket[i], canceling) and bucket[i] < canceling
        ]
        if doomed:
            keep = [x for i, x in enumerate(bucket) if i not in doomed]
            moved = [bucket[i] for i in doomed]
            buckets[c_slot] = keep
            for x in moved:
                k_mask = self._add_to_k(k_mask, x, buckets)
                if k_mask is None:
                    return _FAIL
        total_pending = sum(len(b) for b in buckets)
        if total_pending > self.clique_bound:
            raise AssertionError("pending letters exceeded the clique bound")
        return pack(owner)

    def _conclude(self, state):
        buckets, k_mask, owner, _, _ = state
        buckets = [list(b) for b in buckets]
        # the trailing prefix separators make everything before the last
        # subword uncancelable
        for s in range(3):
            for x in list(buckets[s]):
                buckets[s].remove(x)
                k_mask = self._add_to_k(k_mask, x, buckets)
                if k_mask is None:
                    return UNCANCELABLE_PAIR
        return CancellationResult(
            uncancelable=frozenset(letters_of(k_mask)),
            cancelable=tuple(buckets[3]),
            owner="w" if owner == 0 else "v",
        )


def _without(buckets, slot, idx):
    out = [list(b) for b in buckets]
    del out[slot][idx]
    return out


def close_successors_decision_words(
    bundle: MachineBundle, w: Word, v_prime: Word, k_letters: frozenset[int]
) -> bool:
    """Word-level decision: given w and a successor v' whose difference from
    w reduces exactly to the clique K, do the two have close successors?"""
    from .analysis import limit_state

    lex = bundle.shortlex
    return close_successors_decision(
        bundle.graph,
        k_letters,
        lex.payloads[limit_state(bundle, w)],
        lex.payloads[limit_state(bundle, v_prime)],
    )


def close_successors_decision(
    g: DefiningGraph, k_letters: frozenset[int], forbidden_a: int, forbidden_b: int
) -> bool:
    """True when some non-adjacent letter pair, each commuting with all of K,
    has a member writable from both final S-states."""
    commuting = [
        a
        for a in range(g.size)
        if all(g.adjacent(a, c) for c in k_letters)
    ]
    cset = set(commuting)
    blocked = forbidden_a | forbidden_b
    for a in commuting:
        if blocked >> a & 1:
            continue
        if any(not g.adjacent(a, b) and a != b for b in cset):
            return True
    return False


class DivergenceContext:
    """Machines, classification, S-states, and the cancellation engine for
    one (graph, ray); built once and reused across generation calls."""

    def __init__(self, bundle: MachineBundle, self_check_len: int = 3):
        self.bundle = bundle
        self.graph = bundle.graph
        self.ray = bundle.ray
        startup_self_check(bundle, max_len=self_check_len)
        self.classification = classify_states(bundle.shortlex)
        self.s_states = SStateCache(bundle)
        self.engine = CancellationEngine(bundle.graph)
        self.clique = max_clique_size(bundle.graph)
        self.diff_length_skips = 0

    # -- successor construction ----------------------------------------------

    def extended_state(self, h: HorocyclicSuffix, letters: Word) -> int:
        return self.s_states.extend(self.s_states.state_of(h), letters)

    def maximal_cancellation_successor(
        self, base: HorocyclicSuffix, k: int, cancelable: Word
    ) -> tuple[HorocyclicSuffix, int]:
        """Append the cancelable letters to ``base`` as successor steps.

        A ray letter that commutes with the whole suffix extends the prefix
        (the form flips); anything else is a horocyclic insertion. Returns
        the new suffix and its Busemann value.
        """
        g, ray = self.graph, self.ray
        cur, k_cur = base, k
        for a in cancelable:
            suffix_mask = 0
            for x in cur.word:
                suffix_mask |= 1 << x
            if a in (ray.i, ray.j) and suffix_mask & ~g.link_masks[a] == 0:
                k_cur += 1
                form = horocyclic_form_for(k_cur, len(cur.word))
                cur = segment_by_deep_normal_form(g, ray, normalize(g, cur.word), form)
            else:
                k_cur += 1
                cur = horocyclic_insert(g, ray, cur, a)
        return cur, k_cur

    # -- cancellation entry points ---------------------------------------------

    def run_cancellation_same_length(self, w_h: HorocyclicSuffix, v_h: HorocyclicSuffix):
        """K(v,w), cancelable word and owner for equal-length suffixes, or
        None when a permanently non-commuting pair is certified."""
        if len(w_h.word) != len(v_h.word) or w_h.form != v_h.form:
            raise ValueError("same-length cancellation needs equal lengths and forms")
        return self.engine.run(
            w_h.word, w_h.slot_of_position(), v_h.word, v_h.slot_of_position()
        )

    def run_cancellation_diff_length(self, w_h: HorocyclicSuffix, v_h: HorocyclicSuffix, k: int):
        """Same machine for |w| > |v|: the shorter word's stream carries its
        uncanceled prefix letters."""
        gap = len(w_h.word) - len(v_h.word)
        if gap <= 0:
            raise ValueError("the first word must have the longer suffix")
        if w_h.slots[2]:
            return UNCANCELABLE_PAIR
        v_letters, v_slots = self._diff_stream(v_h, gap)
        return self.engine.run(w_h.word, w_h.slot_of_position(), v_letters, v_slots)

    # -- edge generators -------------------------------------------------------

    def _decide_pair(
        self,
        w_h: HorocyclicSuffix,
        w_stream,
        v_h: HorocyclicSuffix,
        v_stream,
        strict: bool = True,
    ) -> bool:
        result = self.engine.run(*w_stream, *v_stream)
        if result is UNCANCELABLE_PAIR:
            return False
        if result.owner == "w":
            owner_h, other_h = w_h, v_h
        else:
            owner_h, other_h = v_h, w_h
        try:
            extended = self.s_states.extend(self.s_states.state_of(other_h), result.cancelable)
        except WordError:
            if strict:
                raise AssertionError(
                    "maximal-cancellation successor letters were not writable for "
                    f"{pretty(self.graph, w_h.word)} vs {pretty(self.graph, v_h.word)}"
                ) from None
            # an unwritable pending letter certifies a non-edge in the
            # different-length regime; counted for diagnostics
            self.diff_length_skips += 1
            return False
        lex = self.bundle.shortlex
        return close_successors_decision(
            self.graph,
            result.uncancelable,
            lex.payloads[self.s_states.state_of(owner_h)],
            lex.payloads[extended],
        )

    def _equal_streams(self, h: HorocyclicSuffix):
        return h.word, h.slot_of_position()

    def divergence_edges_same_length(self, w_h: HorocyclicSuffix, k: int) -> set[Word]:
        """Edge targets of the same suffix length, via bounded backtracking."""
        out: set[Word] = set()
        w_stream = self._equal_streams(w_h)
        for v_word in self._same_length_candidates(w_h):
            if v_word == w_h.word:
                continue
            v_h = greedy_segment(self.graph, self.ray, w_h.form, v_word)
            if self._decide_pair(w_h, w_stream, v_h, self._equal_streams(v_h)):
                out.add(v_word)
        return out

    def _same_length_candidates(self, h: HorocyclicSuffix) -> set[Word]:
        g, ray = self.graph, self.ray
        depth = min(self.clique - 1, len(h.word))
        level = {h.word: h}
        bases: list[tuple[HorocyclicSuffix, int]] = []
        for d in range(1, depth + 1):
            nxt: dict[Word, HorocyclicSuffix] = {}
            for u in level.values():
                for a in letters_of(geo_last_letters_mask(g, u.word)):
                    shorter = horocyclic_delete(g, ray, u, a)
                    nxt.setdefault(shorter.word, shorter)
            level = nxt
            bases.extend((b, d) for b in level.values())
        machine = self.bundle.geo_horocyclic_for(h.form)
        out: set[Word] = set()
        for base, d in bases:
            frontier = {base.word: base}
            for _ in range(d):
                nxt: dict[Word, HorocyclicSuffix] = {}
                for u in frontier.values():
                    state = machine.run(u.word)
                    if state is None:
                        continue
                    for a in machine.allowed_letters(state):
                        grown = horocyclic_insert(g, ray, u, a)
                        nxt.setdefault(grown.word, grown)
                frontier = nxt
            out.update(frontier)
        return out

    def divergence_edges_diff_length(self, w_h: HorocyclicSuffix, k: int) -> set[Word]:
        """Edge targets with strictly shorter suffixes (generated from the
        longer side), after the constant-time gates."""
        g, ray = self.graph, self.ray
        if w_h.slots[2]:
            return set()
        gate_letter = ray.i if w_h.form == FORM_1234 else ray.j
        if any(not g.adjacent(gate_letter, x) for x in w_h.slots[3]):
            return set()
        out: set[Word] = set()
        m = len(w_h.word)
        w_stream = self._equal_streams(w_h)
        # gap one: backtrack then reinsert one letter fewer, in the other form
        other_form = FORM_1256 if w_h.form == FORM_1234 else FORM_1234
        for v_word in self._gap_one_candidates(w_h, other_form):
            v_h = greedy_segment(g, ray, other_form, v_word)
            if self._decide_pair(w_h, w_stream, v_h, self._diff_stream(v_h, m - len(v_word)), strict=False):
                out.add(v_word)
        # gap two or more: only a pure w1 w2 word can reach shorter suffixes
        if not w_h.slots[3] and m >= 2:
            for length in range(0, min(m - 2, max(self.clique - 2, 0)) + 1):
                form = horocyclic_form_for(k, length)
                for v_word in self._all_horocyclic_words(form, length):
                    v_h = greedy_segment(g, ray, form, v_word)
                    if self._decide_pair(
                        w_h, w_stream, v_h, self._diff_stream(v_h, m - length), strict=False
                    ):
                        out.add(v_word)
        return out

    def _gap_one_candidates(self, h: HorocyclicSuffix, other_form: str) -> set[Word]:
        g, ray = self.graph, self.ray
        m = len(h.word)
        if m == 0:
            return set()
        depth = min(self.clique - 1, m)
        level = {h.word: h}
        out: set[Word] = set()
        machine = self.bundle.geo_horocyclic_for(other_form)
        for d in range(1, depth + 1):
            nxt: dict[Word, HorocyclicSuffix] = {}
            for u in level.values():
                for a in letters_of(geo_last_letters_mask(g, u.word)):
                    shorter = horocyclic_delete(g, ray, u, a)
                    nxt.setdefault(shorter.word, shorter)
            level = nxt
            # re-express each base in the other form before growing it back
            for base in level.values():
                reformed = segment_by_deep_normal_form(g, ray, normalize(g, base.word), other_form)
                frontier = {reformed.word: reformed}
                for _ in range(d - 1):
                    grown: dict[Word, HorocyclicSuffix] = {}
                    for u in frontier.values():
                        state = machine.run(u.word)
                        if state is None:
                            continue
                        for a in machine.allowed_letters(state):
                            nxt_h = horocyclic_insert(g, ray, u, a)
                            grown.setdefault(nxt_h.word, nxt_h)
                    frontier = grown
                out.update(word for word in frontier if len(word) == m - 1)
        return out

    def _all_horocyclic_words(self, form: str, length: int) -> list[Word]:
        machine = self.bundle.horocyclic_for(form)
        return [w for w in machine.enumerate_language(length) if len(w) == length]

    def _diff_stream(self, v_h: HorocyclicSuffix, gap: int):
        """Input stream for the shorter word: its own letters plus the
        uncanceled prefix letters, in reading order of the deep form.

        The last uncanceled prefix letter reads between the third and fourth
        subwords; any earlier ones read right after the block and join the
        third slot.
        """
        ray = self.ray
        end_letter = ray.j if v_h.form == FORM_1234 else ray.i
        extras = []
        letter = end_letter
        for _ in range(gap):
            extras.append(letter)
            letter = ray.i if letter == ray.j else ray.j
        extras.reverse()
        v1, v2, v3, v4 = v_h.slots
        letters = v1 + v2 + tuple(extras[:-1]) + v3 + (extras[-1],) + v4
        slots = (
            (0,) * len(v1)
            + (1,) * len(v2)
            + (2,) * (len(extras) - 1)
            + (3,) * (len(v3) + 1 + len(v4))
        )
        return letters, slots

    # -- vertex enumeration ---------------------------------------------------

    def enumerate_vertices(self, k: int, max_len: int) -> list[HorocyclicSuffix]:
        machine = self.bundle.horocyclic.m_odd if k % 2 else self.bundle.horocyclic.m_even
        out = []
        for word in machine.enumerate_language(max_len):
            form = horocyclic_form_for(k, len(word))
            out.append(greedy_segment(self.graph, self.ray, form, word))
        out.sort(key=lambda h: (len(h.word), h.word))
        return out

    def vertex_class(self, h: HorocyclicSuffix) -> str:
        return self.classification.label_of(self.s_states.state_of(h))


def enumerate_horocyclic_suffixes(ctx: DivergenceContext, k: int, max_len: int):
    return ctx.enumerate_vertices(k, max_len)


def generate_divergence_graph(
    g: DefiningGraph,
    ray: Ray,
    k: int,
    max_suffix_len: int,
    *,
    ctx: DivergenceContext | None = None,
    allow_small_states: bool = False,
    threads: int = 1,
) -> HorosphereGraph:
    """Divergence graph on the k-horosphere, truncated at the suffix cap.

    Vertices are horocyclic suffixes whose S-state is large or pre-large;
    small states are filtered (with a warning) unless the caller opts out.
    Edges come from the same-length and shorter-suffix generators, each pair
    settled by the cancellation machine plus the close-successor decision.
    Per-vertex edge generation is pure over the shared machine bundle, so it
    may run on a thread pool; results are merged order-independently.
    """
    ctx = ctx or DivergenceContext(MachineBundle(g, ray))
    if ctx.classification.has_small and not allow_small_states:
        warnings.warn(
            "shortlex machine has small states; divergence-graph vertices at "
            "those states are filtered"
        )
    vertices: list[HorocyclicSuffix] = []
    for h in ctx.enumerate_vertices(k, max_suffix_len):
        if allow_small_states or ctx.vertex_class(h) != SMALL:
            vertices.append(h)
    index = {h.word: i for i, h in enumerate(vertices)}

    def edges_of(item: tuple[int, HorocyclicSuffix]) -> set[tuple[int, int]]:
        i, h = item
        out: set[tuple[int, int]] = set()
        for target in ctx.divergence_edges_same_length(h, k) | ctx.divergence_edges_diff_length(h, k):
            j = index.get(target)
            if j is not None and j != i:
                out.add((min(i, j), max(i, j)))
        return out

    edges: set[tuple[int, int]] = set()
    if threads > 1 and len(vertices) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            for chunk in pool.map(edges_of, enumerate(vertices)):
                edges |= chunk
    else:
        for item in enumerate(vertices):
            edges |= edges_of(item)
    words = [h.word for h in vertices]
    assert words == canonical_sort(words)
    return HorosphereGraph(
        kind=DIVERGENCE_KIND,
        graph=g,
        ray=ray,
        k=k,
        max_suffix_len=max_suffix_len,
        vertices=tuple(words),
        edges=tuple(sorted(edges)),
        meta={
            "small_states": ctx.classification.has_small,
            "slots": {h.word: h.describe(g) for h in vertices},
        },
    )
