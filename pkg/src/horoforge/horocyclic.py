"""Horocyclic suffixes: segmentation, the two forms, and the S-state map.

A horosphere word, hit with a deep inverse power of the ray, stabilizes
into a normal form whose suffix letters fall into four slots around the
ray block. The segmentation is recovered two ways: a greedy linear scan
(used everywhere in generation) and a brute-force deep-translate
normalization (the oracle). The greedy scan is trusted only after the
startup self-check compares the two on every short suffix.
"""
from __future__ import annotations

from dataclasses import dataclass

from .graphdef import DefiningGraph
from .machines import FORM_1234, FORM_1256, MachineBundle, slot_alphabets
from .rays import Ray
from .words import Word, WordError, delete_last_copy, geo_last_letters_mask, normalize, pretty


def horocyclic_form_for(k: int, suffix_len: int) -> str:
    """Which form a suffix of the given length takes on the k-horosphere.

    The deep positive prefix has length 2n + k - s; the 1234 form carries an
    odd number of prefix letters, so the form is 1234 exactly when k + s is
    odd. The derivation is re-verified against brute-force segmentation at
    bundle startup.
    """
    return FORM_1234 if (k + suffix_len) % 2 else FORM_1256


@dataclass(frozen=True)
class HorocyclicSuffix:
    """A suffix word together with its validated 4-slot segmentation."""

    word: Word
    form: str
    slots: tuple[Word, Word, Word, Word]

    def __post_init__(self):
        if sum(len(s) for s in self.slots) != len(self.word):
            raise AssertionError("slot lengths do not add up")

    @property
    def slot_lengths(self) -> tuple[int, int, int, int]:
        return tuple(len(s) for s in self.slots)

    def slot_of_position(self) -> tuple[int, ...]:
        """Slot index (0..3) of each letter position."""
        out = []
        for idx, s in enumerate(self.slots):
            out.extend([idx] * len(s))
        return tuple(out)

    def describe(self, g: DefiningGraph) -> str:
        return "|".join(pretty(g, s) if s else "-" for s in self.slots)


def greedy_segment(g: DefiningGraph, ray: Ray, form: str, word: Word) -> HorocyclicSuffix:
    """Slot each letter by the forward scan the cancellation machine uses.

    The cursor only advances: a letter stays in the current slot when the
    slot alphabet allows it, otherwise it opens the first later slot whose
    entry rule admits it. Raises on words that are not horocyclic suffixes
    of this form.
    """
    alphas = slot_alphabets(g, ray, form)
    slots: tuple[list[int], ...] = ([], [], [], [])
    cur = -1  # no slot entered yet
    for a in word:
        if cur >= 0 and alphas.continue_masks[cur] >> a & 1:
            slots[cur].append(a)
            continue
        nxt = cur + 1
        while nxt < 4 and not alphas.start_masks[nxt] >> a & 1:
            nxt += 1
        if nxt >= 4:
            raise WordError(
                f"{pretty(g, word)} is not a {form} horocyclic suffix (letter {g.names[a]} fits no slot)"
            )
        cur = nxt
        slots[cur].append(a)
    return HorocyclicSuffix(word=word, form=form, slots=tuple(tuple(s) for s in slots))


def segment_by_deep_normal_form(
    g: DefiningGraph, ray: Ray, suffix: Word, form: str, depth: int | None = None
) -> HorocyclicSuffix:
    """Brute-force segmentation: normalize a deep ray translate and parse it.

    Multiplies by (a_j a_i)^n, plus one leading a_j for the odd-prefix form,
    then reads the slots off the stabilized shortlex word. Quadratic; used
    by oracles and the startup self-check only.
    """
    i, j = ray.i, ray.j
    n = depth if depth is not None else len(suffix) // 2 + 4
    prefix = ray.alternating(j, 2 * n + 1) if form == FORM_1234 else ray.alternating(j, 2 * n)
    deep = normalize(g, prefix + suffix)
    expected_sep = 2 * n + 1 if form == FORM_1234 else 2 * n

    def fail(msg: str):
        raise AssertionError(f"deep-form parse failed for {pretty(g, suffix)} ({form}): {msg}")

    # w1 runs to the first a_j, w2 from there to the first a_i.
    try:
        p1 = deep.index(j)
    except ValueError:
        fail("no leading a_j")
    w1 = deep[:p1]
    rest = deep[p1 + 1 :]
    try:
        p2 = rest.index(i)
    except ValueError:
        fail("no block a_i")
    w2 = rest[:p2]
    rest = rest[p2:]
    # the alternating block; its length is pinned by the prefix letter count
    m = (expected_sep - 3) // 2 if form == FORM_1234 else (expected_sep - 2) // 2
    block_len = 2 * m
    for t in range(block_len):
        want = i if t % 2 == 0 else j
        if t >= len(rest) or rest[t] != want:
            fail("alternating block too short")
    rest = rest[block_len:]
    if form == FORM_1234:
        if not rest or rest[0] != i:
            fail("missing separator a_i")
        rest = rest[1:]
        try:
            p3 = rest.index(j)
        except ValueError:
            fail("missing separator a_j")
        w3, w4 = rest[:p3], rest[p3 + 1 :]
    else:
        try:
            p3 = rest.index(i)
        except ValueError:
            fail("missing separator a_i")
        w3, w4 = rest[:p3], rest[p3 + 1 :]
    return HorocyclicSuffix(word=w1 + w2 + w3 + w4, form=form, slots=(w1, w2, w3, w4))


def startup_self_check(bundle: MachineBundle, max_len: int = 3) -> None:
    """Fail fast if the machine segmentation disagrees with brute force.

    Compares, for every shortlex suffix up to ``max_len`` and both forms:
    the deep-translate segmentation, the greedy segmentation of its word,
    and acceptance by the machine built from the language algebra.
    """
    g, ray = bundle.graph, bundle.ray
    for s in bundle.suffix.enumerate_language(max_len):
        for form in (FORM_1234, FORM_1256):
            oracle = segment_by_deep_normal_form(g, ray, s, form)
            ok, _ = bundle.horocyclic_for(form).accepts(oracle.word)
            if not ok:
                raise AssertionError(
                    f"horocyclic machine {form} rejects brute-force suffix {pretty(g, oracle.word)}"
                )
            greedy = greedy_segment(g, ray, form, oracle.word)
            if greedy.slots != oracle.slots:
                raise AssertionError(
                    f"greedy segmentation {greedy.describe(g)} != oracle {oracle.describe(g)} "
                    f"for {pretty(g, oracle.word)} ({form})"
                )
    for form in (FORM_1234, FORM_1256):
        machine = bundle.horocyclic_for(form)
        got = set(machine.enumerate_language(max_len))
        want = {
            segment_by_deep_normal_form(g, ray, s, form).word
            for s in bundle.suffix.enumerate_language(max_len)
        }
        if got != want:
            raise AssertionError(
                f"machine {form} language mismatch: extra={sorted(got - want)} "
                f"missing={sorted(want - got)}"
            )


def from_suffix(g: DefiningGraph, ray: Ray, suffix: Word, k: int) -> HorocyclicSuffix:
    """Horocyclic suffix of the k-horosphere vertex with the given shortlex suffix."""
    return segment_by_deep_normal_form(g, ray, suffix, horocyclic_form_for(k, len(suffix)))


def segment(g: DefiningGraph, ray: Ray, form: str, word: Word) -> HorocyclicSuffix:
    return greedy_segment(g, ray, form, word)


def horocyclic_insert(g: DefiningGraph, ray: Ray, h: HorocyclicSuffix, a: int) -> HorocyclicSuffix:
    """Insert a letter permitted by the geodesic horocyclic machine, one pass.

    Right-to-left scan as for plain shortlex insertion, except the scan also
    stops when crossing a slot boundary whose implicit ray separators do not
    commute with ``a``, or when leaving the earliest slot whose alphabet
    admits the letter.
    """
    alphas = slot_alphabets(g, ray, h.form)
    word = h.word
    slot_at = h.slot_of_position()
    earliest = next((s for s in range(4) if alphas.continue_masks[s] >> a & 1), None)
    if earliest is None:
        raise WordError(f"letter {g.names[a]} fits no slot of form {h.form}")
    link_a = g.link_masks[a]
    best = len(word)
    cur_slot = slot_at[-1] if word else 3
    for p in range(len(word) - 1, -1, -1):
        x = word[p]
        sx = slot_at[p]
        if sx < cur_slot:
            crossable = all(
                (link_a >> sep) & 1
                for boundary in range(sx, cur_slot)
                for sep in alphas.boundary_letters[boundary]
            )
            if not crossable or sx < earliest:
                break
            cur_slot = sx
        if not (link_a >> x) & 1:
            break
        if a < x and alphas.continue_masks[sx] >> a & 1:
            best = p
    new_word = word[:best] + (a,) + word[best:]
    return greedy_segment(g, ray, h.form, new_word)


def horocyclic_delete(g: DefiningGraph, ray: Ray, h: HorocyclicSuffix, a: int) -> HorocyclicSuffix:
    """Delete the last copy of a geodesic last letter; the result is again a
    horocyclic suffix of the same form."""
    if not geo_last_letters_mask(g, h.word) >> a & 1:
        raise WordError(f"{g.names[a]} is not a last letter of {pretty(g, h.word)}")
    return greedy_segment(g, ray, h.form, delete_last_copy(g, h.word, a))


def horocyclically_shortlex_word(ray: Ray, h: HorocyclicSuffix, block_exponent: int = 2) -> Word:
    """The stabilized deep normal form with the given central block exponent."""
    i, j = ray.i, ray.j
    w1, w2, w3, w4 = h.slots
    block = (i, j) * block_exponent
    if h.form == FORM_1234:
        return w1 + (j,) + w2 + block + (i,) + w3 + (j,) + w4
    return w1 + (j,) + w2 + block + w3 + (i,) + w4


class SStateCache:
    """S(w) = the limit shortlex state of deep ray translates of w.

    Computed by running the shortlex machine over the stabilized form with
    block exponent 2; construction asserts exponent 3 gives the same state.
    """

    def __init__(self, bundle: MachineBundle):
        self.bundle = bundle
        self._cache: dict[tuple[Word, str], int] = {}

    def state_of(self, h: HorocyclicSuffix) -> int:
        key = (h.word, h.form)
        got = self._cache.get(key)
        if got is not None:
            return got
        lex = self.bundle.shortlex
        deep2 = horocyclically_shortlex_word(self.bundle.ray, h, 2)
        s2 = lex.run(deep2)
        if s2 is None:
            raise AssertionError(
                f"stabilized form of {pretty(self.bundle.graph, h.word)} rejected by the shortlex machine"
            )
        s3 = lex.run(horocyclically_shortlex_word(self.bundle.ray, h, 3))
        if s2 != s3:
            raise AssertionError("S-state did not stabilize between block exponents 2 and 3")
        self._cache[key] = s2
        return s2

    def forbidden_mask(self, h: HorocyclicSuffix) -> int:
        return self.bundle.shortlex.payloads[self.state_of(h)]

    def extend(self, state: int, letters: Word) -> int:
        """Walk the shortlex machine from an S-state along appended letters."""
        lex = self.bundle.shortlex
        for a in letters:
            nxt = lex.step(state, a)
            if nxt is None:
                raise WordError(
                    f"appending {self.bundle.graph.names[a]} is not a legal horocyclic successor step"
                )
            state = nxt
        return state
