"""The machine family for a hyperbolic RACG and a chosen alternating ray.

Geodesic and shortlex machines have letter-set payloads driven by the star
of the letter just read. Everything else is assembled from those two with
the regular-language algebra: first-letter excluders, parity machines, the
suffix machines, and the four horocyclic-suffix machines.

Slot alphabets for the horocyclic machines: with K the (clique) set of
common neighbors of the ray letters, w1 holds K-letters preceding a_j, w2
holds K-letters between a_j and a_i in the alphabet order; w3/w5 hold
letters commuting with and preceding the matching ray letter; w4/w6 are
unconstrained. First-letter excluders pin the segmentation down uniquely.
The construction is cross-checked against brute-force segmentation of deep
ray translates before any generator trusts it.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

from .fsm import Fsm, build_by_exploration, combine, intersection, restrict_alphabet
from .graphdef import DefiningGraph, require_valid
from .rays import Ray
from .words import Word


def build_geodesic_machine(g: DefiningGraph) -> Fsm:
    """Accepts exactly the geodesic words. State payload: the set of letters
    the word can be rearranged to end with, as a bit mask."""

    def step(mask: int, a: int):
        if mask >> a & 1:
            return None
        return (mask & g.star_masks[a]) | (1 << a)

    return build_by_exploration(g.size, 0, step)


def build_shortlex_machine(g: DefiningGraph) -> Fsm:
    """Accepts exactly the shortlex geodesics. State payload: the letters
    whose append breaks shortlexness."""

    def step(mask: int, a: int):
        if mask >> a & 1:
            return None
        return (mask & g.star_masks[a]) | (1 << a) | g.star_lt_masks[a]

    return build_by_exploration(g.size, 0, step)


def build_first_letter_excluder(g: DefiningGraph, letters_mask: int) -> Fsm:
    """F_B: words that cannot be rearranged (without cancellation) to begin
    with a letter of B. State payload: the members of B that could still
    commute to the front."""

    def step(mask: int, a: int):
        if mask >> a & 1:
            return None
        return mask & g.star_masks[a]

    return build_by_exploration(g.size, letters_mask, step)


def build_parity_machine(g: DefiningGraph, parity: str) -> Fsm:
    """Two-state machine accepting odd- or even-length words."""
    if parity not in ("odd", "even"):
        raise ValueError("parity must be 'odd' or 'even'")
    accepting = frozenset({1}) if parity == "odd" else frozenset({0})
    toggle = [{a: 1 for a in range(g.size)}, {a: 0 for a in range(g.size)}]
    return Fsm(g.size, ["even", "odd"], 0, accepting, toggle)


def build_suffix_machine(g: DefiningGraph, ray: Ray) -> Fsm:
    """M_Suff: shortlex words that cannot begin with either ray letter."""
    excl = build_first_letter_excluder(g, (1 << ray.i) | (1 << ray.j))
    return intersection(build_shortlex_machine(g), excl)


class DeadEndError(AssertionError):
    pass


def build_geo_suffix_machine(g: DefiningGraph, ray: Ray) -> Fsm:
    """M_GeoSuff: geodesic words that cannot begin with either ray letter.

    Under the no-separating-clique assumption this machine has no dead-end
    states; the build asserts that, so an invalid graph slipping past
    validation is caught here.
    """
    excl = build_first_letter_excluder(g, (1 << ray.i) | (1 << ray.j))
    m = intersection(build_geodesic_machine(g), excl)
    for s in m.accepting:
        if not m.transitions[s]:
            raise DeadEndError(
                f"geodesic suffix machine has a dead end at state {m.payloads[s]!r}; "
                "the defining graph must have a separating clique"
            )
    return m


FORM_1234 = "1234"
FORM_1256 = "1256"


@dataclass(frozen=True)
class SlotAlphabets:
    """Bit masks describing the four suffix slots of one horocyclic form."""

    form: str
    continue_masks: tuple[int, int, int, int]
    start_masks: tuple[int, int, int, int]
    # letters separating consecutive slots in the horocyclically shortlex word
    boundary_letters: tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]]


def slot_alphabets(g: DefiningGraph, ray: Ray, form: str) -> SlotAlphabets:
    i, j = ray.i, ray.j
    common = g.star_masks[i] & g.star_masks[j]  # the clique of shared neighbors
    a1 = common & g.star_lt_masks[j]
    a2 = common & g.star_lt_masks[i] & g.star_gt_masks[j]
    if form == FORM_1234:
        a3 = g.star_lt_masks[j]
        start3 = a3 & ~g.star_masks[i]
        # a_i may literally open w4 when it is stuck behind a nonempty w3
        start4 = g.all_mask & ~(g.star_lt_masks[j] | (1 << j))
        seps = ((j,), (i, j), (j,))
    elif form == FORM_1256:
        a3 = g.star_lt_masks[i]
        start3 = a3 & ~g.star_masks[j]
        start4 = g.all_mask & ~(g.star_lt_masks[i] | (1 << i))
        seps = ((j,), (i, j), (i,))
    else:
        raise ValueError(f"unknown form {form!r}")
    return SlotAlphabets(
        form=form,
        continue_masks=(a1, a2, a3, g.all_mask),
        start_masks=(a1, a2, start3, start4),
        boundary_letters=seps,
    )


def _horocyclic_machine(g: DefiningGraph, ray: Ray, base: Fsm, form: str) -> Fsm:
    """Concatenation L1 L2 ((L3 L4) ∩ F) ∩ F for one form, built on ``base``
    (the shortlex machine, or the geodesic machine for the Geo variants)."""
    i, j = ray.i, ray.j
    alphas = slot_alphabets(g, ray, form)
    a1, a2 = alphas.continue_masks[0], alphas.continue_masks[1]
    l1 = restrict_alphabet(base, a1)
    l2 = restrict_alphabet(base, a2)
    if form == FORM_1234:
        slot3_alpha, guard, last_sep = g.star_lt_masks[j], g.star_masks[i], j
        own_ray_letter = i
    else:
        slot3_alpha, guard, last_sep = g.star_lt_masks[i], g.star_masks[j], i
        own_ray_letter = j
    l3 = intersection(restrict_alphabet(base, slot3_alpha), build_first_letter_excluder(g, guard))
    l4 = intersection(
        base,
        build_first_letter_excluder(g, g.star_lt_masks[last_sep] | (1 << last_sep)),
    )
    tail = intersection(
        combine(l3, l4, "concatenation"),
        build_first_letter_excluder(g, (1 << own_ray_letter) | a1 | a2),
    )
    return combine(combine(l1, l2, "concatenation"), tail, "concatenation")


@dataclass(frozen=True)
class HorocyclicMachines:
    m_1234: Fsm
    m_1256: Fsm
    m_odd: Fsm
    m_even: Fsm


def build_horocyclic_machines(g: DefiningGraph, ray: Ray) -> HorocyclicMachines:
    """M_1234, M_1256 and the parity-matched M_odd / M_even vertex machines."""
    lex = build_shortlex_machine(g)
    m_1234 = _horocyclic_machine(g, ray, lex, FORM_1234)
    m_1256 = _horocyclic_machine(g, ray, lex, FORM_1256)
    even = build_parity_machine(g, "even")
    odd = build_parity_machine(g, "odd")
    m_odd = combine(intersection(m_1234, even), intersection(m_1256, odd), "union")
    m_even = combine(intersection(m_1234, odd), intersection(m_1256, even), "union")
    return HorocyclicMachines(m_1234=m_1234, m_1256=m_1256, m_odd=m_odd, m_even=m_even)


def build_geo_horocyclic_machines(g: DefiningGraph, ray: Ray) -> tuple[Fsm, Fsm]:
    """Geodesic variants M_Geo1234 / M_Geo1256: same concatenation structure
    with the geodesic machine in place of the shortlex machine."""
    geo = build_geodesic_machine(g)
    return (
        _horocyclic_machine(g, ray, geo, FORM_1234),
        _horocyclic_machine(g, ray, geo, FORM_1256),
    )


class MachineBundle:
    """Lazily built, immutable collection of machines for one (graph, ray).

    Machines are built on first use and cached; the bundle is safe to share
    once built. ``state_report`` supports regression tracking of machine
    sizes, since the horocyclic machines are assembled by the language
    algebra rather than hand-coded.
    """

    def __init__(self, g: DefiningGraph, ray: Ray):
        require_valid(g)
        ray.validate(g)
        self.graph = g
        self.ray = ray

    @cached_property
    def geodesic(self) -> Fsm:
        return build_geodesic_machine(self.graph)

    @cached_property
    def shortlex(self) -> Fsm:
        return build_shortlex_machine(self.graph)

    @cached_property
    def suffix(self) -> Fsm:
        return build_suffix_machine(self.graph, self.ray)

    @cached_property
    def geo_suffix(self) -> Fsm:
        return build_geo_suffix_machine(self.graph, self.ray)

    @cached_property
    def horocyclic(self) -> HorocyclicMachines:
        return build_horocyclic_machines(self.graph, self.ray)

    @cached_property
    def geo_horocyclic(self) -> tuple[Fsm, Fsm]:
        return build_geo_horocyclic_machines(self.graph, self.ray)

    def horocyclic_for(self, form: str) -> Fsm:
        return self.horocyclic.m_1234 if form == FORM_1234 else self.horocyclic.m_1256

    def geo_horocyclic_for(self, form: str) -> Fsm:
        return self.geo_horocyclic[0] if form == FORM_1234 else self.geo_horocyclic[1]

    def geo_last_letters(self, w: Word) -> int:
        """Geodesic-machine payload of ``w``: its last letters as a bit mask."""
        state = self.geodesic.run(w)
        if state is None:
            raise ValueError("word is not geodesic")
        return self.geodesic.payloads[state]

    def shortlex_state(self, w: Word) -> int:
        state = self.shortlex.run(w)
        if state is None:
            raise ValueError("word is not shortlex")
        return state

    def state_report(self) -> dict[str, int]:
        horo = self.horocyclic
        return {
            "geodesic": self.geodesic.num_states,
            "shortlex": self.shortlex.num_states,
            "suffix": self.suffix.num_states,
            "geo_suffix": self.geo_suffix.num_states,
            "horo_1234": horo.m_1234.num_states,
            "horo_1256": horo.m_1256.num_states,
            "horo_odd": horo.m_odd.num_states,
            "horo_even": horo.m_even.num_states,
            "geo_horo_1234": self.geo_horocyclic[0].num_states,
            "geo_horo_1256": self.geo_horocyclic[1].num_states,
        }
