"""Deterministic finite-state machines over the letter alphabet.

Machines store only accessible states. Prefix-closed languages (the common
case here) keep every state accepting and omit the reject sink; missing
transitions mean rejection. The combinators complete machines with a sink
internally, build the product or subset machine, then prune states that are
unreachable or cannot reach an accepting state.
"""
from __future__ import annotations

import os
from collections import deque
from typing import Callable, Hashable, Iterable, Iterator, Optional

import numpy as np

from .words import Word

DEFAULT_STATE_CEILING = 10_000_000
_CEILING_ENV = "HOROFORGE_STATE_CEILING"


def state_ceiling() -> int:
    raw = os.environ.get(_CEILING_ENV)
    if raw:
        return int(raw)
    return DEFAULT_STATE_CEILING


class StateCeilingExceeded(RuntimeError):
    pass


class AlphabetMismatch(ValueError):
    pass


class Fsm:
    """A deterministic automaton with opaque hashable state payloads."""

    __slots__ = ("alphabet_size", "payloads", "start", "accepting", "transitions", "_dense")

    def __init__(
        self,
        alphabet_size: int,
        payloads: list[Hashable],
        start: int,
        accepting: frozenset[int],
        transitions: list[dict[int, int]],
    ):
        self.alphabet_size = alphabet_size
        self.payloads = payloads
        self.start = start
        self.accepting = accepting
        self.transitions = transitions
        self._dense: Optional[np.ndarray] = None

    # -- basic protocol ----------------------------------------------------

    @property
    def num_states(self) -> int:
        return len(self.payloads)

    @property
    def prefix_closed(self) -> bool:
        return len(self.accepting) == self.num_states

    def step(self, state: int, letter: int) -> Optional[int]:
        return self.transitions[state].get(letter)

    def run(self, w: Word) -> Optional[int]:
        """Final state after reading ``w``, or None on falling off."""
        s: Optional[int] = self.start
        for a in w:
            s = self.transitions[s].get(a)
            if s is None:
                return None
        return s

    def accepts(self, w: Word) -> tuple[bool, Optional[int]]:
        """Run ``w``; returns acceptance plus the final state id (None = reject sink)."""
        s = self.run(w)
        return (s is not None and s in self.accepting, s)

    def allowed_letters(self, state: int) -> Iterable[int]:
        return sorted(self.transitions[state])

    def dense_tables(self) -> tuple[np.ndarray, np.ndarray]:
        """(transitions, accepting) as numpy arrays; -1 marks a missing edge."""
        if self._dense is None:
            table = np.full((self.num_states, self.alphabet_size), -1, dtype=np.int32)
            for s, row in enumerate(self.transitions):
                for a, t in row.items():
                    table[s, a] = t
            self._dense = table
        acc = np.zeros(self.num_states, dtype=np.bool_)
        acc[list(self.accepting)] = True
        return self._dense, acc

    # -- language operations ------------------------------------------------

    def enumerate_language(self, max_len: int) -> Iterator[Word]:
        """All accepted words of length <= max_len, depth first in letter order.

        Depth-first keeps memory linear in max_len; the emission order is
        lexicographic by prefix, which downstream code sorts as needed.
        """
        word: list[int] = []

        def walk(state: int) -> Iterator[Word]:
            if state in self.accepting:
                yield tuple(word)
            if len(word) == max_len:
                return
            for a in sorted(self.transitions[state]):
                word.append(a)
                yield from walk(self.transitions[state][a])
                word.pop()

        yield from walk(self.start)

    def count_language(self, max_len: int) -> list[int]:
        """Number of accepted words of each length 0..max_len, by dynamic programming."""
        counts = [0] * (max_len + 1)
        vec = {self.start: 1}
        for length in range(max_len + 1):
            counts[length] = sum(n for s, n in vec.items() if s in self.accepting)
            nxt: dict[int, int] = {}
            for s, n in vec.items():
                for t in self.transitions[s].values():
                    nxt[t] = nxt.get(t, 0) + n
            vec = nxt
        return counts

    def adjacency_counts(self) -> tuple[np.ndarray, list[int]]:
        """Letter-count adjacency matrix restricted to the accepted states.

        Returns the matrix and the list of state ids indexing its rows.
        """
        states = sorted(self.accepting)
        pos = {s: i for i, s in enumerate(states)}
        mat = np.zeros((len(states), len(states)), dtype=np.int64)
        for s in states:
            for t in self.transitions[s].values():
                if t in pos:
                    mat[pos[s], pos[t]] += 1
        return mat, states

    def describe_payload(self, state: int, names: Iterable[str]) -> str:
        return _format_payload(self.payloads[state], tuple(names))


def _format_payload(payload, names: tuple[str, ...]) -> str:
    if isinstance(payload, int):  # letter-set bit mask
        members = [names[i] for i in range(len(names)) if payload >> i & 1]
        return "{" + ",".join(members) + "}"
    if isinstance(payload, tuple):
        return "(" + ", ".join(_format_payload(p, names) for p in payload) + ")"
    if payload is None:
        return "-"
    return str(payload)


def build_by_exploration(
    alphabet_size: int,
    seed: Hashable,
    step: Callable[[Hashable, int], Optional[Hashable]],
    accepting: Optional[Callable[[Hashable], bool]] = None,
    ceiling: Optional[int] = None,
) -> Fsm:
    """Build a machine breadth-first from a deterministic transition rule.

    States with equal payloads are merged, so ``step`` must produce a
    canonical hashable encoding. Terminates because every payload space in
    this package is finite; a configurable ceiling guards against blowup.
    """
    limit = ceiling if ceiling is not None else state_ceiling()
    ids: dict[Hashable, int] = {seed: 0}
    payloads: list[Hashable] = [seed]
    transitions: list[dict[int, int]] = [{}]
    queue = deque([0])
    while queue:
        sid = queue.popleft()
        payload = payloads[sid]
        for a in range(alphabet_size):
            nxt = step(payload, a)
            if nxt is None:
                continue
            tid = ids.get(nxt)
            if tid is None:
                tid = len(payloads)
                if tid >= limit:
                    raise StateCeilingExceeded(
                        f"machine exceeded {limit} states (set {_CEILING_ENV} to raise the ceiling)"
                    )
                ids[nxt] = tid
                payloads.append(nxt)
                transitions.append({})
                queue.append(tid)
            transitions[sid][a] = tid
    if accepting is None:
        acc = frozenset(range(len(payloads)))
    else:
        acc = frozenset(i for i, p in enumerate(payloads) if accepting(p))
    return _pruned(alphabet_size, payloads, 0, acc, transitions)


def _pruned(
    alphabet_size: int,
    payloads: list[Hashable],
    start: int,
    accepting: frozenset[int],
    transitions: list[dict[int, int]],
) -> Fsm:
    """Keep states reachable from start that can also reach acceptance."""
    n = len(payloads)
    reach = [False] * n
    reach[start] = True
    stack = [start]
    while stack:
        s = stack.pop()
        for t in transitions[s].values():
            if not reach[t]:
                reach[t] = True
                stack.append(t)
    rev: list[list[int]] = [[] for _ in range(n)]
    for s in range(n):
        if reach[s]:
            for t in transitions[s].values():
                rev[t].append(s)
    live = [False] * n
    stack = [s for s in accepting if reach[s]]
    for s in stack:
        live[s] = True
    while stack:
        s = stack.pop()
        for p in rev[s]:
            if not live[p]:
                live[p] = True
                stack.append(p)
    keep = [s for s in range(n) if reach[s] and (live[s] or s == start)]
    remap = {s: i for i, s in enumerate(keep)}
    new_transitions = []
    for s in keep:
        new_transitions.append({a: remap[t] for a, t in transitions[s].items() if reach[t] and live[t]})
    return Fsm(
        alphabet_size=alphabet_size,
        payloads=[payloads[s] for s in keep],
        start=remap[start],
        accepting=frozenset(remap[s] for s in keep if s in accepting),
        transitions=new_transitions,
    )


def intersection(m1: Fsm, m2: Fsm) -> Fsm:
    return _product(m1, m2, lambda a, b: a and b, need_sink=False)


def union(m1: Fsm, m2: Fsm) -> Fsm:
    return _product(m1, m2, lambda a, b: a or b, need_sink=True)


def _product(m1: Fsm, m2: Fsm, combine_acc, need_sink: bool) -> Fsm:
    """Accessible product construction; None components stand for the sink."""
    if m1.alphabet_size != m2.alphabet_size:
        raise AlphabetMismatch(f"{m1.alphabet_size} vs {m2.alphabet_size}")
    q = m1.alphabet_size
    seed = (m1.start, m2.start)
    ids = {seed: 0}
    states = [seed]
    transitions: list[dict[int, int]] = [{}]
    queue = deque([0])
    limit = state_ceiling()
    while queue:
        sid = queue.popleft()
        s1, s2 = states[sid]
        for a in range(q):
            t1 = m1.transitions[s1].get(a) if s1 is not None else None
            t2 = m2.transitions[s2].get(a) if s2 is not None else None
            if t1 is None and t2 is None:
                continue
            if not need_sink and (t1 is None or t2 is None):
                continue
            key = (t1, t2)
            tid = ids.get(key)
            if tid is None:
                tid = len(states)
                if tid >= limit:
                    raise StateCeilingExceeded("product construction exceeded the state ceiling")
                ids[key] = tid
                states.append(key)
                transitions.append({})
                queue.append(tid)
            transitions[sid][a] = tid
    accepting = frozenset(
        i
        for i, (s1, s2) in enumerate(states)
        if combine_acc(s1 is not None and s1 in m1.accepting, s2 is not None and s2 in m2.accepting)
    )
    payloads = [
        (None if s1 is None else m1.payloads[s1], None if s2 is None else m2.payloads[s2])
        for s1, s2 in states
    ]
    return _pruned(q, payloads, 0, accepting, transitions)


def concatenation(m1: Fsm, m2: Fsm) -> Fsm:
    """Language concatenation L1 L2 via subset construction on the right factor."""
    if m1.alphabet_size != m2.alphabet_size:
        raise AlphabetMismatch(f"{m1.alphabet_size} vs {m2.alphabet_size}")
    q = m1.alphabet_size

    def seed_state() -> tuple[Optional[int], tuple[int, ...]]:
        right = (m2.start,) if m1.start in m1.accepting else ()
        return (m1.start, right)

    seed = seed_state()
    ids = {seed: 0}
    states = [seed]
    transitions: list[dict[int, int]] = [{}]
    queue = deque([0])
    limit = state_ceiling()
    while queue:
        sid = queue.popleft()
        s1, rights = states[sid]
        for a in range(q):
            t1 = m1.transitions[s1].get(a) if s1 is not None else None
            nxt_rights = sorted({m2.transitions[r][a] for r in rights if a in m2.transitions[r]})
            if t1 is not None and t1 in m1.accepting and m2.start not in nxt_rights:
                nxt_rights.append(m2.start)
                nxt_rights.sort()
            if t1 is None and not nxt_rights:
                continue
            key = (t1, tuple(nxt_rights))
            tid = ids.get(key)
            if tid is None:
                tid = len(states)
                if tid >= limit:
                    raise StateCeilingExceeded("concatenation exceeded the state ceiling")
                ids[key] = tid
                states.append(key)
                transitions.append({})
                queue.append(tid)
            transitions[sid][a] = tid
    accepting = frozenset(
        i for i, (_, rights) in enumerate(states) if any(r in m2.accepting for r in rights)
    )
    payloads: list[Hashable] = [
        ((None if s1 is None else m1.payloads[s1]), tuple(m2.payloads[r] for r in rights))
        for s1, rights in states
    ]
    return _pruned(q, payloads, 0, accepting, transitions)


def combine(m1: Fsm, m2: Fsm, mode: str) -> Fsm:
    if mode == "intersection":
        return intersection(m1, m2)
    if mode == "union":
        return union(m1, m2)
    if mode == "concatenation":
        return concatenation(m1, m2)
    raise ValueError(f"unknown combine mode {mode!r}")


def restrict_alphabet(m: Fsm, letters_mask: int) -> Fsm:
    """Delete transitions labeled outside the mask and re-prune."""
    transitions = [
        {a: t for a, t in row.items() if letters_mask >> a & 1} for row in m.transitions
    ]
    return _pruned(m.alphabet_size, list(m.payloads), m.start, m.accepting, transitions)


def universal_machine(alphabet_size: int) -> Fsm:
    return Fsm(
        alphabet_size=alphabet_size,
        payloads=["all"],
        start=0,
        accepting=frozenset({0}),
        transitions=[{a: 0 for a in range(alphabet_size)}],
    )
