from __future__ import annotations

import pytest

from horoforge.graphdef import DefiningGraph
from horoforge.machines import MachineBundle
from horoforge.rays import Ray


def cycle_graph(n: int) -> DefiningGraph:
    names = [chr(ord("a") + i) for i in range(n)]
    return DefiningGraph.from_edges(names, [(names[i], names[(i + 1) % n]) for i in range(n)])


def theta_graph() -> DefiningGraph:
    """Two hubs joined by three length-3 paths."""
    names = ["u", "v", "p", "q", "r", "s", "x", "y"]
    edges = [
        ("u", "p"), ("p", "q"), ("q", "v"),
        ("u", "r"), ("r", "s"), ("s", "v"),
        ("u", "x"), ("x", "y"), ("y", "v"),
    ]
    return DefiningGraph.from_edges(names, edges)


def wheel5_graph() -> DefiningGraph:
    """Pentagon plus a hub: clique size 3, still hyperbolic and one-ended."""
    names = ["a", "b", "c", "d", "e", "h"]
    rim = [("a", "b"), ("b", "c"), ("c", "d"), ("d", "e"), ("e", "a")]
    return DefiningGraph.from_edges(names, rim + [("h", x) for x in "abcde"])


@pytest.fixture(scope="session")
def c5():
    return cycle_graph(5)


@pytest.fixture(scope="session")
def c6():
    return cycle_graph(6)


@pytest.fixture(scope="session")
def c7():
    return cycle_graph(7)


@pytest.fixture(scope="session")
def theta():
    return theta_graph()


@pytest.fixture(scope="session")
def wheel5():
    return wheel5_graph()


@pytest.fixture(scope="session")
def c5_ray(c5):
    return Ray(*c5.letters_named("a", "c")).validate(c5)


@pytest.fixture(scope="session")
def c5_bundle(c5, c5_ray):
    return MachineBundle(c5, c5_ray)


@pytest.fixture(scope="session")
def c6_bundle(c6):
    ray = Ray(*c6.letters_named("a", "c")).validate(c6)
    return MachineBundle(c6, ray)


@pytest.fixture(scope="session")
def c7_bundle(c7):
    ray = Ray(*c7.letters_named("a", "c")).validate(c7)
    return MachineBundle(c7, ray)


@pytest.fixture(scope="session")
def theta_bundle(theta):
    ray = Ray(*theta.letters_named("u", "v")).validate(theta)
    return MachineBundle(theta, ray)


@pytest.fixture(scope="session")
def wheel5_bundle(wheel5):
    ray = Ray(*wheel5.letters_named("c", "a")).validate(wheel5)
    return MachineBundle(wheel5, ray)


def W(g: DefiningGraph, text: str):
    from horoforge.words import parse_word

    return parse_word(g, text)
