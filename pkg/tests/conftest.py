import numpy as np
import pytest

from formation.geometry import bearing
from formation.scenarios import (
    BACKWARD_EXTRA, HEXAGON, LFF_EDGES, OCTAGON, ORDERED_EXTRA, STAR_LEADERS, STAR_TARGETS,
)
from formation.schemas import Configuration, DirectedSensingGraph, TargetFormation


@pytest.fixture
def lff_graph():
    return DirectedSensingGraph(n=8, edges=LFF_EDGES)


@pytest.fixture
def olff_graph():
    return DirectedSensingGraph(n=8, edges=LFF_EDGES + ORDERED_EXTRA)


@pytest.fixture
def unordered_graph():
    return DirectedSensingGraph(n=8, edges=LFF_EDGES + ORDERED_EXTRA + BACKWARD_EXTRA)


@pytest.fixture
def star_graph():
    return DirectedSensingGraph(n=6, edges=[(6, j) for j in range(1, 6)])


@pytest.fixture
def octagon():
    return Configuration(d=2, positions=OCTAGON)


@pytest.fixture
def hexagon():
    return Configuration(d=2, positions=HEXAGON)


@pytest.fixture
def star_leaders():
    return np.array(STAR_LEADERS)


@pytest.fixture
def star_targets():
    """Published (rounded) targets, renormalised."""
    T = np.array(STAR_TARGETS)
    return T / np.linalg.norm(T, axis=1)[:, None]


@pytest.fixture
def exact_star(star_graph, star_leaders):
    """Same leaders, targets taken from [1, 1] so the equilibrium is exactly [1, 1]."""
    witness = Configuration(d=2, positions=star_leaders.tolist() + [[1.0, 1.0]])
    return TargetFormation.from_witness(star_graph, witness)


@pytest.fixture
def exact_star_targets(star_leaders):
    return np.array([bearing([1.0, 1.0], l) for l in star_leaders])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
