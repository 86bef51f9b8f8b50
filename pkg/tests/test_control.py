import numpy as np
import pytest

from formation import config
from formation.control import (
    ClosedLoop, agent_control, projected_control, stacked_control, undirected_control,
)
from formation.errors import ControlAssemblyError
from formation.geometry import bearing_function, bearing_rigidity_matrix, random_configuration
from formation.schemas import BearingSet, Configuration, DirectedSensingGraph, IntegratorSettings, TargetFormation
from formation.simulator import integrate

S = 1 / np.sqrt(2)


@pytest.fixture
def lff_target(lff_graph, octagon):
    return TargetFormation.from_witness(lff_graph, octagon)


@pytest.fixture
def small_star():
    g = DirectedSensingGraph(n=3, edges=[(3, 1), (3, 2)])
    return TargetFormation(graph=g, targets=BearingSet(d=2, vectors=[[-S, -S], [S, -S]]))


def test_control_vanishes_at_witness(lff_target, octagon):
    for i in range(1, 9):
        np.testing.assert_allclose(agent_control(i, octagon, lff_target), 0.0, atol=1e-12)
    np.testing.assert_allclose(stacked_control(octagon, lff_target).as_array(), 0.0, atol=1e-12)


def test_leader_control_is_exactly_zero(lff_target, octagon, rng):
    cfg = random_configuration(octagon, 3)
    assert agent_control(1, cfg, lff_target).tolist() == [0.0, 0.0]


def test_three_agent_control_by_hand(small_star):
    cfg = Configuration(d=2, positions=[[0, 0], [2, 0], [1, 0.5]])
    p3 = np.array([1.0, 0.5])
    expected = np.zeros(2)
    for leader, target in (([0, 0], [-S, -S]), ([2, 0], [S, -S])):
        g = (np.array(leader) - p3) / np.linalg.norm(np.array(leader) - p3)
        expected -= (np.eye(2) - np.outer(g, g)) @ np.array(target)
    np.testing.assert_allclose(agent_control(3, cfg, small_star), expected, atol=1e-15)
    np.testing.assert_allclose(stacked_control(cfg, small_star).as_array()[2], expected, atol=1e-12)


def test_per_agent_and_matrix_forms_agree(olff_graph, octagon, rng):
    target = TargetFormation.from_witness(olff_graph, octagon)
    for seed in range(10):
        cfg = random_configuration(octagon, seed)
        per_agent = np.array([agent_control(i, cfg, target) for i in range(1, 9)])
        matrix = projected_control(olff_graph, cfg, target.targets.as_array())
        np.testing.assert_allclose(per_agent, matrix, atol=1e-12)
        stacked_control(cfg, target)  # raises on disagreement


def test_assembly_disagreement_raises(lff_target, octagon, monkeypatch):
    monkeypatch.setattr(config, "ASSEMBLY_TOL", -1.0)
    with pytest.raises(ControlAssemblyError):
        stacked_control(random_configuration(octagon, 1), lff_target)


def test_negated_targets_flip_the_control(lff_target, octagon):
    cfg = random_configuration(octagon, 4)
    flipped = TargetFormation(
        graph=lff_target.graph,
        targets=BearingSet.from_array(-lff_target.targets.as_array()),
    )
    np.testing.assert_allclose(
        stacked_control(cfg, flipped).as_array(), -stacked_control(cfg, lff_target).as_array(), atol=1e-12
    )


def test_control_is_linear_in_the_target(olff_graph, octagon, rng):
    cfg = random_configuration(octagon, 5)
    y1, y2 = rng.normal(size=(olff_graph.m, 2)), rng.normal(size=(olff_graph.m, 2))
    a, b = 1.7, -0.4
    np.testing.assert_allclose(
        projected_control(olff_graph, cfg, a * y1 + b * y2),
        a * projected_control(olff_graph, cfg, y1) + b * projected_control(olff_graph, cfg, y2),
        atol=1e-12,
    )


def test_control_vanishes_at_its_own_bearings(olff_graph, octagon):
    cfg = random_configuration(octagon, 6)
    measured = bearing_function(olff_graph, cfg).as_array()
    np.testing.assert_allclose(projected_control(olff_graph, cfg, measured), 0.0, atol=1e-12)


def test_first_follower_moves_orthogonally_to_its_bearing(lff_target, octagon):
    start = random_configuration(octagon, 11, fixed=[1])
    rec = integrate(lff_target, start, IntegratorSettings(step=0.05, t_max=5.0, stop_early=False))
    for P in rec.positions:
        cfg = Configuration.from_array(P)
        g21 = (P[0] - P[1]) / np.linalg.norm(P[0] - P[1])
        assert abs(agent_control(2, cfg, lff_target) @ g21) < 1e-12


def test_undirected_law_matches_rigidity_form(lff_target, octagon):
    cfg = random_configuration(octagon, 9)
    p = cfg.as_array()
    dist = np.array([np.linalg.norm(p[h - 1] - p[t - 1]) for t, h in lff_target.graph.edges])
    R = bearing_rigidity_matrix(lff_target.graph, cfg)
    D = np.kron(np.diag(dist), np.eye(2))
    expected = -(R.T @ D @ lff_target.targets.as_array().reshape(-1)).reshape(8, 2)
    np.testing.assert_allclose(undirected_control(cfg, lff_target).as_array(), expected, atol=1e-12)
    np.testing.assert_allclose(undirected_control(octagon, lff_target).as_array(), 0.0, atol=1e-12)


def test_closed_loop_matches_stacked_control(olff_graph, octagon):
    target = TargetFormation.from_witness(olff_graph, octagon)
    loop = ClosedLoop(olff_graph, target.targets.as_array(), gain=2.0)
    cfg = random_configuration(octagon, 12)
    np.testing.assert_allclose(
        loop(cfg.as_array()), stacked_control(cfg, target, gain=2.0).as_array(), atol=1e-12
    )
