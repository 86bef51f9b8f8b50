import numpy as np
import pytest

from formation.errors import CoincidentAgents, DimensionMismatch, ZeroVector
from formation.geometry import (
    bearing, bearing_error, bearing_function, bearing_rigidity_matrix, bearing_rigidity_rank,
    check_noncollinearity, edge_errors, formation_diameter, is_infinitesimally_bearing_rigid,
    orthonormal_complement, projection, random_configuration, symmetric_configuration,
)
from formation.scenarios import STAR_TARGETS, builtin
from formation.schemas import BearingSet, Configuration, DirectedSensingGraph


# ---------- bearings ----------

def test_bearing_3_4_5():
    np.testing.assert_allclose(bearing([0, 0], [3, 4]), [0.6, 0.8], atol=1e-15)


def test_bearing_of_coincident_points_raises():
    with pytest.raises(CoincidentAgents):
        bearing([1, 1], [1, 1 + 1e-15])


def test_bearing_from_follower_to_first_leader(star_leaders):
    np.testing.assert_allclose(bearing([1, 1], star_leaders[0]), [0.309, 0.951], atol=1e-3)


def test_bearing_function_points_from_tail_to_head():
    g = DirectedSensingGraph(n=2, edges=[(2, 1)])
    cfg = Configuration(d=2, positions=[[0, 0], [1, 0]])
    assert bearing_function(g, cfg).vectors == [[-1.0, 0.0]]


def test_bearing_function_reports_edge_of_coincidence():
    g = DirectedSensingGraph(n=3, edges=[(2, 1), (3, 1)])
    cfg = Configuration(d=2, positions=[[0, 0], [1, 0], [0, 0]])
    with pytest.raises(CoincidentAgents) as info:
        bearing_function(g, cfg)
    assert info.value.edge == 2


def test_star_witness_reproduces_published_bearings(exact_star):
    np.testing.assert_allclose(exact_star.targets.as_array(), STAR_TARGETS, atol=1e-3)


def test_bearing_function_translation_and_scale_invariant(olff_graph, octagon, rng):
    base = bearing_function(olff_graph, octagon).as_array()
    for _ in range(5):
        s = rng.uniform(0.1, 10.0)
        c = rng.normal(size=2)
        moved = Configuration.from_array(s * octagon.as_array() + c)
        np.testing.assert_allclose(bearing_function(olff_graph, moved).as_array(), base, atol=1e-12)


# ---------- projections ----------

def test_projection_examples():
    np.testing.assert_allclose(projection([1, 0]), [[0, 0], [0, 1]])
    np.testing.assert_allclose(projection([1, 1]), [[0.5, -0.5], [-0.5, 0.5]])
    np.testing.assert_allclose(np.linalg.eigvalsh(projection([1.0, 2.0, -0.5])), [0, 1, 1], atol=1e-12)


@pytest.mark.parametrize("d", [2, 3])
def test_projection_properties(d, rng):
    for _ in range(20):
        x = rng.normal(size=d)
        P = projection(x)
        np.testing.assert_allclose(P, P.T, atol=1e-12)
        np.testing.assert_allclose(P @ P, P, atol=1e-12)
        np.testing.assert_allclose(P @ x, np.zeros(d), atol=1e-12)
        assert np.linalg.eigvalsh(P).min() > -1e-12
        np.testing.assert_allclose(projection(-3.7 * x), P, atol=1e-12)


def test_projection_of_zero_vector_raises():
    with pytest.raises(ZeroVector):
        projection([0.0, 0.0])


def test_projection_sum_invertible_iff_not_parallel(rng):
    for _ in range(20):
        x, y = rng.normal(size=2), rng.normal(size=2)
        assert np.linalg.eigvalsh(projection(x) + projection(y)).min() > 0
    x = rng.normal(size=3)
    assert abs(np.linalg.eigvalsh(projection(x) + projection(-2 * x)).min()) < 1e-12


@pytest.mark.parametrize("g", [[1, 0], [0.6, -0.8], [0, 0, 1], [1, 0, 0], [0.48, 0.6, 0.64]])
def test_orthonormal_complement(g):
    g = np.asarray(g, dtype=float)
    Q = orthonormal_complement(g)
    assert Q.shape == (g.size, g.size - 1)
    np.testing.assert_allclose(g @ Q, np.zeros(g.size - 1), atol=1e-12)
    np.testing.assert_allclose(Q.T @ Q, np.eye(g.size - 1), atol=1e-12)


# ---------- rigidity ----------

def test_rigidity_matrix_kernel_contains_translation_and_scaling(olff_graph, octagon, rng):
    R = bearing_rigidity_matrix(olff_graph, octagon)
    assert R.shape == (2 * olff_graph.m, 16)
    c = rng.normal(size=2)
    np.testing.assert_allclose(R @ np.tile(c, 8), 0.0, atol=1e-12)
    np.testing.assert_allclose(R @ octagon.as_array().reshape(-1), 0.0, atol=1e-12)


def test_rigidity_rank_never_exceeds_bound(rng):
    g = DirectedSensingGraph(n=5, edges=[(i, j) for i in range(1, 6) for j in range(1, 6) if i != j])
    for d in (2, 3):
        cfg = Configuration.from_array(rng.normal(size=(5, d)))
        assert bearing_rigidity_rank(g, cfg) <= 5 * d - d - 1


def test_hexagon_is_infinitesimally_bearing_rigid(hexagon):
    g = builtin("hexagon-good").graph
    assert bearing_rigidity_rank(g, hexagon) == 9
    assert is_infinitesimally_bearing_rigid(g, hexagon)


def test_single_edge_is_not_rigid_in_a_triangle():
    g = DirectedSensingGraph(n=3, edges=[(2, 1)])
    cfg = Configuration(d=2, positions=[[0, 0], [1, 0], [0, 1]])
    assert not is_infinitesimally_bearing_rigid(g, cfg)


# ---------- assumptions ----------

def test_published_leaders_are_noncollinear(star_graph, star_leaders):
    cfg = Configuration(d=2, positions=star_leaders.tolist() + [[1.0, 1.0]])
    ok, bad = check_noncollinearity(star_graph, cfg)
    assert ok and bad == []


def test_collinear_triple_is_reported():
    g = DirectedSensingGraph(n=3, edges=[(3, 1), (3, 2)])
    cfg = Configuration(d=2, positions=[[0, 0], [1, 0], [3, 0]])
    ok, bad = check_noncollinearity(g, cfg)
    assert not ok
    assert bad == [(3, 1, 2)]


def test_single_out_edges_pass_vacuously():
    g = DirectedSensingGraph(n=3, edges=[(2, 1), (3, 2)])
    cfg = Configuration(d=2, positions=[[0, 0], [1, 0], [2, 0]])
    assert check_noncollinearity(g, cfg) == (True, [])


def test_collinearity_is_scale_free():
    g = DirectedSensingGraph(n=3, edges=[(3, 1), (3, 2)])
    for s in (1e-4, 1.0, 1e4):
        cfg = Configuration(d=3, positions=[[0, 0, 0], [s, 0, 0], [0, 0, s]])
        assert check_noncollinearity(g, cfg)[0]


# ---------- symmetric configurations ----------

def test_point_reflection():
    cfg = Configuration(d=2, positions=[[1, 1]])
    assert symmetric_configuration(cfg, [0, 0]).positions == [[-1.0, -1.0]]


def test_reflection_is_an_involution(octagon, rng):
    c = rng.normal(size=2)
    twice = symmetric_configuration(symmetric_configuration(octagon, c), c)
    np.testing.assert_allclose(twice.as_array(), octagon.as_array(), atol=1e-12)


def test_reflection_negates_bearings(olff_graph, octagon, rng):
    c = rng.normal(size=2)
    g = bearing_function(olff_graph, octagon).as_array()
    g_bar = bearing_function(olff_graph, symmetric_configuration(octagon, c)).as_array()
    np.testing.assert_allclose(g_bar, -g, atol=1e-12)


# ---------- bearing error ----------

def _set(*v):
    return BearingSet(d=2, vectors=[list(x) for x in v])


def test_bearing_error_examples():
    assert bearing_error(_set((1, 0)), _set((1, 0))) == 0.0
    assert bearing_error(_set((1, 0)), _set((-1, 0))) == pytest.approx(2.0)
    assert bearing_error(_set((1, 0)), _set((0, 1))) == pytest.approx(np.sqrt(2))


def test_bearing_error_is_stacked_norm_of_edge_errors():
    a, b = _set((1, 0), (0, 1)), _set((0, 1), (0, 1))
    np.testing.assert_allclose(edge_errors(a, b), [np.sqrt(2), 0.0])
    assert bearing_error(a, b) == pytest.approx(np.linalg.norm(edge_errors(a, b)))


def test_bearing_error_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        bearing_error(_set((1, 0)), _set((1, 0), (0, 1)))


# ---------- random initial conditions ----------

def test_random_configuration_is_seeded_and_boxed(octagon):
    a = random_configuration(octagon, 7, fixed=[1, 2])
    b = random_configuration(octagon, 7, fixed=[1, 2])
    assert a == b
    p = a.as_array()
    np.testing.assert_array_equal(p[:2], octagon.as_array()[:2])
    half = 2.0 * formation_diameter(octagon)
    assert np.all(np.abs(p - octagon.as_array().mean(axis=0)) <= half)
    assert random_configuration(octagon, 8) != a


def test_witness_box_perturbs_each_agent_around_its_own_position(octagon):
    cfg = random_configuration(octagon, 7, half_width=0.5, fixed=[1, 2], around="witness")
    offset = np.abs(cfg.as_array() - octagon.as_array())
    assert offset.max() <= 0.5
    assert not offset[:2].any()
    assert offset[2:].all()


def test_witness_box_defaults_to_a_quarter_of_the_diameter(octagon):
    offset = np.abs(random_configuration(octagon, 3, around="witness").as_array() - octagon.as_array())
    assert offset.max() <= 0.25 * formation_diameter(octagon)
