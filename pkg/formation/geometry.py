"""Bearings, projections, the bearing rigidity matrix and configuration helpers."""
from itertools import combinations
from typing import Iterable, List, Optional, Tuple

import numpy as np
from scipy.linalg import block_diag
from scipy.spatial.distance import pdist

from . import config
from .errors import CoincidentAgents, DimensionMismatch, ZeroVector
from .graphs import signed_incidence
from .schemas import BearingSet, Configuration, DirectedSensingGraph


def bearing(p_i, p_j) -> np.ndarray:
    """Unit vector from p_i toward p_j."""
    diff = np.asarray(p_j, dtype=float) - np.asarray(p_i, dtype=float)
    dist = np.linalg.norm(diff)
    if dist <= config.EPS_DIST:
        raise CoincidentAgents(f"points {p_i} and {p_j} coincide")
    return diff / dist


def edge_vectors(graph: DirectedSensingGraph, positions: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Per-edge unit bearings (m, d) and lengths (m,). Tail senses head."""
    diff = positions[graph.heads()] - positions[graph.tails()] if graph.m else np.zeros((0, positions.shape[1]))
    dist = np.linalg.norm(diff, axis=1)
    bad = np.flatnonzero(dist <= config.EPS_DIST)
    if bad.size:
        k = int(bad[0])
        tail, head = graph.edges[k]
        raise CoincidentAgents(f"edge {k + 1} ({tail}->{head}) joins coincident agents", edge=k + 1, agent=tail)
    return diff / dist[:, None], dist


def bearing_function(graph: DirectedSensingGraph, cfg: Configuration) -> BearingSet:
    if cfg.n != graph.n:
        raise DimensionMismatch(f"configuration has {cfg.n} agents, graph has {graph.n}")
    g, _ = edge_vectors(graph, cfg.as_array())
    return BearingSet(d=cfg.d, vectors=g.tolist())


def projection(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    sq = float(x @ x)
    if np.sqrt(sq) <= config.EPS_DIST:
        raise ZeroVector("projection of a zero vector")
    return np.eye(x.size) - np.outer(x, x) / sq


def orthonormal_complement(g) -> np.ndarray:
    """d x (d-1) matrix whose columns are orthonormal and orthogonal to g."""
    g = np.asarray(g, dtype=float)
    g = g / np.linalg.norm(g)
    if g.size == 2:
        return np.array([[-g[1]], [g[0]]])
    # least aligned axis, Gram-Schmidt, then the cross product closes the frame
    e = np.zeros(3)
    e[int(np.argmin(np.abs(g)))] = 1.0
    u = e - (e @ g) * g
    u /= np.linalg.norm(u)
    return np.column_stack([u, np.cross(g, u)])


def numerical_rank(A: np.ndarray) -> int:
    if A.size == 0:
        return 0
    s = np.linalg.svd(A, compute_uv=False)
    if s[0] == 0.0:
        return 0
    tol = max(A.shape) * np.finfo(float).eps * s[0]
    return int(np.sum(s > tol))


def bearing_rigidity_matrix(graph: DirectedSensingGraph, cfg: Configuration) -> np.ndarray:
    """diag(P_gk / d_k) times the signed incidence matrix.

    With tail-positive incidence this is the negated Jacobian of the bearing
    function; the rank (all that the rigidity test uses) is the same.
    """
    d = cfg.d
    if graph.m == 0:
        return np.zeros((0, d * graph.n))
    g, dist = edge_vectors(graph, cfg.as_array())
    D = block_diag(*[projection(gk) / dk for gk, dk in zip(g, dist)])
    return D @ signed_incidence(graph, d)


def bearing_rigidity_rank(graph: DirectedSensingGraph, cfg: Configuration) -> int:
    return numerical_rank(bearing_rigidity_matrix(graph, cfg))


def is_infinitesimally_bearing_rigid(graph: DirectedSensingGraph, cfg: Configuration) -> bool:
    return bearing_rigidity_rank(graph, cfg) == cfg.d * graph.n - cfg.d - 1


def _normalized_area(a: np.ndarray, b: np.ndarray) -> float:
    la, lb = np.linalg.norm(a), np.linalg.norm(b)
    if la <= config.EPS_DIST or lb <= config.EPS_DIST:
        return 0.0
    cross = np.cross(a, b) if a.size == 3 else a[0] * b[1] - a[1] * b[0]
    return float(np.linalg.norm(cross)) / (la * lb)


def check_noncollinearity(graph: DirectedSensingGraph, cfg: Configuration) -> Tuple[bool, List[Tuple[int, int, int]]]:
    """Every follower must not be collinear with any two of its out-neighbours."""
    p = cfg.as_array()
    bad: List[Tuple[int, int, int]] = []
    for i in range(1, graph.n + 1):
        for j, k in combinations(graph.out_neighbors(i), 2):
            if _normalized_area(p[j - 1] - p[i - 1], p[k - 1] - p[i - 1]) <= config.EPS_COLLINEAR:
                bad.append((i, j, k))
    return not bad, bad


def symmetric_configuration(cfg: Configuration, c) -> Configuration:
    c = np.asarray(c, dtype=float)
    if c.size != cfg.d:
        raise DimensionMismatch(f"centre has dimension {c.size}, configuration {cfg.d}")
    return Configuration.from_array(2.0 * c - cfg.as_array())


def _pair(measured: BearingSet, target: BearingSet) -> Tuple[np.ndarray, np.ndarray]:
    a, b = measured.as_array(), target.as_array()
    if a.shape != b.shape:
        raise DimensionMismatch(f"bearing sets of shape {a.shape} and {b.shape}")
    return a, b


def bearing_error(measured: BearingSet, target: BearingSet) -> float:
    a, b = _pair(measured, target)
    return float(np.linalg.norm(a - b))


def edge_errors(measured: BearingSet, target: BearingSet) -> np.ndarray:
    a, b = _pair(measured, target)
    return np.linalg.norm(a - b, axis=1)


def formation_diameter(cfg: Configuration) -> float:
    return float(pdist(cfg.as_array()).max()) if cfg.n > 1 else 0.0


def random_configuration(witness: Configuration, seed: Optional[int], half_width: Optional[float] = None,
                         fixed: Iterable[int] = (), around: str = "centroid") -> Configuration:
    """Uniform draw in a box around the witness centroid, or around each witness position
    when `around="witness"`; `fixed` agents keep witness positions."""
    w = witness.as_array()
    if half_width is None:
        half_width = (2.0 if around == "centroid" else 0.25) * formation_diameter(witness)
    rng = np.random.default_rng(seed)
    centre = w.mean(axis=0) if around == "centroid" else w
    p = centre + rng.uniform(-half_width, half_width, size=w.shape)
    for i in fixed:
        p[i - 1] = w[i - 1]
    return Configuration.from_array(p)
