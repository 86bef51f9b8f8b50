"""Equilibria of the directed bearing law and their stability.

One-to-many systems (one mobile follower, fixed leaders) have the closed form
p_n = (sum P_g*)^-1 sum P_g* p_j. LFF and ordered-LFF graphs are cascades of
such systems, so their target configuration is built agent by agent.
"""
import logging
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import block_diag, null_space

from . import config
from .control import stacked_control
from .errors import (
    CoincidentAgents, DegenerateBearings, DimensionMismatch, EmptyTrajectory,
    InconsistentConfiguration, NotOneToMany, NotOrderedLFF, SingularProjectionSum,
)
from .geometry import (
    bearing, bearing_function, edge_vectors, numerical_rank, orthonormal_complement,
    projection, symmetric_configuration,
)
from .graphs import classify
from .schemas import (
    Configuration, DirectedSensingGraph, EquilibriumReport, GraphClass, NullSpaceBasis, StabilityTag,
    TargetFormation, TrajectoryRecord,
)

log = logging.getLogger(__name__)


def one_to_many_equilibrium(leaders: Sequence, targets: Sequence) -> np.ndarray:
    L = np.atleast_2d(np.asarray(leaders, dtype=float))
    T = np.atleast_2d(np.asarray(targets, dtype=float))
    if L.shape != T.shape:
        raise DimensionMismatch(f"{L.shape[0]} leaders for {T.shape[0]} targets")
    d = L.shape[1]
    A = np.zeros((d, d))
    b = np.zeros(d)
    for p_j, g_j in zip(L, T):
        P = projection(g_j)
        A += P
        b += P @ p_j
    if np.linalg.eigvalsh(A).min() <= config.SINGULAR_TOL:
        raise SingularProjectionSum("target bearings are all parallel; projection sum is singular")
    return np.linalg.solve(A, b)


def _follower_control(p: np.ndarray, L: np.ndarray, T: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    u = np.zeros_like(p)
    J = np.zeros((p.size, p.size))
    for l_j, gs in zip(L, T):
        diff = l_j - p
        dist = np.linalg.norm(diff)
        if dist <= config.EPS_DIST:
            raise CoincidentAgents("follower reached a leader")
        g = diff / dist
        P = projection(g)
        u -= P @ gs
        J -= ((g @ gs) * P + np.outer(g, gs) @ P) / dist
    return u, J


def refine_equilibrium(leaders: Sequence, targets: Sequence, start, max_iter: int = 50) -> np.ndarray:
    """Newton on u(p_n) = 0. Rounded targets move the true zero slightly off the closed form."""
    L = np.asarray(leaders, dtype=float)
    T = np.asarray(targets, dtype=float)
    p = np.asarray(start, dtype=float).copy()
    for _ in range(max_iter):
        u, J = _follower_control(p, L, T)
        if np.linalg.norm(u) < 1e-14:
            break
        step = np.linalg.solve(J, -u)
        p = p + step
        if np.linalg.norm(step) < 1e-15:
            break
    return p


def cascade_target_configuration(target: TargetFormation, p1_init, d21_init: float) -> Configuration:
    graph = target.graph
    cls = classify(graph)
    if cls.kind not in (GraphClass.LFF, GraphClass.ORDERED_LFF):
        raise NotOrderedLFF("; ".join(cls.violations) or f"graph is {cls.kind.value}")
    if d21_init <= 0:
        raise ValueError("d21_init must be positive")
    G = target.targets.as_array()
    p = np.zeros((graph.n, target.d))
    p[0] = np.asarray(p1_init, dtype=float)
    p[1] = p[0] - d21_init * G[graph.edge_index(2, 1)]
    for i in range(3, graph.n + 1):
        ks = graph.out_edges(i)
        heads = [graph.edges[k][1] for k in ks]
        p[i - 1] = one_to_many_equilibrium(p[np.array(heads) - 1], G[ks])
    result = Configuration.from_array(p)
    realized = bearing_function(graph, result).as_array()
    if not np.allclose(realized, G, rtol=0.0, atol=config.WITNESS_TOL):
        raise InconsistentConfiguration("targets are not realizable: cascade does not reproduce them")
    return result


def cascade_mirror_configuration(target: TargetFormation, p1_init, d21_init: float) -> Configuration:
    """The other branch of the cascade, reflected through p1; it realizes -g*."""
    return symmetric_configuration(cascade_target_configuration(target, p1_init, d21_init), p1_init)


# ---------- equilibrium sets of the one-to-many system ----------

def null_space_basis(bearings: Sequence) -> NullSpaceBasis:
    B = np.atleast_2d(np.asarray(bearings, dtype=float))
    B = B / np.linalg.norm(B, axis=1)[:, None]
    d = B.shape[1]
    P_tilde = np.hstack([projection(g) for g in B])
    rank = numerical_rank(P_tilde)
    if rank < d:
        raise DegenerateBearings(f"rank of P_tilde is {rank} < {d}: bearings are all parallel")
    perps = np.array([orthonormal_complement(g) for g in B])
    G = block_diag(*[g[:, None] for g in B])
    G_perp = block_diag(*perps)
    N = null_space(P_tilde @ G_perp)
    residual_N = float(np.max(np.abs(P_tilde @ G_perp @ N))) if N.size else 0.0
    return NullSpaceBasis(
        d=d, bearings=B, perps=perps, P_tilde=P_tilde, G=G, G_perp=G_perp, N=N,
        rank_P_tilde=rank, residual_G=float(np.max(np.abs(P_tilde @ G))), residual_N=residual_N,
    )


def y_candidate(basis: NullSpaceBasis, a, b) -> Tuple[np.ndarray, List[bool]]:
    """y_i = a_i g_i + g_perp_i (N b)_i, plus a unit-norm flag per component."""
    a = np.asarray(a, dtype=float).reshape(-1)
    b = np.asarray(b, dtype=float).reshape(-1)
    if a.size != basis.k or b.size != basis.m:
        raise DimensionMismatch(f"need a of length {basis.k} and b of length {basis.m}")
    Nb = (basis.N @ b).reshape(basis.k, basis.d - 1) if basis.m else np.zeros((basis.k, basis.d - 1))
    y = a[:, None] * basis.bearings + np.einsum("kij,kj->ki", basis.perps, Nb)
    sq = a ** 2 + np.sum(Nb ** 2, axis=1)
    return y, [bool(abs(s - 1.0) <= config.UNIT_TOL) for s in sq]


def realizability_check(graph: DirectedSensingGraph, leaders: Sequence, y: Sequence, max_iter: int = 100,
                        tol: float = 1e-6) -> Optional[np.ndarray]:
    """Follower position whose bearings to the leaders are y, or None.

    `graph` is a one-to-many graph; leaders and y follow its edge order.
    Damped Gauss-Newton on the stacked bearing residual, started at the leaders' centroid.
    """
    if classify(graph).kind != GraphClass.ONE_TO_MANY:
        raise NotOneToMany(f"graph with edges {graph.edges} is not one-to-many")
    L = np.atleast_2d(np.asarray(leaders, dtype=float))
    Y = np.atleast_2d(np.asarray(y, dtype=float))
    if L.shape[0] != graph.m or Y.shape != L.shape:
        raise DimensionMismatch(f"graph has {graph.m} edges; got {L.shape[0]} leaders and {Y.shape[0]} bearings")

    def residual(p):
        diff = L - p
        dist = np.linalg.norm(diff, axis=1)
        if np.any(dist <= config.EPS_DIST):
            return None, None, None
        g = diff / dist[:, None]
        return (g - Y).reshape(-1), g, dist

    p = L.mean(axis=0)
    r, g, dist = residual(p)
    if r is None:
        return None
    cost = r @ r
    for _ in range(max_iter):
        if np.sqrt(cost) < tol:
            break
        # d g_j / d p = -P_gj / d_j
        J = np.vstack([-projection(gj) / dj for gj, dj in zip(g, dist)])
        step = np.linalg.lstsq(J, -r, rcond=None)[0]
        alpha, moved = 1.0, False
        while alpha > 1e-8:
            r_new, g_new, dist_new = residual(p + alpha * step)
            if r_new is not None and r_new @ r_new < cost:
                p, r, g, dist, cost = p + alpha * step, r_new, g_new, dist_new, r_new @ r_new
                moved = True
                break
            alpha *= 0.5
        if not moved:
            break
    return p if np.sqrt(cost) < tol else None


def candidate_membership(basis: NullSpaceBasis, graph: DirectedSensingGraph, leaders: Sequence,
                         a, b) -> Tuple[np.ndarray, List[bool], Optional[np.ndarray]]:
    """Candidate y, its unit flags, and the follower position realizing it (None if y is not realizable).

    Unit candidates that fail realizability (such as -g) still belong to the
    equilibrium set of the bearing equations; they are reported with position None.
    """
    y, flags = y_candidate(basis, a, b)
    position = realizability_check(graph, leaders, y) if all(flags) else None
    return y, flags, position


def classify_stability(leaders: Sequence, targets: Sequence, atol: Optional[float] = None) -> StabilityTag:
    """stable if the leaders realize +g* around the equilibrium, unstable if -g*."""
    atol = config.MATCH_TOL if atol is None else atol
    T = np.asarray(targets, dtype=float)
    p = one_to_many_equilibrium(leaders, T)
    measured = np.array([bearing(p, l_j) for l_j in np.asarray(leaders, dtype=float)])
    if np.allclose(measured, T, rtol=0.0, atol=atol):
        return StabilityTag.STABLE
    if np.allclose(measured, -T, rtol=0.0, atol=atol):
        return StabilityTag.UNSTABLE
    raise InconsistentConfiguration("equilibrium bearings match neither the targets nor their negation")


# ---------- convergence rate ----------

def lyapunov_matrix(follower, neighbors: Sequence) -> np.ndarray:
    """M = sum P_g / d over the follower's neighbours."""
    p = np.asarray(follower, dtype=float)
    M = np.zeros((p.size, p.size))
    for q in np.asarray(neighbors, dtype=float):
        diff = q - p
        dist = np.linalg.norm(diff)
        if dist <= config.EPS_DIST:
            raise CoincidentAgents("follower coincides with a neighbour")
        M += projection(diff) / dist
    return M


def _min_eig(M: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(M).min())


def lyapunov_rate(trajectory: TrajectoryRecord, follower: int, neighbors: Sequence[int]) -> float:
    if trajectory.samples == 0:
        raise EmptyTrajectory("no samples to estimate the rate from")
    idx = np.asarray(neighbors, dtype=int) - 1
    return min(
        _min_eig(lyapunov_matrix(P[follower - 1], P[idx])) for P in trajectory.positions
    )


def lyapunov_envelope(trajectory: TrajectoryRecord, follower: int, equilibrium, rate: float,
                      slack: float = 0.05) -> Tuple[np.ndarray, np.ndarray, bool]:
    """V(t) = |p_f - p*|^2 / 2 against V(0) exp(-rate t)."""
    if trajectory.samples == 0:
        raise EmptyTrajectory("no samples")
    x = trajectory.positions[:, follower - 1, :] - np.asarray(equilibrium, dtype=float)
    V = 0.5 * np.sum(x ** 2, axis=1)
    t = trajectory.times - trajectory.times[0]
    bound = V[0] * np.exp(-rate * t)
    return V, bound, bool(np.all(V <= (1.0 + slack) * bound))


def error_envelope(trajectory: TrajectoryRecord, rate: float, slack: float = 0.05) -> Tuple[np.ndarray, bool]:
    """Bearing error against error(0) exp(-rate t)."""
    if trajectory.samples == 0:
        raise EmptyTrajectory("no samples")
    t = trajectory.times - trajectory.times[0]
    bound = trajectory.errors[0] * np.exp(-rate * t)
    return bound, bool(np.all(trajectory.errors <= (1.0 + slack) * bound))


def cascade_rate(target: TargetFormation, cfg: Configuration) -> float:
    """Smallest lambda_min(M_i) over agents i >= 3 at cfg."""
    p = cfg.as_array()
    rates = []
    for i in range(3, target.graph.n + 1):
        heads = target.graph.out_neighbors(i)
        if heads:
            rates.append(_min_eig(lyapunov_matrix(p[i - 1], p[np.array(heads) - 1])))
    return min(rates) if rates else 0.0


# ---------- linearisation ----------

def linearization(target: TargetFormation, cfg: Configuration, fixed: Iterable[int] = (),
                  gain: float = 1.0) -> np.ndarray:
    """Jacobian of u(p) at cfg, restricted to the coordinates of agents not in `fixed`.

    Edge (i, j) contributes A = ((g.g*) I + g g*^T) P_g / d to block (i, j) and -A to (i, i).
    At a configuration realizing the targets A reduces to P_g / d.
    """
    graph = target.graph
    p = cfg.as_array()
    n, d = p.shape
    g, dist = edge_vectors(graph, p)
    G = target.targets.as_array()
    J = np.zeros((n * d, n * d))
    for (i, j), gk, gs, dk in zip(graph.edges, g, G, dist):
        A = ((gk @ gs) * np.eye(d) + np.outer(gk, gs)) @ projection(gk) / dk
        J[(i - 1) * d:i * d, (j - 1) * d:j * d] += A
        J[(i - 1) * d:i * d, (i - 1) * d:i * d] -= A
    free = [a for a in range(1, n + 1) if a not in set(fixed)]
    idx = np.concatenate([np.arange((a - 1) * d, a * d) for a in free]) if free else np.zeros(0, dtype=int)
    return gain * J[np.ix_(idx, idx)]


def local_growth_rate(target: TargetFormation, cfg: Configuration, fixed: Iterable[int] = ()) -> float:
    """Largest real part of the linearization's eigenvalues; negative means cfg attracts nearby starts."""
    J = linearization(target, cfg, fixed)
    return float(np.linalg.eigvals(J).real.max()) if J.size else 0.0


def control_norm_grid(leaders: Sequence, targets: Sequence, lower, upper, resolution: int = 101,
                      mask_radius: float = 0.1) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """|u| of a 2-D one-to-many follower over a grid; NaN within mask_radius of a leader."""
    L = np.asarray(leaders, dtype=float)
    T = np.asarray(targets, dtype=float)
    xs = np.linspace(lower[0], upper[0], resolution)
    ys = np.linspace(lower[1], upper[1], resolution)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    pts = np.stack([X, Y], axis=-1)                      # (r, r, 2)
    diff = L[None, None, :, :] - pts[:, :, None, :]      # (r, r, k, 2)
    dist = np.linalg.norm(diff, axis=-1)
    near = np.any(dist < mask_radius, axis=-1)
    g = diff / np.where(dist > 0, dist, 1.0)[..., None]
    proj = T[None, None] - g * np.sum(g * T[None, None], axis=-1)[..., None]
    norms = np.linalg.norm(proj.sum(axis=2), axis=-1)
    norms[near] = np.nan
    return xs, ys, norms


# ---------- reports ----------

def equilibrium_report(target: TargetFormation, reference: Configuration,
                       match_tol: Optional[float] = None) -> EquilibriumReport:
    """Equilibrium, per-agent stability and rate for one-to-many and (ordered) LFF targets.

    `reference` supplies the leader positions (one-to-many) or the leader and
    first-follower scale (cascades).
    """
    graph = target.graph
    cls = classify(graph)
    ref = reference.as_array()
    G = target.targets.as_array()

    if cls.kind == GraphClass.ONE_TO_MANY:
        n = graph.n
        heads = np.array([h for _, h in graph.edges]) - 1
        leaders, targets = ref[heads], G
        closed = one_to_many_equilibrium(leaders, targets)
        tag = classify_stability(leaders, targets, match_tol)
        p = ref.copy()
        p[n - 1] = refine_equilibrium(leaders, targets, closed)
        log.info("one-to-many equilibrium %s (closed form %s), %s", p[n - 1], closed, tag.value)
        positions = Configuration.from_array(p)
        tags = [StabilityTag.LEADER_FIXED] * (n - 1) + [tag]
        rate = _min_eig(lyapunov_matrix(p[n - 1], leaders))
    elif cls.kind in (GraphClass.LFF, GraphClass.ORDERED_LFF):
        d21 = float(np.linalg.norm(ref[1] - ref[0]))
        positions = cascade_target_configuration(target, ref[0], d21)
        tags = [StabilityTag.LEADER_FIXED] + [StabilityTag.STABLE] * (graph.n - 1)
        rate = cascade_rate(target, positions)
    else:
        raise NotOrderedLFF("no closed-form equilibrium for an unclassified graph: " + "; ".join(cls.violations))

    u = stacked_control(positions, target).as_array()
    return EquilibriumReport(
        graph_class=cls.kind, positions=positions, stability=tags, rate=rate,
        residual=float(np.max(np.abs(u))) if u.size else 0.0,
    )
