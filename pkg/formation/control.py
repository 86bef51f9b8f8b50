"""Bearing-only control law: u_i = -sum over out-edges of P(g_ij) g*_ij."""
from typing import Tuple, Union

import numpy as np
from scipy.linalg import block_diag

from . import config
from .errors import CoincidentAgents, ControlAssemblyError
from .geometry import bearing, edge_vectors, projection
from .graphs import out_incidence, out_selector, signed_incidence
from .schemas import Configuration, ControlVector, DirectedSensingGraph, TargetFormation


Positions = Union[Configuration, np.ndarray]


def _as_positions(p: Positions) -> np.ndarray:
    return p.as_array() if isinstance(p, Configuration) else np.asarray(p, dtype=float)


def agent_control(i: int, cfg: Configuration, target: TargetFormation, gain: float = 1.0) -> np.ndarray:
    p = cfg.as_array()
    G = target.targets.as_array()
    u = np.zeros(cfg.d)
    for k in target.graph.out_edges(i):
        head = target.graph.edges[k][1]
        try:
            g = bearing(p[i - 1], p[head - 1])
        except CoincidentAgents as e:
            raise CoincidentAgents(str(e), edge=k + 1, agent=i) from e
        u -= projection(g) @ G[k]
    return gain * u


def projected_control(graph: DirectedSensingGraph, positions: Positions, vectors: np.ndarray) -> np.ndarray:
    """Matrix form -Hbar_out^T diag(P_gk) y for any stacked y (m, d); returns (n, d)."""
    p = _as_positions(positions)
    n, d = p.shape
    if graph.m == 0:
        return np.zeros((n, d))
    g, _ = edge_vectors(graph, p)
    D = block_diag(*[projection(gk) for gk in g])
    u = -out_incidence(graph, d).T @ (D @ np.asarray(vectors, dtype=float).reshape(-1))
    return u.reshape(n, d)


def stacked_control(cfg: Configuration, target: TargetFormation, gain: float = 1.0) -> ControlVector:
    per_agent = np.array([agent_control(i, cfg, target) for i in range(1, cfg.n + 1)])
    matrix = projected_control(target.graph, cfg, target.targets.as_array())
    gap = float(np.max(np.abs(per_agent - matrix))) if per_agent.size else 0.0
    if gap > config.ASSEMBLY_TOL:
        raise ControlAssemblyError(f"per-agent and matrix forms differ by {gap:.3g}")
    return ControlVector(d=cfg.d, velocities=(gain * per_agent).tolist())


def undirected_control(cfg: Configuration, target: TargetFormation, gain: float = 1.0) -> ControlVector:
    """Both ends of every edge steer: u = -Hbar^T diag(P_gk) g*."""
    p = cfg.as_array()
    n, d = p.shape
    if target.graph.m == 0:
        return ControlVector(d=d, velocities=np.zeros((n, d)).tolist())
    g, _ = edge_vectors(target.graph, p)
    D = block_diag(*[projection(gk) for gk in g])
    u = -signed_incidence(target.graph, d).T @ (D @ target.targets.as_array().reshape(-1))
    return ControlVector(d=d, velocities=(gain * u.reshape(n, d)).tolist())


class ClosedLoop:
    """Vectorised right-hand side of pdot = u(p) for the integrator."""

    def __init__(self, graph: DirectedSensingGraph, targets: np.ndarray, gain: float = 1.0):
        self.graph = graph
        self.targets = np.asarray(targets, dtype=float)
        self.gain = gain
        self.selector = out_selector(graph)

    def evaluate(self, p: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Control (n, d) and measured bearings (m, d) at p."""
        g, _ = edge_vectors(self.graph, p)
        proj = self.targets - g * np.sum(g * self.targets, axis=1)[:, None]
        return -self.gain * (self.selector @ proj), g

    def __call__(self, p: np.ndarray) -> np.ndarray:
        return self.evaluate(p)[0]
