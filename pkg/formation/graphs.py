"""Sensing-graph classification and incidence matrices."""
from typing import List, Tuple

import numpy as np

from .schemas import DirectedSensingGraph, GraphClass, GraphClassification


def is_forward_edge(edge: Tuple[int, int]) -> bool:
    tail, head = edge
    return tail > head


def _leader_follower_violations(graph: DirectedSensingGraph, exact_two: bool) -> List[str]:
    """Rule violations against the leader / first-follower structure.

    exact_two=True checks the strict LFF rule (two out-edges per follower),
    False the ordered relaxation (at least two).
    """
    out: List[str] = []
    if graph.n < 2:
        return ["needs at least 2 vertices"]
    lead = graph.out_neighbors(1)
    if lead:
        out.append(f"vertex 1 has {len(lead)} out-edges, leader needs none")
    first = graph.out_neighbors(2)
    if first != [1]:
        out.append(f"vertex 2 out-neighbours {sorted(first)}, first follower needs exactly [1]")
    for i in range(3, graph.n + 1):
        k = len(graph.out_neighbors(i))
        if exact_two and k != 2:
            out.append(f"vertex {i} has {k} out-edges, LFF needs exactly 2")
        elif not exact_two and k < 2:
            out.append(f"vertex {i} has {k} out-edges, ordered LFF needs at least 2")
    for e in sorted(graph.edges):
        if not is_forward_edge(e):
            out.append(f"edge {e[0]}->{e[1]} is not forward")
    return out


def _is_one_to_many(graph: DirectedSensingGraph) -> bool:
    n = graph.n
    return n >= 3 and sorted(graph.edges) == [(n, i) for i in range(1, n)]


def classify(graph: DirectedSensingGraph) -> GraphClassification:
    """Label with LFF > OrderedLFF > OneToMany > Unclassified precedence."""
    lff = _leader_follower_violations(graph, exact_two=True)
    olff = _leader_follower_violations(graph, exact_two=False)
    if not lff:
        return GraphClassification(kind=GraphClass.LFF, leader=1, first_follower=2, also_ordered=True)
    if not olff:
        return GraphClassification(kind=GraphClass.ORDERED_LFF, leader=1, first_follower=2)
    if _is_one_to_many(graph):
        return GraphClassification(kind=GraphClass.ONE_TO_MANY, follower=graph.n)
    violations = sorted(set(lff) | set(olff))
    violations.append("edges are not exactly {(n, i) : i < n}")
    return GraphClassification(kind=GraphClass.UNCLASSIFIED, violations=violations)


def out_selector(graph: DirectedSensingGraph) -> np.ndarray:
    """n x m matrix, S[i, k] = 1 iff agent i+1 is the tail of edge k."""
    S = np.zeros((graph.n, graph.m))
    if graph.m:
        S[graph.tails(), np.arange(graph.m)] = 1.0
    return S


def out_incidence(graph: DirectedSensingGraph, d: int) -> np.ndarray:
    return np.kron(out_selector(graph).T, np.eye(d))


def signed_incidence(graph: DirectedSensingGraph, d: int) -> np.ndarray:
    # tail +I, head -I
    H = np.zeros((graph.m, graph.n))
    for k, (tail, head) in enumerate(graph.edges):
        H[k, tail - 1] = 1.0
        H[k, head - 1] = -1.0
    return np.kron(H, np.eye(d))
