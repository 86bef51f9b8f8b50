"""Value types shared by every module (pydantic models, 1-based agent labels)."""
import logging
from enum import Enum
from typing import Any, Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from . import config

log = logging.getLogger(__name__)


# ---------- graphs ----------

class DirectedSensingGraph(BaseModel):
    """Edge (i, j) means agent i senses agent j. Edge order fixes row order everywhere."""
    model_config = ConfigDict(frozen=True)

    n: int = Field(ge=1)
    edges: List[Tuple[int, int]] = []

    @model_validator(mode="after")
    def _check_edges(self):
        seen = set()
        for tail, head in self.edges:
            if not (1 <= tail <= self.n and 1 <= head <= self.n):
                raise ValueError(f"edge ({tail}, {head}) outside 1..{self.n}")
            if tail == head:
                raise ValueError(f"self-loop at vertex {tail}")
            if (tail, head) in seen:
                raise ValueError(f"duplicate edge ({tail}, {head})")
            seen.add((tail, head))
        return self

    @property
    def m(self) -> int:
        return len(self.edges)

    def out_neighbors(self, i: int) -> List[int]:
        return [h for t, h in self.edges if t == i]

    def out_edges(self, i: int) -> List[int]:
        """0-based indices of the edges whose tail is i."""
        return [k for k, (t, _) in enumerate(self.edges) if t == i]

    def edge_index(self, tail: int, head: int) -> int:
        return self.edges.index((tail, head))

    def tails(self) -> np.ndarray:
        return np.array([t - 1 for t, _ in self.edges], dtype=int)

    def heads(self) -> np.ndarray:
        return np.array([h - 1 for _, h in self.edges], dtype=int)


class GraphClass(str, Enum):
    LFF = "LFF"
    ORDERED_LFF = "OrderedLFF"
    ONE_TO_MANY = "OneToMany"
    UNCLASSIFIED = "Unclassified"


class GraphClassification(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    kind: GraphClass = Field(alias="class")
    leader: Optional[int] = None
    first_follower: Optional[int] = None
    follower: Optional[int] = None  # the mobile agent of a one-to-many graph
    also_ordered: bool = False
    violations: List[str] = []


# ---------- geometry ----------

def _check_dim(d: int) -> None:
    if d not in (2, 3):
        raise ValueError(f"dimension must be 2 or 3, got {d}")


class Configuration(BaseModel):
    d: int
    positions: List[List[float]]

    @model_validator(mode="after")
    def _check(self):
        _check_dim(self.d)
        if not self.positions:
            raise ValueError("configuration needs at least one agent")
        for i, p in enumerate(self.positions, start=1):
            if len(p) != self.d:
                raise ValueError(f"agent {i} has dimension {len(p)}, expected {self.d}")
        return self

    @property
    def n(self) -> int:
        return len(self.positions)

    def as_array(self) -> np.ndarray:
        return np.array(self.positions, dtype=float)

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "Configuration":
        arr = np.asarray(arr, dtype=float)
        return cls(d=arr.shape[1], positions=arr.tolist())


class BearingSet(BaseModel):
    d: int
    vectors: List[List[float]] = []

    @model_validator(mode="after")
    def _check(self):
        _check_dim(self.d)
        for k, v in enumerate(self.vectors, start=1):
            if len(v) != self.d:
                raise ValueError(f"bearing {k} has dimension {len(v)}, expected {self.d}")
            norm = float(np.linalg.norm(v))
            if abs(norm - 1.0) > config.UNIT_TOL:
                raise ValueError(f"target norm: bearing {k} has norm {norm:.6g}")
        return self

    @property
    def m(self) -> int:
        return len(self.vectors)

    def as_array(self) -> np.ndarray:
        return np.array(self.vectors, dtype=float).reshape(len(self.vectors), self.d)

    @classmethod
    def from_array(cls, arr: np.ndarray, d: Optional[int] = None) -> "BearingSet":
        arr = np.asarray(arr, dtype=float)
        return cls(d=d or arr.shape[1], vectors=arr.tolist())


class TargetFormation(BaseModel):
    graph: DirectedSensingGraph
    targets: BearingSet
    witness: Optional[Configuration] = None

    @model_validator(mode="after")
    def _check(self):
        if self.targets.m != self.graph.m:
            raise ValueError(f"{self.targets.m} targets for {self.graph.m} edges")
        if self.witness is not None:
            if self.witness.n != self.graph.n or self.witness.d != self.targets.d:
                raise ValueError("witness shape does not match graph and targets")
            from .geometry import bearing_function  # geometry imports this module
            realized = bearing_function(self.graph, self.witness).as_array()
            if not np.allclose(realized, self.targets.as_array(), rtol=0.0, atol=config.WITNESS_TOL):
                raise ValueError("witness does not realize the targets")
        return self

    @property
    def d(self) -> int:
        return self.targets.d

    @classmethod
    def from_witness(cls, graph: DirectedSensingGraph, witness: Configuration) -> "TargetFormation":
        from .geometry import bearing_function
        return cls(graph=graph, targets=bearing_function(graph, witness), witness=witness)


# ---------- control / equilibrium ----------

class ControlVector(BaseModel):
    d: int
    velocities: List[List[float]]

    def as_array(self) -> np.ndarray:
        return np.array(self.velocities, dtype=float)

    def norms(self) -> List[float]:
        return np.linalg.norm(self.as_array(), axis=1).tolist()


class StabilityTag(str, Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"
    LEADER_FIXED = "leader-fixed"


class EquilibriumReport(BaseModel):
    graph_class: GraphClass
    positions: Configuration
    stability: List[StabilityTag]
    rate: Optional[float] = None
    residual: float  # max |u_i| at positions

    @model_validator(mode="after")
    def _check(self):
        if self.residual > 1e-9:
            raise ValueError(f"control at reported equilibrium is {self.residual:.3g}, not zero")
        if len(self.stability) != self.positions.n:
            raise ValueError("one stability tag per agent")
        return self


class NullSpaceSummary(BaseModel):
    n: int
    d: int
    rank_P_tilde: int
    kernel_dim: int
    m: int
    residual_G: float
    residual_N: float


class NullSpaceBasis(BaseModel):
    """Kernel of P_tilde split as range(G) plus range(G_perp N)."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    d: int
    bearings: np.ndarray   # (n-1, d)
    perps: np.ndarray      # (n-1, d, d-1)
    P_tilde: np.ndarray    # d x d(n-1)
    G: np.ndarray          # d(n-1) x (n-1)
    G_perp: np.ndarray     # d(n-1) x (d-1)(n-1)
    N: np.ndarray          # (d-1)(n-1) x m
    rank_P_tilde: int
    residual_G: float
    residual_N: float

    @property
    def k(self) -> int:
        return self.bearings.shape[0]

    @property
    def m(self) -> int:
        return self.N.shape[1]

    @property
    def kernel_dim(self) -> int:
        return self.k + self.m

    def summary(self) -> NullSpaceSummary:
        return NullSpaceSummary(
            n=self.k + 1, d=self.d, rank_P_tilde=self.rank_P_tilde, kernel_dim=self.kernel_dim,
            m=self.m, residual_G=self.residual_G, residual_N=self.residual_N,
        )


# ---------- simulation ----------

class IntegratorSettings(BaseModel):
    step: float = Field(default_factory=lambda: config.STEP, gt=0)
    t_max: float = Field(default_factory=lambda: config.T_MAX, gt=0)
    convergence_tol: float = Field(default_factory=lambda: config.TOL, gt=0)
    divergence_radius: float = Field(default_factory=lambda: config.DIVERGENCE_RADIUS, gt=0)
    record_every: int = Field(1, ge=1)
    gain: float = Field(default_factory=lambda: config.GAIN, gt=0)
    stop_early: bool = True

    @model_validator(mode="after")
    def _check(self):
        if self.step > self.t_max:
            raise ValueError(f"step {self.step} exceeds t_max {self.t_max}")
        return self


class Verdict(str, Enum):
    CONVERGED = "Converged"
    DIVERGED = "Diverged"
    TIMED_OUT = "TimedOut"


class TrajectorySummary(BaseModel):
    verdict: Verdict
    seed: Optional[int] = None
    samples: int
    t_final: Optional[float] = None
    final_error: Optional[float] = None
    time_to_tol: Optional[float] = None


class TrajectoryRecord(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    d: int
    times: np.ndarray          # (s,)
    positions: np.ndarray      # (s, n, d)
    errors: np.ndarray         # (s,)
    control_norms: np.ndarray  # (s, n)
    verdict: Verdict
    convergence_tol: float
    seed: Optional[int] = None

    @model_validator(mode="after")
    def _check(self):
        s = len(self.times)
        if not (len(self.positions) == len(self.errors) == len(self.control_norms) == s):
            raise ValueError("trajectory fields have different lengths")
        if s > 1 and np.any(np.diff(self.times) <= 0):
            raise ValueError("sample times must be strictly increasing")
        if self.verdict == Verdict.CONVERGED and not (s and self.errors[-1] < self.convergence_tol):
            raise ValueError("Converged verdict without final error below tolerance")
        return self

    @property
    def n(self) -> int:
        return self.positions.shape[1]

    @property
    def samples(self) -> int:
        return len(self.times)

    def configuration(self, k: int) -> Configuration:
        return Configuration.from_array(self.positions[k])

    def time_to_tolerance(self, tol: Optional[float] = None) -> Optional[float]:
        tol = self.convergence_tol if tol is None else tol
        hits = np.flatnonzero(self.errors < tol)
        return float(self.times[hits[0]]) if hits.size else None

    def summary(self) -> TrajectorySummary:
        if not self.samples:
            return TrajectorySummary(verdict=self.verdict, seed=self.seed, samples=0)
        return TrajectorySummary(
            verdict=self.verdict, seed=self.seed, samples=self.samples,
            t_final=float(self.times[-1]), final_error=float(self.errors[-1]),
            time_to_tol=self.time_to_tolerance(),
        )


# ---------- scenarios ----------

class RandomBox(BaseModel):
    """Uniform box around the witness centroid, or around each witness position when around="witness".

    half_width defaults to 2x the formation diameter (centroid) or a quarter of it (witness).
    """
    half_width: Optional[float] = Field(None, gt=0)
    around: Literal["centroid", "witness"] = "centroid"
    fixed: List[int] = []  # agents kept at their witness positions


class PositionCheck(BaseModel):
    agent: int = Field(ge=1)
    point: List[float]
    tol: Optional[float] = Field(None, gt=0)            # final position within tol of point
    escape_factor: Optional[float] = Field(None, gt=1)  # max distance reaches factor x initial distance

    @model_validator(mode="after")
    def _check(self):
        if (self.tol is None) == (self.escape_factor is None):
            raise ValueError("position check needs exactly one of tol, escape_factor")
        return self


class Expectation(BaseModel):
    verdict: Verdict = Verdict.CONVERGED
    min_fraction: float = Field(0.0, ge=0, le=1)
    max_fraction: float = Field(1.0, ge=0, le=1)
    position: Optional[PositionCheck] = None


def _normalise_targets(raw: Any, d: Optional[int]) -> Any:
    vectors = raw.get("vectors") if isinstance(raw, dict) else raw
    if not isinstance(vectors, list):
        return raw
    out = []
    for k, v in enumerate(vectors, start=1):
        norm = float(np.linalg.norm(v)) if len(v) else 0.0
        if config.UNIT_TOL < abs(norm - 1.0) <= config.TARGET_NORM_TOL:
            log.warning("renormalising target %d (norm %.6f)", k, norm)
            v = (np.asarray(v, dtype=float) / norm).tolist()
        out.append(v)
    return {"d": raw.get("d", d) if isinstance(raw, dict) else d, "vectors": out}


class Scenario(BaseModel):
    name: str
    description: str = ""
    d: int
    graph: DirectedSensingGraph
    targets: Optional[BearingSet] = None
    witness: Optional[Configuration] = None
    initial: Optional[Configuration] = None
    random_initial: Optional[RandomBox] = None
    seeds: List[int] = [0]
    settings: IntegratorSettings = Field(default_factory=IntegratorSettings)
    expected: Optional[Expectation] = None
    match_tol: float = Field(default_factory=lambda: config.MATCH_TOL, gt=0)

    @model_validator(mode="before")
    @classmethod
    def _targets_to_unit(cls, data: Any) -> Any:
        if isinstance(data, dict) and data.get("targets") is not None and not isinstance(data["targets"], BearingSet):
            data = dict(data)
            data["targets"] = _normalise_targets(data["targets"], data.get("d"))
        return data

    @model_validator(mode="after")
    def _check(self):
        _check_dim(self.d)
        if self.targets is None and self.witness is None:
            raise ValueError("either targets or witness is required")
        if self.targets is None:
            from .geometry import bearing_function
            self.targets = bearing_function(self.graph, self.witness)
        self.target()  # alignment with edges, witness consistency
        if self.initial is None and self.random_initial is None:
            raise ValueError("either initial or random_initial is required")
        if self.initial is not None:
            if self.initial.n != self.graph.n:
                raise ValueError(f"initial has {self.initial.n} agents, graph has {self.graph.n}")
            if self.initial.d != self.d:
                raise ValueError("initial dimension does not match d")
        if self.random_initial is not None:
            if self.witness is None:
                raise ValueError("random_initial needs a witness configuration")
            if any(not 1 <= i <= self.graph.n for i in self.random_initial.fixed):
                raise ValueError("random_initial.fixed outside 1..n")
        if not self.seeds:
            raise ValueError("at least one seed is required")
        return self

    def target(self) -> TargetFormation:
        return TargetFormation(graph=self.graph, targets=self.targets, witness=self.witness)


class SeedOutcome(BaseModel):
    seed: Optional[int] = None
    verdict: Verdict
    final_error: Optional[float] = None
    t_final: Optional[float] = None
    time_to_tol: Optional[float] = None
    position_ok: Optional[bool] = None


class ScenarioReport(BaseModel):
    name: str
    expected: Optional[Expectation] = None
    outcomes: List[SeedOutcome]
    fraction: float  # share of seeds whose verdict equals the expected one
    mean_final_error: Optional[float] = None
    final_position: Optional[List[float]] = None  # agent under the position check, first seed
    passed: bool
    notes: List[str] = []


class ConvergenceComparison(BaseModel):
    seed: Optional[int] = None
    verdict_a: Verdict
    verdict_b: Verdict
    time_a: Optional[float] = None
    time_b: Optional[float] = None
    matched_times: List[float]
    errors_a: List[float]
    errors_b: List[float]
    b_not_slower: bool


class ComparisonReport(BaseModel):
    a: str
    b: str
    runs: List[ConvergenceComparison]
    both_converged: bool
    all_b_not_slower: bool

    def compact(self) -> Dict[str, Any]:
        return {
            "a": self.a, "b": self.b,
            "both_converged": self.both_converged, "all_b_not_slower": self.all_b_not_slower,
            "runs": [r.model_dump(mode="json", exclude={"matched_times", "errors_a", "errors_b"}) for r in self.runs],
        }
