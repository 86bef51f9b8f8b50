"""Directed bearing-only formation control: graphs, control law, equilibria, simulation."""
from .control import ClosedLoop, agent_control, stacked_control, undirected_control
from .equilibrium import (
    cascade_target_configuration, classify_stability, equilibrium_report, null_space_basis,
    one_to_many_equilibrium, realizability_check, y_candidate,
)
from .errors import FormationError
from .geometry import bearing, bearing_function, bearing_rigidity_matrix, projection
from .graphs import classify, is_forward_edge, out_incidence, signed_incidence
from .scenarios import load_scenario, save_scenario
from .schemas import (
    BearingSet, Configuration, DirectedSensingGraph, IntegratorSettings, TargetFormation,
    TrajectoryRecord,
)
from .simulator import compare_convergence, integrate, run_paper_scenario, run_scenario

__version__ = "0.1.0"
