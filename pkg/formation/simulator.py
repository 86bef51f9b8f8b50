"""Fixed-step RK4 integration of the closed loop, batch runs over seeds, and comparisons."""
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import config
from .control import ClosedLoop
from .errors import CoincidentAgents, MismatchedTargets, NotOrderedLFF, NotSubgraph
from .geometry import edge_vectors, random_configuration
from .graphs import classify
from .scenarios import builtin
from .schemas import (
    ComparisonReport, Configuration, ConvergenceComparison, GraphClass, IntegratorSettings,
    Scenario, ScenarioReport, SeedOutcome, TargetFormation, TrajectoryRecord, Verdict,
)

log = logging.getLogger(__name__)


def rk4_step(f, p: np.ndarray, h: float, k1: Optional[np.ndarray] = None) -> np.ndarray:
    k1 = f(p) if k1 is None else k1
    k2 = f(p + 0.5 * h * k1)
    k3 = f(p + 0.5 * h * k2)
    k4 = f(p + h * k3)
    return p + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


class _Recorder:
    def __init__(self):
        self.times: List[float] = []
        self.positions: List[np.ndarray] = []
        self.errors: List[float] = []
        self.norms: List[np.ndarray] = []

    def add(self, t, p, err, u):
        self.times.append(t)
        self.positions.append(p.copy())
        self.errors.append(err)
        self.norms.append(np.linalg.norm(u, axis=1))


def integrate(target: TargetFormation, initial: Configuration, settings: Optional[IntegratorSettings] = None,
              seed: Optional[int] = None) -> TrajectoryRecord:
    """Integrate pdot = u(p) from `initial`.

    Raises CoincidentAgents only for the initial configuration. Coincidence or
    escape past divergence_radius later on ends the run as Diverged.
    """
    settings = settings or IntegratorSettings()
    loop = ClosedLoop(target.graph, target.targets.as_array(), settings.gain)
    gstar = target.targets.as_array()
    h = settings.step
    n_steps = int(np.ceil(settings.t_max / h - 1e-9))

    p = initial.as_array()
    u, g = loop.evaluate(p)  # CoincidentAgents propagates at t = 0
    err = float(np.linalg.norm(g - gstar))
    rec = _Recorder()
    rec.add(0.0, p, err, u)
    last = (0.0, p, err, u)
    recorded = True

    verdict = Verdict.CONVERGED if (settings.stop_early and err < settings.convergence_tol) else None
    s = 0
    while verdict is None and s < n_steps:
        s += 1
        try:
            p = rk4_step(loop, p, h, k1=u)
            u, g = loop.evaluate(p)
        except CoincidentAgents as e:
            log.debug("coincidence at step %d: %s", s, e)
            verdict = Verdict.DIVERGED
            break
        t = s * h
        err = float(np.linalg.norm(g - gstar))
        last, recorded = (t, p, err, u), False
        if not np.all(np.isfinite(p)) or np.max(np.linalg.norm(p, axis=1)) > settings.divergence_radius:
            verdict = Verdict.DIVERGED
        elif settings.stop_early and err < settings.convergence_tol:
            verdict = Verdict.CONVERGED
        if verdict is not None or s % settings.record_every == 0 or s == n_steps:
            rec.add(*last)
            recorded = True

    if not recorded:
        rec.add(*last)
    if verdict is None:
        verdict = Verdict.CONVERGED if rec.errors[-1] < settings.convergence_tol else Verdict.TIMED_OUT
    log.debug("integrate: %s after %d steps, error %.3e", verdict.value, s, rec.errors[-1])

    n, d = p.shape
    return TrajectoryRecord(
        d=d,
        times=np.array(rec.times),
        positions=np.array(rec.positions).reshape(len(rec.times), n, d),
        errors=np.array(rec.errors),
        control_norms=np.array(rec.norms).reshape(len(rec.times), n),
        verdict=verdict,
        convergence_tol=settings.convergence_tol,
        seed=seed,
    )


# ---------- scenario runs ----------

def initial_for(scenario: Scenario, seed: Optional[int]) -> Configuration:
    if scenario.random_initial is None:
        return scenario.initial
    box = scenario.random_initial
    return random_configuration(scenario.witness, seed, box.half_width, box.fixed, box.around)


def _run_seed(job: Tuple[Scenario, Optional[int]]) -> TrajectoryRecord:
    scenario, seed = job
    return integrate(scenario.target(), initial_for(scenario, seed), scenario.settings, seed=seed)


def _map(jobs: list, fn, workers: int) -> list:
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, jobs))
    return [fn(j) for j in jobs]


def run_scenario(scenario: Scenario, seeds: Optional[Sequence[int]] = None,
                 workers: Optional[int] = None) -> Tuple[List[TrajectoryRecord], ScenarioReport]:
    """One run per seed (a single run when the initial configuration is explicit)."""
    if scenario.random_initial is None:
        seeds = [None]
    else:
        seeds = list(seeds) if seeds is not None else scenario.seeds
    workers = workers or config.WORKERS
    t0 = time.time()
    log.info("running %s over %d seed(s), %d worker(s)", scenario.name, len(seeds), workers)
    records = _map([(scenario, s) for s in seeds], _run_seed, workers)
    for r in records:
        log.info("%s seed=%s -> %s (error %.3e)", scenario.name, r.seed, r.verdict.value, r.errors[-1])
    report = evaluate_expectation(scenario, records)
    log.info("%s: passed=%s in %.1fs", scenario.name, report.passed, time.time() - t0)
    return records, report


def evaluate_expectation(scenario: Scenario, records: Sequence[TrajectoryRecord]) -> ScenarioReport:
    exp = scenario.expected
    want = exp.verdict if exp else Verdict.CONVERGED
    check = exp.position if exp else None
    outcomes, notes = [], []
    for r in records:
        position_ok = None
        if check is not None:
            track = r.positions[:, check.agent - 1, :] - np.asarray(check.point, dtype=float)
            dist = np.linalg.norm(track, axis=1)
            if check.tol is not None:
                position_ok = bool(dist[-1] <= check.tol)
            else:
                position_ok = bool(dist.max() >= check.escape_factor * dist[0])
        s = r.summary()
        outcomes.append(SeedOutcome(
            seed=r.seed, verdict=r.verdict, final_error=s.final_error, t_final=s.t_final,
            time_to_tol=s.time_to_tol, position_ok=position_ok,
        ))
    fraction = sum(o.verdict == want for o in outcomes) / len(outcomes)
    passed = True
    if exp is not None:
        if not exp.min_fraction <= fraction <= exp.max_fraction:
            passed = False
            notes.append(f"{want.value} fraction {fraction:.2f} outside [{exp.min_fraction}, {exp.max_fraction}]")
        if check is not None and not all(o.position_ok for o in outcomes):
            passed = False
            notes.append(f"position check on agent {check.agent} failed")
    else:
        passed = fraction == 1.0
    final_position = None
    if check is not None and records:
        final_position = records[0].positions[-1, check.agent - 1, :].tolist()
    return ScenarioReport(
        name=scenario.name, expected=exp, outcomes=outcomes, fraction=fraction,
        mean_final_error=float(np.mean([o.final_error for o in outcomes])),
        final_position=final_position, passed=passed, notes=notes,
    )


def run_paper_scenario(name: str, seeds: Optional[Sequence[int]] = None,
                       workers: Optional[int] = None) -> Tuple[List[TrajectoryRecord], ScenarioReport]:
    return run_scenario(builtin(name), seeds=seeds, workers=workers)


# ---------- comparisons ----------

def _shared_errors(record: TrajectoryRecord, target: TargetFormation) -> np.ndarray:
    gstar = target.targets.as_array()
    out = []
    for P in record.positions:
        try:
            g, _ = edge_vectors(target.graph, P)
            out.append(float(np.linalg.norm(g - gstar)))
        except CoincidentAgents:
            out.append(np.inf)
    return np.array(out)


def _check_comparable(target_a: TargetFormation, target_b: TargetFormation) -> None:
    ga, gb = target_a.graph, target_b.graph
    if ga.n != gb.n or not set(ga.edges) <= set(gb.edges):
        raise NotSubgraph("graph a is not a subgraph of graph b")
    for g in (ga, gb):
        if classify(g).kind not in (GraphClass.LFF, GraphClass.ORDERED_LFF):
            raise NotOrderedLFF("both graphs must be (ordered) LFF")
    A, B = target_a.targets.as_array(), target_b.targets.as_array()
    for k, e in enumerate(ga.edges):
        if not np.allclose(A[k], B[gb.edge_index(*e)], rtol=0.0, atol=config.UNIT_TOL):
            raise MismatchedTargets(f"targets of shared edge {e[0]}->{e[1]} differ")


def compare_convergence(target_a: TargetFormation, target_b: TargetFormation, shared_initial: Configuration,
                        settings: Optional[IntegratorSettings] = None,
                        seed: Optional[int] = None) -> ConvergenceComparison:
    """Run a and b from the same start. Errors and times use a's edges (the shared ones) for both runs."""
    _check_comparable(target_a, target_b)
    settings = settings or IntegratorSettings()
    ra = integrate(target_a, shared_initial, settings, seed=seed)
    rb = integrate(target_b, shared_initial, settings, seed=seed)
    ea, eb = _shared_errors(ra, target_a), _shared_errors(rb, target_a)

    def first_hit(rec, errs):
        hits = np.flatnonzero(errs < settings.convergence_tol)
        return float(rec.times[hits[0]]) if hits.size else None

    ta, tb = first_hit(ra, ea), first_hit(rb, eb)
    k = min(ra.samples, rb.samples)
    return ConvergenceComparison(
        seed=seed, verdict_a=ra.verdict, verdict_b=rb.verdict, time_a=ta, time_b=tb,
        matched_times=ra.times[:k].tolist(), errors_a=ea[:k].tolist(), errors_b=eb[:k].tolist(),
        b_not_slower=tb is not None and (ta is None or tb <= ta),
    )


def _compare_job(job) -> ConvergenceComparison:
    a, b, seed = job
    return compare_convergence(a.target(), b.target(), initial_for(a, seed), a.settings, seed=seed)


def compare_scenarios(a: Scenario, b: Scenario, seeds: Optional[Sequence[int]] = None,
                      workers: Optional[int] = None) -> ComparisonReport:
    """Matched-seed comparison; initial conditions are drawn from a's random box."""
    seeds = list(seeds) if seeds is not None else a.seeds
    if a.random_initial is None:
        seeds = [None]
    runs = _map([(a, b, s) for s in seeds], _compare_job, workers or config.WORKERS)
    return ComparisonReport(
        a=a.name, b=b.name, runs=runs,
        both_converged=all(r.verdict_a == r.verdict_b == Verdict.CONVERGED for r in runs),
        all_b_not_slower=all(r.b_not_slower for r in runs),
    )
