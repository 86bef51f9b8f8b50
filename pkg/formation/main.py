"""Command-line entry point: python -m formation <command> ..."""
import argparse, json, sys, time
from typing import List, Optional

import numpy as np
from pydantic import ValidationError

from . import config
from .equilibrium import equilibrium_report, null_space_basis
from .errors import FormationError, ParseError, ScenarioValidationError, UnknownScenario
from .export import export_matrix, export_trajectory, write_verdict
from .geometry import bearing_rigidity_matrix, numerical_rank
from .graphs import classify
from .scenarios import PAPER_SCENARIOS, as_validation_error, builtin, builtin_names, load_graph, load_scenario
from .schemas import GraphClass, Scenario, Verdict
from .simulator import compare_scenarios, run_scenario


def _print(obj) -> None:
    print(json.dumps(obj, indent=2))


def _apply_overrides(scenario: Scenario, args) -> Scenario:
    updates = {k: v for k, v in (
        ("step", getattr(args, "step", None)),
        ("t_max", getattr(args, "t_max", None)),
        ("convergence_tol", getattr(args, "tol", None)),
    ) if v is not None}
    if not updates:
        return scenario
    try:
        settings = scenario.settings.model_validate({**scenario.settings.model_dump(), **updates})
    except ValidationError as e:
        raise as_validation_error(e) from e
    return scenario.model_copy(update={"settings": settings})


def _seeds(args) -> Optional[List[int]]:
    if getattr(args, "seed", None) is not None:
        return [args.seed]
    if getattr(args, "seeds", None) is not None:
        return list(range(args.seeds))
    return None


def cmd_classify(args) -> int:
    result = classify(load_graph(args.source))
    _print(result.model_dump(mode="json", by_alias=True))
    return 0


def _reference(scenario: Scenario):
    return scenario.initial if scenario.initial is not None else scenario.witness


def cmd_equilibrium(args) -> int:
    s = load_scenario(args.scenario)
    report = equilibrium_report(s.target(), _reference(s), s.match_tol)
    _print(report.model_dump(mode="json"))
    return 0


def cmd_nullspace(args) -> int:
    s = load_scenario(args.scenario)
    cls = classify(s.graph)
    agent = args.agent if args.agent is not None else (cls.follower if cls.kind == GraphClass.ONE_TO_MANY else None)
    if agent is None:
        raise FormationError("graph is not one-to-many; pick a follower with --agent")
    if not 1 <= agent <= s.graph.n:
        raise FormationError(f"agent {agent} outside 1..{s.graph.n}")
    ks = s.graph.out_edges(agent)
    if not ks:
        raise FormationError(f"agent {agent} senses no one")
    basis = null_space_basis(s.targets.as_array()[ks])
    _print({"agent": agent, **basis.summary().model_dump()})
    return 0


def cmd_simulate(args) -> int:
    s = _apply_overrides(load_scenario(args.scenario), args)
    records, report = run_scenario(s, seeds=_seeds(args), workers=args.workers)
    out = config.OUT_DIR if args.out is None else args.out
    for r in records:
        stem = s.name if r.seed is None else f"{s.name}-seed{r.seed}"
        export_trajectory(r, f"{out}/{stem}.csv")
        write_verdict(r, f"{out}/{stem}.json", extra={"scenario": s.name})
    print(f"✅ Wrote {len(records)} trajectories to {out}")
    _print(report.model_dump(mode="json", exclude={"expected"}))
    return 0 if report.passed else 1


def cmd_compare(args) -> int:
    a = _apply_overrides(load_scenario(args.a), args)
    b = _apply_overrides(load_scenario(args.b), args)
    report = compare_scenarios(a, b, seeds=_seeds(args), workers=args.workers)
    _print(report.compact())
    return 0 if report.both_converged and report.all_b_not_slower else 1


def cmd_paper(args) -> int:
    if args.list or not args.name:
        for name in builtin_names():
            print(name + ("" if name in PAPER_SCENARIOS else "  (extra)"))
        return 0
    s = _apply_overrides(builtin(args.name), args)
    t0 = time.time()
    _, report = run_scenario(s, seeds=_seeds(args), workers=args.workers)
    status = "PASS" if report.passed else "FAIL"
    print(f"{status} {s.name}: {report.fraction:.0%} of {len(report.outcomes)} run(s) "
          f"{(report.expected.verdict if report.expected else Verdict.CONVERGED).value} "
          f"({time.time() - t0:.1f}s)")
    if report.final_position is not None:
        print(f"  final position {np.round(report.final_position, 6).tolist()}")
    for note in report.notes:
        print(f"  {note}")
    return 0 if report.passed else 1


def cmd_rigidity(args) -> int:
    s = load_scenario(args.scenario)
    cfg = s.witness if s.witness is not None else _reference(s)
    R = bearing_rigidity_matrix(s.graph, cfg)
    rank = numerical_rank(R)
    full = cfg.d * s.graph.n - cfg.d - 1
    if args.out:
        export_matrix(R, f"{args.out}/{s.name}-rigidity.csv")
    _print({"scenario": s.name, "rank": rank, "required": full, "infinitesimally_rigid": rank == full})
    return 0


def cmd_schema(args) -> int:
    _print(Scenario.model_json_schema())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="formation", description="Directed bearing-only formation control.")
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING (default from FORMATION_LOG_LEVEL)")
    sub = parser.add_subparsers(dest="command", required=True)

    def run_flags(p):
        p.add_argument("--seed", type=int, default=None, help="run a single seed")
        p.add_argument("--seeds", type=int, default=None, help="run seeds 0..N-1")
        p.add_argument("--step", type=float, default=None)
        p.add_argument("--t-max", type=float, default=None)
        p.add_argument("--tol", type=float, default=None)
        p.add_argument("--workers", type=int, default=None)

    p = sub.add_parser("classify", help="classify a graph (graph JSON, scenario file or built-in name)")
    p.add_argument("source")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("equilibrium", help="closed-form equilibrium, stability and rate")
    p.add_argument("scenario")
    p.set_defaults(func=cmd_equilibrium)

    p = sub.add_parser("nullspace", help="equilibrium-set basis dimensions and residuals")
    p.add_argument("scenario")
    p.add_argument("--agent", type=int, default=None)
    p.set_defaults(func=cmd_nullspace)

    p = sub.add_parser("simulate", help="integrate a scenario, write CSV + verdict JSON")
    p.add_argument("scenario")
    p.add_argument("--out", default=None)
    run_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", help="convergence comparison of two scenarios on matched seeds")
    p.add_argument("a")
    p.add_argument("b")
    run_flags(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("paper", help="run a built-in reproduction and report pass/fail")
    p.add_argument("name", nargs="?")
    p.add_argument("--list", action="store_true")
    run_flags(p)
    p.set_defaults(func=cmd_paper)

    p = sub.add_parser("rigidity", help="bearing rigidity rank at the witness")
    p.add_argument("scenario")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_rigidity)

    p = sub.add_parser("schema", help="print the scenario JSON schema")
    p.set_defaults(func=cmd_schema)
    return parser


def cli_main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    config.configure_logging(args.log_level)
    try:
        return args.func(args)
    except (ParseError, ScenarioValidationError, UnknownScenario) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except ValidationError as e:
        print(f"error: {as_validation_error(e)}", file=sys.stderr)
        return 2
    except FormationError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(cli_main())
