"""Acceptance harness: run each check in eval/acceptance.jsonl and report pass count and latency."""
import json, pathlib, statistics, sys, time

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1]))

import numpy as np  # noqa: E402

from formation.equilibrium import equilibrium_report, null_space_basis, one_to_many_equilibrium  # noqa: E402
from formation.scenarios import STAR_LEADERS, builtin  # noqa: E402
from formation.simulator import compare_scenarios, run_paper_scenario  # noqa: E402

DATA = pathlib.Path("eval/acceptance.jsonl")


def check_equilibrium(case):
    s = builtin(case["scenario"])
    G = s.targets.as_array()
    p = one_to_many_equilibrium(STAR_LEADERS, G)
    ok = bool(np.linalg.norm(p - np.asarray(case["point"])) <= case["tol"])
    return ok, f"equilibrium={np.round(p, 6).tolist()}"


def check_report(case):
    s = builtin(case["scenario"])
    reference = s.initial if s.initial is not None else s.witness
    report = equilibrium_report(s.target(), reference, s.match_tol)
    tags = [t.value for t in report.stability]
    return tags[-1] == case["stability"], f"stability={tags[-1]} rate={report.rate:.4f}"


def check_nullspace(case):
    s = builtin(case["scenario"])
    basis = null_space_basis(s.targets.as_array())
    ok = (basis.kernel_dim, basis.m) == (case["kernel_dim"], case["m"])
    return ok, f"kernel_dim={basis.kernel_dim} m={basis.m}"


def check_scenario(case):
    _, report = run_paper_scenario(case["scenario"], seeds=case.get("seeds"))
    return report.passed, f"fraction={report.fraction:.2f} notes={report.notes}"


def check_compare(case):
    report = compare_scenarios(builtin(case["a"]), builtin(case["b"]), seeds=range(case["seeds"]))
    ok = report.both_converged and report.all_b_not_slower
    return ok, f"both_converged={report.both_converged} b_not_slower={report.all_b_not_slower}"


CHECKS = {
    "equilibrium": check_equilibrium,
    "report": check_report,
    "nullspace": check_nullspace,
    "scenario": check_scenario,
    "compare": check_compare,
}


def main():
    latencies = []
    ok, total = 0, 0
    for line in DATA.read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        total += 1
        case = json.loads(line)
        t0 = time.time()
        passed, detail = CHECKS[case["kind"]](case)
        dt = (time.time() - t0) * 1000
        latencies.append(dt)
        print(f"- {case['name']}\n  passed={passed}, {detail}, latency_ms={dt:.0f}")
        if passed:
            ok += 1

    p95 = statistics.quantiles(latencies, n=20)[18] if len(latencies) > 1 else latencies[0]
    print(f"\nPassed {ok}/{total} | p50={statistics.median(latencies):.0f}ms p95={p95:.0f}ms")
    return 0 if ok == total else 1


if __name__ == "__main__":
    sys.exit(main())
