"""Command line front end.

Subcommands:
    run <scenario.yaml>      integrate a scenario file, write outputs
    paper-demo               run the built-in benchmark end to end
    verify-lemmas            randomized checks of the inequality kernel
    graph-check <scenario>   topology diagnostics (H, reachability, bounds)
    analyze <traj> <consts>  metrics + convergence-bound report for a run

Exit codes: 0 success, 1 validation failure, 2 runtime abort (divergence),
3 I/O error.  SEPTRACK_OUT overrides the default output directory; an
explicit --out wins over both.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np
import yaml

from .analysis import AssumedConstants, check_boundedness, compose_convergence_bounds, consensus_metrics
from .expressions import ExpressionError
from .graph import (
    build_laplacian,
    conservative_lambda_min_bound,
    has_leader_rooted_spanning_tree,
    min_singular_value,
)
from .oddpower import separation_coefficients, solve_l_for_d
from .scenario import (
    ScenarioValidationError,
    benchmark_scenario,
    load_scenario,
    read_trajectory_csv,
    write_trajectory,
)
from .simulator import SimulationDiverged, integrate
from .verify import format_suite_table, run_inequality_suites

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2
EXIT_IO = 3


def _out_dir(explicit: str | None) -> str:
    return explicit or os.environ.get("SEPTRACK_OUT") or "out"


def _write_outputs(traj, out_dir: str, stem: str) -> list[str]:
    os.makedirs(out_dir, exist_ok=True)
    written = []
    for fmt, ext in (("csv", ".csv"), ("json-summary", ".json"),
                     ("gnuplot-script", ".gp")):
        path = os.path.join(out_dir, stem + ext)
        write_trajectory(traj, fmt, path)
        written.append(path)
    return written


def _run_and_write(scenario, out_dir: str, stem: str) -> int:
    traj = integrate(scenario)
    report = check_boundedness(traj)
    if not report.ok:
        t, sig, v = report.first_violation
        print(f"run aborted: {sig} became non-finite at t={t}", file=sys.stderr)
        return EXIT_RUNTIME
    for path in _write_outputs(traj, out_dir, stem):
        print(f"wrote {path}")
    return EXIT_OK


def cmd_run(args) -> int:
    scenario = load_scenario(args.scenario)
    overrides = {}
    if args.dt is not None:
        overrides["dt"] = args.dt
    if args.horizon is not None:
        overrides["horizon"] = args.horizon
    if overrides:
        # overrides re-enter through the file form so schedules and grid
        # snapping stay consistent with the new grid
        from .scenario import from_dict, scenario_to_dict

        doc = scenario_to_dict(scenario)
        doc["sim"].update(overrides)
        scenario = from_dict(doc)
    stem = os.path.splitext(os.path.basename(args.scenario))[0]
    return _run_and_write(scenario, _out_dir(args.out), stem)


def cmd_paper_demo(args) -> int:
    scenario = benchmark_scenario(
        seed=args.seed, dt=args.dt, horizon=args.horizon
    )
    return _run_and_write(scenario, _out_dir(args.out), "paper_demo")


def cmd_verify_lemmas(args) -> int:
    results = run_inequality_suites(samples=args.samples, seed=args.seed)
    print(format_suite_table(results))
    return EXIT_OK if all(r.passed for r in results) else EXIT_RUNTIME


def cmd_graph_check(args) -> int:
    scenario = load_scenario(args.scenario)
    dec = build_laplacian(scenario.topology)
    n = scenario.topology.follower_count
    print("H = grounded Laplacian (L_bar + B):")
    print(np.array2string(dec.H, precision=6))
    reachable = has_leader_rooted_spanning_tree(scenario.topology)
    sv = min_singular_value(dec.H)
    print(f"leader-rooted spanning tree: {reachable}")
    print(f"min singular value of H:     {sv:.9g}")
    if n >= 2:
        print(f"agent-count-only bound:      {conservative_lambda_min_bound(n):.9g}")
    return EXIT_OK if reachable else EXIT_VALIDATION


def _assumed_from_doc(doc, scenario) -> tuple[AssumedConstants, str]:
    defaults = {
        "weight_bound": 1.0, "approx_error": 1.0, "slack": 1.0, "rho": 1.0,
        "varrho": 1.0, "overshoot": None, "gain_upper": None, "gamma": 1.0,
    }
    defaults.update(doc.get("defaults") or {})
    psi_reading = doc.get("psi_reading", "first_step")
    steps = [spec.n for spec in scenario.followers]

    def per_step(name, fallback):
        rows = []
        for fi, spec in enumerate(scenario.followers):
            row = []
            for k in range(spec.n):
                v = defaults.get(name)
                if v is None:
                    v = fallback(spec, k)
                row.append(float(v))
            rows.append(tuple(row))
        return tuple(rows)

    def default_overshoot(spec, k):
        r = spec.powers.powers[k]
        if r == 1:
            return 1.0 / min(1.0, spec.gains.d)  # degenerate power: 1/l with l<=1
        return separation_coefficients(r, solve_l_for_d(r, spec.gains.d)).upsilon_bar

    def default_gain_upper(spec, k):
        return max(mode.gain_bounds[k][1] for mode in spec.modes)

    assumed = AssumedConstants(
        weight_bound=per_step("weight_bound", lambda s, k: 1.0),
        approx_error=per_step("approx_error", lambda s, k: 1.0),
        slack=per_step("slack", lambda s, k: 1.0),
        rho=per_step("rho", lambda s, k: 1.0),
        varrho=per_step("varrho", lambda s, k: 1.0),
        overshoot=per_step("overshoot", default_overshoot),
        gain_upper=per_step("gain_upper", default_gain_upper),
        gamma=tuple(float(defaults.get("gamma", 1.0)) for _ in steps),
    )
    return assumed, psi_reading


def cmd_analyze(args) -> int:
    traj = read_trajectory_csv(args.trajectory)
    with open(args.constants, "r", encoding="utf-8") as fh:
        doc = yaml.safe_load(fh) or {}
    if "scenario" not in doc:
        raise ScenarioValidationError(["constants file must name a 'scenario' path"])
    base = os.path.dirname(os.path.abspath(args.constants))
    scen_path = doc["scenario"]
    if not os.path.isabs(scen_path):
        scen_path = os.path.join(base, scen_path)
    scenario = load_scenario(scen_path)
    assumed, psi_reading = _assumed_from_doc(doc, scenario)

    dec = build_laplacian(scenario.topology)
    n = scenario.topology.follower_count
    cons = conservative_lambda_min_bound(n) if n >= 2 else None
    metrics = consensus_metrics(traj, dec.H, conservative_bound=cons)
    report = compose_convergence_bounds(scenario, assumed, psi_reading=psi_reading)

    out_dir = _out_dir(args.out)
    os.makedirs(out_dir, exist_ok=True)
    report_path = os.path.join(out_dir, "bound_report.json")
    with open(report_path, "w", encoding="utf-8") as fh:
        json.dump({
            "decay_rate": report.decay_rate,
            "forcing_offset": report.forcing_offset,
            "s1_limit": report.s1_limit,
            "residual_radius": report.residual_radius,
            "feasible": report.feasible,
            "infeasible_steps": [list(p) for p in report.infeasible_steps],
            "per_follower_decay": list(report.per_follower_decay),
            "per_follower_forcing": list(report.per_follower_forcing),
            "psi_upper": list(report.psi_upper),
            "psi_lower": list(report.psi_lower),
            "margins": [list(m) for m in report.margins],
            "observed": {
                "max_s1_norm": metrics.max_s1_norm,
                "final_s1_norm": metrics.final_s1_norm,
                "max_abs_tracking_error": list(metrics.max_abs_tracking_error),
                "final_abs_tracking_error": list(metrics.final_abs_tracking_error),
            },
        }, fh, indent=2)
        fh.write("\n")
    metrics_path = os.path.join(out_dir, "metrics.csv")
    with open(metrics_path, "w", encoding="utf-8") as fh:
        labels = [f"abs_err_f{fi + 1}" for fi in range(traj.n_followers)]
        fh.write(",".join(["t", "s1_norm", "delta_envelope",
                           "conservative_envelope", *labels]) + "\n")
        for i in range(len(metrics.times)):
            row = [metrics.times[i], metrics.s1_norm[i], metrics.delta_envelope[i],
                   metrics.conservative_envelope[i],
                   *metrics.tracking_abs[i]]
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
    print(f"wrote {report_path}")
    print(f"wrote {metrics_path}")
    if not report.feasible:
        steps = ", ".join(f"follower {f + 1} step {k + 1}"
                          for f, k in report.infeasible_steps)
        print(f"warning: gain margins non-positive at: {steps}", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="septrack",
        description="Consensus tracking for switched odd-power multi-agent networks",
    )
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="integrate a scenario file")
    run.add_argument("scenario")
    run.add_argument("--dt", type=float, default=None)
    run.add_argument("--horizon", type=float, default=None)
    run.add_argument("--out", default=None)
    run.set_defaults(fn=cmd_run)

    demo = sub.add_parser("paper-demo", help="run the built-in benchmark end to end")
    demo.add_argument("--seed", type=int, default=7)
    demo.add_argument("--dt", type=float, default=1e-4)
    demo.add_argument("--horizon", type=float, default=30.0)
    demo.add_argument("--out", default=None)
    demo.set_defaults(fn=cmd_paper_demo)

    ver = sub.add_parser("verify-lemmas", help="randomized inequality suites")
    ver.add_argument("--samples", type=int, default=100_000)
    ver.add_argument("--seed", type=int, default=2024)
    ver.set_defaults(fn=cmd_verify_lemmas)

    gc = sub.add_parser("graph-check", help="topology diagnostics")
    gc.add_argument("scenario")
    gc.set_defaults(fn=cmd_graph_check)

    an = sub.add_parser("analyze", help="metrics and convergence-bound report")
    an.add_argument("trajectory", help="trajectory CSV from a run")
    an.add_argument("constants", help="YAML with scenario path and assumed constants")
    an.add_argument("--out", default=None)
    an.set_defaults(fn=cmd_analyze)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ScenarioValidationError, ExpressionError, ValueError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except SimulationDiverged as exc:
        print(f"runtime abort: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
