"""Command-line entry points: simulate, validate-cantelli, solution-space.

Per-step streams go to CSV with a fixed column order, run summaries to JSON.
Exit codes: 0 success, 1 usage or config error, 2 run completed but raised a
safety flag.  Set PRVO_LOG_LEVEL to adjust diagnostics verbosity.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import math
import os
import sys
from pathlib import Path

from .baselines import (
    InflationConfig,
    inflated_feasible_scales,
    orca_halfplane_from_pair,
    porca_feasible_scales,
)
from .geometry import Gaussian2, Interval, IntervalSet, Vec2
from .montecarlo import empirical_eta, substream
from .moments import UncertainPair, scaled_margin_polys
from .rvo import RobotState
from .scenario_io import ScenarioFormatError, load_scenario
from .simulator import Scenario, build_pair, observe, plan_step, run
from .surrogate import (
    SurrogateProblem,
    cantelli_eta,
    cantelli_k,
    choose_expansion_point,
    solve_exact,
    solve_taylor,
)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_SAFETY = 2

log = logging.getLogger("prvo")


def _fmt(x: float) -> str:
    return repr(float(x))


def _apply_overrides(scenario: Scenario, args) -> Scenario:
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if getattr(args, "k", None) is not None:
        changes["k"] = args.k
    if getattr(args, "eta", None) is not None:
        changes["k"] = cantelli_k(args.eta)
    if getattr(args, "candidates", None) is not None:
        changes["n_candidates"] = args.candidates
    return dataclasses.replace(scenario, **changes) if changes else scenario


def cmd_simulate(args) -> int:
    scenario = _apply_overrides(load_scenario(args.scenario), args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    result = run(scenario, validate_n=args.validate or 0)

    lines = ["step,robot,mean_x,mean_y,cmd_vx,cmd_vy,exec_vx,exec_vy,s,candidate,feasible"]
    for step_log in result.logs:
        for i, rec in enumerate(step_log.robots):
            lines.append(
                ",".join(
                    [
                        str(step_log.step),
                        str(i),
                        _fmt(rec.position.x),
                        _fmt(rec.position.y),
                        _fmt(rec.commanded.x),
                        _fmt(rec.commanded.y),
                        _fmt(rec.executed.x),
                        _fmt(rec.executed.y),
                        _fmt(rec.s),
                        str(rec.candidate_index),
                        str(int(not rec.infeasible)),
                    ]
                )
            )
    (out_dir / "trajectory.csv").write_text("\n".join(lines) + "\n")
    (out_dir / "summary.json").write_text(
        json.dumps(result.summary.to_dict(), indent=2) + "\n"
    )
    if args.validate:
        eta_lines = ["step,robot,eta"]
        for step_log in result.logs:
            for i, rec in enumerate(step_log.robots):
                if rec.eta is not None:
                    eta_lines.append(f"{step_log.step},{i},{_fmt(rec.eta)}")
        (out_dir / "eta.csv").write_text("\n".join(eta_lines) + "\n")

    log.info("simulate: %s", result.summary.to_dict())
    return EXIT_SAFETY if result.summary.any_collision else EXIT_OK


def cmd_validate_cantelli(args) -> int:
    scenario = _apply_overrides(load_scenario(args.scenario), args)
    k_list = [float(v) for v in args.k_list.split(",")]
    n = args.samples
    stderr = 0.5 / math.sqrt(n)
    states = [
        RobotState(cfg.start, Vec2(0.0, 0.0), cfg.radius) for cfg in scenario.robots
    ]
    print("k,cantelli_bound,min_empirical_eta,pass")
    all_pass = True
    for k in k_list:
        sck = dataclasses.replace(scenario, k=k)
        bound = cantelli_eta(k)
        min_eta = 1.0
        for i in range(len(states)):
            beliefs = observe(sck, states, 0, i)
            commanded, _ = plan_step(
                sck, beliefs, i, rng=substream(sck.seed, "cand", 0, i)
            )
            for j in range(len(states)):
                if j == i:
                    continue
                pair = build_pair(sck, beliefs, i, j, True)
                est = empirical_eta(
                    pair, commanded, n, substream(sck.seed, "vcant", i, j)
                )
                min_eta = min(min_eta, est.eta)
        ok = min_eta >= bound - 2.0 * stderr
        all_pass = all_pass and ok
        print(f"{_fmt(k)},{_fmt(bound)},{_fmt(min_eta)},{int(ok)}")
    return EXIT_OK if all_pass else EXIT_SAFETY


def _table_pairs(scenario: Scenario, advance: float = 0.0):
    """Nominal two-robot geometry for solution-space tables.

    Robots move at their goal-directed preferred velocities; the candidate
    path is the ego's own preferred direction.  With advance > 0 the nominal
    straight-line trajectories are first advanced that many seconds, which
    lets a stand-off scenario be analyzed at its mid-encounter snapshot.
    """
    prefs, positions = [], []
    for cfg in scenario.robots:
        to_goal = cfg.goal - cfg.start
        d = to_goal.norm()
        if d == 0.0:
            raise ScenarioFormatError("robot already at goal; no table direction")
        v = to_goal * (cfg.preferred_speed / d)
        prefs.append(v)
        positions.append(cfg.start + v * advance)
    pairs = []
    for i in range(2):
        j = 1 - i
        ci, cj = scenario.robots[i], scenario.robots[j]
        pair = UncertainPair(
            pi=Gaussian2(positions[i], ci.pos_cov),
            pj=Gaussian2(positions[j], cj.pos_cov),
            vi=Gaussian2(prefs[i], ci.vel_cov),
            vj=Gaussian2(prefs[j], cj.vel_cov),
            actuation_cov=ci.actuation_cov,
            R=ci.radius + cj.radius,
        )
        pairs.append((pair, prefs[i]))
    return pairs


def build_pair_from_configs(ci, cj, vi: Vec2, vj: Vec2) -> UncertainPair:
    return UncertainPair(
        pi=Gaussian2(ci.start, ci.pos_cov),
        pj=Gaussian2(cj.start, cj.pos_cov),
        vi=Gaussian2(vi, ci.vel_cov),
        vj=Gaussian2(vj, cj.vel_cov),
        actuation_cov=ci.actuation_cov,
        R=ci.radius + cj.radius,
    )


def cmd_solution_space(args) -> int:
    scenario = _apply_overrides(load_scenario(args.scenario), args)
    if len(scenario.robots) != 2:
        raise ScenarioFormatError(
            "solution-space requires a two-robot scenario", args.scenario
        )
    s_hi = math.inf if args.s_max is None else args.s_max
    domain = Interval(0.0, s_hi)
    method = args.method

    if method == "inflation":
        if args.confidence is None:
            raise ScenarioFormatError("inflation requires --confidence", args.scenario)
        params = [float(v) for v in args.confidence.split(",")]
    elif method == "porca":
        if args.eta_list is None:
            raise ScenarioFormatError("porca requires --eta", args.scenario)
        params = [float(v) for v in args.eta_list.split(",")]
    else:
        if args.k_list is not None:
            params = [float(v) for v in args.k_list.split(",")]
        elif args.eta_list is not None:
            params = [cantelli_k(float(v)) for v in args.eta_list.split(",")]
        else:
            params = [scenario.k]

    pairs = _table_pairs(scenario, advance=args.advance)
    print("method,param,robot,interval,lo,hi,subset_of_prev")
    prev: dict[int, IntervalSet] = {}
    for param in params:
        for i, (pair, direction) in enumerate(pairs):
            if method == "inflation":
                scales = inflated_feasible_scales(
                    pair, direction, InflationConfig(param), domain
                ).scales
            elif method == "porca":
                h = orca_halfplane_from_pair(pair)
                scales = porca_feasible_scales(h, direction, param, domain)
            else:
                polys = scaled_margin_polys(pair, direction)
                problem = SurrogateProblem(
                    polys, param, domain, choose_expansion_point(polys, domain)
                )
                solver = solve_taylor if method == "prvo-taylor" else solve_exact
                scales = solver(problem)
            subset = ""
            if i in prev:
                subset = str(int(prev[i].contains_set(scales, tol=1e-9)))
            prev[i] = scales
            if scales.is_empty:
                print(f"{method},{_fmt(param)},{i},-1,,,{subset}")
            for idx, iv in enumerate(scales):
                hi = "inf" if math.isinf(iv.hi) else _fmt(iv.hi)
                print(f"{method},{_fmt(param)},{i},{idx},{_fmt(iv.lo)},{hi},{subset}")
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="prvo",
        description="Probabilistic reciprocal velocity obstacle simulations",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run a scenario and write CSV/JSON outputs")
    p_sim.add_argument("scenario")
    p_sim.add_argument("--out", required=True, help="output directory")
    p_sim.add_argument("--seed", type=int, default=None)
    p_sim.add_argument("--k", type=float, default=None)
    p_sim.add_argument("--eta", type=float, default=None)
    p_sim.add_argument("--candidates", type=int, default=None)
    p_sim.add_argument(
        "--validate",
        type=int,
        default=0,
        metavar="N",
        help="per-step empirical eta with N samples (writes eta.csv)",
    )
    p_sim.set_defaults(func=cmd_simulate)

    p_val = sub.add_parser(
        "validate-cantelli",
        help="plan one step per robot and check empirical eta against the bound",
    )
    p_val.add_argument("scenario")
    p_val.add_argument("--k-list", default="1.0,1.5")
    p_val.add_argument("--samples", type=int, default=10000)
    p_val.add_argument("--seed", type=int, default=None)
    p_val.set_defaults(func=cmd_validate_cantelli)

    p_sol = sub.add_parser(
        "solution-space",
        help="feasible time-scale sets along the goal-directed candidate",
    )
    p_sol.add_argument("scenario")
    p_sol.add_argument(
        "--method",
        required=True,
        choices=["prvo-taylor", "prvo-exact", "inflation", "porca"],
    )
    p_sol.add_argument("--k", dest="k_list", default=None, help="comma-separated k values")
    p_sol.add_argument(
        "--eta", dest="eta_list", default=None, help="comma-separated eta values"
    )
    p_sol.add_argument(
        "--confidence", default=None, help="comma-separated confidence levels"
    )
    p_sol.add_argument(
        "--advance",
        type=float,
        default=0.0,
        help="advance nominal straight-line trajectories this many seconds first",
    )
    p_sol.add_argument(
        "--s-max",
        type=float,
        default=None,
        help="cap the scale domain (default: unbounded, full solution space)",
    )
    p_sol.add_argument("--seed", type=int, default=None)
    p_sol.set_defaults(func=cmd_solution_space)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("PRVO_LOG_LEVEL", "WARNING").upper())
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ScenarioFormatError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
