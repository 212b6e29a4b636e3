# cli/commands/simulate.py
import logging
from typing import Any, Dict, List

import click

from cli.commands.common import RunContext, execute, reach_overlay, run_options, write_field
from cli.dependencies import build_grid, build_payoff, build_system, get_simulator, get_solver
from services.dynamics_service import DynamicsService
from services.reach_service import ReachService
from utils.exceptions import ConfigurationError

logger = logging.getLogger("sp_reach")


def run_simulate(run: RunContext) -> Dict[str, Any]:
    """합성 피드백 vs 무작위 외란 도달 실험"""
    cfg = run.config
    exp = cfg.experiment
    if not exp.initial_states:
        raise ConfigurationError("simulate에는 experiment.initial_states가 필요합니다",
                                 details={"field": "experiment.initial_states"})
    sys_ = build_system(cfg)
    payoff = build_payoff(cfg)
    eta = cfg.solve.eta
    reduced = get_solver(cfg).solve_reduced_value(DynamicsService.derive_reduced(sys_), payoff,
                                                  build_grid(cfg.grid), cfg.solve.t_final)
    write_field(run, "reduced_value", reduced)
    brs = ReachService.brs_bounds(reduced, eta)
    if run.wants("csv"):
        run.repository.write_masks_csv("brs_masks.csv", brs)

    simulator = get_simulator(cfg)
    experiments: List[Dict[str, Any]] = []
    for eps in cfg.solve.eps:
        reports = simulator.run_reach_experiment(
            sys_, eps, reduced, payoff,
            initial_states=exp.initial_states,
            n_disturbances=exp.n_disturbances,
            seed=exp.seed,
            eta=eta,
            initial_fast_states=exp.initial_fast_states,
            n_jobs=exp.n_jobs,
        )
        shown = []
        for i, report in enumerate(reports):
            for k, single in enumerate(report["runs"]):
                traj = single.pop("trajectory", None)
                if traj is None:
                    continue
                if run.wants("csv"):
                    run.repository.write_trajectory_csv(f"trajectory_eps{eps:g}_state{i}_run{k}.csv", traj)
                if k == 0:
                    shown.append(traj.z)
        if run.wants("json"):
            run.repository.write_json(f"experiment_eps{eps:g}.json", reports)
        if run.wants("svg"):
            overlay = reach_overlay(reduced, eta, payoff, trajectories=shown,
                                    title=f"{sys_.name} t={reduced.time:g} eps={eps:g} eta={eta:g}")
            if overlay is not None:
                run.repository.write_svg(f"experiment_eps{eps:g}.svg", overlay)
        experiments.append({
            "eps": eps,
            "states": [
                {k: r[k] for k in ("initial_z", "reduced_value", "predicted", "reach_fraction",
                                   "consistent", "failed_runs", "clipped_queries")}
                for r in reports
            ],
            "all_consistent": all(r["consistent"] for r in reports),
        })
    return {"eta": eta, "brs": brs.to_dict(), "experiments": experiments}


simulate_command = click.command("simulate", help="피드백 제어 도달 실험")(
    run_options(execute("simulate", run_simulate))
)
