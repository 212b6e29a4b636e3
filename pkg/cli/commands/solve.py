# cli/commands/solve.py
import logging
from typing import Any, Dict

import click

from cli.commands.common import RunContext, execute, run_options, write_field
from cli.dependencies import build_grid, build_payoff, build_system, get_solver
from services.dynamics_service import DynamicsService
from services.hj_solver import value_gap
from utils.exceptions import ConfigurationError

logger = logging.getLogger("sp_reach")


def run_solve(run: RunContext) -> Dict[str, Any]:
    """축약 가치 함수 V̄(t, ·) 풀이"""
    cfg = run.config
    red = DynamicsService.derive_reduced(build_system(cfg))
    field = get_solver(cfg).solve_reduced_value(red, build_payoff(cfg), build_grid(cfg.grid), cfg.solve.t_final)
    write_field(run, "reduced_value", field)
    for snap in field.snapshots:
        write_field(run, f"reduced_value_t{snap.time:g}", snap)
    if run.wants("json"):
        run.repository.write_json("reduced_value.json", field.to_dict())
    return {
        "t": field.time,
        "min": float(field.values.min()),
        "max": float(field.values.max()),
        "steps": field.metadata.get("steps", 0),
        "max_principle_ok": field.metadata.get("max_principle_ok", True),
    }


def run_full_solve(run: RunContext) -> Dict[str, Any]:
    """ε 값별 전체 가치 함수 V_ε 풀이와 sup |V_ε − V̄|"""
    cfg = run.config
    if cfg.full_grid is None:
        raise ConfigurationError("full-solve에는 full_grid 블록이 필요합니다", details={"field": "full_grid"})
    sys_ = build_system(cfg)
    payoff = build_payoff(cfg)
    solver = get_solver(cfg, track_extremes=False)
    reduced = solver.solve_reduced_value(DynamicsService.derive_reduced(sys_), payoff,
                                         build_grid(cfg.grid), cfg.solve.t_final)
    full_grid = build_grid(cfg.full_grid)

    gaps = []
    for eps in cfg.solve.eps:
        full = solver.solve_full_value(sys_, eps, payoff, full_grid, cfg.solve.t_final)
        write_field(run, f"full_value_eps{eps:g}", full)
        gap = value_gap(full, reduced)
        logger.info(f"ε={eps:g}: sup|V_ε − V̄| = {gap:.6f}")
        gaps.append({"eps": eps, "gap": gap, "steps": full.metadata.get("steps", 0)})
    if run.wants("json"):
        run.repository.write_json("value_gaps.json", gaps)
    return {"value_gaps": gaps}


solve_command = click.command("solve", help="축약 가치 함수 풀이")(run_options(execute("solve", run_solve)))
full_solve_command = click.command("full-solve", help="전체 SP 가치 함수 풀이 (n_z + n_y ≤ 3)")(
    run_options(execute("full-solve", run_full_solve))
)
