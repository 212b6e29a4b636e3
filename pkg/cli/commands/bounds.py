# cli/commands/bounds.py
import logging
from typing import Any, Dict, List

import click

from cli.commands.common import (
    ContainmentFailure, RunContext, execute, reach_overlay, run_options, write_field
)
from cli.dependencies import build_grid, build_payoff, build_system, get_solver
from services.dynamics_service import DynamicsService
from services.hj_solver import value_gap
from services.reach_service import ReachService

logger = logging.getLogger("sp_reach")


def run_bounds(run: RunContext, expect_pass: bool = False) -> Dict[str, Any]:
    """BRS/BRT/BST 근사 마스크와 (전체 격자가 있으면) ε별 포함 관계 검사"""
    cfg = run.config
    sys_ = build_system(cfg)
    payoff = build_payoff(cfg)
    eta = cfg.solve.eta
    solver = get_solver(cfg)
    reduced = solver.solve_reduced_value(DynamicsService.derive_reduced(sys_), payoff,
                                         build_grid(cfg.grid), cfg.solve.t_final)
    write_field(run, "reduced_value", reduced)

    brs = ReachService.brs_bounds(reduced, eta)
    brt_inner, bst_outer = ReachService.tube_bounds(reduced, eta)
    if run.wants("csv"):
        run.repository.write_masks_csv("brs_masks.csv", brs)
        run.repository.write_masks_csv("brt_inner_masks.csv", brt_inner)
        run.repository.write_masks_csv("bst_outer_masks.csv", bst_outer)
    results: Dict[str, Any] = {
        "eta": eta,
        "brs": brs.to_dict(),
        "brt_inner": brt_inner.to_dict(),
        "bst_outer": bst_outer.to_dict(),
        "tube_nesting_violations": ReachService.tube_nesting_violations(reduced, eta),
    }

    containment: List[Dict[str, Any]] = []
    if cfg.full_grid is not None:
        full_grid = build_grid(cfg.full_grid)
        full_solver = get_solver(cfg, track_extremes=False)
        for eps in cfg.solve.eps:
            full = full_solver.solve_full_value(sys_, eps, payoff, full_grid, cfg.solve.t_final)
            write_field(run, f"full_value_eps{eps:g}", full)
            report = ReachService.check_containment(brs, full, cfg.solve.dilation_cells)
            if run.wants("json"):
                run.repository.write_json(f"containment_eps{eps:g}.json", report.to_dict())
            if run.wants("svg"):
                overlay = reach_overlay(reduced, eta, payoff, full=full,
                                        title=f"{sys_.name} t={reduced.time:g} eps={eps:g} eta={eta:g}")
                if overlay is not None:
                    run.repository.write_svg(f"bounds_eps{eps:g}.svg", overlay)
            containment.append({
                "eps": eps,
                "verdict": "pass" if report.verdict else "fail",
                "violation_count": len(report.violations),
                "checked_nodes": report.checked_nodes,
                "dilation_cells": report.dilation_cells,
                "value_gap": value_gap(full, reduced),
            })
    elif run.wants("svg"):
        overlay = reach_overlay(reduced, eta, payoff, title=f"{sys_.name} t={reduced.time:g} eta={eta:g}")
        if overlay is not None:
            run.repository.write_svg("bounds.svg", overlay)

    results["containment"] = containment
    if expect_pass and any(c["verdict"] == "fail" for c in containment):
        logger.error("포함 관계 검사 실패 (--expect-pass)")
        raise ContainmentFailure(results)
    return results


bounds_command = click.command("bounds", help="내부/외부 도달 집합 근사와 포함 관계 검사")(
    click.option("--expect-pass", is_flag=True, default=False, help="포함 검사 실패 시 종료 코드 4")(
        run_options(execute("bounds", run_bounds))
    )
)
