# cli/commands/verify.py
import logging
from typing import Any, Dict

import click

from cli.commands.common import RunContext, execute, run_options
from cli.dependencies import build_system, get_assumption_checker, verification_inputs

logger = logging.getLogger("sp_reach")


def run_verify(run: RunContext) -> Dict[str, Any]:
    """가정 1–3과 경계층 감쇠 포락선 검증 리포트"""
    cfg = run.config
    sys_ = build_system(cfg)
    P, region = verification_inputs(cfg, sys_)
    report = get_assumption_checker(cfg).verify(
        sys_,
        P=P,
        z_region=region,
        n_samples=cfg.verify.n_samples,
        lambda_scale=cfg.verify.lambda_scale,
        decay_horizon=cfg.verify.decay_horizon,
        decay_trials=cfg.verify.decay_trials,
    )
    document = report.to_dict()
    if run.wants("json"):
        run.repository.write_json("assumptions.json", document)
    return {
        "verdicts": document["verdicts"],
        "stability": document["stability"],
        "isaacs_gap": report.isaacs.max_gap,
        "K_estimate": report.regularity.K_estimate,
    }


verify_command = click.command("verify", help="가정(정칙성, 안정성, Isaacs 조건) 샘플 검증")(
    run_options(execute("verify", run_verify))
)
