# cli/commands/reproduce.py
from typing import Any, Dict

import click

from cli.commands.bounds import run_bounds
from cli.commands.common import RunContext, execute, run_options
from cli.commands.simulate import run_simulate
from cli.commands.verify import run_verify


def run_reproduce_fig2(run: RunContext) -> Dict[str, Any]:
    """유전자 회로: 가정 검증 → 축약/전체 풀이 → ε별 포함 관계"""
    return {"verify": run_verify(run), "bounds": run_bounds(run)}


def run_reproduce_fig3(run: RunContext) -> Dict[str, Any]:
    """MRN: 가정 검증 → 축약 풀이 → 피드백 도달 실험"""
    return {"verify": run_verify(run), "simulate": run_simulate(run)}


reproduce_fig2_command = click.command("reproduce-fig2", help="유전자 회로 내부/외부 근사 재현")(
    run_options(execute("reproduce-fig2", run_reproduce_fig2, preset=True))
)
reproduce_fig3_command = click.command("reproduce-fig3", help="MRN 도달 실험 재현")(
    run_options(execute("reproduce-fig3", run_reproduce_fig3, preset=True))
)
