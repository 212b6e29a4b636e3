# cli/main.py
import logging

import click

from cli.commands.bounds import bounds_command
from cli.commands.reproduce import reproduce_fig2_command, reproduce_fig3_command
from cli.commands.simulate import simulate_command
from cli.commands.solve import full_solve_command, solve_command
from cli.commands.verify import verify_command
from config.settings import PACKAGE_NAME, PACKAGE_VERSION

logger = logging.getLogger("sp_reach")


@click.group(help="특이 섭동 시스템의 축약 모델 기반 도달 가능 집합 근사 도구")
@click.version_option(PACKAGE_VERSION, prog_name=PACKAGE_NAME)
def cli():
    pass


cli.add_command(verify_command)
cli.add_command(solve_command)
cli.add_command(full_solve_command)
cli.add_command(bounds_command)
cli.add_command(simulate_command)
cli.add_command(reproduce_fig2_command)
cli.add_command(reproduce_fig3_command)


def run_command(argv=None) -> int:
    """argv로 명령 실행 후 종료 코드 반환"""
    try:
        rv = cli.main(args=argv, prog_name="sp-reach", standalone_mode=False)
    except click.exceptions.Exit as e:
        return e.exit_code
    except click.ClickException as e:
        e.show()
        return e.exit_code
    return rv if isinstance(rv, int) else 0
