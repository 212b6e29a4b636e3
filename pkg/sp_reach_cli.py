#!/usr/bin/env python3
# sp_reach_cli.py - 명령줄 실행 스크립트
import sys

from cli.main import run_command


def main():
    """CLI 진입점"""
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
