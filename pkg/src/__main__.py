"""Entry point for ``python -m src``."""

from src.main import cli

if __name__ == '__main__':
    cli(prog_name="optomech")
