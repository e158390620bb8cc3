"""Launcher for running from a checkout: python cli.py <command> [flags]"""
from mkpoly.cli import main

if __name__ == "__main__":
    raise SystemExit(main())
