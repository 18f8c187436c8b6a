"""Shared helpers for the experiment scripts."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from thirdq.cli import run
from thirdq.config import load_config


def parser(description: str, default_out: str) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--out", default=default_out, help="output directory")
    p.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE")
    p.add_argument("--plot", action="store_true", help="also write a PNG (needs matplotlib)")
    return p


def execute(experiment: str, args) -> Path:
    cfg = load_config(experiment, overrides=args.set)
    status = run(cfg, args.out)
    if status != 0:
        sys.exit(status)
    return Path(args.out)


def pyplot():
    try:
        import matplotlib
    except ImportError:
        sys.exit("--plot needs matplotlib: pip install 'thirdq[plots]'")
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt
