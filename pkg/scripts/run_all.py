"""Run every config in scripts/configs through the CLI, one output directory each."""

import argparse
import sys
from pathlib import Path

from twisted_targets.cli import main as cli_main

HERE = Path(__file__).resolve().parent


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="results")
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--only", nargs="*", help="config stems to run, e.g. tail-union moments")
    args = ap.parse_args()
    worst = 0
    for cfg in sorted((HERE / "configs").glob("*.json")):
        if args.only and cfg.stem not in args.only:
            continue
        print(f"== {cfg.stem}")
        code = cli_main(["run", "--config", str(cfg), "--out", str(Path(args.out) / cfg.stem),
                         "--threads", str(args.threads), "--assert"])
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    sys.exit(main())
