"""Closed-form bounds and the attaining construction against the LP oracle.

    python scripts/oracle_sweep.py --trials 1000 --max-categories 8
"""

import argparse
import json
import time

from ordibound.transport import oracle_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=1000)
    ap.add_argument("--max-categories", type=int, default=8)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    t0 = time.perf_counter()
    out = oracle_sweep(args.trials, args.max_categories, args.seed)
    out["seconds"] = round(time.perf_counter() - t0, 2)
    print(json.dumps(out, indent=2))
    raise SystemExit(0 if out["passed"] else 1)


if __name__ == "__main__":
    main()
