"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical or
estimation failure. Errors are written to stderr as a JSON object.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .attainment import construct_with_plan, construct_lower_attaining_matrix, validate_attainment
from .bootstrap import DEFAULT_ALPHA, DEFAULT_B, bootstrap_interval
from .bounds import gamma_lower, sharp_bounds, validate_marginal
from .dataio import (
    AnalysisReport,
    dumps,
    parse_count_table,
    parse_unit_csv,
    provenance,
    sha256_bytes,
)
from .errors import DataError, OrdiboundError
from .estimators import EstimatorConfig, estimate_bounds
from .transport import lp_gamma_bounds, oracle_sweep


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}\n{self.format_usage()}")


def _csv_list(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _add_marginal_inputs(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("input (choose one)")
    g.add_argument("--treated-counts", metavar="N,N,...")
    g.add_argument("--control-counts", metavar="N,N,...")
    g.add_argument("--counts-file", metavar="PATH", help="file with 'treated:' and 'control:' lines")
    g.add_argument("--treated-probs", metavar="P,P,...")
    g.add_argument("--control-probs", metavar="P,P,...")
    g.add_argument("--data", metavar="CSV", help="unit-level CSV with columns z,y[,covariates]")
    g.add_argument("--categories", type=int, metavar="J", help="override the inferred number of categories")


def _add_design(p: argparse.ArgumentParser) -> None:
    p.add_argument("--design", default="cre",
                   choices=["cre", "ipw", "outcome-regression", "covariate-sharpened"])
    p.add_argument("--propensity-covariates", type=_csv_list, metavar="NAME,...")
    p.add_argument("--outcome-covariates", type=_csv_list, metavar="NAME,...")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ordibound", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("bounds", help="sharp bounds from counts or marginal probabilities")
    _add_marginal_inputs(p)

    p = sub.add_parser("estimate", help="estimated bounds from unit-level data")
    _add_marginal_inputs(p)
    _add_design(p)

    p = sub.add_parser("ci", help="bounds plus bootstrap confidence interval")
    _add_marginal_inputs(p)
    _add_design(p)
    p.add_argument("--alpha", type=float, default=DEFAULT_ALPHA)
    p.add_argument("--boot", type=int, default=DEFAULT_B, metavar="B")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("attain", help="coupling attaining the sharp upper bound")
    _add_marginal_inputs(p)
    p.add_argument("--lower", action="store_true", help="also construct the lower-bound coupling")

    p = sub.add_parser("oracle-check", help="closed form vs LP on random marginals")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--max-categories", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-attainment", action="store_true")

    for name, sp in sub.choices.items():
        sp.add_argument("--pretty", action="store_true", help="human-readable summary instead of JSON")
    return parser


# ---------------------------------------------------------------------------
# Input resolution


def _load_marginals(args):
    """Return ``(p1, p0, dataset_or_None, digest, source)``."""
    sources = {
        "counts": args.treated_counts is not None or args.control_counts is not None,
        "counts_file": args.counts_file is not None,
        "probs": args.treated_probs is not None or args.control_probs is not None,
        "data": args.data is not None,
    }
    chosen = [k for k, v in sources.items() if v]
    if len(chosen) != 1:
        raise UsageError("give exactly one input: --treated/--control-counts, --counts-file, "
                         "--treated/--control-probs, or --data")
    kind = chosen[0]
    if kind in ("counts", "counts_file"):
        if kind == "counts":
            if args.treated_counts is None or args.control_counts is None:
                raise UsageError("--treated-counts and --control-counts go together")
            table = parse_count_table(treated=args.treated_counts, control=args.control_counts)
            digest = sha256_bytes(table.canonical().encode())
        else:
            table = parse_count_table(args.counts_file)
            digest = sha256_bytes(Path(args.counts_file).read_bytes())
        if args.categories is not None and args.categories != table.J:
            raise DataError(f"--categories {args.categories} but counts have {table.J} entries")
        p1, p0 = table.marginals()
        return p1, p0, table.to_dataset(), digest, kind
    if kind == "probs":
        if args.treated_probs is None or args.control_probs is None:
            raise UsageError("--treated-probs and --control-probs go together")
        try:
            raw1 = [float(v) for v in _csv_list(args.treated_probs)]
            raw0 = [float(v) for v in _csv_list(args.control_probs)]
        except ValueError as e:
            raise DataError(f"bad probability list: {e}") from None
        p1, p0 = validate_marginal(raw1).probs, validate_marginal(raw0).probs
        digest = sha256_bytes(dumps([p1, p0]).encode())
        return p1, p0, None, digest, kind
    data = parse_unit_csv(args.data, args.categories)
    digest = sha256_bytes(Path(args.data).read_bytes())
    t, c = data.counts()
    return t / t.sum(), c / c.sum(), data, digest, kind


def _config(args) -> EstimatorConfig:
    return EstimatorConfig(args.design, args.propensity_covariates, args.outcome_covariates)


def _echo(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k != "pretty"}


# ---------------------------------------------------------------------------
# Commands


def cmd_bounds(args) -> tuple[dict, int]:
    p1, p0, _, digest, _ = _load_marginals(args)
    out = sharp_bounds(p1, p0).to_dict()
    out["treated_marginal"] = p1.tolist()
    out["control_marginal"] = p0.tolist()
    out["provenance"] = provenance(digest, _echo(args))
    return out, 0


def cmd_estimate(args) -> tuple[dict, int]:
    p1, p0, data, digest, kind = _load_marginals(args)
    config = _config(args)
    if data is None:
        raise UsageError("estimate needs unit-level data or counts")
    report = estimate_bounds(data, config)
    out = report.to_dict()
    out["design"] = config.design
    out["provenance"] = provenance(digest, _echo(args))
    return out, 0


def cmd_ci(args) -> tuple[dict, int]:
    _, _, data, digest, _ = _load_marginals(args)
    if data is None:
        raise UsageError("ci needs unit-level data or counts, not bare probabilities")
    config = _config(args)
    bounds = estimate_bounds(data, config)
    interval = bootstrap_interval(data, config, alpha=args.alpha, B=args.boot, seed=args.seed)
    rep = AnalysisReport(bounds=bounds, interval=interval, provenance=provenance(digest, _echo(args)))
    return rep.to_dict(), 0


def cmd_attain(args) -> tuple[dict, int]:
    p1, p0, _, digest, _ = _load_marginals(args)
    bounds = sharp_bounds(p1, p0)
    P, plan = construct_with_plan(p1, p0)
    validation = validate_attainment(P, p1, p0, bounds.gamma_upper)
    lo, hi = lp_gamma_bounds(p1, p0)
    oracle = {
        "lp_lower": lo,
        "lp_upper": hi,
        "dev_lower": abs(lo - bounds.gamma_lower),
        "dev_upper": abs(hi - bounds.gamma_upper),
    }
    rep = AnalysisReport(bounds=bounds, attaining_matrix=P.entries, validation=validation,
                         oracle_check=oracle, provenance=provenance(digest, _echo(args)))
    out = rep.to_dict()
    out["plan"] = {"j1": plan.j1, "m1": plan.m1, "lambda1": plan.lambda1,
                   "leftover_mass": plan.leftover_mass}
    if args.lower:
        L = construct_lower_attaining_matrix(p1, p0)
        out["lower_attaining_matrix"] = L.entries.tolist()
        out["lower_validation"] = validate_attainment(L, p1, p0, gamma_lower(p1, p0)[0]).to_dict()
    return out, 0 if validation.ok else 3


def cmd_oracle_check(args) -> tuple[dict, int]:
    if args.trials < 1 or args.max_categories < 2:
        raise UsageError("--trials must be >= 1 and --max-categories >= 2")
    out = oracle_sweep(args.trials, args.max_categories, args.seed,
                       attainment=not args.no_attainment)
    return out, 0 if out["passed"] else 3


COMMANDS = {
    "bounds": cmd_bounds,
    "estimate": cmd_estimate,
    "ci": cmd_ci,
    "attain": cmd_attain,
    "oracle-check": cmd_oracle_check,
}


def _pretty(command: str, out: dict) -> str:
    lines = [f"ordibound {command}"]
    b = out.get("bounds", out)
    if "gamma_upper" in b:
        lines.append(f"  gamma_L = {b['gamma_lower']:.6f}")
        lines.append(f"  gamma_I = {b['gamma_independent']:.6f}")
        lines.append(f"  gamma_U = {b['gamma_upper']:.6f}")
        if b.get("argmin_upper"):
            lines.append(f"  (j, m) attaining gamma_U: {tuple(b['argmin_upper'])}")
    if "interval" in out:
        iv = out["interval"]
        lines.append(f"  {100 * (1 - iv['alpha']):g}% interval: [{iv['lower']:.6f}, {iv['upper']:.6f}]"
                     f"  (z* = {iv['z_star']:.6f}, B = {iv['B']}, failed = {iv['failed_replicates']})")
    if "attaining_matrix" in out:
        lines.append("  attaining matrix (rows: treated category, columns: control category):")
        for row in out["attaining_matrix"]:
            lines.append("    " + " ".join(f"{v:8.5f}" for v in row))
        lines.append(f"  validation ok: {out['validation']['ok']}")
    if "max_dev_upper" in out:
        lines.append(f"  max |gamma_U - LP| = {out['max_dev_upper']:.3e}")
        lines.append(f"  max |gamma_L - LP| = {out['max_dev_lower']:.3e}")
        if out.get("max_dev_attainment") is not None:
            lines.append(f"  max attainment deviation = {out['max_dev_attainment']:.3e}")
        lines.append(f"  failures: {out['failures']}  ->  {'PASS' if out['passed'] else 'FAIL'}")
    return "\n".join(lines)


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        out, code = COMMANDS[args.command](args)
    except UsageError as e:
        stderr.write(json.dumps({"error": "UsageError", "message": str(e).strip()}) + "\n")
        return 1
    except OrdiboundError as e:
        stderr.write(json.dumps(e.to_dict()) + "\n")
        return e.exit_code
    except (OSError, UnicodeDecodeError) as e:
        stderr.write(json.dumps({"error": type(e).__name__, "message": str(e)}) + "\n")
        return 2
    if args.pretty:
        stdout.write(_pretty(args.command, out) + "\n")
    else:
        stdout.write(dumps(out) + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
