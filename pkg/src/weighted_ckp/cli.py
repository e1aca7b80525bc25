"""Command-line front end: ``weighted-ckp <command> ...``.

Exit status: 0 when every evaluated check passes (or for plain computations),
1 when any check fails or a numerical routine gives up, 2 for usage, input
or configuration errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Any, Sequence

import numpy as np

from . import constants, divergences, linearization, transport
from .errors import CKPError, ConfigError, ValidationError
from .harness import REGISTRY, SearchConfig, SuiteConfig, load_instance, run_suite, search_counterexamples
from .harness.generate import DEFAULT_ALPHAS, PROFILES
from .harness.suite import summarize
from .measure import Order
from .report import CheckReport

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
CSV_COLUMNS = ("check_id", "lhs", "rhs", "margin", "status", "digest")


def parse_seeds(text: str) -> tuple[int, ...]:
    """``"a..b"`` is the inclusive range; a single ``"N"`` means seeds ``0..N-1``."""
    try:
        if ".." in text:
            lo, hi = (int(part) for part in text.split("..", 1))
            if hi < lo:
                raise ValueError
            return tuple(range(lo, hi + 1))
        count = int(text)
        if count < 1:
            raise ValueError
        return tuple(range(count))
    except ValueError:
        raise argparse.ArgumentTypeError(f"seeds must be 'N' or 'a..b' with a <= b, got {text!r}") from None


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _jsonable(value: Any) -> Any:
    """Plain JSON types; non-finite floats become ``null``."""
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def reports_to_json(reports: Sequence[CheckReport]) -> str:
    return json.dumps(_jsonable([r.to_dict() for r in reports]), indent=1, allow_nan=False) + "\n"


def reports_to_csv(reports: Sequence[CheckReport]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in reports:
        writer.writerow([r.check_id, repr(r.lhs), repr(r.rhs), repr(r.margin), r.status, r.instance_digest])
    return buf.getvalue()


def _mapping_to_csv(data: dict[str, Any]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("key", "value"))
    for key, value in data.items():
        if isinstance(value, (list, tuple, np.ndarray)):
            value = " ".join(repr(float(v)) for v in np.ravel(value))
        writer.writerow((key, value))
    return buf.getvalue()


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_mapping(args, data: dict[str, Any]) -> int:
    data = _jsonable(data)
    text = _mapping_to_csv(data) if args.format == "csv" else json.dumps(data, indent=1) + "\n"
    _emit(text, getattr(args, "out", None))
    return EXIT_OK


def _emit_reports(args, reports: list[CheckReport]) -> int:
    text = reports_to_csv(reports) if args.format == "csv" else reports_to_json(reports)
    _emit(text, args.out)
    counts = summarize(reports)
    if not args.quiet:
        summary = ", ".join(f"{v} {k}" for k, v in counts.items() if v)
        print(f"{len(reports)} reports: {summary or 'none'}", file=sys.stderr)
    return EXIT_FAIL if any(r.failed for r in reports) else EXIT_OK


def _order(args, inst) -> Order:
    return Order(args.alpha if args.alpha is not None else inst.alpha)


# --- commands ------------------------------------------------------------------------


def cmd_divergence(args) -> int:
    inst = load_instance(args.file)
    order = _order(args, inst)
    data: dict[str, Any] = {
        "alpha": order.alpha,
        "kl": divergences.kl(inst.space, inst.f),
        "renyi": divergences.renyi(inst.space, inst.f, order),
        "tsallis": divergences.tsallis(inst.space, inst.f, order),
        "pearson_vajda": divergences.pearson_vajda(inst.space, inst.f, order),
        "total_variation": divergences.total_variation(inst.space, inst.f),
    }
    if inst.w is not None:
        data["weighted_tv"] = divergences.weighted_tv(inst.space, inst.f, inst.w)
    return _emit_mapping(args, data)


def cmd_dominate(args) -> int:
    inst = load_instance(args.file)
    if inst.g is None:
        raise ConfigError("dominate needs a function 'g' in the instance")
    order = _order(args, inst)
    cert = linearization.dominated(inst.space, inst.g, order)
    nec = linearization.necessary_conditions(inst.space, inst.g, order)
    data = {
        "alpha": order.alpha,
        "dominated": cert.dominated,
        "c": cert.c,
        "lhs_42": cert.lhs_42,
        "rhs_42": cert.rhs_42,
        "margin": cert.margin,
        "r_at_extremizer": cert.r_at_extremizer,
        "extremizer": cert.extremizer,
        "sufficient_condition": linearization.sufficient_condition(inst.space, inst.g, order),
        "mean_ok": nec.mean_ok,
        "cond_82_ok": nec.cond_82_ok,
        "cond_72_ok": nec.cond_72_ok,
    }
    if args.oracle:
        f_star, value = linearization.maximize_r(inst.space, inst.g, order)
        data["oracle_max_r"] = value
        data["oracle_maximizer"] = f_star
    return _emit_mapping(args, data)


def cmd_best_k(args) -> int:
    inst = load_instance(args.file)
    if inst.u is None:
        raise ConfigError("best-k needs a function 'u' in the instance")
    order = _order(args, inst)
    u = inst.u - inst.space.integrate(inst.u) if args.center else inst.u
    interval = constants.best_k_interval(inst.space, u, order)
    data = {
        "alpha": order.alpha,
        "lower": interval.lower,
        "upper": interval.upper,
        "k_empirical": interval.k_empirical,
        "corollary_bound": constants.corollary_bound(inst.space, u, order),
    }
    if order.alpha <= 2.0:
        data["k_beta"] = constants.k_p(inst.space, u, order.beta)
    return _emit_mapping(args, data)


def cmd_wasserstein(args) -> int:
    inst = load_instance(args.file)
    if inst.metric is None:
        raise ConfigError("wasserstein needs a distance matrix 'dist' in the instance")
    p = args.p if args.p is not None else inst.p
    if p is None:
        raise ConfigError("no transport order: pass --p or set 'p' in the instance")
    value, plan = transport.wasserstein(inst.metric, inst.f, p)
    data = {
        "p": p,
        "wasserstein": value,
        "cost": plan.cost,
        "m_p": transport.m_p_moment(inst.metric, p),
        "slackness_violation": plan.slackness_violation(inst.metric.dist**p),
        "plan": plan.pi,
    }
    return _emit_mapping(args, data)


def cmd_suite(args) -> int:
    config = SuiteConfig(
        seeds=args.seeds,
        n_min=args.n_min,
        n_max=args.n_max,
        alphas=args.alphas,
        checks=tuple(args.checks) if args.checks is not None else None,
        tolerance_scale=args.tolerance_scale,
        workers=args.workers,
    )
    return _emit_reports(args, run_suite(config))


def cmd_search(args) -> int:
    config = SearchConfig(
        check=args.check,
        seeds=args.starts,
        steps=args.steps,
        n=args.n,
        profile=args.profile,
        alphas=args.alphas,
        tolerance_scale=args.tolerance_scale,
        rng_seed=args.rng_seed,
    )
    return _emit_reports(args, search_counterexamples(config))


def cmd_checks(args) -> int:
    rows = {cid: check.description for cid, check in REGISTRY.items()}
    return _emit_mapping(args, rows)


# --- parser --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    # global flags are accepted before or after the command name
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tolerance-scale", type=float, default=argparse.SUPPRESS,
                        help="multiply every check tolerance by this factor (default 1)")
    common.add_argument("--format", choices=("json", "csv"), default=argparse.SUPPRESS,
                        help="output format (default json)")
    common.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS,
                        help="suppress the summary line on stderr")

    parser = argparse.ArgumentParser(prog="weighted-ckp", parents=[common],
                                     description="Divergences, weighted CKP bounds and their checks.")
    sub = parser.add_subparsers(dest="command", required=True)

    def instance_command(name, func, help_text, order_flag="alpha"):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.add_argument("file", help="instance JSON file")
        if order_flag == "alpha":
            p.add_argument("--alpha", type=float, default=None, help="Renyi order (default: the file's alpha)")
        else:
            p.add_argument("--p", type=float, default=None, help="transport order (default: the file's p)")
        p.add_argument("--out", default=None, help="write to this file instead of stdout")
        p.set_defaults(func=func)
        return p

    instance_command("divergence", cmd_divergence, "KL, Renyi, Tsallis, Pearson-Vajda and TV distances")
    dom = instance_command("dominate", cmd_dominate, "decide whether int g dnu <= T_alpha for every nu")
    dom.add_argument("--oracle", action="store_true", help="also run the projected-gradient oracle")
    bk = instance_command("best-k", cmd_best_k, "bounds and an estimate of the best K for u")
    bk.add_argument("--center", action="store_true", help="subtract the mean of u first")
    instance_command("wasserstein", cmd_wasserstein, "exact Kantorovich distance W_p", order_flag="p")

    suite = sub.add_parser("suite", parents=[common], help="run the inequality suite over seeded instances")
    suite.add_argument("--seeds", type=parse_seeds, default=tuple(range(100)),
                       help="'N' for seeds 0..N-1 or an inclusive range 'a..b' (default 100)")
    suite.add_argument("--n-min", type=int, default=1)
    suite.add_argument("--n-max", type=int, default=12)
    suite.add_argument("--alphas", type=_floats, default=DEFAULT_ALPHAS, help="comma-separated alpha grid")
    suite.add_argument("--checks", nargs="*", default=None, help="allowlist of check ids (default: all)")
    suite.add_argument("--workers", type=int, default=1, help="worker processes")
    suite.add_argument("--out", default=None, help="report file (default stdout)")
    suite.set_defaults(func=cmd_suite)

    search = sub.add_parser("search", parents=[common], help="hill-climb toward the smallest margin of a check")
    search.add_argument("--check", required=True, help="check id")
    search.add_argument("--starts", type=parse_seeds, default=tuple(range(4)), help="start seeds")
    search.add_argument("--steps", type=int, default=200)
    search.add_argument("--n", type=int, default=None, help="atom count (default: varies with the seed)")
    search.add_argument("--profile", choices=PROFILES, default=None)
    search.add_argument("--alphas", type=_floats, default=DEFAULT_ALPHAS)
    search.add_argument("--rng-seed", type=int, default=0)
    search.add_argument("--out", default=None)
    search.set_defaults(func=cmd_search)

    checks = sub.add_parser("checks", parents=[common], help="list registered check ids")
    checks.set_defaults(func=cmd_checks)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for name, default in (("tolerance_scale", 1.0), ("format", "json"), ("quiet", False)):
        if not hasattr(args, name):
            setattr(args, name, default)
    if not args.tolerance_scale > 0:
        parser.error("--tolerance-scale must be positive")
    try:
        return args.func(args)
    except (ValidationError, OSError) as exc:
        print(f"weighted-ckp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CKPError as exc:
        print(f"weighted-ckp: numerical failure: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
