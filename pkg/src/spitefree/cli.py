"""Command-line front end.

Commands: verify, enumerate, thresholds, revenue, regions, multi.  Every
run emits one report (JSON or indented text) carrying the tool version,
an echo of the effective configuration (including the normalized
mechanism description, so reports replay without the input file), the
results, and the wall time.  Exit codes are a stable contract: 0 all
requested properties hold, 1 a property failed or an assertion tripped,
2 bad input, 3 an enumeration budget was exceeded.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time
from enum import Enum
from fractions import Fraction

import mpmath

from . import __version__
from .core import DomainMismatchError, Grid, MechanismTable, closure_for_thresholds
from .mechanisms import ThresholdSpec
from .money import is_infinite, parse_ext_money, parse_money, render_ext_money
from .multiitem import (
    OwnBidPaymentVariationError,
    check_multi_ic,
    check_multi_ir,
    check_multi_sic,
    classify_point,
    cluster_allocate,
    nonincreasing_marginal_vectors,
    region_partition,
    sequential_allocate_general,
    sequential_allocate_hs,
)
from .optimal import (
    expected_revenue_recursive,
    monte_carlo_revenue,
    optimal_thresholds_uniform,
)
from .reports import Witness
from .specfile import SpecFileError, load_spec
from .verifier import (
    BudgetExceededError,
    CharacterizationMismatchError,
    characterization_experiment,
    check_anonymous,
    check_efficient,
    check_esic,
    check_ic,
    check_ir,
    check_payment_structure,
    check_sic,
    check_winner_payment_constant,
)

EXIT_OK = 0
EXIT_PROPERTY_FAIL = 1
EXIT_INPUT_ERROR = 2
EXIT_BUDGET = 3

_SIMPLE_CHECKS = {
    "ir": check_ir,
    "ic": check_ic,
    "sic": check_sic,
    "esic": check_esic,
    "anonymous": check_anonymous,
    "efficient": check_efficient,
    "winner_price": check_winner_payment_constant,
}
_PROP_NAMES = (*_SIMPLE_CHECKS, "payments")


def _jsonable(value):
    if isinstance(value, Fraction):
        return render_ext_money(value)
    if isinstance(value, float):
        return "inf" if is_infinite(value) else value
    if isinstance(value, mpmath.mpf):
        return mpmath.nstr(value, 25)
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, Grid):
        return value.render()
    if isinstance(value, Witness):
        # agents are numbered from 1 in everything a report shows
        rendered = {
            field.name: _jsonable(getattr(value, field.name))
            for field in dataclasses.fields(value)
        }
        if value.agent is not None:
            rendered["agent"] = value.agent + 1
        if value.permutation is not None:
            rendered["permutation"] = [p + 1 for p in value.permutation]
        return rendered
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return {
            field.name: _jsonable(getattr(value, field.name))
            for field in dataclasses.fields(value)
        }
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def _render_text(value, indent: int = 0) -> list[str]:
    pad = "  " * indent
    if isinstance(value, dict):
        lines = []
        for key, inner in value.items():
            if isinstance(inner, (dict, list)) and inner:
                lines.append(f"{pad}{key}:")
                lines.extend(_render_text(inner, indent + 1))
            else:
                lines.append(f"{pad}{key}: {_scalar_text(inner)}")
        return lines
    if isinstance(value, list):
        lines = []
        for inner in value:
            if isinstance(inner, (dict, list)) and inner:
                head, *rest = _render_text(inner, indent + 1)
                lines.append(f"{pad}- {head.strip()}")
                lines.extend(rest)
            else:
                lines.append(f"{pad}- {_scalar_text(inner)}")
        return lines
    return [f"{pad}{_scalar_text(value)}"]


def _scalar_text(value) -> str:
    if value is None:
        return "~"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (dict, list)):
        return "{}" if isinstance(value, dict) else "[]"
    return str(value)


def _emit(report: dict, args) -> None:
    if args.format == "json":
        text = json.dumps(report, indent=2)
    else:
        text = "\n".join(_render_text(report))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(text + "\n")
    else:
        print(text)


def _report(command: str, config: dict, results: dict, started: float) -> dict:
    return {
        "version": __version__,
        "command": command,
        "config": config,
        "results": results,
        "wall_time_s": round(time.perf_counter() - started, 6),
    }


def _parse_props(text: str | None, allowed, default):
    if text is None:
        names = list(default)
    else:
        names = [part.strip().lower() for part in text.split(",") if part.strip()]
    for name in names:
        if name not in allowed:
            raise SpecFileError(
                f"unknown property {name!r} (expected one of: {', '.join(allowed)})"
            )
    return names


def cmd_verify(args) -> int:
    started = time.perf_counter()
    loaded = load_spec(args.spec)
    if loaded.kind in ("sequential", "cluster"):
        raise SpecFileError(
            f"kind {loaded.kind!r} is multi-item; use the 'multi' command"
        )
    mechanism = loaded.mechanism
    if isinstance(mechanism, MechanismTable):
        grid = Grid.from_text(args.grid) if args.grid else mechanism.grid
    elif args.grid:
        grid = Grid.from_text(args.grid)
    elif isinstance(mechanism, ThresholdSpec):
        grid = closure_for_thresholds(mechanism.thresholds)
    else:
        raise SpecFileError(f"kind {loaded.kind!r} needs an explicit --grid")
    props = _parse_props(args.props, _PROP_NAMES, ("ir", "ic", "sic", "esic"))
    reports = []
    for name in props:
        if name == "payments":
            reports.extend(check_payment_structure(mechanism, grid))
        else:
            reports.append(_SIMPLE_CHECKS[name](mechanism, grid))
    config = {
        "spec": args.spec,
        "mechanism": loaded.source.split("\n"),
        "grid": grid.render(),
        "props": ",".join(props),
        "seed": args.seed,
        "format": args.format,
    }
    results = {
        "all_passed": all(r.passed for r in reports),
        "reports": [_jsonable(r) for r in reports],
    }
    _emit(_report("verify", config, results, started), args)
    return EXIT_OK if results["all_passed"] else EXIT_PROPERTY_FAIL


def cmd_enumerate(args) -> int:
    started = time.perf_counter()
    if not args.grid:
        raise SpecFileError("enumerate needs --grid")
    grid = Grid.from_text(args.grid)
    config = {
        "grid": grid.render(),
        "n": args.n,
        "budget": args.budget,
        "seed": args.seed,
        "format": args.format,
    }
    try:
        summary = characterization_experiment(grid, args.n, max_tables=args.budget)
    except CharacterizationMismatchError as exc:
        results = {"all_passed": False, "violation": str(exc)}
        _emit(_report("enumerate", config, results, started), args)
        return EXIT_PROPERTY_FAIL
    null_only = summary.anonymous_sic_count == 1 and summary.efficient_sic_count == 1
    results = {
        "all_passed": null_only,
        "summary": _jsonable(summary),
        "sic_equals_threshold_form": summary.sic_count == summary.threshold_form_count,
        "null_is_only_anonymous_sic": summary.anonymous_sic_count == 1,
        "null_is_only_efficient_sic": summary.efficient_sic_count == 1,
    }
    _emit(_report("enumerate", config, results, started), args)
    return EXIT_OK if null_only else EXIT_PROPERTY_FAIL


def cmd_thresholds(args) -> int:
    started = time.perf_counter()
    seq = optimal_thresholds_uniform(args.n)
    gamma = expected_revenue_recursive(args.n)
    config = {"n": args.n, "seed": args.seed, "format": args.format}
    results = {
        "exact": seq.exact,
        "values_last_to_first": [_jsonable(t) for t in seq.values],
        "values_in_line_order": [_jsonable(t) for t in seq.in_line_order()],
        "values_decimal_last_to_first": [f"{float(t):.12g}" for t in seq.values],
        "expected_revenue": _jsonable(gamma),
        "expected_revenue_decimal": f"{float(gamma):.12g}",
    }
    _emit(_report("thresholds", config, results, started), args)
    return EXIT_OK


def cmd_revenue(args) -> int:
    started = time.perf_counter()
    seq = optimal_thresholds_uniform(args.n)
    gamma = expected_revenue_recursive(args.n)
    estimate = monte_carlo_revenue(seq, samples=args.samples, seed=args.seed)
    config = {
        "n": args.n,
        "samples": args.samples,
        "seed": args.seed,
        "format": args.format,
    }
    results = {
        "exact": _jsonable(gamma),
        "exact_decimal": f"{float(gamma):.12g}",
        "estimate": _jsonable(estimate),
        "abs_error": abs(estimate.mean - float(gamma)),
    }
    _emit(_report("revenue", config, results, started), args)
    return EXIT_OK


def _parse_payments(text: str):
    payments = {}
    width = None
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise SpecFileError(f"expected bundle=price, got {part!r}")
        mask_text, _, price_text = part.partition("=")
        mask_text = mask_text.strip()
        if width is None:
            width = len(mask_text)
        elif len(mask_text) != width:
            raise SpecFileError("all bundle strings must have the same length")
        if not mask_text or any(c not in "01" for c in mask_text):
            raise SpecFileError(f"bundle must be a 0/1 string, got {mask_text!r}")
        mask = sum(1 << k for k, c in enumerate(mask_text) if c == "1")
        payments[mask] = parse_ext_money(price_text.strip())
    if width is None:
        raise SpecFileError("no payments given")
    return payments, width


def cmd_regions(args) -> int:
    started = time.perf_counter()
    if not args.payments:
        raise SpecFileError("regions needs --payments")
    payments, item_count = _parse_payments(args.payments)
    system = region_partition(payments, item_count)
    config = {
        "payments": args.payments,
        "box": args.box,
        "step": args.step,
        "seed": args.seed,
        "format": args.format,
    }
    bundles = []
    for mask, region in enumerate(system.regions):
        entry = {
            "bundle": _bundle_key(mask, item_count),
            "payment": _jsonable(system.payments[mask]),
        }
        if region is None:
            entry["attainable"] = False
        else:
            entry["attainable"] = True
            entry["inequalities"] = [
                {
                    "text": ineq.render(),
                    "coefficients": list(ineq.coefficients),
                    "bound": _jsonable(ineq.bound),
                }
                for ineq in region
            ]
        bundles.append(entry)
    results = {"item_count": item_count, "regions": bundles}
    if args.box:
        if not args.step:
            raise SpecFileError("a lattice needs both --box and --step")
        low_text, _, high_text = args.box.partition(",")
        try:
            low, high = parse_money(low_text), parse_money(high_text)
        except ValueError as exc:
            raise SpecFileError(f"bad --box: {exc}") from None
        step = parse_money(args.step)
        if step == 0 or high < low:
            raise SpecFileError("--box must be 'low,high' with low <= high; --step > 0")
        axis = []
        x = low
        while x <= high:
            axis.append(x)
            x += step
        lattice = []
        for point in _grid_points(axis, item_count):
            best = classify_point(system, point)
            lattice.append(
                {
                    "point": [_jsonable(x) for x in point],
                    "bundles": sorted(_bundle_key(m, item_count) for m in best),
                }
            )
        results["lattice"] = lattice
    _emit(_report("regions", config, results, started), args)
    return EXIT_OK


def _bundle_key(mask: int, item_count: int) -> str:
    return "".join("1" if (mask >> k) & 1 else "0" for k in range(item_count))


def _grid_points(axis, dims: int):
    if dims == 0:
        yield ()
        return
    for rest in _grid_points(axis, dims - 1):
        for x in axis:
            yield rest + (x,)


def cmd_multi(args) -> int:
    started = time.perf_counter()
    loaded = load_spec(args.spec)
    if loaded.kind not in ("sequential", "cluster"):
        raise SpecFileError(
            f"kind {loaded.kind!r} is single-item; use the 'verify' command"
        )
    spec = loaded.mechanism
    props = _parse_props(args.props, ("ir", "ic", "sic"), ("ir", "ic", "sic"))
    if loaded.candidates is not None:
        domains = loaded.candidates
        truths = tuple(domain[0] for domain in domains)
        if loaded.kind == "sequential":
            mechanism = lambda bids: sequential_allocate_general(spec, bids)
        else:
            mechanism = lambda bids: cluster_allocate(spec, bids)
        domain_note = "candidates from spec file; first candidate per agent is the truth"
    elif loaded.kind == "sequential":
        pool = tuple(nonincreasing_marginal_vectors(loaded.item_count, args.max_marginal))
        domains = tuple(pool for _ in range(spec.n))
        truths = None
        mechanism = lambda bids: sequential_allocate_hs(spec, bids)
        domain_note = (
            f"all nonincreasing integer marginal vectors with entries <= {args.max_marginal}"
        )
    else:
        raise SpecFileError("cluster verification needs candidate[...] lines in the spec")
    checks = {"ir": check_multi_ir, "ic": check_multi_ic, "sic": check_multi_sic}
    reports = [checks[name](mechanism, domains, truths) for name in props]
    config = {
        "spec": args.spec,
        "mechanism": loaded.source.split("\n"),
        "props": ",".join(props),
        "max_marginal": args.max_marginal,
        "seed": args.seed,
        "format": args.format,
    }
    results = {
        "all_passed": all(r.passed for r in reports),
        "domain": domain_note,
        "domain_sizes": [len(d) for d in domains],
        "reports": [_jsonable(r) for r in reports],
    }
    _emit(_report("multi", config, results, started), args)
    return EXIT_OK if results["all_passed"] else EXIT_PROPERTY_FAIL


def _add_common(parser) -> None:
    parser.add_argument("--seed", type=int, default=0, help="random seed (recorded in the report)")
    parser.add_argument("--out", default=None, help="write the report to this path instead of stdout")
    parser.add_argument("--format", choices=("json", "text"), default="json")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spitefree",
        description="exhaustive checks for auction mechanisms facing spiteful bidders",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="check properties of a single-item mechanism")
    p.add_argument("--spec", required=True, help="mechanism description file")
    p.add_argument("--grid", default=None, help='bid grid, e.g. "0,1/2,1,3/2,2"')
    p.add_argument("--props", default=None, help=f"comma list of: {', '.join(_PROP_NAMES)}")
    _add_common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("enumerate", help="sweep all IR+IC tables on a grid")
    p.add_argument("--grid", required=True)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--budget", type=int, default=1_000_000, help="max tables to enumerate")
    _add_common(p)
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("thresholds", help="optimal down-the-line prices for uniform values")
    p.add_argument("--n", type=int, required=True)
    _add_common(p)
    p.set_defaults(func=cmd_thresholds)

    p = sub.add_parser("revenue", help="exact and simulated expected revenue")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--samples", type=int, default=1_000_000)
    _add_common(p)
    p.set_defaults(func=cmd_revenue)

    p = sub.add_parser("regions", help="best-bundle regions of additive value space")
    p.add_argument("--payments", required=True, help='e.g. "10=4,01=3,11=6" (leftmost digit = a1)')
    p.add_argument("--box", default=None, help='lattice bounds "low,high" applied to every axis')
    p.add_argument("--step", default=None, help='lattice step, e.g. "1/4"')
    _add_common(p)
    p.set_defaults(func=cmd_regions)

    p = sub.add_parser("multi", help="check properties of a multi-item mechanism")
    p.add_argument("--spec", required=True)
    p.add_argument("--props", default=None, help="comma list of: ir, ic, sic")
    p.add_argument("--max-marginal", type=int, default=3, dest="max_marginal",
                   help="bound for the built-in homogeneous bid domain")
    _add_common(p)
    p.set_defaults(func=cmd_multi)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BudgetExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except OwnBidPaymentVariationError as exc:
        print(f"property violation: {exc}", file=sys.stderr)
        return EXIT_PROPERTY_FAIL
    except (SpecFileError, DomainMismatchError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
