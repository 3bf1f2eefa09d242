"""Command-line front end: one subcommand per library operation."""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from typing import Any, Callable

import numpy as np

from . import __version__
from .closedsets import ClosedSetApprox
from .domains import BandProfile, band_profile, domains_equal_codiag, fw_decide, horizon_for_bands
from .equivalence import b_t_obstruction, eps_net_diagonalize, read_matrix, relatively_compact_check, ucres_equivalent, wvn_construct
from .genexpr import GeneratorError, GeneratorEvalError
from .matching import bottleneck_match
from .metrics import MetricParams, nrt_distance, srt_distance
from .operator_model import (
    DEFAULT_HORIZON,
    DEFAULT_RESOLUTION,
    DEFAULT_WINDOW,
    OperatorSpec,
    SpecError,
    load_spec,
    make_family,
)
from .reproduce import reproduce_suite
from .spectra import essential_spectrum, sigma_bar, spectrum_report
from .turbulence import orbit_walk_compact_at_zero, orbit_walk_unbounded, verify_walk

EXIT_OK, EXIT_DOMAIN, EXIT_INPUT = 0, 1, 2

_FAMILY_KEYS = {"t": float, "s": float, "M": float, "c": float, "F": str, "negative_first": bool, "basis": str}


class InputError(Exception):
    """Bad command-line input, unreadable file or unparsable spec (exit code 2)."""


def parse_operator(text: str) -> OperatorSpec:
    """A JSON spec path, or ``family[:key=value,...]`` such as ``B_t:t=0.5``.

    Parameters are separated by ';' instead of ',' when a set literal is present,
    as in ``A_F:F=n in {1,4}``.
    """
    if text.endswith(".json") or os.path.sep in text:
        return load_spec(text)
    name, _, rest = text.partition(":")
    kwargs: dict[str, Any] = {}
    if rest:
        for item in rest.split(";" if "{" in rest else ","):
            key, sep, value = item.partition("=")
            key = key.strip()
            if not sep or key not in _FAMILY_KEYS:
                raise InputError(f"bad family parameter {item!r}")
            kind = _FAMILY_KEYS[key]
            kwargs[key] = value.strip().lower() in ("1", "true", "yes") if kind is bool else kind(value)
    return make_family(name, **kwargs)


def _single_operator(args) -> OperatorSpec:
    if args.spec:
        return load_spec(args.spec)
    if args.a:
        return parse_operator(args.a)
    if not args.family:
        raise InputError("give --family, --spec or --a")
    kwargs = {k: getattr(args, k) for k in ("t", "s", "F", "M", "c") if getattr(args, k) is not None}
    if args.negative_first:
        kwargs["negative_first"] = True
    return make_family(args.family, basis=args.basis, **kwargs)


def _pair(args) -> tuple[OperatorSpec, OperatorSpec]:
    if not (args.a and args.b):
        raise InputError("give both --a and --b")
    return parse_operator(args.a), parse_operator(args.b)


def _set_rows(ess: ClosedSetApprox) -> list[list]:
    rows = [["point", p, p] for p in ess.points]
    rows += [["interval", lo, hi] for lo, hi in ess.intervals]
    return rows


# Each command returns (result JSON, CSV header, CSV rows, extra provenance).
Outcome = tuple[dict, list, list, dict]


def cmd_ess(args) -> Outcome:
    ess = essential_spectrum(_single_operator(args), args.window, args.horizon, args.resolution)
    return ess.to_json(), ["kind", "lo", "hi"], _set_rows(ess), {}


def cmd_spectrum(args) -> Outcome:
    rep = spectrum_report(_single_operator(args), args.window, args.horizon, args.resolution)
    return rep.to_json(), ["kind", "lo", "hi"], _set_rows(rep.spectrum), {}


def cmd_sigma_bar(args) -> Outcome:
    sb = sigma_bar(_single_operator(args), args.window, args.horizon, args.resolution)
    return sb.to_json(), ["kind", "lo", "hi"], _set_rows(sb.ess) + [["unbounded_bit", sb.unbounded_bit, ""]], {}


def cmd_dist(args) -> Outcome:
    a, b = _pair(args)
    if args.kind == "srt":
        params = MetricParams(args.n_max, args.m_max, args.tail_mode)
        res = srt_distance(a, b, params).to_json()
        extra = {"n_max": args.n_max, "m_max": args.m_max, "tail_mode": args.tail_mode}
    else:
        res = nrt_distance(a, b, args.horizon).to_json()
        extra = {}
    return res, ["key", "value"], [[k, v] for k, v in res.items()], extra


def cmd_match(args) -> Outcome:
    a, b = _pair(args)
    plan = bottleneck_match(a.values(args.horizon), b.values(args.horizon))
    rows = [[n, m] for n, m in enumerate(plan.mapping, start=1)]
    return plan.to_json(), ["b_index", "a_index"], rows, {}


def cmd_wvn(args) -> Outcome:
    a, b = _pair(args)
    plan, cert = wvn_construct(a, b, args.horizon)
    res = {"plan": plan.to_json(), "certificate": cert.to_json()}
    rows = [[j, c] for j, c in enumerate(cert.prefix_costs)]
    return res, ["block", "prefix_cost"], rows, {}


def cmd_ucres(args) -> Outcome:
    a, b = _pair(args)
    sa = sigma_bar(a, args.window, args.horizon, args.resolution)
    sb = sigma_bar(b, args.window, args.horizon, args.resolution)
    same = ucres_equivalent(a, b, args.window, args.horizon, args.resolution)
    res = {"equivalent": same, "a": sa.to_json(), "b": sb.to_json()}
    return res, ["key", "value"], [["equivalent", same]], {}


def cmd_relcompact(args) -> Outcome:
    if not (args.k and args.a):
        raise InputError("give --k and --a")
    rep = relatively_compact_check(parse_operator(args.k), parse_operator(args.a), args.horizon, args.resolution)
    rows = [[j, v] for j, v in enumerate(rep.block_sups)]
    return rep.to_json(), ["block", "gamma_sup"], rows, {}


def _profile(spec: OperatorSpec, n_max: int, horizon: int, auto: bool) -> BandProfile:
    if auto and spec.meta.abs_divergent:
        horizon = max(horizon, horizon_for_bands(spec, n_max, start=horizon))
    return band_profile(spec, n_max, horizon)


def cmd_bands(args) -> Outcome:
    prof = _profile(_single_operator(args), args.n_max, args.horizon, args.auto_horizon)
    rows = [[n, "cap" if n in prof.capped else d] for n, d in enumerate(prof.dims)]
    return prof.to_json(), ["n", "d_n"], rows, {"n_max": args.n_max, "horizon_used": prof.horizon}


def _read_profile(path: str) -> BandProfile:
    with open(path) as fh:
        return BandProfile.from_json(json.load(fh))


def cmd_fw(args) -> Outcome:
    top = args.n_max + args.l_max + args.k_max
    if args.p and args.q:
        p, q = _read_profile(args.p), _read_profile(args.q)
    else:
        a, b = _pair(args)
        p = _profile(a, top, args.horizon, True)
        q = _profile(b, top, args.horizon, True)
    verdict = fw_decide(p, q, args.k_max, args.n_max, args.l_max)
    rows = [[k, status] for k, status in enumerate(verdict.per_k)]
    return verdict.to_json(), ["k", "status"], rows, {"k_max": args.k_max, "n_max": args.n_max, "l_max": args.l_max}


def cmd_dom_eq(args) -> Outcome:
    a, b = _pair(args)
    rep = domains_equal_codiag(a, b, args.horizon)
    res = rep.to_json()
    return res, ["key", "value"], [[k, v] for k, v in res.items()], {}


def cmd_obstruction(args) -> Outcome:
    if args.s is None or args.t is None:
        raise InputError("give --s and --t")
    res = b_t_obstruction(args.s, args.t, args.grid, args.grid, args.grid)
    out = res.to_json()
    return out, ["key", "value"], [["minimum", res.minimum], ["bound", res.bound]], {"grid": args.grid}


def cmd_walk(args) -> Outcome:
    a, b = _pair(args)
    walk = orbit_walk_unbounded(a, b, args.delta, args.r, args.horizon)
    check = verify_walk(walk)
    res = walk.to_json()
    res["check"] = {"ok": check.ok, "max_step_norm": check.max_step_norm,
                    "max_distance": check.max_distance, "problems": list(check.problems)}
    rows = [[j, d] for j, d in enumerate(walk.per_step_distance, start=1)]
    return res, ["step", "distance"], rows, {"delta": args.delta, "r": args.r}


def _parse_pairs(text: str) -> list[tuple[int, float]]:
    pairs = []
    for item in filter(None, text.split(",")):
        idx, sep, val = item.partition(":")
        if not sep:
            raise InputError(f"bad pair {item!r}; expected index:value")
        pairs.append((int(idx), float(val)))
    return pairs


def cmd_walk0(args) -> Outcome:
    walk = orbit_walk_compact_at_zero(_parse_pairs(args.pairs), args.probes, args.eps, args.r)
    check = verify_walk(walk)
    res = walk.to_json()
    res["check"] = {"ok": check.ok, "max_step_norm": check.max_step_norm, "max_distance": check.max_distance}
    rows = [[j, d] for j, d in enumerate(walk.per_step_distance, start=1)]
    return res, ["step", "distance"], rows, {"eps": args.eps, "r": args.r, "probes": args.probes}


def cmd_epsnet(args) -> Outcome:
    res = eps_net_diagonalize(read_matrix(args.matrix), args.eps, args.offset)
    norm = float(np.linalg.norm(res.K, 2))
    out = {"eigenvalues": res.D.tolist(), "perturbation_norm": norm, "eps": res.eps, "offset": res.offset}
    rows = [[i, v] for i, v in enumerate(res.D.tolist(), start=1)]
    return out, ["index", "value"], rows, {"eps": args.eps, "offset": args.offset}


def cmd_reproduce(args) -> Outcome:
    numbers = None if args.all or not args.check else sorted(set(args.check))
    results = reproduce_suite(numbers)
    for r in results:
        print(r.line(), file=sys.stderr)
    out = {"checks": [r.to_json() for r in results], "all_passed": all(r.passed for r in results)}
    rows = [[r.number, r.name, r.passed] for r in results]
    return out, ["number", "name", "passed"], rows, {}


COMMANDS: dict[str, Callable] = {
    "ess": cmd_ess,
    "spectrum": cmd_spectrum,
    "sigma-bar": cmd_sigma_bar,
    "dist": cmd_dist,
    "match": cmd_match,
    "wvn": cmd_wvn,
    "ucres": cmd_ucres,
    "relcompact": cmd_relcompact,
    "bands": cmd_bands,
    "fw": cmd_fw,
    "dom-eq": cmd_dom_eq,
    "obstruction": cmd_obstruction,
    "walk": cmd_walk,
    "walk0": cmd_walk0,
    "epsnet": cmd_epsnet,
    "reproduce": cmd_reproduce,
}


def _common(sub: argparse.ArgumentParser, horizon: int = DEFAULT_HORIZON) -> None:
    sub.add_argument("--config", help="JSON file of option defaults; unknown keys are rejected")
    sub.add_argument("--window", nargs=2, type=float, default=list(DEFAULT_WINDOW), metavar=("LO", "HI"))
    sub.add_argument("--horizon", type=int, default=horizon)
    sub.add_argument("--resolution", type=float, default=DEFAULT_RESOLUTION)
    sub.add_argument("--format", choices=("json", "csv"), default="json")
    sub.add_argument("--output", help="write here instead of stdout")


def _operator_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--family", help="built-in family name")
    sub.add_argument("--spec", help="operator spec JSON file")
    sub.add_argument("--a", help="operator: family[:key=value,...] or spec JSON path")
    sub.add_argument("--t", type=float)
    sub.add_argument("--s", type=float)
    sub.add_argument("--F", help="predicate for A_F, e.g. 'n in {1,4}'")
    sub.add_argument("--M", type=float)
    sub.add_argument("--c", type=float)
    sub.add_argument("--negative-first", action="store_true")
    sub.add_argument("--basis", default="std")


def _pair_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--a", help="first operator: family[:key=value,...] or spec JSON path")
    sub.add_argument("--b", help="second operator")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="diagop", description="Computations with diagonal self-adjoint operators.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)
    parser.set_defaults(_subparsers=subs.choices)

    for name, text in (("ess", "essential spectrum"), ("spectrum", "spectrum with discrete part"),
                       ("sigma-bar", "essential spectrum with the unbounded bit"), ("bands", "dyadic band profile")):
        sub = subs.add_parser(name, help=text)
        _common(sub)
        _operator_flags(sub)
        if name == "bands":
            sub.add_argument("--n-max", type=int, default=32)
            sub.add_argument("--auto-horizon", action="store_true",
                             help="grow the horizon until every band up to n-max is complete")

    sub = subs.add_parser("dist", help="SRT or NRT distance")
    _common(sub)
    _pair_flags(sub)
    sub.add_argument("--kind", choices=("srt", "nrt"), default="nrt")
    sub.add_argument("--n-max", type=int, default=20)
    sub.add_argument("--m-max", type=int, default=20)
    sub.add_argument("--tail-mode", choices=("ignore", "metadata-bound"), default="ignore")

    for name, text, horizon in (("match", "bottleneck matching of the first HORIZON terms", 256),
                                ("wvn", "permutation plus compact-difference certificate", 2048),
                                ("ucres", "resolvent equivalence modulo compacts", DEFAULT_HORIZON),
                                ("dom-eq", "co-diagonal domain equality", DEFAULT_HORIZON)):
        sub = subs.add_parser(name, help=text)
        _common(sub, horizon)
        _pair_flags(sub)

    sub = subs.add_parser("relcompact", help="is K (A - i)^-1 compact")
    _common(sub)
    sub.add_argument("--k", help="perturbation operator")
    sub.add_argument("--a", help="base operator")

    sub = subs.add_parser("fw", help="k-shift inequality decision on band profiles")
    _common(sub)
    _pair_flags(sub)
    sub.add_argument("--p", help="band profile JSON (instead of --a)")
    sub.add_argument("--q", help="band profile JSON (instead of --b)")
    sub.add_argument("--k-max", type=int, default=5)
    sub.add_argument("--n-max", type=int, default=256)
    sub.add_argument("--l-max", type=int, default=64)

    sub = subs.add_parser("obstruction", help="grid minimum separating B_s from B_t")
    _common(sub)
    sub.add_argument("--s", type=float)
    sub.add_argument("--t", type=float)
    sub.add_argument("--grid", type=int, default=100)

    sub = subs.add_parser("walk", help="small-step walk between unbounded operators")
    _common(sub, 512)
    _pair_flags(sub)
    sub.add_argument("--delta", type=float, default=0.5)
    sub.add_argument("--r", type=float, default=0.1)

    sub = subs.add_parser("walk0", help="small-step walk from 0 to a finite-rank operator")
    _common(sub)
    sub.add_argument("--pairs", required=False, default="", help="index:value list, e.g. 1:2.0,3:-0.5")
    sub.add_argument("--probes", type=int, default=8)
    sub.add_argument("--eps", type=float, default=1.0)
    sub.add_argument("--r", type=float, default=0.2)

    sub = subs.add_parser("epsnet", help="round a Hermitian matrix's spectrum to an eps-net")
    _common(sub)
    sub.add_argument("--matrix", required=True, help="CSV or JSON {re, im} file")
    sub.add_argument("--eps", type=float, required=True)
    sub.add_argument("--offset", type=float, default=0.0)

    sub = subs.add_parser("reproduce", help="run the reproduction checks")
    _common(sub)
    sub.add_argument("--all", action="store_true")
    sub.add_argument("--check", type=int, action="append", help="check number (repeatable)")
    return parser


_RESERVED = {"command", "config", "format", "output", "_subparsers"}


def _apply_config(parser: argparse.ArgumentParser, argv: list[str], args: argparse.Namespace) -> argparse.Namespace:
    if not args.config:
        return args
    with open(args.config) as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise InputError("config must be a JSON object")
    allowed = set(vars(args)) - _RESERVED
    unknown = sorted(set(k.replace("-", "_") for k in data) - allowed)
    if unknown:
        raise InputError(f"unknown config keys: {', '.join(unknown)}")
    sub = args._subparsers[args.command]
    sub.set_defaults(**{k.replace("-", "_"): v for k, v in data.items()})
    return parser.parse_args(argv)


def _render(payload: dict, header: list, rows: list, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(payload, indent=2, sort_keys=True, allow_nan=True) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def run(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args = _apply_config(parser, argv, args)
        result, header, rows, extra = COMMANDS[args.command](args)
    except GeneratorEvalError as exc:
        print(f"diagop: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (InputError, SpecError, GeneratorError, OSError, json.JSONDecodeError) as exc:
        print(f"diagop: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ValueError, ArithmeticError) as exc:
        print(f"diagop: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    config = {k: v for k, v in sorted(vars(args).items()) if k not in ("output", "format", "_subparsers")}
    provenance = {
        "version": __version__,
        "horizon": args.horizon,
        "window": list(args.window),
        "resolution": args.resolution,
        **extra,
    }
    payload = {"command": args.command, "config": config, "result": result, "provenance": provenance}
    text = _render(payload, header, rows, args.format)
    try:
        if args.output:
            with open(args.output, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except OSError as exc:
        print(f"diagop: cannot write output: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if args.command == "reproduce" and not result["all_passed"]:
        return EXIT_DOMAIN
    return EXIT_OK


def main() -> None:
    sys.exit(run())
