"""Command-line entry point: single solves, region sweeps, convergence
traces and oracle comparisons, with CSV/JSON output suitable for plotting."""

from __future__ import annotations

import argparse
import csv
import json
import re
import sys

import numpy as np

from . import oracle as oracle_mod
from . import region as region_mod
from .scenario import Scenario, WeightVector, dbm_to_watts, make_channels, scenario_from_json
from .schemes import individual_ee, noma_rates, rsma_rates, sdma_rates
from .sca import ScaOptions, SolveResult, SubproblemFailure, solve_scheme, trace_csv_rows

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NOT_CONVERGED = 2
EXIT_USAGE = 64
EXIT_CANTCREAT = 73

CONVERGENCE_CSV_COLUMNS = ("scheme", "p_dyn_dbm", "iteration", "t", "wsr", "power_w", "status")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits with 2; we want 64
        raise UsageError(message)


_PI_RE = re.compile(r"^\s*([+-]?[\d.]*)\s*\*?\s*pi\s*(?:/\s*([\d.]+))?\s*$", re.IGNORECASE)


def parse_angle(text: str) -> float:
    """Accept plain radians ("0.6981") or fractions of pi ("2pi/9", "pi/2")."""
    try:
        return float(text)
    except ValueError:
        pass
    m = _PI_RE.match(text)
    if not m:
        raise UsageError(f"cannot parse angle {text!r}; use radians or e.g. '2pi/9'")
    coef_txt = m.group(1)
    if coef_txt in ("", "+"):
        coef = 1.0
    elif coef_txt == "-":
        coef = -1.0
    else:
        coef = float(coef_txt)
    den = float(m.group(2)) if m.group(2) else 1.0
    return coef * np.pi / den


def _add_scenario_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON scenario file; overrides the flags below")
    p.add_argument("--nt", type=int, default=4)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--theta", type=str, default="0")
    p.add_argument("--pt-dbm", type=float, default=40.0)
    p.add_argument("--pdyn-dbm", type=float, default=30.0)
    p.add_argument("--psta-dbm", type=float, default=30.0)
    p.add_argument("--eta", type=float, default=0.35)
    p.add_argument("--bandwidth", type=float, default=1.0)
    p.add_argument("--noise-power", type=str, default="1,1", help="N_0 per user, watts")


def _add_sca_flags(p: argparse.ArgumentParser):
    p.add_argument("--epsilon", type=float, default=1e-4)
    p.add_argument("--max-iter", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--extra-starts", type=int, default=1)
    p.add_argument("--corner-starts", action="store_true")


def _scenario_from_args(args, nt=None, gamma=None, theta=None, pdyn_dbm=None) -> Scenario:
    if args.config:
        return scenario_from_json(args.config)
    if not (0.0 < args.eta <= 1.0):
        raise UsageError("eta must be in (0,1]")
    nt = nt if nt is not None else args.nt
    gamma = gamma if gamma is not None else args.gamma
    theta = theta if theta is not None else parse_angle(args.theta)
    pdyn = pdyn_dbm if pdyn_dbm is not None else args.pdyn_dbm
    noise = [float(x) for x in args.noise_power.split(",")]
    if len(noise) != 2:
        raise UsageError("--noise-power needs two comma-separated values")
    return Scenario(
        nt=nt,
        channels=make_channels(gamma, theta, nt),
        p_t=dbm_to_watts(args.pt_dbm),
        eta=args.eta,
        p_dyn=dbm_to_watts(pdyn),
        p_sta=dbm_to_watts(args.psta_dbm),
        bandwidth=args.bandwidth,
        noise_power=(noise[0], noise[1]),
    )


def _options_from_args(args) -> ScaOptions:
    return ScaOptions(
        epsilon=args.epsilon,
        max_iter=args.max_iter,
        seed=args.seed,
        extra_starts=args.extra_starts,
        corner_starts=args.corner_starts,
    )


def _result_json(result: SolveResult, scenario: Scenario, weights: WeightVector) -> dict:
    def cvec(v):
        return None if v is None else [[float(x.real), float(x.imag)] for x in v]

    if result.scheme == "rsma":
        report = rsma_rates(result.precoders, result.split, scenario, weights).to_json_dict()
    else:
        if result.scheme == "sdma":
            r1, r2 = sdma_rates(result.precoders, scenario)
        else:
            r1, r2 = noma_rates(result.precoders, result.order, scenario)
        report = {
            "rate_user1": r1,
            "rate_user2": r2,
            "common_rate": None,
            "wsr": result.wsr,
            "ee": result.ee,
            "power_w": result.transmit_power,
        }
    ee1, ee2 = individual_ee(
        result.scheme, result.precoders, scenario, split=result.split, order=result.order
    )
    return {
        "scheme": result.scheme,
        "order": None if result.order is None else [result.order.first, result.order.second],
        "ee": result.ee,
        "ee1": ee1,
        "ee2": ee2,
        "wsr": result.wsr,
        "power_w": result.transmit_power,
        "iterations": result.iterations,
        "converged": result.converged,
        "split": [result.split.c1, result.split.c2],
        "precoders": {
            "common": cvec(result.precoders.common),
            "private1": cvec(result.precoders.private[0]),
            "private2": cvec(result.precoders.private[1]),
        },
        "report": report,
        "trace": result.trace,
    }


def _open_out(path: str):
    try:
        return open(path, "w", newline="", encoding="utf-8")
    except OSError as exc:
        raise _OutputError(str(exc)) from exc


class _OutputError(Exception):
    pass


def cmd_solve(args) -> int:
    scenario = _scenario_from_args(args)
    weights = WeightVector(args.u1, args.u2)
    result = solve_scheme(args.scheme, scenario, weights, _options_from_args(args))
    payload = _result_json(result, scenario, weights)
    out = json.dumps(payload, indent=2)
    if args.out:
        with _open_out(args.out) as fh:
            fh.write(out + "\n")
    else:
        print(out)
    return EXIT_OK if result.converged else EXIT_NOT_CONVERGED


def cmd_region(args) -> int:
    thetas = [parse_angle(t) for t in args.thetas.split(",")]
    schemes = args.schemes.split(",")
    sweep = region_mod.WeightSweep()
    options = _options_from_args(args)
    rows: list[dict] = []
    summaries = []
    for theta in thetas:
        scenario = _scenario_from_args(args, theta=theta)
        boundaries = region_mod.sweep_all(
            schemes, scenario, sweep, options, dominance_warm_starts=not args.no_warm_starts
        )
        for scheme in schemes:
            rows.extend(
                region_mod.boundary_csv_rows(boundaries[scheme], args.gamma, theta, args.pdyn_dbm)
            )
        if "rsma" in boundaries:
            for other in ("sdma", "noma"):
                if other in boundaries:
                    ok, violations = region_mod.region_dominates(
                        boundaries["rsma"], boundaries[other]
                    )
                    summaries.append(
                        f"theta={theta:.6g}: rsma covers {other}: {ok}"
                        + ("" if ok else f" ({len(violations)} points outside)")
                    )
    with _open_out(args.out) as fh:
        writer = csv.DictWriter(fh, fieldnames=region_mod.REGION_CSV_COLUMNS)
        writer.writeheader()
        writer.writerows(rows)
    for line in summaries:
        print(line)
    converged = sum(1 for r in rows if r["converged"])
    frac = converged / len(rows) if rows else 0.0
    print(f"{converged}/{len(rows)} points converged ({100 * frac:.1f}%)")
    return EXIT_OK if frac >= 0.9 else EXIT_NOT_CONVERGED


def cmd_convergence(args) -> int:
    pdyn_list = [float(x) for x in args.pdyn_dbms.split(",")]
    weights = WeightVector(1.0, 1.0)
    options = _options_from_args(args)
    rows = []
    all_converged = True
    for scheme in ("rsma", "sdma", "noma"):
        for pdyn in pdyn_list:
            scenario = _scenario_from_args(args, pdyn_dbm=pdyn)
            result = solve_scheme(scheme, scenario, weights, options)
            all_converged &= result.converged
            for row in trace_csv_rows(result):
                rows.append({"scheme": scheme, "p_dyn_dbm": pdyn, **row})
    with _open_out(args.out) as fh:
        writer = csv.DictWriter(fh, fieldnames=CONVERGENCE_CSV_COLUMNS)
        writer.writeheader()
        writer.writerows(rows)
    print(f"wrote {len(rows)} trace rows to {args.out}")
    return EXIT_OK if all_converged else EXIT_NOT_CONVERGED


def cmd_oracle(args) -> int:
    if not args.span and args.nt != 1:
        raise UsageError("oracle comparison requires --nt 1 unless --span is given")
    scenario = _scenario_from_args(args)
    weights = WeightVector(args.u1, args.u2)
    result = solve_scheme(args.scheme, scenario, weights, _options_from_args(args))
    grid = oracle_mod.GridSpec(
        power_steps=args.power_steps,
        split_steps=args.split_steps,
        span_coeff_steps=args.span_coeff_steps,
        phase_steps=args.phase_steps,
    )
    report = oracle_mod.oracle_report(
        args.scheme, scenario, weights, grid, result.ee, use_span=args.span
    )
    print(json.dumps(report, indent=2))
    if args.span:
        ok = result.ee >= report["oracle_ee"] - args.span_tol
    else:
        ok = report["rel_gap"] <= args.max_rel_gap
    return EXIT_OK if ok else EXIT_ERROR


def build_parser() -> _Parser:
    parser = _Parser(prog="eebeam", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="solve one scheme at one weight point")
    p_solve.add_argument("--scheme", required=True, choices=("rsma", "sdma", "noma"))
    p_solve.add_argument("--u1", type=float, default=1.0)
    p_solve.add_argument("--u2", type=float, default=1.0)
    p_solve.add_argument("--out", help="write the JSON result here instead of stdout")
    _add_scenario_flags(p_solve)
    _add_sca_flags(p_solve)
    p_solve.set_defaults(func=cmd_solve)

    p_region = sub.add_parser("region", help="sweep weights and write the region CSV")
    p_region.add_argument("--schemes", default="sdma,noma,rsma")
    p_region.add_argument("--thetas", default="pi/9,2pi/9,pi/3,4pi/9")
    p_region.add_argument("--no-warm-starts", action="store_true")
    p_region.add_argument("--out", required=True)
    _add_scenario_flags(p_region)
    _add_sca_flags(p_region)
    p_region.set_defaults(func=cmd_region)

    p_conv = sub.add_parser("convergence", help="write iteration traces per scheme and P_dyn")
    p_conv.add_argument("--pdyn-dbms", default="20,30,40")
    p_conv.add_argument("--out", required=True)
    _add_scenario_flags(p_conv)
    p_conv.set_defaults(theta="2pi/9")
    _add_sca_flags(p_conv)
    p_conv.set_defaults(func=cmd_convergence)

    p_oracle = sub.add_parser("oracle", help="compare the solver against the grid oracle")
    p_oracle.add_argument("--scheme", required=True, choices=("rsma", "sdma", "noma"))
    p_oracle.add_argument("--u1", type=float, default=1.0)
    p_oracle.add_argument("--u2", type=float, default=1.0)
    p_oracle.add_argument("--span", action="store_true")
    p_oracle.add_argument("--power-steps", type=int, default=101)
    p_oracle.add_argument("--split-steps", type=int, default=51)
    p_oracle.add_argument("--span-coeff-steps", type=int, default=5)
    p_oracle.add_argument("--phase-steps", type=int, default=8)
    p_oracle.add_argument("--max-rel-gap", type=float, default=0.02)
    p_oracle.add_argument("--span-tol", type=float, default=1e-6)
    _add_scenario_flags(p_oracle)
    _add_sca_flags(p_oracle)
    p_oracle.set_defaults(nt=1, gamma=0.5, pdyn_dbm=30.0)
    p_oracle.set_defaults(func=cmd_oracle)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except _OutputError as exc:
        print(f"error: cannot create output: {exc}", file=sys.stderr)
        return EXIT_CANTCREAT
    except SubproblemFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
