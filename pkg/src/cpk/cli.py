"""Command-line driver.

Exit codes: 0 success / classical, 1 malformed input or simulation failure,
2 table outside the NBTS polytope, 3 non-classical table (separation found),
4 verification failure.
"""
from __future__ import annotations

import argparse
import sys

import numpy as np

from . import channels as ch
from . import formats as fmt
from . import process as pm
from . import tensor as tn
from . import twotime as tt
from .polytope import causal
from .polytope.table import ProbTable

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_OUTSIDE = 2
EXIT_NONCLASSICAL = 3
EXIT_VERIFY = 4

SCENARIOS = ("cyclic3", "causal-circuit")


class InputError(Exception):
    pass


def _scenario_state(name: str, seed: int) -> tt.TwoTimeState:
    if name == "cyclic3":
        return tt.build_eta()
    if name == "causal-circuit":
        return pm.pm_to_twotime(pm.random_causal_circuit(3, seed).process())
    raise InputError(f"unknown scenario {name!r}; choose from {', '.join(SCENARIOS)}")


def _read(path, parser):
    try:
        return parser(fmt.load(path))
    except (OSError, ValueError, tn.LabelError) as exc:
        raise InputError(f"{path}: {exc}") from exc


def _load_state(args) -> tt.TwoTimeState:
    if args.state:
        return _read(args.state, fmt.state_from_json)
    if args.pm:
        return pm.pm_to_twotime(_read(args.pm, fmt.pm_from_json))
    return _scenario_state(args.scenario or "cyclic3", args.seed)


# --- subcommands ---------------------------------------------------------------------------------


def cmd_simulate(args) -> int:
    state = _load_state(args)
    if args.instruments:
        instruments = _read(args.instruments, fmt.instruments_from_json)
    else:
        instruments = tt.protocol_instruments(state.parties)
    try:
        table = tt.full_table(state, instruments)
    except tt.NormalizationError as exc:
        print(f"normalization failure: {exc}; the state is not a normalized linear two-time state", file=sys.stderr)
        return EXIT_INPUT
    except (tt.SnappingError, ValueError, tn.LabelError) as exc:
        print(f"simulation failed: {exc}", file=sys.stderr)
        return EXIT_INPUT
    print(table.grid())
    if args.out:
        fmt.dump(table.to_json(), args.out)
    return EXIT_OK


def cmd_certify(args) -> int:
    if not args.table:
        raise InputError("certify needs --table")
    table = _read(args.table, ProbTable.from_json)
    report = {"table": args.table}
    if not table.is_normalized() or not causal.in_nbts_polytope(table):
        report["in_nbts_polytope"] = False
        report["violated"] = causal.violated_equalities(table)
        report["nonnegative"] = table.is_nonnegative()
        print("table lies outside the NBTS polytope")
        for tag in report["violated"]:
            print(f"  violated: {tag}")
        if args.out:
            fmt.dump(report, args.out)
        return EXIT_OUTSIDE
    report["in_nbts_polytope"] = True
    vertices = fmt.load_vertices(table.n_parties)
    cert = causal.membership(table, vertices)
    ext = causal.extremality(table)
    report.update(
        n_vertices=len(vertices),
        certificate=cert.to_json(),
        classical=cert.is_member,
        is_extreme=ext.is_extreme,
        saturated_rank=ext.saturated_rank,
        zero_entries=ext.n_zeros,
    )
    if table.n_parties == 3:
        report["symmetries"] = causal.verify_symmetries(table)
        bad = causal.last_mover_violations(table)
        report["last_mover_ok"] = not bad
        report["last_mover_violations"] = len(bad)
    print(f"vertices: {len(vertices)}")
    print(f"classical: {cert.is_member}")
    if cert.is_member:
        for vid, w in sorted(cert.weights.items()):
            print(f"  vertex {vid}: {w}")
    else:
        print(f"  separating inequality: y.p <= {cert.bound} (table gives "
              f"{sum(c * e for c, e in zip(cert.y, table.entries))})")
    print(f"is_extreme: {ext.is_extreme} (saturated rank {ext.saturated_rank} of {len(table.entries)})")
    for key in ("symmetries", "last_mover_ok"):
        if key in report:
            print(f"{key}: {report[key]}")
    if args.out:
        fmt.dump(report, args.out)
    return EXIT_OK if cert.is_member else EXIT_NONCLASSICAL


def cmd_verify(args) -> int:
    state = _load_state(args)
    tol = args.tolerance if args.tolerance is not None else tt.LINEARITY_ATOL
    report = {"random": args.random, "seed": args.seed, "tolerance": tol}
    lin = tt.verify_linearity(state, args.random, args.seed, tol)
    report["linearity"] = {"passed": lin.passed, "worst_deviation": lin.worst_deviation, "checked": lin.n_checked}
    worst = lin.worst_deviation
    ok = lin.passed
    report["marginals"] = {}
    for party in state.parties:
        mr = tt.marginal_report(state, party, args.random, args.seed, tol)
        report["marginals"][party] = {"holds": mr.holds, "worst_deviation": mr.worst_deviation}
        ok = ok and mr.holds
        worst = max(worst, mr.worst_deviation)
    if args.pm:
        W = pm.twotime_to_pm(state)
        rng = np.random.default_rng(args.seed)
        gap = 0.0
        for _ in range(max(args.random, 1)):
            inst = [pm.random_instrument(rng) for _ in range(W.n_parties)]
            gap = max(gap, float(pm.equivalence_gap(W, inst)))
        report["equivalence"] = {"passed": gap <= tol, "worst_gap": gap, "positive": W.is_positive()}
        ok = ok and gap <= tol
        worst = max(worst, gap)
    report["passed"] = ok
    report["worst_deviation"] = worst
    print(f"linearity: {'pass' if lin.passed else 'FAIL'} ({lin.n_checked} channel products, "
          f"worst deviation {lin.worst_deviation:.3g})")
    for party, r in report["marginals"].items():
        print(f"marginal {party}: {'pass' if r['holds'] else 'FAIL'} (worst deviation {r['worst_deviation']:.3g})")
    if "equivalence" in report:
        e = report["equivalence"]
        print(f"process/two-time equivalence: {'pass' if e['passed'] else 'FAIL'} (worst gap {e['worst_gap']:.3g})")
    if not ok:
        print(f"verification failed, worst deviation {worst:.6g}")
    if args.out:
        fmt.dump(report, args.out)
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_vertices(args) -> int:
    verts = fmt.load_vertices(3)
    print(f"{len(verts)} classical vertices from {len(causal.all_strategies())} strategy encodings")
    if args.out:
        fmt.dump(fmt.vertices_to_json(verts), args.out)
    return EXIT_OK


def cmd_sandwich(args) -> int:
    if not args.kraus:
        raise InputError("sandwich needs --kraus")
    kraus = _read(args.kraus, ch.kraus_from_json)
    q = ch.sandwich_to_stochastic(kraus)
    tp = ch.kraus_is_trace_preserving(kraus)
    for row in q:
        print("  ".join(f"{v:.12g}" for v in row))
    print(f"trace preserving: {tp}; column stochastic: {ch.is_column_stochastic(q)}")
    if args.out:
        fmt.dump({"q": q.tolist(), "trace_preserving": tp}, args.out)
    return EXIT_OK


def cmd_pm_convert(args) -> int:
    if args.pm:
        W = _read(args.pm, fmt.pm_from_json)
        payload = fmt.state_to_json(pm.pm_to_twotime(W))
        what = "two-time state"
    else:
        W = pm.twotime_to_pm(_load_state(args))
        payload = fmt.pm_to_json(W)
        what = f"process matrix (positive: {W.is_positive()})"
    text = fmt.dump(payload, args.out)
    if args.out:
        print(f"wrote {what} to {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "certify": cmd_certify,
    "verify": cmd_verify,
    "vertices": cmd_vertices,
    "sandwich": cmd_sandwich,
    "pm-convert": cmd_pm_convert,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cpk", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--scenario", choices=SCENARIOS)
        p.add_argument("--state")
        p.add_argument("--pm")
        p.add_argument("--table")
        p.add_argument("--instruments")
        p.add_argument("--kraus")
        p.add_argument("--out")
        p.add_argument("--seed", type=int, default=tt.DEFAULT_SEED)
        p.add_argument("--random", type=int, default=tt.DEFAULT_SAMPLES)
        p.add_argument("--tolerance", type=float)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.seed < 0 or args.random < 0:
        print("--seed and --random must be non-negative", file=sys.stderr)
        return EXIT_INPUT
    try:
        return COMMANDS[args.command](args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
