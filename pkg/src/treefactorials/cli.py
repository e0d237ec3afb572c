"""Command line front end.

Subcommands map one-to-one onto the library layers: `factorials` and
`equidist` drive the weighting process, `oracle-check` cross-validates the
three independent computations of the same sequence, `adelic` handles
integer sets, `flow`, `branching` the network quantities, and `realize` the
inverse construction.  Output is plain lines or CSV, deterministic byte for
byte for a fixed invocation.

Exit codes: 0 on success, 1 on a domain error (the error class name goes to
stderr), 2 on a usage error.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction

from . import adelic as adelic_mod
from . import flow as flow_mod
from .engine import (
    Canonical,
    SeededRandom,
    capacity_bound,
    factorials_greedy_oracle,
    factorials_minmax,
    factorials_removed,
    factorials_weighting,
)
from .errors import ParseError, TreeFactorialError
from .realize import BiasedSequence, OrderChoice, verify_roundtrip, realize_lengths
from .sources import expand, parse_generator_spec
from .trees import INF, format_length, parse_length, parse_tree_file, serialize_tree


def _add_source_args(p: argparse.ArgumentParser, need_depth: bool = False) -> None:
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--tree", metavar="FILE", help="explicit tree file")
    g.add_argument("--gen", metavar="SPEC", help="generator spec, e.g. 'regular d=2 length=1'")
    p.add_argument(
        "--depth",
        type=int,
        metavar="H",
        required=False,
        help="truncation depth" + (" (required with --gen)" if need_depth else ""),
    )


def _load_source(args):
    if args.tree is not None:
        with open(args.tree) as fh:
            return parse_tree_file(fh.read())
    return parse_generator_spec(args.gen)


def _policy(args):
    return SeededRandom(args.seed) if getattr(args, "seed", None) is not None else Canonical()


def _fmt(x: Fraction, as_float: bool) -> str:
    return repr(float(x)) if as_float else format_length(x)


def _print_sequence(values, args) -> None:
    if args.csv:
        print("n,a_n_num,a_n_den,a_n_float")
        for n, v in enumerate(values):
            print(f"{n},{v.numerator},{v.denominator},{float(v)!r}")
    else:
        for n, v in enumerate(values):
            print(f"a_{n} = {format_length(v)}")


def _cmd_factorials(args) -> int:
    source = _load_source(args)
    if args.t > 0:
        run = factorials_removed(source, args.t, args.n, _policy(args), record_trace=args.trace)
    else:
        run = factorials_weighting(source, args.n, _policy(args), record_trace=args.trace)
    if args.trace:
        for step in run.trace:
            print(
                f"# step {step.n}: case {step.case} at vertex {step.vertex}, "
                f"value {format_length(step.value)}"
            )
    _print_sequence(run.sequence.values, args)
    return 0


def _cmd_oracle_check(args) -> int:
    source = _load_source(args)
    if args.gen is not None and args.depth is None:
        raise ParseError("--depth is required with --gen")
    tree = source if args.gen is None else expand(source, args.depth)
    n = args.n
    bound = capacity_bound(tree)
    if bound != INF:
        n = min(n, int(bound) - 1)
    a = factorials_weighting(tree, n).sequence.values
    b = factorials_greedy_oracle(tree, n).values
    c = factorials_minmax(tree, n).values
    if a == b == c:
        print("OK: weighting == greedy == minmax")
        return 0
    for i in range(n + 1):
        if not (a[i] == b[i] == c[i]):
            print(
                f"Mismatch at n={i}: weighting={format_length(a[i])} "
                f"greedy={format_length(b[i])} minmax={format_length(c[i])}",
                file=sys.stderr,
            )
            return 1
    return 1


def _cmd_adelic(args) -> int:
    elements = [int(tok) for tok in args.set.split(",") if tok.strip() != ""]
    if args.p is not None:
        vals = adelic_mod.factorials_prime(elements, args.p, args.n)
        facts = [args.p ** int(v) for v in vals.values]
    else:
        facts = adelic_mod.bhargava_factorials(elements, args.n)
    if args.csv:
        print("n,factorial")
        for n, v in enumerate(facts):
            print(f"{n},{v}")
    else:
        for n, v in enumerate(facts):
            print(f"factorial({n}) = {v}")
    return 0


def _cmd_flow(args) -> int:
    source = _load_source(args)
    depth = args.depth
    if depth is None:
        if args.tree is None:
            raise ParseError("--depth is required with --gen")
        depth = max(source.depths) if len(source.parents) > 1 else 1
    fl = flow_mod.unit_current_flow(source, depth)
    if args.csv:
        print("edge_parent,edge_child,flow_num,flow_den")
        for v in sorted(fl.flows):
            f = fl.flows[v]
            print(f"{fl.tree.parents[v]},{v},{f.numerator},{f.denominator}")
        return 0
    res = flow_mod.effective_resistance(source, depth)
    esc = flow_mod.exact_escape_probability(source, depth)
    print(f"resistance = {_fmt(res.value, args.float)}")
    print(f"energy = {_fmt(fl.energy, args.float)}")
    print(f"escape = {_fmt(esc, args.float)}")
    if args.trials:
        walk = flow_mod.random_walk_escape(source, depth, args.trials, args.seed or 0)
        print(
            f"escape_mc = {walk.fraction!r} (trials={walk.trials}, "
            f"timeouts={walk.timeouts})"
        )
    return 0


def _cmd_branching(args) -> int:
    source = _load_source(args)
    schedule = None
    if args.depth is not None:
        schedule = tuple(sorted({max(1, args.depth >> k) for k in (8, 6, 4, 2, 1, 0)}))
    report = flow_mod.branching_number_estimate(
        source,
        parse_length(args.lambda_lo),
        parse_length(args.lambda_hi),
        depth_schedule=schedule,
        tol=parse_length(args.tol),
    )
    for lam, verdict, last in report.evaluations:
        print(f"# lam={format_length(lam)}: {verdict} (R={last!r})")
    print(f"low = {_fmt(report.low, args.float)}")
    print(f"high = {_fmt(report.high, args.float)}")
    print(f"status = {report.status}")
    return 0


def _parse_sequence_file(text: str, d: int) -> BiasedSequence:
    rows: dict[int, dict[int, Fraction]] = {}
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 3:
            raise ParseError("expected 'generation,position,value'", line=ln)
        try:
            n, i = int(parts[0]), int(parts[1])
            value = parse_length(parts[2])
        except (ValueError, ParseError):
            raise ParseError(f"bad sequence row {line!r}", line=ln)
        rows.setdefault(n, {})[i] = value
    if not rows:
        raise ParseError("empty sequence file")
    depth = max(rows)
    groups = []
    for n in range(depth + 1):
        size = d if n == 0 else d**n
        got = rows.get(n, {})
        if sorted(got) != list(range(1, size + 1)):
            raise ParseError(f"generation {n} needs positions 1..{size}")
        groups.append(tuple(got[i] for i in range(1, size + 1)))
    return BiasedSequence(d, tuple(groups))


def _parse_orders_file(text: str) -> OrderChoice:
    perms: dict[int, tuple[int, ...]] = {}
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            raise ParseError("expected 'generation: slot,slot,...'", line=ln)
        head, tail = line.split(":", 1)
        try:
            n = int(head)
            perm = tuple(int(tok) for tok in tail.split(","))
        except ValueError:
            raise ParseError(f"bad order row {line!r}", line=ln)
        perms[n] = perm
    return OrderChoice(perms)


def _cmd_realize(args) -> int:
    with open(args.seq) as fh:
        seq = _parse_sequence_file(fh.read(), args.d)
    orders = None
    if args.orders is not None:
        with open(args.orders) as fh:
            orders = _parse_orders_file(fh.read())
    if args.verify:
        report = verify_roundtrip(seq, orders)
        tree = report.tree
    else:
        tree = realize_lengths(seq, orders)
    sys.stdout.write(serialize_tree(tree))
    if args.verify:
        print("# roundtrip: first visits match")
        if report.full_prefix_match:
            print("# roundtrip: full prefix match")
    return 0


def _cmd_equidist(args) -> int:
    source = _load_source(args)
    if args.depth is None:
        raise ParseError("--depth is required")
    depth = args.depth
    run = factorials_weighting(source, args.n, _policy(args))
    fl = flow_mod.unit_current_flow(source, depth)
    report = flow_mod.equidistribution_check(run, fl, depth)
    if args.csv:
        print("address,depth,omega_tilde,eta,deviation")
        omega = run.normalized_weights_by_address()
        for address, w, f in report.rows:
            dotted = ".".join(str(i) for i in address)
            print(
                f"{dotted},{len(address)},{format_length(w)},{format_length(f)},"
                f"{format_length(abs(w - f))}"
            )
        return 0
    print(
        f"max_deviation = {format_length(report.max_deviation)} "
        f"({float(report.max_deviation)!r})"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="treefactorials",
        description="Factorial sequences, flows, and realizations on rooted metric trees.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("factorials", help="run the weighting process")
    _add_source_args(p)
    p.add_argument("--n", type=int, required=True, help="last index to emit")
    p.add_argument("--t", type=int, default=0, help="pairings to discount (default 0)")
    p.add_argument("--seed", type=int, help="random tie-breaking with this seed")
    p.add_argument("--csv", action="store_true", help="CSV output")
    p.add_argument("--trace", action="store_true", help="emit per-step trace lines")
    p.set_defaults(func=_cmd_factorials)

    p = sub.add_parser("oracle-check", help="compare weighting, greedy, and min-max values")
    _add_source_args(p, need_depth=True)
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(func=_cmd_oracle_check)

    p = sub.add_parser("adelic", help="generalized factorials of an integer set")
    p.add_argument("--set", required=True, metavar="A,B,...", help="comma-separated integers")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=int, help="report only the p-part at this prime")
    p.add_argument("--csv", action="store_true")
    p.set_defaults(func=_cmd_adelic)

    p = sub.add_parser("flow", help="resistance, unit flow, and escape probability")
    _add_source_args(p)
    p.add_argument("--csv", action="store_true", help="per-edge flow CSV")
    p.add_argument("--trials", type=int, help="Monte Carlo escape trials")
    p.add_argument("--seed", type=int, help="Monte Carlo seed")
    p.add_argument("--float", action="store_true", help="print floats instead of fractions")
    p.set_defaults(func=_cmd_flow)

    p = sub.add_parser("branching", help="bracket the branching number")
    _add_source_args(p)
    p.add_argument("--lambda-lo", required=True, metavar="L")
    p.add_argument("--lambda-hi", required=True, metavar="L")
    p.add_argument("--tol", default="1/20", help="bracket width target (default 1/20)")
    p.add_argument("--float", action="store_true")
    p.set_defaults(func=_cmd_branching)

    p = sub.add_parser("realize", help="build a tree realizing a biased sequence")
    p.add_argument("--d", type=int, required=True, help="children per vertex")
    p.add_argument("--seq", required=True, metavar="FILE", help="rows 'generation,position,value'")
    p.add_argument("--orders", metavar="FILE", help="rows 'generation: slot,slot,...'")
    p.add_argument("--verify", action="store_true", help="re-run the weighting and compare")
    p.set_defaults(func=_cmd_realize)

    p = sub.add_parser("equidist", help="edge frequencies of a run vs the harmonic flow")
    _add_source_args(p, need_depth=True)
    p.add_argument("--n", type=int, required=True, help="weighting steps")
    p.add_argument("--seed", type=int)
    p.add_argument("--csv", action="store_true")
    p.set_defaults(func=_cmd_equidist)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except TreeFactorialError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"cannot read input: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
