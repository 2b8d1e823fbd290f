"""Command-line front end.

Subcommands: region, sweep, saturated, psi, gap, iid, trace.  Options may
also come from a flat key=value config file (--config); explicit flags win.
Exit codes: 0 success, 1 bad configuration, 2 failed --check validation.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import channels as ch
from . import experiments as exp
from . import mdp
from . import policies as pol
from . import sim
from .region import closed_form_region, region_from_vertices


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # config errors exit 1, not argparse's 2
        self.exit(1, f"{self.prog}: error: {message}\n")


def _write(out: str | None, text: str) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _policy_from_args(args) -> pol.PolicyConfig:
    kind = args.policy
    if kind == "fbdc":
        return pol.PolicyConfig("fbdc", T=args.T)
    if kind == "myopic":
        return pol.PolicyConfig("myopic", T=args.T, k=args.k, frame_based=not args.per_slot)
    if kind in ("gated", "exhaustive"):
        return pol.PolicyConfig(kind)
    if kind.startswith("b") and kind in pol.CORNER_TABLES:
        return pol.PolicyConfig("fixed_corner", corner=kind)
    raise ValueError(f"unknown policy {kind!r}")


def _cmd_region(args) -> int:
    text = exp.export_regions(args.epsilon, args.p1, args.p2)
    _write(args.out, text)
    if args.check:
        if args.epsilon is None:
            raise ValueError("--check needs --epsilon")
        hull = region_from_vertices([v.rates for v in mdp.enumerate_vertices(args.epsilon)])
        closed = closed_form_region(args.epsilon)
        ok = all(h.slack(c) > -1e-9 for c in hull.corners for h in closed.halfspaces) and all(
            any(abs(h.slack(c)) < 1e-9 for c in hull.corners) for h in closed.halfspaces
        )
        if not ok:
            print("region check FAILED: enumeration hull does not match the closed form", file=sys.stderr)
            return 2
        print(f"region check ok: hull of 256 policies matches the closed form at epsilon={args.epsilon}")
    return 0


def _cmd_sweep(args) -> int:
    spec = exp.GridSpec(
        policies=(_policy_from_args(args),),
        epsilon=args.epsilon,
        p1=args.p1,
        p2=args.p2,
        step=args.step,
        boundary_margin=args.boundary_margin,
        horizon=args.horizon,
        warmup=args.warmup,
        seed=args.seed,
    )
    rows = exp.sweep(spec)
    _write(args.out, exp.rows_to_csv(exp.SWEEP_HEADER, rows))
    if args.check:
        agreement = exp.sweep_membership_agreement(spec, rows)
        print(f"membership agreement on clear points: {agreement:.3f}")
        if agreement < 0.95:
            return 2
    return 0


def _cmd_saturated(args) -> int:
    if args.corner:
        table = pol.CORNER_TABLES[args.corner]
        label = f"corner_{args.corner}"
    elif args.policy_id is not None:
        table = mdp.policy_from_id(args.policy_id)
        label = f"policy_{args.policy_id}"
    else:
        raise ValueError("give --corner or --policy-id")
    emp = sim.saturated_rate(table, args.epsilon, args.horizon, args.seed, warmup=2000)
    kernel = mdp.build_kernel(args.epsilon)
    pi = mdp.stationary_distribution(kernel, table)
    exact = mdp.policy_rates(pi, table)
    rows = [(label, args.epsilon, emp[0], emp[1], exact[0], exact[1])]
    _write(args.out, exp.rows_to_csv(("policy", "epsilon", "rate1", "rate2", "exact1", "exact2"), rows))
    if args.check:
        se = mdp.rate_asymptotic_std(kernel, table, args.horizon)
        tol = [max(3 * s, 2e-3) for s in se]
        if abs(emp[0] - exact[0]) > tol[0] or abs(emp[1] - exact[1]) > tol[1]:
            print("saturated check FAILED: empirical rates off the analytic values", file=sys.stderr)
            return 2
        print("saturated check ok")
    return 0


def _cmd_psi(args) -> int:
    report = exp.verify_psi(args.eps_step, args.ratio_points)
    header = ("case", "region", "bound", "minimum", "argmin_epsilon", "argmin_ratio")
    _write(args.out, exp.rows_to_csv(header, report.rows()))
    if args.check:
        bad = [r for r in report.regions if r.minimum < r.bound - 1e-6]
        if bad or report.global_minimum < report.global_bound - 1e-6:
            print("psi check FAILED", file=sys.stderr)
            return 2
        print(f"psi check ok: global minimum {report.global_minimum:.6f} >= {report.global_bound}")
    return 0


def _cmd_gap(args) -> int:
    t_list = tuple(int(x) for x in args.T_list.split(","))
    rows = exp.throughput_gap(args.epsilon, t_list, args.corner, slots_per_t=args.horizon, seed=args.seed)
    _write(args.out, exp.rows_to_csv(("T", "rate_deficit"), rows))
    return 0


def _cmd_iid(args) -> int:
    rho_points = tuple(float(x) for x in args.rho.split(","))
    rows = exp.iid_suite(args.p1, args.p2, rho_points, horizon=args.horizon, seed=args.seed)
    _write(args.out, exp.rows_to_csv(exp.IID_HEADER, rows))
    if args.check:
        for row in rows:
            rho, verdict = row[2], row[6]
            if rho < 1.0 and verdict != "stable":
                print(f"iid check FAILED: rho={rho} came back {verdict}", file=sys.stderr)
                return 2
            if rho > 1.0 and verdict != "unstable":
                print(f"iid check FAILED: rho={rho} came back {verdict}", file=sys.stderr)
                return 2
        print("iid check ok")
    return 0


def _cmd_trace(args) -> int:
    config = sim.SimConfig(
        lambda1=args.lambda1,
        lambda2=args.lambda2,
        channel=ch.gilbert_elliott(args.epsilon) if args.epsilon is not None else ch.iid(args.p1, args.p2),
        policy=_policy_from_args(args),
        horizon=args.horizon,
        warmup=args.warmup,
        seed=args.seed,
        trace_every=max(args.trace_every, 1),
    )
    metrics = sim.run(config)
    header = ("slot", "m", "c1", "c2", "q1", "q2", "action", "departed1", "departed2")
    _write(args.out, exp.rows_to_csv(header, metrics.trace))
    return 0


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key=value file with defaults for this command")
    p.add_argument("--out", help="output CSV path (stdout if omitted)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--check", action="store_true", help="validate results; failures exit 2")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="switchq", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("region", help="export rate-region corners and halfspaces")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--p1", type=float, default=0.5)
    p.add_argument("--p2", type=float, default=0.5)
    p.set_defaults(handler=_cmd_region)
    _add_common(p)

    p = sub.add_parser("sweep", help="arrival-grid queue-occupancy sweep")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--p1", type=float)
    p.add_argument("--p2", type=float)
    p.add_argument("--policy", default="fbdc")
    p.add_argument("--T", type=int, default=25)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--per-slot", action="store_true", help="myopic uses current queues, not frame queues")
    p.add_argument("--step", type=float, default=0.01)
    p.add_argument("--boundary-margin", type=float, default=0.02)
    p.add_argument("--horizon", type=int, default=100_000)
    p.add_argument("--warmup", type=int, default=0)
    p.set_defaults(handler=_cmd_sweep)
    _add_common(p)

    p = sub.add_parser("saturated", help="saturated-system empirical vs analytic rates")
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--corner", choices=sorted(pol.CORNER_TABLES))
    p.add_argument("--policy-id", type=int)
    p.add_argument("--horizon", type=int, default=1_000_000)
    p.set_defaults(handler=_cmd_saturated)
    _add_common(p)

    p = sub.add_parser("psi", help="minimize the myopic/optimal weighted-rate ratio")
    p.add_argument("--eps-step", type=float, default=1e-3)
    p.add_argument("--ratio-points", type=int, default=400)
    p.set_defaults(handler=_cmd_psi)
    _add_common(p)

    p = sub.add_parser("gap", help="corner-rate deficit against frame length")
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--corner", default="b2", choices=sorted(pol.CORNER_TABLES))
    p.add_argument("--T-list", default="10,100,1000")
    p.add_argument("--horizon", type=int, default=200_000, help="slot budget per frame length")
    p.set_defaults(handler=_cmd_gap)
    _add_common(p)

    p = sub.add_parser("iid", help="gated/exhaustive stability across loads")
    p.add_argument("--p1", type=float, default=0.5)
    p.add_argument("--p2", type=float, default=0.5)
    p.add_argument("--rho", default="0.6,0.8,0.9,1.1,1.2")
    p.add_argument("--horizon", type=int, default=100_000)
    p.set_defaults(handler=_cmd_iid)
    _add_common(p)

    p = sub.add_parser("trace", help="per-slot CSV trace of one run")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--p1", type=float, default=0.5)
    p.add_argument("--p2", type=float, default=0.5)
    p.add_argument("--lambda1", type=float, required=True)
    p.add_argument("--lambda2", type=float, required=True)
    p.add_argument("--policy", default="exhaustive")
    p.add_argument("--T", type=int, default=25)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--per-slot", action="store_true")
    p.add_argument("--horizon", type=int, default=1000)
    p.add_argument("--warmup", type=int, default=0)
    p.add_argument("--trace-every", type=int, default=1)
    p.set_defaults(handler=_cmd_trace)
    _add_common(p)

    return parser


def _apply_config_file(parser: argparse.ArgumentParser, argv: list[str]) -> list[str]:
    """Splice config-file values in front of the flags so flags override them."""
    if "--config" not in argv:
        return argv
    idx = argv.index("--config")
    if idx + 1 >= len(argv):
        raise ValueError("--config needs a file path")
    path = argv[idx + 1]
    values = exp.parse_config(Path(path).read_text(encoding="utf-8"))
    injected: list[str] = []
    for key, value in values.items():
        flag = "--" + key.replace("_", "-")
        if isinstance(value, bool):
            if value:
                injected.append(flag)
        else:
            injected.extend([flag, str(value)])
    return argv[:1] + injected + argv[1:]


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _apply_config_file(parser, argv)
        args = parser.parse_args(argv)
        return args.handler(args)
    except (ValueError, OSError) as err:
        print(f"switchq: error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
