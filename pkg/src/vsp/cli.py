"""Command-line front end: build, verify, gen, inspect.

Exit codes: 0 success/verified, 1 verification failure, 2 input error,
3 budget refusal.  Every flag can be overridden by an environment variable
with the VSP_ prefix (VSP_MODE, VSP_EPS, ...).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from . import gen as genmod
from .cutsparse import build_cut_sparsifier, build_cut_sparsifier_unit
from .errors import BudgetExceeded, InputError, VspError
from .flowsparse import FlowParams, build_flow_sparsifier, build_flow_sparsifier_unit
from .graph import read_graph, write_graph
from .routing import read_demands
from .serialize import load_sparsifier, save_sparsifier
from .sparsecut import DEFAULT_ENUM_BUDGET
from .verify import (
    DEFAULT_CUT_ENUM_BUDGET,
    recheck_router_certificates,
    verify_cut_quality,
    verify_flow_quality,
)

EXIT_OK = 0
EXIT_VERIFY_FAIL = 1
EXIT_INPUT = 2
EXIT_BUDGET = 3


def _env_default(name: str, default):
    return os.environ.get(f"VSP_{name.upper().replace('-', '_')}", default)


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--seed", type=int, default=int(_env_default("seed", 0)))
    p.add_argument("--out", default=_env_default("out", None))
    p.add_argument(
        "--budget-exp", type=int, default=int(_env_default("budget_exp", DEFAULT_ENUM_BUDGET)),
        help="boundary-bundle budget for exact exponential procedures",
    )
    p.add_argument(
        "--budget-enum", type=int,
        default=int(_env_default("budget_enum", DEFAULT_CUT_ENUM_BUDGET)),
        help="terminal-count budget for exhaustive cut verification",
    )
    p.add_argument("--delta", type=float, default=float(_env_default("delta", 1e-6)))
    p.add_argument(
        "--workers", type=int,
        default=int(_env_default("workers", os.cpu_count() or 1)),
        help="worker cap for verification fan-out (currently single-process)",
    )


def _params(args) -> FlowParams:
    return FlowParams(
        profile=args.profile,
        c_beta=Fraction(str(args.c_beta)),
        c_f=args.c_f,
        r_override=args.r,
        enum_budget=args.budget_exp,
        precheck_router=not getattr(args, "no_precheck", False),
    )


def _header(args, params: FlowParams | None = None) -> str:
    bits = [f"profile={getattr(args, 'profile', '-')}", f"seed={args.seed}",
            f"budget_exp={args.budget_exp}", f"budget_enum={args.budget_enum}",
            f"delta={args.delta}", f"workers={args.workers}"]
    if params is not None:
        bits.append(f"eta_star={params.eta_star}")
        bits.append(f"c_beta={params.c_beta}")
        if params.profile == "aggressive":
            bits.append(f"r={params.r(8)} c_f={params.c_f}")
        bits.append("beta_rule=max(1,c_beta*log2 k)")
    return "# vsp " + " ".join(bits)


def _fail(code: int, kind: str, message: str) -> int:
    print(json.dumps({"error": kind, "message": message}), file=sys.stderr)
    return code


def cmd_build(args) -> int:
    try:
        g = read_graph(args.input)
    except VspError as exc:
        return _fail(EXIT_INPUT, "parse", str(exc))
    params = _params(args)
    print(_header(args, params))
    out = args.out or (os.path.splitext(args.input)[0] + ".sp")
    try:
        if args.mode == "cut":
            if args.eps is None and g.is_unit:
                sp = build_cut_sparsifier_unit(g, budget=args.budget_exp)
            else:
                eps = Fraction(str(args.eps if args.eps is not None else "0.5"))
                sp = build_cut_sparsifier(g, eps, budget=args.budget_exp)
        else:
            if args.eps is None and g.is_unit and all(
                len(g.incident(t)) == 1 for t in g.terminals
            ):
                sp = build_flow_sparsifier_unit(g, params)
            else:
                eps = Fraction(str(args.eps if args.eps is not None else "0.5"))
                sp = build_flow_sparsifier(g, eps, params)
    except BudgetExceeded as exc:
        return _fail(EXIT_BUDGET, "budget", str(exc))
    except VspError as exc:
        return _fail(EXIT_INPUT, "input", str(exc))
    gpath, jpath = save_sparsifier(sp, out)
    summary = {
        "mode": args.mode,
        "n": sp.graph.n,
        "m": sp.graph.m,
        "k": sp.graph.k,
        "steiner": sp.graph.n - sp.graph.k,
        "clusters": len(sp.cmap.clusters),
        "claimed_q": str(sp.quality),
        "files": [gpath, jpath],
    }
    if hasattr(sp, "size_bound_met"):
        summary["size_bound_met"] = sp.size_bound_met
    print(json.dumps(summary, sort_keys=True))
    return EXIT_OK


def cmd_verify(args) -> int:
    try:
        g = read_graph(args.input)
        sp = load_sparsifier(g, args.sparsifier)
    except VspError as exc:
        return _fail(EXIT_INPUT, "input", str(exc))
    print(_header(args))
    delta = Fraction(str(args.delta))
    if args.mode == "cut":
        rep = verify_cut_quality(g, sp.graph, enum_budget=args.budget_enum, seed=args.seed)
        ok = rep.ok and rep.q_observed <= sp.quality
        if rep.q_observed > sp.quality:
            rep.violations.append(
                f"q_observed {float(rep.q_observed):.4f} above claimed {sp.quality}"
            )
    else:
        cert = recheck_router_certificates(sp)
        rep = verify_flow_quality(
            g, sp.graph, samples=args.samples, seed=args.seed, delta=delta,
            quality_bound=sp.quality, sparsifier=sp,
        )
        if not cert["ok"]:
            for name, okc, detail in cert["checks"]:
                if not okc:
                    rep.violations.append(f"certificate check {name}: {detail}")
        rep.flags["certificates"] = "ok" if cert["ok"] else "failed"
        ok = rep.ok
    text = rep.to_json()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    print(text)
    return EXIT_OK if ok else EXIT_VERIFY_FAIL


def cmd_gen(args) -> int:
    kw = {}
    for field in ("n", "m", "k", "rows", "cols", "side", "d", "cap_max",
                  "body_n", "chamber_n", "attach", "extra"):
        v = getattr(args, field, None)
        if v is not None:
            kw[field] = v
    try:
        g = genmod.generate(args.family, seed=args.seed, **kw)
    except VspError as exc:
        return _fail(EXIT_INPUT, "input", str(exc))
    out = args.out or f"{args.family}-{args.seed}.vsp"
    write_graph(g, out)
    print(json.dumps({"family": args.family, "n": g.n, "m": g.m, "k": g.k, "file": out}))
    return EXIT_OK


def cmd_inspect(args) -> int:
    try:
        g = read_graph(args.input, require_min_capacity=False)
    except VspError as exc:
        return _fail(EXIT_INPUT, "parse", str(exc))
    info = {
        "n": g.n,
        "m": g.m,
        "k": g.k,
        "unit": g.is_unit,
        "components": len(g.components()),
        "terminal_capacity": str(g.terminal_capacity()),
        "total_terminal_degree": str(g.total_terminal_degree()),
    }
    print(json.dumps(info, sort_keys=True))
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="vsp", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="build a sparsifier")
    b.add_argument("input")
    b.add_argument("--mode", choices=("cut", "flow"), default=_env_default("mode", "cut"))
    b.add_argument("--eps", default=_env_default("eps", None))
    b.add_argument("--profile", choices=("theoretical", "aggressive"),
                   default=_env_default("profile", "theoretical"))
    b.add_argument("--c-beta", default=_env_default("c_beta", "1"))
    b.add_argument("--c-f", type=int, default=int(_env_default("c_f", 4)))
    b.add_argument("--r", type=int, default=None)
    b.add_argument("--no-precheck", action="store_true",
                   help="skip the up-front router check (forces the loop)")
    _add_common(b)
    b.set_defaults(fn=cmd_build)

    v = sub.add_parser("verify", help="verify a sparsifier against its source graph")
    v.add_argument("input")
    v.add_argument("sparsifier", help="path prefix written by build")
    v.add_argument("--mode", choices=("cut", "flow"), default=_env_default("mode", "cut"))
    v.add_argument("--samples", type=int, default=int(_env_default("samples", 3)))
    _add_common(v)
    v.set_defaults(fn=cmd_verify)

    gn = sub.add_parser("gen", help="generate a seeded instance")
    gn.add_argument("family", choices=genmod.FAMILIES)
    for field, typ in (
        ("n", int), ("m", int), ("k", int), ("rows", int), ("cols", int),
        ("side", int), ("d", int), ("cap-max", int), ("body-n", int),
        ("chamber-n", int), ("attach", int), ("extra", int),
    ):
        gn.add_argument(f"--{field}", type=typ, default=None)
    _add_common(gn)
    gn.set_defaults(fn=cmd_gen)

    i = sub.add_parser("inspect", help="print instance statistics")
    i.add_argument("input")
    _add_common(i)
    i.set_defaults(fn=cmd_inspect)
    return ap


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
