"""Command-line entry point.

Exit codes: 0 ok, 1 usage/IO/validation error, 2 infeasible instance,
3 internal contract violation, 4 non-unit instance given to ``solve-unit``.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .chains import closed_collection, earliest_start_schedule
from .core import ContractViolation, InfeasibleError, OrSchedError, check_reachable, validate_schedule
from .gantt import render_svg
from .generate import GenSpec, generate_instance
from .io import dumps_instance, dumps_json, dumps_schedule, load_instance, load_schedule, rational
from .listsched import list_schedule, parse_order, ratio_certificate
from .oracle import brute_nonpmtn, brute_pmtn_grid
from .pmtn import NonUnitError, solve_pmtn, solve_unit_nonpreemptive
from .report import build_report, max_ratio, report_csv

EXIT_OK, EXIT_ERROR, EXIT_INFEASIBLE, EXIT_CONTRACT, EXIT_NON_UNIT = 0, 1, 2, 3, 4


class _Ctx:
    def __init__(self, args):
        self.out = getattr(args, "out", None)
        self.seed = getattr(args, "seed", 0)
        self.quiet = getattr(args, "quiet", False)

    def emit(self, text: str):
        if self.out:
            Path(self.out).write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)

    def note(self, text: str):
        if not self.quiet:
            print(text, file=sys.stderr)


def _checked(inst, sched, contiguous=False):
    """Refuse to write a schedule the validator rejects."""
    bad = validate_schedule(inst, sched, require_contiguous=contiguous)
    if bad:
        raise ContractViolation(f"solver produced an invalid schedule: {bad[0].detail}")
    return sched


def cmd_validate(args, ctx):
    inst = load_instance(args.instance)
    ok, missing = check_reachable(inst)
    report = {"reachable": ok, "unreachable": sorted(str(inst.names[j]) for j in missing)}
    status = EXIT_OK if ok else EXIT_INFEASIBLE
    if args.schedule:
        sched = load_schedule(inst, args.schedule)
        bad = validate_schedule(inst, sched, require_contiguous=args.contiguous)
        report["violations"] = [{"kind": v.kind, "job": None if v.job is None else str(inst.names[v.job]),
                                 "detail": v.detail} for v in bad]
        if bad and status == EXIT_OK:
            status = EXIT_ERROR
    report["valid"] = status == EXIT_OK
    ctx.emit(dumps_json(report))
    return status


def _ess_dict(inst, ess):
    return {str(inst.names[j]): {"S": ess.start[j], "C": ess.completion[j]} for j in range(inst.n)}


def cmd_ess(args, ctx):
    inst = load_instance(args.instance)
    ctx.emit(dumps_json({"ess": _ess_dict(inst, earliest_start_schedule(inst))}))
    return EXIT_OK


def cmd_chains(args, ctx):
    inst = load_instance(args.instance)
    ess = earliest_start_schedule(inst)
    coll = closed_collection(inst, ess)
    name = lambda j: str(inst.names[j])
    chains = {}
    for j in coll:
        chain = coll[j]
        chains[name(j)] = {"path": [name(i) for i in chain.jobs], "dominator": name(chain.dominator), "mc": chain.mc}
    ctx.emit(dumps_json({"ess": _ess_dict(inst, ess), "chains": chains}))
    return EXIT_OK


def cmd_solve_list(args, ctx):
    inst = load_instance(args.instance)
    sched = _checked(inst, list_schedule(inst, parse_order(inst, args.order)), contiguous=True)
    cert = ratio_certificate(inst, earliest_start_schedule(inst), sched)
    extra = {"certificate": {
        "last_job": str(inst.names[cert.last_job]),
        "volume": rational(cert.volume),
        "mc_last": cert.mc_last,
        "bound": rational(cert.bound),
        "idle_all": rational(cert.idle_all),
    }}
    ctx.emit(dumps_schedule(inst, sched, extra))
    ctx.note(f"makespan {cert.makespan}, certified bound {cert.bound}")
    return EXIT_OK


def cmd_solve_pmtn(args, ctx):
    inst = load_instance(args.instance)
    res = solve_pmtn(inst)
    _checked(inst, res.schedule)
    name = lambda j: str(inst.names[j])
    extra = {
        "T_star": rational(res.t_star),
        "collection": {name(j): [name(i) for i in res.collection.path(j)] for j in res.collection},
        "dropped_arcs": [[name(i), name(j)] for i, j in res.dropped_arcs],
    }
    ctx.emit(dumps_schedule(inst, res.schedule, extra))
    ctx.note(f"T* = {res.t_star}")
    return EXIT_OK


def cmd_solve_unit(args, ctx):
    inst = load_instance(args.instance)
    sched = _checked(inst, solve_unit_nonpreemptive(inst), contiguous=True)
    ctx.emit(dumps_schedule(inst, sched))
    return EXIT_OK


def cmd_oracle(args, ctx):
    inst = load_instance(args.instance)
    if args.mode == "nonpmtn":
        res = brute_nonpmtn(inst, max_n=args.max_n)
        out = {"opt": rational(res.opt), "nodes": res.nodes, "refinement_checked": False}
    else:
        res = brute_pmtn_grid(inst, k=args.grid_k, max_n=args.max_n, max_m=args.max_m, max_sum_p=args.max_sum_p)
        out = {"opt": rational(res.opt), "states": res.states, "refinement_checked": res.refinement_checked}
        if res.inconclusive:
            out["refined"] = rational(res.refined)
            out["inconclusive"] = True
            ctx.note(f"grid refinement disagrees: {res.opt} vs {res.refined}")
    ctx.emit(dumps_json(out))
    return EXIT_OK


def cmd_gen(args, ctx):
    spec = GenSpec(n=args.n, m=args.m, q=args.q, p_max=args.p_max, r_max=args.r_max,
                   seed=ctx.seed, dag_only=not args.allow_cycles)
    ctx.emit(dumps_instance(generate_instance(spec)))
    return EXIT_OK


def cmd_report(args, ctx):
    policies = [p.strip() for p in args.policies.split(",") if p.strip()]
    if not policies:
        raise ValueError("no order policies given")
    corpus = Path(args.corpus)
    if not corpus.is_dir():
        raise OSError(f"corpus directory {corpus} not found")
    rows = build_report(corpus, policies, max_n=args.max_n)
    ctx.emit(report_csv(rows))
    worst = max_ratio(rows)
    skipped = sum(row.status != "ok" for row in rows)
    ctx.note(f"rows {len(rows)}, skipped {skipped}, max ratio {'-' if worst is None else worst}")
    bad = [row for row in rows if row.violates]
    if bad:
        print(f"ratio bound exceeded on {len(bad)} rows, e.g. {bad[0].instance} / {bad[0].policy}", file=sys.stderr)
        return EXIT_CONTRACT
    return EXIT_OK


def cmd_gantt(args, ctx):
    inst = load_instance(args.instance)
    sched = load_schedule(inst, args.schedule)
    ctx.emit(render_svg(sched, inst))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=argparse.SUPPRESS, help="write output here instead of stdout")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="random seed (default 0)")
    common.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS, help="no summaries on stderr")

    parser = argparse.ArgumentParser(prog="orsched", parents=[common],
                                     description="Makespan scheduling with OR-precedence and release dates.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, helptext, instance=True):
        p = sub.add_parser(name, parents=[common], help=helptext)
        if instance:
            p.add_argument("instance", help="instance JSON file")
        p.set_defaults(func=func)
        return p

    p = add("validate", cmd_validate, "check an instance and optionally a schedule")
    p.add_argument("schedule", nargs="?", help="schedule JSON file")
    p.add_argument("--contiguous", action="store_true", help="also require one piece per job")
    add("ess", cmd_ess, "earliest start schedule")
    add("chains", cmd_chains, "earliest start schedule and a closed collection of minimal chains")
    p = add("solve-list", cmd_solve_list, "List Scheduling with its ratio certificate")
    p.add_argument("--order", default="lpt", help="lpt, input or random:<seed> (default lpt)")
    add("solve-pmtn", cmd_solve_pmtn, "optimal preemptive schedule")
    add("solve-unit", cmd_solve_unit, "optimal non-preemptive schedule for unit jobs")
    p = add("oracle", cmd_oracle, "exhaustive optimum for small instances")
    p.add_argument("--mode", choices=["nonpmtn", "pmtn"], default="nonpmtn")
    p.add_argument("--max-n", type=int, default=None)
    p.add_argument("--max-m", type=int, default=3)
    p.add_argument("--max-sum-p", type=int, default=12)
    p.add_argument("--grid-k", type=int, default=1)
    p = add("gen", cmd_gen, "random instance", instance=False)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--q", type=float, default=0.3, help="arc probability")
    p.add_argument("--p-max", type=int, default=5)
    p.add_argument("--r-max", type=int, default=0)
    p.add_argument("--allow-cycles", action="store_true", help="arbitrary digraph instead of a DAG")
    p = add("report", cmd_report, "List Scheduling ratio study over a corpus (CSV)", instance=False)
    p.add_argument("corpus", help="directory of instance JSON files")
    p.add_argument("--policies", default="lpt,input,random:0")
    p.add_argument("--max-n", type=int, default=8)
    p = add("gantt", cmd_gantt, "SVG Gantt chart of a schedule")
    p.add_argument("schedule", help="schedule JSON file")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_ERROR
    if args.command == "oracle" and args.max_n is None:
        args.max_n = 8 if args.mode == "nonpmtn" else 5
    ctx = _Ctx(args)
    try:
        return args.func(args, ctx)
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except ContractViolation as exc:
        print(f"internal contract violation: {exc}", file=sys.stderr)
        return EXIT_CONTRACT
    except NonUnitError as exc:
        print(f"not a unit instance: {exc}", file=sys.stderr)
        return EXIT_NON_UNIT
    except (OrSchedError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
