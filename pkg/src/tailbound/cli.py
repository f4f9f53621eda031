"""Command-line interface: every operation behind one `tailbound` entry point.

Exit codes: 0 on success, 2 on input validation failure (the message names
the violated precondition), 1 on internal numeric failure such as
bracketing exhaustion or quadrature non-convergence. All floats are printed
with their shortest round-trip representation.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .cgf import TabulatedFunction, cgf_discrete, rate_bound_T
from .chaining import build_deflation, class_wr, optimize_deflation, theorem_main_bound, trivial_plan
from .gaussian import LinearFunctional, gaussian_instance_bound
from .jsonio import (
    dump_csv,
    dump_json,
    load_distribution,
    load_family,
    load_generator,
    load_json,
    load_model,
    parse_inline_or_path,
)
from .numerics import NumericError
from .orlicz import conversion_factor_M, orlicz_norm, wr_exponential_type, wr_quadrature_bound
from .verify import TrialPlan, run_trials, sweep


def _function_values(functions: dict, name: str) -> np.ndarray:
    if name not in functions:
        raise ValueError(f"function {name!r} not found in fixture")
    return functions[name]


def _norm_context(args):
    if getattr(args, "norm", None) in (None, "cgf"):
        return "cgf"
    return load_generator(parse_inline_or_path(args.norm))


def _ints(text: str):
    return [int(tok) for tok in text.split(",") if tok.strip() != ""]


def _floats(text: str):
    return [float(tok) for tok in text.split(",") if tok.strip() != ""]


def _cmd_trf(args):
    dist, functions = load_distribution(load_json(args.dist))
    values = _function_values(functions, args.f)
    value = rate_bound_T(cgf_discrete(dist, TabulatedFunction(values)), args.r)
    row = {"op": "trf", "function": args.f, "r": args.r, "value": value}
    return row, [row]


def _cmd_class_wr(args):
    family = load_family(load_json(args.family), _norm_context(args))
    value = class_wr(family, args.r)
    row = {"op": "class-wr", "r": args.r, "value": value}
    return row, [row]


def _cmd_orlicz_norm(args):
    dist, functions = load_distribution(load_json(args.dist))
    values = _function_values(functions, args.f)
    gen = load_generator(parse_inline_or_path(args.gen))
    value = orlicz_norm(dist, TabulatedFunction(values), gen).value
    row = {"op": "orlicz-norm", "function": args.f, "kind": gen.kind, "value": value}
    return row, [row]


def _cmd_wr_quad(args):
    gen = load_generator(parse_inline_or_path(args.gen))
    value = wr_quadrature_bound(gen, args.r)
    row = {"op": "wr-quad", "kind": gen.kind, "r": args.r, "value": value}
    return row, [row]


def _cmd_wr_exp(args):
    gen = load_generator(parse_inline_or_path(args.gen))
    M = args.M if args.M is not None else conversion_factor_M(gen)
    value = wr_exponential_type(gen, M, args.r)
    row = {"op": "wr-exp", "kind": gen.kind, "r": args.r, "M": M, "value": value}
    return row, [row]


def _cmd_gaussian_bound(args):
    model = load_model(load_json(args.model))
    if (args.u is None) == (args.basis is None):
        raise ValueError("exactly one of --u and --basis is required")
    if args.u is not None:
        u = np.asarray(parse_inline_or_path(args.u), dtype=float)
    else:
        if not (0 <= args.basis < model.dim):
            raise ValueError("--basis index out of range")
        u = np.zeros(model.dim)
        u[args.basis] = 1.0
    report = gaussian_instance_bound(
        model, LinearFunctional(u), args.k, args.n, args.r, loose_projected=args.loose_projected
    )
    row = {"op": "gaussian-bound", **report.as_dict()}
    return row, [row]


def _chain_payload(report):
    payload = {
        "op": "chain-bound",
        "n": report.n,
        "r": report.r,
        "k": report.k,
        "deflated_size": report.deflated_size,
        "gamma_value": report.gamma_value,
        "epsilon_values": report.epsilon_values,
        "epsilon_sum": report.epsilon_sum,
        "w_r": report.w_r,
        "w_shift": report.w_shift,
        "total_rhs": report.total_rhs,
        "guarantee": report.guarantee,
        "per_member": report.per_member,
        "certificate": report.certificate,
    }
    row = {
        "n": report.n,
        "r": report.r,
        "k": report.k,
        "deflated_size": report.deflated_size,
        "gamma_value": report.gamma_value,
        "epsilon_sum": report.epsilon_sum,
        "w_r": report.w_r,
        "w_shift": report.w_shift,
        "total_rhs": report.total_rhs,
        "guarantee": report.guarantee,
    }
    for name, thr in report.per_member.items():
        row[f"threshold_{name}"] = thr
    return payload, [row]


def _cmd_chain_bound(args):
    family = load_family(load_json(args.family), _norm_context(args))
    plan = trivial_plan(family) if args.k == 0 else build_deflation(family, args.k)
    report = theorem_main_bound(family, plan, args.n, args.r)
    return _chain_payload(report)


def _cmd_optimize(args):
    family = load_family(load_json(args.family), _norm_context(args))
    result = optimize_deflation(family, args.n, args.r, _ints(args.k_candidates))
    report_payload, _rows = _chain_payload(result.report)
    payload = {
        "op": "optimize",
        "best_k": result.plan.k,
        "objective": result.objective,
        "evaluations": [{"k": k, "objective": obj} for k, obj in result.evaluations],
        "report": report_payload,
    }
    rows = [
        {"k": k, "objective": obj, "selected": k == result.plan.k}
        for k, obj in result.evaluations
    ]
    return payload, rows


def _plan_from_args(args) -> TrialPlan:
    kwargs = dict(
        target=args.target,
        n=args.n,
        r=args.r,
        trials=args.trials,
        root_seed=args.seed,
        k=args.k,
        mesh=args.mesh,
    )
    if args.target == "chernoff":
        if args.dist is None or args.f is None:
            raise ValueError("chernoff target requires --dist and --f")
        dist, functions = load_distribution(load_json(args.dist))
        kwargs["distribution"] = dist
        kwargs["function_values"] = _function_values(functions, args.f)
    elif args.target in ("corollary", "theorem-main"):
        if args.family is None:
            raise ValueError(f"{args.target} target requires --family")
        kwargs["family"] = load_family(load_json(args.family), _norm_context(args))
    elif args.target == "gaussian":
        if args.model is None:
            raise ValueError("gaussian target requires --model")
        kwargs["model"] = load_model(load_json(args.model))
    return TrialPlan(**kwargs)


def _report_rows(reports):
    return [rep.as_dict() for rep in reports]


def _cmd_verify(args):
    report = run_trials(_plan_from_args(args))
    return report.as_dict(), _report_rows([report])


def _cmd_sweep(args):
    plan = _plan_from_args(args)
    reports = sweep(
        plan,
        n_values=_ints(args.n_grid) if args.n_grid is not None else None,
        r_values=_floats(args.r_grid) if args.r_grid is not None else None,
        k_values=_ints(args.k_grid) if args.k_grid is not None else None,
    )
    return _report_rows(reports), _report_rows(reports)


def _add_output_flags(sub):
    sub.add_argument("--format", choices=("json", "csv"), default="json")
    sub.add_argument("--output", default=None, help="write result to this path instead of stdout")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tailbound",
        description="Instance-dependent uniform tail bounds: rate functions, "
        "Orlicz coefficients, Gaussian rank-k bounds, deflated chaining, and "
        "Monte Carlo verification.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("trf", help="rate function T_r of a tabulated function")
    p.add_argument("--dist", required=True)
    p.add_argument("--f", required=True)
    p.add_argument("--r", type=float, required=True)
    _add_output_flags(p)
    p.set_defaults(handler=_cmd_trf)

    p = subs.add_parser("class-wr", help="class coefficient w_r of a family")
    p.add_argument("--family", required=True)
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--norm", default=None, help="generator JSON for an Orlicz norm context")
    _add_output_flags(p)
    p.set_defaults(handler=_cmd_class_wr)

    p = subs.add_parser("orlicz-norm", help="Orlicz norm of a tabulated function")
    p.add_argument("--dist", required=True)
    p.add_argument("--f", required=True)
    p.add_argument("--gen", required=True)
    _add_output_flags(p)
    p.set_defaults(handler=_cmd_orlicz_norm)

    p = subs.add_parser("wr-quad", help="quadrature coefficient bound for a generator")
    p.add_argument("--gen", required=True)
    p.add_argument("--r", type=float, required=True)
    _add_output_flags(p)
    p.set_defaults(handler=_cmd_wr_quad)

    p = subs.add_parser("wr-exp", help="closed-form coefficient bound for exponential-type generators")
    p.add_argument("--gen", required=True)
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--M", type=float, default=None, help="conversion factor; computed when omitted")
    _add_output_flags(p)
    p.set_defaults(handler=_cmd_wr_exp)

    p = subs.add_parser("gaussian-bound", help="rank-k instance bound for a linear functional")
    p.add_argument("--model", required=True)
    p.add_argument("--u", default=None, help="coefficient vector (inline JSON or path)")
    p.add_argument("--basis", type=int, default=None, help="standard basis index (0-based)")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--loose-projected", action="store_true")
    _add_output_flags(p)
    p.set_defaults(handler=_cmd_gaussian_bound)

    p = subs.add_parser("chain-bound", help="deflated chaining bound for a family")
    p.add_argument("--family", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--norm", default=None)
    _add_output_flags(p)
    p.set_defaults(handler=_cmd_chain_bound)

    p = subs.add_parser("optimize", help="pick the best deflation size from candidates")
    p.add_argument("--family", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--k-candidates", required=True, help="comma-separated candidate k values")
    p.add_argument("--norm", default=None)
    _add_output_flags(p)
    p.set_defaults(handler=_cmd_optimize)

    for name, handler in (("verify", _cmd_verify), ("sweep", _cmd_sweep)):
        p = subs.add_parser(name, help=f"Monte Carlo {name} of a probabilistic guarantee")
        p.add_argument("--target", required=True, choices=("chernoff", "corollary", "gaussian", "theorem-main"))
        p.add_argument("--dist", default=None)
        p.add_argument("--f", default=None)
        p.add_argument("--family", default=None)
        p.add_argument("--model", default=None)
        p.add_argument("--norm", default=None)
        p.add_argument("--n", type=int, required=True)
        p.add_argument("--r", type=float, required=True)
        p.add_argument("--k", type=int, default=0)
        p.add_argument("--mesh", type=int, default=1000)
        p.add_argument("--trials", type=int, required=True)
        p.add_argument("--seed", type=int, required=True)
        if name == "sweep":
            p.add_argument("--n-grid", default=None)
            p.add_argument("--r-grid", default=None)
            p.add_argument("--k-grid", default=None)
        _add_output_flags(p)
        p.set_defaults(handler=handler)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        payload, rows = args.handler(args)
        text = dump_json(payload) if args.format == "json" else dump_csv(rows)
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return 2
    if args.output is not None:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
