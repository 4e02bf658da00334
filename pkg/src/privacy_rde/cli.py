"""Command line entry point.

Exit codes: 0 success, 1 invalid input, 2 infeasible request,
3 iteration cap reached.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import closed_forms, dp, oracle, pipeline, rd, region
from .errors import PrivacyRDEError, ValidationError
from .prob import DistortionSpec, JointPmf, Pmf, Role


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(ValidationError.exit_code, f"{self.prog}: error: {message}\n")


def parse_grid(text: str) -> list[float]:
    """``a:b:step`` inclusive of b (within step/1e6), or a comma list."""
    try:
        if ":" in text:
            a, b, step = (float(v) for v in text.split(":"))
            if step <= 0 or b < a:
                raise ValueError
            n = int(np.floor((b - a) / step + 1e-6)) + 1
            return [round(a + i * step, 12) for i in range(n)]
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ValidationError(f"bad grid {text!r}; use a:b:step or v1,v2,...") from None


def _emit(obj, out, fmt):
    if out is None:
        print(json.dumps(pipeline.to_jsonable(obj), indent=2))
    elif fmt == "csv" or (fmt is None and str(out).endswith(".csv")):
        pipeline.export_csv(obj, out)
    else:
        pipeline.export_json(obj, out)


def _distortion(arg, n):
    if arg in (None, "hamming"):
        return DistortionSpec.hamming(n)
    return pipeline.load_distortion(arg)


def _problem(args) -> region.PrivacyProblem:
    j = pipeline.load_joint(args.pmf)
    if args.side_info:
        missing = [n for n in args.side_info if n not in j.names]
        if missing:
            raise ValidationError(f"--side-info names unknown axes {missing}")
        j = j.with_roles({n: Role.SIDE for n in args.side_info})
    n_pub = int(np.prod([j.axis(n).size for n in j.names_where(lambda r: r.is_public)]))
    return region.PrivacyProblem(j, _distortion(args.distortion, n_pub), args.u_card)


def _solver_cfg(args) -> region.SolverConfig:
    return region.SolverConfig(multistarts=args.multistarts, rng_seed=args.seed)


def cmd_curve(args):
    grid = parse_grid(args.d_grid)
    if args.kind == "rd":
        j = pipeline.load_joint(args.pmf)
        pub = j.names_where(lambda r: r.is_public)
        p = Pmf.from_probs(j.marginal(pub).ravel())
        d = _distortion(args.distortion, p.size)
        pts = [rd.rate_distortion(p, d, D) for D in grid]
        return _emit(pts, args.out, args.format)
    prob = _problem(args)
    cfg = _solver_cfg(args)
    if args.kind == "gamma":
        res = region.gamma_curve(prob, grid, cfg, markov=args.markov)
        pts = res.boundary
    else:
        E_grid = parse_grid(args.e_grid) if args.e_grid else list(
            np.linspace(*region.feasibility_window(prob), 5))
        res = region.region_curve(prob, grid, E_grid, cfg, markov=args.markov)
        pts = res.points
    for e in res.errors:
        print(f"warning: skipped {e}", file=sys.stderr)
    _emit(pts, args.out, args.format)


def cmd_waterfill(args):
    j = pipeline.load_joint(args.pmf)
    p = Pmf.from_probs(j.probs.ravel())
    _emit(closed_forms.hamming_waterfill(p, args.d), args.out, "json")


def cmd_gaussian(args):
    m = closed_forms.GaussianModel(args.sx2, args.sy2, args.rho)
    _emit(closed_forms.gaussian_region(m, parse_grid(args.d_grid)), args.out, args.format)


def cmd_sanitize(args):
    schema = pipeline.load_schema(args.schema)
    t = pipeline.ingest_csv(args.inp, schema)
    j = pipeline.empirical_joint(t)
    n_pub = int(np.prod([t.axis(n).size for n in t.names_where(lambda r: r.is_public)]))
    d = _distortion(args.distortion, n_pub)
    decoder = None
    if args.channel:
        c = pipeline.load_channel(args.channel)
    elif (len(t.schema) == 1 and t.schema[0].role is Role.BOTH and d.name == "hamming"):
        c = closed_forms.hamming_waterfill(Pmf(t.schema[0].alphabet, j.probs), args.d) \
            .forward_channel()
    else:
        prob = region.PrivacyProblem(j, d, args.u_card)
        pt = region.gamma_of_D(prob, args.d, region.SolverConfig(multistarts=args.multistarts,
                                                                 rng_seed=args.seed))
        c = pt.channel
        if prob.has_side_info:
            decoder = pt.decoder
    run = pipeline.run_sanitization(t, c, args.seed, d, decoder)
    pipeline.write_table_csv(run.output, args.out)
    print(json.dumps(run.metrics, indent=2))


def cmd_dp(args):
    if args.query == "sum":
        if not args.clip:
            raise ValidationError("sum queries need --clip lo,hi")
        try:
            lo, hi = (float(v) for v in args.clip.split(","))
        except ValueError:
            raise ValidationError(f"bad --clip {args.clip!r}; use lo,hi") from None
        q = dp.QuerySpec.clipped_sum(lo, hi)
    else:
        q = dp.QuerySpec.count()
    delta = dp.sensitivity(q) if args.sensitivity is None else args.sensitivity
    if args.epsilon_grid:
        grid = parse_grid(args.epsilon_grid)
        if any(e <= 0 for e in grid):
            raise ValidationError("epsilon grid must be positive")
        curve = [(e, delta / e) for e in grid]
        if args.out:
            pipeline.export_csv(curve, args.out)
        else:
            print(json.dumps([{"epsilon": e, "expected_abs_error": a} for e, a in curve], indent=2))
        return
    mech = dp.Mechanism(args.epsilon, delta)
    report = {"epsilon": mech.epsilon, "sensitivity": mech.delta_f, "b": mech.b,
              "noise_variance": 2 * mech.b ** 2, "expected_abs_error": mech.b}
    if mech.b > 0:
        report["ratio_check"] = dp.dp_ratio_check(mech.b, mech.epsilon, mech.delta_f,
                                                  seed=args.seed).to_dict()
    if args.values:
        vals = [float(v) for v in args.values.split(",")]
        noisy = np.asarray(vals) + dp.laplace_noise(mech.b, len(vals), args.seed)
        report["noisy_values"] = noisy.tolist()
    print(json.dumps(report, indent=2))


def cmd_oracle_check(args):
    problem = pipeline.read_json(args.problem)
    if not isinstance(problem, dict) or "joint" not in problem:
        raise ValidationError(f"{args.problem}: needs a 'joint' entry")
    j = JointPmf.from_dict(problem["joint"])
    n_pub = int(np.prod([j.axis(n).size for n in j.names_where(lambda r: r.is_public)]))
    dist = problem.get("distortion", "hamming")
    d = DistortionSpec.hamming(n_pub) if dist == "hamming" else DistortionSpec.from_dict(dist)
    kind = problem.get("kind", "gamma")
    D = float(problem["D"]) if "D" in problem else None
    if D is None:
        raise ValidationError(f"{args.problem}: needs 'D'")
    cfg = oracle.OracleConfig(args.q, args.budget)
    u_card = int(problem.get("u_cardinality", 3))
    prob = region.PrivacyProblem(j, d, u_card)
    scfg = region.SolverConfig(multistarts=args.multistarts, rng_seed=args.seed)
    if kind == "rd":
        p = Pmf.from_probs(j.marginal(j.names_where(lambda r: r.is_public)).ravel())
        o = oracle.oracle_rd(p, d, D, cfg)
        s = rd.rate_distortion(p, d, D).rate
        ok = s <= o.value + 1e-9
    elif kind == "gamma":
        o = oracle.oracle_gamma(j, d, D, u_card, cfg)
        s = region.gamma_of_D(prob, D, scfg).equivocation
        ok = s >= o.value - 1e-9
    elif kind == "rate":
        E = float(problem["E"])
        o = oracle.oracle_rate(j, d, D, E, u_card, cfg)
        s = region.r_of_DE(prob, D, E, scfg).rate
        ok = s <= o.value + 1e-9
    else:
        raise ValidationError(f"unknown kind {kind!r}; use rd, gamma or rate")
    out = {"kind": kind, "solver": s, "oracle": o.to_dict(), "consistent": bool(ok)}
    print(json.dumps(out, indent=2))


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="privacy-rde", description="Utility-privacy tradeoff curves and tools.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def solver_flags(p):
        p.add_argument("--u-card", type=int, default=None, help="auxiliary alphabet size")
        p.add_argument("--multistarts", type=int, default=32)
        p.add_argument("--seed", type=int, default=0)

    c = sub.add_parser("curve", help="R(D), Gamma(D) or R(D, E) on a grid")
    c.add_argument("kind", choices=["rd", "gamma", "region"])
    c.add_argument("--pmf", required=True, help="JSON joint pmf")
    c.add_argument("--distortion", default="hamming", help="'hamming' or a JSON matrix file")
    c.add_argument("--d-grid", required=True, help="a:b:step")
    c.add_argument("--e-grid", help="a:b:step (region only)")
    c.add_argument("--side-info", action="append", default=[], metavar="AXIS",
                   help="treat AXIS as side information at the user (repeatable)")
    c.add_argument("--markov", action="store_true", help="encoder sees public attributes only")
    c.add_argument("--out")
    c.add_argument("--format", choices=["csv", "json"])
    solver_flags(c)
    c.set_defaults(func=cmd_curve)

    w = sub.add_parser("waterfill", help="Hamming closed form for a categorical source")
    w.add_argument("--pmf", required=True)
    w.add_argument("--d", type=float, required=True)
    w.add_argument("--out")
    w.set_defaults(func=cmd_waterfill)

    g = sub.add_parser("gaussian", help="bivariate Gaussian closed form")
    g.add_argument("--sx2", type=float, required=True)
    g.add_argument("--sy2", type=float, required=True)
    g.add_argument("--rho", type=float, required=True)
    g.add_argument("--d-grid", required=True)
    g.add_argument("--out")
    g.add_argument("--format", choices=["csv", "json"])
    g.set_defaults(func=cmd_gaussian)

    s = sub.add_parser("sanitize", help="apply the optimal channel to a CSV")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--schema", required=True)
    s.add_argument("--d", type=float, required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--distortion", default="hamming")
    s.add_argument("--channel", help="use this channel JSON instead of solving")
    solver_flags(s)
    s.set_defaults(func=cmd_sanitize)

    d = sub.add_parser("dp", help="Laplace mechanism baseline")
    d.add_argument("--epsilon", type=float, default=1.0)
    d.add_argument("--sensitivity", type=float, default=None)
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--query", choices=["count", "sum"], default="count")
    d.add_argument("--clip", help="lo,hi for sum queries")
    d.add_argument("--values", help="comma list of true answers to perturb")
    d.add_argument("--epsilon-grid", help="a:b:step accuracy curve")
    d.add_argument("--out")
    d.set_defaults(func=cmd_dp)

    o = sub.add_parser("oracle-check", help="compare a solver value with brute force")
    o.add_argument("--problem", required=True, help="JSON with joint, D, [E], kind")
    o.add_argument("--q", type=float, default=0.05)
    o.add_argument("--budget", type=int, default=10_000_000)
    o.add_argument("--multistarts", type=int, default=8)
    o.add_argument("--seed", type=int, default=0)
    o.set_defaults(func=cmd_oracle_check)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except PrivacyRDEError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
