"""
Command-line front end.

    perturbkl beta   --a 2 --b 3 --u 0.7
    perturbkl s      --a 2 --b 1 --u 0.5
    perturbkl kinf   --weights nu.json --values f.json --u 0.8
    perturbkl dp     --alpha 3 --nu0 nu0.json --f f.json --u 0.8 --strategy search
    perturbkl verify beta --a 2 --b 3 --u 0.7 --samples 1000000 --seed 1
    perturbkl sweep  --param u --from 0.5 --to 0.99 --steps 50 --a 2 --b 3 --out sweep.csv

Values are natural logs of probabilities unless ``--prob`` is given.
"""
import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import beta_bounds as bb
from . import dirichlet_bounds as db
from . import mc
from .errors import DomainError, NoValidPlanError, PerturbationTooLargeError
from .kinf import binary_kinf_threshold, kinf_solve
from .special import binary_kl

ROW_BOUNDS = ("hoeffding", "bernstein", "kl", "perturbed_classic", "perturbed_maximal")


class UsageError(Exception):
    pass


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.floating, float)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, mc.Verdict):
        return x.value
    return x


def _dump(obj, out):
    out.write(json.dumps(_jsonable(obj), allow_nan=False) + "\n")


def _show(value, prob):
    if value is None:
        return "-"
    return repr(math.exp(value)) if prob else repr(float(value))


def _read_vector(path):
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    if not isinstance(data, list) or not data or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in data):
        raise UsageError(f"{path} must hold a non-empty JSON array of numbers")
    arr = np.asarray(data, dtype=np.float64)
    if not np.isfinite(arr).all():
        raise UsageError(f"{path} contains non-finite numbers")
    return arr


def _policy(args):
    if args.eta_policy == "fixed":
        if args.eta is None:
            raise UsageError("--eta-policy fixed needs --eta")
        return args.eta
    return args.eta_policy


# ---- subcommands ---------------------------------------------------------

def cmd_beta(args, out):
    rep = bb.bound_report(args.a, args.b, args.u, _policy(args), tight=args.tight)
    lbs = None
    if args.a > 1 and 0 < args.u < 1:
        lbs = bb.s_lower_bounds(args.a, args.b, args.u)
    if args.json:
        d = rep.to_dict()
        d["s_lower_bounds"] = lbs
        _dump(d, out)
        return 0
    out.write(f"Beta({rep.a!r}, {rep.b!r})  u={rep.u!r}  mean={rep.a / (rep.a + rep.b)!r}\n")
    for name, val in rep.bounds.items():
        flag = "valid" if rep.valid[name] else "invalid"
        if rep.vacuous[name]:
            flag += ",vacuous"
        out.write(f"  {name:<12} {_show(val, args.prob):>24}  [{flag}]\n")
    out.write(f"  {'exact':<12} {_show(rep.exact_log_tail, args.prob):>24}\n")
    out.write(f"  S(a,b,u)     {rep.s!r}\n")
    if rep.eta is not None:
        out.write(f"  eta          {rep.eta!r} ({rep.eta_policy})\n")
    if lbs is not None:
        out.write("  lower bounds " + "  ".join(repr(v) for v in lbs) + "\n")
    return 0


def cmd_s(args, out):
    s = bb.s_value(args.a, args.b, args.u)
    lbs = None
    if args.a > 1 and 0 < args.u < 1:
        lbs = bb.s_lower_bounds(args.a, args.b, args.u)
    if args.json:
        _dump({"a": args.a, "b": args.b, "u": args.u, "s_value": s, "lower_bounds": lbs}, out)
        return 0
    out.write(f"S = {s!r}\n")
    if lbs is not None:
        for i, v in enumerate(lbs, 1):
            out.write(f"LB{i} = {v!r}\n")
    return 0


def cmd_kinf(args, out):
    nu = _read_vector(args.weights)
    f = _read_vector(args.values)
    if nu.shape != f.shape:
        raise UsageError("weights and values must have equal length")
    sol = kinf_solve(nu, args.u, f)
    res = {"u": args.u, "kinf": sol.value, "lambda": sol.lam,
           "derivative": sol.derivative, "convention": sol.convention}
    if nu.size == 2 and f[0] > args.u > f[1]:
        thr = binary_kinf_threshold(args.u, f[0], f[1])
        res["binary_closed_form"] = binary_kl(nu[0], thr) if nu[0] < thr else 0.0
    if args.json:
        _dump(res, out)
        return 0
    for k, v in res.items():
        out.write(f"{k:<20} {v!r}\n")
    return 0


def _base(args):
    return db.BaseMeasure(args.alpha, _read_vector(args.nu0), _read_vector(args.f))


def cmd_dp(args, out):
    base = _base(args)
    if args.m is not None and args.m == 0.0:
        plan = db.zero_plan(base)
    else:
        plan = db.auto_plan(base, args.u, args.strategy, k=args.k)
        if args.m is not None:
            plan = db.plan_from_eta0(base, plan.eta0, args.u, m=args.m, strategy=plan.strategy)
    bound = db.dp_tail_bound(base, args.u, plan)
    unperturbed = db.dp_tail_bound(base, args.u, db.zero_plan(base))
    res = {"alpha": base.alpha, "u": args.u, "plan": plan.to_dict(), "bound": bound,
           "unperturbed_bound": unperturbed}
    if base.d == 2 and base.f[0] > args.u > base.f[1] and plan.eta[1] == 0.0:
        a, b = base.weights
        thr = binary_kinf_threshold(args.u, base.f[0], base.f[1])
        res["two_point_bound"] = bb.perturbed_kl_bound(a, b, thr, plan.m, strict=False)
    if args.json:
        _dump(res, out)
        return 0
    out.write(f"strategy   {plan.strategy}\n")
    out.write(f"eta0       {plan.eta0.tolist()}\n")
    out.write(f"m          {plan.m!r}\n")
    out.write(f"eta        {plan.eta.tolist()}\n")
    out.write(f"bound      {_show(bound, args.prob)}\n")
    out.write(f"m=0 bound  {_show(unperturbed, args.prob)}\n")
    if "two_point_bound" in res:
        out.write(f"binary     {_show(res['two_point_bound'], args.prob)}\n")
    return 0


def _verify_rows(args):
    rng = mc.RngStream(args.seed, args.stream)
    rows = []
    if args.target == "beta":
        if None in (args.a, args.b, args.u):
            raise UsageError("verify beta needs --a, --b and --u")
        est = mc.estimate_weighted_tail([args.a, args.b], [1.0, 0.0], args.u, args.samples,
                                        rng, level=args.level)
        reps = {p: bb.bound_report(args.a, args.b, args.u, p) for p in ("classic", "maximal")}
        for name in ROW_BOUNDS:
            if name.startswith("perturbed"):
                rep, key = reps[name.split("_")[1]], "perturbed"
            else:
                rep, key = reps["classic"], name
            val, ok = rep.bounds[key], rep.valid[key]
            rows.append((name, val, mc.verify_bound(est, val).value if ok else "SKIPPED"))
    else:
        if None in (args.alpha, args.nu0, args.f, args.u):
            raise UsageError("verify dp needs --alpha, --nu0, --f and --u")
        base = _base(args)
        est = mc.estimate_weighted_tail(base.weights, base.f, args.u, args.samples, rng,
                                        level=args.level)
        plans = [db.zero_plan(base, "unperturbed")]
        for strat in ("argmax-only", "all-above-u", "search"):
            try:
                plans.append(db.auto_plan(base, args.u, strat))
            except NoValidPlanError:
                pass
        for plan in plans:
            val = db.dp_tail_bound(base, args.u, plan)
            rows.append((plan.strategy, val, mc.verify_bound(est, val).value))
    return est, rows


def cmd_verify(args, out):
    est, rows = _verify_rows(args)
    if args.json:
        _dump({"target": args.target, "estimate": est.to_dict(),
               "rows": [{"bound": n, "value": v, "verdict": r} for n, v, r in rows]}, out)
        return 0
    out.write(f"p_hat={est.p_hat!r}  ci=[{est.ci_low!r}, {est.ci_high!r}]  "
              f"level={est.level!r}  n={est.n_samples}  seed={est.seed}\n")
    for name, val, verdict in rows:
        out.write(f"  {name:<18} {_show(val, args.prob):>24}  {verdict}\n")
    return 0


SWEEP_COLUMNS = ("a", "b", "u", "s_value", "eta_classic") + ROW_BOUNDS + (
    "exact_log_tail",) + tuple(f"valid_{n}" for n in ROW_BOUNDS)


def _fmt(x):
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return format(float(x), ".16e")


def sweep_rows(param, start, stop, steps, a, b, u, fix_sum=None):
    if steps < 2:
        raise UsageError("--steps must be at least 2")
    if not start < stop:
        raise UsageError("--from must be smaller than --to")
    if param not in ("a", "b", "u"):
        raise UsageError("--param must be one of a, b, u")
    rows = []
    for x in np.linspace(start, stop, steps):
        p = {"a": a, "b": b, "u": u}
        p[param] = float(x)
        if fix_sum is not None:
            if param == "a":
                p["b"] = fix_sum - p["a"]
            elif param == "b":
                p["a"] = fix_sum - p["b"]
        if None in p.values():
            raise UsageError("fixed parameters a, b, u must all be given")
        cls = bb.bound_report(p["a"], p["b"], p["u"], "classic")
        mx = bb.bound_report(p["a"], p["b"], p["u"], "maximal")
        vals = {"hoeffding": cls.bounds["hoeffding"], "bernstein": cls.bounds["bernstein"],
                "kl": cls.bounds["kl"], "perturbed_classic": cls.bounds["perturbed"],
                "perturbed_maximal": mx.bounds["perturbed"]}
        valid = {"hoeffding": cls.valid["hoeffding"], "bernstein": cls.valid["bernstein"],
                 "kl": cls.valid["kl"], "perturbed_classic": cls.valid["perturbed"],
                 "perturbed_maximal": mx.valid["perturbed"]}
        row = {"a": p["a"], "b": p["b"], "u": p["u"], "s_value": cls.s, "eta_classic": cls.eta,
               "exact_log_tail": cls.exact_log_tail}
        for n in ROW_BOUNDS:
            row[n] = vals[n] if valid[n] else None
            row[f"valid_{n}"] = int(valid[n])
        rows.append(row)
    return rows


def render_sweep_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for row in rows:
        w.writerow([row[c] if c.startswith("valid_") else _fmt(row[c]) for c in SWEEP_COLUMNS])
    return buf.getvalue()


def cmd_sweep(args, out):
    rows = sweep_rows(args.param, args.start, args.stop, args.steps, args.a, args.b, args.u,
                      args.fix_sum)
    text = render_sweep_csv(rows)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        out.write(f"wrote {len(rows)} rows to {args.out}\n")
    else:
        out.write(text)
    return 0


# ---- parser --------------------------------------------------------------

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="emit one JSON object")
    common.add_argument("--prob", action="store_true", help="show probabilities, not logs")

    p = argparse.ArgumentParser(prog="perturbkl", description=__doc__.split("\n")[1])
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("beta", parents=[common], help="all Beta tail bounds at one point")
    sp.add_argument("--a", type=float, required=True)
    sp.add_argument("--b", type=float, required=True)
    sp.add_argument("--u", type=float, required=True)
    sp.add_argument("--eta-policy", choices=("none", "classic", "maximal", "fixed"),
                    default="maximal")
    sp.add_argument("--eta", type=float)
    sp.add_argument("--tight", action="store_true", help="include the log P(B >= x) term")
    sp.set_defaults(func=cmd_beta)

    sp = sub.add_parser("s", parents=[common], help="maximal perturbation S(a,b,u)")
    sp.add_argument("--a", type=float, required=True)
    sp.add_argument("--b", type=float, required=True)
    sp.add_argument("--u", type=float, required=True)
    sp.set_defaults(func=cmd_s)

    sp = sub.add_parser("kinf", parents=[common], help="K_inf of a discrete measure")
    sp.add_argument("--weights", required=True, help="JSON array, probability vector")
    sp.add_argument("--values", required=True, help="JSON array, f on the support")
    sp.add_argument("--u", type=float, required=True)
    sp.set_defaults(func=cmd_kinf)

    def dp_args(sp, required):
        sp.add_argument("--alpha", type=float, required=required)
        sp.add_argument("--nu0", required=required, help="JSON array, base distribution")
        sp.add_argument("--f", required=required, help="JSON array of values")

    sp = sub.add_parser("dp", parents=[common], help="perturbed Dirichlet tail bound")
    dp_args(sp, True)
    sp.add_argument("--u", type=float, required=True)
    sp.add_argument("--strategy", choices=db.STRATEGIES, default="search")
    sp.add_argument("--k", type=int)
    sp.add_argument("--m", type=float, help="override the perturbation mass")
    sp.set_defaults(func=cmd_dp)

    sp = sub.add_parser("verify", parents=[common], help="Monte Carlo check of the bounds")
    sp.add_argument("target", choices=("beta", "dp"))
    sp.add_argument("--a", type=float)
    sp.add_argument("--b", type=float)
    sp.add_argument("--u", type=float)
    dp_args(sp, False)
    sp.add_argument("--samples", type=int, default=1_000_000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--stream", type=int, default=0)
    sp.add_argument("--level", type=float, default=mc.DEFAULT_LEVEL)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("sweep", help="CSV of every bound along one parameter")
    sp.add_argument("--param", choices=("a", "b", "u"), required=True)
    sp.add_argument("--from", dest="start", type=float, required=True)
    sp.add_argument("--to", dest="stop", type=float, required=True)
    sp.add_argument("--steps", type=int, required=True)
    sp.add_argument("--a", type=float)
    sp.add_argument("--b", type=float)
    sp.add_argument("--u", type=float)
    sp.add_argument("--fix-sum", type=float, help="keep a + b at this value")
    sp.add_argument("--out", help="output CSV path (stdout if omitted)")
    sp.set_defaults(func=cmd_sweep)
    return p


def main(argv=None, out=None):
    out = sys.stdout if out is None else out
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "samples", 1) is not None and getattr(args, "samples", 1) < 1:
        parser.error("--samples must be positive")
    if hasattr(args, "level") and not 0.0 < args.level < 1.0:
        parser.error("--level must lie in (0, 1)")
    try:
        return args.func(args, out)
    except (UsageError, DomainError, NoValidPlanError, PerturbationTooLargeError) as exc:
        parser.error(str(exc))


if __name__ == "__main__":
    sys.exit(main())
