"""Command-line front end: ``python -m eigenpath <subcommand> ...``.

Exit codes: 0 success, 1 bound violation under --strict, 2 configuration
error, 64 usage error (unknown flag, bad value).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from eigenpath import aqc_costs, families, ff_amplify, oracle, qsa, rm_engine, spectral, suite
from eigenpath.errors import ConfigError, EigenpathError
from eigenpath.ham_path import matrix_from_json
from eigenpath.report import aggregate

EXIT_OK, EXIT_VIOLATION, EXIT_CONFIG, EXIT_USAGE = 0, 1, 2, 64

BOUNDS_COLUMNS = ("s", "E", "gap", "dh_norm", "ddh_norm", "psi_dot_norm", "integrand")
QSA_COLUMNS = ("beta", "Z", "mean_E", "var_E", "rate_lhs", "rate_rhs", "gap")
SWEEP_COLUMNS = ("instance", "param", "dim", "min_gap", "l_star", "q", "rm_cost", "final_fidelity",
                 "fidelity_bound", "t_aqc", "bounds_hold")


# --- scaling fits --------------------------------------------------------------

@dataclass
class ScalingFit:
    gaps: list
    costs: list
    slope: float
    intercept: float
    r2: float


def fit_scaling(pairs) -> ScalingFit:
    """Least-squares fit of log T against log(1/Δ) over (Δ, T) pairs."""
    pairs = [(float(g), float(t)) for g, t in pairs]
    if len(pairs) < 4:
        raise ValueError("a scaling fit needs at least 4 points")
    if any(g <= 0 or t <= 0 for g, t in pairs):
        raise ValueError("gaps and costs must be positive")
    x = np.array([-math.log(g) for g, _ in pairs])
    y = np.array([math.log(t) for _, t in pairs])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return ScalingFit([g for g, _ in pairs], [t for _, t in pairs], float(slope), float(intercept), r2)


# --- io helpers ------------------------------------------------------------------

def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    return repr(float(x))


def _write_csv(path, columns, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    if path is None or path == "-":
        sys.stdout.write(buf.getvalue())
    else:
        with open(path, "w", newline="") as fh:
            fh.write(buf.getvalue())


def _emit_summary(summary: dict, args, csv_to_stdout: bool):
    text = json.dumps(summary, indent=2, sort_keys=True, default=_json_default) + "\n"
    if getattr(args, "summary", None):
        with open(args.summary, "w") as fh:
            fh.write(text)
    else:
        (sys.stderr if csv_to_stdout else sys.stdout).write(text)


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o).__name__)


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc


def _load_path(args):
    return families.path_from_config(_load_json(args.config))


def _epsilon(x: str) -> float:
    v = float(x)
    if not 0 < v < 1:
        raise argparse.ArgumentTypeError("epsilon must lie in (0, 1)")
    return v


def _positive_int(x: str) -> int:
    v = int(x)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


# --- subcommands -------------------------------------------------------------------

def cmd_bounds(args) -> int:
    path = _load_path(args)
    sc = spectral.scan(path, args.grid)
    rep = spectral.path_length_report(path, args.grid)
    rows = zip(sc.s, sc.energy, sc.gap, sc.dh_norm, sc.ddh_norm, sc.speed, sc.integrand)
    _write_csv(args.out, BOUNDS_COLUMNS, rows)
    checks = suite.path_checks(path, args.grid)
    summary = {k: v for k, v in asdict(rep).items() if k not in ("s", "speed")}
    summary["checks"] = {c.name: c.to_dict() for c in checks}
    _emit_summary(summary, args, args.out in (None, "-"))
    return _verdict(args, all(c.holds for c in checks))


def _policy(args):
    # --sigma-scale c sets the width to c / Δ; unset keeps the eps' = 1/3 default
    if args.sigma_scale is not None and args.sigma_scale <= 0:
        raise ConfigError("--sigma-scale must be positive")
    return rm_engine.DistributionPolicy(args.dist, args.sigma_scale)


def cmd_rm(args) -> int:
    path = _load_path(args)
    schedule = None
    if args.delta_s is not None:
        schedule = rm_engine.Schedule.uniform(args.delta_s, args.epsilon)
    rep = rm_engine.run_rm(path, args.epsilon, _policy(args), args.mode, args.seed, args.samples,
                           schedule=schedule, grid_size=args.grid)
    _write_csv(args.out, rm_engine.CSV_COLUMNS, rep.csv_rows())
    checks = suite.rm_checks(path, args.epsilon, rep)
    board = aggregate(checks)
    summary = {"epsilon": args.epsilon, "q": rep.schedule.q, "l_star": rep.l_star,
               "final_fidelity": rep.final_fidelity, "fidelity_bound": rep.fidelity_bound,
               "total_cost": rep.total_cost, "kappa_prime": rep.kappa_prime,
               "eps_prime_max": rep.eps_prime_max, "checks": board.to_dict()["entries"]}
    _emit_summary(summary, args, args.out in (None, "-"))
    return _verdict(args, board.passed)


def cmd_aqc(args) -> int:
    path = _load_path(args)
    rep = aqc_costs.cost_report(path, args.epsilon, args.kappa, grid=args.grid)
    out = rep.to_dict()
    ok = True
    if args.simulate:
        fid, steps, change = aqc_costs.simulate_adiabatic_converged(path, rep.t_aqc, args.steps)
        out.update(simulated_fidelity=fid, simulated_infidelity=1 - fid, steps=steps, refinement_change=change)
        ok = 1 - fid <= args.epsilon
    _write_json(args.out, out)
    return _verdict(args, ok)


def _write_json(path, doc):
    text = json.dumps(doc, indent=2, sort_keys=True, default=_json_default) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _ff_from_doc(doc) -> ff_amplify.FrustrationFreeSet:
    try:
        terms = [matrix_from_json(t) for t in doc["terms"]]
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"frustration-free file needs 'terms': {exc}") from exc
    if "psi" in doc:
        psi = np.array([complex(*x) if isinstance(x, list) else complex(x) for x in doc["psi"]])
    else:
        psi = np.linalg.eigh(sum(terms))[1][:, 0]
    try:
        return ff_amplify.FrustrationFreeSet(terms, psi)
    except (ValueError, EigenpathError) as exc:
        raise ConfigError(str(exc)) from exc


def cmd_amplify(args) -> int:
    if args.random is not None:
        d, n_terms, seed = args.random
        ff = ff_amplify.generate_ff_ensemble(d, n_terms, seed)
    elif args.config:
        ff = _ff_from_doc(_load_json(args.config))
    else:
        raise ConfigError("amplify needs --config or --random")
    try:
        amp = ff_amplify.build_amplified(ff)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    bound = math.sqrt(ff.gap * ff.pi_norm)
    holds = bool(amp.delta_prime >= bound - suite.GAP_TOL)
    _write_json(args.out, {"delta": ff.gap, "pi_norm": ff.pi_norm, "delta_prime": amp.delta_prime,
                           "bound_sqrt": bound, "holds": holds,
                           "symmetry_error": amp.symmetry_error(),
                           "kernel_residual": amp.kernel_residual(ff.psi)})
    return _verdict(args, holds)


def cmd_qsa(args) -> int:
    obj = qsa.ObjectiveFunction.from_json(_load_json(args.objective))
    if args.beta_final == "auto":
        beta_q = qsa.beta_final(obj, args.epsilon, args.beta_scale)
    else:
        try:
            beta_q = float(args.beta_final)
        except ValueError as exc:
            raise ConfigError("--beta-final must be 'auto' or a number") from exc
        if beta_q <= 0:
            raise ConfigError("--beta-final must be positive")
    with_gap = obj.d <= qsa.MAX_CHAIN_CONFIGS and not args.no_gap
    betas = np.linspace(0.0, beta_q, args.points)

    def row(b):
        pt = qsa.coherent_gibbs(obj, float(b))
        rc = qsa.rate_identity(obj, float(b))
        gap = qsa.metropolis_gap(obj, float(b)) if with_gap else None
        return (float(b), math.exp(pt.log_partition) if pt.log_partition < 709 else math.inf,
                pt.mean_energy, pt.var_energy, rc.state_rate, rc.variance_rate, gap), rc

    results = _map(row, betas, args.threads)
    rows = [r for r, _ in results]
    _write_csv(args.out, QSA_COLUMNS, rows)
    qs = qsa.q_star(obj, beta_q, args.epsilon)
    summary = {"d": obj.d, "gamma": obj.gamma, "e_max": obj.e_max, "beta_q": beta_q,
               "q_star": qs.exact, "q_star_cap": qs.cap,
               "max_identity_rel_err": max(rc.rel_err for _, rc in results)}
    ok = qs.holds and summary["max_identity_rel_err"] <= suite.IDENTITY_TOL
    if with_gap:
        gmin = min(r[-1] for r in rows)
        t_qsa, t_old = qsa.qsa_cost_formulas(beta_q, obj.e_max, gmin, args.epsilon)
        summary.update(min_gap=gmin, t_qsa=t_qsa, t_old=t_old)
    _emit_summary(summary, args, args.out in (None, "-"))
    return _verdict(args, ok)


def _map(fn, items, threads):
    items = list(items)
    if threads and threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def _sweep_instances(args):
    if args.family == "grover":
        if args.n_min > args.n_max:
            raise ConfigError("--n-min exceeds --n-max")
        return [(f"grover_n{n}", n, families.grover_path(n, args.seed)) for n in range(args.n_min, args.n_max + 1)]
    if args.family == "random":
        rng = np.random.default_rng(args.seed)
        return [(f"random_{k}", k, families.random_linear_path(args.dim, rng)) for k in range(args.count)]
    angles = args.angles or [math.pi / 2, 2.0, 2.5, 2.8, 3.0]
    return [(f"qubit_theta{k}", a, families.qubit_angle_path(a)) for k, a in enumerate(angles)]


def cmd_sweep(args) -> int:
    instances = _sweep_instances(args)
    policy = _policy(args)

    def run(item):
        name, param, path = item
        sc = spectral.scan(path, args.grid)
        rep = rm_engine.run_rm(path, args.epsilon, policy, args.mode, args.seed, args.samples,
                               grid_size=args.grid)
        holds = all(c.holds for c in suite.rm_checks(path, args.epsilon, rep))
        return (name, param, path.dim, float(np.min(sc.gap)), rep.l_star, rep.schedule.q, rep.total_cost,
                rep.final_fidelity, rep.fidelity_bound, aqc_costs.t_aqc(path, args.epsilon, _scan=sc), holds)

    rows = sorted(_map(run, instances, args.threads), key=lambda r: r[1])
    _write_csv(args.out, SWEEP_COLUMNS, rows)
    summary = {"family": args.family, "epsilon": args.epsilon, "instances": len(rows)}
    if len(rows) >= 4:
        summary["rm_fit"] = _fit_dict(fit_scaling([(r[3], r[6]) for r in rows]))
        summary["aqc_fit"] = _fit_dict(fit_scaling([(r[3], r[9]) for r in rows]))
    _emit_summary(summary, args, args.out in (None, "-"))
    return _verdict(args, all(r[-1] for r in rows))


def _fit_dict(fit: ScalingFit) -> dict:
    return {"slope": fit.slope, "intercept": fit.intercept, "r2": fit.r2}


def cmd_oracle(args) -> int:
    reports = oracle.run_suite(args.seed, args.quick)
    width = max(len(r.name) for r in reports)
    lines = [f"{'check':<{width}}  {'error':>12}  {'tolerance':>12}  result"]
    for r in reports:
        lines.append(f"{r.name:<{width}}  {r.error:12.3e}  {r.tolerance:12.3e}  {'PASS' if r.passed else 'FAIL'}")
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    ok = all(r.passed for r in reports)
    if args.scoreboard:
        board = suite.full_run(seed=args.seed)
        board.write(args.scoreboard)
        ok = ok and board.passed
    return _verdict(args, ok)


def _verdict(args, ok: bool) -> int:
    if not ok:
        print("bound violation detected", file=sys.stderr)
        return EXIT_VIOLATION if args.strict else EXIT_OK
    return EXIT_OK


# --- parser ------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _global_flags(p, suppress: bool):
    # subcommand copies are suppressed so they only override when given
    def default(v):
        return argparse.SUPPRESS if suppress else v

    p.add_argument("--strict", action="store_true", default=default(False),
                   help="exit 1 if any checked bound is violated")
    p.add_argument("--threads", type=_positive_int, default=default(1),
                   help="worker threads for sweeps and beta grids")
    p.add_argument("--seed", type=int, default=default(0), help="random seed")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="eigenpath", description="Eigenpath traversal bounds and randomized-method experiments.")
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, help_text):
        p = sub.add_parser(name, help=help_text)
        _global_flags(p, suppress=True)
        return p

    def rm_flags(p):
        p.add_argument("--epsilon", type=_epsilon, default=0.1)
        p.add_argument("--dist", choices=("gaussian", "exponential", "truncated"), default="gaussian")
        p.add_argument("--sigma-scale", type=float, default=None,
                       help="width of the time distribution in units of 1/gap (default gives eps' = 1/3)")
        p.add_argument("--mode", choices=("exact", "mc"), default="exact")
        p.add_argument("--samples", type=_positive_int, default=rm_engine.DEFAULT_SAMPLES)
        p.add_argument("--grid", type=_positive_int, default=spectral.DEFAULT_GRID)

    p = add("bounds", "path length, curvature bound and closed forms on a grid")
    p.add_argument("--config", required=True)
    p.add_argument("--grid", type=_positive_int, default=spectral.DEFAULT_GRID)
    p.add_argument("--out")
    p.add_argument("--summary")
    p.set_defaults(func=cmd_bounds)

    p = add("rm", "run the randomization method on a path")
    p.add_argument("--config", required=True)
    rm_flags(p)
    p.add_argument("--delta-s", type=float, default=None, help="override the uniform step size")
    p.add_argument("--out")
    p.add_argument("--summary")
    p.set_defaults(func=cmd_rm)

    p = add("aqc", "adiabatic and traversal cost baselines")
    p.add_argument("--config", required=True)
    p.add_argument("--epsilon", type=_epsilon, default=0.1)
    p.add_argument("--kappa", type=float, default=1.0)
    p.add_argument("--grid", type=_positive_int, default=spectral.DEFAULT_GRID)
    p.add_argument("--simulate", action="store_true", help="integrate the adiabatic evolution at T = t_aqc")
    p.add_argument("--steps", type=_positive_int, default=1000, help="initial integrator steps (doubled to converge)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_aqc)

    p = add("amplify", "gap amplification of a frustration-free set")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--config")
    g.add_argument("--random", nargs=3, type=int, metavar=("D", "L", "SEED"))
    p.add_argument("--out")
    p.set_defaults(func=cmd_amplify)

    p = add("qsa", "coherent Gibbs path analysis")
    p.add_argument("--objective", required=True)
    p.add_argument("--epsilon", type=_epsilon, default=0.1)
    p.add_argument("--beta-final", default="auto")
    p.add_argument("--beta-scale", type=float, default=1.0)
    p.add_argument("--points", type=_positive_int, default=51)
    p.add_argument("--no-gap", action="store_true", help="skip the Metropolis chain gap column")
    p.add_argument("--out")
    p.add_argument("--summary")
    p.set_defaults(func=cmd_qsa)

    p = add("sweep", "RM and AQC costs across a family, with log-log fits")
    p.add_argument("--family", choices=("grover", "random", "qubit"), required=True)
    p.add_argument("--n-min", type=_positive_int, default=2)
    p.add_argument("--n-max", type=_positive_int, default=5)
    p.add_argument("--dim", type=_positive_int, default=4)
    p.add_argument("--count", type=_positive_int, default=5)
    p.add_argument("--angles", type=float, nargs="+")
    rm_flags(p)
    p.add_argument("--out")
    p.add_argument("--summary")
    p.set_defaults(func=cmd_sweep)

    p = add("oracle", "run the brute-force oracle suite")
    p.add_argument("--quick", action="store_true")
    p.add_argument("--scoreboard", help="also run the full verification and write scoreboard JSON here")
    p.add_argument("--out")
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (EigenpathError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
