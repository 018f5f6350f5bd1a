"""Command line entry point: ``rcar <subcommand> --config params.json ...``.

Exit codes: 0 success, 2 invalid configuration, 3 non-stationary or
pathological parameters, 4 a simulated path exploded.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import time
from pathlib import Path

from . import __version__
from .estimator import estimate
from .exceptions import ConfigError, DegenerateDataError, ExplosionError, NonStationaryError, ThetaStarError
from .model import ModelParams, check_admissibility, classify_theta_star
from .moments import solve_moments
from .montecarlo import (
    MCConfig,
    geometric_checkpoints,
    lil_csv,
    rejection_csv,
    run_distribution,
    run_lil,
    run_rejection_grid,
)
from .report import histogram_svg, rejection_svg
from .simulate import DEFAULT_BURN_IN, read_csv, simulate

EXIT_OK, EXIT_CONFIG, EXIT_THETA_STAR, EXIT_EXPLOSION = 0, 2, 3, 4
COMMANDS = ("theta-star", "simulate", "estimate", "mc-dist", "mc-reject", "lil", "validate")


def parse_grid(spec):
    """``"a:b:step"`` -> values from a to b inclusive when step divides the range."""
    try:
        a, b, step = (float(s) for s in spec.split(":"))
    except ValueError:
        raise ConfigError(f"grid must look like 'a:b:step', got {spec!r}", field="alpha1-grid") from None
    if step <= 0 or b < a:
        raise ConfigError("grid needs step > 0 and a <= b", field="alpha1-grid")
    count = (b - a) / step
    last = round(count)
    if abs(count - last) > 1e-12 * max(1.0, abs(count)):
        last = math.floor(count)
    return [round(a + i * step, 12) + 0.0 for i in range(last + 1)]


def _build_parser():
    parser = argparse.ArgumentParser(prog="rcar", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        p.add_argument("--config", required=config_required, help="JSON parameter document")
        p.add_argument("--out", default=".", help="output directory (default: current)")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--threads", type=int, default=None, help="worker threads; env RCAR_THREADS")
        return p

    sp = common(sub.add_parser("theta-star", help="solve the moment system and print theta_star"))
    sp = common(sub.add_parser("simulate", help="simulate one path and write trajectory.csv"))
    sp.add_argument("--n", type=int, default=500)
    sp.add_argument("--burn-in", type=int, default=DEFAULT_BURN_IN)

    sp = common(sub.add_parser("estimate", help="fit OLS to a trajectory CSV"), config_required=False)
    sp.add_argument("--input", required=True, help="trajectory CSV with columns t,x")
    sp.add_argument("--order", type=int, default=None, help="AR order (default: p of --config)")

    for name in ("mc-dist", "mc-reject"):
        sp = common(sub.add_parser(name, help="Monte Carlo " + ("distribution" if name == "mc-dist" else "rejection curve")))
        sp.add_argument("--n", type=int, default=500)
        sp.add_argument("--reps", type=int, default=10_000)
        sp.add_argument("--burn-in", type=int, default=DEFAULT_BURN_IN)
        sp.add_argument("--level", type=float, default=0.05)
        sp.add_argument("--recenter", choices=("none", "theta_star"), default="none")
        sp.add_argument("--svg", action="store_true", help="also write an SVG figure")
        if name == "mc-reject":
            sp.add_argument("--alpha1-grid", default="-0.5:0.5:0.05")

    sp = common(sub.add_parser("lil", help="iterated-logarithm functional along growing samples"))
    sp.add_argument("--n", type=int, default=1_000_000, help="largest checkpoint")
    sp.add_argument("--n-min", type=int, default=1_000)
    sp.add_argument("--per-decade", type=int, default=20)
    sp.add_argument("--seeds", type=int, default=20, help="number of paths (seeds seed..seed+k-1)")
    sp.add_argument("--burn-in", type=int, default=DEFAULT_BURN_IN)
    sp.add_argument("--center", choices=("theta_star", "theta"), default="theta_star")

    sp = common(sub.add_parser("validate", help="admissibility report; exit 0 iff admissible"))
    sp.add_argument("--draws", type=int, default=100_000)
    return parser


def _normalize_argv(argv):
    # "--alpha1-grid -0.5:0.5:0.05" would otherwise be read as an option
    out = []
    it = iter(argv)
    for tok in it:
        if tok == "--alpha1-grid":
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def _resolved(args, params):
    doc = {k: v for k, v in vars(args).items() if k not in ("out", "threads", "config")}
    if params is not None:
        doc["params"] = params.to_dict()
    return doc


def _digest(doc):
    text = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


class _Run:
    def __init__(self, args, params):
        self.args = args
        self.params = params
        self.out = Path(args.out)
        self.outputs = []
        self.start = time.perf_counter()

    def write(self, name, text, role):
        self.out.mkdir(parents=True, exist_ok=True)
        path = self.out / name
        path.write_text(text, encoding="utf-8")
        self.outputs.append({"path": str(path), "role": role})
        return path

    def finish(self):
        manifest = {
            "config_digest": _digest(_resolved(self.args, self.params)),
            "tool_version": __version__,
            "command": self.args.command,
            "outputs": self.outputs,
            "wall_time": time.perf_counter() - self.start,
        }
        self.out.mkdir(parents=True, exist_ok=True)
        (self.out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")


def _dump(doc):
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _threads(args):
    if args.threads is not None:
        return max(1, args.threads)
    return None


def _cmd_theta_star(run):
    sol = solve_moments(run.params)
    doc = sol.to_dict()
    doc["flags"] = sorted(classify_theta_star(run.params, sol))
    text = _dump(doc)
    run.write("theta_star.json", text, "theta_star")
    sys.stdout.write(text)


def _cmd_simulate(run):
    a = run.args
    traj = simulate(run.params, a.n, burn_in=a.burn_in, seed=a.seed)
    path = run.write("trajectory.csv", traj.to_csv(), "trajectory")
    print(path)


def _cmd_estimate(run):
    a = run.args
    p = a.order if a.order is not None else (run.params.p if run.params is not None else None)
    if p is None:
        raise ConfigError("estimate needs --order or --config to know p", field="order")
    try:
        x = read_csv(a.input, p=p)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read trajectory: {exc}", field="input") from None
    res = estimate(x, p)
    text = _dump(res.to_dict())
    run.write("estimate.json", text, "estimate")
    sys.stdout.write(text)


def _mc_config(a, params):
    try:
        return MCConfig(
            params=params,
            n=a.n,
            reps=a.reps,
            root_seed=a.seed,
            nominal_level=a.level,
            recenter=a.recenter,
            burn_in=a.burn_in,
        )
    except ValueError as exc:
        raise ConfigError(str(exc), field="n/reps/level") from None


def _cmd_mc_dist(run):
    a = run.args
    rep = run_distribution(_mc_config(a, run.params), threads=_threads(a))
    run.write("dist.csv", rep.to_csv(), "distribution")
    if a.svg:
        run.write("dist.svg", histogram_svg(rep.z1_sample, rep.z2_sample), "figure")
    summary = {
        "reject1": rep.reject1,
        "reject2": rep.reject2,
        "ks1": rep.ks1,
        "ks2": rep.ks2,
        "theta_hat_mean": rep.theta_hat_mean.tolist(),
    }
    sys.stdout.write(_dump(summary))


def _cmd_mc_reject(run):
    a = run.args
    grid = parse_grid(a.alpha1_grid)
    points = run_rejection_grid(_mc_config(a, run.params), grid, threads=_threads(a))
    run.write("reject.csv", rejection_csv(points), "rejection")
    if a.svg:
        run.write("reject.svg", rejection_svg(points, level=a.level), "figure")
    sys.stdout.write(rejection_csv(points))


def _cmd_lil(run):
    a = run.args
    cps = geometric_checkpoints(a.n_min, a.n, a.per_decade)
    center = run.params.theta_vec if a.center == "theta" else None
    paths = run_lil(run.params, cps, range(a.seed, a.seed + a.seeds), center=center, burn_in=a.burn_in)
    run.write("lil.csv", lil_csv(paths), "lil")
    sys.stdout.write(_dump({"decade_ratio": {str(p.seed): p.decade_ratio for p in paths}}))


def _cmd_validate(run):
    adm = check_admissibility(run.params, draws=run.args.draws, seed=run.args.seed)
    doc = adm.to_dict()
    text = _dump(doc)
    run.write("validate.json", text, "validation")
    sys.stdout.write(text)
    failures = []
    if not adm.log_condition_holds:
        failures.append(f"log-moment condition fails (upper CI {adm.log_norm_ci[1]:.4g} >= 0)")
    if not adm.rho_A2 < 1:
        failures.append(f"spectral radius of A2 is {adm.rho_A2:.6g} >= 1")
    if adm.theta_star_flags:
        failures.append("pathological set: " + ", ".join(sorted(adm.theta_star_flags)))
    if failures:
        raise ThetaStarError("; ".join(failures), flags=adm.theta_star_flags)


HANDLERS = {
    "theta-star": _cmd_theta_star,
    "simulate": _cmd_simulate,
    "estimate": _cmd_estimate,
    "mc-dist": _cmd_mc_dist,
    "mc-reject": _cmd_mc_reject,
    "lil": _cmd_lil,
    "validate": _cmd_validate,
}


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    args = _build_parser().parse_args(_normalize_argv(argv))
    if args.threads is None and os.environ.get("RCAR_THREADS"):
        try:
            args.threads = int(os.environ["RCAR_THREADS"])
        except ValueError:
            print("error: RCAR_THREADS must be an integer", file=sys.stderr)
            return EXIT_CONFIG
    try:
        params = ModelParams.load(args.config) if args.config else None
        run = _Run(args, params)
        HANDLERS[args.command](run)
        run.finish()
    except ConfigError as exc:
        field = f" (field: {exc.field})" if exc.field else ""
        print(f"error: invalid config{field}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DegenerateDataError as exc:
        print(f"error: invalid input: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"error: invalid config (field: config): {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NonStationaryError, ThetaStarError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_THETA_STAR
    except ExplosionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EXPLOSION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

