"""Command-line interface.

Subcommands: sample, fit, check, experiment, sweep, lemmas. Exit codes:
0 success, 2 non-convergence, 3 config rejected (the violated condition is
named on stderr), 4 I/O error, 64 usage error. Seeds are mandatory for
experiment and sweep: reproducibility is the point of the harness.
"""

import argparse
import os
import sys

import numpy as np

from . import experiments, grassmann, optimize, sampling
from .energy import check_necessary_p_gt1, check_sufficient_l1, split_on_subspace
from .errors import ConfigRejected, LpSubspaceError
from .experiments import ExperimentConfig, ModelRule
from .optimize import FitOptions

EXIT_OK = 0
EXIT_NOT_CONVERGED = 2
EXIT_CONFIG_REJECTED = 3
EXIT_IO = 4
EXIT_USAGE = 64


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def _parse_floats(text):
    return tuple(float(t) for t in text.split(",") if t.strip())


def build_parser():
    parser = _Parser(prog="lpsubspace", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", parents=[], help="draw a mixture point cloud",
                       add_help=True)
    p.add_argument("--D", type=int, required=True, help="ambient dimension")
    p.add_argument("--d", type=int, required=True, help="subspace dimension")
    p.add_argument("--k", type=int, required=True, help="number of subspaces K")
    p.add_argument("--alpha", required=True,
                   help="K+1 comma-separated mixture weights, outliers first")
    p.add_argument("--n", type=int, required=True, help="number of points")
    p.add_argument("--eps", type=float, default=0.0, help="noise level")
    p.add_argument("--min-sep", type=float, default=0.0,
                   help="minimum pairwise subspace distance")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, help="output cloud file")

    p = sub.add_parser("fit", help="fit subspace(s) by lp minimization")
    p.add_argument("--p", type=float, required=True, help="energy exponent")
    p.add_argument("--d", type=int, default=1, help="subspace dimension")
    p.add_argument("--k", type=int, default=1, help="number of subspaces")
    p.add_argument("--input", required=True, help="cloud file")
    p.add_argument("--output", required=True,
                   help="subspace file (k > 1 appends .1, .2, ...)")
    p.add_argument("--restarts", type=int, default=12)
    p.add_argument("--max-iters", type=int, default=300)
    p.add_argument("--seed", type=int, required=True)

    p = sub.add_parser("check", help="optimality-condition certificate")
    p.add_argument("--input", required=True, help="cloud file")
    p.add_argument("--subspace", required=True, help="candidate subspace file")
    p.add_argument("--condition", choices=["sufficient-l1", "necessary-lp"],
                   default="sufficient-l1")
    p.add_argument("--p", type=float, default=2.0,
                   help="exponent for necessary-lp (must be > 1)")
    p.add_argument("--samples", type=int, default=500)
    p.add_argument("--inlier-tol", type=float, default=1e-9)
    p.add_argument("--seed", type=int, required=True)

    for name in ("experiment", "sweep"):
        p = sub.add_parser(name, help="run a seeded Monte Carlo study")
        p.add_argument("--config", required=True, help="key = value config file")
        p.add_argument("--out", required=True, help="output report file")
        p.add_argument("--jobs", type=int, default=1)
        p.add_argument("--no-timing", action="store_true",
                       help="omit the runtime column (byte-stable output)")

    p = sub.add_parser("lemmas", help="distributional property checks")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", default=None, help="report file (default stdout)")
    return parser


def _require_readable(path):
    if not os.path.isfile(path):
        raise IOError(f"input file not found: {path}")


def _require_writable(path):
    parent = os.path.dirname(os.path.abspath(path))
    if not os.path.isdir(parent):
        raise IOError(f"output directory not found: {parent}")


def _cmd_sample(args):
    weights = _parse_floats(args.alpha)
    if len(weights) != args.k + 1:
        raise ConfigRejected(
            f"expected {args.k + 1} weights for K={args.k}, got {len(weights)}"
        )
    _require_writable(args.out)
    rng = np.random.default_rng(np.random.SeedSequence(args.seed))
    model = sampling.random_mixture_model(
        args.D, args.d, args.k, weights, args.eps, rng,
        min_pairwise_distance=args.min_sep,
    )
    cloud = sampling.sample_mixture(model, args.n, rng)
    sampling.save_cloud(args.out, cloud, K=args.k, eps=args.eps)
    return EXIT_OK


def _cmd_fit(args):
    _require_readable(args.input)
    _require_writable(args.output)
    cloud, _, _ = sampling.load_cloud(args.input)
    opts = FitOptions(p=args.p, n_restarts=args.restarts,
                      max_iters=args.max_iters, seed=args.seed)
    if args.k <= 1:
        res = optimize.best_single_subspace(cloud, args.d, opts)
        grassmann.save_subspace(args.output, res.subspace)
    else:
        res = optimize.best_k_subspaces(cloud, args.k, args.d, opts)
        for j, L in enumerate(res.subspaces, start=1):
            grassmann.save_subspace(f"{args.output}.{j}", L)
    print(f"energy {res.final_energy:.17g} iterations {res.iterations} "
          f"converged {res.converged}")
    return EXIT_OK if res.converged else EXIT_NOT_CONVERGED


def _format_certificate(cert):
    lines = [
        f"condition: {cert.condition}",
        f"n_samples: {cert.n_samples}",
        f"status: {cert.status}",
    ]
    if cert.witness is not None:
        w = cert.witness
        lines.append(f"witness_lhs: {cert.lhs:.17g}")
        lines.append(f"witness_rhs: {cert.rhs:.17g}")
        lines.append("witness_c: " + " ".join(f"{v:.17g}" for v in w.c))
        for row in w.v:
            lines.append("witness_v: " + " ".join(f"{v:.17g}" for v in row))
        for row in w.u_hat:
            lines.append("witness_u_hat: " + " ".join(f"{v:.17g}" for v in row))
    return "\n".join(lines)


def _cmd_check(args):
    _require_readable(args.input)
    _require_readable(args.subspace)
    cloud, _, _ = sampling.load_cloud(args.input)
    L = grassmann.load_subspace(args.subspace)
    if args.condition == "sufficient-l1":
        inl, out = split_on_subspace(cloud, L, tol=args.inlier_tol)
        rng = np.random.default_rng(np.random.SeedSequence(args.seed))
        cert = check_sufficient_l1(inl, out, L, args.samples, rng,
                                   on_tol=args.inlier_tol)
        print(_format_certificate(cert))
        return EXIT_OK
    inl, out = split_on_subspace(cloud, L, tol=args.inlier_tol)
    res = check_necessary_p_gt1(out, L, args.p)
    print(f"condition: necessary-lp p={args.p:g}")
    print(f"norm: {res.norm:.17g}")
    print(f"satisfied: {res.satisfied}")
    return EXIT_OK


_CONFIG_KEYS = {
    "kind", "D", "d", "K", "alpha", "eps", "min_sep", "n", "trials",
    "p_grid", "tol", "seed", "restarts", "max_iters", "alpha0_cap", "target",
}


def parse_config(path):
    """Read a key = value config file into an (ExperimentConfig, kind) pair."""
    raw = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigRejected(f"{path}:{lineno}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in _CONFIG_KEYS:
                raise ConfigRejected(f"{path}:{lineno}: unknown key {key!r}")
            raw[key] = value
    kind = raw.get("kind", "recover_l0")
    if kind == "counterexamples":
        if "seed" not in raw:
            raise ConfigRejected("seed is required (no wall-clock default)")
        return None, kind, int(raw["seed"])
    for needed in ("D", "d", "K", "alpha", "n", "trials", "seed"):
        if needed not in raw:
            raise ConfigRejected(f"config key {needed!r} is required")
    weights = _parse_floats(raw["alpha"])
    rule = ModelRule(
        D=int(raw["D"]), d=int(raw["d"]), K=int(raw["K"]), weights=weights,
        noise=float(raw.get("eps", 0.0)),
        min_pairwise_distance=float(raw.get("min_sep", 0.0)),
    )
    opts = FitOptions(
        p=1.0,
        n_restarts=int(raw.get("restarts", 12)),
        max_iters=int(raw.get("max_iters", 300)),
        seed=0,
    )
    config = ExperimentConfig(
        model=rule,
        N=int(raw["n"]),
        p_grid=_parse_floats(raw.get("p_grid", "1.0")),
        n_trials=int(raw["trials"]),
        recovery_tol=float(raw.get("tol", 0.05)),
        fit_options=opts,
        seed=int(raw["seed"]),
        alpha0_cap=(float(raw["alpha0_cap"]) if "alpha0_cap" in raw else None),
        target=raw.get("target", "single"),
    )
    return config, kind, config.seed


def _cmd_sweep(args):
    _require_readable(args.config)
    _require_writable(args.out)
    config, kind, seed = parse_config(args.config)
    if kind == "counterexamples":
        results = experiments.counterexample_suite(seed)
        with open(args.out, "w") as fh:
            for r in results:
                fh.write(f"{'PASS' if r.passed else 'FAIL'} {r.name} {r.detail}\n")
        return EXIT_OK if all(r.passed for r in results) else EXIT_NOT_CONVERGED
    report = experiments.run_sweep(config, kind, jobs=args.jobs)
    with open(args.out, "w") as fh:
        experiments.write_csv(report, fh, include_timing=not args.no_timing)
    return EXIT_OK


def _cmd_lemmas(args):
    results = experiments.lemma_property_suite(args.seed)
    lines = [
        f"{'PASS' if r.passed else 'FAIL'} {r.name} {r.detail}" for r in results
    ]
    text = "\n".join(lines) + "\n"
    if args.out:
        _require_writable(args.out)
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if all(r.passed for r in results) else EXIT_NOT_CONVERGED


def run(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "sample": _cmd_sample,
        "fit": _cmd_fit,
        "check": _cmd_check,
        "experiment": _cmd_sweep,
        "sweep": _cmd_sweep,
        "lemmas": _cmd_lemmas,
    }
    try:
        return handlers[args.command](args)
    except ConfigRejected as exc:
        sys.stderr.write(f"config rejected: {exc}\n")
        return EXIT_CONFIG_REJECTED
    except (IOError, OSError) as exc:
        sys.stderr.write(f"io error: {exc}\n")
        return EXIT_IO
    except LpSubspaceError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE


def main():
    raise SystemExit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
