"""Batch command-line interface.

Commands:
    generate    sample a synthetic dataset (ground truth included)
    fit         run one sampler chain on an observation matrix
    eval        score a fit summary against a ground-truth bundle
    replicate   run a full multi-condition study and tabulate results

Exit codes: 0 success, 1 usage error, 2 data error (missing or malformed
files, shape mismatches), 3 model degeneracy (a conditional draw with no
feasible state).
"""

import argparse
import csv
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import dataio, experiments
from .harness import (
    CANONICAL_STRUCTURES,
    RejectionError,
    canonical_structure,
    generate_dataset,
    in_degree_error,
    rejection_sample_Z,
    structure_error,
)
from .model import DegenerateModelError, ModelParams
from .rjmcmc import make_k_prior
from .runner import default_k_prior, run_chain

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_DEGENERATE = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2
        raise UsageError(message)


@dataclass
class ExperimentConfig:
    """Merged settings for one fit: config-file values overridden by flags."""

    data: str
    out: str
    sampler: str = "gibbs"
    iterations: int = 500
    seed: int = 0
    init: str = "empty"
    infer_hypers: bool = False
    mh_step: float = 0.05
    burn_in: int = 0
    epsilon: float = 0.01
    lam: float = 0.9
    p: float = 0.1
    alpha: float = 3.0
    prior_k: str = "poisson"
    prior_k_mean: float | None = None
    prior_k_q: float = 0.5
    k_max: int = 50
    plain_theta_denominator: bool = False
    duplicate_row_factor: bool = False
    timing: bool = False

    def params(self) -> ModelParams:
        return ModelParams(epsilon=self.epsilon, lam=self.lam, p=self.p, alpha=self.alpha)


def _add_param_flags(parser, defaults=(0.01, 0.9, 0.1, 3.0)):
    eps, lam, p, alpha = defaults
    parser.add_argument("--epsilon", type=float, default=eps, help="leak probability")
    parser.add_argument("--lambda", dest="lam", type=float, default=lam, help="transmission probability")
    parser.add_argument("--p", type=float, default=p, help="activation probability")
    parser.add_argument("--alpha", type=float, default=alpha, help="structure intensity")


def build_parser() -> _Parser:
    parser = _Parser(prog="hiddencauses", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="sample a synthetic dataset")
    g.add_argument("--out", required=True, help="bundle directory to write")
    g.add_argument("--structure", choices=sorted(CANONICAL_STRUCTURES), help="fixed graph")
    g.add_argument("--n", type=int, help="observations (with --k-target)")
    g.add_argument("--k-target", type=int, help="true number of causes (with --n)")
    g.add_argument("--t", type=int, default=500, help="trials")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--max-tries", type=int, default=100_000, help="rejection budget")
    _add_param_flags(g)

    f = sub.add_parser("fit", help="run one sampler chain")
    f.add_argument("--data", required=True, help="X.csv or bundle directory")
    f.add_argument("--out", required=True, help="output directory")
    f.add_argument("--config", help="JSON file of flag defaults")
    f.add_argument("--sampler", choices=("gibbs", "rjmcmc"), default="gibbs")
    f.add_argument("--iterations", type=int, default=500)
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--init", choices=("empty", "random10"), default="empty")
    f.add_argument("--infer-hypers", action="store_true",
                   help="resample lambda, epsilon, p (and alpha under gibbs) each sweep")
    f.add_argument("--mh-step", type=float, default=0.05, help="random-walk half-width")
    f.add_argument("--burn-in", type=int, default=0, help="iterations excluded from summaries")
    f.add_argument("--prior-k", choices=("poisson", "geometric", "uniform"), default="poisson",
                   help="prior over K (rjmcmc only)")
    f.add_argument("--prior-k-mean", type=float, default=None,
                   help="mean of the shifted-Poisson K prior (default alpha * H_N)")
    f.add_argument("--prior-k-q", type=float, default=0.5, help="geometric K prior parameter")
    f.add_argument("--k-max", type=int, default=50, help="uniform K prior cap")
    f.add_argument("--plain-theta-denominator", action="store_true",
                   help="divide the finite z conditional by N instead of N + alpha/K")
    f.add_argument("--duplicate-row-factor", action="store_true",
                   help="include the duplicate-activation-row factor in birth/death ratios")
    f.add_argument("--timing", action="store_true",
                   help="record per-iteration wall time (breaks byte-identical traces)")
    _add_param_flags(f)

    e = sub.add_parser("eval", help="score a fit against ground truth")
    e.add_argument("--summary", required=True, help="summary.json from fit")
    e.add_argument("--truth", required=True, help="bundle directory with Z.csv")
    e.add_argument("--out", help="write metrics JSON here (default stdout only)")

    r = sub.add_parser("replicate", help="run a multi-condition study")
    r.add_argument("figure", choices=("fig3", "fig4"),
                   help="fig3: dimension recovery; fig4: structure recovery")
    r.add_argument("--out", required=True, help="output directory")
    r.add_argument("--datasets", type=int, default=10, help="datasets per condition")
    r.add_argument("--iterations", type=int, default=500)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    r.add_argument("--n", type=int, default=6, help="observations (fig3)")
    r.add_argument("--t", type=int, default=None,
                   help="trials (default 500 for fig3, 150 for fig4)")
    r.add_argument("--k-range", default="1,2,3,4", help="true dimensions (fig3)")
    r.add_argument("--structures", default=",".join(sorted(CANONICAL_STRUCTURES)),
                   help="comma-separated structure names (fig4)")
    r.add_argument("--samplers", default="gibbs,rjmcmc")
    r.add_argument("--inits", default=None,
                   help="default: empty,random10 for fig3; empty for fig4")
    r.add_argument("--checkpoints", default=",".join(str(c) for c in experiments.DEFAULT_CHECKPOINTS),
                   help="iterations at which fig4 errors are reported")
    _add_param_flags(r)
    return parser


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_generate(args) -> int:
    rng = np.random.default_rng(args.seed)
    params = ModelParams(epsilon=args.epsilon, lam=args.lam, p=args.p, alpha=args.alpha)
    if args.structure is not None:
        if args.n is not None or args.k_target is not None:
            raise UsageError("--structure excludes --n/--k-target")
        Z = canonical_structure(args.structure)
        origin = {"structure": args.structure}
    else:
        if args.n is None or args.k_target is None:
            raise UsageError("need --structure, or both --n and --k-target")
        Z = rejection_sample_Z(args.n, args.k_target, params.alpha, rng, args.max_tries)
        origin = {"n": args.n, "k_target": args.k_target, "max_tries": args.max_tries}
    data = generate_dataset(Z, args.t, params, rng)
    manifest = {
        "command": "generate",
        "seed": args.seed,
        "t": args.t,
        "params": {"epsilon": params.epsilon, "lambda": params.lam, "p": params.p,
                   "alpha": params.alpha},
        **origin,
    }
    dataio.write_dataset_bundle(args.out, data, manifest)
    print(f"wrote bundle to {args.out} (X is {data.X.shape[0]}x{data.X.shape[1]}, "
          f"true K = {Z.shape[1]})")
    return EXIT_OK


def _load_config(path) -> dict:
    with open(path) as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise ValueError(f"{path}: config must be a JSON object")
    return cfg


def cmd_fit(args, argv) -> int:
    cfg_fields = set(ExperimentConfig.__dataclass_fields__)
    overrides = {}
    if args.config:
        for key, value in _load_config(args.config).items():
            key = key.replace("-", "_")
            if key == "lambda":
                key = "lam"
            if key not in cfg_fields:
                raise ValueError(f"{args.config}: unknown setting {key!r}")
            if key in ("data", "out"):
                raise ValueError(f"{args.config}: {key} must be given as a flag")
            overrides[key] = value
    # explicit flags beat config-file values
    explicit = _explicit_dests(argv)
    for name in cfg_fields:
        if name in ("data", "out"):
            continue
        if name in explicit or name not in overrides:
            overrides[name] = getattr(args, name)
    config = ExperimentConfig(data=args.data, out=args.out, **overrides)

    X = dataio.load_observations(config.data)
    params = config.params()
    k_prior = None
    if config.sampler == "rjmcmc":
        if config.prior_k == "poisson":
            mean = config.prior_k_mean
            k_prior = (
                make_k_prior("poisson", mean=mean)
                if mean is not None
                else default_k_prior(params.alpha, X.shape[0])
            )
        else:
            k_prior = make_k_prior(config.prior_k, q=config.prior_k_q, k_max=config.k_max)

    result = run_chain(
        X,
        sampler=config.sampler,
        iterations=config.iterations,
        params=params,
        seed=config.seed,
        init=config.init,
        infer_hypers=config.infer_hypers,
        mh_step=config.mh_step,
        k_prior=k_prior,
        predictive=not config.plain_theta_denominator,
        duplicate_row_factor=config.duplicate_row_factor,
        burn_in=config.burn_in,
        timing=config.timing,
    )

    out = dataio.ensure_dir(config.out)
    dataio.write_trace(
        out / "trace.jsonl",
        [rec.to_dict(include_timing=config.timing) for rec in result.trace],
    )
    summary = result.summary
    final = result.state
    payload = {
        "sampler": config.sampler,
        "seed": config.seed,
        "iterations": config.iterations,
        "burn_in": config.burn_in,
        "sample_count": summary.sample_count,
        "mean_kplus": summary.mean_kplus,
        "mean_k": summary.mean_k,
        "mean_zzt": summary.mean_zzt.tolist(),
        "final": {
            "kplus": final.kplus,
            "k": final.k,
            "params": {
                "epsilon": final.params.epsilon,
                "lambda": final.params.lam,
                "p": final.params.p,
                "alpha": final.params.alpha,
            },
        },
        "mh_acceptance": result.mh_acceptance,
        "elapsed_ms": result.elapsed_ms,
        "config": {name: getattr(config, name) for name in sorted(cfg_fields)},
    }
    with open(out / "summary.json", "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    if final.Z.size:
        dataio.write_matrix_csv(out / "Z_final.csv", final.Z)
    np.savetxt(out / "zzt.csv", summary.mean_zzt, delimiter=",", fmt="%.10g")
    print(f"fit complete: E[K+] = {summary.mean_kplus:.3f} over "
          f"{summary.sample_count} retained iterations; outputs in {out}")
    return EXIT_OK


def _explicit_dests(argv) -> set[str]:
    """Dest names of options the user actually typed (for config precedence)."""
    explicit = set()
    for token in argv:
        if not token.startswith("--"):
            continue
        name = token[2:].split("=", 1)[0].replace("-", "_")
        if name == "lambda":
            name = "lam"
        explicit.add(name)
    return explicit


def cmd_eval(args) -> int:
    with open(args.summary) as fh:
        summary = json.load(fh)
    bundle = dataio.read_dataset_bundle(args.truth)
    if bundle.truth is None:
        raise ValueError(f"{args.truth}: bundle has no ground truth")
    Z_true = bundle.truth.Z
    mean_zzt = np.asarray(summary["mean_zzt"], dtype=np.float64)
    metrics = {
        "in_degree_error": in_degree_error(mean_zzt, Z_true),
        "structure_error": structure_error(mean_zzt, Z_true),
        "mean_kplus": summary.get("mean_kplus"),
        "mean_k": summary.get("mean_k"),
        "k_true": int(Z_true.shape[1]),
    }
    text = json.dumps(metrics, indent=2)
    print(text)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    return EXIT_OK


def _parse_int_list(text: str, what: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"bad {what}: {text!r}") from None


def cmd_replicate(args) -> int:
    out = dataio.ensure_dir(args.out)
    params = ModelParams(epsilon=args.epsilon, lam=args.lam, p=args.p, alpha=args.alpha)
    samplers = tuple(s.strip() for s in args.samplers.split(",") if s.strip())
    failures = []
    if args.figure == "fig3":
        inits = tuple(s.strip() for s in (args.inits or "empty,random10").split(",") if s.strip())
        runs = experiments.dimension_recovery_experiment(
            master_seed=args.seed,
            k_values=_parse_int_list(args.k_range, "--k-range"),
            samplers=samplers,
            inits=inits,
            datasets_per_condition=args.datasets,
            n_rows=args.n,
            n_trials=args.t if args.t is not None else 500,
            iterations=args.iterations,
            params=params,
            jobs=args.jobs,
        )
        failures = [r for r in runs if r.error]
        table = out / "fig3_results.csv"
        with open(table, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["k_true", "sampler", "init", "runs",
                             "mean_dimension", "sd_dimension", "mean_kplus", "sd_kplus"])
            conditions = sorted({(r.k_true, r.sampler, r.init) for r in runs})
            for k_true, sampler, init in conditions:
                ok = [r for r in runs
                      if (r.k_true, r.sampler, r.init) == (k_true, sampler, init) and not r.error]
                mean_d, sd_d = experiments.aggregate(r.mean_dimension for r in ok)
                mean_kp, sd_kp = experiments.aggregate(r.mean_kplus for r in ok)
                writer.writerow([k_true, sampler, init, len(ok),
                                 f"{mean_d:.4f}", f"{sd_d:.4f}", f"{mean_kp:.4f}", f"{sd_kp:.4f}"])
        print(f"wrote {table}")
    else:
        inits = tuple(s.strip() for s in (args.inits or "empty").split(",") if s.strip())
        structures = tuple(s.strip() for s in args.structures.split(",") if s.strip())
        runs = experiments.structure_recovery_experiment(
            master_seed=args.seed,
            structures=structures,
            samplers=samplers,
            inits=inits,
            datasets_per_condition=args.datasets,
            n_trials=args.t if args.t is not None else 150,
            iterations=args.iterations,
            checkpoints=_parse_int_list(args.checkpoints, "--checkpoints"),
            params=params,
            jobs=args.jobs,
        )
        failures = [r for r in runs if r.error]
        table = out / "fig4_results.csv"
        with open(table, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["structure", "sampler", "init", "iteration", "runs",
                             "mean_in_degree_error", "sd_in_degree_error",
                             "mean_structure_error", "sd_structure_error"])
            conditions = sorted({(r.structure, r.sampler, r.init) for r in runs})
            for structure, sampler, init in conditions:
                ok = [r for r in runs
                      if (r.structure, r.sampler, r.init) == (structure, sampler, init)
                      and not r.error]
                if not ok:
                    continue
                for ci, checkpoint in enumerate(ok[0].checkpoints):
                    mean_i, sd_i = experiments.aggregate(r.in_degree_errors[ci] for r in ok)
                    mean_s, sd_s = experiments.aggregate(r.structure_errors[ci] for r in ok)
                    writer.writerow([structure, sampler, init, checkpoint, len(ok),
                                     f"{mean_i:.4f}", f"{sd_i:.4f}",
                                     f"{mean_s:.4f}", f"{sd_s:.4f}"])
        print(f"wrote {table}")
    for run in failures:
        print(f"run failed: {run}", file=sys.stderr)
    if failures and len(failures) == len(runs):
        return EXIT_DATA
    return EXIT_OK


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "generate":
            return cmd_generate(args)
        if args.command == "fit":
            return cmd_fit(args, argv)
        if args.command == "eval":
            return cmd_eval(args)
        return cmd_replicate(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DegenerateModelError as exc:
        print(f"model degeneracy: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except RejectionError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (OSError, ValueError, KeyError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
