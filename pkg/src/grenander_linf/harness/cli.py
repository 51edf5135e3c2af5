"""Command-line entry point.

Subcommands::

    estimate    one dataset -> slope estimate, inverse and jump structure
    limit-sim   replicate study of the standardized sup statistics
    spacings    jump-spacing and flat-part count study
    band        simultaneous band coverage study
    zeta-sim    limiting-process simulation and tail-constant fit
"""
import argparse
import json
import logging
import os
import sys
import time

import numpy as np

from ..errors import ConfigurationError, DomainError
from ..inverse import inverse_estimator, jump_structure
from ..lcm import grenander_type
from ..models import SeedSpec, sample
from ..stepfn import CadlagStep
from .config import ExperimentConfig, ZetaPipelineConfig
from .experiments import (
    run_band_study,
    run_limit_experiment,
    run_spacing_study,
    run_zeta_pipeline,
    write_json,
)

log = logging.getLogger("grenander_linf")

SMOKE = {"n": [1000, 2000], "replicates": 20}


def _load_config(args):
    d = {}
    if args.config:
        with open(args.config) as fh:
            d = json.load(fh)
    if args.seed is not None:
        d["seed"] = args.seed
    if args.smoke:
        d.update(SMOKE)
        d["zeta"] = ZetaPipelineConfig.smoke(d.get("seed", 0)).to_dict()
        d.setdefault("tails", {"source": "zeta-fit"})
    if getattr(args, "workers", None):
        d["workers"] = args.workers
    if args.out:
        d["out"] = args.out
    return ExperimentConfig.from_dict(d)


def _prepare(cfg):
    os.makedirs(cfg.out, exist_ok=True)
    cfg.save(os.path.join(cfg.out, "config.json"))


def cmd_estimate(args):
    if args.data:
        y = np.loadtxt(args.data, dtype=float, ndmin=1)
        n_obs = int(y.size)
        if args.kind == "density":
            F = CadlagStep.empirical(np.sort(y))
        else:
            F = CadlagStep.partial_sums(y)
    else:
        cfg = _load_config(args)
        model = cfg.build_model()
        n_obs = args.n
        F = sample(model, n_obs, SeedSpec(cfg.seed, 0))
    fhat, env = grenander_type(F)
    out = {
        "n": n_obs,
        "envelope": env.to_dict(),
        "fhat": fhat.to_dict(),
        "Uhat": inverse_estimator(fhat).to_dict(),
        "jumps": jump_structure(fhat).to_dict(),
    }
    os.makedirs(args.out or ".", exist_ok=True)
    path = os.path.join(args.out or ".", "estimate.json")
    write_json(path, out)
    print(f"{out['jumps']['n_flat']} flat parts -> {path}")


def cmd_limit(args):
    cfg = _load_config(args)
    _prepare(cfg)
    _, summary = run_limit_experiment(cfg, out=cfg.out)
    for n, s in summary["per_n"].items():
        print(f"n={n}: median T={s['median_T']:.4f} KS={s['ks_gumbel']:.4f} "
              f"median ratio={s['median_rate_ratio']:.4f}")


def cmd_spacings(args):
    cfg = _load_config(args)
    _prepare(cfg)
    _, summary = run_spacing_study(cfg, out=cfg.out)
    print(f"q95 ratio {summary['q95_ratio']:.3f}, N_n slope {summary['N_n_loglog_slope']:.3f}")


def cmd_band(args):
    cfg = _load_config(args)
    _prepare(cfg)
    _, summary = run_band_study(cfg, out=cfg.out)
    for mode, by_n in summary["coverage"].items():
        for n, cov in by_n.items():
            print(f"{mode} n={n}: " + " ".join(f"{p}:{c:.3f}" for p, c in cov.items()))


def cmd_zeta(args):
    d = {}
    if args.config:
        with open(args.config) as fh:
            d = json.load(fh)
        d = d.get("zeta", d)
    zcfg = ZetaPipelineConfig.smoke() if args.smoke else ZetaPipelineConfig.from_dict(d)
    if args.seed is not None:
        zcfg.seed = args.seed
    out = args.out or "out"
    t0 = time.perf_counter()
    tails, report = run_zeta_pipeline(zcfg, out)
    print(f"kappa={tails.kappa:.4f} lambda={tails.lam:.4f} sd={report['sd']:.4f} "
          f"({time.perf_counter() - t0:.1f} s) -> {os.path.join(out, 'tails.json')}")


def build_parser():
    p = argparse.ArgumentParser(prog="grenander-linf", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="experiment config JSON")
        sp.add_argument("--seed", type=int, help="master seed (overrides config)")
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--smoke", action="store_true", help="small fast configuration")
        return sp

    est = common(sub.add_parser("estimate", help="estimate from one dataset"))
    est.add_argument("--data", help="text file with one observation per line")
    est.add_argument("--kind", choices=("density", "regression"), default="density")
    est.add_argument("--n", type=int, default=1000, help="sample size when simulating")
    est.set_defaults(func=cmd_estimate)

    for name, fn, text in (("limit-sim", cmd_limit, "Gumbel limit study"),
                           ("spacings", cmd_spacings, "jump spacing study"),
                           ("band", cmd_band, "band coverage study")):
        sp = common(sub.add_parser(name, help=text))
        sp.add_argument("--workers", type=int, help="worker processes")
        sp.set_defaults(func=fn)

    z = common(sub.add_parser("zeta-sim", help="limiting-process pipeline"))
    z.set_defaults(func=cmd_zeta)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(name)s %(message)s")
    try:
        args.func(args)
    except (ConfigurationError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
