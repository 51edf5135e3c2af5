"""Seeded Monte Carlo experiments over replicates of the estimator.

Each replicate ``(n, i)`` draws from its own stream, seeded by the master
seed, ``n`` and ``i`` only, so results do not depend on worker count or
evaluation order. Workers rebuild the model from its JSON description.
"""
import csv
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import stats

from ..errors import ConfigurationError, DegenerateBandError
from ..inverse import inverse_estimator, jump_structure, max_spacing
from ..lcm import grenander_type
from ..limitlaw import (
    OracleDerivatives,
    PluginDerivatives,
    TailConstants,
    c_fl,
    confidence_band,
    gumbel_cdf,
    mu_n,
    rate_ratio,
    standardize_inverse,
    sup_statistic_inverse_scale,
)
from ..models import SeedSpec, model_from_config, sample
from ..stepfn import sup_abs_diff
from ..zeta import (
    ZetaSimConfig,
    estimate_density,
    fit_tail_constants,
    simulate_zeta0,
    simulate_zeta_paths,
    sup_zeta_interval_prob,
)
from .config import (
    BASE_COLUMNS,
    EXTRA_COLUMNS,
    ReplicateRecord,
    coverage_column,
    window_from_spec,
)

log = logging.getLogger(__name__)

RATE_ENVELOPE = (0.5, 1.6)


def stream_seed(master, n):
    """Per-``n`` seed; the replicate index is appended by :class:`SeedSpec`."""
    return int(np.random.SeedSequence([int(master), int(n)]).generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class _Task:
    model: dict
    window: dict
    n: int
    seed: int
    index: int
    tails: tuple  # (kappa, lambda) or ()
    levels: tuple
    modes: tuple


def _rice_variance(F):
    y = np.diff(F.y) * (F.t.size - 1)
    return float(np.sum(np.diff(y) ** 2) / (2 * (y.size - 1)))


def _run_task(task):
    model = model_from_config(task.model)
    window = window_from_spec(task.window, task.n)
    n = task.n
    F = sample(model, n, SeedSpec(task.seed, task.index))
    fhat, _ = grenander_type(F)
    js = jump_structure(fhat)
    U = inverse_estimator(fhat)
    spacing = max_spacing(js)
    rr = rate_ratio(fhat, model, window, n)
    rec = ReplicateRecord(
        n=n, replicate=task.index, T_n=None,
        S_n=sup_statistic_inverse_scale(U, model, window, n),
        max_spacing=spacing, N_n=js.n_flat,
        rate_ratio=rr, scaled_spacing=(n / math.log(n)) ** (1 / 3) * spacing,
        sup_raw=sup_abs_diff(fhat, model.f, window.lo, window.hi),
    )
    if task.tails:
        tails = TailConstants(*task.tails)
        C = c_fl(window, model)
        L = math.log(n)
        rec.T_n = L * (rr - mu_n(n, C, tails))
        rec.S_std = standardize_inverse(rec.S_n, n, C, tails)
        for mode in task.modes:
            if mode == "oracle":
                deriv = OracleDerivatives(model)
            else:
                s2 = _rice_variance(F) if model.kind == "regression" else None
                deriv = PluginDerivatives.from_estimate(fhat, n, s2)
            for level in task.levels:
                try:
                    band = confidence_band(fhat, deriv, window, n, level, C, tails)
                    hit = band.covers(model.f)
                except DegenerateBandError:
                    hit = False
                rec.coverage[coverage_column(level, mode)] = hit
    return rec


def _modes(band_mode):
    return ("oracle", "plugin") if band_mode == "both" else (band_mode,)


def collect_records(cfg, tails=None, levels=(), modes=(), workers=None):
    """Run every ``(n, replicate)`` task and return records sorted by ``(n, replicate)``."""
    tt = (tails.kappa, tails.lam) if tails is not None else ()
    tasks = [
        _Task(cfg.model, cfg.window, n, stream_seed(cfg.seed, n), i, tt, tuple(levels), tuple(modes))
        for n in cfg.n for i in range(cfg.replicates)
    ]
    workers = cfg.workers if workers is None else workers
    if workers == 1:
        recs = [_run_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            recs = list(pool.map(_run_task, tasks, chunksize=max(1, len(tasks) // (8 * workers))))
    return sorted(recs, key=lambda r: (r.n, r.replicate))


def record_columns(levels=(), modes=()):
    cols = list(BASE_COLUMNS) + list(EXTRA_COLUMNS)
    for mode in modes:
        cols += [coverage_column(p, mode) for p in levels]
    return cols


def write_records(path, records, columns):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in records:
            w.writerow(r.row(columns))


def write_json(path, obj):
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _by_n(records):
    groups = {}
    for r in records:
        groups.setdefault(r.n, []).append(r)
    return groups


def _resolve_tails(cfg, tails, out):
    if tails is not None:
        return tails
    if cfg.tails is None:
        raise ConfigurationError("experiment needs tail constants (file, inline or zeta-fit)")
    if cfg.tails["source"] == "zeta-fit":
        zout = os.path.join(out, "zeta") if out else None
        return run_zeta_pipeline(cfg.zeta, zout)[0]
    return cfg.load_tails()


def run_limit_experiment(cfg, tails=None, out=None, workers=None):
    """Distribution of the standardized sup statistics across replicates.

    Returns
    -------
    records : list of ReplicateRecord
    summary : dict
        Per ``n``: KS distance of ``T_n`` to the Gumbel law, medians, the
        fraction of rate ratios inside the envelope, and the KS distance
        between ``T_n`` and the standardized inverse statistic.
    """
    tails = _resolve_tails(cfg, tails, out)
    model = cfg.build_model()
    records = collect_records(cfg, tails, workers=workers)
    per_n = {}
    for n, rs in _by_n(records).items():
        T = np.array([r.T_n for r in rs])
        S = np.array([r.S_std for r in rs])
        rr = np.array([r.rate_ratio for r in rs])
        C = c_fl(cfg.build_window(n), model)
        per_n[str(n)] = {
            "M": len(rs),
            "C": C,
            "mu_n": mu_n(n, C, tails),
            "median_T": float(np.median(T)),
            "ks_gumbel": float(stats.kstest(T, gumbel_cdf).statistic),
            "median_S_std": float(np.median(S)),
            "ks_T_vs_S_std": float(stats.ks_2samp(T, S).statistic),
            "median_rate_ratio": float(np.median(rr)),
            "rate_envelope_fraction": float(np.mean((rr >= RATE_ENVELOPE[0]) & (rr <= RATE_ENVELOPE[1]))),
            "median_N_n": float(np.median([r.N_n for r in rs])),
        }
    ns = sorted(int(k) for k in per_n)
    summary = {
        "experiment": "limit",
        "tails": tails.to_dict(),
        "gumbel_median": -math.log(math.log(2)),
        "per_n": per_n,
        "ks_increase": per_n[str(ns[-1])]["ks_gumbel"] - per_n[str(ns[0])]["ks_gumbel"],
    }
    if out:
        os.makedirs(out, exist_ok=True)
        write_records(os.path.join(out, "records.csv"), records, record_columns())
        write_json(os.path.join(out, "summary.json"), summary)
        _write_ecdf(os.path.join(out, "ecdf.csv"), records)
    return records, summary


def _write_ecdf(path, records):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n", "T_n", "ecdf", "gumbel_cdf"])
        for n, rs in _by_n(records).items():
            T = np.sort([r.T_n for r in rs])
            for k, x in enumerate(T, 1):
                w.writerow([n, repr(float(x)), repr(k / T.size), repr(float(gumbel_cdf(x)))])


def run_spacing_study(cfg, out=None, workers=None):
    """Quantiles of scaled max spacing and of ``N_n`` per ``n``; log-log slope of median ``N_n``."""
    records = collect_records(cfg, workers=workers)
    qs = (0.5, 0.9, 0.95)
    per_n = {}
    for n, rs in _by_n(records).items():
        sc = np.array([r.scaled_spacing for r in rs])
        nf = np.array([r.N_n for r in rs])
        per_n[str(n)] = {
            "M": len(rs),
            "scaled_spacing_quantiles": {repr(q): float(np.quantile(sc, q)) for q in qs},
            "N_n_quantiles": {repr(q): float(np.quantile(nf, q)) for q in qs},
            "min_N_n": int(nf.min()),
        }
    ns = sorted(int(k) for k in per_n)
    q95 = [per_n[str(n)]["scaled_spacing_quantiles"]["0.95"] for n in ns]
    med = [per_n[str(n)]["N_n_quantiles"]["0.5"] for n in ns]
    slope = float(np.polyfit(np.log(ns), np.log(med), 1)[0]) if len(ns) > 1 else float("nan")
    summary = {
        "experiment": "spacing",
        "per_n": per_n,
        "q95_ratio": max(q95) / min(q95),
        "N_n_loglog_slope": slope,
    }
    if out:
        os.makedirs(out, exist_ok=True)
        write_records(os.path.join(out, "records.csv"), records, record_columns())
        write_json(os.path.join(out, "summary.json"), summary)
    return records, summary


def run_band_study(cfg, levels=None, tails=None, out=None, workers=None):
    """Empirical simultaneous coverage of the band per mode, level and ``n``."""
    tails = _resolve_tails(cfg, tails, out)
    levels = tuple(sorted(cfg.levels if levels is None else levels))
    modes = _modes(cfg.band_mode)
    records = collect_records(cfg, tails, levels, modes, workers=workers)
    coverage = {}
    monotone = True
    for mode in modes:
        coverage[mode] = {}
        for n, rs in _by_n(records).items():
            cov = [float(np.mean([r.coverage[coverage_column(p, mode)] for r in rs])) for p in levels]
            coverage[mode][str(n)] = {repr(p): c for p, c in zip(levels, cov)}
            monotone &= bool(np.all(np.diff(cov) >= 0))
    summary = {
        "experiment": "band",
        "tails": tails.to_dict(),
        "levels": list(levels),
        "coverage": coverage,
        "monotone_in_level": monotone,
    }
    if out:
        os.makedirs(out, exist_ok=True)
        write_records(os.path.join(out, "records.csv"), records, record_columns(levels, modes))
        write_json(os.path.join(out, "summary.json"), summary)
    return records, summary


def run_zeta_pipeline(zcfg, out=None):
    """Simulate, estimate the density of ``zeta(0)``, fit the tails and check extremes.

    Returns
    -------
    tails : TailConstants
        Fitted on the configured grid step.
    report : dict
        Refinement fit and its relative changes, sd against the fine-grid
        oracle, and the extremal-limit table.
    """
    h = zcfg.step
    base = ZetaSimConfig(zcfg.half_width, h, 0.0, zcfg.seed)
    log.info("zeta(0): %d coupled paths on steps %g and %g", zcfg.n_paths, h, h / 2)
    z = simulate_zeta0(base, zcfg.n_paths, refine=True)
    dens = estimate_density(z[h], zcfg.bin_width, lattice=h, min_samples=zcfg.min_samples)
    dens_fine = estimate_density(z[h / 2], zcfg.bin_width, lattice=h / 2, min_samples=zcfg.min_samples)
    tails = fit_tail_constants(dens, zcfg.fit_window, zcfg.min_count)
    tails_fine = fit_tail_constants(dens_fine, zcfg.fit_window, zcfg.min_count)

    oracle_cfg = ZetaSimConfig(2 * zcfg.half_width, h / 4, 0.0, zcfg.seed)
    log.info("sd oracle: %d paths on step %g", zcfg.oracle_paths, h / 4)
    z_or = simulate_zeta0(oracle_cfg, zcfg.oracle_paths, stream=1)[h / 4]
    sd_oracle = float(np.std(z_or))

    dmax = max(zcfg.deltas)
    paths = simulate_zeta_paths(ZetaSimConfig(zcfg.half_width, h, dmax, zcfg.seed), zcfg.extremal_paths)
    u = zcfg.extremal_u
    mu_u = float(dens(u))
    rows = []
    for delta in (0.0,) + tuple(zcfg.deltas):
        p = sup_zeta_interval_prob(u, delta, paths)
        ratio = math.log(p) / (-2 * delta * mu_u) if delta > 0 and 0 < p < 1 else None
        rows.append({"u": u, "delta": delta, "p_hat": p, "mu_hat_u": mu_u, "log_ratio": ratio,
                     "abs_error": None if ratio is None else abs(ratio - 1)})
    report = {
        "tails": tails.to_dict(),
        "tails_refined": tails_fine.to_dict(),
        "kappa_rel_change": abs(tails_fine.kappa - tails.kappa) / abs(tails.kappa),
        "lambda_rel_change": abs(tails_fine.lam - tails.lam) / abs(tails.lam),
        "sd": dens.sd,
        "sd_samples": dens.samples_sd,
        "sd_oracle": sd_oracle,
        "sd_rel_error": abs(dens.sd - sd_oracle) / sd_oracle,
        "p_abs_le_u": float(np.mean(np.abs(z[h]) <= u)),
        "extremal": rows,
        "config": zcfg.to_dict(),
    }
    if out:
        os.makedirs(out, exist_ok=True)
        tab = dens.table()
        with open(os.path.join(out, "density.csv"), "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "mu_hat", "count"])
            for t, m, c in zip(tab["t"], tab["mu_hat"], tab["count"]):
                w.writerow([repr(float(t)), repr(float(m)), int(c)])
        with open(os.path.join(out, "sup_prob.csv"), "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            keys = ["u", "delta", "p_hat", "mu_hat_u", "log_ratio", "abs_error"]
            w.writerow(keys)
            for r in rows:
                w.writerow(["" if r[k] is None else repr(float(r[k])) for k in keys])
        write_json(os.path.join(out, "tails.json"), tails.to_dict())
        write_json(os.path.join(out, "summary.json"), report)
    return tails, report
