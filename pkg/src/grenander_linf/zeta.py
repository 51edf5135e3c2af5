"""Simulation of ``zeta(c) = argmax_t {W(t + c) - t^2}`` on a grid.

For a path ``W`` on a grid of step ``h``, write ``s = t + c``. Then
``zeta(c) + c`` maximizes ``W(s) - s^2 + 2 c s``, which is the vertex of the
concave majorant of ``s -> W(s) - s^2`` supporting slope ``-2c``. One hull
sweep therefore gives ``zeta(c)`` for every ``c`` at once: it is piecewise
linear with slope -1 and jumps up where ``-2c`` crosses a chord slope.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, FitError, PrecisionError
from .lcm import upper_hull_indices
from .limitlaw import TailConstants

__all__ = [
    "ZetaSimConfig",
    "ZetaSample",
    "ZetaDensity",
    "simulate_zeta_path",
    "simulate_zeta_paths",
    "simulate_zeta0",
    "estimate_density",
    "fit_tail_constants",
    "sup_zeta_interval_prob",
]

BLOCK = 256  # paths per RNG stream in the batch simulator


@dataclass(frozen=True)
class ZetaSimConfig:
    """Grid description for the two-sided Brownian motion.

    ``half_width`` truncates the argmax search to ``t`` in roughly
    ``[-T, T]``; ``c_max`` is the largest drift shift of interest.
    """

    half_width: float = 6.0
    step: float = 1e-3
    c_max: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not self.step > 0:
            raise DomainError("grid step must be positive")
        if self.half_width < 4.0:
            raise DomainError("half_width must be at least 4")
        if self.c_max < 0:
            raise DomainError("c_max must be nonnegative")

    @property
    def k_left(self):
        return int(round(self.half_width / self.step))

    @property
    def k_right(self):
        return int(round((self.half_width + self.c_max) / self.step))


@dataclass(frozen=True, eq=False)
class ZetaSample:
    """``zeta(c)`` for ``c`` in ``[0, c_max]`` from one Brownian path.

    Stored as hull vertices ``s`` and the shifts ``breaks`` at which the
    maximizer moves to the next vertex.
    """

    s: np.ndarray
    breaks: np.ndarray
    c_max: float

    def at(self, c):
        c = np.asarray(c, dtype=float)
        if np.any((c < 0) | (c > self.c_max)):
            raise DomainError("shift outside [0, c_max]")
        return self.s[np.searchsorted(self.breaks, c, side="right")] - c

    def values(self, step):
        """``zeta`` on the grid ``0, step, 2 step, ..., c_max``."""
        return self.at(np.arange(int(math.floor(self.c_max / step + 1e-9)) + 1) * step)

    def sup_abs(self, delta):
        """``sup_{c in [0, delta]} |zeta(c)|``, exact for the grid path."""
        if not 0 <= delta <= self.c_max:
            raise DomainError("delta outside [0, c_max]")
        j0 = np.searchsorted(self.breaks, 0.0, side="right")
        j1 = np.searchsorted(self.breaks, delta, side="right")
        inner = self.breaks[j0:j1]
        start = np.concatenate([[0.0], inner])
        end = np.concatenate([inner, [delta]])
        v = self.s[j0:j1 + 1]
        return float(max(np.abs(v - start).max(), np.abs(v - end).max()))


def _stream(seed, tag, index):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), tag, int(index)])))


def _two_sided(rng, m, k_left, k_right, h):
    sd = math.sqrt(h)
    left = np.cumsum(rng.standard_normal((m, k_left)), axis=1) * sd
    right = np.cumsum(rng.standard_normal((m, k_right)), axis=1) * sd
    return np.concatenate([left[:, ::-1], np.zeros((m, 1)), right], axis=1)


def simulate_zeta_path(cfg, path_index=0):
    """Simulate ``zeta`` on ``[0, c_max]`` for one seeded path."""
    rng = _stream(cfg.seed, 1, path_index)
    kl, kr, h = cfg.k_left, cfg.k_right, cfg.step
    W = _two_sided(rng, 1, kl, kr, h)[0]
    s = np.arange(-kl, kr + 1) * h
    y = W - s * s
    idx = upper_hull_indices(s, y)
    vs = s[idx]
    slopes = np.diff(y[idx]) / np.diff(vs)
    return ZetaSample(vs, -slopes / 2, cfg.c_max)


def simulate_zeta_paths(cfg, n_paths, start=0):
    return [simulate_zeta_path(cfg, i) for i in range(start, start + n_paths)]


def _greatest_argmax(y):
    return y.shape[1] - 1 - np.argmax(y[:, ::-1], axis=1)


def simulate_zeta0(cfg, n_paths, refine=False, stream=0):
    """Samples of ``zeta(0)``, the greatest grid maximizer of ``W(t) - t^2``.

    With ``refine`` the paths are simulated on step ``h/2`` and the same
    paths are also read on step ``h``, giving coupled samples for both grids.
    Distinct ``stream`` tags give independent batches for the same seed.

    Returns
    -------
    dict
        Maps grid step to an array of ``n_paths`` samples.
    """
    h = cfg.step / 2 if refine else cfg.step
    k = int(round(cfg.half_width / h))
    if refine:
        k += k % 2
    s = np.arange(-k, k + 1) * h
    drift = s * s
    fine = np.empty(n_paths)
    coarse = np.empty(n_paths) if refine else None
    for b, lo in enumerate(range(0, n_paths, BLOCK)):
        m = min(BLOCK, n_paths - lo)
        y = _two_sided(_stream(cfg.seed, 2 + int(stream), b), m, k, k, h)
        y -= drift
        fine[lo:lo + m] = s[_greatest_argmax(y)]
        if refine:
            yc = y[:, ::2]
            coarse[lo:lo + m] = s[::2][_greatest_argmax(yc)]
    if refine:
        return {cfg.step: coarse, h: fine}
    return {h: fine}


@dataclass(frozen=True, eq=False)
class ZetaDensity:
    """Histogram density of ``zeta(0)`` with bins symmetric about 0.

    ``edges`` are the bin edges; bin ``i`` is centred at ``centres[i]``.
    """

    edges: np.ndarray
    counts: np.ndarray
    n_samples: int
    samples_sd: float = field(default=float("nan"))

    @property
    def width(self):
        return float(self.edges[1] - self.edges[0])

    @property
    def centres(self):
        return 0.5 * (self.edges[1:] + self.edges[:-1])

    @property
    def values(self):
        return self.counts / (self.n_samples * self.width)

    def __call__(self, t):
        return np.interp(t, self.centres, self.values, left=0.0, right=0.0)

    def integral(self):
        return float(self.values.sum() * self.width)

    @property
    def sd(self):
        p = self.counts / self.counts.sum()
        c = self.centres
        m = (p * c).sum()
        return float(math.sqrt((p * (c - m) ** 2).sum()))

    def pooled(self):
        """Bins at ``|t|`` with the two tails combined: ``(centres, counts)`` for ``t > 0``."""
        c = self.centres
        pos = c > 0
        neg = self.counts[c < 0][::-1]
        return c[pos], self.counts[pos] + neg

    def table(self):
        return {"t": self.centres, "mu_hat": self.values, "count": self.counts}


def estimate_density(samples, bin_width=0.02, lattice=None, min_samples=100_000):
    """Histogram estimate of the density of ``zeta(0)``.

    When the samples live on a lattice of step ``lattice`` the width is
    rounded up to an odd multiple of it, so bin edges fall halfway between
    lattice points and the centre bin is symmetric about 0.

    Raises
    ------
    PrecisionError
        With fewer than ``min_samples`` samples.
    """
    z = np.asarray(samples, dtype=float)
    if z.size < min_samples:
        raise PrecisionError(f"{z.size} samples, need at least {min_samples}")
    w = float(bin_width)
    if lattice:
        m = math.ceil(w / lattice)
        m += 1 - m % 2
        w = m * lattice
    kmax = int(math.ceil(np.abs(z).max() / w + 0.5)) + 1
    edges = (np.arange(-kmax, kmax + 1) + 0.5) * w
    edges = np.concatenate([[edges[0] - w], edges])
    counts, _ = np.histogram(z, edges)
    return ZetaDensity(edges, counts, int(z.size), float(z.std()))


def fit_tail_constants(density, window=(1.2, 2.2), min_count=50, min_bins=4):
    """Fit ``log mu(t) + 2t^3/3 - log(2t) = log(lambda) - kappa t`` on a tail window.

    Both tails are pooled. Bins inside ``window`` are used up to the first
    one with fewer than ``min_count`` pooled samples; the fit is weighted by
    bin counts (inverse Poisson variance of the log count).

    Raises
    ------
    FitError
        If fewer than ``min_bins`` reliable bins remain or the system is
        ill-conditioned; ``report`` carries the diagnostics.
    """
    t_lo, t_hi = window
    t, c = density.pooled()
    inside = (t >= t_lo) & (t <= t_hi)
    t, c = t[inside], c[inside]
    low = np.nonzero(c < min_count)[0]
    if low.size:
        t, c = t[:low[0]], c[:low[0]]
    report = {"window": [t_lo, t_hi], "n_bins": int(t.size), "min_count": min_count}
    if t.size < min_bins:
        raise FitError("too few reliable tail bins for the fit", report)
    mu = c / (2 * density.n_samples * density.width)
    yv = np.log(mu) + 2 * t**3 / 3 - np.log(2 * t)
    X = np.column_stack([np.ones_like(t), -t])
    sw = np.sqrt(c.astype(float))
    cond = float(np.linalg.cond(X * sw[:, None]))
    report.update(effective_window=[float(t[0]), float(t[-1])], condition=cond)
    if not np.isfinite(cond) or cond > 1e8:
        raise FitError("ill-conditioned tail fit", report)
    coef, *_ = np.linalg.lstsq(X * sw[:, None], yv * sw, rcond=None)
    resid = yv - X @ coef
    report["residual_rms"] = float(np.sqrt(np.average(resid**2, weights=c)))
    kappa, lam = float(coef[1]), float(math.exp(coef[0]))
    if kappa < 0:
        raise FitError("fitted kappa is negative", report)
    return TailConstants(kappa, lam, "zeta-fit", report)


def sup_zeta_interval_prob(u, delta, paths):
    """Empirical ``P(sup_{c in [0, delta]} |zeta(c)| <= u)`` over paths."""
    if not u > 0:
        raise DomainError("threshold must be positive")
    hits = sum(p.sup_abs(delta) <= u for p in paths)
    return hits / len(paths)
