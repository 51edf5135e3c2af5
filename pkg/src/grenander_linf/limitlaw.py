"""Normalizations, standardized sup-norm statistics, Gumbel law and bands.

Notation: ``L = log n``. The function-scale statistic is

    T_n = L * { (n/L)^(1/3) * sup_t |fhat(t) - f(t)| / |2 f'(t) L'(t)|^(1/3) - mu_n }

and the inverse-scale statistic is

    S_n = n^(1/3) * sup_a A(a) |U_hat(a) - g(a)|,

standardized as ``L * {(2/L)^(1/3) S_n - mu_n}``. Both are asymptotically
standard Gumbel.
"""
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import quad
from scipy.special import ndtr

from .errors import DegenerateBandError, DomainError
from .stepfn import sup_abs_diff

__all__ = [
    "StatisticWindow",
    "TailConstants",
    "norm_A",
    "norm_B",
    "c_fl",
    "mu_n",
    "a_n",
    "b_n",
    "u_n_expansion",
    "standardize_inverse",
    "standardize_affine",
    "rate_ratio",
    "sup_statistic_function_scale",
    "sup_statistic_inverse_scale",
    "gumbel_cdf",
    "gumbel_quantile",
    "OracleDerivatives",
    "PluginDerivatives",
    "ConfidenceBand",
    "confidence_band",
]


@dataclass(frozen=True)
class StatisticWindow:
    """Interval ``(u + alpha_n, v - beta_n]`` a supremum is taken over.

    ``growth_ok`` records the caller's claim that the offsets dominate
    ``n^(-1/3) (log n)^(-2/3)``; it is not verifiable for a single ``n``.
    """

    u: float
    v: float
    alpha_n: float = 0.0
    beta_n: float = 0.0
    growth_ok: bool = True

    def __post_init__(self):
        if not 0.0 <= self.u < self.v <= 1.0:
            raise DomainError("need 0 <= u < v <= 1")
        if self.alpha_n < 0 or self.beta_n < 0:
            raise DomainError("offsets must be nonnegative")
        if not self.lo < self.hi:
            raise DomainError("window (u + alpha_n, v - beta_n] is empty")

    @property
    def lo(self):
        return self.u + self.alpha_n

    @property
    def hi(self):
        return self.v - self.beta_n

    @classmethod
    def default(cls, n, u=0.0, v=1.0, growth=1.0):
        """Offsets ``growth * (log n)^(1/2) * n^(-1/3) (log n)^(-2/3)``."""
        L = math.log(n)
        off = growth * math.sqrt(L) * n ** (-1 / 3) * L ** (-2 / 3)
        return cls(u, v, off if u == 0.0 else 0.0, off if v == 1.0 else 0.0)


@dataclass(frozen=True)
class TailConstants:
    """``kappa``, ``lambda`` of ``mu(t) ~ 2 lambda |t| exp(-2|t|^3/3 - kappa |t|)``."""

    kappa: float
    lam: float
    provenance: str = "supplied"
    diagnostics: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not self.lam > 0:
            raise DomainError("lambda must be positive")
        if self.kappa < 0:
            raise DomainError("kappa must be nonnegative")

    def density(self, t):
        """The tail expansion itself, as a function of ``t``."""
        t = np.abs(np.asarray(t, dtype=float))
        return 2 * self.lam * t * np.exp(-2 * t**3 / 3 - self.kappa * t)

    def to_dict(self):
        d = {"kappa": self.kappa, "lambda": self.lam, "provenance": self.provenance}
        if self.diagnostics:
            d["diagnostics"] = self.diagnostics
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(float(d["kappa"]), float(d["lambda"]), d.get("provenance", "file"),
                   d.get("diagnostics", {}))


def _in_range(a, model):
    a = np.asarray(a, dtype=float)
    if np.any((a < model.f1) | (a > model.f0)):
        raise DomainError("level outside [f(1), f(0)]")
    return a


def norm_A(a, model):
    """``A(a) = |f'(g(a))|^(2/3) / (4 L'(g(a)))^(1/3)`` for ``a`` in ``[f(1), f(0)]``."""
    s = model.g(_in_range(a, model))
    return np.abs(model.fprime(s)) ** (2 / 3) / (4 * model.Lprime(s)) ** (1 / 3)


def norm_B(t, model):
    """``B(t) = (4 |f'(t)| L'(t))^(-1/3)``."""
    t = np.asarray(t, dtype=float)
    return (4 * np.abs(model.fprime(t)) * model.Lprime(t)) ** (-1 / 3)


def c_fl(window, model):
    """``C_{f,L} = 2 int_u^v (|f'|^2 / L')^(1/3) dt`` by adaptive quadrature."""
    val, _ = quad(
        lambda t: (model.fprime(t) ** 2 / model.Lprime(t)) ** (1 / 3),
        window.u, window.v, epsabs=0.0, epsrel=1e-10, limit=200,
    )
    return 2 * val


def _logn(n):
    if n < 3:
        raise DomainError("n must be at least 3")
    return math.log(n)


def mu_n(n, C, tails):
    """Centering ``1 - kappa / (2^(1/3) L^(2/3)) + (log L / 3 + log(lambda C)) / L``."""
    L = _logn(n)
    if not C > 0:
        raise DomainError("C must be positive")
    return (1 - tails.kappa / (2 ** (1 / 3) * L ** (2 / 3))
            + (math.log(L) / 3 + math.log(tails.lam * C)) / L)


def a_n(n):
    return 2 ** (1 / 3) * _logn(n) ** (2 / 3)


def b_n(n, C, tails):
    L = _logn(n)
    return (L ** (1 / 3) / 2 ** (1 / 3)
            - tails.kappa / (4 * L) ** (1 / 3)
            + 4 ** (1 / 3) * math.log(L) / (6 * L ** (2 / 3))
            + math.log(tails.lam * C) / (2 ** (1 / 3) * L ** (2 / 3)))


def u_n_expansion(x, n, C, tails):
    """Threshold ``u_n = x / a_n + b_n`` at which ``P(S_n <= u_n) -> exp(-e^-x)``."""
    return x / a_n(n) + b_n(n, C, tails)


def standardize_affine(S, n, C, tails):
    """``a_n (S - b_n)``."""
    return a_n(n) * (S - b_n(n, C, tails))


def standardize_inverse(S, n, C, tails):
    """``L { (2/L)^(1/3) S - mu_n }``; equal to :func:`standardize_affine`."""
    L = _logn(n)
    return L * ((2 / L) ** (1 / 3) * S - mu_n(n, C, tails))


def gumbel_cdf(x):
    return np.exp(-np.exp(-np.asarray(x, dtype=float)))


def gumbel_quantile(p):
    p = np.asarray(p, dtype=float)
    if np.any((p <= 0) | (p >= 1)):
        raise DomainError("p must lie in (0, 1)")
    q = -np.log(-np.log(p))
    return float(q) if q.ndim == 0 else q


def _fn_weight(model):
    def w(t):
        return np.abs(2 * model.fprime(t) * model.Lprime(t)) ** (-1 / 3)
    return w


def rate_ratio(fhat, model, window, n):
    """``(n/L)^(1/3) sup_{(lo, hi]} |fhat - f| / |2 f' L'|^(1/3)``."""
    L = _logn(n)
    sup = sup_abs_diff(fhat, model.f, window.lo, window.hi, weight=_fn_weight(model))
    return (n / L) ** (1 / 3) * sup


def sup_statistic_function_scale(fhat, model, window, n, tails, C=None):
    """Standardized sup-norm error ``T_n`` of the slope estimator."""
    C = c_fl(window, model) if C is None else C
    return _logn(n) * (rate_ratio(fhat, model, window, n) - mu_n(n, C, tails))


def sup_statistic_inverse_scale(Uhat, model, window, n):
    """``S_n = n^(1/3) sup_{a in [f(hi), f(lo)]} A(a) |U_hat(a) - g(a)|``."""
    a_lo = float(model.f(window.hi))
    a_hi = float(model.f(window.lo))
    sup = sup_abs_diff(Uhat, model.g, a_lo, a_hi,
                       weight=lambda a: norm_A(a, model), include_left=True)
    return n ** (1 / 3) * sup


# -- confidence bands --------------------------------------------------------


@dataclass(frozen=True, eq=False)
class OracleDerivatives:
    """True ``f'`` and ``L'`` of the model."""

    model: object

    def fprime(self, t):
        return self.model.fprime(t)

    def Lprime(self, t):
        return self.model.Lprime(t)


@dataclass(frozen=True, eq=False)
class PluginDerivatives:
    """Plug-in ``f'`` and ``L'`` from a kernel-smoothed slope estimate.

    ``fhat`` is smoothed with a Gaussian kernel of bandwidth ``h``,
    renormalized to the mass inside ``[0, 1]``; ``f'`` is the symmetric
    difference quotient of the smooth with step ``h``. ``L'`` is the smooth
    itself for densities and a constant ``sigma^2`` estimate for regression.
    """

    fhat: object
    bandwidth: float
    Lprime_const: float = None

    @classmethod
    def from_estimate(cls, fhat, n, sigma2=None):
        return cls(fhat, n ** (-1 / 5), sigma2)

    def smooth(self, t):
        t = np.asarray(t, dtype=float)
        left, right, val = self.fhat.pieces()
        h = self.bandwidth
        z = t[..., None]
        mass = ndtr((right - z) / h) - ndtr((left - z) / h)
        return (mass * val).sum(axis=-1) / mass.sum(axis=-1)

    def fprime(self, t):
        t = np.asarray(t, dtype=float)
        h = self.bandwidth
        return (self.smooth(t + h) - self.smooth(t - h)) / (2 * h)

    def Lprime(self, t):
        if self.Lprime_const is not None:
            return np.full(np.shape(t), float(self.Lprime_const))
        return self.smooth(t)


@dataclass(frozen=True, eq=False)
class ConfidenceBand:
    """``fhat(t) +/- halfwidth(t)`` on ``(lo, hi]``."""

    fhat: object
    halfwidth: Callable
    lo: float
    hi: float
    level: float
    x: float

    def lower(self, t):
        return self.fhat(t) - self.halfwidth(t)

    def upper(self, t):
        return self.fhat(t) + self.halfwidth(t)

    def covers(self, f):
        """True if ``f`` lies inside the band everywhere on ``(lo, hi]``."""
        ratio = sup_abs_diff(self.fhat, f, self.lo, self.hi,
                             weight=lambda t: 1.0 / self.halfwidth(t))
        return bool(ratio <= 1.0)

    def table(self, t):
        t = np.asarray(t, dtype=float)
        return {"t": t, "lower": self.lower(t), "estimate": self.fhat(t), "upper": self.upper(t)}


def confidence_band(fhat, derivatives, window, n, level, C, tails, check_grid=257):
    """Simultaneous band ``fhat +/- (L/n)^(1/3) |2 f' L'|^(1/3) {mu_n + x / L}``.

    ``x`` is the Gumbel quantile of ``level``. With plug-in derivatives the
    estimates are checked on a grid over the window.

    Raises
    ------
    DegenerateBandError
        If ``f'`` is not negative or ``L'`` not positive on the window.
    """
    L = _logn(n)
    x = gumbel_quantile(level)
    scale = (L / n) ** (1 / 3) * (mu_n(n, C, tails) + x / L)
    grid = np.linspace(window.lo, window.hi, check_grid)
    fp = np.asarray(derivatives.fprime(grid))
    lp = np.asarray(derivatives.Lprime(grid))
    if np.any(fp >= 0) or np.any(lp <= 0) or not scale > 0:
        raise DegenerateBandError("derivative estimates give a degenerate band")

    def halfwidth(t):
        return scale * np.abs(2 * derivatives.fprime(t) * derivatives.Lprime(t)) ** (1 / 3)

    return ConfidenceBand(fhat, halfwidth, window.lo, window.hi, float(level), x)
