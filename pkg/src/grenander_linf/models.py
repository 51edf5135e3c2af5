"""Test problems with analytic truth and seeded samplers for ``F_n``.

Two canonical models are shipped, both with ``f(t) = c0 - c1 t``:

* density: i.i.d. observations with density ``f`` on ``[0, 1]``; ``F_n`` is
  the empirical distribution function and ``L = F``;
* regression: ``y_i = f(i/n) + eps_i``; ``F_n`` is the partial-sum process
  and ``L(t) = sigma^2 t``.
"""
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.special import ndtri

from .errors import ConfigurationError, DomainError
from .stepfn import CadlagStep

__all__ = [
    "MonotoneModel",
    "SeedSpec",
    "linear_density_model",
    "linear_regression_model",
    "model_from_config",
    "sample",
    "sample_density",
    "sample_regression",
]


@dataclass(frozen=True, eq=False)
class MonotoneModel:
    """Analytic truth for a decreasing ``f`` on ``[0, 1]``.

    All callables accept and return numpy arrays.
    """

    kind: str
    f: Callable
    fprime: Callable
    F: Callable
    g: Callable
    L: Callable
    Lprime: Callable
    quantile: Optional[Callable] = None
    noise_sd: Optional[float] = None
    noise: str = "gaussian"
    params: dict = field(default_factory=dict)

    @property
    def f0(self):
        return float(self.f(0.0))

    @property
    def f1(self):
        return float(self.f(1.0))

    def to_config(self):
        return {"kind": self.kind, **self.params}


@dataclass(frozen=True)
class SeedSpec:
    """``(seed, replicate_index)`` fixes an entire sample."""

    seed: int
    replicate_index: int = 0

    def generator(self):
        ss = np.random.SeedSequence([int(self.seed), int(self.replicate_index)])
        return np.random.Generator(np.random.PCG64(ss))


def _const(v):
    return lambda t: np.full(np.shape(t), float(v)) if np.ndim(t) else float(v)


def _linear_parts(c0, c1):
    def f(t):
        return c0 - c1 * np.asarray(t, dtype=float)

    def g(a):
        return np.clip((c0 - np.asarray(a, dtype=float)) / c1, 0.0, 1.0)

    return f, _const(-c1), g


def linear_density_model(c0, c1):
    """Density ``f(t) = c0 - c1 t`` on ``[0, 1]``; requires ``c0 - c1/2 = 1``."""
    c0, c1 = float(c0), float(c1)
    if not c1 > 0:
        raise DomainError("c1 must be positive so that f is strictly decreasing")
    if not c0 - c1 > 0:
        raise DomainError("f(1) = c0 - c1 must be positive")
    if abs(c0 - c1 / 2 - 1.0) > 1e-12:
        raise DomainError("density must integrate to one: c0 - c1/2 = 1")
    f, fp, g = _linear_parts(c0, c1)

    def F(t):
        t = np.asarray(t, dtype=float)
        return c0 * t - 0.5 * c1 * t * t

    def quantile(u):
        # root of c0 t - c1 t^2 / 2 = u in the cancellation-free form
        u = np.asarray(u, dtype=float)
        return 2 * u / (c0 + np.sqrt(c0 * c0 - 2 * c1 * u))

    return MonotoneModel(
        kind="density", f=f, fprime=fp, F=F, g=g, L=F, Lprime=f,
        quantile=quantile, params={"c0": c0, "c1": c1},
    )


def linear_regression_model(c0, c1, sigma, noise="gaussian"):
    """Regression ``y_i = c0 - c1 i/n + eps_i`` with ``Var eps = sigma^2``.

    ``noise`` is ``"gaussian"`` or ``"uniform"`` (bounded, same variance).
    """
    c0, c1, sigma = float(c0), float(c1), float(sigma)
    if not c1 > 0:
        raise DomainError("c1 must be positive so that f is strictly decreasing")
    if not sigma > 0:
        raise DomainError("sigma must be positive")
    if noise not in ("gaussian", "uniform"):
        raise DomainError(f"unknown noise law {noise!r}")
    f, fp, g = _linear_parts(c0, c1)
    s2 = sigma * sigma

    def F(t):
        t = np.asarray(t, dtype=float)
        return c0 * t - 0.5 * c1 * t * t

    def L(t):
        return s2 * np.asarray(t, dtype=float)

    params = {"c0": c0, "c1": c1, "sigma": sigma}
    if noise != "gaussian":
        params["noise"] = noise
    return MonotoneModel(
        kind="regression", f=f, fprime=fp, F=F, g=g, L=L, Lprime=_const(s2),
        noise_sd=sigma, noise=noise, params=params,
    )


def model_from_config(cfg):
    """Build a model from ``{kind, c0, c1, sigma?, noise?}``."""
    try:
        kind = cfg["kind"]
        if kind == "density":
            return linear_density_model(cfg["c0"], cfg["c1"])
        if kind == "regression":
            return linear_regression_model(
                cfg["c0"], cfg["c1"], cfg["sigma"], cfg.get("noise", "gaussian")
            )
    except KeyError as exc:
        raise ConfigurationError(f"model config missing {exc}") from None
    raise ConfigurationError(f"unknown model kind {cfg.get('kind')!r}")


def sample_density(model, n, seed, uniforms=None):
    """Empirical distribution function of ``n`` draws from a density model.

    Draws are inverse-CDF transforms of uniforms from the seeded stream.
    ``uniforms`` overrides the stream (testing hook).
    """
    if model.kind != "density":
        raise DomainError("sample_density needs a density model")
    if n < 2:
        raise DomainError("n must be at least 2")
    u = seed.generator().random(n) if uniforms is None else np.asarray(uniforms, dtype=float)
    return CadlagStep.empirical(np.sort(model.quantile(u)), n=n)


def _noise(model, u):
    if model.noise == "uniform":
        return model.noise_sd * np.sqrt(3.0) * (2.0 * u - 1.0)
    return model.noise_sd * ndtri(u)


def sample_regression(model, n, seed, noise=None):
    """Partial-sum process of ``y_i = f(i/n) + eps_i``.

    Normal errors come from inverse-CDF transforms of seeded uniforms.
    ``noise`` overrides the errors (testing hook).
    """
    if model.kind != "regression":
        raise DomainError("sample_regression needs a regression model")
    if n < 2:
        raise DomainError("n must be at least 2")
    if noise is None:
        u = seed.generator().random(n)
        # open interval keeps ndtri finite
        u = np.where(u == 0.0, np.nextafter(0.0, 1.0), u)
        eps = _noise(model, u)
    else:
        eps = np.broadcast_to(np.asarray(noise, dtype=float), (n,))
    y = model.f(np.arange(1, n + 1) / n) + eps
    return CadlagStep.partial_sums(y)


def sample(model, n, seed):
    """Dispatch to the sampler matching ``model.kind``."""
    if model.kind == "density":
        return sample_density(model, n, seed)
    return sample_regression(model, n, seed)
