"""Inverse process ``U_hat``, switch relations and jump structure."""
from dataclasses import dataclass

import numpy as np

from .errors import ConsistencyError, DomainError
from .stepfn import LeftContStep, sup_abs_diff

__all__ = [
    "JumpStructure",
    "inverse_estimator",
    "argmax_characterization",
    "jump_structure",
    "max_spacing",
    "sup_inverse_distance",
]

_TIE_RTOL = 1e-12


def inverse_estimator(fhat):
    """Generalized inverse ``U_hat(a) = sup{t in [0, 1]: fhat(t) >= a}``.

    The supremum of the empty set is 0, so ``U_hat`` is 1 below the smallest
    value of ``fhat`` and 0 above its largest one. The result is a
    nonincreasing left-continuous step function of the level ``a`` on the
    whole real line, with jumps at the values of ``fhat``.
    """
    vals = np.asarray(fhat.values)
    ends = np.concatenate([fhat.knots, [fhat.domain[1]]])
    if np.any(np.diff(vals) > 0):
        raise DomainError("fhat must be nonincreasing")
    # merge equal neighbouring pieces; a piece's right end is its last point
    keep = np.concatenate([vals[:-1] != vals[1:], [True]])
    gam = vals[keep]
    tau = ends[keep]
    # level a in (gam[i+1], gam[i]] -> tau[i]; ascending levels below
    return LeftContStep(
        gam[::-1],
        np.concatenate([tau[::-1], [0.0]]),
        domain=(-np.inf, np.inf),
        monotone=True,
    )


def argmax_characterization(Fplus, a):
    """Greatest maximizer over ``[0, 1]`` of ``F^+(t) - a t``.

    ``Fplus`` must be an upper version, which is upper semicontinuous, so the
    maximum is attained at a knot or at 1. Ties within a relative ``1e-12``
    go to the greatest location.
    """
    t = Fplus.t
    y = Fplus.atoms
    if t[-1] < 1.0:
        t = np.concatenate([t, [1.0]])
        y = np.concatenate([y, [Fplus.y[-1]]])
    obj = y - a * t
    top = obj.max()
    tol = _TIE_RTOL * (np.abs(y).max() + abs(a) + np.abs(obj).max())
    return float(t[np.nonzero(obj >= top - tol)[0][-1]])


@dataclass(frozen=True, eq=False)
class JumpStructure:
    """Jump points ``tau`` (with ``tau[0] = 0``, ``tau[-1] = 1``) and flat values ``gamma``.

    ``gamma[i-1]`` is the value of ``fhat`` on ``(tau[i-1], tau[i]]``, so
    ``gamma`` is strictly decreasing and has ``n_flat`` entries.
    """

    tau: np.ndarray
    gamma: np.ndarray

    @property
    def n_flat(self):
        return int(self.gamma.size)

    def to_dict(self):
        return {"tau": self.tau.tolist(), "gamma": self.gamma.tolist(), "n_flat": self.n_flat}

    @classmethod
    def from_dict(cls, d):
        js = cls(np.asarray(d["tau"], dtype=float), np.asarray(d["gamma"], dtype=float))
        if js.n_flat != d.get("n_flat", js.n_flat):
            raise DomainError("n_flat does not match gamma")
        return js


def jump_structure(fhat):
    """Extract ``tau``, ``gamma`` and ``N_n`` from a slope process.

    Raises
    ------
    ConsistencyError
        If ``gamma_i = fhat(tau_i)`` or ``tau_i = U_hat(gamma_i)`` fails,
        which indicates a broken majorant.
    """
    lo, hi = fhat.domain
    tau = np.concatenate([[lo], fhat.knots, [hi]])
    gamma = np.array(fhat.values, dtype=float)
    if np.any(np.diff(gamma) >= 0):
        raise ConsistencyError("flat-part values are not strictly decreasing")
    U = inverse_estimator(fhat)
    if not np.array_equal(fhat(tau[1:]), gamma):
        raise ConsistencyError("switch identity gamma_i = fhat(tau_i) violated")
    if not np.array_equal(U(gamma), tau[1:]):
        raise ConsistencyError("switch identity tau_i = U_hat(gamma_i) violated")
    return JumpStructure(tau, gamma)


def max_spacing(js):
    """Largest gap between consecutive jump points, boundary segments included."""
    return float(np.max(np.diff(js.tau)))


def sup_inverse_distance(Uhat, model, a_lo=-np.inf, a_hi=np.inf):
    """Exact ``sup |U_hat(a) - g(a)|`` over ``a`` in ``[a_lo, a_hi]``.

    Both functions are constant (1 or 0) beyond the range of their jump
    levels, so infinite ends are clipped to a finite interval containing all
    jumps of ``U_hat`` and ``[f(1), f(0)]`` without changing the value.
    """
    if a_lo > a_hi:
        raise DomainError("a_lo must not exceed a_hi")
    jumps = Uhat.knots
    lo_all = min(model.f1, jumps[0] if jumps.size else model.f1) - 1.0
    hi_all = max(model.f0, jumps[-1] if jumps.size else model.f0) + 1.0
    lo = max(a_lo, lo_all)
    hi = min(a_hi, hi_all)
    if lo > hi:
        # interval lies where both are constant
        x = a_lo if np.isfinite(a_lo) else a_hi
        return float(abs(Uhat(x) - model.g(x)))
    return sup_abs_diff(Uhat, model.g, lo, hi, include_left=True)
