"""Least concave majorant of a finite point set and its left-hand slope."""
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .stepfn import CadlagStep, Knot, LeftContStep, upper_version

try:  # the sweep is a tight scalar loop; compile it when numba is present
    from numba import njit
except ImportError:  # pragma: no cover
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda fn: fn

__all__ = [
    "RTOL",
    "ConcaveEnvelope",
    "upper_hull_indices",
    "least_concave_majorant",
    "majorant_points",
    "slope_process",
    "grenander_type",
]

#: Relative tolerance on cross products below which three points count as colinear.
RTOL = 1e-12


@njit(cache=True)
def _sweep(t, y, rtol):
    n = t.shape[0]
    stack = np.empty(n, dtype=np.int64)
    k = 0
    for i in range(n):
        while k >= 2:
            a = stack[k - 2]
            b = stack[k - 1]
            p = (t[b] - t[a]) * (y[i] - y[a])
            q = (t[i] - t[a]) * (y[b] - y[a])
            # b on or below the chord a -> i: not a vertex
            if p - q >= -rtol * (abs(p) + abs(q)):
                k -= 1
            else:
                break
        stack[k] = i
        k += 1
    return stack[:k]


def upper_hull_indices(t, y, rtol=RTOL):
    """Indices of the upper-hull vertices of points sorted by ``t``.

    Linear time; colinear interior points are dropped.
    """
    t = np.ascontiguousarray(t, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    return _sweep(t, y, rtol)


@dataclass(frozen=True, eq=False)
class ConcaveEnvelope:
    """Vertices of a least concave majorant on ``[0, 1]``.

    Chord slopes between consecutive vertices are strictly decreasing.
    """

    t: np.ndarray
    y: np.ndarray

    @property
    def vertices(self):
        return [Knot(float(a), float(b)) for a, b in zip(self.t, self.y)]

    @property
    def slopes(self):
        return np.diff(self.y) / np.diff(self.t)

    def __call__(self, s):
        return np.interp(s, self.t, self.y)

    def to_dict(self):
        return {"vertices": [{"t": float(a), "y": float(b)} for a, b in zip(self.t, self.y)]}

    @classmethod
    def from_dict(cls, d):
        v = d["vertices"]
        return cls(_ro([k["t"] for k in v]), _ro([k["y"] for k in v]))


def _ro(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def least_concave_majorant(t, y=None, rtol=RTOL):
    """Least concave majorant of points ``(t_i, y_i)``.

    Parameters
    ----------
    t : array-like or sequence of Knot
        Abscissae, strictly increasing, from 0 to 1. Knots may be passed
        directly, in which case ``y`` is omitted.
    y : array-like, optional

    Returns
    -------
    ConcaveEnvelope
    """
    if y is None:
        t, y = [k.t for k in t], [k.y for k in t]
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if t.size < 2 or t.shape != y.shape:
        raise DomainError("need at least two points with matching coordinates")
    if not np.all(np.diff(t) > 0):
        raise DomainError("points must be sorted strictly increasing in t")
    if t[0] != 0.0 or t[-1] != 1.0:
        raise DomainError("point set must include t = 0 and t = 1")
    idx = upper_hull_indices(t, y, rtol)
    return ConcaveEnvelope(_ro(t[idx]), _ro(y[idx]))


def majorant_points(F):
    """Point set whose majorant equals the majorant of the step function ``F``.

    The upper version carries the larger of each knot's value and left limit,
    so the knots of ``F^+`` plus the end point ``(1, F^+(1))`` suffice.
    """
    Fp = upper_version(F)
    t, y = Fp.t, Fp.atoms
    if t[-1] < 1.0:
        t = np.concatenate([t, [1.0]])
        y = np.concatenate([y, [Fp.y[-1]]])
    return t, y


def slope_process(env):
    """Left-hand slope of the envelope as a left-continuous step function.

    The value on ``(v[i-1], v[i]]`` is the chord slope between the two
    vertices; at 0 it is the first slope. Jumps sit at interior vertices.
    """
    return LeftContStep(env.t[1:-1], env.slopes, domain=(0.0, 1.0), monotone=True)


def grenander_type(F, rtol=RTOL):
    """Grenander-type estimator: left-hand slope of the concave majorant of ``F``.

    Returns
    -------
    fhat : LeftContStep
    env : ConcaveEnvelope
    """
    if not isinstance(F, CadlagStep):
        raise DomainError("expected a CadlagStep estimate of the primitive")
    env = least_concave_majorant(*majorant_points(F), rtol=rtol)
    return slope_process(env), env
