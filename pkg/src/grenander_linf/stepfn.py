"""Exact step functions on an interval.

Two conventions are supported:

* :class:`CadlagStep` -- right-continuous with left limits, domain ``[0, 1]``.
  This houses estimators of a primitive such as the empirical distribution
  function or the partial-sum process. Point values at knots may be raised
  above the right limit, which is how the upper version ``F^+`` is stored.
* :class:`LeftContStep` -- left-continuous, piecewise constant, on an
  arbitrary (possibly infinite) interval. This houses slope estimators
  ``f_hat(t)`` and their generalized inverses ``U_hat(a)``.

Both are immutable; all arrays are stored read-only.
"""
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = [
    "Knot",
    "CadlagStep",
    "LeftContStep",
    "upper_version",
    "sup_abs_diff",
    "step_from_dict",
]


@dataclass(frozen=True)
class Knot:
    """A point ``(t, y)`` of a step function or envelope."""

    t: float
    y: float


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def _check_increasing(t, what):
    if t.ndim != 1:
        raise DomainError(f"{what} must be one-dimensional")
    if t.size > 1 and not np.all(np.diff(t) > 0):
        raise DomainError(f"{what} must be strictly increasing (duplicates are rejected)")


class CadlagStep:
    """Right-continuous step function on ``[0, 1]``.

    Parameters
    ----------
    t : array-like of shape (k,)
        Knot abscissae, strictly increasing, ``t[0] == 0``.
    y : array-like of shape (k,)
        Value on ``[t[i], t[i+1])`` (the right limit at ``t[i]``).
    atoms : array-like of shape (k,), optional
        Value taken exactly at ``t[i]``. Defaults to ``y`` (true cadlag).
        Upper versions use ``atoms[i] = max(y[i], y[i-1])``.
    """

    convention = "cadlag"

    def __init__(self, t, y, atoms=None):
        t = _frozen(t)
        y = _frozen(y)
        if t.size == 0 or t.shape != y.shape:
            raise DomainError("t and y must be non-empty and of equal length")
        _check_increasing(t, "knot abscissae")
        if t[0] != 0.0 or t[-1] > 1.0:
            raise DomainError("knots must lie in [0, 1] and start at t = 0")
        self.t = t
        self.y = y
        self.atoms = y if atoms is None else _frozen(atoms)
        if self.atoms.shape != y.shape:
            raise DomainError("atoms must match y in length")

    @classmethod
    def empirical(cls, sample, n=None):
        """Empirical distribution function of observations in ``[0, 1]``.

        Tied observations produce a single knot carrying the combined mass.
        """
        x = np.asarray(sample, dtype=float)
        n = x.size if n is None else n
        if x.size and (x.min() < 0.0 or x.max() > 1.0):
            raise DomainError("observations must lie in [0, 1]")
        loc, counts = np.unique(x, return_counts=True)
        cum = np.cumsum(counts)
        if loc.size and loc[0] == 0.0:
            return cls(loc, cum / n)
        return cls(np.concatenate([[0.0], loc]), np.concatenate([[0.0], cum / n]))

    @classmethod
    def partial_sums(cls, y):
        """Partial-sum process ``(1/n) sum_{i <= nt} y_i`` with knots at ``i/n``."""
        y = np.asarray(y, dtype=float)
        n = y.size
        t = np.arange(n + 1) / n
        return cls(t, np.concatenate([[0.0], np.cumsum(y) / n]))

    @property
    def knots(self):
        return [Knot(float(a), float(b)) for a, b in zip(self.t, self.y)]

    def __len__(self):
        return self.t.size

    def __repr__(self):
        return f"CadlagStep(k={self.t.size}, F(1)={float(self(1.0)):.6g})"

    def _check(self, t, lo_open=False):
        t = np.asarray(t, dtype=float)
        bad = (t < 0.0) | (t > 1.0) | np.isnan(t)
        if lo_open:
            bad |= t <= 0.0
        if np.any(bad):
            raise DomainError("evaluation point outside the domain")
        return t

    def __call__(self, t):
        """Right-continuous evaluation (atoms at knots)."""
        t = self._check(t)
        i = np.searchsorted(self.t, t, side="right") - 1
        out = np.where(self.t[i] == t, self.atoms[i], self.y[i])
        return out if out.ndim else float(out)

    def left_limit(self, t):
        """``lim_{u -> t-} F(u)`` for ``t`` in ``(0, 1]``."""
        t = self._check(t, lo_open=True)
        i = np.searchsorted(self.t, t, side="left") - 1
        out = self.y[i]
        return out if out.ndim else float(out)

    def _piece(self, t):
        # value on the open piece containing t (t not a knot)
        return self.y[np.searchsorted(self.t, t, side="right") - 1]

    @property
    def has_downward_jumps(self):
        return bool(np.any(np.diff(self.y) < 0))

    def to_dict(self):
        rec = []
        for a, b, c in zip(self.t, self.y, self.atoms):
            k = {"t": float(a), "y": float(b)}
            if c != b:
                k["at"] = float(c)
            rec.append(k)
        return {"convention": self.convention, "knots": rec}

    @classmethod
    def from_dict(cls, d):
        if d.get("convention") != cls.convention:
            raise DomainError("not a cadlag step function record")
        ks = d["knots"]
        t = [k["t"] for k in ks]
        y = [k["y"] for k in ks]
        atoms = [k.get("at", k["y"]) for k in ks]
        return cls(t, y, atoms)


def upper_version(F):
    """Upper version ``F^+``: ``F^+(0) = F(0)``, ``F^+(t) = max(F(t), F(t-))``.

    Only knots following a downward step change, so a step function with no
    downward jumps is returned unchanged.
    """
    atoms = np.array(F.atoms, dtype=float)
    if F.t.size > 1:
        atoms[1:] = np.maximum(F.atoms[1:], F.y[:-1])
    return CadlagStep(F.t, F.y, atoms)


class LeftContStep:
    """Left-continuous piecewise-constant function.

    The function equals ``values[0]`` on ``(lo, knots[0]]``, ``values[i]`` on
    ``(knots[i-1], knots[i]]`` and ``values[-1]`` on ``(knots[-1], hi]``. At the
    left end of a finite domain the value is the right limit there, matching
    the convention ``f_hat(0) = lim_{t -> 0+} f_hat(t)``.

    Parameters
    ----------
    knots : array-like of shape (m,)
        Jump locations, strictly increasing, interior to ``domain``.
    values : array-like of shape (m + 1,)
    domain : tuple of float
        ``(lo, hi)``; either end may be infinite.
    monotone : bool
        If true, ``values`` must be nonincreasing.
    """

    convention = "left"

    def __init__(self, knots, values, domain=(0.0, 1.0), monotone=False):
        knots = _frozen(knots).reshape(-1)
        values = _frozen(values).reshape(-1)
        if values.size != knots.size + 1:
            raise DomainError("need exactly one more value than knots")
        _check_increasing(knots, "knots")
        lo, hi = float(domain[0]), float(domain[1])
        if not lo < hi:
            raise DomainError("empty domain")
        if knots.size and (knots[0] <= lo or knots[-1] >= hi):
            raise DomainError("knots must be interior to the domain")
        if monotone and np.any(np.diff(values) > 0):
            raise DomainError("values must be nonincreasing")
        self.knots = knots
        self.values = values
        self.domain = (lo, hi)
        self.monotone = monotone

    def __repr__(self):
        return f"LeftContStep(jumps={self.knots.size}, domain={self.domain})"

    def _check(self, x):
        x = np.asarray(x, dtype=float)
        lo, hi = self.domain
        if np.any((x < lo) | (x > hi) | np.isnan(x)):
            raise DomainError("evaluation point outside the domain")
        return x

    def __call__(self, x):
        x = self._check(x)
        out = self.values[np.searchsorted(self.knots, x, side="left")]
        return out if out.ndim else float(out)

    def right_limit(self, x):
        x = self._check(x)
        out = self.values[np.searchsorted(self.knots, x, side="right")]
        return out if out.ndim else float(out)

    @property
    def t(self):
        return self.knots

    def atoms_at(self, x):
        return self(x)

    def _piece(self, x):
        return self.values[np.searchsorted(self.knots, x, side="left")]

    def pieces(self):
        """Return ``(left, right, value)`` arrays of the constant pieces."""
        edges = np.concatenate([[self.domain[0]], self.knots, [self.domain[1]]])
        return edges[:-1], edges[1:], self.values

    def to_dict(self):
        lo, hi = self.domain
        return {
            "convention": self.convention,
            "domain": [None if np.isinf(lo) else lo, None if np.isinf(hi) else hi],
            "initial": float(self.values[0]),
            "monotone": self.monotone,
            "knots": [{"t": float(a), "y": float(b)} for a, b in zip(self.knots, self.values[1:])],
        }

    @classmethod
    def from_dict(cls, d):
        if d.get("convention") != cls.convention:
            raise DomainError("not a left-continuous step function record")
        lo, hi = d.get("domain", [0.0, 1.0])
        lo = -np.inf if lo is None else lo
        hi = np.inf if hi is None else hi
        ks = d["knots"]
        return cls(
            [k["t"] for k in ks],
            [d["initial"]] + [k["y"] for k in ks],
            domain=(lo, hi),
            monotone=d.get("monotone", False),
        )


def step_from_dict(d):
    """Rebuild either step-function type from its JSON record."""
    return {"cadlag": CadlagStep, "left": LeftContStep}[d["convention"]].from_dict(d)


def _stationary_sup(c, h2, weight, lo, hi, tol=1e-12):
    """Max of ``|(c - h2) * weight|`` over interior stationary points on ``[lo, hi]``.

    Returns 0 when the derivative keeps its sign across the piece.
    """

    def g(x):
        return (c - h2(x)) * weight(x)

    def dg(x, e):
        return (g(x + e) - g(x - e)) / (2 * e)

    e = 1e-7 * (hi - lo)
    d_lo = (g(lo + e) - g(lo)) / e
    d_hi = (g(hi) - g(hi - e)) / e
    if d_lo == 0 or d_hi == 0 or np.sign(d_lo) == np.sign(d_hi):
        return 0.0
    a, b, s_a = lo, hi, np.sign(d_lo)
    while b - a > tol:
        m = 0.5 * (a + b)
        s = np.sign(dg(m, min(e, 0.25 * (b - a)) or tol))
        if s == s_a:
            a = m
        else:
            b = m
    return float(abs(g(0.5 * (a + b))))


def sup_abs_diff(h1, h2, a, b, weight=None, include_left=False):
    """Exact ``sup |h1 - h2| * weight`` over ``(a, b]``.

    ``h1`` is a step function, ``h2`` a continuous function that is monotone
    on each constant piece of ``h1`` (for instance the truth ``f`` or ``g``),
    and ``weight`` an optional smooth positive function. The supremum is
    taken over both one-sided limits of ``h1`` at its knots, the point values
    at the knots, and the interval ends. With a weight, a sign change of the
    derivative of the weighted difference inside a piece is located by
    bisection.

    Parameters
    ----------
    include_left : bool
        Use ``[a, b]`` instead of ``(a, b]``.

    Returns
    -------
    float
        ``0.0`` for an empty interval.
    """
    a = float(a)
    b = float(b)
    if not a < b:
        if include_left and a == b:
            w = 1.0 if weight is None else float(weight(a))
            return float(abs(h1(a) - h2(a)) * w)
        return 0.0
    w = (lambda x: np.ones_like(np.asarray(x, dtype=float))) if weight is None else weight
    kt = h1.t
    inner = kt[(kt > a) & (kt < b)]
    edges = np.concatenate([[a], inner, [b]])
    lo, hi = edges[:-1], edges[1:]
    c = h1._piece(0.5 * (lo + hi))
    cand = [
        np.abs(c - h2(lo)) * w(lo),
        np.abs(c - h2(hi)) * w(hi),
    ]
    pts = np.concatenate([inner, [b], [a]] if include_left else [inner, [b]])
    cand.append(np.abs(np.asarray(h1(pts)) - h2(pts)) * w(pts))
    best = max(float(np.max(x)) for x in cand)
    if weight is not None:
        for ci, l, r in zip(c, lo, hi):
            best = max(best, _stationary_sup(ci, h2, weight, l, r))
    return best
