"""Community shape parameterizations and their area geometry.

A community of ``n_c`` nodes, ordered by induced degree, occupies the cells
``(i, j)`` of its ``n_c x n_c`` adjacency square that lie under a rectangular
hyperbola.  Three equivalent ways of writing that hyperbola are supported:

* fixed points ``(gamma, h)``: where the curve crosses the diagonal and the
  height at which it leaves the square,
* hyperbola ``(p, theta)``: ``(i + p)(j + p) <= theta``,
* mixture ``(x, sigma)``: ``(1 - |x|) i j + x (i + j) <= sigma``.

Parameters derived from integer fixed points are kept as exact fractions, so
membership tests never depend on floating point rounding.
"""

from __future__ import annotations

import math
import operator
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

__all__ = [
    "DegenerateLinear",
    "Infeasible",
    "FixedParams",
    "HyperbolicParams",
    "MixtureParams",
    "ModelParams",
    "fixed_to_hyperbolic",
    "hyperbolic_to_mixture",
    "mixture_to_hyperbolic",
    "is_feasible",
    "feasible_gamma_range",
    "contains",
    "area_exact",
    "area_integral",
    "area_closed_form",
]

# |value| bound below which products of two int64 factors cannot overflow
_INT64_SAFE = 2**62


class Infeasible(ValueError):
    """Parameters violate the community shape constraints."""


class DegenerateLinear(ValueError):
    """Parameters sit on the linear boundary where no hyperbola exists."""


@dataclass(frozen=True)
class FixedParams:
    gamma: int
    h: int
    n_c: int


@dataclass(frozen=True)
class HyperbolicParams:
    p: float
    theta: float


@dataclass(frozen=True)
class MixtureParams:
    x: float
    sigma: float


def _fixed_terms(gamma, h, n_c):
    # p = P / D and theta = T / D**2, all integers
    n1 = n_c - 1
    denom = n1 + h - 2 * gamma
    num = gamma * gamma - n1 * h
    theta_num = ((gamma - h) * (n1 - gamma)) ** 2
    return denom, num, theta_num


def is_feasible(gamma, h, n_c):
    """Return True if integer fixed points ``(gamma, h)`` give a valid community.

    Requires ``0 <= h <= gamma <= (n_c - 1 + h) / 2`` and ``p >= -gamma/2``
    (``p >= 0`` when ``gamma == 0``).  The boundary ``2 gamma == n_c - 1 + h``
    is accepted as the degenerate linear model.
    """
    gamma, h, n_c = operator.index(gamma), operator.index(h), operator.index(n_c)
    if n_c < 2:
        raise ValueError(f"community size must be at least 2, got {n_c}")
    if not 0 <= h <= gamma or 2 * gamma > n_c - 1 + h:
        return False
    denom, num, _ = _fixed_terms(gamma, h, n_c)
    if denom == 0:
        return True
    return 2 * num >= -gamma * denom


def feasible_gamma_range(h, n_c):
    """Inclusive integer range of ``gamma`` that is feasible for a given ``h``.

    Solving ``p >= -gamma/2`` for ``gamma`` gives
    ``gamma >= 2 (n_c-1) h / (n_c-1+h)``; convexity caps it at ``(n_c-1+h)/2``.
    Returns ``(lo, hi)`` with ``lo > hi`` when empty.
    """
    n1 = n_c - 1
    if h < 0 or h > n1:
        return 1, 0
    lo = -((-2 * n1 * h) // (n1 + h)) if h else 0
    hi = (n1 + h) // 2
    return max(lo, h), hi


def fixed_to_hyperbolic(f: FixedParams) -> HyperbolicParams:
    """Solve ``(p, theta)`` from the diagonal crossing and the exit height."""
    gamma, h, n_c = f.gamma, f.h, f.n_c
    if n_c < 2 or not 0 <= h <= gamma or 2 * gamma > n_c - 1 + h:
        raise Infeasible(f"no community for gamma={gamma}, h={h}, n_c={n_c}")
    denom, num, theta_num = _fixed_terms(gamma, h, n_c)
    if denom == 0:
        raise DegenerateLinear(
            f"gamma={gamma}, h={h}, n_c={n_c} is the linear model i + j <= {2 * gamma}"
        )
    if 2 * num < -gamma * denom:
        raise Infeasible(
            f"gamma={gamma}, h={h}, n_c={n_c} gives p={Fraction(num, denom)} < -gamma/2"
        )
    return HyperbolicParams(Fraction(num, denom), Fraction(theta_num, denom * denom))


def hyperbolic_to_mixture(hp: HyperbolicParams) -> MixtureParams:
    scale = 1 + abs(hp.p)
    return MixtureParams(hp.p / scale, (hp.theta - hp.p * hp.p) / scale)


def mixture_to_hyperbolic(m: MixtureParams) -> HyperbolicParams:
    if abs(m.x) > 1:
        raise ValueError(f"mixture weight must lie in [-1, 1], got {m.x}")
    if abs(m.x) == 1:
        raise DegenerateLinear("|x| = 1 is the linear model, not a hyperbola")
    p = m.x / (1 - abs(m.x))
    return HyperbolicParams(p, m.sigma * (1 + abs(p)) + p * p)


def _as_fraction(value):
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"parameter must be finite, got {value}")
    return Fraction(value)


@dataclass(frozen=True)
class ModelParams:
    """One community shape, usable in any of the three parameterizations.

    Exactly one of the canonical forms is stored: integer fixed points
    (``gamma``/``h``), a hyperbola (``p``/``theta``) or a line ``i + j <= line``
    for the degenerate boundary.  Use the ``from_*`` constructors.
    """

    n_c: int
    fixed_gamma: int | None = None
    fixed_h: int | None = None
    p: Fraction | None = None
    theta: Fraction | None = None
    line: Fraction | None = None

    @classmethod
    def from_fixed(cls, gamma, h, n_c):
        gamma, h, n_c = operator.index(gamma), operator.index(h), operator.index(n_c)
        if not is_feasible(gamma, h, n_c):
            raise Infeasible(f"no community for gamma={gamma}, h={h}, n_c={n_c}")
        denom, num, theta_num = _fixed_terms(gamma, h, n_c)
        if denom == 0:
            return cls(n_c, gamma, h, line=Fraction(2 * gamma))
        return cls(n_c, gamma, h, Fraction(num, denom), Fraction(theta_num, denom * denom))

    @classmethod
    def from_hyperbolic(cls, p, theta, n_c):
        n_c = operator.index(n_c)
        if n_c < 2:
            raise ValueError(f"community size must be at least 2, got {n_c}")
        p, theta = _as_fraction(p), _as_fraction(theta)
        if theta < p * p:
            # cell (0, 0) would fall outside the community
            raise Infeasible(f"theta={theta} < p**2 for p={p}")
        return cls(n_c, p=p, theta=theta)

    @classmethod
    def from_mixture(cls, x, sigma, n_c):
        x, sigma = _as_fraction(x), _as_fraction(sigma)
        if x == 1:
            if sigma < 0:
                raise Infeasible(f"linear threshold {sigma} excludes cell (0, 0)")
            return cls(operator.index(n_c), line=sigma)
        if x == -1:
            raise Infeasible("x = -1 does not describe a community")
        hp = mixture_to_hyperbolic(MixtureParams(x, sigma))
        return cls.from_hyperbolic(hp.p, hp.theta, n_c)

    @property
    def degenerate(self):
        return self.line is not None

    @property
    def gamma(self):
        """Diagonal crossing; an int for integer fixed points, else a float."""
        if self.fixed_gamma is not None:
            return self.fixed_gamma
        if self.degenerate:
            return float(self.line) / 2
        return math.sqrt(self.theta) - float(self.p)

    @property
    def h(self):
        """Exit height at column ``n_c - 1``; float unless built from fixed points."""
        if self.fixed_h is not None:
            return self.fixed_h
        n1 = self.n_c - 1
        if self.degenerate:
            return float(self.line) - n1
        return float(self.theta / (n1 + self.p) - self.p)

    @property
    def fixed(self) -> FixedParams:
        if self.fixed_gamma is None:
            raise ValueError("parameters were not built from integer fixed points")
        return FixedParams(self.fixed_gamma, self.fixed_h, self.n_c)

    @property
    def hyperbolic(self) -> HyperbolicParams:
        if self.degenerate:
            raise DegenerateLinear("the linear model has no hyperbola parameters")
        return HyperbolicParams(self.p, self.theta)

    @property
    def mixture(self) -> MixtureParams:
        if self.degenerate:
            return MixtureParams(Fraction(1), self.line)
        return hyperbolic_to_mixture(self.hyperbolic)

    @cached_property
    def _integer_form(self):
        # (i*a + b) * (j*a + b) <= c with integer a > 0; the left side is an
        # integer, so flooring the scaled threshold is exact
        if self.fixed_gamma is not None:
            denom, num, theta_num = _fixed_terms(self.fixed_gamma, self.fixed_h, self.n_c)
            return denom, num, theta_num
        a = self.p.denominator
        b = self.p.numerator
        scaled = self.theta * a * a
        return a, b, scaled.numerator // scaled.denominator

    def _int_dtype(self):
        a, b, c = self._integer_form
        bound = self.n_c * a + abs(b)
        if bound * bound < _INT64_SAFE and abs(c) < _INT64_SAFE:
            return np.int64
        return object

    def contains(self, i, j):
        """Membership of cells ``(i, j)``; accepts scalars or arrays."""
        scalar = np.isscalar(i) and np.isscalar(j)
        if self.degenerate:
            if scalar:
                return bool(int(i) + int(j) <= self.line)
            i, j = np.asarray(i), np.asarray(j)
            return (i + j) <= _floor(self.line)
        a, b, c = self._integer_form
        if scalar:
            return (int(i) * a + b) * (int(j) * a + b) <= c
        dtype = self._int_dtype()
        i = np.asarray(i).astype(dtype)
        j = np.asarray(j).astype(dtype)
        return np.asarray((i * a + b) * (j * a + b) <= c, dtype=bool)

    def column_bounds(self):
        """Largest row index inside the area for every column, ``-1`` if none."""
        n1 = self.n_c - 1
        cols = np.arange(self.n_c, dtype=np.int64)
        if self.degenerate:
            return np.clip(_floor(self.line) - cols, -1, n1)
        a, b, c = self._integer_form
        dtype = self._int_dtype()
        cols = cols.astype(dtype)
        base = cols * a + b
        positive = base > 0
        safe = np.where(positive, base, 1)
        rows = (c // safe - b) // a
        # columns with j + p <= 0 lie entirely inside (requires theta >= p**2)
        rows = np.where(positive, rows, n1)
        return np.clip(rows, -1, n1).astype(np.int64)

    def area(self):
        return int((self.column_bounds() + 1).sum())


def _floor(value):
    return value.numerator // value.denominator


def contains(mp: ModelParams, i, j):
    return mp.contains(i, j)


def area_exact(mp: ModelParams) -> int:
    """Number of cells of the full ``n_c x n_c`` square (diagonal included) inside the area."""
    return mp.area()


def area_integral(hp: HyperbolicParams, n_c, clamp=True):
    """Continuous approximation of the area, in constant time.

    ``hp`` may also be a ``ModelParams``; a degenerate (linear) model then
    integrates its straight boundary ``i = 2 gamma - j``, the large-``p``
    limit of the hyperbola.

    With ``clamp=True`` this integrates the column height
    ``theta / (x + p) - p + 1`` clipped to ``[0, n_c]`` over ``[0, n_c]``;
    columns with ``x + p <= 0`` are full.  Its distance to the exact cell
    count is at most ``n_c``.  With ``clamp=False`` the raw integral
    ``theta ln((n_c + p) / p) - p n_c`` is returned, which needs ``p > 0``.
    """
    if isinstance(hp, ModelParams):
        if hp.degenerate:
            return _linear_integral(float(hp.gamma), float(n_c))
        hp = hp.hyperbolic
    p, theta, n = float(hp.p), float(hp.theta), float(n_c)
    if not clamp:
        if p <= 0:
            raise ValueError("the unclamped integral needs p > 0")
        return theta * math.log((n + p) / p) - p * n
    if theta < p * p:
        raise Infeasible(f"theta={theta} < p**2 for p={p}")
    if theta == 0:
        # p == 0: only row 0 and column 0; the continuous height is 1
        return min(1.0, n) * n
    x_full = theta / (n - 1 + p) - p
    left = min(max(x_full, 0.0), n)
    right = n
    if p > 1:
        right = min(max(theta / (p - 1) - p, left), n)
    middle = theta * math.log((right + p) / (left + p)) + (1 - p) * (right - left)
    return n * left + middle


def _linear_integral(gamma, n):
    # height 2 gamma - x + 1 clipped to [0, n] over [0, n]
    top = min(max(2 * gamma + 1 - n, 0.0), n)  # columns whose height reaches n
    end = min(2 * gamma + 1, n)                # height drops to 0 here
    return n * top + (2 * gamma + 1) * (end - top) - (end**2 - top**2) / 2


def area_closed_form(gamma, n_c):
    """Raw area integral for ``h = 0`` written directly in ``gamma`` and ``n_c``.

    Valid for ``0 < gamma < n_c / 2``.
    """
    g, n = float(gamma), float(n_c)
    if not 0 < g < n / 2:
        raise ValueError(f"gamma must lie in (0, n_c/2), got gamma={gamma}, n_c={n_c}")
    lg = math.log(g)
    ln = math.log(n - g)
    numer = (
        4 * g * lg * n
        - 2 * g * g * lg
        - 2 * lg * n * n
        + 2 * g * g * ln
        - n * n
        + 2 * g * n
        + 2 * ln * n * n
        - 4 * g * ln * n
    )
    return g * g * numer / (n * n - 4 * g * n + 4 * g * g)
