"""Likelihood-ratio tests against restricted models and shape summaries."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaincc

__all__ = [
    "LrtResult",
    "ShapeSummary",
    "chi_square_sf",
    "lrt",
    "restricted_df",
    "summarize",
]

# parameters a restriction pins down, per community
_FIXED_PER_COMMUNITY = {"block": 2, "hycom": 1}


@dataclass(frozen=True)
class LrtResult:
    statistic: float
    df: int
    p_value: float


def chi_square_sf(x, df):
    """Upper tail ``P(X > x)`` of a chi-square variable with ``df`` degrees of freedom."""
    if df < 1:
        raise ValueError(f"degrees of freedom must be >= 1, got {df}")
    if x <= 0:
        return 1.0
    return float(gammaincc(df / 2.0, x / 2.0))


def lrt(ll_full, ll_restricted, df):
    """Likelihood-ratio test of a restricted model nested in the full one.

    A negative statistic (possible when the full fit is a greedy optimum) is
    kept as is; the p-value treats it as zero.
    """
    statistic = 2.0 * (ll_full - ll_restricted)
    return LrtResult(statistic, int(df), chi_square_sf(max(statistic, 0.0), df))


def restricted_df(restriction, n_communities=1):
    try:
        return _FIXED_PER_COMMUNITY[restriction] * n_communities
    except KeyError:
        raise ValueError(f"unknown restriction {restriction!r}; expected block or hycom") from None


@dataclass(frozen=True)
class ShapeSummary:
    """25th percentile, median and 75th percentile of each shape quantity."""

    gamma_frac: tuple
    h_frac: tuple
    x: tuple
    count: int

    def rows(self):
        for name in ("gamma_frac", "h_frac", "x"):
            yield (name, *getattr(self, name))


def summarize(models):
    """Quartiles of ``gamma/n_c``, ``h/n_c`` and the mixture weight ``x``.

    Percentiles use linear interpolation.
    """
    models = list(models)
    if not models:
        raise ValueError("nothing to summarize")
    gamma = np.array([float(f.params.gamma) / f.n_c for f in models])
    h = np.array([float(f.params.h) / f.n_c for f in models])
    x = np.array([float(f.params.mixture.x) for f in models])

    def quartiles(values):
        return tuple(float(q) for q in np.percentile(values, [25, 50, 75]))

    return ShapeSummary(quartiles(gamma), quartiles(h), quartiles(x), len(models))
