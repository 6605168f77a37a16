"""Bernoulli log-likelihoods for single communities and whole graphs.

All counts are over ordered cells: an undirected edge contributes the two
cells ``(i, j)`` and ``(j, i)``, and diagonal cells belong to the square.
Empty areas contribute nothing (``0 log 0 = 0``).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import xlogy

from .graph import local_edge_cells

__all__ = [
    "CommunityCounts",
    "GraphCounts",
    "community_counts",
    "ll_single",
    "ll_graph",
    "bernoulli_ll",
    "fixed_density_ll",
]


@dataclass(frozen=True)
class CommunityCounts:
    """Cell tallies of one community's square after removing excluded cells.

    ``area_cells + complement_cells + excluded_cells == n_c ** 2``.
    """

    n_c: int
    area_cells: int
    in_edge_cells: int
    complement_cells: int
    out_edge_cells: int
    excluded_cells: int = 0

    @property
    def d_in(self):
        return self.in_edge_cells / self.area_cells if self.area_cells else 0.0

    @property
    def d_out(self):
        return self.out_edge_cells / self.complement_cells if self.complement_cells else 0.0


@dataclass(frozen=True)
class GraphCounts:
    """Per-community counts with edges attributed to at most one community."""

    communities: tuple
    total_cells: int
    total_edge_cells: int

    @property
    def covered_cells(self):
        return sum(c.area_cells for c in self.communities)

    @property
    def covered_edge_cells(self):
        return sum(c.in_edge_cells for c in self.communities)

    @property
    def outside_cells(self):
        return self.total_cells - self.covered_cells

    @property
    def outside_edge_cells(self):
        return self.total_edge_cells - self.covered_edge_cells

    @property
    def d_out(self):
        cells = self.outside_cells
        return self.outside_edge_cells / cells if cells else 0.0


def bernoulli_ll(k, n):
    """Log-likelihood of ``k`` successes in ``n`` cells at the ML rate ``k / n``."""
    k = np.asarray(k, dtype=np.float64)
    n = np.asarray(n, dtype=np.float64)
    safe = np.where(n > 0, n, 1.0)
    d = np.where(n > 0, k / safe, 0.0)
    return xlogy(k, d) + xlogy(n - k, 1.0 - d)


def fixed_density_ll(k, n, d):
    """Log-likelihood of ``k`` successes in ``n`` cells at a given rate ``d``."""
    k = np.asarray(k, dtype=np.float64)
    n = np.asarray(n, dtype=np.float64)
    return xlogy(k, d) + xlogy(n - k, 1.0 - d)


def ll_single(counts: CommunityCounts, d_out=None):
    """Log-likelihood of one community's square.

    The outside term uses the community's own outside density unless a
    global ``d_out`` is supplied.
    """
    inside = bernoulli_ll(counts.in_edge_cells, counts.area_cells)
    if d_out is None:
        outside = bernoulli_ll(counts.out_edge_cells, counts.complement_cells)
    else:
        outside = fixed_density_ll(counts.out_edge_cells, counts.complement_cells, d_out)
    return float(inside + outside)


def ll_graph(gc: GraphCounts):
    """Whole-graph log-likelihood: community inside terms plus one global outside term."""
    total = sum(float(bernoulli_ll(c.in_edge_cells, c.area_cells)) for c in gc.communities)
    return total + float(bernoulli_ll(gc.outside_edge_cells, gc.outside_cells))


def _cell_keys(rows, cols, n_c):
    return np.asarray(rows, dtype=np.int64) * n_c + np.asarray(cols, dtype=np.int64)


def normalize_excluded(excluded, n_c):
    """Excluded local cells as sorted unique keys ``row * n_c + col``.

    Accepts ``None``, an ``(k, 2)`` array of cells or a pair of index arrays.
    The set is symmetrized.
    """
    if excluded is None:
        return np.empty(0, dtype=np.int64)
    if isinstance(excluded, tuple) and len(excluded) == 2:
        rows, cols = (np.asarray(a, dtype=np.int64).ravel() for a in excluded)
    else:
        cells = np.asarray(excluded, dtype=np.int64).reshape(-1, 2)
        rows, cols = cells[:, 0], cells[:, 1]
    if rows.size and (min(rows.min(), cols.min()) < 0 or max(rows.max(), cols.max()) >= n_c):
        raise ValueError("excluded cell outside the community square")
    keys = np.concatenate([_cell_keys(rows, cols, n_c), _cell_keys(cols, rows, n_c)])
    return np.unique(keys)


def community_counts(graph, order, mp, excluded=None):
    """Count area, edge, complement and outside-edge cells for one community."""
    n_c = order.n_c
    if mp.n_c != n_c:
        raise ValueError(f"parameters are for {mp.n_c} nodes, order has {n_c}")
    rows, cols = local_edge_cells(graph, order)
    return counts_from_cells(mp, rows, cols, normalize_excluded(excluded, n_c))


def counts_from_cells(mp, rows, cols, excluded_keys):
    """Counts from lower-triangle edge cells (``rows > cols``) and excluded keys."""
    n_c = mp.n_c
    area = mp.area()
    total_edges = 2 * rows.size
    inside = mp.contains(rows, cols)
    if excluded_keys.size:
        ex_rows, ex_cols = excluded_keys // n_c, excluded_keys % n_c
        excluded_in_area = int(np.count_nonzero(mp.contains(ex_rows, ex_cols)))
        edge_excluded = np.isin(_cell_keys(rows, cols, n_c), excluded_keys)
    else:
        excluded_in_area = 0
        edge_excluded = np.zeros(rows.size, dtype=bool)
    area_cells = area - excluded_in_area
    in_edges = 2 * int(np.count_nonzero(inside & ~edge_excluded))
    available_edges = total_edges - 2 * int(np.count_nonzero(edge_excluded))
    n_excluded = int(excluded_keys.size)
    return CommunityCounts(
        n_c=n_c,
        area_cells=area_cells,
        in_edge_cells=in_edges,
        complement_cells=n_c * n_c - n_excluded - area_cells,
        out_edge_cells=available_edges - in_edges,
        excluded_cells=n_excluded,
    )
