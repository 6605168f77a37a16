"""Maximum-likelihood shape search for a single community.

The search covers every feasible integer pair ``(gamma, h)``.  Candidates
are evaluated in vectorized batches.  Because the square is symmetric,
only cells with ``row >= col`` are counted, and
for a pair ``(gamma, h)`` columns ``j <= h`` are always full while columns
``j > gamma`` hold no lower-triangle cell of the area.  Only columns in
``(h, gamma]`` need a boundary, which is computed exactly in integers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import NodeOrder, degree_order, local_edge_cells
from .likelihood import (
    CommunityCounts,
    bernoulli_ll,
    counts_from_cells,
    fixed_density_ll,
    normalize_excluded,
)
from .model import ModelParams, feasible_gamma_range

__all__ = ["MODES", "EmptyCommunity", "FittedCommunity", "fit_community", "fit_cells"]

MODES = ("full", "fixed", "block", "hycom")

# dense per-column prefix tables up to this many entries, sorted keys beyond
_DENSE_LIMIT = 16_000_000
# elements per vectorized (gamma, column) batch
_BATCH = 1 << 18
# beyond this size the integer boundary arithmetic could overflow int64
_MAX_NC = 30_000


class EmptyCommunity(ValueError):
    """A community needs at least two nodes."""


@dataclass(frozen=True, eq=False)
class FittedCommunity:
    order: NodeOrder
    params: ModelParams
    counts: CommunityCounts
    log_likelihood: float
    mode: str
    d_out: float | None = None
    ll_block: float | None = None
    ll_hycom: float | None = None
    index: int | None = None
    attribution_rank: int | None = None

    @property
    def nodes(self):
        return self.order.nodes

    @property
    def n_c(self):
        return self.order.n_c


class _LowerCells:
    """Cells with ``row >= col``, counted per column below a row bound."""

    def __init__(self, rows, cols, n):
        self.n = n
        self.size = rows.size
        per_col = np.bincount(cols, minlength=n)
        self.col_prefix = np.concatenate([[0], np.cumsum(per_col)])
        self._cum = None
        self._keys = None
        if self.size == 0:
            return
        if n * (n + 1) <= _DENSE_LIMIT:
            flat = np.bincount(cols * (n + 1) + rows + 1, minlength=n * (n + 1))
            self._cum = np.cumsum(flat.reshape(n, n + 1), axis=1).astype(np.int32)
        else:
            self._keys = np.sort(cols * n + rows)

    def count(self, cols, bounds):
        """Per batch row: sum over ``cols`` of cells with ``row <= bounds``."""
        if self.size == 0 or cols.size == 0:
            return np.zeros(bounds.shape[0], dtype=np.int64)
        if self._cum is not None:
            return self._cum[cols[None, :], bounds + 1].sum(axis=1, dtype=np.int64)
        hits = np.searchsorted(self._keys, cols[None, :] * self.n + bounds, side="right")
        base = np.searchsorted(self._keys, cols * self.n - 1, side="right").sum()
        return hits.sum(axis=1, dtype=np.int64) - base


class _Problem:
    """Edge and excluded cells of one community square in rank coordinates."""

    def __init__(self, n_c, rows, cols, excluded_keys):
        self.n = n_c
        self.edge_rows = rows
        self.edge_cols = cols
        self.excluded_keys = excluded_keys
        self.n_excluded = int(excluded_keys.size)
        if self.n_excluded:
            ex_rows, ex_cols = excluded_keys // n_c, excluded_keys % n_c
            lower = ex_rows >= ex_cols
            self.excl = _LowerCells(ex_rows[lower], ex_cols[lower], n_c)
            diag = np.zeros(n_c, dtype=np.int64)
            diag[ex_rows[ex_rows == ex_cols]] = 1
            self.excl_diag = diag
            edge_keys = rows * n_c + cols
            free = ~np.isin(edge_keys, excluded_keys)
            rows, cols = rows[free], cols[free]
        else:
            self.excl = None
            self.excl_diag = None
        self.edges = _LowerCells(rows, cols, n_c)
        self.free_rows = rows
        self.free_cols = cols
        self.total_edge_cells = 2 * rows.size
        self.total_cells = n_c * n_c - self.n_excluded

    def _ll(self, area, in_edges, d_out):
        area = np.asarray(area, dtype=np.int64)
        in_edges = np.asarray(in_edges, dtype=np.int64)
        comp = self.total_cells - area
        out_edges = self.total_edge_cells - in_edges
        inside = bernoulli_ll(in_edges, area)
        if d_out is None:
            return inside + bernoulli_ll(out_edges, comp)
        return inside + fixed_density_ll(out_edges, comp, d_out)

    def fixed_candidates(self):
        """Area and inside-edge cells of every feasible integer ``(gamma, h)``."""
        n, n1 = self.n, self.n - 1
        excl = self.excl
        excl_diag_prefix = None
        if excl is not None:
            excl_diag_prefix = np.concatenate([[0], np.cumsum(self.excl_diag)])
        out_g, out_h, out_area, out_edges = [], [], [], []
        for h in range(n):
            lo, hi = feasible_gamma_range(h, n)
            if lo > hi:
                continue
            # columns 0..h are full
            full_lower = (h + 1) * n - h * (h + 1) // 2
            full_edges = int(self.edges.col_prefix[h + 1])
            if excl is not None:
                full_excl = int(excl.col_prefix[h + 1])
                full_excl_diag = int(excl_diag_prefix[h + 1])
            step = max(1, _BATCH // max(1, hi - h))
            for g0 in range(lo, hi + 1, step):
                gam = np.arange(g0, min(g0 + step, hi + 1), dtype=np.int64)
                cols = np.arange(h + 1, gam[-1] + 1, dtype=np.int64)
                lower = np.full(gam.size, full_lower, dtype=np.int64)
                diag = gam + 1
                edges = np.full(gam.size, full_edges, dtype=np.int64)
                if excl is not None:
                    ex = np.full(gam.size, full_excl, dtype=np.int64)
                    ex_diag = np.full(gam.size, full_excl_diag, dtype=np.int64)
                if cols.size:
                    g = gam[:, None]
                    bounds = _fixed_bounds(g, h, n1, cols[None, :])
                    lower += np.clip(bounds - cols + 1, 0, None).sum(axis=1)
                    edges += self.edges.count(cols, bounds)
                    if excl is not None:
                        ex += excl.count(cols, bounds)
                        ex_diag += ((bounds >= cols) * self.excl_diag[cols]).sum(axis=1)
                area = 2 * lower - diag
                if excl is not None:
                    area -= 2 * ex - ex_diag
                out_g.append(gam)
                out_h.append(np.full(gam.size, h, dtype=np.int64))
                out_area.append(area)
                out_edges.append(2 * edges)
        return (
            np.concatenate(out_g),
            np.concatenate(out_h),
            np.concatenate(out_area),
            np.concatenate(out_edges),
        )

    def hycom_candidates(self):
        """Area and inside-edge cells for ``p = 1`` and every distinct threshold."""
        n = self.n
        counts = np.zeros(n * n + 1, dtype=np.int64)
        factors = np.arange(1, n + 1, dtype=np.int64)
        for a in range(1, n + 1):
            counts[a * factors] += 1
        thetas = np.flatnonzero(counts)
        area = np.cumsum(counts)[thetas]
        edge_prod = np.sort((self.free_rows + 1) * (self.free_cols + 1))
        edges = 2 * np.searchsorted(edge_prod, thetas, side="right")
        if self.n_excluded:
            keys = self.excluded_keys
            ex_prod = np.sort((keys // n + 1) * (keys % n + 1))
            area = area - np.searchsorted(ex_prod, thetas, side="right")
        return thetas, area, edges

    def block_candidate(self):
        return self.total_cells, self.total_edge_cells


def _fixed_bounds(g, h, n1, cols):
    """Largest inside row per column for a batch of ``gamma`` values."""
    denom = n1 + h - 2 * g
    num = g * g - n1 * h
    theta_num = ((g - h) * (n1 - g)) ** 2
    degenerate = denom == 0
    safe_denom = np.where(degenerate, 1, denom)
    base = cols * denom + num
    positive = base > 0
    rows = (theta_num // np.where(positive, base, 1) - num) // safe_denom
    rows = np.where(positive, rows, n1)
    rows = np.where(degenerate, 2 * g - cols, rows)
    return np.clip(rows, -1, n1)


def _best_fixed(prob, d_out):
    g, h, area, edges = prob.fixed_candidates()
    ll = prob._ll(area, edges, d_out)
    top = np.flatnonzero(ll == ll.max())
    k = top[np.lexsort((h[top], g[top]))[0]]
    return ModelParams.from_fixed(int(g[k]), int(h[k]), prob.n), float(ll[k])


def _best_hycom(prob, d_out):
    thetas, area, edges = prob.hycom_candidates()
    ll = prob._ll(area, edges, d_out)
    k = int(np.argmax(ll))
    return ModelParams.from_hyperbolic(1, int(thetas[k]), prob.n), float(ll[k])


def _block(prob, d_out):
    area, edges = prob.block_candidate()
    n1 = prob.n - 1
    return ModelParams.from_fixed(n1, n1, prob.n), float(prob._ll(area, edges, d_out))


def fit_cells(n_c, rows, cols, excluded_keys=None, mode="full", d_out=None):
    """Search on rank-space data: lower-triangle edge cells and excluded keys.

    Returns ``(params, counts, log_likelihood, ll_block, ll_hycom)``; the last
    two are only set for ``mode="full"``.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    if n_c < 2:
        raise EmptyCommunity(f"a community needs at least 2 nodes, got {n_c}")
    if n_c > _MAX_NC:
        raise ValueError(f"communities above {_MAX_NC} nodes are not supported")
    if excluded_keys is None:
        excluded_keys = np.empty(0, dtype=np.int64)
    prob = _Problem(n_c, rows, cols, excluded_keys)
    ll_block = ll_hycom = None
    if mode == "block":
        params, ll = _block(prob, d_out)
    elif mode == "hycom":
        params, ll = _best_hycom(prob, d_out)
    elif mode == "fixed":
        params, ll = _best_fixed(prob, d_out)
    else:
        params, ll = _best_fixed(prob, d_out)
        hy_params, ll_hycom = _best_hycom(prob, d_out)
        _, ll_block = _block(prob, d_out)
        # fixed-point candidates win ties
        if ll_hycom > ll:
            params, ll = hy_params, ll_hycom
    counts = counts_from_cells(params, rows, cols, excluded_keys)
    return params, counts, ll, ll_block, ll_hycom


def _resolve_order(graph, nodes, order):
    if order is None:
        return degree_order(graph, nodes)
    if not isinstance(order, NodeOrder):
        order = NodeOrder(np.asarray(order, dtype=np.int64))
    if nodes is not None and not np.array_equal(np.sort(order.nodes), np.sort(nodes)):
        raise ValueError("order does not list the same nodes as the community")
    return order


def fit_community(graph, nodes, mode="full", excluded=None, d_out=None, order=None):
    """Fit the best community shape to the subgraph induced by ``nodes``.

    Parameters
    ----------
    graph : Graph
    nodes : array-like of dense node ids
    mode : {"full", "fixed", "block", "hycom"}
        ``"fixed"`` searches integer ``(gamma, h)`` only; ``"full"`` adds the
        HyCom thresholds so it dominates both restricted modes.
    excluded : cells of the local square (rank coordinates) already claimed
        elsewhere; removed from every count.
    d_out : global outside density; the community's own is used when None.
    order : optional NodeOrder (or node list by rank) overriding degree order.
    """
    nodes = None if nodes is None else np.asarray(nodes, dtype=np.int64)
    if nodes is not None and nodes.size < 2:
        raise EmptyCommunity(f"a community needs at least 2 nodes, got {nodes.size}")
    order = _resolve_order(graph, nodes, order)
    rows, cols = local_edge_cells(graph, order)
    keys = normalize_excluded(excluded, order.n_c)
    params, counts, ll, ll_block, ll_hycom = fit_cells(
        order.n_c, rows, cols, keys, mode, d_out
    )
    return FittedCommunity(order, params, counts, ll, mode, d_out, ll_block, ll_hycom)
