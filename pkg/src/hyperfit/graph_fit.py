"""Alternating optimization of many, possibly overlapping, communities.

Every cell of the graph square is attributed to at most one community: a
community ignores cells already claimed by communities processed before it.
Initialization fits communities in input order with their own outside
density.  Update rounds then refit in decreasing-likelihood order against
the global outside density until no community improves.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .fit import EmptyCommunity, FittedCommunity, fit_cells
from .graph import NodeOrder, degree_order, local_edge_cells
from .likelihood import GraphCounts, counts_from_cells, ll_graph, ll_single

logger = logging.getLogger(__name__)

__all__ = ["GraphFitConfig", "GraphModel", "fit_graph", "claimed_cells"]


@dataclass(frozen=True)
class GraphFitConfig:
    mode: str = "full"
    max_rounds: int = 50
    epsilon: float = 1e-9
    n_jobs: int | None = None


@dataclass(frozen=True, eq=False)
class GraphModel:
    """Fitted communities ordered by non-increasing log-likelihood."""

    communities: tuple
    d_out: float
    log_likelihood: float
    init_log_likelihood: float
    n_nodes: int
    n_edges: int
    n_rounds: int
    converged: bool
    termination: str = "converged"
    # total log-likelihood after initialization and after each update round;
    trajectory: tuple = ()
    config: GraphFitConfig = field(default_factory=GraphFitConfig)

    def graph_counts(self):
        return GraphCounts(
            tuple(c.counts for c in self.communities),
            self.n_nodes * self.n_nodes,
            2 * self.n_edges,
        )


class _Community:
    def __init__(self, index, order, rows, cols):
        self.index = index
        self.order = order
        self.rows = rows
        self.cols = cols
        self.rank = {int(u): r for r, u in enumerate(order.nodes)}


def _overlaps(members):
    """Shared nodes for every node-overlapping pair, as rank arrays in each."""
    owner = {}
    for k, c in enumerate(members):
        for u in c.order.nodes.tolist():
            owner.setdefault(u, []).append(k)
    shared = {}
    for u, ks in owner.items():
        for a in ks:
            for b in ks:
                if a != b:
                    shared.setdefault((a, b), []).append(u)
    pairs = {}
    neighbors = [set() for _ in members]
    for (a, b), nodes in shared.items():
        ra = np.array([members[a].rank[u] for u in nodes], dtype=np.int64)
        rb = np.array([members[b].rank[u] for u in nodes], dtype=np.int64)
        pairs[a, b] = (ra, rb)
        neighbors[a].add(b)
    return pairs, neighbors


def claimed_cells(k, earlier, fits, pairs, neighbors, n_c):
    """Cells of community ``k``'s square already inside an earlier community's area."""
    keys = []
    for other in neighbors[k]:
        if other not in earlier:
            continue
        mine, theirs = pairs[k, other]
        ti, tj = np.meshgrid(theirs, theirs, indexing="ij")
        inside = fits[other].params.contains(ti, tj)
        mi, mj = np.meshgrid(mine, mine, indexing="ij")
        keys.append(mi[inside] * n_c + mj[inside])
    if not keys:
        return np.empty(0, dtype=np.int64)
    return np.unique(np.concatenate(keys))


def _fit_one(member, keys, mode, d_out):
    params, counts, ll, ll_block, ll_hycom = fit_cells(
        member.order.n_c, member.rows, member.cols, keys, mode, d_out
    )
    return FittedCommunity(
        member.order, params, counts, ll, mode, d_out, ll_block, ll_hycom, index=member.index
    )


def _rescore(fit, member, keys, d_out):
    counts = counts_from_cells(fit.params, member.rows, member.cols, keys)
    return replace(fit, counts=counts, log_likelihood=ll_single(counts, d_out), d_out=d_out)


def _shape_key(params):
    return (params.fixed_gamma, params.fixed_h, params.p, params.theta, params.line)


def _total(fits, n, m):
    gc = GraphCounts(tuple(f.counts for f in fits), n * n, 2 * m)
    return ll_graph(gc), gc.d_out


def _workers(n_jobs):
    if n_jobs is None:
        n_jobs = int(os.environ.get("HYPERFIT_THREADS", "1") or 1)
    return max(1, int(n_jobs))


def fit_graph(graph, node_sets, mode="full", max_rounds=50, epsilon=1e-9, n_jobs=None,
              orders=None):
    """Fit shape models to all communities of ``graph`` jointly.

    Parameters
    ----------
    graph : Graph
    node_sets : list of arrays of dense node ids, each with >= 2 nodes
    mode : fit mode used for every community (see ``fit_community``)
    max_rounds : cap on update rounds
    epsilon : a community counts as improved only if its log-likelihood
        grows by more than this
    n_jobs : worker threads for initial fits of communities that share no
        node with an earlier one; defaults to ``$HYPERFIT_THREADS`` or 1
    orders : optional per-community node orders replacing degree order
    """
    config = GraphFitConfig(mode, max_rounds, epsilon, n_jobs)
    members = []
    for k, nodes in enumerate(node_sets):
        nodes = np.asarray(nodes, dtype=np.int64)
        if nodes.size < 2:
            raise EmptyCommunity(f"community {k} has {nodes.size} node(s); at least 2 needed")
        if orders is not None and orders[k] is not None:
            order = orders[k] if isinstance(orders[k], NodeOrder) else NodeOrder(
                np.asarray(orders[k], dtype=np.int64))
        else:
            order = degree_order(graph, nodes)
        rows, cols = local_edge_cells(graph, order)
        members.append(_Community(k, order, rows, cols))
    n, m = graph.n, graph.m
    K = len(members)
    pairs, neighbors = _overlaps(members)

    # initialization: input order, local outside densities
    fits = [None] * K
    contexts = [None] * K
    independent = [k for k in range(K) if not any(o < k for o in neighbors[k])]
    dependent = [k for k in range(K) if any(o < k for o in neighbors[k])]
    empty = np.empty(0, dtype=np.int64)
    workers = _workers(n_jobs)
    if workers > 1 and len(independent) > 1:
        with ThreadPoolExecutor(workers) as pool:
            done = pool.map(lambda k: _fit_one(members[k], empty, mode, None), independent)
            for k, fit in zip(independent, done):
                fits[k] = fit
    else:
        for k in independent:
            fits[k] = _fit_one(members[k], empty, mode, None)
    for k in independent:
        contexts[k] = (empty, None)
    for k in dependent:
        keys = claimed_cells(k, set(range(k)), fits, pairs, neighbors, members[k].order.n_c)
        fits[k] = _fit_one(members[k], keys, mode, None)
        contexts[k] = (keys, None)
    fits = [replace(f, attribution_rank=k) for k, f in enumerate(fits)]
    init_total, d_out = _total(fits, n, m)
    trajectory = [init_total]
    logger.debug("initial log-likelihood %.6f, d_out %.3g", init_total, d_out)

    flagged = set(range(K))
    rounds = 0
    seen = {}
    snapshots = [list(fits)]
    termination = "converged"
    while flagged:
        if rounds >= max_rounds:
            termination = "max_rounds"
            break
        sequence = sorted(range(K), key=lambda k: (-fits[k].log_likelihood, k))
        # the likelihood order can feed back on itself (a community processed
        # later loses claimed cells and gains likelihood); a repeated state
        # means the loop is periodic, so stop there
        state = (tuple(sequence), tuple(_shape_key(f.params) for f in fits),
                 tuple(sorted(flagged)))
        if state in seen:
            termination = "cycle"
            # every state of the period is an equally valid stopping point;
            # keep the one with the highest total (earliest on ties)
            start = seen[state]
            pick = max(range(start, rounds), key=lambda r: (trajectory[r], -r))
            fits = list(snapshots[pick])
            break
        seen[state] = rounds
        rounds += 1
        earlier = set()
        improved = set()
        for rank, k in enumerate(sequence):
            keys = claimed_cells(k, earlier, fits, pairs, neighbors, members[k].order.n_c)
            old_keys, old_d = contexts[k]
            unchanged = old_d == d_out and np.array_equal(old_keys, keys)
            current = fits[k] if unchanged else _rescore(fits[k], members[k], keys, d_out)
            if k in flagged or not unchanged:
                # switch shape only when a new one beats the current in the same
                # context; a changed context alone never counts as improvement
                new = _fit_one(members[k], keys, mode, d_out)
                if new.log_likelihood > current.log_likelihood + epsilon:
                    logger.debug("community %d improved %.6f -> %.6f", k,
                                 current.log_likelihood, new.log_likelihood)
                    improved.add(k)
                    current = new
                else:
                    current = replace(current, ll_block=new.ll_block, ll_hycom=new.ll_hycom)
            fits[k] = current
            contexts[k] = (keys, d_out)
            fits[k] = replace(fits[k], attribution_rank=rank)
            earlier.add(k)
        flagged = set()
        for k in improved:
            flagged.add(k)
            flagged |= neighbors[k]
        total, d_out = _total(fits, n, m)
        logger.debug("round %d: log-likelihood %.6f, %d flagged", rounds, total, len(flagged))
        trajectory.append(total)
        snapshots.append(list(fits))

    total, final_d_out = _total(fits, n, m)
    ordered = sorted(fits, key=lambda f: (-f.log_likelihood, f.index))
    return GraphModel(
        communities=tuple(ordered),
        d_out=final_d_out,
        log_likelihood=total,
        init_log_likelihood=init_total,
        n_nodes=n,
        n_edges=m,
        n_rounds=rounds,
        converged=termination == "converged",
        termination=termination,
        trajectory=tuple(trajectory),
        config=config,
    )
