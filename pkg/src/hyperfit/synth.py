"""Sample graphs with planted hyperbolic communities.

Every unordered node pair is an independent Bernoulli draw.  Pairs in the
area of a planted community use its inside density (the first community in
list order wins when areas overlap); every other pair uses the global
outside density.  Background pairs are visited by geometric skipping, which
gives the same distribution as one draw per pair.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from .graph import Graph
from .model import Infeasible, ModelParams, is_feasible

__all__ = ["PlantedCommunity", "SampleSpec", "sample_graph", "planted_spec", "area_pairs"]


@dataclass(frozen=True)
class PlantedCommunity:
    """``nodes`` lists the community in planted rank order."""

    nodes: tuple
    gamma: int
    h: int
    d_in: float

    @property
    def params(self):
        return ModelParams.from_fixed(self.gamma, self.h, len(self.nodes))


@dataclass(frozen=True)
class SampleSpec:
    n_nodes: int
    communities: tuple
    d_out: float
    seed: int = 0

    def __post_init__(self):
        if not 0 <= self.d_out <= 1:
            raise ValueError(f"outside density must lie in [0, 1], got {self.d_out}")
        for k, c in enumerate(self.communities):
            if not 0 <= c.d_in <= 1:
                raise ValueError(f"community {k}: density must lie in [0, 1], got {c.d_in}")
            if len(set(c.nodes)) != len(c.nodes):
                raise ValueError(f"community {k} lists a node twice")
            if c.nodes and (min(c.nodes) < 0 or max(c.nodes) >= self.n_nodes):
                raise ValueError(f"community {k} has a node outside [0, {self.n_nodes})")
            if len(c.nodes) < 2 or not is_feasible(c.gamma, c.h, len(c.nodes)):
                raise Infeasible(
                    f"community {k}: gamma={c.gamma}, h={c.h}, n_c={len(c.nodes)} is infeasible"
                )

    def to_dict(self):
        return {
            "n_nodes": self.n_nodes,
            "d_out": self.d_out,
            "seed": self.seed,
            "communities": [
                {**asdict(c), "nodes": list(c.nodes)} for c in self.communities
            ],
        }

    @classmethod
    def from_dict(cls, data):
        communities = tuple(
            PlantedCommunity(tuple(int(u) for u in c["nodes"]), int(c["gamma"]), int(c["h"]),
                             float(c["d_in"]))
            for c in data["communities"]
        )
        return cls(int(data["n_nodes"]), communities, float(data["d_out"]),
                   int(data.get("seed", 0)))

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def area_pairs(params):
    """Rank pairs ``(i, j)`` with ``i > j`` inside the area."""
    bounds = params.column_bounds()
    cols = np.arange(params.n_c, dtype=np.int64)
    lengths = np.clip(bounds - cols, 0, None)
    j = np.repeat(cols, lengths)
    starts = np.cumsum(lengths) - lengths
    i = np.arange(j.size, dtype=np.int64) - np.repeat(starts, lengths) + j + 1
    return i, j


def _pair_from_index(t, n):
    # inverse of t = u (2n - u - 1) / 2 + (v - u - 1) over pairs u < v
    b = 2 * n - 1
    u = np.floor((b - np.sqrt(b * b - 8.0 * t)) / 2).astype(np.int64)
    start = u * (b - u) // 2
    u = np.where(start > t, u - 1, u)
    start = u * (b - u) // 2
    nxt = (u + 1) * (b - u - 1) // 2
    u = np.where(nxt <= t, u + 1, u)
    start = u * (b - u) // 2
    v = t - start + u + 1
    return u, v


def sample_graph(spec: SampleSpec):
    """Draw a graph from ``spec``; deterministic for a given seed."""
    n = spec.n_nodes
    rng = np.random.default_rng(spec.seed)
    governed = np.empty(0, dtype=np.int64)
    edge_keys = []
    for c in spec.communities:
        nodes = np.asarray(c.nodes, dtype=np.int64)
        i, j = area_pairs(c.params)
        a, b = nodes[i], nodes[j]
        keys = np.minimum(a, b) * n + np.maximum(a, b)
        keys = keys[~np.isin(keys, governed)]
        draws = rng.random(keys.size) < c.d_in
        edge_keys.append(keys[draws])
        governed = np.union1d(governed, keys)

    total_pairs = n * (n - 1) // 2
    if spec.d_out > 0 and total_pairs:
        if spec.d_out >= 1:
            picked = np.arange(total_pairs, dtype=np.int64)
        else:
            chunks = []
            pos = -1
            batch = max(1024, int(total_pairs * spec.d_out * 1.1) + 16)
            while True:
                gaps = rng.geometric(spec.d_out, size=batch)
                steps = pos + np.cumsum(gaps)
                chunks.append(steps[steps < total_pairs])
                if steps[-1] >= total_pairs:
                    break
                pos = int(steps[-1])
            picked = np.concatenate(chunks)
        u, v = _pair_from_index(picked, n)
        keys = u * n + v
        edge_keys.append(keys[~np.isin(keys, governed)])

    keys = np.concatenate(edge_keys) if edge_keys else np.empty(0, dtype=np.int64)
    return Graph.from_edges(keys // n, keys % n, n=n)


def planted_spec(n_nodes, sizes, d_in, d_out, seed=0, shapes=None, overlap=0.0):
    """Build a spec with random node sets and shapes.

    ``shapes`` is a list of ``(gamma, h)``; when omitted, a random feasible
    pair is drawn per community.  ``overlap`` is the fraction of each
    community's nodes taken from the previous community.
    """
    rng = np.random.default_rng(seed)
    d_in = np.broadcast_to(np.asarray(d_in, dtype=float), (len(sizes),))
    perm = rng.permutation(n_nodes)
    cursor = 0
    communities = []
    previous = None
    for k, size in enumerate(sizes):
        size = int(size)
        shared = []
        if previous is not None and overlap > 0:
            take = min(int(round(overlap * size)), len(previous))
            shared = list(rng.choice(previous, size=take, replace=False))
        fresh = perm[cursor : cursor + size - len(shared)].tolist()
        if len(fresh) < size - len(shared):
            raise ValueError("not enough nodes for the requested communities")
        cursor += len(fresh)
        nodes = [int(u) for u in rng.permutation(shared + fresh)]
        if shapes is not None:
            gamma, h = shapes[k]
        else:
            gamma, h = _random_shape(size, rng)
        communities.append(PlantedCommunity(tuple(nodes), int(gamma), int(h), float(d_in[k])))
        previous = nodes
    return SampleSpec(n_nodes, tuple(communities), float(d_out), seed)


def _random_shape(n_c, rng):
    while True:
        h = int(rng.integers(0, max(1, n_c // 3)))
        gamma = int(rng.integers(h, (n_c - 1 + h) // 2 + 1))
        if is_feasible(gamma, h, n_c):
            return gamma, h


def expected_edges(spec):
    """Expected edge count, ignoring area overlap between communities."""
    inside = 0.0
    pairs = 0
    for c in spec.communities:
        i, _ = area_pairs(c.params)
        inside += c.d_in * i.size
        pairs += i.size
    total = spec.n_nodes * (spec.n_nodes - 1) // 2
    return inside + spec.d_out * (total - pairs)

