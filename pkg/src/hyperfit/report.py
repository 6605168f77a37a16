"""Flat records for fitted communities, and their inverse.

Records are plain dicts with a fixed key order so JSON output is
byte-stable.  Exact rationals are kept as ``"num/den"`` strings next to
their float values.
"""

from __future__ import annotations

import json
import math
from fractions import Fraction

from .model import ModelParams

__all__ = ["community_record", "graph_record", "params_from_record", "read_records",
           "write_records"]


def _exact(value):
    return None if value is None else str(Fraction(value))


def _num(value):
    if value is None:
        return None
    value = float(value)
    return None if math.isnan(value) else value


def community_record(fit, graph=None):
    mp = fit.params
    mix = mp.mixture
    counts = fit.counts
    nodes = fit.nodes if graph is None else graph.node_ids[fit.nodes]
    rec = {
        "type": "community",
        "index": fit.index,
        "mode": fit.mode,
        "n_c": fit.n_c,
        "gamma": mp.gamma if isinstance(mp.gamma, int) else float(mp.gamma),
        "h": mp.h if isinstance(mp.h, int) else float(mp.h),
        "fixed_point": mp.fixed_gamma is not None,
        "degenerate": mp.degenerate,
        "p": None if mp.degenerate else float(mp.p),
        "theta": None if mp.degenerate else float(mp.theta),
        "x": float(mix.x),
        "sigma": float(mix.sigma),
        "p_exact": _exact(mp.p),
        "theta_exact": _exact(mp.theta),
        "line_exact": _exact(mp.line),
        "d_in": counts.d_in,
        "area_cells": counts.area_cells,
        "edge_cells": counts.in_edge_cells,
        "complement_cells": counts.complement_cells,
        "out_edge_cells": counts.out_edge_cells,
        "excluded_cells": counts.excluded_cells,
        "d_out": _num(fit.d_out),
        "log_likelihood": fit.log_likelihood,
        "ll_block": _num(fit.ll_block),
        "ll_hycom": _num(fit.ll_hycom),
        "attribution_rank": fit.attribution_rank,
        "nodes": [int(u) for u in nodes],
    }
    return rec


def graph_record(model):
    return {
        "type": "graph",
        "mode": model.config.mode,
        "n_nodes": model.n_nodes,
        "n_edges": model.n_edges,
        "n_communities": len(model.communities),
        "d_out": model.d_out,
        "log_likelihood": model.log_likelihood,
        "init_log_likelihood": model.init_log_likelihood,
        "n_rounds": model.n_rounds,
        "termination": model.termination,
        # totals after initialization and after each update round
        "trajectory": list(model.trajectory),
    }


def params_from_record(rec):
    """Rebuild the exact ModelParams stored in a community record."""
    n_c = int(rec["n_c"])
    if rec.get("fixed_point"):
        return ModelParams.from_fixed(int(rec["gamma"]), int(rec["h"]), n_c)
    if rec.get("degenerate"):
        return ModelParams.from_mixture(1, Fraction(rec["line_exact"]), n_c)
    return ModelParams.from_hyperbolic(Fraction(rec["p_exact"]), Fraction(rec["theta_exact"]), n_c)


def write_records(records, stream):
    for rec in records:
        stream.write(json.dumps(rec, separators=(",", ":")) + "\n")


def read_records(path):
    """All records of a JSONL file; raises ValueError naming the bad line."""
    out = []
    with open(path) as fh:
        for line_number, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as err:
                raise ValueError(f"{path}: line {line_number}: not JSON ({err.msg})") from None
            if not isinstance(rec, dict) or "type" not in rec:
                raise ValueError(f"{path}: line {line_number}: record without a type")
            out.append(rec)
    return out
