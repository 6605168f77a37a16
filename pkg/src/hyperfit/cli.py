"""Command-line interface: ``hyperfit <subcommand> ...``.

Subcommands
-----------
fit-community  fit each community on its own (local outside density)
fit-graph      fit all communities jointly with a global outside density
lrt            likelihood-ratio tests against block / HyCom restrictions
convert        translate between the three shape parameterizations
sample         draw a graph with planted communities
render         export the cells and model boundary of one community as CSV
summarize      quartiles of gamma/n_c, h/n_c and x over fitted communities

Exit codes: 0 success, 1 runtime failure (bad input data), 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from contextlib import contextmanager
from fractions import Fraction

import numpy as np

from . import __version__
from .fit import MODES, FittedCommunity, fit_community
from .graph import (NodeOrder, ParseError, local_edge_cells, read_communities, read_edge_list,
                    write_communities, write_edge_list)
from .graph_fit import fit_graph
from .model import DegenerateLinear, Infeasible, ModelParams, area_exact
from .report import (community_record, graph_record, params_from_record, read_records,
                     write_records)
from .stats import lrt, restricted_df, summarize
from .synth import SampleSpec, planted_spec, sample_graph

logger = logging.getLogger("hyperfit")


class CliError(Exception):
    """Expected failure with a message for the user."""


@contextmanager
def _output(path):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="\n") as fh:
            yield fh


def _load_graph(path):
    try:
        graph, stats = read_edge_list(path)
    except FileNotFoundError:
        raise CliError(f"graph file not found: {path}") from None
    except ParseError as err:
        raise CliError(f"malformed graph file {path}: {err}") from None
    if stats.self_loops or stats.duplicates:
        logger.info("%s: dropped %d self-loops, %d duplicate edges", path, stats.self_loops,
                    stats.duplicates)
    return graph


def _load_communities(path, graph):
    try:
        communities = read_communities(path, graph)
    except FileNotFoundError:
        raise CliError(f"community file not found: {path}") from None
    except ParseError as err:
        raise CliError(f"malformed community file {path}: {err}") from None
    for k, c in enumerate(communities):
        if c.size < 2:
            raise CliError(f"community {k} in {path} has fewer than 2 nodes")
    if not communities:
        raise CliError(f"community file {path} lists no communities")
    return communities


def _select(communities, indices, path):
    if indices is None:
        return list(range(len(communities)))
    for k in indices:
        if not 0 <= k < len(communities):
            raise CliError(f"community index {k} out of range; {path} has {len(communities)}")
    return list(indices)


def _load_records(path):
    try:
        records = read_records(path)
    except FileNotFoundError:
        raise CliError(f"model file not found: {path}") from None
    except ValueError as err:
        raise CliError(f"malformed model file: {err}") from None
    return records


def _communities_of(records, path):
    out = [r for r in records if r["type"] == "community"]
    if not out:
        raise CliError(f"model file {path} holds no community records")
    return sorted(out, key=lambda r: r["index"])


def cmd_fit_community(args):
    graph = _load_graph(args.graph)
    communities = _load_communities(args.communities, graph)
    records = []
    for k in _select(communities, args.index, args.communities):
        fit = fit_community(graph, communities[k], mode=args.mode)
        fit = FittedCommunity(fit.order, fit.params, fit.counts, fit.log_likelihood, fit.mode,
                              None, fit.ll_block, fit.ll_hycom, index=k)
        records.append(community_record(fit, graph))
    with _output(args.out) as fh:
        write_records(records, fh)


def cmd_fit_graph(args):
    graph = _load_graph(args.graph)
    communities = _load_communities(args.communities, graph)
    model = fit_graph(graph, communities, mode=args.mode, max_rounds=args.max_rounds,
                      epsilon=args.epsilon, n_jobs=args.threads)
    records = [community_record(f, graph) for f in model.communities]
    records.append(graph_record(model))
    with _output(args.out) as fh:
        write_records(records, fh)


def cmd_lrt(args):
    rows = []
    if args.ll_full is not None or args.ll_restricted is not None:
        if args.ll_full is None or args.ll_restricted is None or args.df is None:
            raise CliError("--ll-full, --ll-restricted and --df must be given together")
        if args.df < 1:
            raise CliError("--df must be at least 1")
        res = lrt(args.ll_full, args.ll_restricted, args.df)
        rows.append(("value", "", res))
    else:
        if args.full is None:
            raise CliError("lrt needs --full MODELS or --ll-full/--ll-restricted/--df")
        records = _load_records(args.full)
        comms = _communities_of(records, args.full)
        key = "ll_block" if args.against == "block" else "ll_hycom"
        for rec in comms:
            if rec.get(key) is None:
                raise CliError(f"{args.full}: community {rec['index']} has no {key}; "
                               "fit it with --mode full")
            # restricted fit in the same context as the full one
            res = lrt(rec["log_likelihood"], rec[key], restricted_df(args.against))
            rows.append(("community", rec["index"], res))
        if args.restricted is not None:
            full_graph = [r for r in records if r["type"] == "graph"]
            other = [r for r in _load_records(args.restricted) if r["type"] == "graph"]
            if not full_graph or not other:
                raise CliError("graph-level test needs fit-graph outputs with a trailer record")
            res = lrt(full_graph[-1]["log_likelihood"], other[-1]["log_likelihood"],
                      restricted_df(args.against, len(comms)))
            rows.append(("graph", "", res))
    with _output(args.out) as fh:
        fh.write("scope\tindex\tlambda\tdf\tp_value\n")
        for scope, index, res in rows:
            fh.write(f"{scope}\t{index}\t{res.statistic!r}\t{res.df}\t{res.p_value!r}\n")


def _fraction_arg(text):
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _number(value):
    value = float(value)
    return int(value) if value.is_integer() else value


def cmd_convert(args):
    given = [args.gamma is not None or args.h is not None,
             args.p is not None or args.theta is not None,
             args.x is not None or args.sigma is not None]
    if sum(given) != 1:
        raise CliError("give exactly one of --gamma/--h, --p/--theta or --x/--sigma")
    try:
        if given[0]:
            if args.gamma is None or args.h is None:
                raise CliError("--gamma and --h must be given together")
            mp = ModelParams.from_fixed(args.gamma, args.h, args.n)
        elif given[1]:
            if args.p is None or args.theta is None:
                raise CliError("--p and --theta must be given together")
            mp = ModelParams.from_hyperbolic(args.p, args.theta, args.n)
        else:
            if args.x is None or args.sigma is None:
                raise CliError("--x and --sigma must be given together")
            mp = ModelParams.from_mixture(args.x, args.sigma, args.n)
    except (Infeasible, DegenerateLinear) as err:
        raise CliError(f"infeasible parameters: {err}") from None
    except ValueError as err:
        raise CliError(f"invalid parameters: {err}") from None
    mix = mp.mixture
    lines = [
        ("n", mp.n_c),
        ("gamma", _number(mp.gamma)),
        ("h", _number(mp.h)),
        ("degenerate", str(mp.degenerate).lower()),
    ]
    if not mp.degenerate:
        lines += [("p", float(mp.p)), ("theta", float(mp.theta)),
                  ("p_exact", str(mp.p)), ("theta_exact", str(mp.theta))]
    lines += [("x", float(mix.x)), ("sigma", float(mix.sigma)), ("area", area_exact(mp))]
    with _output(args.out) as fh:
        for name, value in lines:
            fh.write(f"{name}={value}\n")


def _parse_list(text, kind, name):
    try:
        return [kind(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise CliError(f"--{name} expects a comma-separated list, got {text!r}") from None


def cmd_sample(args):
    try:
        if args.spec is not None:
            try:
                spec = SampleSpec.from_json(args.spec)
            except FileNotFoundError:
                raise CliError(f"spec file not found: {args.spec}") from None
            except (KeyError, TypeError, json.JSONDecodeError) as err:
                raise CliError(f"malformed spec file {args.spec}: {err}") from None
            if args.seed is not None:
                spec = SampleSpec(spec.n_nodes, spec.communities, spec.d_out, args.seed)
        else:
            if args.n_nodes is None or args.sizes is None:
                raise CliError("sample needs --spec or --n-nodes with --sizes")
            sizes = _parse_list(args.sizes, int, "sizes")
            shapes = None
            if args.gammas is not None or args.hs is not None:
                if args.gammas is None or args.hs is None:
                    raise CliError("--gammas and --hs must be given together")
                gammas = _parse_list(args.gammas, int, "gammas")
                hs = _parse_list(args.hs, int, "hs")
                if not len(gammas) == len(hs) == len(sizes):
                    raise CliError("--sizes, --gammas and --hs need the same length")
                shapes = list(zip(gammas, hs))
            d_in = _parse_list(args.d_in, float, "d-in")
            if len(d_in) not in (1, len(sizes)):
                raise CliError("--d-in takes one value or one per community")
            spec = planted_spec(args.n_nodes, sizes, d_in if len(d_in) > 1 else d_in[0],
                                args.d_out, seed=args.seed or 0, shapes=shapes,
                                overlap=args.overlap)
    except Infeasible as err:
        raise CliError(f"infeasible planted parameters: {err}") from None
    except ValueError as err:
        raise CliError(f"invalid sample spec: {err}") from None
    graph = sample_graph(spec)
    write_edge_list(graph, args.out_graph, keep_isolated=True)
    if args.out_communities is not None:
        # nodes are listed in planted rank order
        write_communities([c.nodes for c in spec.communities], args.out_communities)
    if args.manifest is not None:
        manifest = spec.to_dict()
        manifest["n_edges"] = graph.m
        with open(args.manifest, "w") as fh:
            json.dump(manifest, fh, indent=1)
            fh.write("\n")


def cmd_render(args):
    graph = _load_graph(args.graph)
    communities = _load_communities(args.communities, graph)
    k = args.community_index
    _select(communities, [k], args.communities)
    if args.models is not None:
        recs = [r for r in _communities_of(_load_records(args.models), args.models)
                if r["index"] == k]
        if not recs:
            raise CliError(f"{args.models} has no record for community {k}")
        rec = recs[0]
        try:
            order = NodeOrder(graph.dense_ids(rec["nodes"]))
        except KeyError as err:
            raise CliError(f"{args.models}: {err.args[0]}") from None
        if not np.array_equal(np.sort(order.nodes), np.sort(communities[k])):
            raise CliError(f"{args.models}: community {k} does not match the community file")
        params = params_from_record(rec)
    else:
        fit = fit_community(graph, communities[k], mode=args.mode)
        order, params = fit.order, fit.params
    n_c = order.n_c
    rows, cols = local_edge_cells(graph, order)
    edge = np.zeros((n_c, n_c), dtype=bool)
    edge[rows, cols] = True
    edge[cols, rows] = True
    ii, jj = np.meshgrid(np.arange(n_c), np.arange(n_c), indexing="ij")
    inside = params.contains(ii, jj)
    if args.edges_only:
        keep = edge
    else:
        keep = np.ones_like(edge)
    bounds = params.column_bounds()
    with _output(args.out) as fh:
        fh.write("rank_i,rank_j,is_edge,in_area\n")
        sel_i, sel_j = np.nonzero(keep)
        fh.writelines(
            f"{i},{j},{int(e)},{int(a)}\n"
            for i, j, e, a in zip(sel_i.tolist(), sel_j.tolist(), edge[sel_i, sel_j].tolist(),
                                  inside[sel_i, sel_j].tolist())
        )
        fh.write("\nj,boundary_i\n")
        fh.writelines(f"{j},{int(b)}\n" for j, b in enumerate(bounds.tolist()))


def cmd_summarize(args):
    fits = []
    for path in args.models:
        for rec in _communities_of(_load_records(path), path):
            fits.append(_RecordFit(params_from_record(rec)))
    summary = summarize(fits)
    with _output(args.out) as fh:
        fh.write("quantity\tq25\tmedian\tq75\n")
        for name, q25, med, q75 in summary.rows():
            fh.write(f"{name}\t{q25!r}\t{med!r}\t{q75!r}\n")
        fh.write(f"count\t{summary.count}\t{summary.count}\t{summary.count}\n")


class _RecordFit:
    def __init__(self, params):
        self.params = params
        self.n_c = params.n_c


def build_parser():
    parser = argparse.ArgumentParser(prog="hyperfit", description=__doc__.split("\n")[0],
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("fit-community", help="fit communities independently")
    p.add_argument("--graph", required=True)
    p.add_argument("--communities", required=True)
    p.add_argument("--index", type=int, nargs="+", help="community indices (default: all)")
    p.add_argument("--mode", choices=MODES, default="full")
    p.add_argument("--out")
    p.set_defaults(func=cmd_fit_community)

    p = sub.add_parser("fit-graph", help="fit all communities jointly")
    p.add_argument("--graph", required=True)
    p.add_argument("--communities", required=True)
    p.add_argument("--mode", choices=MODES, default="full")
    p.add_argument("--max-rounds", type=int, default=50)
    p.add_argument("--epsilon", type=float, default=1e-9)
    p.add_argument("--threads", type=int, help="workers for initial fits ($HYPERFIT_THREADS)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_fit_graph)

    p = sub.add_parser("lrt", help="likelihood-ratio tests")
    p.add_argument("--full", help="JSONL from a --mode full fit")
    p.add_argument("--restricted", help="JSONL from the restricted fit-graph run")
    p.add_argument("--against", choices=("block", "hycom"), default="block")
    p.add_argument("--ll-full", type=float)
    p.add_argument("--ll-restricted", type=float)
    p.add_argument("--df", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_lrt)

    p = sub.add_parser("convert", help="convert shape parameters")
    p.add_argument("--n", type=int, required=True, help="community size")
    p.add_argument("--gamma", type=int)
    p.add_argument("--h", type=int)
    p.add_argument("--p", type=_fraction_arg)
    p.add_argument("--theta", type=_fraction_arg)
    p.add_argument("--x", type=_fraction_arg)
    p.add_argument("--sigma", type=_fraction_arg)
    p.add_argument("--out")
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("sample", help="sample a graph with planted communities")
    p.add_argument("--spec", help="JSON sample spec (as written by --manifest)")
    p.add_argument("--n-nodes", type=int)
    p.add_argument("--sizes", help="comma-separated community sizes")
    p.add_argument("--gammas", help="comma-separated gamma per community")
    p.add_argument("--hs", help="comma-separated h per community")
    p.add_argument("--d-in", default="0.9", help="inside density, one or one per community")
    p.add_argument("--d-out", type=float, default=0.01)
    p.add_argument("--overlap", type=float, default=0.0)
    p.add_argument("--seed", type=int)
    p.add_argument("--out-graph", required=True)
    p.add_argument("--out-communities")
    p.add_argument("--manifest")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("render", help="export one community's cells and boundary")
    p.add_argument("--graph", required=True)
    p.add_argument("--communities", required=True)
    p.add_argument("--community-index", type=int, required=True)
    p.add_argument("--models", help="JSONL fit output to take order and shape from")
    p.add_argument("--mode", choices=MODES, default="full")
    p.add_argument("--edges-only", action="store_true", help="write only edge cells")
    p.add_argument("--out")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("summarize", help="parameter quartiles")
    p.add_argument("--models", required=True, nargs="+")
    p.add_argument("--out")
    p.set_defaults(func=cmd_summarize)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        args.func(args)
    except CliError as err:
        print(f"hyperfit {args.command}: error: {err}", file=sys.stderr)
        return 1
    except OSError as err:
        print(f"hyperfit {args.command}: error: {err.strerror}: {err.filename}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
