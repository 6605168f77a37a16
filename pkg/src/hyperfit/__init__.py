"""Hyperbolic community models: shape fitting, joint graph fits, tests and sampling."""

__version__ = "0.1.0"

from .estimator import HyperbolicCommunityModel, check_graph, check_node_sets
from .fit import EmptyCommunity, FittedCommunity, fit_community
from .graph import Graph, NodeOrder, ParseError, degree_order, induced_subgraph, parse_edge_list
from .graph_fit import GraphModel, fit_graph
from .likelihood import CommunityCounts, community_counts, ll_graph, ll_single
from .model import (
    DegenerateLinear,
    FixedParams,
    HyperbolicParams,
    Infeasible,
    MixtureParams,
    ModelParams,
    area_closed_form,
    area_exact,
    area_integral,
    contains,
    fixed_to_hyperbolic,
    hyperbolic_to_mixture,
    mixture_to_hyperbolic,
)
from .stats import LrtResult, ShapeSummary, chi_square_sf, lrt, summarize
from .synth import PlantedCommunity, SampleSpec, planted_spec, sample_graph

__all__ = [
    "CommunityCounts", "DegenerateLinear", "EmptyCommunity", "FittedCommunity", "FixedParams",
    "Graph", "GraphModel", "HyperbolicCommunityModel", "HyperbolicParams", "Infeasible",
    "LrtResult", "MixtureParams", "ModelParams", "NodeOrder", "ParseError", "PlantedCommunity",
    "SampleSpec", "ShapeSummary", "area_closed_form", "area_exact", "area_integral",
    "check_graph", "check_node_sets", "chi_square_sf", "community_counts", "contains",
    "degree_order", "fit_community", "fit_graph", "fixed_to_hyperbolic", "hyperbolic_to_mixture",
    "induced_subgraph", "ll_graph", "ll_single", "lrt", "mixture_to_hyperbolic",
    "parse_edge_list", "planted_spec", "sample_graph", "summarize",
]
