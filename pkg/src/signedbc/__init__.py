"""Bounded-confidence opinion dynamics on signed networks.

Attractive edges average opinions as in the Hegselmann-Krause model;
repulsive edges push within-confidence neighbours apart with a force that
fades as they approach the confidence bound.
"""

__version__ = "0.1.0"

from .dynamics import ModelParams, Trajectory, run, signed_offset, step, step_hk, step_naive
from .graph import (
    GroupAssignment,
    SignedGraph,
    build_signed_graph,
    complete_signed,
    generate_er_signed,
    generate_sbm_signed,
    load_graph,
    receptivity_subgraph,
    save_graph,
)
from .metrics import (
    MetricsReport,
    classify_regime,
    cluster_opinions,
    compute_report,
    group_distances,
    opinion_spread,
    proportional_spread,
)
from .rng import child_rng, derive_seed, make_rng
