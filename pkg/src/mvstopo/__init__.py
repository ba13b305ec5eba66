"""Exact finite models of metric value sets, quasimetrics and their topologies."""

from .errors import AxiomViolation, ClauseFailure, HypothesisError, InputError, MvsTopoError
from .mvs import (
    MvsHom,
    MvsTable,
    adjoin_infinity,
    are_isomorphic,
    classify,
    collapse_mvs,
    common_lower_bound,
    enumerate_mvs,
    enumerate_mvs_bruteforce,
    find_subdivision,
    is_atom_free,
    is_commutative,
    is_strictly_atom_free,
    max_mvs,
    validate_hom,
    validate_mvs,
)
from .topology import (
    FiniteTopology,
    NbhdSystem,
    generate_topology,
    product_topology,
    relative_topology,
    systems_equivalent,
    topology_from_opens,
    topology_of,
)
from .qmetric import (
    QmSpace,
    alexandrov_metrize,
    ball,
    canonical_metric_function,
    closed_ball_equivalence,
    glue,
    induced_topology,
    product,
    pullback,
    restrict,
    validate_qm,
)
from .quniform import Entourage, EntourageBase, base_from_qm, base_topology, compose, validate_base
from .character import (
    convexify_stage,
    convexify_until,
    embed_full,
    entourage_mvs,
    full_convex_report,
    metrize_from_base,
    roundtrip,
)
from .report import Report

__version__ = "0.1.0"
