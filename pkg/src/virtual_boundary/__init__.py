"""Exact and numerical verification of a divergent equivariant quasi-isometry between two CAT(0) complexes."""

from .lattice_algebra import Lattice, Scalar, canonicalize, index, intersect, is_commensurable, lattice_sum
from .free_words import FreeWord, conjugate_commensurable_cyclic
from .complex_model import build_complex, fringe_angle, reduce
from .geodesic_engine import broken_L, minimize_L, period_length, shortest_path
from .group_model import build_example_graph, check_admissible
from .geometric_data import compare_data, mls, recover_coordinates
from .counterexample import (
    boundary_witness,
    build_pair,
    build_segment,
    midpoint_divergence,
    run_report,
    sublinearity_ratio,
)

__version__ = "0.1.0"

__all__ = [
    "Lattice",
    "Scalar",
    "canonicalize",
    "index",
    "intersect",
    "is_commensurable",
    "lattice_sum",
    "FreeWord",
    "conjugate_commensurable_cyclic",
    "build_complex",
    "fringe_angle",
    "reduce",
    "broken_L",
    "minimize_L",
    "period_length",
    "shortest_path",
    "build_example_graph",
    "check_admissible",
    "compare_data",
    "mls",
    "recover_coordinates",
    "boundary_witness",
    "build_pair",
    "build_segment",
    "midpoint_divergence",
    "run_report",
    "sublinearity_ratio",
]
