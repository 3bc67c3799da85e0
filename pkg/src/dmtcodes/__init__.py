"""Lattice space-time codes from division algebra orders.

Builds code alphabets from orders in division algebras, computes the
closed-form diversity-multiplexing tradeoff bounds of the three code
families by exact piecewise-linear minimization over ordered cones, and
validates the surrounding union-bound machinery (Chernoff pairwise bounds,
the Gaussian determinant identity, determinant counting, and seeded
Rayleigh-fading Monte Carlo) at desk scale.
"""

__version__ = "0.1.0"

from .algebra import (
    PRESET_IDS,
    AlgebraElement,
    AlgebraPreset,
    CodeMatrix,
    OrderBasis,
    build_preset,
    embed,
    gram_matrix,
    multiply,
    reduced_norm,
)
from .chamber import (
    ChamberProblem,
    GroupKind,
    g_eval,
    min_g_exact,
    min_g_grid,
    simplex_vertices,
    subdivision_vertices,
    verify_closed_form,
)
from .codebook import (
    Codebook,
    CountTable,
    build_code,
    count_dets,
    enumerate_ball,
    growth_exponent,
    multiplexing_slope,
)
from .dmt import antenna_threshold, d1, d2, d_bar, d_double_star, d_star, dds_monotone
from .sim import SimConfig, SimResult, estimate_pe, pep_average_closed, union_bound_conditional

__all__ = [
    "PRESET_IDS", "AlgebraElement", "AlgebraPreset", "CodeMatrix", "OrderBasis",
    "build_preset", "embed", "gram_matrix", "multiply", "reduced_norm",
    "ChamberProblem", "GroupKind", "g_eval", "min_g_exact", "min_g_grid",
    "simplex_vertices", "subdivision_vertices", "verify_closed_form",
    "Codebook", "CountTable", "build_code", "count_dets", "enumerate_ball",
    "growth_exponent", "multiplexing_slope",
    "antenna_threshold", "d1", "d2", "d_bar", "d_double_star", "d_star", "dds_monotone",
    "SimConfig", "SimResult", "estimate_pe", "pep_average_closed", "union_bound_conditional",
    "__version__",
]
