"""Numerical toolkit for rotation sets of torus maps homotopic to the identity."""

from ._backend import NAME as BACKEND
from .deviation import (
    DeviationReport,
    SupportBoundReport,
    probe_support_bound,
    probe_support_deviations,
    refine_hull_by_deviation,
)
from .hull import (
    ConvexPolygon,
    RotationSetEstimate,
    classify_boundary_point,
    contains_with_margin,
    convex_hull,
    estimate_rotation_set,
    hausdorff,
    scale_translate,
    support_function_estimate,
    supporting_line,
)
from .maps import (
    Expression,
    TorusLift,
    Translation,
    TwoShear,
    check_periodicity,
    eval_lift,
    jacobian,
    make_lift,
    parse_map_expr,
    project_torus,
)
from .measure import (
    area_preservation_check,
    interior_check,
    lebesgue_rotation_vector,
    orbit_rotation_vector,
)
from .orbit import GridSpec, batch_displacements, birkhoff_average, displacement, orbit_deltas
from .periodic import SearchConfig, classify, find_periodic, realize_rational
from .staircase import Direction, build_staircase, check_invariant, extend_negative

__version__ = "0.1.0"
