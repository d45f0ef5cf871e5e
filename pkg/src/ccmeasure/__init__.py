"""Metric derivatives, k-lengths, interpolation complexity and covering
measures of curves in Euclidean space and the Heisenberg and Engel groups."""

from .curves import (
    ParametricCurve,
    WeierstrassParams,
    custom_coordinate_curve,
    engel_w_axis,
    engel_weierstrass,
    engel_z_axis,
    euclidean_segment,
    heisenberg_horizontal,
    heisenberg_vertical,
    polyline,
    weierstrass_eval,
)
from .derivative import (
    ScaleLadder,
    carnot_analytic_meas,
    degree_estimate,
    mc1k_check,
    meas_k_estimate,
    reparam_by_k_length,
)
from .errors import CCMeasureError, EstimateError, InputError, SolverError
from .measures import (
    TheoremConfig,
    ball_preimage,
    density_profile,
    hausdorff_upper,
    holder_bounds_estimate,
    interpolation_complexity,
    interpolation_complexity_bruteforce,
    length_k,
    metric_entropy,
    spherical_upper,
    verify_main_theorem,
)
from .rectifiability import RectifiableSet, density_bounds_check, set_measure_k
from .spaces import (
    SolverConfig,
    dilate,
    distance,
    distances,
    engel,
    engel_bvp_distance,
    euclidean,
    group_compose,
    group_inverse,
    heisenberg,
    normalize_homogeneous,
    space_from_name,
)

__version__ = "0.1.0"
