"""Sparse continuous-domain reconstruction by generalized total-variation minimization.

Signals are recovered from finitely many linear measurements as nonuniform
L-splines: a few shifted Green's functions of a spline-admissible operator L
plus a null-space component.
"""

from .biortho import (
    BiorthogonalSystem,
    canonical_system,
    measurement_system,
    nullspace_fit,
    wellposedness_bound,
)
from .errors import GTVError
from .measure import DiscreteMeasure
from .measurements import (
    ApertureSample,
    DerivativeAtPoint,
    IdealSample,
    QuasiIdealSample,
    WeightedIntegral,
    moment,
    point_sample,
)
from .operators import (
    SplineAdmissibleOperator,
    derivative,
    exponential,
    fractional,
    identity,
    thin_plate,
)
from .problem import ConstraintSet, DiscretizedProblem, GridSpec, build_problem, feasibility_check
from .rightinv import RightInverse, apply_rightinv, kernel_eval, solve_ode, stability_constant
from .solvers import (
    SolveReport,
    lp_oracle_bruteforce,
    prune_knots,
    solve,
    solve_constrained,
    solve_interpolation_lp,
    solve_penalized,
)
from .spline import NonuniformSpline, from_report

__version__ = "0.1.0"

__all__ = [
    "ApertureSample",
    "BiorthogonalSystem",
    "ConstraintSet",
    "DerivativeAtPoint",
    "DiscreteMeasure",
    "DiscretizedProblem",
    "GTVError",
    "GridSpec",
    "IdealSample",
    "NonuniformSpline",
    "QuasiIdealSample",
    "RightInverse",
    "SolveReport",
    "SplineAdmissibleOperator",
    "WeightedIntegral",
    "apply_rightinv",
    "build_problem",
    "canonical_system",
    "derivative",
    "exponential",
    "feasibility_check",
    "fractional",
    "from_report",
    "identity",
    "kernel_eval",
    "lp_oracle_bruteforce",
    "measurement_system",
    "moment",
    "nullspace_fit",
    "point_sample",
    "prune_knots",
    "solve",
    "solve_constrained",
    "solve_interpolation_lp",
    "solve_ode",
    "solve_penalized",
    "stability_constant",
    "thin_plate",
    "wellposedness_bound",
]
