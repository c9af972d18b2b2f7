"""Cyclic intrepid projections for convex feasibility problems.

The package solves "find a point in the intersection of closed convex
sets" by sweeping relaxed or intrepid projection steps over the sets,
specialized to road vertical-alignment design: elevation profiles under
interpolation, slope, and curvature constraints, with an optional
nonconvex minimum-grade variant handled heuristically.

Hot loops run through numba-compiled kernels with a pure-numpy fallback;
set the ``CYCIP_BACKEND`` environment variable to ``numba``, ``numpy``,
or ``auto`` (default) to choose.
"""

from .bench import (
    AlgorithmSpec,
    ProfileCurve,
    RatioTable,
    RunResult,
    builtin_algorithms,
    export_results,
    performance_ratios,
    profile_curves,
    read_results,
    run_suite,
)
from .control import ControlSchedule, QuasiperiodCertificate, validate_quasicyclic
from .geometry import (
    CoordinateAffine,
    Enlargement,
    Hyperplane,
    Hyperslab,
    SlabFamily,
    validate_disjoint_support,
)
from .kernels import ITERATION_LIMIT, SOLVED, TIME_LIMIT, active_backend, resolve_backend
from .operators import (
    BlockIntrepidProjector,
    FamilySlabOperator,
    IntrepidProjector,
    RelaxedProjector,
    decrease_certificate,
)
from .road import (
    CompiledRoadSets,
    ConstraintCheck,
    FeasibilityReport,
    FeasibilityWitness,
    GeneratorParams,
    MinSlopeSlabFamily,
    ProblemFormatError,
    RoadProblem,
    compile_constraints,
    generate_problem,
    initial_point,
    project_minslope,
    read_problem,
    read_witness,
    verify_feasible,
    write_problem,
    write_witness,
)
from .solver import (
    FeasibilityProblem,
    IterationTrace,
    SolveResult,
    SolverConfig,
    fejer_margin,
    infeasibility_d2,
    infeasibility_dinf,
    run_cycip,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "AlgorithmSpec",
    "BlockIntrepidProjector",
    "CompiledRoadSets",
    "ConstraintCheck",
    "ControlSchedule",
    "CoordinateAffine",
    "FeasibilityReport",
    "Enlargement",
    "FamilySlabOperator",
    "FeasibilityProblem",
    "FeasibilityWitness",
    "GeneratorParams",
    "Hyperplane",
    "Hyperslab",
    "ITERATION_LIMIT",
    "IntrepidProjector",
    "IterationTrace",
    "MinSlopeSlabFamily",
    "ProblemFormatError",
    "ProfileCurve",
    "QuasiperiodCertificate",
    "RatioTable",
    "RelaxedProjector",
    "RoadProblem",
    "RunResult",
    "SOLVED",
    "SlabFamily",
    "SolveResult",
    "SolverConfig",
    "TIME_LIMIT",
    "active_backend",
    "builtin_algorithms",
    "compile_constraints",
    "decrease_certificate",
    "export_results",
    "fejer_margin",
    "generate_problem",
    "infeasibility_d2",
    "infeasibility_dinf",
    "initial_point",
    "performance_ratios",
    "profile_curves",
    "project_minslope",
    "read_problem",
    "read_results",
    "read_witness",
    "resolve_backend",
    "run_cycip",
    "run_suite",
    "validate_disjoint_support",
    "validate_quasicyclic",
    "verify_feasible",
    "write_problem",
    "write_witness",
]
