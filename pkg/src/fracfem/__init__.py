"""Weighted-basis finite elements for the integral fractional Laplacian in 1D.

The discrete space multiplies piecewise-linear hats by delta^s, where delta
is a smooth regularized boundary distance; this captures the d^s boundary
behaviour of solutions and restores near-optimal convergence rates on
uniform meshes.
"""

from .assembly import (
    AssemblyError,
    FactorizationError,
    LoadVector,
    StiffnessMatrix,
    assemble_load,
    assemble_stiffness,
    dump_matrix,
    galerkin_residual,
    solve_system,
)
from .basis import (
    DiscreteSolution,
    WfemSpace,
    eval_pl,
    eval_solution,
    hat_eval,
    interp_pl,
    interp_weighted,
    interp_weighted_from_values,
    make_space,
    weighted_basis_eval,
)
from .errors import (
    EnergyIdentityError,
    ErrorReport,
    hs_error_energy,
    hs_seminorm_direct,
    l2_error,
    make_report,
    observed_rates,
)
from .experiments import (
    ExperimentConfig,
    emit_report,
    run_bonito,
    run_convergence_f1,
    run_exact_case,
    run_interp_demo,
)
from .mesh import Mesh1D, build_uniform_mesh, element_pair_class
from .quadrature import (
    QuadratureConvergenceError,
    QuadRule,
    adaptive_oracle_integral,
    gauss_jacobi,
    gauss_legendre,
    singular_pair_integral,
)
from .special import (
    FracParams,
    ball_solution,
    ball_solution_constant,
    bonito_rhs,
    frac_lap_constant,
    frac_params,
    gamma,
    gauss_2f1,
)
from .weight import (
    WeightFn,
    check_weight_assumption,
    delta_eval,
    delta_pow_s,
    killing_potential,
    make_weight,
)

__version__ = "0.1.0"
