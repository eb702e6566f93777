"""Radial bound states of N-coupled cubic Schrödinger systems.

Computes the explicit product state built from scalar ground profiles and
synchronized pairs, continues it in the small coupling scale by Newton's
method, and verifies the identities a genuine solution must satisfy
(criticality, Nehari, energy, pairwise integral identities, positivity).
"""

__version__ = "0.1.0"

from .continuation import (
    ContinuationPath,
    build_unperturbed,
    continue_in_eps,
    newton_solve,
    nondegeneracy_at,
    params_at_eps,
)
from .diagnostics import (
    ObstructionValue,
    PositivityReport,
    RankedCandidate,
    classify_positivity,
    energy_comparison,
    obstruction_identities,
    positivity_obstruction_flags,
)
from .errors import (
    CnlsError,
    ConfigError,
    EigSolverFailure,
    GridMismatch,
    GridTooCoarse,
    ImmediateFailure,
    NoConvergence,
    NonzeroForbiddenCoupling,
    NotCritical,
    OutOfWindow,
    PairLambdaMismatch,
    SignChange,
    SingularJacobian,
    SolverFailure,
    ZeroDenominator,
    ZeroEps,
    ZeroState,
)
from .functional import (
    EnergyBreakdown,
    energy,
    gradient,
    hessian_apply,
    nehari_residual,
    norms,
    quartic_form,
    total_energy,
)
from .model import (
    BlockStructure,
    Field,
    RadialGrid,
    SolveReport,
    State,
    SystemParams,
    default_truncation_radius,
    grid_from_nodes,
    make_grid,
    split_blocks,
    state_from_fields,
)
from .pair import (
    PairSolution,
    contraction_rho,
    coupling_coeffs,
    pair_norm,
    pair_quotient_check,
    pair_solution,
    sync_identity_defects,
)
from .scalar import (
    ScalarGround,
    nondegeneracy_estimate,
    scale_ground,
    scaled_ground_report,
    sigma_lambda,
    sigma_minimizer,
    solve_scalar_ground,
)

__all__ = [name for name in dir() if not name.startswith("_")]
