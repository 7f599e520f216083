"""Dual ground states of the nonlinear Helmholtz system of Hamiltonian type.

Spectral discretization on a periodic box, two ground-state solvers and an
eps-sweep showing concentration at common maxima of the coefficients.
"""

__version__ = "0.1.0"

from .concentration import (
    ConcentrationReport,
    SweepConfig,
    align_and_compare,
    barycenter,
    run_sweep,
    theorem_scaling_map,
    transplant_energy,
)
from .dual import (
    Covector,
    DualPair,
    DualProblem,
    energy,
    gradient,
    nehari_balance,
    nehari_gap,
    nehari_project,
    nehari_tangency,
    relative_residual,
)
from .errors import *  # noqa: F403
from .exponents import (
    AdmissibleExponents,
    check_admissible,
    decay_exponent,
    dual_exponent,
    rescaling_exponents,
)
from .field import (
    CoefficientField,
    ConstantCoefficient,
    GaussianBumps,
    Grid,
    ScalarField,
    coefficient_from_dict,
    field_from_function,
    inner,
    lp_norm,
    make_coefficient,
    make_grid,
    read_field,
    shift,
    signed_power,
    write_field,
)
from .groundstate import (
    PrimalPair,
    Solution,
    SolverConfig,
    dedup_solutions,
    limit_ground_energy,
    recover_primal,
    solve_ground_state,
)
from .kernel import (
    SpectralCutoff,
    band_split,
    hankel_first_kind,
    psi_value,
    verify_band_split_bounds,
)
from .resolvent import (
    ResolventPlan,
    apply_helmholtz,
    apply_resolvent,
    birman_schwinger,
    default_delta,
    make_plan,
)
