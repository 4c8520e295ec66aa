"""Prabhakar-type fractional integral operators with respect to an increasing map psi.

The public surface is re-exported here; see the submodules for details.
"""

__version__ = "0.1.0"

from . import _backend
from .cauchy import (
    CauchyProblem,
    GenericForcing,
    MLForcing,
    PowerForcing,
    SeriesDiagnostics,
    SeriesSolution,
    VolterraForm,
    ZeroForcing,
    free_term,
    picard_grid,
    picard_iterate,
    solve_particular,
    solve_series,
    to_volterra,
    volterra_residual,
    volterra_solve,
)
from .errors import ConvergenceWarning, DomainError, EnvelopeError, GridWarning, SingularStepError
from .operators import (
    OperatorSpec,
    SampledFunction,
    WeightedNorm,
    apply_on_nodes,
    bound_constant,
    caputo_apply,
    caputo_power,
    inverse_apply,
    operator_matrix,
    prabhakar_apply,
    prabhakar_apply_right,
    prabhakar_power,
    prabhakar_power_right,
    psi_derivative,
    rl_apply,
    rl_power,
    weighted_norm,
)
from .psi import PsiDiagnostics, PsiMap, psi_eval, psi_grid, psi_prime, reflect, validate_psi
from .special_fn import MLParams, SeriesControl, beta, log_gamma, ml3, ml3_terms, ml3_value, pochhammer


def backend():
    """Name of the kernel backend in use: ``"compiled"`` or ``"python"``."""
    return _backend.name
