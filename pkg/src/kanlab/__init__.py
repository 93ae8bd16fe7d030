"""Spline-based Kolmogorov-Arnold network engine with pluggable
initialization schemes, fitting/PDE benchmark harnesses, and
tangent-kernel spectrum analysis."""

from .estimator import KanRegressor
from .initschemes import InitScheme, Moments, apply_scheme, estimate_moments
from .network import (
    KanLayer,
    KanNetwork,
    build_network,
    input_derivatives,
    layer_forward,
    load_network,
    network_forward,
    normalized_basis_values,
    parameter_gradients,
    save_network,
    silu,
    silu_prime,
)
from .optim import AdamState, TrainRecord, adam_step, mse_loss, relative_l2, train_fit
from .pde import (
    PdeProblem,
    RbaState,
    bc_residuals,
    helmholtz_reference,
    load_reference_solution,
    make_problem,
    pde_residual,
    piml_loss,
    rba_update,
    train_pde,
)
from .ntk import (
    NtkSpectrum,
    eigen_spectrum,
    fit_ntk,
    residual_jacobian,
    weighted_ntk_blocks,
)
from .spline import KnotVector, basis_derivatives, basis_values, build_knot_vector
from .targets import FitTask, make_task

__version__ = "0.1.0"
