"""Traffic Reaction Model: finite-volume LWR traffic flow and its reaction-network form."""

from .analysis import (
    ErrorReport,
    LyapunovReport,
    error_norms,
    lyapunov_bound,
    lyapunov_decay_check,
    lyapunov_value,
    spatial_error,
    total_variation,
)
from .core import (
    CflError,
    CopyOut,
    DensityState,
    DomainError,
    FactorizedFlux,
    Fixed,
    FluxModel,
    Grid,
    NumericalGuardError,
    PiecewiseConstant,
    PiecewiseLinear,
    RampConfig,
    Ring,
    StepSignal,
    cell_average_init,
)
from .crn import (
    ReactionNetwork,
    build_network,
    compatibility_class_check,
    export_reaction_graph,
    mass_action_rhs,
    reduce_to_trm,
    simulate_mass_action,
    stoichiometric_subspace,
)
from .exact import RiemannProblem, exact_cell_averages, exact_solution, rarefaction_problem, shock_problem
from .integrate import CflPolicy, Trajectory, integrate_reference, run_euler, step_euler
from .schemes import TRM, Godunov, LaxFriedrichs, SemiDiscrete, flux_godunov, flux_lxf, flux_trm, make_flux, rhs

__version__ = "0.1.0"
