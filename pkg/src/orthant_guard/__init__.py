"""orthant-guard: positivity and invariant-rectangle verification for ODE
and 1-D reaction-diffusion systems."""

__version__ = "0.1.0"

from .boxes import Face, Rectangle, positive_orthant
from .field import (
    LipschitzEstimate,
    ModelSpec,
    estimate_lipschitz,
    evaluate_field,
    existence_horizon,
    gronwall_box,
    load_model,
    model_from_parts,
    shift_time,
    trajectory_box,
)
from .conditions import (
    Certificate,
    check_nonautonomous,
    check_quasipositivity,
    check_rectangle,
    refine_witness,
)
from .ode import (
    Trajectory,
    find_counterexample,
    first_negative_event,
    gronwall_check,
    integrate,
)
from .pde import (
    Grid1D,
    GridState,
    apply_laplacian,
    check_positivity_evolution,
    converse_functional,
    dirichlet_eigenpair,
    simulate_rd,
    step_explicit,
    step_imex,
)
from . import zoo

__all__ = [
    "__version__",
    "Face",
    "Rectangle",
    "positive_orthant",
    "LipschitzEstimate",
    "ModelSpec",
    "estimate_lipschitz",
    "evaluate_field",
    "existence_horizon",
    "gronwall_box",
    "load_model",
    "model_from_parts",
    "shift_time",
    "trajectory_box",
    "Certificate",
    "check_nonautonomous",
    "check_quasipositivity",
    "check_rectangle",
    "refine_witness",
    "Trajectory",
    "find_counterexample",
    "first_negative_event",
    "gronwall_check",
    "integrate",
    "Grid1D",
    "GridState",
    "apply_laplacian",
    "check_positivity_evolution",
    "converse_functional",
    "dirichlet_eigenpair",
    "simulate_rd",
    "step_explicit",
    "step_imex",
    "zoo",
]
