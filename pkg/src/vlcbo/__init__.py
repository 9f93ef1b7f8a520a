"""Joint transmit beamforming and photodetector orientation design for LOS visible-light links."""

__version__ = "0.1.0"

from .channel import LinkBudget, OpticalParams, rate, solve_abg  # noqa: E402
from .errors import Infeasible, ParseError, ValidationError, VlcboError  # noqa: E402
from .fixed import QosSpec, alternating_optimize, max_rate_at_budget, solve_beamforming  # noqa: E402
from .geometry import RotationAngles, rotation_matrix  # noqa: E402
from .robust import RotationBox, robust_alternating_optimize, validate_robustness  # noqa: E402
from .scenario import Scenario, load_scenario  # noqa: E402

__all__ = [
    "Infeasible", "LinkBudget", "OpticalParams", "ParseError", "QosSpec", "RotationAngles", "RotationBox",
    "Scenario", "ValidationError", "VlcboError", "alternating_optimize", "load_scenario",
    "max_rate_at_budget", "rate", "robust_alternating_optimize", "rotation_matrix", "solve_abg",
    "solve_beamforming", "validate_robustness",
]
