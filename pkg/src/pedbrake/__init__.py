"""Deterministic pedestrian-emergency-braking simulator.

Cascaded PD brake controller and companion steering controller, plant
models, a calibratable detection-noise model, closed-form stability
analysis, and a CLI that reproduces the desk experiments.
"""

__version__ = "0.1.0"

from ._kernel import BACKEND_NAME as kernel_backend  # noqa: F401
from .analysis import (  # noqa: F401
    SecondOrderPolynomial,
    StabilityReport,
    analyze_gains,
    closed_loop_denominator,
    closed_loop_poles,
    ramp_error_bound,
    routh_hurwitz_stable,
    stability_report,
)
from .control import (  # noqa: F401
    ControllerStepRecord,
    LongitudinalConfig,
    PdGains,
    braking_force,
    force_to_brake_command,
    lateral_gains,
    lateral_step,
    longitudinal_step,
    braking_gains,
    reference_velocity,
)
from .dynamics import (  # noqa: F401
    LateralParams,
    LateralState,
    LongitudinalParams,
    LongitudinalState,
    integrate_step,
    lateral_derivative,
    longitudinal_derivative,
    step_lateral,
    step_longitudinal,
)
from .scenarios import (  # noqa: F401
    CharacterizationLog,
    LateralScenarioConfig,
    LateralTrajectoryLog,
    ScenarioConfig,
    TrajectoryLog,
    default_sweep_base,
    run_braking_scenario,
    run_detection_characterization,
    run_kp_sweep,
    run_lateral_scenario,
)
from .sensing import (  # noqa: F401
    DetectionNoiseModel,
    Measurement,
    noise_free,
    sample_detection,
    smooth,
)
