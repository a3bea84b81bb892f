"""Finite-horizon LQ tracking toolkit for the automatic landing flare."""
from .aircraft import AircraftParams, StateSpaceModel, build_state_space, characteristic_coefficients
from .constraints import ConstraintLimits, ConstraintReport, format_report, validate
from .dopri import IntegratorSettings, OdeSolution, integrate
from .errors import (
    ConfigError,
    FlareLQTError,
    IntegrationError,
    InvalidParameterError,
    NoRootError,
    RiccatiBlowUp,
)
from .lqt import GainSchedule, Horizon, TrackingWeights, control_law, feedback_gain, solve_gains
from .pipeline import PipelineRun, RegionResult, admissible_region, run
from .simulation import SimConfig, SimResult, performance_index, simulate, simulate_batch, simpson
from .trajectory import (
    ApproachPlate,
    FlareGeometry,
    FlareInputs,
    reference_state,
    solve_flare_geometry,
    touchdown_time,
)

__version__ = "0.1.0"
