"""Pump-probe cavity optomechanics: steady states, OMIT response and mass sensing."""
from .errors import (
    ConfigError, InversionError, NumericalError, OmitSenseError, ParameterError,
    SimulationDivergence, SingularSystemError,
)
from .model import HBAR, DriveFields, SystemParams, build_params, drive_amplitude, make_drives
from .steady_state import SteadyState, bistability_scan, operating_point, steady_states
from .linear_response import solve_sidebands, spectrum_sweep, transmissions
from .mass_sensing import invert_mass, kst_of_mass, relative_intensity, sensitivity_beta
from .time_domain import SimulationConfig, sense_mass_pipeline, simulate

__version__ = "0.1.0"
