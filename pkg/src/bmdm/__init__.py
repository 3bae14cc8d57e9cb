"""Bridge micro-deformation monitoring from simulated OFDM sensing echoes."""
from .errors import (AmbiguousRange, BmdmError, DegenerateFit, DegenerateGeometry, EmptyInput,
                     MissingFrame, NoDopplerPeak, ParseError, ValidationError, ZeroSignal)
from .scenario import (BridgeParams, ExcitationSource, Interferer, RadioParams, ScenarioConfig,
                       StaticClutter, load_scenario, preset_condition, save_scenario)
from .harness import PipelineOptions, run_trial, rmse, sweep, export_csv

__version__ = "0.1.0"
