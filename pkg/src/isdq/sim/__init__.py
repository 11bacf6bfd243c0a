from .engine import (
    DEFAULT_DT, Prepared, SimResult, SweepError, Trajectory, count_collisions, prepare, run_prepared, sf_step_force,
    simulate,
    solo_trajectory, sweep,
)
from .params import SOLO_INDEX, THETA_1, THETA_M, ParamSpace, SfParams, interpolate_params

__all__ = [
    "DEFAULT_DT", "Prepared", "SimResult", "SweepError", "Trajectory", "count_collisions", "prepare",
    "run_prepared", "sf_step_force", "simulate", "solo_trajectory", "sweep",
    "SOLO_INDEX", "THETA_1", "THETA_M", "ParamSpace", "SfParams", "interpolate_params",
]
