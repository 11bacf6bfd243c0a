from .generators import EXSD_BENCHMARKS, HYPOTHESIS_TESTS, gen_egrd, gen_exsd, gen_gap_study, gen_hypothesis, rect
from .io import canonical, load_scenario, read_scenario, save_scenario, scenario_from_dict, write_scenario
from .model import DomainSample, ObstacleConfig, Scenario, ScenarioError, Task, validate

__all__ = [
    "EXSD_BENCHMARKS", "HYPOTHESIS_TESTS", "gen_egrd", "gen_exsd", "gen_gap_study", "gen_hypothesis", "rect",
    "canonical", "load_scenario", "read_scenario", "save_scenario", "scenario_from_dict", "write_scenario",
    "DomainSample", "ObstacleConfig", "Scenario", "ScenarioError", "Task", "validate",
]
