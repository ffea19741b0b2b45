"""Scenarios, configuration, output and the command line front end."""

from .config import ConfigError, MeshSpec, RegionRule, ScenarioConfig, from_ini, load_config, save_config, to_ini
from .run import Comparison, FieldOutput, RunResult, build_system, compare, run, solve_config
from .scenarios import scenario_capillary_barrier, scenario_linear_verification, scenario_realistic

__all__ = [
    "ConfigError", "MeshSpec", "RegionRule", "ScenarioConfig", "from_ini", "load_config", "save_config",
    "to_ini", "Comparison", "FieldOutput", "RunResult", "build_system", "compare", "run", "solve_config",
    "scenario_capillary_barrier", "scenario_linear_verification", "scenario_realistic",
]
