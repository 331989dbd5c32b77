"""Discrete-event simulator of camera-assisted proactive handover around mmWave blockage."""

from .channel import BlockageModel, MosMapping, RssModel
from .engine import Models, RunConfig, RunResult, Scenario, metrics, run, sweep
from .errors import ConfigError
from .pho import TimingBudget, plan_trigger, trigger_table
from .scene import Obstacle, SbsSite, Scene, Trajectory, mph_to_mps, shadow_interval

__version__ = "0.1.0"

__all__ = [
    "BlockageModel", "ConfigError", "Models", "MosMapping", "Obstacle", "RssModel", "RunConfig",
    "RunResult", "SbsSite", "Scenario", "Scene", "TimingBudget", "Trajectory", "metrics", "mph_to_mps",
    "plan_trigger", "run", "shadow_interval", "sweep", "trigger_table",
]
