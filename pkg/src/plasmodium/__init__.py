"""Deterministic lattice simulator of a cohesive particle swarm.

A population of simple sensing particles deposits and follows a diffusing
trail factor, condensing into a blob that develops collective oscillations
and amoeboid movement, and that can be steered, cleaved and fused with
attractant and irradiation stimuli.
"""

from . import backend
from .engine import EngineConfig, SeedRegion, StepStats, World, init, run, run_world, step
from .lattice import Attractant, Habitat, IrradiationRegion, StimulusSet, load_habitat
from .particles import MotorMode, SensorParams

__version__ = "0.1.0"

__all__ = [
    "Attractant",
    "EngineConfig",
    "Habitat",
    "IrradiationRegion",
    "MotorMode",
    "SeedRegion",
    "SensorParams",
    "StepStats",
    "StimulusSet",
    "World",
    "backend",
    "init",
    "load_habitat",
    "run",
    "run_world",
    "step",
]
