"""Compressible viscous fluid under a damped periodic beam: a fixed-domain solver.

The moving channel is mapped onto a fixed rectangle, the coupled problem is
split into a transport, a parabolic (Lame) and a beam problem, and the three
are coupled by Picard iteration over short time windows.
"""
from .config import SimConfig, config_to_text, parse_config, parse_config_text
from .coupling import (
    CouplingSettings,
    PicardReport,
    RunResult,
    Trajectory,
    WindowInit,
    apply_L,
    composite_delta,
    picard_solve,
    run_simulation,
)
from .errors import *  # noqa: F401,F403
from .fields import Grid, make_grid
from .sources import CoupledState, PhysParams

__all__ = [
    "CoupledState", "CouplingSettings", "Grid", "PhysParams", "PicardReport", "RunResult",
    "SimConfig", "Trajectory", "WindowInit", "apply_L", "composite_delta", "config_to_text",
    "make_grid", "parse_config", "parse_config_text", "picard_solve", "run_simulation",
]
__version__ = "0.1.0"
