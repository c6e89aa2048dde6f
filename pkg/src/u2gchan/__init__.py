"""Non-stationary UAV-to-ground MIMO channel simulator."""

__version__ = "0.1.0"

from .channel import ChannelGenerator, ChannelRealization, CirFrame, StationarySegment, advance_segments, assemble_cir
from .config import ScenarioConfig, default_config, load_config
from .errors import (ConfigurationError, DegenerateGeometryError, DomainError, GeometryError,
                     PowerUnderflowError, SequencingError, U2GError, UndefinedStatisticError)
from .scenario import AntennaArray, PostureTrack, TrajectoryTrack, posture_matrix

__all__ = [
    "ChannelGenerator", "ChannelRealization", "CirFrame", "StationarySegment", "advance_segments",
    "assemble_cir", "ScenarioConfig", "default_config", "load_config", "ConfigurationError",
    "DegenerateGeometryError", "DomainError", "GeometryError", "PowerUnderflowError", "SequencingError",
    "U2GError", "UndefinedStatisticError", "AntennaArray", "PostureTrack", "TrajectoryTrack",
    "posture_matrix",
]
