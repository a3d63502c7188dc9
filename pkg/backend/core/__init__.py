"""
Core Domain Package

Types, units, error classes and partitioning shared by all tuning modules.
"""

from .errors import (
    TuningError,
    InvalidParameterError,
    ConfigurationError,
    HistoryValidationError,
    HistoryParseError,
    ZeroVectorError,
    ScenarioError,
    PlanError,
    SamplingError,
    ExecutorError,
    OptimizerError,
)
from .types import (
    PARAM_CEILING,
    ParameterBounds,
    DEFAULT_BOUNDS,
    ParamTriple,
    NetworkProfile,
    FileInfo,
    ChunkType,
    Chunk,
    HistoryEntry,
    ChunkDecision,
)
from .partition import ChunkThresholds, DEFAULT_THRESHOLDS, classify_file, partition_files

__all__ = [
    'TuningError',
    'InvalidParameterError',
    'ConfigurationError',
    'HistoryValidationError',
    'HistoryParseError',
    'ZeroVectorError',
    'ScenarioError',
    'PlanError',
    'SamplingError',
    'ExecutorError',
    'OptimizerError',
    'PARAM_CEILING',
    'ParameterBounds',
    'DEFAULT_BOUNDS',
    'ParamTriple',
    'NetworkProfile',
    'FileInfo',
    'ChunkType',
    'Chunk',
    'HistoryEntry',
    'ChunkDecision',
    'ChunkThresholds',
    'DEFAULT_THRESHOLDS',
    'classify_file',
    'partition_files',
]
