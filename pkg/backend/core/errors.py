"""
Error Types

Every failure raised by the tuning packages derives from TuningError so the
HTTP layer and the command line can map them onto one response contract.
"""


class TuningError(Exception):
    """Base class for all domain errors"""

    reason = "TUNING_ERROR"

    def to_dict(self):
        """Convert error to the API response format"""
        return {
            "success": False,
            "reason": self.reason,
            "details": str(self),
        }


class InvalidParameterError(TuningError):
    """A parameter triple or profile value is out of range"""

    reason = "INVALID_PARAMETER"


class ConfigurationError(TuningError):
    """A settings key holds an unusable value"""

    reason = "INVALID_CONFIG"


class HistoryValidationError(TuningError):
    """A history entry violates an entry invariant"""

    reason = "INVALID_HISTORY_ENTRY"


class HistoryParseError(TuningError):
    """A history file line could not be decoded"""

    reason = "HISTORY_PARSE_ERROR"

    def __init__(self, line_no, field, message=None):
        self.line_no = line_no
        self.field = field
        detail = message or "missing or malformed field"
        super().__init__(f"line {line_no}: field '{field}': {detail}")


class ZeroVectorError(TuningError):
    """Cosine similarity is undefined for an all-zero vector"""

    reason = "ZERO_VECTOR"


class ScenarioError(TuningError):
    """A simulation scenario or transfer request is unusable"""

    reason = "INVALID_SCENARIO"


class PlanError(TuningError):
    """A transfer plan cannot be built or executed"""

    reason = "INVALID_PLAN"


class SamplingError(TuningError):
    """A sample transfer could not produce a reading"""

    reason = "SAMPLING_FAILED"


class ExecutorError(TuningError):
    """An executor failed while moving a chunk"""

    reason = "EXECUTOR_FAILED"

    def __init__(self, chunk_id, message):
        self.chunk_id = chunk_id
        super().__init__(f"chunk {chunk_id}: {message}")


class OptimizerError(TuningError):
    """The optimizer has no usable model for a request"""

    reason = "OPTIMIZER_FAILED"
