"""Exception taxonomy shared across the package.

ContractError and its subclasses signal caller mistakes (bad arguments,
violated preconditions, malformed inputs) and map to CLI exit code 2.
Everything else derives from GroundlabError and maps to exit code 1.
"""


class GroundlabError(Exception):
    """Base for runtime failures (numeric, training, I/O, protocol)."""


class ContractError(ValueError):
    """A precondition or interface contract was violated by the caller."""


class ShapeError(ContractError):
    """Tensor shapes are incompatible for the requested operation."""


class IngestionError(ContractError):
    """A data file is malformed or internally inconsistent."""


class TrainingError(GroundlabError):
    """Training produced a non-finite or otherwise unusable state."""


class NumericError(GroundlabError):
    """A numeric degeneracy (zero norm, overflow) made a result undefined."""


class UndefinedCorrelationError(NumericError):
    """A correlation is undefined because one side has zero variance."""


class CapabilityError(GroundlabError):
    """The model or checkpoint does not support the requested operation."""


class ProtocolError(GroundlabError):
    """A remote scoring service replied with something malformed or invalid."""


class ScoringError(GroundlabError):
    """Scoring failed after retries were exhausted."""


class ConstructionError(GroundlabError):
    """Benchmark construction could not produce a valid item."""
