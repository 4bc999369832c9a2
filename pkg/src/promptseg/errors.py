"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """An operation received arguments that violate its contract."""


class CheckpointFormatError(RuntimeError):
    """A checkpoint directory failed manifest or payload validation."""


class RleFormatError(ValueError):
    """A run-length encoded mask is inconsistent with its declared size."""


class IngestionError(RuntimeError):
    """An external annotation or detection file could not be parsed."""


class NoPriorError(RuntimeError):
    """Proposal merging was requested but no proposals are available."""


class TeacherQualityError(RuntimeError):
    """A trained teacher missed the configured quality floor."""


class DependencyError(RuntimeError):
    """A pipeline stage is missing artifacts from an earlier stage."""


class BenchBusyError(RuntimeError):
    """A benchmark run was requested while another one is active."""
