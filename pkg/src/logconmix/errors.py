"""Exception types shared across the package."""


class LogconmixError(Exception):
    """Base class for package-specific failures."""


class DegenerateSampleError(LogconmixError):
    """Fewer than two distinct points: no density estimate exists."""


class ZeroMixtureDensityError(LogconmixError):
    """The mixture density is zero at an observation; responsibilities undefined."""


class ComponentCollapsedError(LogconmixError):
    """The unknown component's responsibility mass fell below the floor."""


class AllWeightsKnownError(LogconmixError):
    """Every posterior weight points to the known component; no mean to estimate."""


class AllReplicationsFailedError(LogconmixError):
    """Every replication of a scenario failed; no aggregate to report."""


class CliInputError(LogconmixError):
    """Malformed command-line input (file contents or parameter values)."""
