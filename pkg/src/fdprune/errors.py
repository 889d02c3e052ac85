"""Exception hierarchy. The CLI maps each family to an exit code."""


class FDPruneError(Exception):
    exit_code = 3


class ConfigError(FDPruneError, ValueError):
    """Invalid parameters or configuration (exit code 1)."""

    exit_code = 1


class DataError(FDPruneError, ValueError):
    """Malformed or unusable input data (exit code 2)."""

    exit_code = 2


class SolverError(FDPruneError, RuntimeError):
    """Numerical failure inside a solver (exit code 3)."""

    exit_code = 3


class StageError(FDPruneError):
    """Wraps an error raised inside a named pipeline stage."""

    def __init__(self, stage, cause):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause
        self.exit_code = getattr(cause, "exit_code", 3)
