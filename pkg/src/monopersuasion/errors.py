"""Exception hierarchy shared by the solvers, oracles and the CLI."""


class PersuasionError(Exception):
    """Base class; ``module`` names the component that raised it."""

    module = "monopersuasion"

    def __init__(self, message: str = "", *, module: str | None = None):
        super().__init__(message)
        if module is not None:
            self.module = module

    @property
    def code(self) -> str:
        return f"{self.module}.{type(self).__name__}"


class ShapeUnrecognized(PersuasionError, ValueError):
    module = "objective_kit"


class NoBitangent(PersuasionError, ValueError):
    module = "objective_kit"


class EmptyInterval(PersuasionError, ValueError):
    module = "prior_kit"


class MalformedSignal(PersuasionError, ValueError):
    module = "prior_kit"


class ShapeError(PersuasionError, ValueError):
    module = "solver"


class CertificateRequired(PersuasionError, ValueError):
    module = "continuous_solver"


class TooLarge(PersuasionError, ValueError):
    module = "oracle"


class NonmonotoneSignal(PersuasionError, ValueError):
    module = "censorship"


class ConfigInvalid(PersuasionError, ValueError):
    module = "cli"
