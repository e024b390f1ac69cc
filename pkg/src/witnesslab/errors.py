"""Exception hierarchy shared by the library and the CLI."""


class WitnessLabError(Exception):
    """Base class for all library errors."""


class InputError(WitnessLabError, ValueError):
    """Malformed or unresolvable input (bad names, shapes, files)."""


class DimensionError(InputError):
    """Dimension profile violated or two operators do not match."""


class NotHermitianError(InputError):
    """Matrix is too far from Hermitian to be symmetrized."""


class PreconditionError(WitnessLabError, ValueError):
    """Input is well formed but violates an operation's precondition."""


class NotAWitnessError(PreconditionError):
    """Operator failed witness validation.

    ``certificate`` carries the validation record when one was computed.
    """

    def __init__(self, message, certificate=None):
        super().__init__(message)
        self.certificate = certificate
