"""Exception hierarchy and exit-code contract."""


class DieudonneError(Exception):
    """Base class for all package errors."""


class InputError(DieudonneError):
    """Bad arguments, malformed files, unsupported parameters.  Exit code 2."""


class CapacityError(InputError):
    """Requested precision exceeds what the representation supports."""


class PrecisionError(DieudonneError):
    """A decision fell inside the guard band; rerun with higher N.  Exit code 3."""


class ExtensionError(DieudonneError):
    """A computation needs a base-field degree beyond the configured cap.

    Carries ``required_degree`` when the needed degree is known.  Exit code 3.
    """

    def __init__(self, message, required_degree=None):
        super().__init__(message)
        self.required_degree = required_degree


class ContainmentError(DieudonneError):
    """A lattice containment precondition fails."""


class RankError(DieudonneError):
    """A matrix or lattice is rank deficient where full rank is required."""


class InternalError(DieudonneError):
    """A property the theory guarantees failed to hold: a bug, not user error."""


class AcceptanceFailure(DieudonneError):
    """A structural cross-check (oracle disagreement, filtration violation).

    Exit code 4.
    """


def exit_code_for(exc):
    if isinstance(exc, InputError):
        return 2
    if isinstance(exc, (PrecisionError, ExtensionError)):
        return 3
    if isinstance(exc, AcceptanceFailure):
        return 4
    return 1
