"""Exception hierarchy shared by all mixdr modules.

Every error carries a machine-parsable ``code`` of the form
``<module>.<category>`` so the CLI and the HTTP service can surface
failures with a stable identifier.
"""


class MixdrError(Exception):
    """Base class for all package errors."""

    code = "mixdr.error"

    def __init__(self, message, code=None):
        super().__init__(message)
        if code is not None:
            self.code = code


class InputError(MixdrError):
    """Rejected input: bad file, bad value, bad shape."""

    code = "input.invalid"


class DimensionMismatchError(InputError):
    """Operands with incompatible dimensions."""

    code = "input.dimension"


class SingularMatrixError(MixdrError):
    """A matrix required to be positive definite is numerically singular."""

    code = "linalg.singular"

    def __init__(self, message, eigen_index=None):
        super().__init__(message)
        self.eigen_index = eigen_index


class DegenerateFitError(MixdrError):
    """Estimation collapsed (empty component, unrecoverable singularity)."""

    code = "fit.degenerate"


class ContractError(MixdrError):
    """An operation was invoked outside its documented domain."""

    code = "mixdr.contract"
