"""Exceptions raised by the game services, grouped by CLI exit code"""


class GameDecompError(Exception):
    """Base error. ``exit_code`` maps the error to the CLI contract."""

    exit_code = 1

    def __init__(self, message, **details):
        super().__init__(message)
        self.message = message
        self.details = details

    def to_dict(self):
        payload = {'error': type(self).__name__, 'message': self.message}
        payload.update(self.details)
        return payload


# ==================== MALFORMED INPUT (exit 1) ====================

class InvalidGameError(GameDecompError):
    pass


class ShapeMismatchError(GameDecompError):
    def __init__(self, message, dimension, left, right):
        super().__init__(message, dimension=dimension, left=left, right=right)
        self.dimension = dimension


class InvalidProfileError(GameDecompError):
    pass


class InvalidSpecError(GameDecompError):
    pass


class UnknownClassError(GameDecompError):
    pass


class GameTooLargeError(GameDecompError):
    pass


# ==================== PRECONDITION FAILURES (exit 2) ====================

class PreconditionError(GameDecompError):
    exit_code = 2


class _ViolationError(PreconditionError):
    def __init__(self, message, worst_violation=None, **details):
        if worst_violation is not None:
            details['worst_violation'] = float(worst_violation)
        super().__init__(message, **details)
        self.worst_violation = worst_violation


class NotPotentialError(_ViolationError):
    pass


class NotZeroSumEquivalentError(_ViolationError):
    pass


class NotInBError(_ViolationError):
    pass


class NotZeroSumError(_ViolationError):
    pass


class NotSymmetricError(_ViolationError):
    pass


# ==================== INTERNAL CONSISTENCY (exit 3) ====================

class InternalConsistencyError(GameDecompError):
    exit_code = 3
