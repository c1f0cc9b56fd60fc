"""Exception types shared across the package."""


class PetSocialError(Exception):
    """Base class for all domain errors."""


class UnknownUserError(PetSocialError, KeyError):
    def __init__(self, user_id):
        super().__init__(f"unknown user: {user_id!r}")
        self.user_id = user_id


class UnknownTaskError(PetSocialError, KeyError):
    def __init__(self, task_id):
        super().__init__(f"unknown task: {task_id!r}")
        self.task_id = task_id


class UnknownStoreError(PetSocialError, KeyError):
    def __init__(self, store_id):
        super().__init__(f"unknown store: {store_id!r}")
        self.store_id = store_id


class SelfEdgeError(PetSocialError, ValueError):
    def __init__(self, user_id):
        super().__init__(f"self-edges are not allowed: {user_id!r}")
        self.user_id = user_id


class DuplicateEdgeError(PetSocialError, ValueError):
    pass


class DuplicateUserError(PetSocialError, ValueError):
    pass


class AlreadyCompletedError(PetSocialError, ValueError):
    def __init__(self, task_id):
        super().__init__(f"task already completed: {task_id!r}")
        self.task_id = task_id


class ExpiredTaskError(PetSocialError, ValueError):
    def __init__(self, task_id):
        super().__init__(f"task expired: {task_id!r}")
        self.task_id = task_id


class GraphFormatError(PetSocialError, ValueError):
    """Raised on malformed persistence records; carries the 1-based line number."""

    def __init__(self, line_no, message):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class DimensionMismatchError(PetSocialError, ValueError):
    pass


class NegativeEntryError(PetSocialError, ValueError):
    pass


class MatrixFormatError(PetSocialError, ValueError):
    pass


class NoCommonNeighborsError(PetSocialError, ValueError):
    """Network scoring is undefined for pairs without common neighbors."""


class NotComparableError(PetSocialError, ValueError):
    """Raised when a pair is adjacent or degenerate for network scoring."""


class MissingWeightsError(PetSocialError, ValueError):
    pass


class ShapeMismatchError(PetSocialError, ValueError):
    pass


class EmptyTrialError(PetSocialError, ValueError):
    pass
