"""Exception hierarchy shared by the library and the command line."""


class FrobdistError(Exception):
    """Base class; ``exit_code`` is what the CLI returns for it."""

    exit_code = 1


class UsageError(FrobdistError, ValueError):
    """Bad arguments or violated preconditions."""

    exit_code = 1


class CapacityError(FrobdistError):
    """Input exceeds a configured size limit (magnitude cap, table budget)."""

    exit_code = 2


class BudgetError(FrobdistError):
    """An iterative computation ran out of its work budget.

    ``best`` holds the best partial answer reached, when there is one.
    """

    exit_code = 2

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best
