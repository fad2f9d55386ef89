"""Exception hierarchy shared by the library and the CLI."""


class SignTestError(Exception):
    """Base class for all errors raised by signtests."""


class DomainError(SignTestError, ValueError):
    """An argument lies outside the domain of the requested operation."""


class ModelError(SignTestError, ValueError):
    """A rotational model cannot be evaluated or is not a valid density generator."""


class CapacityError(SignTestError, MemoryError):
    """A simulation cell would exceed the configured work/memory budget."""


class GridError(SignTestError):
    """One or more cells of a simulation grid failed.

    ``report`` holds the cells that completed and ``failures`` lists
    ``(n, p, message)`` for each cell that did not.
    """

    def __init__(self, report, failures):
        self.report = report
        self.failures = list(failures)
        lines = ", ".join(f"(n={n}, p={p}): {msg}" for n, p, msg in self.failures)
        super().__init__(f"{len(self.failures)} cell(s) failed: {lines}")
