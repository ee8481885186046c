"""Exception hierarchy shared across the package."""


class RepoLearnError(Exception):
    """Base class for all package errors."""


class ContractViolation(RepoLearnError, ValueError):
    """An argument broke a documented precondition (width mismatch, bad id, ...)."""


class CycleError(ContractViolation):
    """A dependency relation that must be acyclic contains a cycle."""


class ParameterError(RepoLearnError, ValueError):
    """Invalid numeric parameters, e.g. a CFF with ``a + b > n``."""


class GuardError(RepoLearnError):
    """A brute-force enumeration would exceed its size guard."""


class InconsistentInstanceError(RepoLearnError):
    """Oracle feedback contradicts the preconditions an algorithm relies on."""
