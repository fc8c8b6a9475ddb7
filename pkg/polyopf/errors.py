"""Exception hierarchy for polyopf."""

from typing import Optional, Sequence


class PolyOpfError(Exception):
    """Base class for all polyopf errors."""


# --- case input -------------------------------------------------------------

class CaseError(PolyOpfError, ValueError):
    """Malformed or unsupported case data."""


class MissingBlockError(CaseError):
    def __init__(self, name: str):
        super().__init__(f"case is missing the mpc.{name} block")
        self.name = name


class RowArityError(CaseError):
    def __init__(self, block: str, row_index: int, expected: int, got: int):
        super().__init__(
            f"mpc.{block} row {row_index} has {got} columns, expected at least {expected}"
        )
        self.block = block
        self.row_index = row_index
        self.expected = expected
        self.got = got


class UnknownBusError(CaseError):
    def __init__(self, reference: str):
        super().__init__(f"reference to unknown bus: {reference}")
        self.reference = reference


class NonNumericTokenError(CaseError):
    def __init__(self, position: int, token: str):
        super().__init__(f"non-numeric token {token!r} at offset {position}")
        self.position = position
        self.token = token


class CaseInvariantError(CaseError):
    """A row violates a min <= max style invariant."""


class UnsupportedCaseFeatureError(CaseError):
    """Case uses a feature outside the supported model."""


class UnknownCaseError(CaseError):
    def __init__(self, name: str):
        super().__init__(f"unknown case: {name}")
        self.name = name


class OverrideError(CaseError):
    def __init__(self, key: str, reason: str):
        super().__init__(f"cannot apply override {key!r}: {reason}")
        self.key = key


class DegenerateBranchError(CaseError):
    def __init__(self, from_bus: int, to_bus: int):
        super().__init__(f"branch {from_bus}-{to_bus} has r = x = 0")
        self.from_bus = from_bus
        self.to_bus = to_bus


# --- models -----------------------------------------------------------------

class DimensionMismatchError(PolyOpfError, ValueError):
    def __init__(self, expected: int, got: int):
        super().__init__(f"expected a vector of length {expected}, got {got}")
        self.expected = expected
        self.got = got


class VariableSpaceMismatchError(PolyOpfError, ValueError):
    def __init__(self, left: int, right: int):
        super().__init__(f"polynomials over {left} and {right} variables")
        self.left = left
        self.right = right


# --- relaxations ------------------------------------------------------------

class RelaxationError(PolyOpfError):
    """A relaxation could not be built."""


class LevelTooLowError(RelaxationError):
    def __init__(self, order: int, required: int):
        super().__init__(f"relaxation order {order} is below the minimum {required}")
        self.order = order
        self.required = required


class BasisOverflowError(RelaxationError):
    def __init__(self, size: int, limit: int):
        super().__init__(f"moment basis of size {size} exceeds the cap {limit}")
        self.size = size
        self.limit = limit


class CoverageGapError(RelaxationError):
    def __init__(self, label: str, support: Sequence[int]):
        super().__init__(f"no clique covers {label} (support {sorted(support)})")
        self.label = label
        self.support = tuple(sorted(support))


class InconsistentOverlapError(RelaxationError):
    def __init__(self, cliques: Sequence[int], deviation: float):
        super().__init__(
            f"cliques {list(cliques)} disagree on shared voltages by {deviation:.3e}"
        )
        self.cliques = tuple(cliques)
        self.deviation = deviation


# --- solver / io ------------------------------------------------------------

class SolverFailureError(PolyOpfError):
    def __init__(self, status: str, message: str = "", iteration: Optional[int] = None):
        super().__init__(f"SDP solver ended with {status}: {message}".rstrip(": "))
        self.status = status
        self.iteration = iteration


class SdpaFormatError(PolyOpfError, ValueError):
    """Malformed SDPA sparse file."""


class ConfigError(PolyOpfError, ValueError):
    """Invalid run configuration."""
