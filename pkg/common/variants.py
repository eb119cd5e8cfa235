from enum import Enum

try:
    from enum import StrEnum
except ImportError:  # Python < 3.11
    class StrEnum(str, Enum):
        __str__ = str.__str__
        __format__ = str.__format__


class Variant(StrEnum):
    """Solver loops selectable by the driver, valued by their command-line names."""
    K = "k"
    K_LS = "k-ls"
    K_AFF_NAIVE = "k-aff"
    K_AFF_FAST = "k-aff-fast"
    RK = "rk"
    RK_LS = "rk-ls"
    RK_AFF = "rk-aff"

    @property
    def is_randomized(self) -> bool:
        return self in (Variant.RK, Variant.RK_LS, Variant.RK_AFF)

    @property
    def is_windowed(self) -> bool:
        """Variants whose search space is spanned by a window of previous iterates."""
        return self in (Variant.K_AFF_NAIVE, Variant.K_AFF_FAST, Variant.RK_AFF)

    @property
    def min_ell(self) -> int:
        return 1 if self is Variant.K_AFF_NAIVE else 2


class Weighting(StrEnum):
    """Row sampling schemes for randomized epochs."""
    UNIFORM = "uniform"
    ROW_NORM = "rownorm"


class StepKind(Enum):
    """What a recorded cycle did to the iterate."""
    PLAIN = 1
    LINE_SEARCH = 2
    AFFINE = 3
    REJECTED = 4
    CONVERGED = 5


class TerminalStatus(StrEnum):
    SOLVED = "solved"
    MAX_CYCLES = "max-cycles"
