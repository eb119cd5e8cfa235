from dataclasses import asdict, dataclass

from common.types import Ell, Number, ValidationFunction
from common.variants import Variant, Weighting


@dataclass(kw_only=True, frozen=True)
class SolverConfig:
    """
    Configuration of one solver run.
    :param variant: The solver loop to execute.
    :param ell: Window capacity (ℓ) of the affine variants, or None for an unbounded window.
    :param max_cycles: Maximum number of recorded cycles, rejected random epochs included.
    :param tol: Relative stopping tolerance on the Kaczmarz step length.
    :param seed: Seed of the row shuffle and of the random epochs.
    :param weighting: Row sampling scheme of the random variants.
    :param shuffle_rows: Apply a seeded permutation to the rows of A and b before iterating.
    :param max_no_progress: Consecutive no-progress random epochs after which the iterate counts as solved.
    :param breakdown_threshold: Relative threshold below which the affine window counts as degenerate.
    """
    variant: Variant = Variant.K
    ell: Ell = 10
    max_cycles: int = 100
    tol: float = 1e-12
    seed: int = 0
    weighting: Weighting = Weighting.UNIFORM
    shuffle_rows: bool = True
    max_no_progress: int = 100
    breakdown_threshold: float = 1e-14

    def __post_init__(self) -> None:
        object.__setattr__(self, "variant", Variant(self.variant))
        object.__setattr__(self, "weighting", Weighting(self.weighting))
        if self.variant.is_windowed and self.ell is not None:
            self.validate_config(self.ell, lambda x: x >= self.variant.min_ell, "ell",
                                 f"at least {self.variant.min_ell} for variant {self.variant}, or unbounded")
        self.validate_config(self.max_cycles, lambda x: x >= 1, "max_cycles", "at least 1")
        self.validate_config(self.tol, lambda x: x > 0, "tol", "greater than 0.0")
        self.validate_config(self.seed, lambda x: x >= 0, "seed", "a non-negative integer")
        self.validate_config(self.max_no_progress, lambda x: x >= 1, "max_no_progress", "at least 1")
        self.validate_config(self.breakdown_threshold, lambda x: 0 <= x < 1, "breakdown_threshold",
                             "between 0.0 (inclusive) and 1.0")

    @staticmethod
    def validate_config(value: Number, criteria: ValidationFunction, name: str, requirements: str) -> Number:
        """Validate configuration parameters based on provided criteria as a lambda function."""
        if not criteria(value):
            raise ValueError(f"Invalid value for {name}: {value}. Must be {requirements}.")
        return value

    def to_dict(self) -> dict:
        return {**asdict(self), "variant": str(self.variant), "weighting": str(self.weighting)}
