"""Exception taxonomy shared across the package.

The CLI maps these onto exit codes: ConfigError -> 2, DataError -> 3,
NumericError -> 4.
"""


class ConfigError(ValueError):
    """Invalid run configuration or function arguments."""


class DataError(ValueError):
    """Unusable input data (bad CSV, class too small to stratify, ...)."""


class NumericError(ArithmeticError):
    """Non-finite values encountered during training or evaluation."""


class DegenerateTreeError(ValueError):
    """Single-leaf tree: there is no split structure to transfer."""


class DegeneratePairsError(ValueError):
    """Paired test with no nonzero differences left after zero removal."""
