"""Exception types shared across the package."""


class InvalidConfigError(ValueError):
    """A configuration value violates its documented range."""


class InvalidInputError(ValueError):
    """An array argument has the wrong shape, ordering or sign."""


class DegenerateChromosomeError(ValueError):
    """A gene vector is all zero and cannot be normalized to the power budget."""


class SimulationError(RuntimeError):
    """A module error raised inside the Monte-Carlo loop, with its location."""
