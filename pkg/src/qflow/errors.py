"""Exception hierarchy shared by all qflow modules."""


class QFlowError(Exception):
    """Base class for all qflow errors."""


class GridError(QFlowError):
    """Invalid grid construction or grid mismatch between operands."""


class StateError(QFlowError):
    """Invalid wavefunction input (zero state, unresolved packet, ...)."""


class ConfigError(QFlowError):
    """Bad scenario configuration; message names the offending key."""

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


class MaskedRegionError(QFlowError):
    """A field was queried inside a masked node region."""


class TrajectoryError(QFlowError):
    """Trajectory integration failed (node collision or grid escape)."""

    def __init__(self, message, time=None, position=None, seed_index=None):
        super().__init__(message)
        self.time = time
        self.position = position
        self.seed_index = seed_index


class NumericalError(QFlowError):
    """A numerical contract was violated (divergence, variance too large, ...)."""
